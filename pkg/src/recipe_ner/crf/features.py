"""Token feature templates for the CRF tagger."""

from __future__ import annotations

import re
from typing import Iterable, Sequence

BOS = "BOS"
EOS = "EOS"

TEMPLATES: tuple[str, ...] = (
    "word",
    "lowercase",
    "prefix1", "prefix2", "prefix3", "prefix4",
    "suffix1", "suffix2", "suffix3", "suffix4",
    "shape",
    "is-digit",
    "is-fraction",
    "prev-word",
    "next-word",
    "prev2-word",
    "next2-word",
    "position-first",
    "position-last",
)
DEFAULT_TEMPLATES = TEMPLATES

_FRACTION = re.compile(r"\d+/\d+|\d+\$\d+/\d+")


class FeatureTemplateSet(tuple):
    """Ordered, validated, duplicate-free tuple of template names."""

    def __new__(cls, names: Iterable[str] = DEFAULT_TEMPLATES):
        names = tuple(names)
        if not names:
            raise ValueError("template set must not be empty")
        unknown = [n for n in names if n not in TEMPLATES]
        if unknown:
            raise ValueError(f"unknown feature template(s): {', '.join(unknown)}")
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature templates")
        return super().__new__(cls, names)

    @classmethod
    def parse(cls, spec: str) -> "FeatureTemplateSet":
        if spec.strip() in ("", "all", "default"):
            return cls(DEFAULT_TEMPLATES)
        return cls(s.strip() for s in spec.split(",") if s.strip())


def word_shape(word: str) -> str:
    """Map chars to X/x/d (others kept) and collapse runs: ``1/2`` -> ``d/d``."""
    out: list[str] = []
    for ch in word:
        if ch.isupper():
            c = "X"
        elif ch.islower():
            c = "x"
        elif ch.isdigit():
            c = "d"
        else:
            c = ch
        if not out or out[-1] != c:
            out.append(c)
    return "".join(out)


def _flag(b: bool) -> str:
    return "true" if b else "false"


def extract_features(texts: Sequence[str], position: int,
                     templates: Sequence[str] = DEFAULT_TEMPLATES) -> list[tuple[str, str]]:
    """Active ``(template, value)`` pairs at ``position``, in template order."""
    n = len(texts)
    if not 0 <= position < n:
        raise IndexError(f"position {position} outside phrase of length {n}")
    w = texts[position]
    feats: list[tuple[str, str]] = []
    for t in templates:
        if t == "word":
            feats.append((t, w))
        elif t == "lowercase":
            feats.append((t, w.lower()))
        elif t.startswith("prefix"):
            k = int(t[-1])
            if len(w) >= k:
                feats.append((t, w[:k]))
        elif t.startswith("suffix"):
            k = int(t[-1])
            if len(w) >= k:
                feats.append((t, w[-k:]))
        elif t == "shape":
            feats.append((t, word_shape(w)))
        elif t == "is-digit":
            feats.append((t, _flag(w.isdigit())))
        elif t == "is-fraction":
            feats.append((t, _flag(bool(_FRACTION.fullmatch(w)))))
        elif t == "prev-word":
            feats.append((t, texts[position - 1].lower() if position >= 1 else BOS))
        elif t == "next-word":
            feats.append((t, texts[position + 1].lower() if position + 1 < n else EOS))
        elif t == "prev2-word":
            feats.append((t, texts[position - 2].lower() if position >= 2 else BOS))
        elif t == "next2-word":
            feats.append((t, texts[position + 2].lower() if position + 2 < n else EOS))
        elif t == "position-first":
            feats.append((t, _flag(position == 0)))
        elif t == "position-last":
            feats.append((t, _flag(position == n - 1)))
        else:  # pragma: no cover - guarded by FeatureTemplateSet
            raise ValueError(f"unknown template {t!r}")
    return feats


def phrase_features(texts: Sequence[str],
                    templates: Sequence[str] = DEFAULT_TEMPLATES) -> list[list[tuple[str, str]]]:
    return [extract_features(texts, i, templates) for i in range(len(texts))]
