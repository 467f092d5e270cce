"""Text serialisation of CRF models.

Layout::

    RECIPECRF v1
    sigma=<float>
    templates=<comma-separated names>
    T<TAB>BOS<TAB>tag<TAB>weight          (begin weights)
    T<TAB>tagA<TAB>tagB<TAB>weight        (transitions)
    F<TAB>template<TAB>value<TAB>tag<TAB>weight
    END<TAB><number of F lines>

The END line lets truncated files be rejected.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..corpus import NUM_TAGS, TAG_INDEX, TAGS, Tag
from .features import FeatureTemplateSet
from .model import CrfModel

MAGIC = "RECIPECRF"
VERSION = "v1"
BEGIN = "BOS"


class ModelFormatError(ValueError):
    pass


class UnsupportedModelVersion(ModelFormatError):
    pass


def _fmt(w: float) -> str:
    return format(float(w), ".17g")


def dumps_model(model: CrfModel) -> str:
    lines = [f"{MAGIC} {VERSION}", f"sigma={_fmt(model.sigma)}",
             "templates=" + ",".join(model.templates)]
    for k, t in enumerate(TAGS):
        lines.append(f"T\t{BEGIN}\t{t.value}\t{_fmt(model.start[k])}")
    for j, a in enumerate(TAGS):
        for k, b in enumerate(TAGS):
            lines.append(f"T\t{a.value}\t{b.value}\t{_fmt(model.transition[j, k])}")
    n_f = 0
    for (template, value), idx in sorted(model.attributes.items(), key=lambda kv: kv[1]):
        for k, t in enumerate(TAGS):
            lines.append(f"F\t{template}\t{value}\t{t.value}\t{_fmt(model.emission[idx, k])}")
            n_f += 1
    lines.append(f"END\t{n_f}")
    return "\n".join(lines) + "\n"


def save_model(model: CrfModel, path: str | Path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8", newline="\n")


def _float(s: str, lineno: int) -> float:
    try:
        w = float(s)
    except ValueError:
        raise ModelFormatError(f"line {lineno}: bad weight {s!r}") from None
    if not np.isfinite(w):
        raise ModelFormatError(f"line {lineno}: non-finite weight")
    return w


def _tag(s: str, lineno: int) -> int:
    try:
        return TAG_INDEX[Tag.parse(s)]
    except ValueError:
        raise ModelFormatError(f"line {lineno}: unknown tag {s!r}") from None


def loads_model(text: str) -> CrfModel:
    lines = text.split("\n")
    if not lines or not lines[0].startswith(MAGIC + " "):
        raise ModelFormatError("missing RECIPECRF header")
    version = lines[0][len(MAGIC) + 1:].strip()
    if version != VERSION:
        raise UnsupportedModelVersion(f"unsupported model version {version!r} (expected {VERSION})")
    if len(lines) < 3 or not lines[1].startswith("sigma=") or not lines[2].startswith("templates="):
        raise ModelFormatError("truncated model header")
    sigma = _float(lines[1][len("sigma="):], 2)
    try:
        templates = FeatureTemplateSet(lines[2][len("templates="):].split(","))
    except ValueError as e:
        raise ModelFormatError(f"line 3: {e}") from None

    start = np.full(NUM_TAGS, np.nan)
    trans = np.full((NUM_TAGS, NUM_TAGS), np.nan)
    attrs: dict[tuple[str, str], int] = {}
    rows: list[np.ndarray] = []
    n_f = 0
    end_seen = False
    for lineno, line in enumerate(lines[3:], start=4):
        if end_seen:
            if line:
                raise ModelFormatError(f"line {lineno}: content after END")
            continue
        cols = line.split("\t")
        kind = cols[0]
        if kind == "T" and len(cols) == 4:
            b = _tag(cols[2], lineno)
            if cols[1] == BEGIN:
                start[b] = _float(cols[3], lineno)
            else:
                trans[_tag(cols[1], lineno), b] = _float(cols[3], lineno)
        elif kind == "F" and len(cols) == 5:
            key = (cols[1], cols[2])
            if cols[1] not in templates:
                raise ModelFormatError(f"line {lineno}: template {cols[1]!r} not declared")
            a = attrs.get(key)
            if a is None:
                a = attrs[key] = len(attrs)
                rows.append(np.zeros(NUM_TAGS))
            rows[a][_tag(cols[3], lineno)] = _float(cols[4], lineno)
            n_f += 1
        elif kind == "END" and len(cols) == 2:
            if cols[1] != str(n_f):
                raise ModelFormatError(f"END expects {cols[1]} features, read {n_f}")
            end_seen = True
        else:
            raise ModelFormatError(f"line {lineno}: malformed line {line[:40]!r}")
    if not end_seen:
        raise ModelFormatError("truncated model file (no END line)")
    if np.isnan(start).any() or np.isnan(trans).any():
        raise ModelFormatError("missing transition weights")
    emission = np.vstack(rows) if rows else np.zeros((0, NUM_TAGS))
    return CrfModel(templates, attrs, emission, start, trans, sigma)


def load_model(path: str | Path) -> CrfModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))
