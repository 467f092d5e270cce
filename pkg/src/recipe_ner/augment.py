"""Label-preserving data augmentation for tagged phrases.

Three strategies are provided:

* ``LWTR``: label-wise token replacement, swapping a token for another
  training token that carries the same tag;
* ``SR``: synonym replacement from a flat-file lexicon, where multi-word
  synonyms expand into several tokens with the original tag;
* ``SIS``: shuffle within segments, permuting tokens inside maximal runs of
  one tag.

Randomness comes from numpy's PCG64 generator. Each augmented item gets its
own generator seeded from ``cfg.seed`` XOR a BLAKE2b hash of the phrase id and
copy index, so results do not depend on processing order.
"""

from __future__ import annotations

import enum
import hashlib
from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Dataset, Phrase, Tag, Token

DEFAULT_P = 0.3
_U64 = (1 << 64) - 1


class Strategy(str, enum.Enum):
    LWTR = "LWTR"
    SR = "SR"
    SIS = "SIS"

    @classmethod
    def parse(cls, s: str) -> "Strategy":
        try:
            return cls(s.strip().upper())
        except ValueError:
            raise ValueError(f"unknown augmentation strategy {s!r}") from None


@dataclass(frozen=True)
class AugmentConfig:
    strategy: Strategy
    p: float = DEFAULT_P
    copies: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if self.copies < 1:
            raise ValueError(f"copies must be >= 1, got {self.copies}")
        if not 0 <= self.seed <= _U64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def item_rng(seed: int, phrase_id: str, copy: int) -> np.random.Generator:
    digest = hashlib.blake2b(f"{phrase_id}\x1f{copy}".encode(), digest_size=8).digest()
    return np.random.Generator(np.random.PCG64((seed ^ int.from_bytes(digest, "little")) & _U64))


class LabelTokenIndex:
    """Tag -> multiset of token texts seen under that tag (kept in corpus order)."""

    def __init__(self, entries: Mapping[Tag, Sequence[str]] | None = None):
        self._entries: dict[Tag, tuple[str, ...]] = {
            Tag(t): tuple(v) for t, v in (entries or {}).items() if v}

    def __getitem__(self, tag: Tag) -> tuple[str, ...]:
        return self._entries.get(tag, ())

    def count(self, tag: Tag, text: str) -> int:
        return self[tag].count(text)

    def tags(self) -> list[Tag]:
        return list(self._entries)


def build_label_index(dataset: Dataset) -> LabelTokenIndex:
    if not len(dataset):
        raise ValueError("cannot build a label index from an empty dataset")
    entries: dict[Tag, list[str]] = defaultdict(list)
    for phrase in dataset:
        for tok in phrase.tokens:
            entries[tok.tag].append(tok.text)
    return LabelTokenIndex(entries)


class SynonymLexicon:
    """Case-insensitive word -> synonyms map. Entries with no synonyms are dropped."""

    def __init__(self, entries: Mapping[str, Sequence[str]] | None = None):
        self._entries: dict[str, tuple[str, ...]] = {}
        for word, syns in (entries or {}).items():
            syns = tuple(s.strip() for s in syns if s.strip())
            if syns:
                self._entries[word.lower()] = syns

    def get(self, word: str) -> tuple[str, ...]:
        return self._entries.get(word.lower(), ())

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def parse(cls, text: str) -> "SynonymLexicon":
        entries: dict[str, list[str]] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            word, sep, syns = line.partition("\t")
            if not sep:
                raise ValueError(f"synonym lexicon line {lineno}: expected word<TAB>syn1|syn2")
            entries.setdefault(word.strip(), []).extend(syns.split("|"))
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "SynonymLexicon":
        """Load ``word<TAB>syn1|syn2`` lines; ``None`` gives the bundled culinary lexicon."""
        if path is None:
            text = resources.files("recipe_ner.data").joinpath("synonyms.tsv").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.parse(text)


def lwtr(phrase: Phrase, index: LabelTokenIndex, cfg: AugmentConfig,
         rng: np.random.Generator) -> Phrase:
    out = []
    for tok in phrase.tokens:
        if rng.random() < cfg.p:
            pool = index[tok.tag]
            if pool:
                tok = Token(pool[int(rng.integers(len(pool)))], tok.tag)
        out.append(tok)
    return phrase.with_tokens(out)


def synonym_replace(phrase: Phrase, lex: SynonymLexicon, cfg: AugmentConfig,
                    rng: np.random.Generator) -> Phrase:
    out: list[Token] = []
    for tok in phrase.tokens:
        if rng.random() < cfg.p:
            syns = lex.get(tok.text)
            if syns:
                choice = syns[int(rng.integers(len(syns)))]
                out.extend(Token(w, tok.tag) for w in choice.split())
                continue
        out.append(tok)
    return phrase.with_tokens(out)


def segments(tags: Sequence[Tag]) -> list[tuple[int, int]]:
    """Maximal ``[start, end)`` runs of equal tags."""
    runs = []
    start = 0
    for i in range(1, len(tags) + 1):
        if i == len(tags) or tags[i] is not tags[start]:
            runs.append((start, i))
            start = i
    return runs


def shuffle_within_segments(phrase: Phrase, cfg: AugmentConfig,
                            rng: np.random.Generator) -> Phrase:
    toks = list(phrase.tokens)
    for start, end in segments(phrase.tags):
        if rng.random() < cfg.p and end - start > 1:
            perm = rng.permutation(end - start)
            toks[start:end] = [toks[start + j] for j in perm]
    return phrase.with_tokens(toks)


def augment_phrase(phrase: Phrase, cfg: AugmentConfig, copy: int,
                   index: LabelTokenIndex | None, lex: SynonymLexicon | None) -> Phrase:
    """One augmented variant, id ``<origId>#<strategy>#<copy>``."""
    rng = item_rng(cfg.seed, phrase.id, copy)
    if cfg.strategy is Strategy.LWTR:
        if index is None:
            raise ValueError("LWTR needs a label index")
        out = lwtr(phrase, index, cfg, rng)
    elif cfg.strategy is Strategy.SR:
        if lex is None:
            raise ValueError("SR needs a synonym lexicon")
        out = synonym_replace(phrase, lex, cfg, rng)
    else:
        out = shuffle_within_segments(phrase, cfg, rng)
    return Phrase(out.tokens, id=f"{phrase.id}#{cfg.strategy.value}#{copy}", source=phrase.source)


def augment_dataset(dataset: Dataset, cfgs: Iterable[AugmentConfig],
                    lex: SynonymLexicon | None = None) -> Dataset:
    """Originals first, then one block per (config, copy) holding a variant of every phrase.

    Replacement candidates for LWTR come from ``dataset`` itself, so pass the
    training split only.
    """
    cfgs = list(cfgs)
    if not cfgs:
        raise ValueError("at least one augmentation config is required")
    if not len(dataset):
        raise ValueError("cannot augment an empty dataset")
    index = build_label_index(dataset) if any(c.strategy is Strategy.LWTR for c in cfgs) else None
    if lex is None and any(c.strategy is Strategy.SR for c in cfgs):
        raise ValueError("SR augmentation requires a synonym lexicon")

    out = list(dataset.phrases)
    # copy indices keep counting when a strategy appears in several configs
    next_copy: dict[Strategy, int] = defaultdict(int)
    for cfg in cfgs:
        for _ in range(cfg.copies):
            copy = next_copy[cfg.strategy]
            next_copy[cfg.strategy] += 1
            out.extend(augment_phrase(p, cfg, copy, index, lex) for p in dataset)
    return Dataset(tuple(out), name=f"{dataset.name}-augmented" if dataset.name else "augmented")
