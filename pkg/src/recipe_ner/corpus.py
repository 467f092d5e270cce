"""Data model and column-format I/O for tagged ingredient phrases."""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence


class CorpusFormatError(ValueError):
    """Raised for malformed corpus files."""


class Tag(str, enum.Enum):
    NAME = "NAME"
    QUANTITY = "QUANTITY"
    UNIT = "UNIT"
    STATE = "STATE"
    SIZE = "SIZE"
    TEMP = "TEMP"
    DF = "DF"
    O = "O"  # noqa: E741

    @classmethod
    def parse(cls, s: str) -> "Tag":
        try:
            return cls(s)
        except ValueError:
            raise ValueError(f"unknown tag {s!r}") from None

    @property
    def index(self) -> int:
        return TAG_INDEX[self]

    @property
    def is_entity(self) -> bool:
        return self is not Tag.O


# Order matters: it is the tag index used by the CRF (Viterbi tie-break)
# and the component order of entity frequency vectors.
TAGS: tuple[Tag, ...] = tuple(Tag)
ENTITY_TAGS: tuple[Tag, ...] = tuple(t for t in TAGS if t is not Tag.O)
TAG_INDEX: dict[Tag, int] = {t: i for i, t in enumerate(TAGS)}
NUM_TAGS = len(TAGS)


@dataclass(frozen=True)
class Token:
    text: str
    tag: Tag = Tag.O

    def __post_init__(self):
        if not self.text or self.text != self.text.strip() or any(c.isspace() for c in self.text):
            raise ValueError(f"invalid token text {self.text!r}")
        if not isinstance(self.tag, Tag):
            object.__setattr__(self, "tag", Tag.parse(self.tag))


@dataclass(frozen=True)
class Phrase:
    tokens: tuple[Token, ...]
    id: str = ""
    source: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("a phrase needs at least one token")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, Tag | str]], id: str = "",
                   source: str | None = None) -> "Phrase":
        return cls(tuple(Token(t, Tag(g)) for t, g in pairs), id=id, source=source)

    @classmethod
    def untagged(cls, texts: Sequence[str], id: str = "", source: str | None = None) -> "Phrase":
        return cls(tuple(Token(t) for t in texts), id=id, source=source)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    @property
    def tags(self) -> list[Tag]:
        return [t.tag for t in self.tokens]

    def with_tokens(self, tokens: Iterable[Token]) -> "Phrase":
        return Phrase(tuple(tokens), id=self.id, source=self.source)

    def with_tags(self, tags: Sequence[Tag]) -> "Phrase":
        if len(tags) != len(self.tokens):
            raise ValueError("tag count does not match token count")
        return self.with_tokens(Token(t.text, g) for t, g in zip(self.tokens, tags))

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Dataset:
    phrases: tuple[Phrase, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "phrases", tuple(self.phrases))
        seen = set()
        for p in self.phrases:
            if p.id in seen:
                raise ValueError(f"duplicate phrase id {p.id!r}")
            seen.add(p.id)

    def __iter__(self) -> Iterator[Phrase]:
        return iter(self.phrases)

    def __len__(self) -> int:
        return len(self.phrases)

    def __getitem__(self, i: int) -> Phrase:
        return self.phrases[i]

    @property
    def num_tokens(self) -> int:
        return sum(len(p) for p in self.phrases)

    def by_id(self) -> dict[str, Phrase]:
        return {p.id: p for p in self.phrases}

    def subset(self, ids: Iterable[str], name: str | None = None) -> "Dataset":
        """Phrases whose id is in ``ids``, kept in dataset order."""
        keep = set(ids)
        return Dataset(tuple(p for p in self.phrases if p.id in keep),
                       name=self.name if name is None else name)


def renumber(phrases: Iterable[Phrase], name: str = "") -> Dataset:
    return Dataset(tuple(Phrase(p.tokens, id=str(i), source=p.source)
                         for i, p in enumerate(phrases)), name=name)


_SOURCE_PREFIX = "# source="


def load_conll(path: str | Path) -> Dataset:
    """Read a ``token<TAB>TAG`` corpus; blank lines separate phrases.

    A ``# source=<label>`` line directly before a phrase sets its source.
    """
    path = Path(path)
    phrases: list[Phrase] = []
    current: list[Token] = []
    source: str | None = None

    def flush():
        nonlocal current, source
        if current:
            phrases.append(Phrase(tuple(current), id=str(len(phrases)), source=source))
        elif source is not None:
            raise CorpusFormatError(f"{path}: source marker without a phrase")
        current, source = [], None

    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                flush()
                continue
            if line.startswith(_SOURCE_PREFIX):
                if current:
                    raise CorpusFormatError(f"{path}:{lineno}: source marker inside a phrase")
                source = line[len(_SOURCE_PREFIX):].strip() or None
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected 2 tab-separated columns, got {len(cols)}")
            text, tag = cols
            try:
                current.append(Token(text, Tag.parse(tag)))
            except ValueError as e:
                raise CorpusFormatError(f"{path}:{lineno}: {e}") from None
    flush()
    return Dataset(tuple(phrases), name=path.stem)


def dumps_conll(dataset: Dataset) -> str:
    blocks = []
    for p in dataset:
        lines = []
        if p.source:
            lines.append(_SOURCE_PREFIX + p.source)
        lines.extend(f"{t.text}\t{t.tag.value}" for t in p.tokens)
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def save_conll(dataset: Dataset, path: str | Path) -> None:
    Path(path).write_text(dumps_conll(dataset), encoding="utf-8", newline="\n")


BRACKETS = {"(": "-LRB-", ")": "-RRB-"}
UNBRACKETS = {v: k for k, v in BRACKETS.items()}

_FRACTION = re.compile(r"\d+/\d+")
_EDGE_PUNCT = set(".,;:!?\"'()[]{}")


def _split_word(word: str) -> list[str]:
    if _FRACTION.fullmatch(word):
        return [word]
    lead: list[str] = []
    trail: list[str] = []
    while word and word[0] in _EDGE_PUNCT:
        lead.append(word[0])
        word = word[1:]
    while word and word[-1] in _EDGE_PUNCT:
        trail.append(word[-1])
        word = word[:-1]
    # inner brackets: "cup(s)" -> cup ( s )
    core: list[str] = []
    if word:
        for piece in re.split(r"([()])", word):
            if piece:
                core.append(piece)
    return lead + core + trail[::-1]


def tokenize(raw: str) -> list[str]:
    """Split a raw ingredient phrase into token texts.

    >>> tokenize("1 1/2 cups sugar")
    ['1', '1/2', 'cups', 'sugar']
    >>> tokenize("butter (softened)")
    ['butter', '-LRB-', 'softened', '-RRB-']
    """
    out: list[str] = []
    for word in raw.split():
        out.extend(BRACKETS.get(piece, piece) for piece in _split_word(word))
    return out


def tag_vocabulary(dataset: Dataset) -> dict[Tag, int]:
    counts = Counter(t.tag for p in dataset for t in p.tokens)
    return {t: counts.get(t, 0) for t in TAGS}
