"""Rule-based cleaning of tagged ingredient phrases.

Rules run in a fixed order: special-character removal, quantity/unit
relabelling, mixed-number merging, plural unit normalisation. Each public
rule is a pure ``Phrase -> Phrase`` function; ``clean`` also counts edits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .corpus import Dataset, Phrase, Tag, Token

SPECIAL_CHARS = frozenset("+*~")
MIXED_NUMBER_JOINER = "$"

_INTEGER = re.compile(r"\d+")
_FRACTION = re.compile(r"\d+/\d+")
_NUMERAL = re.compile(r"\d+(?:[.,]\d+)?|\d+/\d+|\d+\$\d+/\d+")


class UnknownRuleError(ValueError):
    pass


def load_unit_lexicon(path: str | Path | None = None) -> frozenset[str]:
    """One lowercase unit stem per line; ``None`` loads the bundled list."""
    if path is None:
        text = resources.files("recipe_ner.data").joinpath("units.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(line.strip().lower() for line in text.splitlines() if line.strip())


DEFAULT_UNITS = load_unit_lexicon()


def unit_stem(text: str, units: frozenset[str] = DEFAULT_UNITS) -> str | None:
    """Singular form of ``text`` if it is a known unit (plural or not)."""
    low = text.lower()
    if low in units:
        return text
    for suffix in ("s", "es"):
        if low.endswith(suffix) and low[: -len(suffix)] in units:
            return text[: -len(suffix)]
    return None


def _strip_special_chars(phrase: Phrase) -> tuple[Phrase | None, int]:
    """Remove ``+ * ~`` from token texts, dropping tokens that become empty.

    Returns ``None`` for the phrase if every token is consumed.
    """
    out: list[Token] = []
    edits = 0
    for tok in phrase.tokens:
        text = "".join(c for c in tok.text if c not in SPECIAL_CHARS)
        if text != tok.text:
            edits += 1
        if text:
            out.append(Token(text, tok.tag))
    if not edits:
        return phrase, 0
    return (phrase.with_tokens(out) if out else None), edits


def _fix_entity_placement(phrase: Phrase, units: frozenset[str] = DEFAULT_UNITS) -> tuple[Phrase, int]:
    """Swap QUANTITY/UNIT labels that contradict the token text."""
    out: list[Token] = []
    edits = 0
    for tok in phrase.tokens:
        tag = tok.tag
        if tag is Tag.QUANTITY and unit_stem(tok.text, units) is not None:
            tag = Tag.UNIT
        elif tag is Tag.UNIT and _NUMERAL.fullmatch(tok.text):
            tag = Tag.QUANTITY
        if tag is not tok.tag:
            edits += 1
            tok = Token(tok.text, tag)
        out.append(tok)
    return (phrase.with_tokens(out) if edits else phrase), edits


def _merge_mixed_number(phrase: Phrase) -> tuple[Phrase, int]:
    """Join ``1`` + ``1/2`` into ``1$1/2`` when both carry the same QUANTITY or O tag."""
    toks = phrase.tokens
    out: list[Token] = []
    edits = 0
    i = 0
    while i < len(toks):
        a = toks[i]
        if (i + 1 < len(toks) and _INTEGER.fullmatch(a.text)
                and _FRACTION.fullmatch(toks[i + 1].text)
                and a.tag is toks[i + 1].tag and a.tag in (Tag.QUANTITY, Tag.O)):
            out.append(Token(a.text + MIXED_NUMBER_JOINER + toks[i + 1].text, a.tag))
            edits += 1
            i += 2
            continue
        out.append(a)
        i += 1
    return (phrase.with_tokens(out) if edits else phrase), edits


def _normalize_plural_units(phrase: Phrase, units: frozenset[str] = DEFAULT_UNITS) -> tuple[Phrase, int]:
    out: list[Token] = []
    edits = 0
    for tok in phrase.tokens:
        if tok.tag is Tag.UNIT:
            stem = unit_stem(tok.text, units)
            if stem is not None and stem != tok.text:
                tok = Token(stem, tok.tag)
                edits += 1
        out.append(tok)
    return (phrase.with_tokens(out) if edits else phrase), edits


def strip_special_chars(phrase: Phrase) -> Phrase | None:
    return _strip_special_chars(phrase)[0]


def fix_entity_placement(phrase: Phrase, units: frozenset[str] = DEFAULT_UNITS) -> Phrase:
    return _fix_entity_placement(phrase, units)[0]


def merge_mixed_number(phrase: Phrase) -> Phrase:
    return _merge_mixed_number(phrase)[0]


def normalize_plural_units(phrase: Phrase, units: frozenset[str] = DEFAULT_UNITS) -> Phrase:
    return _normalize_plural_units(phrase, units)[0]


@dataclass(frozen=True)
class CleaningRule:
    name: str
    enabled: bool = True


RULE_ORDER: tuple[str, ...] = (
    "strip_special_chars",
    "fix_entity_placement",
    "merge_mixed_number",
    "normalize_plural_units",
)


def default_rules() -> list[CleaningRule]:
    return [CleaningRule(n) for n in RULE_ORDER]


def parse_rules(spec: str) -> list[CleaningRule]:
    """Parse ``all``, ``none`` or a comma-separated list of rule names."""
    spec = spec.strip()
    if spec == "all":
        return default_rules()
    if spec in ("none", ""):
        return [CleaningRule(n, enabled=False) for n in RULE_ORDER]
    names = [s.strip() for s in spec.split(",") if s.strip()]
    unknown = [n for n in names if n not in RULE_ORDER]
    if unknown:
        raise UnknownRuleError(f"unknown cleaning rule(s): {', '.join(unknown)}")
    return [CleaningRule(n, enabled=n in names) for n in RULE_ORDER]


@dataclass
class CleaningReport:
    counts: dict[str, int] = field(default_factory=lambda: {n: 0 for n in RULE_ORDER})
    dropped_phrases: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_tsv(self) -> str:
        lines = ["rule\tedits"]
        lines += [f"{n}\t{self.counts.get(n, 0)}" for n in RULE_ORDER]
        lines.append(f"dropped_phrases\t{self.dropped_phrases}")
        return "\n".join(lines) + "\n"


def clean(dataset: Dataset, rules: Sequence[CleaningRule] | None = None,
          units: frozenset[str] = DEFAULT_UNITS) -> tuple[Dataset, CleaningReport]:
    """Apply enabled rules phrase by phrase; rules always run in ``RULE_ORDER``."""
    if rules is None:
        rules = default_rules()
    names = [r.name for r in rules]
    unknown = [n for n in names if n not in RULE_ORDER]
    if unknown:
        raise UnknownRuleError(f"unknown cleaning rule(s): {', '.join(unknown)}")
    if len(set(names)) != len(names):
        raise ValueError("duplicate cleaning rule names")
    enabled = {r.name for r in rules if r.enabled}

    funcs: dict[str, Callable[[Phrase], tuple[Phrase | None, int]]] = {
        "strip_special_chars": _strip_special_chars,
        "fix_entity_placement": lambda p: _fix_entity_placement(p, units),
        "merge_mixed_number": _merge_mixed_number,
        "normalize_plural_units": lambda p: _normalize_plural_units(p, units),
    }
    report = CleaningReport()
    out: list[Phrase] = []
    for phrase in dataset:
        p: Phrase | None = phrase
        for name in RULE_ORDER:
            if name not in enabled:
                continue
            p, n = funcs[name](p)
            report.counts[name] += n
            if p is None:
                report.dropped_phrases += 1
                break
        if p is not None:
            out.append(p)
    return Dataset(tuple(out), name=dataset.name), report
