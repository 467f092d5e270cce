"""Token-level scoring of predicted tags against gold tags."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus import ENTITY_TAGS, NUM_TAGS, TAG_INDEX, TAGS, Dataset, Tag


class AlignmentError(ValueError):
    def __init__(self, message: str, phrase_id: str | None = None):
        super().__init__(message)
        self.phrase_id = phrase_id


class ConfusionMatrix:
    """Gold x predicted token counts over the 8 tags (rows are gold)."""

    def __init__(self, counts: np.ndarray | None = None):
        self.counts = (np.zeros((NUM_TAGS, NUM_TAGS), dtype=np.int64) if counts is None
                       else np.asarray(counts, dtype=np.int64).copy())
        if self.counts.shape != (NUM_TAGS, NUM_TAGS) or (self.counts < 0).any():
            raise ValueError("confusion counts must be a non-negative 8x8 matrix")

    def __getitem__(self, key: tuple[Tag, Tag]) -> int:
        g, p = key
        return int(self.counts[TAG_INDEX[g], TAG_INDEX[p]])

    def add(self, gold: Tag, pred: Tag, n: int = 1) -> None:
        self.counts[TAG_INDEX[gold], TAG_INDEX[pred]] += n

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    def to_tsv(self) -> str:
        lines = ["gold\\pred\t" + "\t".join(t.value for t in TAGS)]
        for i, t in enumerate(TAGS):
            lines.append(t.value + "\t" + "\t".join(str(int(c)) for c in self.counts[i]))
        return "\n".join(lines) + "\n"


def _check_aligned(gold: Dataset, pred: Dataset) -> None:
    if len(gold) != len(pred):
        raise AlignmentError(f"gold has {len(gold)} phrases, prediction has {len(pred)}")
    for g, p in zip(gold, pred):
        if len(g) != len(p):
            raise AlignmentError(
                f"phrase {g.id}: {len(g)} gold tokens vs {len(p)} predicted", g.id)
        if g.texts != p.texts:
            raise AlignmentError(f"phrase {g.id}: token texts differ", g.id)


def confusion(gold: Dataset, pred: Dataset) -> ConfusionMatrix:
    _check_aligned(gold, pred)
    cm = ConfusionMatrix()
    for g, p in zip(gold, pred):
        for gt, pt in zip(g.tokens, p.tokens):
            cm.add(gt.tag, pt.tag)
    return cm


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


def _div(a: float, b: float) -> float:
    return a / b if b else 0.0


def per_tag_prf(cm: ConfusionMatrix) -> dict[Tag, PRF]:
    """P/R/F1 for every tag (O included); 0/0 counts as 0."""
    c = cm.counts
    out = {}
    for i, t in enumerate(TAGS):
        tp = c[i, i]
        p = _div(tp, c[:, i].sum())
        r = _div(tp, c[i, :].sum())
        out[t] = PRF(p, r, _div(2 * p * r, p + r))
    return out


def scored_tags(cm: ConfusionMatrix, include_outside: bool = False) -> list[Tag]:
    """Tags that enter macro averages: those with gold support (O only on request)."""
    support = cm.counts.sum(axis=1)
    tags = TAGS if include_outside else ENTITY_TAGS
    return [t for t in tags if support[TAG_INDEX[t]] > 0]


def macro_f1(prf: dict[Tag, PRF], tags: Iterable[Tag]) -> float:
    """Unweighted mean of per-tag F1 over ``tags``; 0 when ``tags`` is empty."""
    vals = [prf[t].f1 for t in tags]
    return float(np.mean(vals)) if vals else 0.0


def micro_prf(cm: ConfusionMatrix, include_outside: bool = False) -> PRF:
    """Pooled P/R/F1. Without O, only tokens whose gold or predicted tag is an entity count."""
    c = cm.counts
    idx = [TAG_INDEX[t] for t in (TAGS if include_outside else ENTITY_TAGS)]
    tp = sum(int(c[i, i]) for i in idx)
    pred_pos = sum(int(c[:, i].sum()) for i in idx)
    gold_pos = sum(int(c[i, :].sum()) for i in idx)
    p, r = _div(tp, pred_pos), _div(tp, gold_pos)
    return PRF(p, r, _div(2 * p * r, p + r))


def micro_f1(cm: ConfusionMatrix, include_outside: bool = False) -> float:
    return micro_prf(cm, include_outside).f1


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    per_tag: dict[Tag, PRF]
    support: dict[Tag, int]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_f1: float
    include_outside: bool = False
    warnings: dict[str, int] = field(default_factory=dict)

    def table_row(self) -> str:
        """``F1  P  R`` as percentages with 2 decimals."""
        return (f"{100 * self.macro_f1:.2f}\t{100 * self.macro_precision:.2f}\t"
                f"{100 * self.macro_recall:.2f}")

    def per_tag_tsv(self) -> str:
        lines = ["tag\tprecision\trecall\tf1\tsupport"]
        tags = TAGS if self.include_outside else ENTITY_TAGS
        for t in tags:
            m = self.per_tag[t]
            lines.append(f"{t.value}\t{100 * m.precision:.2f}\t{100 * m.recall:.2f}\t"
                         f"{100 * m.f1:.2f}\t{self.support[t]}")
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        lines = [
            "F1 (%)\tP (%)\tR (%)",
            self.table_row(),
            f"Macro-F1 (%)\t{100 * self.macro_f1:.2f}",
            f"Micro-F1 (%)\t{100 * self.micro_f1:.2f}",
        ]
        for k, v in self.warnings.items():
            lines.append(f"warning\t{k}\t{v}")
        return "\n".join(lines) + "\n"


def report_from_confusion(cm: ConfusionMatrix, include_outside: bool = False) -> EvalReport:
    prf = per_tag_prf(cm)
    tags = scored_tags(cm, include_outside)
    support = {t: int(cm.counts[TAG_INDEX[t]].sum()) for t in TAGS}
    return EvalReport(
        confusion=cm,
        per_tag=prf,
        support=support,
        macro_precision=float(np.mean([prf[t].precision for t in tags])) if tags else 0.0,
        macro_recall=float(np.mean([prf[t].recall for t in tags])) if tags else 0.0,
        macro_f1=macro_f1(prf, tags),
        micro_f1=micro_f1(cm, include_outside),
        include_outside=include_outside,
    )


def evaluate(gold: Dataset, pred: Dataset, include_outside: bool = False) -> EvalReport:
    return report_from_confusion(confusion(gold, pred), include_outside)


def evaluate_by_source(gold: Dataset, pred: Dataset,
                       include_outside: bool = False) -> dict[str, EvalReport]:
    """One report per gold ``source`` label (unlabelled phrases under ``"-"``) plus ``"all"``."""
    _check_aligned(gold, pred)
    groups: dict[str, ConfusionMatrix] = {}
    for g, p in zip(gold, pred):
        cm = groups.setdefault(g.source or "-", ConfusionMatrix())
        for gt, pt in zip(g.tokens, p.tokens):
            cm.add(gt.tag, pt.tag)
    out = {k: report_from_confusion(v, include_outside) for k, v in sorted(groups.items())}
    out["all"] = evaluate(gold, pred, include_outside)
    return out


@dataclass(frozen=True)
class ErrorPattern:
    gold: Tag
    pred: Tag
    count: int
    examples: tuple[str, ...]


def error_patterns(cm: ConfusionMatrix, gold: Dataset, pred: Dataset,
                   top_k: int = 5, max_examples: int = 5) -> list[ErrorPattern]:
    """Most frequent off-diagonal (gold, pred) cells with example tokens shown in context.

    Examples look like ``1 [slice] bread``: the phrase with the wrong token bracketed.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    _check_aligned(gold, pred)
    cells = [(int(cm.counts[i, j]), i, j) for i in range(NUM_TAGS) for j in range(NUM_TAGS)
             if i != j and cm.counts[i, j] > 0]
    cells.sort(key=lambda c: (-c[0], c[1], c[2]))
    cells = cells[:top_k]
    wanted = {(i, j): [] for _, i, j in cells}
    for g, p in zip(gold, pred):
        texts = g.texts
        for pos, (gt, pt) in enumerate(zip(g.tags, p.tags)):
            key = (TAG_INDEX[gt], TAG_INDEX[pt])
            bucket = wanted.get(key)
            if bucket is not None and len(bucket) < max_examples:
                ctx = texts[:pos] + [f"[{texts[pos]}]"] + texts[pos + 1:]
                bucket.append(" ".join(ctx))
    return [ErrorPattern(TAGS[i], TAGS[j], n, tuple(wanted[(i, j)])) for n, i, j in cells]


def error_patterns_tsv(patterns: Sequence[ErrorPattern]) -> str:
    lines = ["gold\tpred\tcount\texamples"]
    for e in patterns:
        lines.append(f"{e.gold.value}\t{e.pred.value}\t{e.count}\t" + " | ".join(e.examples))
    return "\n".join(lines) + "\n"


def learnability_curve(predictions: Sequence[Dataset], gold: Dataset,
                       include_outside: bool = False) -> list[dict[Tag, float]]:
    """Per-epoch F1 of each tag, one dict per prediction set."""
    tags = TAGS if include_outside else ENTITY_TAGS
    rows = []
    for pred in predictions:
        prf = per_tag_prf(confusion(gold, pred))
        rows.append({t: prf[t].f1 for t in tags})
    return rows


def learnability_tsv(curve: Sequence[dict[Tag, float]]) -> str:
    if not curve:
        return "epoch\n"
    tags = list(curve[0])
    lines = ["epoch\t" + "\t".join(t.value for t in tags)]
    for e, row in enumerate(curve, start=1):
        lines.append(f"{e}\t" + "\t".join(f"{100 * row[t]:.2f}" for t in tags))
    return "\n".join(lines) + "\n"
