"""Stratified entity frequency sampling.

Phrases are grouped by their entity frequency vector (per-tag token counts
over the seven entity tags) and a fixed fraction is drawn from every group,
rounding each group's quota up so rare tag patterns always survive.
"""

from __future__ import annotations

import hashlib
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import ENTITY_TAGS, Dataset, Phrase

_ENTITY_POS = {t: i for i, t in enumerate(ENTITY_TAGS)}
_U64 = (1 << 64) - 1

FrequencyVector = tuple[int, ...]


def frequency_vector(phrase: Phrase) -> FrequencyVector:
    """Counts in ``ENTITY_TAGS`` order (NAME, QUANTITY, UNIT, STATE, SIZE, TEMP, DF)."""
    counts = [0] * len(ENTITY_TAGS)
    for tok in phrase.tokens:
        pos = _ENTITY_POS.get(tok.tag)
        if pos is not None:
            counts[pos] += 1
    return tuple(counts)


def describe_vector(vec: FrequencyVector) -> str:
    parts = [f"{t.value}:{c}" for t, c in zip(ENTITY_TAGS, vec) if c]
    return ",".join(parts) if parts else "-"


@dataclass(frozen=True)
class Cluster:
    key: FrequencyVector
    members: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SamplePlan:
    fraction: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError(f"fraction must be in (0, 1], got {self.fraction}")

    def quota(self, size: int) -> int:
        # round() keeps 0.1 * 30 (= 3.0000000000000004) from ceiling to 4
        return max(1, math.ceil(round(self.fraction * size, 9)))


def cluster(dataset: Dataset) -> list[Cluster]:
    """Group phrase ids by identical frequency vector; largest cluster first, ties by key."""
    groups: dict[FrequencyVector, list[str]] = defaultdict(list)
    for phrase in dataset:
        groups[frequency_vector(phrase)].append(phrase.id)
    clusters = [Cluster(k, tuple(v)) for k, v in groups.items()]
    clusters.sort(key=lambda c: (-len(c.members), c.key))
    return clusters


def _cluster_rng(seed: int, key: FrequencyVector) -> np.random.Generator:
    digest = hashlib.blake2b(repr(key).encode(), digest_size=8).digest()
    return np.random.Generator(np.random.PCG64((seed ^ int.from_bytes(digest, "little")) & _U64))


def sample_cluster(c: Cluster, plan: SamplePlan) -> list[str]:
    q = plan.quota(len(c.members))
    if q >= len(c.members):
        return list(c.members)
    picks = _cluster_rng(plan.seed, c.key).choice(len(c.members), size=q, replace=False)
    return [c.members[i] for i in sorted(picks)]


def stratified_sample(clusters: Iterable[Cluster], plan: SamplePlan) -> set[str]:
    chosen: set[str] = set()
    for c in clusters:
        chosen.update(sample_cluster(c, plan))
    return chosen


def sample_dataset(dataset: Dataset, plan: SamplePlan) -> Dataset:
    """Convenience: cluster, sample and return the chosen phrases in corpus order."""
    ids = stratified_sample(cluster(dataset), plan)
    return dataset.subset(ids, name=f"{dataset.name}-sefs" if dataset.name else "sefs")


@dataclass(frozen=True)
class SkewRow:
    rank: int
    size: int
    cumulative_fraction: float


@dataclass(frozen=True)
class SkewReport:
    rows: tuple[SkewRow, ...]
    total: int
    k50: int
    k90: int

    def to_tsv(self) -> str:
        lines = [
            f"# clusters\t{len(self.rows)}",
            f"# phrases\t{self.total}",
            f"# k50\t{self.k50}",
            f"# k90\t{self.k90}",
            "rank\tsize\tcumulative_fraction",
        ]
        lines += [f"{r.rank}\t{r.size}\t{r.cumulative_fraction:.6f}" for r in self.rows]
        return "\n".join(lines) + "\n"


def skew_report(clusters: Sequence[Cluster]) -> SkewReport:
    """Cumulative coverage by cluster rank and the number of clusters covering 50% / 90%.

    Thresholds are compared in integer arithmetic; ``k50``/``k90`` are 0 for an
    empty cluster list.
    """
    sizes = sorted((len(c.members) for c in clusters), reverse=True)
    total = sum(sizes)
    rows = []
    cum = 0
    k50 = k90 = 0
    for rank, size in enumerate(sizes, start=1):
        cum += size
        rows.append(SkewRow(rank, size, cum / total))
        if not k50 and 2 * cum >= total:
            k50 = rank
        if not k90 and 10 * cum >= 9 * total:
            k90 = rank
    return SkewReport(tuple(rows), total, k50, k90)
