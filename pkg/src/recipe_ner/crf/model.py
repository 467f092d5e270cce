"""Linear-chain CRF model: scoring, exact inference and decoding."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..corpus import NUM_TAGS, TAG_INDEX, TAGS, Dataset, Phrase, Tag
from . import _kernels
from .features import DEFAULT_TEMPLATES, FeatureTemplateSet, extract_features

Attribute = tuple[str, str]


@dataclass
class CrfModel:
    """Emission weights ``emission[attr, tag]`` plus begin and transition weights.

    A feature is an (attribute, tag) pair where an attribute is a
    ``(template, value)`` pair; its flat weight index is ``attr * K + tag``.
    """

    templates: FeatureTemplateSet
    attributes: dict[Attribute, int]
    emission: np.ndarray
    start: np.ndarray
    transition: np.ndarray
    sigma: float = 1.0
    history: list[float] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.templates = FeatureTemplateSet(self.templates)
        K = NUM_TAGS
        self.emission = np.asarray(self.emission, dtype=np.float64).reshape(len(self.attributes), K)
        self.start = np.asarray(self.start, dtype=np.float64).reshape(K)
        self.transition = np.asarray(self.transition, dtype=np.float64).reshape(K, K)
        if sorted(self.attributes.values()) != list(range(len(self.attributes))):
            raise ValueError("attribute ids must be 0..n-1")
        if not (np.all(np.isfinite(self.transition)) and np.all(np.isfinite(self.start))):
            raise ValueError("transition weights must be finite")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @classmethod
    def zeros(cls, attributes: Sequence[Attribute] = (),
              templates: Sequence[str] = DEFAULT_TEMPLATES, sigma: float = 1.0) -> "CrfModel":
        attrs = {a: i for i, a in enumerate(dict.fromkeys(attributes))}
        return cls(FeatureTemplateSet(templates), attrs,
                   np.zeros((len(attrs), NUM_TAGS)), np.zeros(NUM_TAGS),
                   np.zeros((NUM_TAGS, NUM_TAGS)), sigma)

    @property
    def num_features(self) -> int:
        return self.emission.size

    def feature_index(self, template: str, value: str, tag: Tag) -> int | None:
        a = self.attributes.get((template, value))
        return None if a is None else a * NUM_TAGS + TAG_INDEX[Tag(tag)]

    def set_weight(self, template: str, value: str, tag: Tag, w: float) -> None:
        a = self.attributes.get((template, value))
        if a is None:
            raise KeyError((template, value))
        self.emission[a, TAG_INDEX[Tag(tag)]] = w

    def active_attributes(self, texts: Sequence[str]) -> list[list[int]]:
        out = []
        for i in range(len(texts)):
            ids = [self.attributes.get(f) for f in extract_features(texts, i, self.templates)]
            out.append([a for a in ids if a is not None])
        return out

    def emissions(self, texts: Sequence[str]) -> np.ndarray:
        """``(n, K)`` matrix of summed emission weights; unknown attributes contribute 0."""
        E = np.zeros((len(texts), NUM_TAGS))
        for i, ids in enumerate(self.active_attributes(texts)):
            if ids:
                E[i] = self.emission[ids].sum(axis=0)
        return E


def _tag_ids(tags: Sequence[Tag | str]) -> list[int]:
    return [TAG_INDEX[Tag(t)] for t in tags]


def score_sequence(model: CrfModel, texts: Sequence[str], tags: Sequence[Tag | str]) -> float:
    """Unnormalised log score: begin weight + emissions + adjacent transitions."""
    if len(texts) != len(tags):
        raise ValueError(f"{len(texts)} tokens but {len(tags)} tags")
    if not texts:
        return 0.0
    y = _tag_ids(tags)
    total = float(model.start[y[0]])
    for i, k in enumerate(y):
        for f in extract_features(texts, i, model.templates):
            a = model.attributes.get(f)
            if a is not None:
                total += float(model.emission[a, k])
        if i:
            total += float(model.transition[y[i - 1], k])
    return total


def _check_nonempty(texts: Sequence[str]) -> None:
    if not len(texts):
        raise ValueError("phrase must contain at least one token")


def log_partition(model: CrfModel, texts: Sequence[str]) -> float:
    _check_nonempty(texts)
    _, logz = _kernels.forward(model.emissions(texts), model.start, model.transition)
    return float(logz)


def viterbi(model: CrfModel, texts: Sequence[str]) -> list[Tag]:
    """Highest-scoring tag sequence; ties resolve to the lowest tag index."""
    _check_nonempty(texts)
    path, _ = _kernels.viterbi(model.emissions(texts), model.start, model.transition)
    return [TAGS[int(k)] for k in path]


def marginals(model: CrfModel, texts: Sequence[str]) -> np.ndarray:
    """``(n, K)`` posterior tag probabilities per position."""
    _check_nonempty(texts)
    E = model.emissions(texts)
    alpha, logz = _kernels.forward(E, model.start, model.transition)
    beta = _kernels.backward(E, model.transition)
    return np.exp(alpha + beta - logz)


def sequence_probability(model: CrfModel, texts: Sequence[str], tags: Sequence[Tag | str]) -> float:
    return float(np.exp(score_sequence(model, texts, tags) - log_partition(model, texts)))


def tag_phrase(model: CrfModel, phrase: Phrase) -> Phrase:
    return phrase.with_tags(viterbi(model, phrase.texts))


def tag_dataset(model: CrfModel, dataset: Dataset) -> Dataset:
    """Viterbi-decode every phrase. The input keeps its gold tags; ids and sources carry over."""
    return Dataset(tuple(tag_phrase(model, p) for p in dataset), name=dataset.name)
