"""L2-regularised maximum-likelihood training for the CRF tagger."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ..corpus import NUM_TAGS, TAG_INDEX, Dataset
from . import _kernels
from .features import DEFAULT_TEMPLATES, FeatureTemplateSet, extract_features
from .model import CrfModel

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainOptions:
    sigma: float = 1.0
    max_iterations: int = 200
    tolerance: float = 1e-5
    seed: int = 0  # weights start at zero; reserved for data shuffling

    def __post_init__(self):
        if self.sigma <= 0 or self.max_iterations <= 0 or self.tolerance <= 0:
            raise ValueError("sigma, max_iterations and tolerance must be positive")


@dataclass
class CompiledCorpus:
    """A dataset flattened into the integer arrays the kernels consume."""

    attributes: dict[tuple[str, str], int]
    attr_idx: np.ndarray
    pos_ptr: np.ndarray
    seq_ptr: np.ndarray
    labels: np.ndarray

    @property
    def num_attributes(self) -> int:
        return len(self.attributes)


def compile_corpus(dataset: Dataset, templates: Sequence[str] = DEFAULT_TEMPLATES,
                   attributes: dict[tuple[str, str], int] | None = None) -> CompiledCorpus:
    """Flatten ``dataset``. New attributes are added to the vocabulary unless one is given."""
    grow = attributes is None
    attrs: dict[tuple[str, str], int] = {} if attributes is None else attributes
    attr_idx: list[int] = []
    pos_ptr = [0]
    seq_ptr = [0]
    labels: list[int] = []
    for phrase in dataset:
        texts = phrase.texts
        for i, tok in enumerate(phrase.tokens):
            for f in extract_features(texts, i, templates):
                a = attrs.get(f)
                if a is None:
                    if not grow:
                        continue
                    a = attrs[f] = len(attrs)
                attr_idx.append(a)
            pos_ptr.append(len(attr_idx))
            labels.append(TAG_INDEX[tok.tag])
        seq_ptr.append(len(labels))
    return CompiledCorpus(attrs, np.asarray(attr_idx, dtype=np.int64),
                          np.asarray(pos_ptr, dtype=np.int64),
                          np.asarray(seq_ptr, dtype=np.int64),
                          np.asarray(labels, dtype=np.int64))


def pack(model: CrfModel) -> np.ndarray:
    return np.concatenate([model.emission.ravel(), model.start, model.transition.ravel()])


def unpack(theta: np.ndarray, n_attr: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    K = NUM_TAGS
    return (theta[: n_attr * K].reshape(n_attr, K).copy(),
            theta[n_attr * K: n_attr * K + K].copy(),
            theta[n_attr * K + K:].reshape(K, K).copy())


def objective(theta: np.ndarray, corpus: CompiledCorpus, sigma: float) -> tuple[float, np.ndarray]:
    """Negative log-likelihood plus ``||theta||^2 / (2 sigma^2)`` and its gradient."""
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    nll, grad = _kernels.nll_grad(theta, corpus.num_attributes, NUM_TAGS,
                                  corpus.attr_idx, corpus.pos_ptr, corpus.seq_ptr, corpus.labels)
    inv = 1.0 / (sigma * sigma)
    return float(nll) + 0.5 * inv * float(theta @ theta), grad + inv * theta


def train(dataset: Dataset, templates: Sequence[str] = DEFAULT_TEMPLATES,
          opts: TrainOptions = TrainOptions()) -> CrfModel:
    """Fit a CRF with L-BFGS; the objective is convex so zero initialisation is used.

    ``model.history`` holds the objective at the start and after every accepted
    iteration.
    """
    if not len(dataset):
        raise TrainingError("cannot train on an empty dataset")
    templates = FeatureTemplateSet(templates)
    corpus = compile_corpus(dataset, templates)
    n_attr = corpus.num_attributes
    theta0 = np.zeros(n_attr * NUM_TAGS + NUM_TAGS + NUM_TAGS * NUM_TAGS)

    state = {"iter": 0, "last": None}

    def fun(theta):
        f, g = objective(theta, corpus, opts.sigma)
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite loss at iteration {state['iter']}")
        state["last"] = f
        return f, g

    f0, _ = fun(theta0)
    history = [f0]

    def callback(intermediate_result):
        state["iter"] += 1
        history.append(float(intermediate_result.fun))
        log.debug("iter %d objective %.6f", state["iter"], intermediate_result.fun)

    res = minimize(fun, theta0, jac=True, method="L-BFGS-B", callback=callback,
                   options={"maxiter": opts.max_iterations, "gtol": opts.tolerance,
                            "ftol": 0.0, "maxcor": 10})
    log.info("training stopped after %d iterations: %s (objective %.6f)",
             res.nit, res.message, res.fun)
    W, start, trans = unpack(res.x, n_attr)
    model = CrfModel(templates, dict(corpus.attributes), W, start, trans, opts.sigma)
    model.history = history
    return model


def token_accuracy(model: CrfModel, dataset: Dataset) -> float:
    from .model import viterbi

    total = correct = 0
    for p in dataset:
        pred = viterbi(model, p.texts)
        correct += sum(a is b for a, b in zip(pred, p.tags))
        total += len(p)
    return correct / total if total else 0.0
