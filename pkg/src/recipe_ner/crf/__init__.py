"""Linear-chain CRF tagger."""

from ._kernels import BACKEND
from .features import (DEFAULT_TEMPLATES, TEMPLATES, FeatureTemplateSet, extract_features,
                       word_shape)
from .io import ModelFormatError, UnsupportedModelVersion, load_model, save_model
from .model import (CrfModel, log_partition, marginals, score_sequence, sequence_probability,
                    tag_dataset, viterbi)
from .train import TrainingError, TrainOptions, token_accuracy, train

__all__ = [
    "BACKEND", "DEFAULT_TEMPLATES", "TEMPLATES", "FeatureTemplateSet", "extract_features",
    "word_shape", "ModelFormatError", "UnsupportedModelVersion", "load_model", "save_model",
    "CrfModel", "log_partition", "marginals", "score_sequence", "sequence_probability",
    "tag_dataset", "viterbi", "TrainingError", "TrainOptions", "token_accuracy", "train",
]
