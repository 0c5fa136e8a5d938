"""Two-space sample selection and purification for learning with noisy labels."""

import json

from ._tssd import (
    ContractViolation,
    Dataset,
    Error,
    Gmm1d,
    IdMismatch,
    InvalidSpec,
    NumericalFailure,
    ParseError,
    config_keys,
    cosine_similarity,
    cross_entropy_score,
    fit_gmm1d,
    from_csv,
    load,
    save,
)
from . import _tssd

__all__ = [
    "ContractViolation", "Dataset", "Error", "Gmm1d", "IdMismatch", "InvalidSpec", "NumericalFailure",
    "ParseError", "config_keys", "cosine_similarity", "cross_entropy_score", "distill", "evaluate",
    "fit_gmm1d", "from_csv", "generate", "load", "save", "train",
]


def _settings(kwargs):
    return {k: str(v) for k, v in kwargs.items()}


def generate(**settings):
    """Synthetic benchmark. Keyword arguments are config keys, e.g. n=2000, noise="sym:0.4"."""
    return _tssd.generate(_settings(settings))


def distill(dataset, **settings):
    """One selection pass on the dataset's own logits and features.

    Returns (tags, report): tags[i] is the tag of sample i, report is a dict.
    """
    tags, report = _tssd.distill(dataset, _settings(settings))
    return tags, json.loads(report)


def train(dataset, **settings):
    """Warm-up plus distillation rounds. Returns ({id: tag}, report) for the training ids."""
    tags, report = _tssd.train(dataset, _settings(settings))
    return tags, json.loads(report)


def evaluate(tags, truth):
    """Selection metrics of a tagging against a dataset with true labels."""
    if not isinstance(tags, dict):
        tags = dict(enumerate(tags))
    return json.loads(_tssd.evaluate(tags, truth))
