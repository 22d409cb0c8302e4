"""Directed perturbation by iterated sign-gradient steps in an l_inf ball.

Each step moves the input along the sign of the loss gradient (untargeted:
the true-class loss is maximized) and re-projects onto the epsilon ball
around the original input, intersected with any declared feature bounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .embed import (
    EmbeddingModel,
    FeatureMap,
    GeneralClassifier,
    cross_entropy,
    cross_entropy_grads,
    effective_class_attributes,
    predict_class,
    predict_class_general,
    ranking_loss,
    ranking_loss_grads,
)
from .exceptions import NumericalError, ValidationError

__all__ = [
    "LOSS_KINDS",
    "AttackConfig",
    "PerturbedSample",
    "AttackSummary",
    "loss_grad_wrt_input",
    "ifgsm_steps",
    "ifgsm",
    "attack_dataset",
]

LOSS_KINDS = ("ranking", "cross_entropy")
CONTAINMENT_TOL = 1e-12


@dataclass(frozen=True)
class AttackConfig:
    """Budget and schedule of the sign-gradient attack.

    ``alpha`` defaults to ``epsilon / steps`` so the ball boundary is
    reachable without overshoot; ``loss`` must match the attacked model
    (ranking for the embedding model, cross_entropy for the general one).
    """

    epsilon: float
    alpha: float | None = None
    steps: int = 10
    loss: str = "ranking"

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValidationError("epsilon must be >= 0")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        if self.alpha is not None and self.alpha <= 0:
            raise ValidationError("alpha must be > 0")
        if self.loss not in LOSS_KINDS:
            raise ValidationError(f"unknown attack loss {self.loss!r}")

    @property
    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return self.epsilon / self.steps if self.epsilon > 0 else 1.0


@dataclass(frozen=True)
class PerturbedSample:
    """One attacked input with losses and predictions before/after."""

    original: np.ndarray
    perturbed: np.ndarray
    true_label: int
    predicted_label_clean: int
    predicted_label_perturbed: int
    loss_before: float
    loss_after: float

    def __post_init__(self) -> None:
        for name in ("original", "perturbed"):
            v = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if not np.isfinite(v).all():
                raise ValidationError(f"{name} vector contains non-finite values")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if self.original.shape != self.perturbed.shape:
            raise ValidationError("original and perturbed shapes differ")

    @property
    def flipped(self) -> bool:
        return self.predicted_label_perturbed != self.predicted_label_clean

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.perturbed - self.original)))


@dataclass(frozen=True)
class AttackSummary:
    """Exact-count accuracy summary of one attack run."""

    epsilon: float
    alpha: float
    steps: int
    n: int
    clean_acc: float
    adv_acc: float
    flip_rate: float

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "steps": self.steps,
            "n": self.n,
            "clean_acc": self.clean_acc,
            "adv_acc": self.adv_acc,
            "flip_rate": self.flip_rate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _check_pairing(predictor, loss: str) -> None:
    if isinstance(predictor, EmbeddingModel) and loss != "ranking":
        raise ValidationError("embedding model must be attacked with the ranking loss")
    if isinstance(predictor, GeneralClassifier) and loss != "cross_entropy":
        raise ValidationError("general classifier must be attacked with cross_entropy")


def loss_grad_wrt_input(dmap: FeatureMap, predictor, x, y_true: int,
                        class_attributes=None) -> np.ndarray:
    """Analytic gradient of the attacked loss w.r.t. the raw input vector."""
    if isinstance(predictor, EmbeddingModel):
        if class_attributes is None:
            raise ValidationError("class_attributes required for the embedding model")
        _, _, grad = ranking_loss_grads(dmap, predictor, x, y_true, class_attributes)
        return grad
    if isinstance(predictor, GeneralClassifier):
        _, _, _, grad = cross_entropy_grads(dmap, predictor, x, y_true)
        return grad
    raise ValidationError(f"cannot attack object of type {type(predictor).__name__}")


def ifgsm_steps(grad_fn, x: np.ndarray, epsilon: float, alpha: float, steps: int,
                bounds=None) -> np.ndarray:
    """Low-level attack loop: returns only the perturbed vector.

    ``grad_fn(x) -> gradient``; zero-gradient coordinates stay put
    (sign(0) = 0). The ball is always centered on the original ``x``.
    """
    x = np.asarray(x, dtype=np.float64)
    low = x - epsilon
    high = x + epsilon
    if bounds is not None:
        low = np.maximum(low, bounds[0])
        high = np.minimum(high, bounds[1])
    perturbed = x.copy()
    for _ in range(steps):
        grad = np.asarray(grad_fn(perturbed), dtype=np.float64)
        if not np.isfinite(grad).all():
            raise NumericalError("non-finite gradient during attack iteration")
        perturbed = np.clip(perturbed + alpha * np.sign(grad), low, high)
    return perturbed


def ifgsm(dmap: FeatureMap, predictor, x, y_true: int, config: AttackConfig,
          class_attributes=None, bounds=None) -> PerturbedSample:
    """Attack one input; runs exactly ``config.steps`` iterations."""
    _check_pairing(predictor, config.loss)
    x = np.asarray(x, dtype=np.float64)

    if isinstance(predictor, EmbeddingModel):
        if class_attributes is None:
            raise ValidationError("class_attributes required for the embedding model")
        loss_fn = lambda v: ranking_loss(dmap, predictor, v, y_true, class_attributes)
        predict = lambda v: predict_class(dmap, predictor, v, class_attributes)
    else:
        loss_fn = lambda v: cross_entropy(dmap, predictor, v, y_true)
        predict = lambda v: predict_class_general(dmap, predictor, v)
    grad_fn = lambda v: loss_grad_wrt_input(dmap, predictor, v, y_true, class_attributes)

    loss_before = loss_fn(x)
    if not math.isfinite(loss_before):
        raise NumericalError("non-finite loss at the clean input")
    perturbed = ifgsm_steps(grad_fn, x, config.epsilon, config.resolved_alpha,
                            config.steps, bounds=bounds)
    loss_after = loss_fn(perturbed)
    if not math.isfinite(loss_after):
        raise NumericalError("non-finite loss at the perturbed input")

    record = PerturbedSample(
        original=x,
        perturbed=perturbed,
        true_label=int(y_true),
        predicted_label_clean=predict(x),
        predicted_label_perturbed=predict(perturbed),
        loss_before=loss_before,
        loss_after=loss_after,
    )
    if record.max_deviation > config.epsilon + CONTAINMENT_TOL:
        raise NumericalError(
            f"perturbation escaped the epsilon ball: {record.max_deviation} > {config.epsilon}"
        )
    return record


def attack_dataset(dmap: FeatureMap, predictor, dataset: Dataset, indices,
                   config: AttackConfig):
    """Attack every indexed sample; returns ``(records, AttackSummary)``.

    Records follow the index order given; the summary counts are exact.
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise ValidationError("cannot attack an empty index list")
    records = []
    clean_correct = adv_correct = flips = 0
    for n in indices:
        record = ifgsm(
            dmap, predictor, dataset.features[n], int(dataset.labels[n]), config,
            class_attributes=dataset.class_attributes,
            bounds=dataset.feature_bounds,
        )
        records.append(record)
        clean_correct += record.predicted_label_clean == record.true_label
        adv_correct += record.predicted_label_perturbed == record.true_label
        flips += record.flipped
    n = indices.size
    summary = AttackSummary(
        epsilon=config.epsilon,
        alpha=config.resolved_alpha,
        steps=config.steps,
        n=int(n),
        clean_acc=clean_correct / n,
        adv_acc=adv_correct / n,
        flip_rate=flips / n,
    )
    return records, summary
