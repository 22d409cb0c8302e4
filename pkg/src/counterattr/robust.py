"""Adversarial training and the robustification (recovered-accuracy) measure.

Adversarial training regenerates the attack against the current parameters at
every SGD step and descends a convex mix of the clean and adversarial losses.
With a zero-radius attack, or with all weight on the clean term, it replays
standard training bit-exactly.
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
    TrainConfig,
    _ce_core,
    _ranking_grads_core,
    _run_sgd,
    _train_indices,
    effective_class_attributes,
)
from .exceptions import ValidationError
from .perturb import AttackConfig, ifgsm_steps
from .rng import substream

__all__ = [
    "RobustTrainConfig",
    "RobustificationReport",
    "adversarial_train",
    "robustification_measure",
    "make_report",
    "write_sweep_csv",
]


@dataclass(frozen=True)
class RobustTrainConfig:
    """Standard training config plus the inner attack and the loss mix.

    ``mix_alpha`` weights the clean loss; ``1 - mix_alpha`` the adversarial
    one.
    """

    base: TrainConfig
    attack: AttackConfig
    mix_alpha: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.mix_alpha <= 1.0:
            raise ValidationError("mix_alpha must lie in [0, 1]")


@dataclass(frozen=True)
class RobustificationReport:
    """Accuracy quadruple plus the recovered-accuracy measure (None = n/a)."""

    clean_acc_standard: float
    adv_acc_standard: float
    clean_acc_robust: float
    adv_acc_robust: float
    measure: float | None

    def __post_init__(self) -> None:
        for name in ("clean_acc_standard", "adv_acc_standard",
                     "clean_acc_robust", "adv_acc_robust"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")

    def to_json_dict(self) -> dict:
        return {
            "clean_acc_standard": self.clean_acc_standard,
            "adv_acc_standard": self.adv_acc_standard,
            "clean_acc_robust": self.clean_acc_robust,
            "adv_acc_robust": self.adv_acc_robust,
            "measure": self.measure,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def robustification_measure(clean_acc_standard: float, adv_acc_standard: float,
                            adv_acc_robust: float) -> float | None:
    """Fraction of the attack-induced accuracy loss recovered by the robust model.

    1 means the robust model restored the standard model's clean accuracy
    under attack, 0 means no recovery. Returns None (not applicable) when the
    attack caused no drop — never 0, which would misread as "no recovery".
    """
    drop = clean_acc_standard - adv_acc_standard
    if drop <= 0.0:
        return None
    measure = (adv_acc_robust - adv_acc_standard) / drop
    return min(1.0, max(0.0, measure))


def make_report(clean_acc_standard: float, adv_acc_standard: float,
                clean_acc_robust: float, adv_acc_robust: float) -> RobustificationReport:
    return RobustificationReport(
        clean_acc_standard=clean_acc_standard,
        adv_acc_standard=adv_acc_standard,
        clean_acc_robust=clean_acc_robust,
        adv_acc_robust=adv_acc_robust,
        measure=robustification_measure(clean_acc_standard, adv_acc_standard, adv_acc_robust),
    )


def _mix(mix_alpha: float, clean_grad, adv_grad):
    if clean_grad is None and adv_grad is None:
        return None
    if clean_grad is None:
        return (1.0 - mix_alpha) * adv_grad
    if adv_grad is None:
        return mix_alpha * clean_grad
    return mix_alpha * clean_grad + (1.0 - mix_alpha) * adv_grad


def adversarial_train(dataset: Dataset, split, dmap: FeatureMap,
                      config: RobustTrainConfig, model_kind: str = "embedding", *,
                      normalize_class_attributes: bool = False,
                      prediction_rule: str = "compatibility-argmax"):
    """Adversarially train an embedding model or the general classifier.

    Every SGD step attacks the sample against the current parameters, then
    descends ``mix_alpha * L(x) + (1 - mix_alpha) * L(x_hat)``. Deterministic
    from the base config's seed, with the same substreams as the standard
    trainers.
    """
    if model_kind not in ("embedding", "general"):
        raise ValidationError(f"unknown model kind {model_kind!r}")
    expected_loss = "ranking" if model_kind == "embedding" else "cross_entropy"
    if config.attack.loss != expected_loss:
        raise ValidationError(
            f"{model_kind} model requires the {expected_loss} attack loss, "
            f"got {config.attack.loss!r}"
        )
    indices = _train_indices(split)
    base = config.base
    eps = config.attack.epsilon
    alpha = config.attack.resolved_alpha
    steps = config.attack.steps
    mix_alpha = config.mix_alpha
    bounds = dataset.feature_bounds

    if model_kind == "embedding":
        if dmap.input_dim != dataset.feature_dim:
            raise ValidationError(
                f"feature map expects dim {dmap.input_dim}, dataset has {dataset.feature_dim}"
            )
        probe = EmbeddingModel(
            weights=np.zeros((dmap.output_dim, dataset.num_attributes)),
            normalize_class_attributes=normalize_class_attributes,
        )
        attrs = effective_class_attributes(probe, dataset.class_attributes)
        if attrs.shape[0] < 2:
            raise ValidationError("training needs at least 2 classes")
        weights = substream(base.seed, "sje-init").normal(
            0.0, base.weight_init_sigma, size=(dmap.output_dim, dataset.num_attributes)
        )
        shuffle_rng = substream(base.seed, "sje-shuffle")

        def grad_fn(x, y):
            loss_c, dw_c, _ = _ranking_grads_core(
                dmap.forward(x), weights, attrs, y, base.margin_scale
            )
            if not math.isfinite(loss_c):
                return loss_c, [None]  # let the epoch loop report divergence
            if mix_alpha == 1.0:
                return loss_c, [dw_c]

            def attack_grad(v):
                _, _, d_theta = _ranking_grads_core(
                    dmap.forward(v), weights, attrs, y, base.margin_scale
                )
                if d_theta is None:
                    return np.zeros_like(v)
                return dmap.input_grad(v, d_theta)

            x_hat = x if eps == 0.0 else ifgsm_steps(attack_grad, x, eps, alpha, steps,
                                                     bounds=bounds)
            if np.array_equal(x_hat, x):
                # Degenerate attack: both terms coincide, reuse the clean
                # gradient so the standard trajectory is replayed bit-exactly.
                return loss_c, [dw_c]
            loss_a, dw_a, _ = _ranking_grads_core(
                dmap.forward(x_hat), weights, attrs, y, base.margin_scale
            )
            return (mix_alpha * loss_c + (1.0 - mix_alpha) * loss_a,
                    [_mix(mix_alpha, dw_c, dw_a)])

        history = _run_sgd([weights], dataset.features, dataset.labels, indices,
                           base.epochs, base.learning_rate, shuffle_rng, grad_fn,
                           "adversarial embedding training")
        return EmbeddingModel(
            weights=weights,
            normalize_class_attributes=normalize_class_attributes,
            prediction_rule=prediction_rule,
            margin_scale=base.margin_scale,
            loss_history=tuple(history),
        )

    if np.unique(dataset.labels[indices]).size < 2:
        raise ValidationError("train split contains a single class")
    d, c = dataset.feature_dim, dataset.num_classes
    weights = substream(base.seed, "general-init").normal(
        0.0, base.weight_init_sigma, size=(d, c)
    )
    bias = np.zeros(c)
    shuffle_rng = substream(base.seed, "general-shuffle")

    def grad_fn(x, y):
        loss_c, dw_c, db_c, _ = _ce_core(x, weights, bias, y)
        if not math.isfinite(loss_c):
            return loss_c, [None, None]
        if mix_alpha == 1.0:
            return loss_c, [dw_c, db_c]

        def attack_grad(v):
            _, _, _, d_x = _ce_core(v, weights, bias, y)
            return d_x

        x_hat = x if eps == 0.0 else ifgsm_steps(attack_grad, x, eps, alpha, steps,
                                                 bounds=bounds)
        if np.array_equal(x_hat, x):
            return loss_c, [dw_c, db_c]
        loss_a, dw_a, db_a, _ = _ce_core(x_hat, weights, bias, y)
        return (mix_alpha * loss_c + (1.0 - mix_alpha) * loss_a,
                [_mix(mix_alpha, dw_c, dw_a), _mix(mix_alpha, db_c, db_a)])

    history = _run_sgd([weights, bias], dataset.features, dataset.labels, indices,
                       base.epochs, base.learning_rate, shuffle_rng, grad_fn,
                       "adversarial general training")
    return GeneralClassifier(weights=weights, bias=bias, loss_history=tuple(history))


def write_sweep_csv(path, rows) -> None:
    """Write the plot-ready per-epsilon table for one classifier.

    Rows are ``(epsilon, clean_acc, adv_acc_standard, adv_acc_robust,
    measure-or-None)``; a not-applicable measure is written as ``na``.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epsilon,clean_acc,adv_acc_standard,adv_acc_robust,measure\n")
        for epsilon, clean, adv_s, adv_r, measure in rows:
            cell = "na" if measure is None else repr(float(measure))
            fh.write(
                f"{float(epsilon)!r},{float(clean)!r},{float(adv_s)!r},"
                f"{float(adv_r)!r},{cell}\n"
            )
