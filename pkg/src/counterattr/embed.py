"""Attribute-embedding classifier and a direct softmax baseline.

The embedding route scores an input against each class through a bilinear
compatibility between mapped features and the class attribute signature, and
is trained with a margin ranking loss so the true class wins every pairwise
comparison by a margin. The general route is plain multinomial logistic
regression on the raw features. Both are trained by deterministic per-sample
SGD so repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, SplitAssignment
from .exceptions import NumericalError, ValidationError
from .rng import substream

__all__ = [
    "PREDICTION_RULES",
    "FeatureMap",
    "TrainConfig",
    "EmbeddingModel",
    "GeneralClassifier",
    "effective_class_attributes",
    "compatibility",
    "predict_attributes",
    "predict_class",
    "predict_class_general",
    "ranking_loss",
    "ranking_loss_grads",
    "cross_entropy",
    "cross_entropy_grads",
    "train_sje",
    "train_general",
    "accuracy",
]

PREDICTION_RULES = ("compatibility-argmax", "nearest-attribute")


class FeatureMap:
    """Differentiable map applied to raw inputs before either classifier.

    Either the identity or a fixed one-hidden-layer tanh network standing in
    for a deep feature extractor. The map itself is never trained; it only
    has to be differentiable so input gradients can flow through it.
    """

    def __init__(self, kind: str, input_dim: int, output_dim: int,
                 w1: np.ndarray | None = None, b1: np.ndarray | None = None,
                 w2: np.ndarray | None = None):
        if kind not in ("identity", "hidden"):
            raise ValidationError(f"unknown feature map kind {kind!r}")
        self.kind = kind
        self.input_dim = int(input_dim)
        self.output_dim = int(output_dim)
        if kind == "identity":
            if input_dim != output_dim:
                raise ValidationError("identity map must preserve the dimension")
            self.w1 = self.b1 = self.w2 = None
        else:
            w1 = np.ascontiguousarray(w1, dtype=np.float64)
            b1 = np.ascontiguousarray(b1, dtype=np.float64)
            w2 = np.ascontiguousarray(w2, dtype=np.float64)
            h = w1.shape[1]
            if w1.shape != (input_dim, h) or b1.shape != (h,) or w2.shape != (h, output_dim):
                raise ValidationError(
                    f"inconsistent hidden map shapes {w1.shape}, {b1.shape}, {w2.shape}"
                )
            if not (np.isfinite(w1).all() and np.isfinite(b1).all() and np.isfinite(w2).all()):
                raise ValidationError("feature map parameters contain non-finite values")
            for p in (w1, b1, w2):
                p.setflags(write=False)
            self.w1, self.b1, self.w2 = w1, b1, w2

    @classmethod
    def identity(cls, dim: int) -> "FeatureMap":
        return cls("identity", dim, dim)

    @classmethod
    def hidden(cls, w1: np.ndarray, b1: np.ndarray, w2: np.ndarray) -> "FeatureMap":
        return cls("hidden", w1.shape[0], w2.shape[1], w1=w1, b1=b1, w2=w2)

    @classmethod
    def random_hidden(cls, input_dim: int, hidden_dim: int, output_dim: int,
                      sigma: float = 0.5, seed: int = 0) -> "FeatureMap":
        rng = substream(seed, "feature-map")
        return cls.hidden(
            rng.normal(0.0, sigma, size=(input_dim, hidden_dim)),
            rng.normal(0.0, sigma, size=(hidden_dim,)),
            rng.normal(0.0, sigma, size=(hidden_dim, output_dim)),
        )

    @property
    def hidden_dim(self) -> int | None:
        return None if self.kind == "identity" else self.w1.shape[1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.input_dim,):
            raise ValidationError(f"expected input of shape ({self.input_dim},), got {x.shape}")
        if self.kind == "identity":
            return x
        return np.tanh(x @ self.w1 + self.b1) @ self.w2

    def input_grad(self, x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        """Pull an output-space gradient back to the input (vector-Jacobian product)."""
        upstream = np.asarray(upstream, dtype=np.float64)
        if upstream.shape != (self.output_dim,):
            raise ValidationError(
                f"expected upstream gradient of shape ({self.output_dim},), got {upstream.shape}"
            )
        if self.kind == "identity":
            return upstream
        x = np.asarray(x, dtype=np.float64)
        act = np.tanh(x @ self.w1 + self.b1)
        return self.w1 @ ((1.0 - act * act) * (self.w2 @ upstream))


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by both trainers."""

    learning_rate: float
    epochs: int
    margin_scale: float = 0.1
    seed: int = 0
    weight_init_sigma: float = 0.01

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.margin_scale < 0:
            raise ValidationError("margin_scale must be >= 0")
        if self.weight_init_sigma < 0:
            raise ValidationError("weight_init_sigma must be >= 0")


@dataclass(frozen=True)
class EmbeddingModel:
    """Bilinear attribute-embedding classifier.

    ``weights`` maps mapped features (d) into attribute space (A). The
    normalization flag, prediction rule and ranking margin used at train time
    are recorded so evaluation and attacks reconstruct the same loss.
    """

    weights: np.ndarray  # (d, A)
    normalize_class_attributes: bool = False
    prediction_rule: str = "compatibility-argmax"
    margin_scale: float = 0.1
    loss_history: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValidationError("embedding weights must be 2-d")
        if not np.isfinite(w).all():
            raise ValidationError("embedding weights contain non-finite values")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.prediction_rule not in PREDICTION_RULES:
            raise ValidationError(f"unknown prediction rule {self.prediction_rule!r}")

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def num_attributes(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class GeneralClassifier:
    """Multinomial logistic regression on raw features."""

    weights: np.ndarray  # (d, C)
    bias: np.ndarray  # (C,)
    loss_history: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        b = np.ascontiguousarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.shape != (w.shape[1],):
            raise ValidationError(f"inconsistent classifier shapes {w.shape}, {b.shape}")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValidationError("classifier parameters contain non-finite values")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def num_classes(self) -> int:
        return self.weights.shape[1]


def effective_class_attributes(model: EmbeddingModel, class_attributes: np.ndarray) -> np.ndarray:
    """Class-attribute matrix as the model consumes it (optionally row-normalized)."""
    attrs = np.asarray(class_attributes, dtype=np.float64)
    if attrs.ndim != 2 or attrs.shape[1] != model.num_attributes:
        raise ValidationError(
            f"class attributes of shape {attrs.shape} do not match {model.num_attributes} attributes"
        )
    if not model.normalize_class_attributes:
        return attrs
    norms = np.linalg.norm(attrs, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0  # leave all-zero signatures untouched
    return attrs / norms


def _check_vector(x, dim: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (dim,):
        raise ValidationError(f"{what} must have shape ({dim},), got {x.shape}")
    return x


def compatibility(dmap: FeatureMap, model: EmbeddingModel, x, class_attr) -> float:
    """Bilinear score between a mapped input and one class-attribute vector."""
    x = _check_vector(x, dmap.input_dim, "input")
    class_attr = _check_vector(class_attr, model.num_attributes, "class attribute vector")
    theta = dmap.forward(x)
    if theta.shape[0] != model.feature_dim:
        raise ValidationError(
            f"map output dim {theta.shape[0]} does not match model dim {model.feature_dim}"
        )
    return float(theta @ model.weights @ class_attr)


def predict_attributes(dmap: FeatureMap, model: EmbeddingModel, x) -> np.ndarray:
    """Project a mapped input into attribute space (length A)."""
    x = _check_vector(x, dmap.input_dim, "input")
    theta = dmap.forward(x)
    if theta.shape[0] != model.feature_dim:
        raise ValidationError(
            f"map output dim {theta.shape[0]} does not match model dim {model.feature_dim}"
        )
    return theta @ model.weights


def predict_class(dmap: FeatureMap, model: EmbeddingModel, x, class_attributes) -> int:
    """Classify by the model's recorded rule; ties go to the lowest class index."""
    attrs = effective_class_attributes(model, class_attributes)
    predicted = predict_attributes(dmap, model, x)
    if model.prediction_rule == "compatibility-argmax":
        return int(np.argmax(attrs @ predicted))
    return int(np.argmin(np.linalg.norm(attrs - predicted, axis=1)))


def _hinge_terms(theta: np.ndarray, weights: np.ndarray, attrs: np.ndarray,
                 y_true: int, margin: float) -> tuple[np.ndarray, np.ndarray]:
    scores = theta @ weights
    comps = attrs @ scores
    violations = margin + comps - comps[y_true]
    violations[y_true] = -np.inf  # the true class never competes with itself
    return violations, scores


def ranking_loss(dmap: FeatureMap, model: EmbeddingModel, x, y_true: int,
                 class_attributes, margin_scale: float | None = None) -> float:
    """Structured hinge: worst competing class vs the true class, clamped at 0."""
    attrs = effective_class_attributes(model, class_attributes)
    if attrs.shape[0] < 2:
        raise ValidationError("ranking loss needs at least 2 classes")
    if not 0 <= y_true < attrs.shape[0]:
        raise ValidationError(f"label {y_true} out of range for {attrs.shape[0]} classes")
    margin = model.margin_scale if margin_scale is None else margin_scale
    theta = dmap.forward(_check_vector(x, dmap.input_dim, "input"))
    violations, _ = _hinge_terms(theta, model.weights, attrs, y_true, margin)
    return max(0.0, float(violations.max()))


def _ranking_grads_core(theta: np.ndarray, weights: np.ndarray, attrs: np.ndarray,
                        y_true: int, margin: float):
    """Loss plus subgradients w.r.t. the weight matrix and the mapped input.

    Zero loss yields ``(0.0, None, None)``; the active competitor is the first
    class attaining the max.
    """
    violations, _ = _hinge_terms(theta, weights, attrs, y_true, margin)
    worst = int(np.argmax(violations))
    loss = float(violations[worst])
    if loss <= 0.0:
        return 0.0, None, None
    diff = attrs[worst] - attrs[y_true]
    return loss, np.outer(theta, diff), weights @ diff


def ranking_loss_grads(dmap: FeatureMap, model: EmbeddingModel, x, y_true: int,
                       class_attributes, margin_scale: float | None = None):
    """Ranking loss with analytic subgradients w.r.t. weights and the raw input.

    Returns ``(loss, grad_weights, grad_x)``; the gradients are zero arrays at
    satisfied-margin points.
    """
    attrs = effective_class_attributes(model, class_attributes)
    if attrs.shape[0] < 2:
        raise ValidationError("ranking loss needs at least 2 classes")
    margin = model.margin_scale if margin_scale is None else margin_scale
    x = _check_vector(x, dmap.input_dim, "input")
    theta = dmap.forward(x)
    loss, d_w, d_theta = _ranking_grads_core(theta, model.weights, attrs, y_true, margin)
    if d_w is None:
        return 0.0, np.zeros_like(model.weights), np.zeros_like(x)
    return loss, d_w, dmap.input_grad(x, d_theta)


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max()
    e = np.exp(shifted)
    return e / e.sum()


def _ce_core(theta: np.ndarray, weights: np.ndarray, bias: np.ndarray, y_true: int):
    z = theta @ weights + bias
    p = _softmax(z)
    loss = -math.log(max(p[y_true], 1e-300))
    delta = p.copy()
    delta[y_true] -= 1.0
    return loss, np.outer(theta, delta), delta, weights @ delta


def cross_entropy(dmap: FeatureMap, clf: GeneralClassifier, x, y_true: int) -> float:
    """Negative log-likelihood of the true class under the softmax head."""
    x = _check_vector(x, dmap.input_dim, "input")
    if not 0 <= y_true < clf.num_classes:
        raise ValidationError(f"label {y_true} out of range for {clf.num_classes} classes")
    theta = dmap.forward(x)
    z = theta @ clf.weights + clf.bias
    p = _softmax(z)
    return -math.log(max(p[y_true], 1e-300))


def cross_entropy_grads(dmap: FeatureMap, clf: GeneralClassifier, x, y_true: int):
    """Cross-entropy with analytic gradients: ``(loss, grad_weights, grad_bias, grad_x)``."""
    x = _check_vector(x, dmap.input_dim, "input")
    if not 0 <= y_true < clf.num_classes:
        raise ValidationError(f"label {y_true} out of range for {clf.num_classes} classes")
    theta = dmap.forward(x)
    loss, d_w, d_b, d_theta = _ce_core(theta, clf.weights, clf.bias, y_true)
    return loss, d_w, d_b, dmap.input_grad(x, d_theta)


def predict_class_general(dmap: FeatureMap, clf: GeneralClassifier, x) -> int:
    x = _check_vector(x, dmap.input_dim, "input")
    theta = dmap.forward(x)
    return int(np.argmax(theta @ clf.weights + clf.bias))


def _train_indices(split) -> np.ndarray:
    idx = split.train if isinstance(split, SplitAssignment) or hasattr(split, "train") else split
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size == 0:
        raise ValidationError("train split is empty")
    return idx


def _run_sgd(params: list[np.ndarray], features: np.ndarray, labels: np.ndarray,
             indices: np.ndarray, epochs: int, learning_rate: float,
             shuffle_rng: np.random.Generator, grad_fn, what: str) -> list[float]:
    """Per-sample SGD over shuffled epochs.

    ``grad_fn(x, y) -> (loss, grads)`` where each grad may be None to skip the
    update for that parameter. Shared by standard and adversarial training so
    degenerate adversarial settings replay the standard trajectory bit-exactly.
    """
    history = []
    for epoch in range(epochs):
        order = shuffle_rng.permutation(indices)
        total = 0.0
        for n in order:
            loss, grads = grad_fn(features[n], int(labels[n]))
            if not math.isfinite(loss):
                raise NumericalError(f"{what} diverged at epoch {epoch}: loss={loss!r}")
            for p, g in zip(params, grads):
                if g is not None:
                    p -= learning_rate * g
            total += loss
        history.append(total / len(order))
    return history


def train_sje(dataset: Dataset, split, dmap: FeatureMap, config: TrainConfig, *,
              normalize_class_attributes: bool = False,
              prediction_rule: str = "compatibility-argmax") -> EmbeddingModel:
    """Fit the bilinear embedding by per-sample subgradient descent on the ranking loss.

    Weights start from a seeded Gaussian; the sample order is reshuffled every
    epoch from the same seed, so identical configs give bit-identical models.
    """
    indices = _train_indices(split)
    if dmap.input_dim != dataset.feature_dim:
        raise ValidationError(
            f"feature map expects dim {dmap.input_dim}, dataset has {dataset.feature_dim}"
        )
    if prediction_rule not in PREDICTION_RULES:
        raise ValidationError(f"unknown prediction rule {prediction_rule!r}")

    probe = EmbeddingModel(
        weights=np.zeros((dmap.output_dim, dataset.num_attributes)),
        normalize_class_attributes=normalize_class_attributes,
    )
    attrs = effective_class_attributes(probe, dataset.class_attributes)
    if attrs.shape[0] < 2:
        raise ValidationError("training needs at least 2 classes")

    weights = substream(config.seed, "sje-init").normal(
        0.0, config.weight_init_sigma, size=(dmap.output_dim, dataset.num_attributes)
    )
    shuffle_rng = substream(config.seed, "sje-shuffle")

    def grad_fn(x, y):
        loss, d_w, _ = _ranking_grads_core(dmap.forward(x), weights, attrs, y, config.margin_scale)
        return loss, [d_w]

    history = _run_sgd([weights], dataset.features, dataset.labels, indices,
                       config.epochs, config.learning_rate, shuffle_rng, grad_fn,
                       "embedding training")
    return EmbeddingModel(
        weights=weights,
        normalize_class_attributes=normalize_class_attributes,
        prediction_rule=prediction_rule,
        margin_scale=config.margin_scale,
        loss_history=tuple(history),
    )


def train_general(dataset: Dataset, split, config: TrainConfig) -> GeneralClassifier:
    """Fit the softmax baseline by per-sample SGD on cross-entropy."""
    indices = _train_indices(split)
    if np.unique(dataset.labels[indices]).size < 2:
        raise ValidationError("train split contains a single class")

    d, c = dataset.feature_dim, dataset.num_classes
    weights = substream(config.seed, "general-init").normal(
        0.0, config.weight_init_sigma, size=(d, c)
    )
    bias = np.zeros(c)
    shuffle_rng = substream(config.seed, "general-shuffle")

    def grad_fn(x, y):
        loss, d_w, d_b, _ = _ce_core(x, weights, bias, y)
        return loss, [d_w, d_b]

    history = _run_sgd([weights, bias], dataset.features, dataset.labels, indices,
                       config.epochs, config.learning_rate, shuffle_rng, grad_fn,
                       "general training")
    return GeneralClassifier(weights=weights, bias=bias, loss_history=tuple(history))


def accuracy(predictor, dataset: Dataset, indices, dmap: FeatureMap | None = None) -> float:
    """Fraction of correct predictions over the given sample indices.

    ``predictor`` is an :class:`EmbeddingModel`, a :class:`GeneralClassifier`,
    or any callable mapping a feature vector to a class index.
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise ValidationError("cannot evaluate accuracy on an empty index list")
    if dmap is None:
        dmap = FeatureMap.identity(dataset.feature_dim)
    if isinstance(predictor, EmbeddingModel):
        predict = lambda x: predict_class(dmap, predictor, x, dataset.class_attributes)
    elif isinstance(predictor, GeneralClassifier):
        predict = lambda x: predict_class_general(dmap, predictor, x)
    else:
        predict = predictor
    correct = sum(1 for n in indices if predict(dataset.features[n]) == int(dataset.labels[n]))
    return correct / indices.size
