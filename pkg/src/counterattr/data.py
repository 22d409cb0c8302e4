"""Datasets: synthetic generation, CSV round-trip I/O and stratified splits.

A :class:`Dataset` couples an ``(N, d)`` feature matrix and integer labels
with a ``(C, A)`` class-attribute matrix whose row ``c`` is the real-valued
attribute signature of class ``c``. All numeric state is float64 and
immutable after construction; see the README for the on-disk file layouts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError
from .rng import substream

__all__ = [
    "Sample",
    "Dataset",
    "SyntheticSpec",
    "SplitAssignment",
    "generate_synthetic",
    "save_dataset",
    "load_dataset",
    "split_dataset",
]


def _readonly(a: np.ndarray, dtype=np.float64) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=dtype)
    out.setflags(write=False)
    return out


def _fmt(value: float) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(value))


@dataclass(frozen=True)
class Sample:
    """One feature vector with its ground-truth class index."""

    features: np.ndarray
    label: int


@dataclass(frozen=True)
class Dataset:
    """Feature vectors, labels, and the per-class attribute matrix.

    ``feature_bounds``, when present, is a pair of length-``d`` arrays
    (low, high) that every feature vector respects; perturbations are clipped
    to these bounds as well as to their own budget.
    """

    features: np.ndarray  # (N, d)
    labels: np.ndarray  # (N,)
    class_attributes: np.ndarray  # (C, A)
    class_names: tuple[str, ...]
    attribute_names: tuple[str, ...]
    feature_bounds: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self) -> None:
        features = _readonly(np.atleast_2d(self.features))
        labels = _readonly(self.labels, dtype=np.int64)
        attrs = _readonly(np.atleast_2d(self.class_attributes))
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_attributes", attrs)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))

        if features.ndim != 2:
            raise ValidationError("features must be a 2-d array")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ValidationError(
                f"labels shape {labels.shape} does not match {features.shape[0]} samples"
            )
        if attrs.ndim != 2:
            raise ValidationError("class_attributes must be a 2-d array")
        if not np.isfinite(features).all():
            raise ValidationError("features contain non-finite values")
        if not np.isfinite(attrs).all():
            raise ValidationError("class_attributes contain non-finite values")
        c = attrs.shape[0]
        if len(self.class_names) != c:
            raise ValidationError(
                f"{len(self.class_names)} class names for {c} attribute rows"
            )
        if len(self.attribute_names) != attrs.shape[1]:
            raise ValidationError(
                f"{len(self.attribute_names)} attribute names for {attrs.shape[1]} columns"
            )
        if labels.size and (labels.min() < 0 or labels.max() >= c):
            raise ValidationError(f"labels must lie in [0, {c})")

        if self.feature_bounds is not None:
            low, high = self.feature_bounds
            low = _readonly(np.broadcast_to(np.asarray(low, dtype=np.float64), (features.shape[1],)))
            high = _readonly(np.broadcast_to(np.asarray(high, dtype=np.float64), (features.shape[1],)))
            if not (np.isfinite(low).all() and np.isfinite(high).all()):
                raise ValidationError("feature_bounds contain non-finite values")
            if np.any(low > high):
                raise ValidationError("feature_bounds low exceeds high")
            if features.size and (np.any(features < low) or np.any(features > high)):
                raise ValidationError("features fall outside declared feature_bounds")
            object.__setattr__(self, "feature_bounds", (low, high))

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        return self.class_attributes.shape[0]

    @property
    def num_attributes(self) -> int:
        return self.class_attributes.shape[1]

    @property
    def samples(self) -> list[Sample]:
        return [Sample(self.features[i], int(self.labels[i])) for i in range(self.num_samples)]


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic synthetic dataset.

    ``class_similarity`` blends every class signature toward one shared base
    signature: 0 keeps the signatures maximally distinct (orthogonal one-hot
    when there are at most as many classes as attributes), 1 makes all classes
    nearly identical.
    """

    num_classes: int
    num_attributes: int
    feature_dim: int
    samples_per_class: int
    noise_sigma: float = 0.05
    class_similarity: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_classes < 2:
            raise ValidationError("num_classes must be >= 2")
        if self.num_attributes < 2:
            raise ValidationError("num_attributes must be >= 2")
        if self.feature_dim < self.num_attributes:
            raise ValidationError("feature_dim must be >= num_attributes")
        if self.samples_per_class < 1:
            raise ValidationError("samples_per_class must be >= 1")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma must be >= 0")
        if not 0.0 <= self.class_similarity <= 1.0:
            raise ValidationError("class_similarity must lie in [0, 1]")


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint train/val/test index lists covering a dataset."""

    train: tuple[int, ...]
    val: tuple[int, ...]
    test: tuple[int, ...]
    seed: int

    def part(self, name: str) -> tuple[int, ...]:
        if name not in ("train", "val", "test"):
            raise ValidationError(f"unknown split part {name!r}")
        return getattr(self, name)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Generate a dataset whose features live in the span of its attributes.

    Class signatures are drawn in [0, 1]^A: the first ``A`` classes start from
    one-hot signatures, later classes from independent uniform draws, and all
    are blended toward a shared base signature by ``class_similarity``.
    Features are ``M @ phi(label)`` plus isotropic Gaussian noise, with ``M``
    a fixed mixing matrix derived from the seed. Identical specs produce
    bit-identical datasets.
    """
    c, a, d = spec.num_classes, spec.num_attributes, spec.feature_dim

    base = substream(spec.seed, "class-attributes-base").uniform(0.0, 1.0, size=a)
    distinct = np.zeros((c, a))
    for i in range(min(c, a)):
        distinct[i, i] = 1.0
    if c > a:
        extra = substream(spec.seed, "class-attributes-extra").uniform(0.0, 1.0, size=(c - a, a))
        distinct[a:] = extra
    s = spec.class_similarity
    attrs = (1.0 - s) * distinct + s * base

    mixing = substream(spec.seed, "mixing-matrix").normal(0.0, 1.0, size=(d, a))
    labels = np.repeat(np.arange(c, dtype=np.int64), spec.samples_per_class)
    clean = attrs[labels] @ mixing.T  # (N, d)
    noise = substream(spec.seed, "feature-noise").normal(0.0, spec.noise_sigma, size=clean.shape)

    return Dataset(
        features=clean + noise,
        labels=labels,
        class_attributes=attrs,
        class_names=tuple(f"class_{i}" for i in range(c)),
        attribute_names=tuple(f"attr_{j}" for j in range(a)),
    )


def save_dataset(dataset: Dataset, features_path, attributes_path, names_path) -> None:
    """Write the three-file CSV layout (features, attributes, names).

    Floats are written with shortest round-trip formatting, so
    ``load_dataset`` recovers the arrays bit-exactly.
    """
    d = dataset.feature_dim
    with open(features_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join([f"f{i}" for i in range(d)] + ["label"]) + "\n")
        for row, label in zip(dataset.features, dataset.labels):
            fh.write(",".join(_fmt(v) for v in row) + f",{int(label)}\n")

    with open(attributes_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"a{j}" for j in range(dataset.num_attributes)) + "\n")
        for row in dataset.class_attributes:
            fh.write(",".join(_fmt(v) for v in row) + "\n")

    with open(names_path, "w", encoding="utf-8", newline="\n") as fh:
        for name in dataset.class_names:
            fh.write(f"class:{name}\n")
        for name in dataset.attribute_names:
            fh.write(f"attr:{name}\n")
        if dataset.feature_bounds is not None:
            low, high = dataset.feature_bounds
            fh.write("bounds_low:" + ",".join(_fmt(v) for v in low) + "\n")
            fh.write("bounds_high:" + ",".join(_fmt(v) for v in high) + "\n")


def _parse_float(token: str, path, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ValidationError(f"{path}:{line_no}: malformed value {token!r}") from None
    if not np.isfinite(value):
        raise ValidationError(f"{path}:{line_no}: non-finite value {token!r}")
    return value


def load_dataset(features_path, attributes_path, names_path) -> Dataset:
    """Load the three-file CSV layout written by :func:`save_dataset`.

    Raises :class:`ValidationError` naming the offending file and line on any
    malformed row, dimension mismatch, non-finite value or unknown label.
    """
    with open(attributes_path, "r", encoding="utf-8") as fh:
        attr_lines = fh.read().splitlines()
    if not attr_lines:
        raise ValidationError(f"{attributes_path}: empty attributes file")
    header = attr_lines[0].split(",")
    num_attributes = len(header)
    if header != [f"a{j}" for j in range(num_attributes)]:
        raise ValidationError(f"{attributes_path}:1: bad attributes header")
    attr_rows = []
    for line_no, line in enumerate(attr_lines[1:], start=2):
        tokens = line.split(",")
        if len(tokens) != num_attributes:
            raise ValidationError(
                f"{attributes_path}:{line_no}: expected {num_attributes} values, got {len(tokens)}"
            )
        attr_rows.append([_parse_float(t, attributes_path, line_no) for t in tokens])
    if not attr_rows:
        raise ValidationError(f"{attributes_path}: no attribute rows")
    num_classes = len(attr_rows)

    class_names: list[str] = []
    attribute_names: list[str] = []
    bounds_low = bounds_high = None
    with open(names_path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh.read().splitlines(), start=1):
            if not line:
                continue
            key, _, rest = line.partition(":")
            if key == "class":
                class_names.append(rest)
            elif key == "attr":
                attribute_names.append(rest)
            elif key == "bounds_low":
                bounds_low = [_parse_float(t, names_path, line_no) for t in rest.split(",")]
            elif key == "bounds_high":
                bounds_high = [_parse_float(t, names_path, line_no) for t in rest.split(",")]
            else:
                raise ValidationError(f"{names_path}:{line_no}: unknown entry {key!r}")
    if len(class_names) != num_classes:
        raise ValidationError(
            f"{names_path}: {len(class_names)} class names for {num_classes} attribute rows"
        )
    if len(attribute_names) != num_attributes:
        raise ValidationError(
            f"{names_path}: {len(attribute_names)} attribute names for {num_attributes} columns"
        )
    if (bounds_low is None) != (bounds_high is None):
        raise ValidationError(f"{names_path}: bounds_low and bounds_high must appear together")

    with open(features_path, "r", encoding="utf-8") as fh:
        feat_lines = fh.read().splitlines()
    if not feat_lines:
        raise ValidationError(f"{features_path}: empty features file")
    header = feat_lines[0].split(",")
    feature_dim = len(header) - 1
    if feature_dim < 1 or header != [f"f{i}" for i in range(feature_dim)] + ["label"]:
        raise ValidationError(f"{features_path}:1: bad features header")
    rows = []
    labels = []
    for line_no, line in enumerate(feat_lines[1:], start=2):
        tokens = line.split(",")
        if len(tokens) != feature_dim + 1:
            raise ValidationError(
                f"{features_path}:{line_no}: expected {feature_dim} features + label, "
                f"got {len(tokens)} fields"
            )
        rows.append([_parse_float(t, features_path, line_no) for t in tokens[:-1]])
        try:
            label = int(tokens[-1])
        except ValueError:
            raise ValidationError(
                f"{features_path}:{line_no}: malformed label {tokens[-1]!r}"
            ) from None
        if not 0 <= label < num_classes:
            raise ValidationError(
                f"{features_path}:{line_no}: unknown label {label} (have {num_classes} classes)"
            )
        labels.append(label)
    if not rows:
        raise ValidationError(f"{features_path}: no sample rows")

    bounds = None
    if bounds_low is not None:
        bounds = (np.asarray(bounds_low), np.asarray(bounds_high))
    return Dataset(
        features=np.asarray(rows),
        labels=np.asarray(labels, dtype=np.int64),
        class_attributes=np.asarray(attr_rows),
        class_names=tuple(class_names),
        attribute_names=tuple(attribute_names),
        feature_bounds=bounds,
    )


def _part_counts(n: int, ratios: tuple[float, float, float]) -> list[int]:
    # Largest-remainder apportionment; ties resolved toward earlier parts.
    ideal = [r * n for r in ratios]
    # Snap float dust so that e.g. 0.3 * 10 counts as exactly 3.
    ideal = [round(v) if abs(v - round(v)) < 1e-9 * max(1.0, n) else v for v in ideal]
    counts = [int(np.floor(v)) for v in ideal]
    remainders = [v - c for v, c in zip(ideal, counts)]
    for _ in range(n - sum(counts)):
        best = max(range(3), key=lambda i: (remainders[i], -i))
        counts[best] += 1
        remainders[best] = -1.0
    return counts


def split_dataset(dataset: Dataset, ratios, seed: int) -> SplitAssignment:
    """Stratified train/val/test split, deterministic for a fixed seed.

    ``ratios`` is a (train, val, test) triple of non-negative reals summing to
    1; per class, the part sizes deviate from the exact ratio by less than one
    sample and every class keeps at least one training sample whenever the
    train ratio is positive.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ValidationError("ratios must be a (train, val, test) triple")
    if any(r < 0 for r in ratios):
        raise ValidationError("ratios must be non-negative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"ratios must sum to 1, got {sum(ratios)!r}")

    active_parts = sum(1 for r in ratios if r > 0)
    rng = substream(seed, "split")
    parts: list[list[int]] = [[], [], []]
    for c in range(dataset.num_classes):
        idx = np.flatnonzero(dataset.labels == c)
        if idx.size == 0:
            continue
        if idx.size < active_parts:
            raise ValidationError(
                f"class {c} has {idx.size} samples for {active_parts} split parts"
            )
        perm = rng.permutation(idx)
        counts = _part_counts(idx.size, ratios)
        if ratios[0] > 0 and counts[0] == 0:
            donor = max(range(1, 3), key=lambda i: counts[i])
            counts[donor] -= 1
            counts[0] += 1
        offsets = np.cumsum([0] + counts)
        for p in range(3):
            parts[p].extend(int(i) for i in perm[offsets[p] : offsets[p + 1]])

    return SplitAssignment(
        train=tuple(sorted(parts[0])),
        val=tuple(sorted(parts[1])),
        test=tuple(sorted(parts[2])),
        seed=seed,
    )
