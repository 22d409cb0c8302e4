"""Explanation core: discriminative attributes, counter-examples, distances.

Given an input driven into a counter class, the explanation names the
attributes that argue for the original class (largest predicted value minus
the counter class's signature), the attributes that argue for the counter
class (largest perturbed value minus the true class's signature), and real
counter-class samples whose predicted attributes are nearest to the
perturbed prediction. Distance summaries contrast how far predictions moved
(d1) against how far apart the ground-truth signatures are (d2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .embed import EmbeddingModel, FeatureMap, predict_attributes, predict_class
from .exceptions import ValidationError
from .perturb import PerturbedSample

__all__ = [
    "ExplanationRecord",
    "DistanceSummary",
    "select_discriminative_clean",
    "select_discriminative_adv",
    "counter_class_gallery",
    "select_counter_examples",
    "build_explanation",
    "eligible_indices",
    "distance_analysis_standard",
    "distance_analysis_robust",
    "histogram_overlap",
    "write_records_jsonl",
]

OVERLAP_BINS = 30


def _top_indices(scores: np.ndarray, k: int) -> np.ndarray:
    # Stable argsort on negated scores: descending score, ties by lowest index.
    return np.argsort(-scores, kind="stable")[:k]


def _check_attr_vector(v, n: int, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n,):
        raise ValidationError(f"{what} must have shape ({n},), got {v.shape}")
    if not np.isfinite(v).all():
        raise ValidationError(f"{what} contains non-finite values")
    return v


def select_discriminative_clean(clean_attrs, counter_class_attrs, k: int) -> np.ndarray:
    """Indices of the k attributes arguing most for the original class.

    Scored by predicted clean value minus the counter class's signature,
    descending; ties resolved toward the lowest attribute index.
    """
    clean_attrs = np.asarray(clean_attrs, dtype=np.float64)
    a = clean_attrs.shape[0]
    counter_class_attrs = _check_attr_vector(counter_class_attrs, a, "counter class attributes")
    if not 1 <= k <= a:
        raise ValidationError(f"k must lie in [1, {a}], got {k}")
    return _top_indices(clean_attrs - counter_class_attrs, k)


def select_discriminative_adv(adv_attrs, true_class_attrs, k: int) -> np.ndarray:
    """Indices of the k attributes arguing most for the counter class.

    Scored by predicted perturbed value minus the true class's signature.
    """
    adv_attrs = np.asarray(adv_attrs, dtype=np.float64)
    a = adv_attrs.shape[0]
    true_class_attrs = _check_attr_vector(true_class_attrs, a, "true class attributes")
    if not 1 <= k <= a:
        raise ValidationError(f"k must lie in [1, {a}], got {k}")
    return _top_indices(adv_attrs - true_class_attrs, k)


def counter_class_gallery(dmap: FeatureMap, model: EmbeddingModel, dataset: Dataset,
                          counter_class: int, indices=None):
    """Predicted attributes of the clean counter-class samples.

    Returns ``(sample_ids, attrs)`` for every sample of ``counter_class``
    among ``indices`` (default: the whole dataset).
    """
    if not 0 <= counter_class < dataset.num_classes:
        raise ValidationError(f"counter class {counter_class} out of range")
    pool = np.arange(dataset.num_samples) if indices is None else np.asarray(indices, dtype=np.int64)
    ids = pool[dataset.labels[pool] == counter_class]
    attrs = np.array([predict_attributes(dmap, model, dataset.features[i]) for i in ids])
    return ids, attrs


def select_counter_examples(adv_attrs, gallery_ids, gallery_attrs, m: int):
    """Rank gallery samples by attribute distance to the perturbed prediction.

    Returns the ``m`` nearest as ``[(sample_id, distance), ...]`` in
    non-decreasing distance order; exact ties resolved toward the lower
    sample id. The first element is the single best counter-example.
    """
    gallery_ids = np.asarray(gallery_ids, dtype=np.int64)
    gallery_attrs = np.asarray(gallery_attrs, dtype=np.float64)
    if gallery_ids.size == 0:
        raise ValidationError("counter class has no gallery samples")
    if gallery_attrs.ndim != 2 or gallery_attrs.shape[0] != gallery_ids.size:
        raise ValidationError(
            f"gallery attrs shape {gallery_attrs.shape} does not match {gallery_ids.size} ids"
        )
    adv_attrs = _check_attr_vector(adv_attrs, gallery_attrs.shape[1], "perturbed attributes")
    if m < 1:
        raise ValidationError("m must be >= 1")
    distances = np.linalg.norm(gallery_attrs - adv_attrs, axis=1)
    order = np.lexsort((gallery_ids, distances))[:m]
    return [(int(gallery_ids[i]), float(distances[i])) for i in order]


@dataclass(frozen=True)
class ExplanationRecord:
    """Full explanation of one attacked sample.

    ``explainable`` is False when the attack failed to move the prediction
    off the true class; such records carry no counter-class fields instead of
    fabricated ones.
    """

    sample_id: int
    true_class: int
    counter_class: int | None
    explainable: bool
    clean_attrs: np.ndarray
    adv_attrs: np.ndarray
    discriminative_clean: tuple[tuple[int, float], ...]
    discriminative_adv: tuple[tuple[int, float], ...]
    counter_examples: tuple[tuple[int, float], ...]
    attribute_names: tuple[str, ...]
    robust_predicted_label: int | None = None
    robust_adv_attrs: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.explainable and self.counter_class == self.true_class:
            raise ValidationError("counter class must differ from the true class")
        dists = [d for _, d in self.counter_examples]
        if any(b < a for a, b in zip(dists, dists[1:])):
            raise ValidationError("counter examples must be sorted by distance")

    def to_json_dict(self) -> dict:
        record = {
            "sample_id": self.sample_id,
            "true_class": self.true_class,
            "counter_class": self.counter_class,
            "explainable": self.explainable,
            "clean_attrs": [float(v) for v in self.clean_attrs],
            "adv_attrs": [float(v) for v in self.adv_attrs],
            "discriminative_clean": [[int(i), float(s)] for i, s in self.discriminative_clean],
            "discriminative_adv": [[int(i), float(s)] for i, s in self.discriminative_adv],
            "counter_examples": [[int(i), float(d)] for i, d in self.counter_examples],
            "attribute_names": list(self.attribute_names),
        }
        if self.robust_predicted_label is not None:
            record["robust_predicted_label"] = self.robust_predicted_label
            record["robust_adv_attrs"] = [float(v) for v in self.robust_adv_attrs]
        return record


def build_explanation(sample_id: int, perturbed: PerturbedSample, dmap: FeatureMap,
                      model: EmbeddingModel, dataset: Dataset, k: int | None = None,
                      m: int = 5, gallery_indices=None,
                      robust_model: EmbeddingModel | None = None) -> ExplanationRecord:
    """Assemble the full explanation record for one attacked sample.

    ``k`` defaults to ``min(A, 10)``. The counter class is the perturbed
    prediction of this sample; the gallery is drawn from ``gallery_indices``
    (default: whole dataset). When the attack did not flip the sample off its
    true class, the record is marked not explainable.
    """
    if k is None:
        k = min(dataset.num_attributes, 10)
    clean_attrs = predict_attributes(dmap, model, perturbed.original)
    adv_attrs = predict_attributes(dmap, model, perturbed.perturbed)
    true_class = perturbed.true_label
    counter = perturbed.predicted_label_perturbed

    robust_pred = None
    robust_attrs = None
    if robust_model is not None:
        robust_pred = predict_class(dmap, robust_model, perturbed.perturbed,
                                    dataset.class_attributes)
        robust_attrs = predict_attributes(dmap, robust_model, perturbed.perturbed)

    if counter == true_class:
        return ExplanationRecord(
            sample_id=int(sample_id),
            true_class=true_class,
            counter_class=None,
            explainable=False,
            clean_attrs=clean_attrs,
            adv_attrs=adv_attrs,
            discriminative_clean=(),
            discriminative_adv=(),
            counter_examples=(),
            attribute_names=dataset.attribute_names,
            robust_predicted_label=robust_pred,
            robust_adv_attrs=robust_attrs,
        )

    phi_counter = dataset.class_attributes[counter]
    phi_true = dataset.class_attributes[true_class]
    q = select_discriminative_clean(clean_attrs, phi_counter, k)
    p = select_discriminative_adv(adv_attrs, phi_true, k)
    gallery_ids, gallery_attrs = counter_class_gallery(dmap, model, dataset, counter,
                                                      indices=gallery_indices)
    examples = select_counter_examples(adv_attrs, gallery_ids, gallery_attrs, m)

    clean_scores = clean_attrs - phi_counter
    adv_scores = adv_attrs - phi_true
    return ExplanationRecord(
        sample_id=int(sample_id),
        true_class=true_class,
        counter_class=counter,
        explainable=True,
        clean_attrs=clean_attrs,
        adv_attrs=adv_attrs,
        discriminative_clean=tuple((int(i), float(clean_scores[i])) for i in q),
        discriminative_adv=tuple((int(i), float(adv_scores[i])) for i in p),
        counter_examples=tuple(examples),
        attribute_names=dataset.attribute_names,
        robust_predicted_label=robust_pred,
        robust_adv_attrs=robust_attrs,
    )


def eligible_indices(records: list[PerturbedSample]) -> list[int]:
    """Positions of records that are clean-correct and perturbed-incorrect.

    This is the population over which the standard distance analysis is
    defined.
    """
    return [
        i for i, r in enumerate(records)
        if r.predicted_label_clean == r.true_label
        and r.predicted_label_perturbed != r.true_label
    ]


@dataclass(frozen=True)
class DistanceSummary:
    """Aligned per-sample d1/d2 distances with summary statistics.

    d1 measures how far predicted attributes moved; d2 how far apart the
    ground-truth signatures of the true and counter classes are.
    """

    mode: str  # "standard" or "robust"
    sample_ids: tuple[int, ...]
    d1_values: np.ndarray
    d2_values: np.ndarray

    def __post_init__(self) -> None:
        d1 = np.array(self.d1_values, dtype=np.float64, copy=True)
        d2 = np.array(self.d2_values, dtype=np.float64, copy=True)
        if d1.shape != d2.shape or d1.ndim != 1:
            raise ValidationError("d1 and d2 must be aligned 1-d arrays")
        if len(self.sample_ids) != d1.shape[0]:
            raise ValidationError("sample_ids must align with the distance lists")
        if d1.size and (d1.min() < 0 or d2.min() < 0):
            raise ValidationError("distances must be non-negative")
        d1.setflags(write=False)
        d2.setflags(write=False)
        object.__setattr__(self, "d1_values", d1)
        object.__setattr__(self, "d2_values", d2)
        object.__setattr__(self, "sample_ids", tuple(int(i) for i in self.sample_ids))

    def stats(self) -> dict:
        return {
            "mode": self.mode,
            "n": int(self.d1_values.size),
            "d1_mean": float(np.mean(self.d1_values)),
            "d1_median": float(np.median(self.d1_values)),
            "d2_mean": float(np.mean(self.d2_values)),
            "d2_median": float(np.median(self.d2_values)),
            "overlap_coefficient": histogram_overlap(self.d1_values, self.d2_values),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("sample_id,d1,d2\n")
            for sid, d1, d2 in zip(self.sample_ids, self.d1_values, self.d2_values):
                fh.write(f"{sid},{float(d1)!r},{float(d2)!r}\n")


def histogram_overlap(a, b, bins: int = OVERLAP_BINS) -> float:
    """Overlap coefficient of two samples on a shared equal-width grid.

    Both samples are binned over their common range; the coefficient is the
    sum of bin-wise minima of the two normalized histograms (1 = identical
    binned shapes, 0 = disjoint support).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValidationError("histogram overlap needs non-empty samples")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if lo == hi:
        return 1.0  # both are point masses at the same location
    ha, _ = np.histogram(a, bins=bins, range=(lo, hi))
    hb, _ = np.histogram(b, bins=bins, range=(lo, hi))
    return float(np.minimum(ha / a.size, hb / b.size).sum())


def _distance_rows(pred_a: np.ndarray, pred_b: np.ndarray, true_labels: np.ndarray,
                   counter_labels: np.ndarray, class_attrs: np.ndarray):
    d1 = np.linalg.norm(pred_a - pred_b, axis=1)
    d2 = np.linalg.norm(class_attrs[true_labels] - class_attrs[counter_labels], axis=1)
    return d1, d2


def distance_analysis_standard(clean_attrs, adv_attrs, true_labels, counter_labels,
                               class_attrs, sample_ids=None) -> DistanceSummary:
    """Distances for samples clean-correct and perturbed-incorrect.

    Per sample: d1 between the clean and perturbed attribute predictions, d2
    between the true and counter class signatures. All inputs are aligned
    per-sample; an empty eligible set is an explicit error.
    """
    clean_attrs = np.asarray(clean_attrs, dtype=np.float64)
    adv_attrs = np.asarray(adv_attrs, dtype=np.float64)
    true_labels = np.asarray(true_labels, dtype=np.int64)
    counter_labels = np.asarray(counter_labels, dtype=np.int64)
    class_attrs = np.asarray(class_attrs, dtype=np.float64)
    if clean_attrs.shape != adv_attrs.shape or clean_attrs.ndim != 2:
        raise ValidationError("clean and perturbed attribute matrices must align")
    n = clean_attrs.shape[0]
    if n == 0:
        raise ValidationError("no eligible samples for the distance analysis")
    if true_labels.shape != (n,) or counter_labels.shape != (n,):
        raise ValidationError("label arrays must align with the attribute matrices")
    if np.any(true_labels == counter_labels):
        raise ValidationError("eligible samples must have counter class != true class")
    if sample_ids is None:
        sample_ids = range(n)
    d1, d2 = _distance_rows(clean_attrs, adv_attrs, true_labels, counter_labels, class_attrs)
    return DistanceSummary(mode="standard", sample_ids=tuple(sample_ids),
                           d1_values=d1, d2_values=d2)


def distance_analysis_robust(robust_ids, robust_adv_attrs, standard_ids,
                             standard_adv_attrs, true_labels, counter_labels,
                             class_attrs) -> DistanceSummary:
    """Distances contrasting the robust and standard perturbed predictions.

    Covers samples the robust model classifies correctly under attack while
    the standard model misclassifies. Both sides carry sample ids; they must
    cover the same samples (matched by id), otherwise an alignment error is
    raised. Labels align with the standard side's ordering.
    """
    robust_ids = np.asarray(robust_ids, dtype=np.int64)
    standard_ids = np.asarray(standard_ids, dtype=np.int64)
    robust_adv_attrs = np.asarray(robust_adv_attrs, dtype=np.float64)
    standard_adv_attrs = np.asarray(standard_adv_attrs, dtype=np.float64)
    true_labels = np.asarray(true_labels, dtype=np.int64)
    counter_labels = np.asarray(counter_labels, dtype=np.int64)
    class_attrs = np.asarray(class_attrs, dtype=np.float64)

    if standard_ids.size == 0:
        raise ValidationError("no eligible samples for the distance analysis")
    if (robust_adv_attrs.ndim != 2 or standard_adv_attrs.ndim != 2
            or robust_adv_attrs.shape[0] != robust_ids.size
            or standard_adv_attrs.shape[0] != standard_ids.size
            or robust_adv_attrs.shape[1] != standard_adv_attrs.shape[1]):
        raise ValidationError("attribute matrices must align with their id lists")
    if true_labels.shape != standard_ids.shape or counter_labels.shape != standard_ids.shape:
        raise ValidationError("label arrays must align with the standard records")
    if np.unique(robust_ids).size != robust_ids.size or np.unique(standard_ids).size != standard_ids.size:
        raise ValidationError("sample ids must be unique on each side")
    if set(robust_ids.tolist()) != set(standard_ids.tolist()):
        raise ValidationError("robust and standard records cover different samples")
    if np.any(true_labels == counter_labels):
        raise ValidationError("eligible samples must have counter class != true class")

    # Reorder the robust side to match the standard side's id order.
    robust_pos = {int(sid): i for i, sid in enumerate(robust_ids)}
    aligned = robust_adv_attrs[[robust_pos[int(sid)] for sid in standard_ids]]
    d1, d2 = _distance_rows(aligned, standard_adv_attrs, true_labels, counter_labels,
                            class_attrs)
    return DistanceSummary(mode="robust", sample_ids=tuple(int(i) for i in standard_ids),
                           d1_values=d1, d2_values=d2)


def write_records_jsonl(records: list[ExplanationRecord], path) -> None:
    """Write explanation records one JSON object per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json_dict(), sort_keys=True) + "\n")
