"""Flat-file model serialization.

A model file is a short ASCII header (one ``key value...`` pair per line,
terminated by ``end``) followed by raw little-endian float64 payload,
row-major. The header carries every shape, so a file is self-describing;
loading can additionally validate the shapes against a dataset. The exact
layout is documented in the README.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .embed import EmbeddingModel, FeatureMap, GeneralClassifier
from .exceptions import ValidationError

__all__ = ["save_model", "load_model"]

_MAGIC = "counterattr-model 1"


def _payload(arrays: list[np.ndarray]) -> bytes:
    return b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in arrays)


def save_model(model, dmap: FeatureMap, path) -> None:
    """Write a model together with the feature map it was trained behind."""
    lines = [_MAGIC]
    arrays: list[np.ndarray] = []
    if isinstance(model, EmbeddingModel):
        lines.append("kind embedding")
        lines.append(f"shape {model.feature_dim} {model.num_attributes}")
        lines.append(f"margin {model.margin_scale!r}")
        lines.append(f"normalize {int(model.normalize_class_attributes)}")
        lines.append(f"rule {model.prediction_rule}")
        arrays.append(model.weights)
    elif isinstance(model, GeneralClassifier):
        lines.append("kind general")
        lines.append(f"shape {model.feature_dim} {model.num_classes}")
        arrays.append(model.weights)
        arrays.append(model.bias)
    else:
        raise ValidationError(f"cannot serialize object of type {type(model).__name__}")

    if dmap.kind == "identity":
        lines.append(f"map identity {dmap.input_dim}")
    else:
        lines.append(f"map hidden {dmap.input_dim} {dmap.hidden_dim} {dmap.output_dim}")
        arrays.extend([dmap.w1, dmap.b1, dmap.w2])
    lines.append("data float64 little-endian")
    lines.append("end")

    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        fh.write(_payload(arrays))


def _take(buffer: np.ndarray, offset: int, shape: tuple[int, ...], path) -> tuple[np.ndarray, int]:
    size = int(np.prod(shape))
    if offset + size > buffer.size:
        raise ValidationError(f"{path}: truncated payload")
    return buffer[offset : offset + size].reshape(shape), offset + size


def load_model(path, dataset: Dataset | None = None):
    """Load ``(model, feature_map)`` from a model file.

    When ``dataset`` is given, the stored shapes are validated against it.
    """
    with open(path, "rb") as fh:
        blob = fh.read()

    header: dict[str, list[str]] = {}
    offset = 0
    first = True
    while True:
        newline = blob.find(b"\n", offset)
        if newline < 0:
            raise ValidationError(f"{path}: unterminated header")
        try:
            line = blob[offset:newline].decode("ascii")
        except UnicodeDecodeError:
            raise ValidationError(f"{path}: non-ASCII header") from None
        offset = newline + 1
        if first:
            if line != _MAGIC:
                raise ValidationError(f"{path}: bad magic {line!r}")
            first = False
            continue
        if line == "end":
            break
        key, *rest = line.split(" ")
        header[key] = rest

    if header.get("data") != ["float64", "little-endian"]:
        raise ValidationError(f"{path}: unsupported data encoding")
    if (len(blob) - offset) % 8 != 0:
        raise ValidationError(f"{path}: payload is not a whole number of float64 values")
    payload = np.frombuffer(blob[offset:], dtype="<f8")

    kind = header.get("kind", [None])[0]
    if kind not in ("embedding", "general"):
        raise ValidationError(f"{path}: unknown model kind {kind!r}")
    try:
        rows, cols = (int(v) for v in header["shape"])
    except (KeyError, ValueError):
        raise ValidationError(f"{path}: bad or missing shape") from None

    pos = 0
    if kind == "embedding":
        weights, pos = _take(payload, pos, (rows, cols), path)
        try:
            margin = float(header["margin"][0])
            normalize = bool(int(header["normalize"][0]))
            rule = " ".join(header["rule"])
        except (KeyError, ValueError, IndexError):
            raise ValidationError(f"{path}: bad embedding header") from None
        model = EmbeddingModel(
            weights=weights,
            normalize_class_attributes=normalize,
            prediction_rule=rule,
            margin_scale=margin,
        )
    else:
        weights, pos = _take(payload, pos, (rows, cols), path)
        bias, pos = _take(payload, pos, (cols,), path)
        model = GeneralClassifier(weights=weights, bias=bias)

    map_spec = header.get("map")
    if not map_spec:
        raise ValidationError(f"{path}: missing feature map entry")
    if map_spec[0] == "identity":
        dmap = FeatureMap.identity(int(map_spec[1]))
    elif map_spec[0] == "hidden":
        d_in, h, d_out = (int(v) for v in map_spec[1:4])
        w1, pos = _take(payload, pos, (d_in, h), path)
        b1, pos = _take(payload, pos, (h,), path)
        w2, pos = _take(payload, pos, (h, d_out), path)
        dmap = FeatureMap.hidden(w1, b1, w2)
    else:
        raise ValidationError(f"{path}: unknown feature map kind {map_spec[0]!r}")
    if pos != payload.size:
        raise ValidationError(f"{path}: {payload.size - pos} unexpected trailing values")
    if dmap.output_dim != rows:
        raise ValidationError(f"{path}: feature map output {dmap.output_dim} != model dim {rows}")

    if dataset is not None:
        if dmap.input_dim != dataset.feature_dim:
            raise ValidationError(
                f"{path}: model expects input dim {dmap.input_dim}, "
                f"dataset has {dataset.feature_dim}"
            )
        if kind == "embedding" and cols != dataset.num_attributes:
            raise ValidationError(
                f"{path}: model has {cols} attributes, dataset has {dataset.num_attributes}"
            )
        if kind == "general" and cols != dataset.num_classes:
            raise ValidationError(
                f"{path}: model has {cols} classes, dataset has {dataset.num_classes}"
            )
    return model, dmap
