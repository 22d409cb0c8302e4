"""Deterministic derivation of named random substreams.

Every stochastic stage draws from a generator keyed by (seed, labels), so a
stage can be re-run in isolation and still reproduce the full-pipeline bytes.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream", "derive_seed"]


def _label_entropy(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(seed: int, *labels: str) -> np.random.Generator:
    """Return a ``numpy`` Generator keyed by ``seed`` and a path of labels.

    Identical (seed, labels) always yield an identical stream; distinct labels
    yield statistically independent streams.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    entropy = [seed] + [_label_entropy(label) for label in labels]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, label: str) -> int:
    """Collapse (seed, label) into a fresh integer seed for a pipeline stage."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    digest = hashlib.sha256(f"{seed}/{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
