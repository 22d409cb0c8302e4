"""Shared numerical oracles for the test suite.

Central finite differences are the reference for every analytic-gradient
check; they are computed with no knowledge of the library's own gradient
code paths.
"""

import numpy as np


def central_diff(f, x, h=1e-6):
    """Central-difference gradient of scalar ``f`` at vector ``x``."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad


def central_diff_matrix(f, w, h=1e-6):
    """Central-difference gradient of scalar ``f`` at matrix ``w``."""
    w = np.asarray(w, dtype=np.float64)
    grad = np.zeros_like(w)
    for idx in np.ndindex(*w.shape):
        step = np.zeros_like(w)
        step[idx] = h
        grad[idx] = (f(w + step) - f(w - step)) / (2.0 * h)
    return grad


def rel_err(analytic, numeric):
    """Relative error between two gradient arrays, robust to near-zero norms."""
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    numeric = np.asarray(numeric, dtype=np.float64).ravel()
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-10)
    return float(np.linalg.norm(analytic - numeric) / scale)
