"""Shared brute-force oracles used to cross-check computed rates.

Every oracle here deliberately avoids the code paths under test: rates are
estimated by dense sampling of spheres, duals by maximizing the pairing
over sampled unit vectors, and one-dimensional facts by closed forms
written out at the call site.
"""

from __future__ import annotations

import numpy as np
import pytest


def dense_sphere(norm, count: int, seed: int) -> np.ndarray:
    """Gaussian directions scaled onto the unit sphere of ``norm``."""
    rng = np.random.default_rng(seed)
    pts = []
    dim = norm.dim
    raw = rng.standard_normal((count, dim))
    for row in raw:
        n = norm.eval(row)
        if n > 1e-12:
            pts.append(row / n)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        for s in (1.0, -1.0):
            pts.append(s * e / norm.eval(e))
    return np.asarray(pts)


def brute_injection_rate(matrix, norm_in, norm_out, count=4000, seed=0) -> float:
    """min over the domain sphere of the image norm, by dense sampling."""
    best = np.inf
    for u in dense_sphere(norm_in, count, seed):
        best = min(best, norm_out.eval(matrix @ u))
    return float(best)


def brute_surjection_rate(matrix, norm_in, norm_out, count=4000, seed=0) -> float:
    """min over the dual target sphere of the dual norm of the transpose image."""
    dual_out = norm_out.dual()
    best = np.inf
    for y in dense_sphere(dual_out, count, seed):
        best = min(best, norm_in.dual_eval(matrix.T @ y))
    return float(best)


def brute_dual(norm, y, count=4000, seed=0) -> float:
    """sup of <v, y> over the unit sphere, by dense sampling (lower bound)."""
    best = 0.0
    for v in dense_sphere(norm, count, seed):
        best = max(best, float(v @ y))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
