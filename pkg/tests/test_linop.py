"""Surjection/injection rates of linear operators under varied norms."""

from __future__ import annotations

import math

import numpy as np
import pytest

from finvert.linop import (
    LinOp,
    banach_constant,
    dual_banach_constant,
    regularity_modulus,
    transport_operator,
)
from finvert.norms import LpNorm, MappedNorm, PolyhedralNorm, WeightedLpNorm

from conftest import brute_injection_rate, brute_surjection_rate


def _op(matrix, norm_in=None, norm_out=None):
    matrix = np.asarray(matrix, dtype=float)
    m, n = matrix.shape
    return LinOp(
        matrix=matrix,
        norm_in=norm_in or LpNorm(n, 2),
        norm_out=norm_out or LpNorm(m, 2),
    )


def test_euclidean_rates_equal_smallest_singular_value():
    # under euclidean norms both rates of a square matrix equal sigma_min,
    # computed independently by numpy's SVD
    rng = np.random.default_rng(0)
    for k in range(20):
        n = 2 + (k % 3)
        A = rng.standard_normal((n, n))
        smin = float(np.linalg.svd(A, compute_uv=False)[-1])
        T = _op(A)
        assert banach_constant(T) == pytest.approx(smin, rel=1e-9)
        assert dual_banach_constant(T) == pytest.approx(smin, rel=1e-9)


def test_identity_has_rate_one_under_any_norm():
    for norm in [
        LpNorm(2, 1),
        LpNorm(2, 2),
        LpNorm(2, math.inf),
        WeightedLpNorm([2.0, 0.5], 2.0),
    ]:
        T = LinOp(matrix=np.eye(2), norm_in=norm, norm_out=norm)
        assert banach_constant(T) == pytest.approx(1.0, abs=1e-9)
        assert dual_banach_constant(T) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "norm_in,norm_out",
    [
        (LpNorm(2, 1), LpNorm(2, 1)),
        (LpNorm(2, math.inf), LpNorm(2, math.inf)),
        (LpNorm(2, 1), LpNorm(2, math.inf)),
        (
            PolyhedralNorm(
                np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
            ),
            LpNorm(2, math.inf),
        ),
    ],
)
def test_polyhedral_routes_match_dense_sampling(norm_in, norm_out):
    rng = np.random.default_rng(5)
    for k in range(6):
        A = rng.standard_normal((2, 2)) + 0.5 * np.eye(2)
        T = LinOp(matrix=A, norm_in=norm_in, norm_out=norm_out)
        c = banach_constant(T)
        cd = dual_banach_constant(T)
        # dense sphere sampling gives an upper bound converging from above
        c_ref = brute_surjection_rate(A, norm_in, norm_out, count=4000, seed=k)
        cd_ref = brute_injection_rate(A, norm_in, norm_out, count=4000, seed=k)
        assert c <= c_ref + 1e-9
        assert c >= c_ref - 2e-2 * max(1.0, c_ref)
        assert cd <= cd_ref + 1e-9
        assert cd >= cd_ref - 2e-2 * max(1.0, cd_ref)


def test_diag_two_three_exact_under_linf():
    # diag(2,3) with matching linf norms: the vertex enumeration route is
    # exact, and hand computation over the cube's corners gives rate 2
    A = np.diag([2.0, 3.0])
    T = LinOp(matrix=A, norm_in=LpNorm(2, math.inf), norm_out=LpNorm(2, math.inf))
    assert banach_constant(T) == pytest.approx(2.0, abs=1e-9)
    assert dual_banach_constant(T) == pytest.approx(2.0, abs=1e-9)


def test_rank_deficiency_gives_exact_zero():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    T = _op(A)
    assert banach_constant(T) == 0.0
    assert dual_banach_constant(T) == 0.0


def test_wide_and_tall_dimension_counts():
    wide = _op(np.array([[1.0, 0.0]]))  # onto R, never injective
    assert banach_constant(wide) == pytest.approx(1.0, abs=1e-9)
    assert dual_banach_constant(wide) == 0.0
    tall = _op(np.array([[1.0], [0.0]]))  # injective, never onto R^2
    assert banach_constant(tall) == 0.0
    assert dual_banach_constant(tall) == pytest.approx(1.0, abs=1e-9)


def test_sampled_descent_route_close_to_dense_reference():
    # lp:3 has neither a euclidean factor nor facets, forcing the sampled
    # descent; compare against a large independent sphere sample
    A = np.array([[1.0, 0.3], [-0.2, 0.8]])
    norm_in = LpNorm(2, 3)
    norm_out = LpNorm(2, 3)
    T = LinOp(matrix=A, norm_in=norm_in, norm_out=norm_out)
    c = banach_constant(T, seed=0)
    c_ref = brute_surjection_rate(A, norm_in, norm_out, count=8000, seed=1)
    # both numbers over-estimate the same infimum, so only closeness is
    # guaranteed, not an ordering
    assert c == pytest.approx(c_ref, rel=5e-3)


def test_regularity_modulus_is_reciprocal():
    A = np.diag([2.0, 4.0])
    T = _op(A)
    assert regularity_modulus(T) == pytest.approx(0.5, rel=1e-9)
    # a singular operator has infinite modulus
    S = _op(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert regularity_modulus(S) == math.inf


def test_linop_shape_validation():
    with pytest.raises(ValueError):
        LinOp(matrix=np.eye(2), norm_in=LpNorm(3, 2), norm_out=LpNorm(2, 2))
    with pytest.raises(ValueError):
        LinOp(matrix=np.eye(2), norm_in=LpNorm(2, 2), norm_out=LpNorm(3, 2))


def test_transport_example_diag_two():
    # identity operator pushed through charts whose output derivative
    # doubles lengths: the matrix doubles but the rate stays exactly 1
    T = _op(np.eye(2))
    moved = transport_operator(
        T, dphi_inv=np.eye(2), dpsi_inv=np.diag([2.0, 2.0])
    )
    assert np.allclose(moved.matrix, np.diag([2.0, 2.0]))
    assert banach_constant(moved) == pytest.approx(1.0, abs=1e-9)


def test_transport_preserves_rates_randomly():
    rng = np.random.default_rng(21)
    for k in range(8):
        A = rng.standard_normal((2, 2)) + 0.6 * np.eye(2)
        T = _op(A)
        P = rng.standard_normal((2, 2)) + 1.5 * np.eye(2)
        Q = rng.standard_normal((2, 2)) + 1.5 * np.eye(2)
        moved = transport_operator(T, dphi_inv=P, dpsi_inv=Q)
        assert banach_constant(moved) == pytest.approx(
            banach_constant(T), rel=1e-8
        )
        assert dual_banach_constant(moved) == pytest.approx(
            dual_banach_constant(T), rel=1e-8
        )


def test_transport_rejects_singular_chart_derivative():
    T = _op(np.eye(2))
    with pytest.raises(ValueError):
        transport_operator(
            T, dphi_inv=np.array([[1.0, 0.0], [0.0, 0.0]]), dpsi_inv=np.eye(2)
        )


def test_mapped_norm_rates_against_dense_sampling():
    A = np.array([[1.0, 0.5], [0.0, 1.0]])
    norm = MappedNorm(LpNorm(2, 2), np.array([[2.0, 0.0], [1.0, 1.0]]))
    T = LinOp(matrix=A, norm_in=norm, norm_out=LpNorm(2, 2))
    c = banach_constant(T)
    c_ref = brute_surjection_rate(A, norm, LpNorm(2, 2), count=6000, seed=3)
    assert c <= c_ref + 1e-9
    assert c == pytest.approx(c_ref, rel=2e-2)
