import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from srlab.analysis import (MeasureSpec, Quadrature, build_quadrature, evaluation_grid, gegenbauer_normalizer,
                            mixture_measure, norm_l2_mu_xi, norm_lp, sample_norm_weighted)
from srlab.errors import DomainError, ParameterError

TORUS = MeasureSpec()
LEG = MeasureSpec("interval", "gegenbauer", 0.0)


def test_torus_rule_is_equispaced():
    q = build_quadrature(TORUS, 8)
    assert len(q) == 8
    np.testing.assert_allclose(q.weights, 1 / 8)
    np.testing.assert_allclose(np.diff(q.nodes[:, 0]), 2 * np.pi / 8)


def test_interval_rule_integrates_x4():
    q = build_quadrature(LEG, 5)
    assert abs(q.integrate(q.nodes[:, 0] ** 4) - 0.2) < 1e-12


def test_single_node_rule():
    q = build_quadrature(LEG, 1)
    assert len(q) == 1 and abs(q.nodes[0, 0]) < 1e-15 and abs(q.weights[0] - 1) < 1e-15


@pytest.mark.parametrize("alpha", [-0.25, 0.0, 0.5, 1.5])
def test_gegenbauer_moments_match_scipy(alpha):
    m = MeasureSpec("interval", "gegenbauer", alpha)
    q = build_quadrature(m, 6)
    c = gegenbauer_normalizer(alpha)
    for k in range(12):
        ref = quad(lambda x: c * x ** k * (1 - x * x) ** alpha, -1, 1)[0]
        assert abs(q.integrate(q.nodes[:, 0] ** k) - ref) < 1e-10


def test_chebyshev_moments():
    q = build_quadrature(MeasureSpec("interval", "chebyshev"), 6)
    for k in (0, 2, 4, 6):
        ref = math.comb(k, k // 2) / 2 ** k
        assert abs(q.integrate(q.nodes[:, 0] ** k) - ref) < 1e-12


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=2))
def test_torus_2d_orthogonality(k):
    q = build_quadrature(MeasureSpec(d=2), 11)
    val = q.integrate(np.exp(1j * q.nodes @ np.array(k, float)))
    assert abs(val - (1.0 if k == [0, 0] else 0.0)) < 1e-12


def test_norm_examples():
    qt = build_quadrature(TORUS, 8)
    assert abs(norm_lp(np.ones(8), qt) - 1) < 1e-15
    assert abs(norm_lp(np.exp(1j * qt.nodes[:, 0]), qt) - 1) < 1e-15
    ql = build_quadrature(LEG, 4)
    assert abs(norm_lp(ql.nodes[:, 0], ql) - math.sqrt(1 / 3)) < 1e-14


def test_sample_norms():
    assert abs(sample_norm_weighted([1, 1, 1, 1], np.full(4, 0.25)) - 1) < 1e-15
    assert abs(sample_norm_weighted([2, 0], [0.5, 0.5]) - math.sqrt(2)) < 1e-15
    assert abs(sample_norm_weighted([1, -1, 1, -1], np.full(4, 0.25), p=1) - 1) < 1e-15


def test_mu_xi_examples():
    q = build_quadrature(TORUS, 8)
    pts = np.array([[0.3], [1.1], [2.0]])
    assert abs(norm_l2_mu_xi(np.ones(8), q, np.ones(3)) - 1) < 1e-15
    # unit L2 norm and zero at the points
    assert abs(norm_l2_mu_xi(np.ones(8), q, np.zeros(3)) - 1 / math.sqrt(2)) < 1e-15
    # phi_1 = e^{ix} sampled on equispaced points
    f = lambda x: np.exp(1j * x[:, 0])
    eq = build_quadrature(TORUS, 5).nodes
    assert abs(norm_l2_mu_xi(f(q.nodes), q, f(eq)) - 1) < 1e-15
    mix = mixture_measure(q, pts)
    assert abs(mix.weights.sum() - 1) < 1e-15


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 12))
def test_mu_xi_sandwich(seed, m):
    # 2^{-1/2} ||f||_2 <= ||f||_{mu_xi} <= ||f||_inf for a trigonometric polynomial
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    k = np.arange(-3, 4)
    f = lambda x: np.exp(1j * x @ k[None, :].astype(float)) @ c
    q = build_quadrature(TORUS, 16)
    pts = rng.uniform(0, 2 * np.pi, size=(m, 1))
    l2 = norm_lp(f(q.nodes), q)
    mu = norm_l2_mu_xi(f(q.nodes), q, f(pts))
    sup = np.max(np.abs(f(np.vstack([evaluation_grid(TORUS, 4096), pts]))))
    assert l2 / math.sqrt(2) - 1e-12 <= mu <= sup * (1 + 1e-9)
    assert abs(l2 - np.linalg.norm(c)) < 1e-10


def test_measure_validation():
    with pytest.raises(ParameterError):
        MeasureSpec("interval", "gegenbauer", -0.5)
    with pytest.raises(ParameterError):
        MeasureSpec("torus", "chebyshev")
    with pytest.raises(ParameterError):
        Quadrature(np.zeros((2, 1)), np.array([1.0, -1.0]))


def test_interval_grid_and_domain():
    g = evaluation_grid(LEG, 33)
    assert g.min() >= -1 and g.max() <= 1 and len(g) == 33
    from srlab.analysis import check_in_domain
    with pytest.raises(DomainError):
        check_in_domain(LEG, np.array([[1.5]]))


def test_quadrature_roundtrip():
    q = build_quadrature(MeasureSpec("interval", "gegenbauer", 0.5), 7)
    r = Quadrature.from_dict(q.to_dict())
    np.testing.assert_array_equal(r.nodes, q.nodes)
    np.testing.assert_array_equal(r.weights, q.weights)
