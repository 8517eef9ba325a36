import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srlab.analysis import MeasureSpec, build_quadrature
from srlab.dictionaries import GegenbauerParams, gegenbauer_dictionary, load_dictionary, trig_centered
from srlab.discretization import (PointSet, equispaced_points, estimate_m_required, find_universal_points,
                                  random_points, sampled_gram, verify_universal_discretization,
                                  verify_weighted_gegenbauer_discretization)
from srlab.errors import CapExceededError, ParameterError

TORUS = MeasureSpec()


def whitened_extremes(dictionary, ps, v):
    """Independent route: Cholesky-whiten each sub-Gram and take plain Hermitian eigenvalues."""
    Phi = dictionary.evaluate(ps.points)
    q = dictionary.quadrature()
    Pq = dictionary.evaluate(q.nodes)
    lo, hi = math.inf, -math.inf
    for J in itertools.combinations(range(dictionary.size), v):
        J = list(J)
        G = (Pq[:, J].conj().T * q.weights) @ Pq[:, J]
        H = (Phi[:, J].conj().T * ps.weights) @ Phi[:, J]
        Li = np.linalg.inv(np.linalg.cholesky(G))
        lam = np.linalg.eigvalsh(Li @ H @ Li.conj().T)
        lo, hi = min(lo, lam[0]), max(hi, lam[-1])
    return lo, hi


def test_discrete_parseval():
    d = trig_centered(5)
    rep = verify_universal_discretization(d, equispaced_points(TORUS, 5), 5, side="two-sided")
    assert abs(rep.C1 - 1) < 1e-10 and abs(rep.C2 - 1) < 1e-10 and rep.certified


def test_rank_deficient_gives_zero():
    d = trig_centered(5)
    ps = PointSet(np.array([[0.1], [2.0]]))
    assert verify_universal_discretization(d, ps, 3).C1 == 0.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_matches_whitened_oracle(seed):
    d = trig_centered(7)
    ps = random_points(TORUS, 12, np.random.default_rng(seed))
    rep = verify_universal_discretization(d, ps, 3, side="two-sided")
    lo, hi = whitened_extremes(d, ps, 3)
    assert abs(rep.C1 - lo) < 1e-10 and abs(rep.C2 - hi) < 1e-10


@given(st.integers(0, 2 ** 32 - 1))
def test_reported_C1_is_sound(seed):
    rng = np.random.default_rng(seed)
    d = trig_centered(8)
    ps = random_points(TORUS, 20, rng)
    v = 2
    rep = verify_universal_discretization(d, ps, v)
    J = rng.choice(8, size=v, replace=False)
    c = rng.standard_normal(v) + 1j * rng.standard_normal(v)
    f_s = d.evaluate(ps.points, J) @ c
    ratio = np.sum(ps.weights * np.abs(f_s) ** 2) / np.sum(np.abs(c) ** 2)
    assert ratio >= rep.C1 - 1e-12


@given(st.integers(0, 2 ** 32 - 1))
def test_C1_decreases_with_v(seed):
    d = trig_centered(6)
    ps = random_points(TORUS, 10, np.random.default_rng(seed))
    c = [verify_universal_discretization(d, ps, v).C1 for v in (1, 2, 3)]
    assert c[0] >= c[1] - 1e-12 and c[1] >= c[2] - 1e-12


def test_gegenbauer_on_chebyshev_nodes():
    d = gegenbauer_dictionary(GegenbauerParams(0.0, 2))
    q = build_quadrature(MeasureSpec("interval", "chebyshev"), 8)
    ps = PointSet(q.nodes, None, "chebyshev-gauss", None, MeasureSpec("interval", "chebyshev"))
    # independent route: rescale by the exact sampled Gram of the full 3-dim span
    rep = verify_universal_discretization(d, ps, 3, side="two-sided")
    H = sampled_gram(d, ps)
    lam = np.linalg.eigvalsh(H)
    assert abs(rep.C1 - lam[0]) < 1e-12 and abs(rep.C2 - lam[-1]) < 1e-12
    assert rep.C1 > 0


def test_weighted_gegenbauer_constant_case():
    params = GegenbauerParams(0.0, 0)
    x = np.array([[-0.5], [0.2], [0.9]])
    rep = verify_weighted_gegenbauer_discretization(params, x, 1)
    from srlab.discretization import gegenbauer_weighted_points
    ps = gegenbauer_weighted_points(params, x)
    assert abs(rep.C1 - ps.weights.sum()) < 1e-12


def test_m_below_v_zero_and_cap():
    d = trig_centered(30)
    ps = random_points(TORUS, 3, np.random.default_rng(0))
    assert verify_universal_discretization(d, ps, 4).C1 == 0.0
    ps = random_points(TORUS, 60, np.random.default_rng(0))
    with pytest.raises(CapExceededError):
        verify_universal_discretization(d, ps, 10, cap=1000)
    audit = verify_universal_discretization(d, ps, 10, cap=1000, audit=50, rng=np.random.default_rng(1))
    assert not audit.certified


def test_find_points_examples():
    d = trig_centered(8)
    hits = 0
    for seed in range(100):
        _, rep = find_universal_points(d, 1, 0.5, 32, seed=seed, max_attempts=1)
        hits += bool(rep.target_met and rep.certified)
    assert hits >= 95
    ps, rep = find_universal_points(d, 8, 0.5, 8, sampling="equispaced")
    assert rep.target_met and abs(rep.C1 - 1) < 1e-10
    _, rep = find_universal_points(d, 2, 0.5, 1, seed=0, max_attempts=3)
    assert not rep.target_met


def test_find_points_deterministic():
    d = trig_centered(10)
    a, ra = find_universal_points(d, 2, 0.5, 30, seed=7)
    b, rb = find_universal_points(d, 2, 0.5, 30, seed=7)
    np.testing.assert_array_equal(a.points, b.points)
    assert ra.C1 == rb.C1


def test_estimate_m_required_examples():
    assert estimate_m_required(trig_centered(2), 1, 0.5) <= 8
    assert estimate_m_required(trig_centered(4), 1, 1.5) == math.inf
    cross = load_dictionary({"kind": "trig", "frequencies": {"kind": "hyperbolic_cross", "N": 2, "d": 1}})
    # random points need about N log N; 8N is the declared "small multiple"
    assert estimate_m_required(cross, cross.size, 0.5, seed=0) <= 8 * cross.size


def test_pointset_validation():
    with pytest.raises(ParameterError):
        PointSet(np.zeros((2, 1)), np.array([1.0]))
    with pytest.raises(ParameterError):
        PointSet(np.zeros((2, 1)), np.array([1.0, 0.0]))
    ps = random_points(TORUS, 4, np.random.default_rng(0), seed=0)
    assert PointSet.from_dict(ps.to_dict()).points.tolist() == ps.points.tolist()
