import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from srlab.analysis import MeasureSpec, evaluation_grid, mixture_measure
from srlab.classes import ClassSpec, sample_class
from srlab.dictionaries import Expansion, GegenbauerParams, explicit_dictionary, gegenbauer_dictionary, trig_centered
from srlab.discretization import random_points
from srlab.oracles import (a1r_budget, block_budget_approximate, bp1_approximant, gegenbauer_schedule,
                           greedy_minimax, kappa0, kashin_oracle_sigma, minimax_fit, oga_approximate, sigma_v,
                           gegenbauer_block_construction, wab_schedule)

TORUS = MeasureSpec()


def lp_minimax(A, b):
    """Real minimax by a separate LP formulation (scipy HiGHS)."""
    g, v = A.shape
    cost = np.r_[np.zeros(v), 1.0]
    A_ub = np.block([[A, -np.ones((g, 1))], [-A, -np.ones((g, 1))]])
    res = linprog(cost, A_ub=A_ub, b_ub=np.r_[b, -b], bounds=[(None, None)] * v + [(0, None)], method="highs")
    return res.fun


@given(st.integers(0, 2 ** 32 - 1))
def test_minimax_real_matches_linprog(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((40, 3))
    b = rng.standard_normal(40)
    _, val = minimax_fit(A, b)
    assert abs(val - lp_minimax(A, b)) < 1e-7


def test_minimax_complex_bounds():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((60, 2)) + 1j * rng.standard_normal((60, 2))
    b = rng.standard_normal(60) + 1j * rng.standard_normal(60)
    c, val = minimax_fit(A, b)
    ls = np.linalg.lstsq(A, b, rcond=None)[0]
    assert np.sqrt(np.mean(np.abs(b - A @ ls) ** 2)) <= val + 1e-12
    assert val <= np.max(np.abs(b - A @ ls)) + 1e-12


def test_sigma_examples():
    d = trig_centered(5)
    f = Expansion(d, np.array([3.0, 1.0, 0, 0, 0]))
    s = sigma_v(f, d, 1)
    assert s.subset == (1,) and abs(s.value - 1) < 1e-12 and s.tag == "exact-threshold"
    g = Expansion(d, np.array([0, 1.0, 0, 2j, 0]))
    pts = random_points(TORUS, 5, np.random.default_rng(0))
    for norm in ("l2", "mu_xi", "uniform"):
        assert sigma_v(g, d, 2, norm, points=pts).value < 1e-8


def test_sigma_mu_xi_three_element_brute_force():
    d = trig_centered(3)
    pts = random_points(TORUS, 4, np.random.default_rng(2))
    f = Expansion(trig_centered(7), np.random.default_rng(3).standard_normal(7))
    q = f.dictionary.quadrature()
    s = sigma_v(f, d, 1, "mu_xi", q=q, points=pts)
    mix = mixture_measure(q, pts.points)
    sw = np.sqrt(mix.weights)
    errs = []
    for j in range(3):
        a = sw * d.evaluate(mix.nodes)[:, j]
        y = sw * f(mix.nodes)
        errs.append(np.linalg.norm(y - a * (np.vdot(a, y) / np.vdot(a, a))))
    assert abs(s.value - min(errs)) < 1e-12 and s.subset == (int(np.argmin(errs)) + 1,)


@given(st.integers(0, 2 ** 32 - 1))
def test_norm_chain_and_monotonicity(seed):
    rng = np.random.default_rng(seed)
    d = trig_centered(6)
    big = trig_centered(9)
    f = Expansion(big, rng.standard_normal(9) + 1j * rng.standard_normal(9))
    q = big.quadrature()
    pts = random_points(TORUS, 5, rng)
    prev = math.inf
    for v in (1, 2, 3):
        s2 = sigma_v(f, d, v, "l2", q=q).value
        smu = sigma_v(f, d, v, "mu_xi", q=q, points=pts).value
        sinf = sigma_v(f, d, v, "uniform", extra_points=pts).value
        assert s2 / math.sqrt(2) <= smu + 1e-12
        # the grid value is exact up to the grid; the true sup norm is at least as large
        assert smu <= sinf * (1 + 1e-6) + 1e-9
        assert s2 <= prev + 1e-12
        prev = s2


def test_uniform_sigma_brute_force():
    d = trig_centered(5)
    f = Expansion(trig_centered(7), np.random.default_rng(4).standard_normal(7))
    s = sigma_v(f, d, 2, "uniform", grid_size=64)
    grid = evaluation_grid(TORUS, 64)
    vals = {J: minimax_fit(d.evaluate(grid)[:, list(J)], f(grid))[1] for J in itertools.combinations(range(5), 2)}
    best = min(vals.values())
    assert abs(s.value - best) < 1e-7
    assert s.tag == "grid-estimate"


def test_oga_examples():
    d = trig_centered(6)
    f = Expansion(d, np.eye(6)[0])
    a = oga_approximate(f, d, 1)
    assert a.subset == (1,) and a.residual_l2 < 1e-12
    g = Expansion(d, (np.eye(6)[0] + np.eye(6)[1]) / 2)
    assert oga_approximate(g, d, 2).residual_l2 < 1e-12


@given(st.integers(0, 2 ** 32 - 1))
def test_oga_rate_and_monotone(seed):
    rng = np.random.default_rng(seed)
    d = trig_centered(16)
    c = sample_class(ClassSpec("A1r"), d, rng)
    f = Expansion(d, c)
    a = oga_approximate(f, d, 8)
    h = a.info["history"]
    assert all(h[i + 1] <= h[i] + 1e-12 for i in range(len(h) - 1))
    for v in range(1, len(h)):
        assert h[v] <= v ** -0.5 + 1e-8
        assert h[v] >= sigma_v(f, d, v).value - 1e-12


def test_truncate_greedy_examples():
    d = trig_centered(16)
    pts = random_points(TORUS, 16, np.random.default_rng(0))
    head = np.zeros(16, dtype=complex)
    head[:3] = [0.5, -0.25, 0.25j]
    assert bp1_approximant(head, 0.0, 4, d, pts).residual_mu_xi == 0.0
    j = np.arange(1, 17)
    c = j ** -1.0 / np.sum(j ** -1.0 * j ** 1.0)
    assert abs(a1r_budget(c, 1.0) - 1) < 1e-12
    a = bp1_approximant(c, 1.0, 4, d, pts)
    assert a.residual_mu_xi <= 4 ** -1.5 + 1e-8 and len(a.indices) <= 8
    full = bp1_approximant(c, 1.0, 16, d, pts)
    assert full.residual_mu_xi == 0.0


def test_schedules():
    assert kappa0(0.0, 1.0, 1.0) == 4
    s = gegenbauer_schedule(20, kappa0(0.0, 1.0, 1.0))
    assert sum(s.values()) <= 2 ** 19
    budgets, mstar = wab_schedule([1, 2, 4, 8, 16, 32], 20)
    assert sum(budgets) <= 20 and budgets[: mstar + 1] == [1, 2, 4][: mstar + 1]


def test_block_budget_examples():
    c = np.zeros(12)
    c[4:8] = [0.3, -0.2, 0.1, 0.05]
    a = block_budget_approximate(c, [np.arange(4, 8)], [4])
    assert a.residual_l2 == 0.0
    u = np.zeros(12)
    u[4:8] = 0.5
    a = block_budget_approximate(u, [np.arange(4, 8)], [2])
    assert abs(a.residual_l2 - math.sqrt(2 * 0.25)) < 1e-15


def test_block_construction_budget_and_accuracy():
    d = gegenbauer_dictionary(GegenbauerParams(0.0, 63))
    grid = evaluation_grid(d.measure, 512)
    c = sample_class(ClassSpec("GegWiener", r=1.0), d, np.random.default_rng(0))
    for n in (4, 8, 16, 32):
        b = gegenbauer_block_construction(c, d, n, 0.0, 1.0, 1.0, grid)
        assert len(b.approximant.indices) <= n
        direct = np.max(np.abs(d.evaluate(grid) @ c - b.approximant.evaluate(d, grid)))
        assert abs(direct - b.grid_error) < 1e-10
        g = greedy_minimax(c, d, n, grid)
        assert len(g.indices) <= n


@pytest.mark.parametrize("N", [4, 6, 8, 10, 12])
def test_kashin_identity_system(N):
    w = np.full(N, 1.0 / N)
    B = math.sqrt(N) * np.eye(N)
    for n in range(0, N // 4 + 1):
        r = kashin_oracle_sigma(B, B, w, n)
        assert abs(r.value - math.sqrt(N - n)) < 1e-10 and r.exact
    if N == 4:
        r = kashin_oracle_sigma(B, B, w, 1)
        assert abs(r.value - math.sqrt(3 * 4) / 2) < 1e-12


def test_kashin_general_system_is_not_exact():
    rng = np.random.default_rng(0)
    q = np.linalg.qr(rng.standard_normal((8, 8)))[0] * math.sqrt(8)
    w = np.full(8, 1 / 8)
    r = kashin_oracle_sigma(math.sqrt(8) * np.eye(8)[:, :4], q, w, 1)
    assert not r.exact and 0 < r.value <= 2.0 + 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.booleans(), st.integers(1, 3))
def test_branch_and_bound_equals_full_enumeration(seed, cplx, v):
    from srlab.oracles import uniform_sigma
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((30, 6))
    b = rng.standard_normal(30)
    if cplx:
        A = A + 1j * rng.standard_normal((30, 6))
        b = b + 1j * rng.standard_normal(30)
    sub, _, val, _, exhaustive = uniform_sigma(A, b, v)
    full = {J: minimax_fit(A[:, list(J)], b)[1] for J in itertools.combinations(range(6), v)}
    best = min(full.values())
    assert exhaustive and abs(val - best) <= 1e-7 * max(1.0, best)
    assert full[tuple(sub)] <= best + 1e-7 * max(1.0, best)
