"""Best v-term approximation oracles and constructive sparse approximants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import clarabel
import numpy as np
import scipy.sparse as sp

from .analysis import Quadrature, as_points, evaluation_grid, mixture_measure
from .dictionaries import Dictionary, function_degree
from .discretization import PointSet
from .errors import CapExceededError, ParameterError, SizeError
from .recovery import SparseApproximant, best_subset_projection, greedy_selection
from .subsets import DEFAULT_CAP, TIE_TOL, batched_lstsq, iter_subset_chunks, subset_count, to_one_based

NORMS = ("l2", "mu_xi", "uniform")
TAGS = ("exact-exhaustive", "exact-threshold", "upper-bound-greedy", "grid-estimate")
DEFAULT_OVERSAMPLE = 16
MINIMAX_TOL = 1e-10


@dataclass
class SigmaResult:
    """Best ``v``-term error of one function in one norm.

    ``tag`` says how far the value can be trusted: the two ``exact-*`` tags
    are exact for the discrete measure used, ``grid-estimate`` is the exact
    minimax on the evaluation grid, ``upper-bound-greedy`` is attained by a
    greedily chosen subset only.
    """

    value: float
    subset: tuple[int, ...]
    tag: str
    norm: str
    coefficients: np.ndarray | None = None
    grid_size: int | None = None
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        c = self.coefficients
        return {"value": self.value, "subset": list(self.subset), "tag": self.tag, "norm": self.norm,
                "coefficients_re": None if c is None else np.real(c).tolist(),
                "coefficients_im": None if c is None else np.imag(c).tolist(),
                "grid_size": self.grid_size, "info": self.info}


# --- uniform-norm best approximation on a grid -----------------------------------

def minimax_fit(design: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, float]:
    """``min_c max_i |target_i - (design @ c)_i|`` as a conic program.

    Complex data become one second-order cone per grid point; real data a
    linear program.  The returned value is recomputed from the returned
    coefficients, so it is always attained.
    """
    c, val, _ = _minimax_with_dual(design, target)
    return c, val


def _minimax_with_dual(design: np.ndarray, target: np.ndarray):
    # the third value is the dual weight of each grid point (a probability vector)
    g, v = design.shape
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = settings.tol_gap_rel = MINIMAX_TOL
    settings.tol_feas = MINIMAX_TOL
    cplx = np.iscomplexobj(design) or np.iscomplexobj(target)
    if cplx:
        dr, di = np.real(design), np.imag(design)
        fr, fi = np.real(target), np.imag(target)
        # variables (Re c, Im c, t); each cone is (t, Re r_i, Im r_i) with r = f - design c
        rows = np.zeros((3 * g, 2 * v + 1))
        rows[0::3, -1] = -1.0
        rows[1::3, :v], rows[1::3, v:2 * v] = dr, -di
        rows[2::3, :v], rows[2::3, v:2 * v] = di, dr
        b = np.zeros(3 * g)
        b[1::3], b[2::3] = fr, fi
        cones = [clarabel.SecondOrderConeT(3)] * g
        nvar = 2 * v + 1
    else:
        d, f = np.real(design), np.real(target)
        # t - (f - d c) >= 0 and t + (f - d c) >= 0
        rows = np.vstack([np.hstack([-d, -np.ones((g, 1))]), np.hstack([d, -np.ones((g, 1))])])
        b = np.concatenate([-f, f])
        cones = [clarabel.NonnegativeConeT(2 * g)]
        nvar = v + 1
    cost = np.zeros(nvar)
    cost[-1] = 1.0
    sol = clarabel.DefaultSolver(sp.csc_matrix((nvar, nvar)), cost, sp.csc_matrix(rows), b, cones,
                                 settings).solve()
    x = np.asarray(sol.x)
    z = np.asarray(sol.z)
    lam = z[0::3] if cplx else z[:g] + z[g:]
    c = x[:v] + 1j * x[v:2 * v] if cplx else x[:v]
    if not np.all(np.isfinite(c)):
        c, _ = batched_lstsq(design[None], target[None])
        c = c[0]
    lam = np.clip(np.nan_to_num(lam), 0.0, None)
    lam = lam / lam.sum() if lam.sum() > 0 else np.full(g, 1.0 / g)
    return c, float(np.max(np.abs(target - design @ c), initial=0.0)), lam


def _rms_bounds(design: np.ndarray, target: np.ndarray, chunks, lam: np.ndarray) -> np.ndarray:
    # for weights lam summing to 1, max_i |r_i| >= sqrt(sum_i lam_i |r_i|^2) for every fit
    sw = np.sqrt(lam)
    keep = sw > 0
    D, t = design[keep] * sw[keep, None], target[keep] * sw[keep]
    out = []
    for chunk in chunks:
        A = np.transpose(D[:, chunk], (1, 0, 2))
        c, _ = batched_lstsq(A, t)
        out.append(np.linalg.norm(t[None, :] - np.einsum("bnv,bv->bn", A, c), axis=1))
    return np.concatenate(out)


def uniform_sigma(design: np.ndarray, target: np.ndarray, v: int, cap: int = DEFAULT_CAP):
    """Exact grid minimax over all ``v``-subsets by branch and bound.

    For any probability weights on the grid, the weighted root-mean-square
    residual of the weighted least-squares fit never exceeds the grid
    maximum of any fit.  Subsets are visited in increasing order of the
    uniform-weight bound; the dual weights of every minimax solution found
    so far give a second, usually much sharper bound used to skip subsets,
    and the search stops once the uniform bound passes the incumbent.
    Returns ``(subset, coefficients, value, conic_solves, exhaustive)``.
    """
    g, N = design.shape
    try:
        chunks = list(iter_subset_chunks(N, v, cap, what="uniform best approximation"))
    except CapExceededError:
        sw = 1.0 / math.sqrt(g)
        chosen = sorted(greedy_selection(design * sw, target * sw, v)) or [0]
        c, val = minimax_fit(design[:, chosen], target)
        return np.asarray(chosen), c, val, 1, False
    subsets = np.vstack(chunks)
    bounds = _rms_bounds(design, target, chunks, np.full(g, 1.0 / g))
    sharp = bounds.copy()
    order = np.argsort(bounds, kind="stable")
    best = (None, None, math.inf)
    solves = 0

    def beaten(b):
        return best[0] is not None and b > best[2] + TIE_TOL * max(1.0, best[2])

    for k in order:
        if beaten(bounds[k]):
            break
        if beaten(sharp[k]):
            continue
        c, val, lam = _minimax_with_dual(design[:, subsets[k]], target)
        solves += 1
        sharp = np.maximum(sharp, _rms_bounds(design, target, chunks, lam))
        slack = 1e-9 * max(1.0, best[2])
        if best[0] is None or val < best[2] - slack:
            best = (subsets[k].copy(), c, val)
        elif val <= best[2] + slack and tuple(subsets[k]) < tuple(best[0]):
            best = (subsets[k].copy(), c, val)
    return best[0], best[1], best[2], solves, True


def default_grid_size(dictionary: Dictionary, oversample: int = DEFAULT_OVERSAMPLE) -> int:
    return oversample * dictionary.size


def sigma_v(f: Callable, dictionary: Dictionary, v: int, norm: str = "l2", q: Quadrature | None = None,
            points=None, grid_size: int | None = None, cap: int = DEFAULT_CAP,
            extra_points=None) -> SigmaResult:
    """Best ``v``-term approximation error of ``f`` by ``dictionary``.

    ``norm`` is ``"l2"`` (the dictionary's measure, via ``q``), ``"mu_xi"``
    (the mixture of that measure with the empirical measure of ``points``) or
    ``"uniform"`` (maximum over the evaluation grid of ``grid_size`` points,
    ``16 N`` by default, together with any ``extra_points``).
    """
    if norm not in NORMS:
        raise ParameterError(f"norm must be one of {NORMS}")
    if not 1 <= v <= dictionary.size:
        raise ParameterError("need 1 <= v <= N")
    if norm == "uniform":
        size = grid_size or default_grid_size(dictionary)
        grid = evaluation_grid(dictionary.measure, size)
        if extra_points is not None:
            extra = extra_points.points if isinstance(extra_points, PointSet) else extra_points
            grid = np.vstack([grid, as_points(extra, dictionary.measure.d)])
        subset, c, val, solves, exhaustive = uniform_sigma(dictionary.evaluate(grid), f(grid), v, cap)
        return SigmaResult(val, to_one_based(subset), "grid-estimate" if exhaustive else "upper-bound-greedy",
                           norm, c, len(grid), {"conic_solves": solves})
    if q is None:
        q = dictionary.quadrature(function_degree(f, dictionary.max_degree))
    if norm == "mu_xi":
        if points is None:
            raise ParameterError("the mu_xi norm needs the sample points")
        pts = points.points if isinstance(points, PointSet) else as_points(points, dictionary.measure.d)
        q = mixture_measure(q, pts)
    sw = np.sqrt(q.weights)
    design = sw[:, None] * dictionary.evaluate(q.nodes)
    target = sw * f(q.nodes)
    if norm == "l2" and dictionary.orthonormal:
        # orthonormal system: keep the v largest coefficients
        coef = design.conj().T @ target
        keep = np.sort(np.argsort(-np.abs(coef), kind="stable")[:v])
        val = float(np.linalg.norm(target - design[:, keep] @ coef[keep]))
        return SigmaResult(val, to_one_based(keep), "exact-threshold", norm, coef[keep])
    try:
        s = best_subset_projection(design, target, v, cap=cap)
        return SigmaResult(s.residual, to_one_based(s.indices), "exact-exhaustive", norm, s.coefficients,
                           info={"subsets_examined": s.examined})
    except CapExceededError:
        chosen = sorted(greedy_selection(design, target, v)) or [0]
        c, _ = batched_lstsq(design[:, chosen][None], target[None])
        val = float(np.linalg.norm(target - design[:, chosen] @ c[0]))
        return SigmaResult(val, to_one_based(chosen), "upper-bound-greedy", norm, c[0],
                           info={"subsets_total": subset_count(dictionary.size, v)})


# --- greedy constructions --------------------------------------------------------

def _measure_for(dictionary: Dictionary, inner: str, q: Quadrature | None, points, degree: int) -> Quadrature:
    if q is None:
        q = dictionary.quadrature(degree)
    if inner == "l2":
        return q
    if inner == "mu_xi":
        if points is None:
            raise ParameterError("the mu_xi inner product needs the sample points")
        pts = points.points if isinstance(points, PointSet) else as_points(points, dictionary.measure.d)
        return mixture_measure(q, pts)
    raise ParameterError("inner must be 'l2' or 'mu_xi'")


def oga_approximate(f: Callable, dictionary: Dictionary, v: int, inner: str = "l2",
                    q: Quadrature | None = None, points=None) -> SparseApproximant:
    """Orthogonal greedy algorithm in ``L_2(mu)`` or ``L_2(mu_xi)``.

    Each step picks the element with the largest normalised correlation with
    the residual and re-projects ``f`` onto everything picked so far.  The
    residual after each step is kept in ``info["history"]`` (entry 0 is
    ``||f||``).  With elements of norm at most one and ``f`` in the unit
    ``A_1`` ball the final residual is at most ``v^(-1/2)``.
    """
    meas = _measure_for(dictionary, inner, q, points, function_degree(f, dictionary.max_degree))
    sw = np.sqrt(meas.weights)
    design = sw[:, None] * dictionary.evaluate(meas.nodes)
    target = sw * f(meas.nodes)
    history: list[float] = []
    chosen = greedy_selection(design, target, v, history=history)
    if chosen:
        c, rank = batched_lstsq(design[:, chosen][None], target[None])
        c = c[0]
    else:
        c = np.zeros(0, dtype=design.dtype)
    res = float(np.linalg.norm(target - design[:, chosen] @ c)) if chosen else float(np.linalg.norm(target))
    out = SparseApproximant(chosen, c, "oga", certified=False, heuristic=False,
                            info={"inner": inner, "history": history, "order": to_one_based(chosen)})
    if inner == "l2":
        out.residual_l2 = res
    else:
        out.residual_mu_xi = res
    return out


def a1r_budget(coefficients, r: float) -> float:
    """``sum_j |c_j| j^r`` with 1-based ``j``."""
    c = np.abs(np.asarray(coefficients)).reshape(-1)
    return float(np.sum(c * np.arange(1, len(c) + 1, dtype=float) ** r))


def bp1_approximant(coefficients, r: float, v: int, dictionary: Dictionary, points,
                    q: Quadrature | None = None) -> SparseApproximant:
    """At most ``2v`` terms: the first ``v`` coefficients kept, plus ``v`` greedy steps on the rest.

    The greedy part runs in ``L_2(mu_xi)`` on the tail ``sum_{j>v} c_j phi_j``
    over the whole dictionary, and ``residual_mu_xi`` is the tail's greedy
    residual, which is the error of the combined approximant.
    """
    c = np.asarray(coefficients).reshape(-1)
    N = dictionary.size
    if len(c) != N:
        raise ParameterError("need one coefficient per dictionary element")
    if not 1 <= v <= N:
        raise ParameterError("need 1 <= v <= N")
    budget = a1r_budget(c, r)
    if budget > 1.0 + 1e-12:
        raise ParameterError(f"coefficient budget {budget} exceeds 1")
    head = np.zeros_like(c)
    head[:v] = c[:v]
    tail = c - head
    total = head.astype(np.result_type(c, complex if dictionary.is_complex else float))
    if np.any(tail != 0):
        greedy = oga_approximate(lambda x: dictionary.evaluate(x) @ tail, dictionary, v, "mu_xi", q, points)
        total[greedy.indices] += greedy.coefficients
        err, steps = greedy.residual_mu_xi, len(greedy.indices)
    else:
        err, steps = 0.0, 0
    keep = np.flatnonzero(total != 0)
    return SparseApproximant(keep, total[keep], "oga", residual_mu_xi=err, certified=False,
                             info={"construction": "head-plus-greedy-tail", "head_terms": v,
                                   "greedy_steps": steps, "budget": budget, "r": r})


# --- block budget schedules --------------------------------------------------------

def kappa0(alpha: float, r: float, theta: float) -> int:
    """Smallest integer ``>= (r + 1/theta - 1/2) / (r - alpha - 1/2) + 1``."""
    if not r > alpha + 0.5:
        raise ParameterError("need r > alpha + 1/2")
    val = (r + 1.0 / theta - 0.5) / (r - alpha - 0.5) + 1.0
    return int(math.ceil(val - 1e-12))


def gegenbauer_schedule(m: int, k0: int) -> dict[int, int]:
    """``n_k = floor((k - m + 2)^(-2) 2^(m-2))`` for ``m-1 <= k <= k0 m``."""
    if m < 2:
        raise ParameterError("the schedule needs m >= 2")
    sched = {k: (2 ** (m - 2)) // ((k - m + 2) ** 2) for k in range(m - 1, k0 * m + 1)}
    assert sum(sched.values()) <= 2 ** (m - 1), "block schedule exceeds 2^(m-1) terms"
    return sched


def wab_schedule(block_sizes: Sequence[int], v: int, kappa: float = 2.0 / 3.0) -> tuple[list[int], int]:
    """Term budgets per dyadic level for the mixed-smoothness classes.

    Levels are taken whole while their total stays within ``v/2``; the
    threshold ``mstar`` is the last such level.  The remaining budget ``R`` is
    spread over later levels as ``floor(R (1 - 2^-kappa) 2^(-kappa (j - mstar - 1)))``,
    a geometric profile whose total never exceeds ``R``.
    """
    sizes = [int(s) for s in block_sizes]
    budgets = [0] * len(sizes)
    used, mstar = 0, -1
    for j, s in enumerate(sizes):
        if used + s > v / 2:
            break
        budgets[j] = s
        used += s
        mstar = j
    rest = v - used
    share = 1.0 - 2.0 ** (-kappa)
    for j in range(mstar + 1, len(sizes)):
        budgets[j] = min(sizes[j], int(math.floor(rest * share * 2.0 ** (-kappa * (j - mstar - 1)))))
    assert sum(budgets) <= v, "level budgets exceed v"
    return budgets, mstar


def keep_largest(coefficients: np.ndarray, block: np.ndarray, count: int) -> np.ndarray:
    """Indices of the ``count`` largest-magnitude coefficients in ``block`` (ties to smaller index)."""
    block = np.asarray(block, dtype=np.int64)
    if count <= 0 or len(block) == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.argsort(-np.abs(coefficients[block]), kind="stable")
    return np.sort(block[order[:count]])


def block_budget_approximate(coefficients, blocks: Sequence[np.ndarray], budgets: Sequence[int],
                             v: int | None = None, schedule: str = "custom") -> SparseApproximant:
    """Keep the ``budgets[k]`` largest coefficients within each block ``blocks[k]``.

    Coefficients outside every block are dropped.  For an orthonormal system
    ``residual_l2`` is the exact error (the dropped coefficients' norm).
    """
    c = np.asarray(coefficients).reshape(-1)
    if v is not None and sum(budgets) > v:
        raise AssertionError("block budgets exceed v")
    kept = [keep_largest(c, b, n) for b, n in zip(blocks, budgets)]
    keep = np.unique(np.concatenate(kept)) if kept else np.zeros(0, dtype=np.int64)
    dropped = np.ones(len(c), dtype=bool)
    dropped[keep] = False
    return SparseApproximant(keep, c[keep], "block-budget", residual_l2=float(np.linalg.norm(c[dropped])),
                             certified=False, info={"schedule": schedule, "budgets": list(map(int, budgets))})


def dyadic_degree_blocks(k_lo: int, k_hi: int, N: int) -> dict[int, np.ndarray]:
    """Degree ranges ``[2^(k-1), 2^k)`` clipped to ``[0, N)``."""
    out = {}
    for k in range(k_lo, k_hi + 1):
        lo, hi = 2 ** (k - 1), min(2 ** k, N)
        out[k] = np.arange(lo, hi, dtype=np.int64) if lo < N else np.zeros(0, dtype=np.int64)
    return out


@dataclass
class BlockConstruction:
    """An ``n``-term approximant built from the dyadic block schedule, with its grid error."""

    approximant: SparseApproximant
    grid_error: float
    m: int
    k0: int
    schedule: dict
    lambda1_size: int


def gegenbauer_block_construction(coefficients, dictionary: Dictionary, n: int, alpha: float, r: float, theta: float,
                                  grid: np.ndarray, refine: bool = True) -> BlockConstruction:
    """``n``-term approximant of a Gegenbauer expansion following the dyadic block schedule.

    With ``2^m <= n < 2^(m+1)``: keep the ``2^(m-2)`` coefficients largest by
    ``|c_j|(1+j)^r`` together with all degrees below ``2^(m-2)``; for each
    level ``k`` in ``[m-1, k0 m]`` spend ``floor(n_k/2)`` terms on the largest
    coefficients of the block ``[2^(k-1), 2^k)`` and ``floor(n_k/2)`` more on
    a correction of the block remainder chosen by matching pursuit on
    ``grid`` and fitted in the grid maximum norm (``refine=False`` skips the
    correction).  Levels past ``k0 m`` are dropped.
    """
    c = np.real(np.asarray(coefficients)).reshape(-1)
    N = len(c)
    if N != dictionary.size:
        raise ParameterError("need one coefficient per dictionary element")
    if n < 4:
        raise ParameterError("the block construction needs n >= 4")
    m = int(math.floor(math.log2(n)))
    k0 = kappa0(alpha, r, theta)
    sched = gegenbauer_schedule(m, k0)
    j = np.arange(N)
    score = np.abs(c) * (1.0 + j) ** r
    lam0 = np.argsort(-score, kind="stable")[: 2 ** (m - 2)]
    lam1 = np.union1d(lam0, np.arange(min(2 ** (m - 2), N)))
    total = np.zeros(N)
    total[lam1] = c[lam1]
    f1 = c.copy()
    f1[lam1] = 0.0
    phi = dictionary.evaluate(grid)
    blocks = dyadic_degree_blocks(m - 1, k0 * m, N)
    for k, nk in sched.items():
        blk = blocks[k]
        if len(blk) == 0 or nk == 0:
            continue
        half = nk // 2
        p1 = keep_largest(f1, blk, half)
        total[p1] += f1[p1]
        if refine and half > 0:
            rem = np.zeros(N)
            rem[blk] = f1[blk]
            rem[p1] = 0.0
            cols = np.arange(min(N, 2 ** (k + 2)))
            target = phi @ rem
            chosen = greedy_selection(phi[:, cols], target, half)
            if chosen:
                cc, _ = minimax_fit(phi[:, cols[chosen]], target)
                total[cols[chosen]] += cc
    keep = np.flatnonzero(total != 0)
    err = float(np.max(np.abs(phi @ (c - total))))
    approx = SparseApproximant(keep, total[keep], "block-budget", residual_grid=err, grid_size=len(grid),
                               certified=False, heuristic=refine,
                               info={"schedule": "gegenbauer", "m": m, "kappa0": k0})
    assert len(keep) <= n, "block construction used more than n terms"
    return BlockConstruction(approx, err, m, k0, {int(a): int(b) for a, b in sched.items()}, len(lam1))


def greedy_minimax(coefficients, dictionary: Dictionary, n: int, grid: np.ndarray) -> SparseApproximant:
    """``n`` terms by matching pursuit on the grid, then refitted in the grid maximum norm."""
    c = np.asarray(coefficients).reshape(-1)
    phi = dictionary.evaluate(grid)
    target = phi @ c
    chosen = sorted(greedy_selection(phi, target, n))
    if not chosen:
        return SparseApproximant([], [], "sparse-ls-greedy", residual_grid=0.0, grid_size=len(grid))
    cc, err = minimax_fit(phi[:, chosen], target)
    return SparseApproximant(chosen, cc, "sparse-ls-greedy", residual_grid=err, grid_size=len(grid),
                             certified=False, heuristic=True)


# --- Kashin-type brute force ----------------------------------------------------------

@dataclass
class KashinResult:
    """Largest best-``n``-term ``L_2`` error found over the vertices of the coefficient box."""

    value: float
    vertex: np.ndarray
    subset: tuple[int, ...]
    vertices_examined: int
    subsets_per_vertex: int
    exact: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "vertex": self.vertex.tolist(), "subset": list(self.subset),
                "vertices_examined": self.vertices_examined, "subsets_per_vertex": self.subsets_per_vertex,
                "exact": self.exact}


def _sign_vertices(N: int) -> np.ndarray:
    # a and -a give the same distance, so the first sign is fixed to +1
    if N == 0:
        return np.zeros((1, 0))
    bits = (np.arange(2 ** (N - 1))[:, None] >> np.arange(N - 2, -1, -1)[None, :]) & 1
    return np.hstack([np.ones((2 ** (N - 1), 1)), 1.0 - 2.0 * bits])


def kashin_oracle_sigma(system: np.ndarray, dictionary: np.ndarray, weights: np.ndarray, n: int,
                        cap: int = DEFAULT_CAP, max_system: int = 14) -> KashinResult:
    """Brute-force ``max`` over box vertices ``a`` of ``min`` over ``n``-subsets ``J`` of
    ``||sum_j a_j psi_j - P_J(sum_j a_j psi_j)||``.

    ``system`` and ``dictionary`` hold function values on the nodes of a
    discrete measure with ``weights``.  The vertex maximum is a lower bound
    for the supremum over the whole box; ``exact`` is set when the system is
    the first columns of the dictionary and both are orthonormal, where the
    bound is attained.
    """
    Nsys = system.shape[1]
    K = dictionary.shape[1]
    if Nsys > max_system:
        raise SizeError(f"system size {Nsys} exceeds {max_system}")
    if not 0 <= n <= K:
        raise ParameterError("need 0 <= n <= dictionary size")
    nsub = subset_count(K, n) if n else 1
    if 2 ** max(Nsys - 1, 0) * nsub > cap:
        raise SizeError(f"{2 ** max(Nsys - 1, 0)} vertices x {nsub} subsets exceeds the cap {cap}")
    sw = np.sqrt(np.asarray(weights, dtype=float))
    S = sw[:, None] * system
    D = sw[:, None] * dictionary
    verts = _sign_vertices(Nsys)
    F = S @ verts.T
    energy = np.sum(np.abs(F) ** 2, axis=0)
    best_res = energy.copy()
    best_sub = np.full(len(verts), -1, dtype=np.int64)
    subsets = []
    if n > 0:
        offset = 0
        for chunk in iter_subset_chunks(K, n, cap):
            A = np.transpose(D[:, chunk], (1, 0, 2))
            u, s, _ = np.linalg.svd(A, full_matrices=False)
            keep = s > max(A.shape[1:]) * np.finfo(float).eps * np.maximum(s[:, :1], 1e-300)
            u = u * keep[:, None, :]
            proj = np.einsum("bnk,nv->bkv", u.conj(), F)
            res = energy[None, :] - np.sum(np.abs(proj) ** 2, axis=1)
            k = np.argmin(res, axis=0)
            val = res[k, np.arange(len(verts))]
            better = val < best_res - TIE_TOL * np.maximum(1.0, best_res)
            best_res = np.where(better, val, best_res)
            best_sub = np.where(better, offset + k, best_sub)
            subsets.append(chunk)
            offset += len(chunk)
        subsets = np.vstack(subsets)
    dist = np.sqrt(np.maximum(best_res, 0.0))
    top = int(np.flatnonzero(dist >= dist.max() - TIE_TOL * max(1.0, dist.max()))[0])
    sub = to_one_based(subsets[best_sub[top]]) if n > 0 and best_sub[top] >= 0 else ()
    gram_s = S.conj().T @ S
    exact = (np.allclose(S, D[:, :Nsys], atol=1e-12)
             and np.allclose(D.conj().T @ D, np.eye(K), atol=1e-10)
             and np.allclose(gram_s, np.eye(Nsys), atol=1e-10))
    return KashinResult(float(dist[top]), verts[top], sub, len(verts), nsub, bool(exact))
