"""Least-squares recovery from samples and its sparse (subset-selecting) variants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .analysis import Quadrature, as_points, evaluation_grid, mixture_measure, norm_lp
from .dictionaries import Dictionary, function_degree
from .discretization import PointSet
from .errors import CapExceededError, ParameterError
from .subsets import (DEFAULT_CAP, TIE_TOL, argmin_lex, batched_lstsq, iter_subset_chunks,
                      subset_count, to_one_based)

ALGORITHMS = ("ideal-projection", "sparse-ls-exhaustive", "sparse-ls-greedy", "oga", "block-budget",
              "least-squares")


def as_subset(subspace, N: int) -> np.ndarray:
    """Validate a 0-based index set: nonempty, distinct, within ``range(N)``; returned sorted."""
    idx = np.asarray(subspace, dtype=np.int64).reshape(-1)
    if idx.size == 0:
        raise ParameterError("the subspace must contain at least one dictionary element")
    if np.any(idx < 0) or np.any(idx >= N):
        raise ParameterError(f"subspace indices must lie in [0, {N})")
    if len(np.unique(idx)) != len(idx):
        raise ParameterError("subspace indices must be distinct")
    return np.sort(idx)


def _weights_for(points, weights) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(points, PointSet):
        pts = points.points
        w = points.weights if weights is None else np.asarray(weights, dtype=float)
    else:
        pts = np.asarray(points, dtype=float)
        w = None if weights is None else np.asarray(weights, dtype=float)
    if len(pts) < 1:
        raise ParameterError("need at least one sample point")
    if w is None:
        w = np.full(len(pts), 1.0 / len(pts))
    if len(w) != len(pts) or np.any(w <= 0):
        raise ParameterError("weights must be positive and aligned with the points")
    return pts, w


# --- single-subspace fits ------------------------------------------------------

@dataclass
class Fit:
    """Result of a sampled ``l_p`` fit on a fixed subspace.

    ``objective`` is the attained ``||S(f - u, xi)||_{p,w}``.
    """

    indices: np.ndarray
    coefficients: np.ndarray
    objective: float
    p: float = 2.0
    rank: int = 0
    degenerate: bool = False
    iterations: int = 0
    converged: bool = True


def _wls(design: np.ndarray, target: np.ndarray, w: np.ndarray):
    sw = np.sqrt(w)
    c, rank = batched_lstsq((sw[:, None] * design)[None], (sw * target)[None])
    return c[0], int(rank[0])


def weighted_least_squares_fit(f_samples, points, weights, subspace, dictionary: Dictionary) -> Fit:
    """Minimiser of ``sum_nu w_nu |f(xi_nu) - u(xi_nu)|^2`` over ``u`` in the span of ``subspace``.

    The weighted design matrix is factored by SVD; a rank-deficient design
    yields the minimum-norm coefficient vector and ``degenerate=True``.
    ``weights=None`` takes the point set's weights (``1/m`` by default), which is
    classical least squares.
    """
    pts, w = _weights_for(points, weights)
    idx = as_subset(subspace, dictionary.size)
    f = np.asarray(f_samples).reshape(-1)
    if len(f) != len(pts):
        raise ParameterError("sample vector length differs from the number of points")
    phi = dictionary.evaluate(pts, idx)
    c, rank = _wls(phi, f, w)
    obj = float(np.sqrt(np.sum(w * np.abs(f - phi @ c) ** 2)))
    return Fit(idx, c, obj, 2.0, rank, rank < len(idx))


def least_p_fit(f_samples, points, weights, subspace, dictionary: Dictionary, p: float,
                tol: float = 1e-8, max_iter: int = 1000) -> Fit:
    """Sampled ``l_p`` fit by iteratively reweighted least squares.

    ``p = 2`` returns :func:`weighted_least_squares_fit` unchanged.  For
    ``p < 2`` the weights ``(|r|^2 + eps^2)^((p-2)/2)`` are used with ``eps``
    shrinking whenever the iterates settle; for ``p > 2`` each step is damped
    by ``1/(p-1)``.  The best iterate seen is returned; ``converged=False`` if
    the iteration cap was hit first.
    """
    if not 1.0 <= p < math.inf:
        raise ParameterError("p must lie in [1, inf)")
    base = weighted_least_squares_fit(f_samples, points, weights, subspace, dictionary)
    if p == 2.0:
        return base
    pts, w = _weights_for(points, weights)
    f = np.asarray(f_samples).reshape(-1)
    phi = dictionary.evaluate(pts, base.indices)

    def objective(c):
        return float(np.sum(w * np.abs(f - phi @ c) ** p) ** (1.0 / p))

    c = base.coefficients
    best_c, best_obj = c, objective(c)
    scale = max(float(np.max(np.abs(f), initial=0.0)), 1.0)
    eps, eps_min = scale, 1e-12 * scale
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        r = np.abs(f - phi @ c)
        omega = w * (r ** 2 + eps ** 2) ** ((p - 2.0) / 2.0)
        c_new, _ = _wls(phi, f, omega)
        if p > 2.0:
            c_new = c + (c_new - c) / (p - 1.0)
        step = float(np.linalg.norm(c_new - c))
        c = c_new
        obj = objective(c)
        if obj < best_obj:
            best_c, best_obj = c, obj
        if step <= tol * (1.0 + float(np.linalg.norm(c))):
            if eps <= eps_min or best_obj == 0.0:
                converged = True
                break
            eps = max(eps * 0.1, eps_min)
    return Fit(base.indices, best_c, best_obj, p, base.rank, base.degenerate, it, converged)


# --- sparse approximants -------------------------------------------------------

@dataclass
class SparseApproximant:
    """A ``|J|``-term combination of dictionary elements and its residual norms.

    ``indices`` are 0-based and sorted; :attr:`subset` gives the 1-based form
    used in reports.  Residual norms are ``None`` until computed.
    """

    indices: np.ndarray
    coefficients: np.ndarray
    algorithm: str
    residual_l2: float | None = None
    residual_mu_xi: float | None = None
    residual_grid: float | None = None
    grid_size: int | None = None
    certified: bool = True
    heuristic: bool = False
    degenerate: bool = False
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        c = np.asarray(self.coefficients).reshape(-1)
        if len(idx) != len(c):
            raise ParameterError("coefficient count must equal the number of selected indices")
        order = np.argsort(idx, kind="stable")
        self.indices, self.coefficients = idx[order], c[order]

    @property
    def subset(self) -> tuple[int, ...]:
        return to_one_based(self.indices)

    def evaluate(self, dictionary: Dictionary, points) -> np.ndarray:
        if len(self.indices) == 0:
            return np.zeros(len(as_points(points, dictionary.measure.d)))
        return dictionary.evaluate(points, self.indices) @ self.coefficients

    def dense(self, N: int) -> np.ndarray:
        full = np.zeros(N, dtype=np.result_type(self.coefficients, float))
        full[self.indices] = self.coefficients
        return full

    def to_dict(self) -> dict:
        c = self.coefficients
        return {
            "algorithm": self.algorithm,
            "subset": list(self.subset),
            "coefficients_re": np.real(c).tolist(),
            "coefficients_im": np.imag(c).tolist(),
            "residual_l2": self.residual_l2,
            "residual_mu_xi": self.residual_mu_xi,
            "residual_grid": self.residual_grid,
            "grid_size": self.grid_size,
            "certified": self.certified,
            "heuristic": self.heuristic,
            "degenerate": self.degenerate,
            "info": self.info,
        }


def residual_norms(approx: SparseApproximant, dictionary: Dictionary, f: Callable, q: Quadrature,
                   points=None, grid_size: int | None = None) -> SparseApproximant:
    """Fill in the residual ``f - approx`` in ``L_2(mu)``, ``L_2(mu_xi)`` and on the grid."""
    r_q = f(q.nodes) - approx.evaluate(dictionary, q.nodes)
    out = {"residual_l2": norm_lp(r_q, q, 2.0)}
    if points is not None:
        pts = points.points if isinstance(points, PointSet) else as_points(points, dictionary.measure.d)
        mix = mixture_measure(q, pts)
        out["residual_mu_xi"] = norm_lp(f(mix.nodes) - approx.evaluate(dictionary, mix.nodes), mix, 2.0)
    if grid_size is not None:
        grid = evaluation_grid(dictionary.measure, grid_size)
        out["residual_grid"] = float(np.max(np.abs(f(grid) - approx.evaluate(dictionary, grid))))
        out["grid_size"] = len(grid)
    return replace(approx, **out)


# --- subset search kernels -------------------------------------------------------

@dataclass
class SubsetSearch:
    indices: np.ndarray
    coefficients: np.ndarray
    residual: float
    rank: int
    examined: int


def best_subset_projection(fit_design: np.ndarray, fit_target: np.ndarray, v: int,
                           score_design: np.ndarray | None = None,
                           score_target: np.ndarray | None = None,
                           cap: int = DEFAULT_CAP) -> SubsetSearch:
    """Exhaustive search over ``v``-column subsets.

    For each subset the coefficients are the least-squares fit of
    ``fit_target`` by the chosen columns of ``fit_design``; the subset is scored
    by ``||score_target - score_design[:, J] c||``.  Both designs are expected
    to carry square-root weights already.  When no score pair is given the fit
    residual is the score (orthogonal projection in one discrete measure).
    Ties within ``TIE_TOL`` keep the lexicographically first subset.
    """
    N = fit_design.shape[1]
    same = score_design is None
    if same:
        score_design, score_target = fit_design, fit_target
    best = None
    examined = 0
    for chunk in iter_subset_chunks(N, v, cap, what="subset search"):
        A = np.transpose(fit_design[:, chunk], (1, 0, 2))
        c, rank = batched_lstsq(A, fit_target)
        S = A if same else np.transpose(score_design[:, chunk], (1, 0, 2))
        res = np.linalg.norm(score_target[None, :] - np.einsum("bnv,bv->bn", S, c), axis=1)
        k = argmin_lex(res)
        examined += len(chunk)
        if best is None or res[k] < best.residual - TIE_TOL * max(1.0, best.residual):
            best = SubsetSearch(chunk[k].copy(), c[k].copy(), float(res[k]), int(rank[k]), examined)
    best.examined = examined
    return best


def greedy_selection(design: np.ndarray, target: np.ndarray, v: int,
                     history: list | None = None) -> list[int]:
    """Orthogonal matching pursuit on the columns of ``design`` (normalised correlations).

    Stops early once the target is reproduced; ties go to the smallest index.
    Residual norms (starting with ``||target||``) are appended to ``history``.
    """
    N = design.shape[1]
    norms = np.linalg.norm(design, axis=0)
    usable = norms > 1e-14 * max(float(norms.max(initial=0.0)), 1e-300)
    scale = max(float(np.linalg.norm(target)), 1e-300)
    chosen: list[int] = []
    r = target.copy()
    if history is not None:
        history.append(float(np.linalg.norm(r)))
    for _ in range(min(v, N)):
        if np.linalg.norm(r) <= 1e-13 * scale:
            break
        corr = np.where(usable, np.abs(design.conj().T @ r) / np.where(usable, norms, 1.0), -1.0)
        corr[chosen] = -1.0
        if corr.max() < 0:
            break
        top = corr.max()
        j = int(np.flatnonzero(corr >= top - TIE_TOL * max(top, 1.0))[0])
        chosen.append(j)
        c, _ = batched_lstsq(design[:, chosen][None], target[None])
        r = target - design[:, chosen] @ c[0]
        if history is not None:
            history.append(float(np.linalg.norm(r)))
    return chosen


# --- recovery operators ------------------------------------------------------------

def ideal_projection_recover(f_on_quadrature, dictionary: Dictionary, v: int, q: Quadrature,
                             cap: int = DEFAULT_CAP) -> SparseApproximant:
    """Best ``v``-term orthogonal projection of ``f`` in ``L_2(mu)``.

    Every ``v``-subset is tried with ``L_2(mu)`` inner products taken from the
    quadrature ``q``.  Above ``cap`` subsets, greedy selection is used and the
    result is flagged heuristic and not certified.
    """
    if not 1 <= v <= dictionary.size:
        raise ParameterError("need 1 <= v <= N")
    f = np.asarray(f_on_quadrature).reshape(-1)
    sw = np.sqrt(q.weights)
    design = sw[:, None] * dictionary.evaluate(q.nodes)
    target = sw * f
    try:
        s = best_subset_projection(design, target, v, cap=cap)
        return SparseApproximant(s.indices, s.coefficients, "ideal-projection", residual_l2=s.residual,
                                 degenerate=s.rank < v, info={"subsets_examined": s.examined})
    except CapExceededError:
        chosen = greedy_selection(design, target, v)
        c, rank = batched_lstsq(design[:, chosen][None], target[None])
        res = float(np.linalg.norm(target - design[:, chosen] @ c[0]))
        return SparseApproximant(chosen, c[0], "ideal-projection", residual_l2=res, certified=False,
                                 heuristic=True, info={"fallback": "greedy",
                                                       "subsets_total": subset_count(dictionary.size, v)})


def sparse_ls_recover(f_samples, f_on_quadrature, points, dictionary: Dictionary, v: int,
                      q: Quadrature, strategy: str = "exhaustive",
                      cap: int = DEFAULT_CAP) -> SparseApproximant:
    """Sparse least-squares recovery from samples.

    For each ``v``-subset the sampled least-squares fit is formed; the subset
    whose fit has the smallest ``L_2(mu)`` error (computed with the quadrature
    values of ``f``, which is information beyond the samples) is returned.
    ``strategy="greedy"`` instead selects by matching pursuit on the sample
    inner product and fits once; its result is flagged heuristic.
    """
    if not 1 <= v <= dictionary.size:
        raise ParameterError("need 1 <= v <= N")
    pts, w = _weights_for(points, None)
    fs = np.asarray(f_samples).reshape(-1)
    fq = np.asarray(f_on_quadrature).reshape(-1)
    sw = np.sqrt(w)
    fit_design = sw[:, None] * dictionary.evaluate(pts)
    fit_target = sw * fs
    sq = np.sqrt(q.weights)
    score_design = sq[:, None] * dictionary.evaluate(q.nodes)
    score_target = sq * fq
    info = {"uses_quadrature_values": True, "m": len(pts)}
    if strategy == "exhaustive":
        try:
            s = best_subset_projection(fit_design, fit_target, v, score_design, score_target, cap)
        except CapExceededError as exc:
            raise CapExceededError(f"{exc}; use strategy='greedy'") from exc
        chosen, heuristic = s.indices, False
        info["subsets_examined"] = s.examined
    elif strategy == "greedy":
        chosen, heuristic = greedy_selection(fit_design, fit_target, v), True
        if not chosen:
            chosen = [0]
    else:
        raise ParameterError(f"unknown strategy {strategy!r}")
    fit = weighted_least_squares_fit(fs, pts, w, chosen, dictionary)
    res = float(np.linalg.norm(score_target - score_design[:, fit.indices] @ fit.coefficients))
    mix = np.sqrt(0.5 * res ** 2 + 0.5 * fit.objective ** 2 / float(np.sum(w)))
    return SparseApproximant(fit.indices, fit.coefficients, f"sparse-ls-{strategy}", residual_l2=res,
                             residual_mu_xi=float(mix), certified=not heuristic, heuristic=heuristic,
                             degenerate=fit.degenerate, info=info)


def recover_function(f: Callable, points, dictionary: Dictionary, v: int, q: Quadrature | None = None,
                     strategy: str = "exhaustive", cap: int = DEFAULT_CAP) -> SparseApproximant:
    """:func:`sparse_ls_recover` for a callable ``f`` (samples and quadrature values taken from it)."""
    pts, _ = _weights_for(points, None)
    if q is None:
        q = dictionary.quadrature(function_degree(f, dictionary.max_degree))
    return sparse_ls_recover(f(pts), f(q.nodes), points, dictionary, v, q, strategy, cap)


# --- empirical recovery characteristic ---------------------------------------------

@dataclass
class RhoEstimate:
    """``min`` over candidate point sets of the ``max`` sparse-LS error over sampled functions.

    Only sampled functions enter the ``max``; the value is an empirical
    (finite-sample) lower estimate of the true supremum for each candidate.
    """

    value: float
    per_candidate: list[float]
    best_candidate: int
    sample_count: int
    strategy: str
    label: str = "empirical (finite sample)"

    def to_dict(self) -> dict:
        return {"value": self.value, "per_candidate": self.per_candidate,
                "best_candidate": self.best_candidate, "sample_count": self.sample_count,
                "strategy": self.strategy, "label": self.label}


def estimate_rho_ls(class_sampler: Callable[[np.random.Generator], Callable], dictionary: Dictionary,
                    v: int, candidates: Sequence[PointSet], sample_count: int,
                    rng: np.random.Generator | None = None, q: Quadrature | None = None,
                    strategy: str = "exhaustive") -> RhoEstimate:
    """Estimate the sparse least-squares recovery characteristic.

    Point sets with non-uniform weights give the weighted variant.  The same
    ``sample_count`` functions are used for every candidate.
    """
    if not candidates:
        raise ParameterError("need at least one candidate point set")
    rng = np.random.default_rng(0) if rng is None else rng
    functions = [class_sampler(rng) for _ in range(sample_count)]
    if q is None:
        deg = max([function_degree(f, dictionary.max_degree) for f in functions] + [dictionary.max_degree])
        q = dictionary.quadrature(deg)
    worst = []
    for ps in candidates:
        errs = [recover_function(f, ps, dictionary, v, q, strategy).residual_l2 for f in functions]
        worst.append(max(errs, default=0.0))
    k = int(np.argmin(worst))
    return RhoEstimate(float(worst[k]), [float(x) for x in worst], k, sample_count, strategy)
