"""One- and two-sided universal discretization over all ``v``-term subspaces
of a dictionary, and randomized search for point sets that achieve it."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import MeasureSpec, as_points, build_quadrature, check_in_domain, sample_points
from .dictionaries import Dictionary, GegenbauerParams, chebyshev_weight, gegenbauer_dictionary
from .errors import CapExceededError, DomainError, ParameterError
from .subsets import DEFAULT_CAP, iter_subset_chunks, random_subsets, to_one_based


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray
    weights: np.ndarray | None = None
    provenance: str = "user"
    seed: int | None = None
    measure: MeasureSpec = field(default_factory=MeasureSpec)

    def __post_init__(self):
        pts = as_points(self.points, self.measure.d)
        if len(pts) < 1:
            raise ParameterError("a point set needs at least one point")
        w = np.full(len(pts), 1.0 / len(pts)) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (len(pts),):
            raise ParameterError("one weight per point is required")
        if np.any(w <= 0):
            raise ParameterError("weights must be positive")
        check_in_domain(self.measure, pts)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def uniform_weights(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self.m, rtol=0, atol=1e-15))

    def to_dict(self) -> dict:
        return {"m": self.m, "provenance": self.provenance, "seed": self.seed,
                "measure": self.measure.to_dict(), "points": self.points.tolist(),
                "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "PointSet":
        return cls(np.asarray(data["points"], dtype=float),
                   None if data.get("weights") is None else np.asarray(data["weights"], dtype=float),
                   data.get("provenance", "user"), data.get("seed"),
                   MeasureSpec.from_dict(data.get("measure", {})))


def equispaced_points(measure: MeasureSpec, m: int) -> PointSet:
    """``m`` equispaced torus points (``m`` must be a ``d``-th power)."""
    if measure.domain != "torus":
        raise ParameterError("equispaced points are defined on the torus")
    r = round(m ** (1.0 / measure.d))
    if r ** measure.d != m:
        raise ParameterError(f"{m} is not a {measure.d}-th power")
    return PointSet(build_quadrature(measure, r).nodes, None, "equispaced", None, measure)


def random_points(measure: MeasureSpec, m: int, rng: np.random.Generator, seed=None,
                  weights=None) -> PointSet:
    prov = "random-Chebyshev" if measure.density == "chebyshev" else "random-from-mu"
    return PointSet(sample_points(measure, m, rng), weights, prov, seed, measure)


@dataclass
class DiscretizationReport:
    v: int
    m: int
    N: int
    C1: float
    C2: float | None
    worst_subset: tuple
    certified: bool
    seed: int | None = None
    side: str = "one-sided"
    mode: str = "exhaustive"
    subsets_examined: int = 0
    worst_subset_upper: tuple | None = None
    mean_lambda_min: float = float("nan")
    mean_lambda_max: float = float("nan")
    weights: str = "uniform"
    provenance: str | None = None
    target_C1: float | None = None
    target_met: bool | None = None
    attempts: int | None = None
    extremes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["worst_subset"] = list(self.worst_subset)
        if self.worst_subset_upper is not None:
            out["worst_subset_upper"] = list(self.worst_subset_upper)
        return out


def sampled_gram(dictionary: Dictionary, ps: PointSet) -> np.ndarray:
    """``H[i, j] = sum_nu w_nu phi_i(xi_nu) conj(phi_j(xi_nu))``."""
    phi = dictionary.evaluate(ps.points)
    h = (phi * ps.weights[:, None]).T @ phi.conj()
    return 0.5 * (h + h.conj().T)


def _subset_extremes(H: np.ndarray, G: np.ndarray, subsets: np.ndarray, identity: bool):
    ix = subsets[:, :, None], subsets[:, None, :]
    hj = H[ix]
    if not identity:
        L = np.linalg.cholesky(G[ix])
        y = np.linalg.solve(L, hj)
        hj = np.linalg.solve(L, np.conj(np.swapaxes(y, -1, -2)))
        hj = 0.5 * (hj + np.conj(np.swapaxes(hj, -1, -2)))
    lam = np.linalg.eigvalsh(hj)
    lo, hi = lam[:, 0], lam[:, -1]
    # numerically singular subsets have C1 = 0 exactly
    lo = np.where(lo <= 1e-11 * np.maximum(hi, 1.0), 0.0, lo)
    return lo, hi


def verify_universal_discretization(dictionary: Dictionary, ps: PointSet, v: int,
                                    side: str = "one-sided", gram: np.ndarray | None = None,
                                    cap: int = DEFAULT_CAP, audit: int | None = None,
                                    rng: np.random.Generator | None = None, seed: int | None = None,
                                    keep_extremes: int = 0) -> DiscretizationReport:
    """Extreme ratios ``sum_nu w_nu |f(xi_nu)|^2 / ||f||_2^2`` over ``f`` in every
    ``v``-term subspace, via generalized eigenvalues of (sampled Gram, exact Gram).

    Above ``cap`` subsets the call raises unless ``audit`` gives a number of
    random subsets to inspect; audit reports are never certified.
    """
    if side not in ("one-sided", "two-sided"):
        raise ParameterError("side must be 'one-sided' or 'two-sided'")
    N = dictionary.size
    if not 1 <= v <= N:
        raise ParameterError(f"need 1 <= v <= N, got v={v}, N={N}")
    G = dictionary.gram() if gram is None else np.asarray(gram)
    identity = bool(np.allclose(G, np.eye(N), atol=1e-13, rtol=0))
    H = sampled_gram(dictionary, ps)

    if math.comb(N, v) <= cap:
        chunks, mode = iter_subset_chunks(N, v, cap), "exhaustive"
    elif audit:
        rng = rng if rng is not None else np.random.default_rng(seed)
        chunks, mode = [random_subsets(N, v, audit, rng)], "audit"
    else:
        raise CapExceededError(f"C({N},{v}) exceeds cap {cap}; pass audit=<count> for a non-certified estimate")

    best_lo, best_lo_sub = math.inf, None
    best_hi, best_hi_sub = -math.inf, None
    sum_lo = sum_hi = 0.0
    count = 0
    extremes = []
    for sub in chunks:
        lo, hi = _subset_extremes(H, G, sub, identity)
        i = int(np.argmin(lo))
        if lo[i] < best_lo:
            best_lo, best_lo_sub = float(lo[i]), sub[i]
        k = int(np.argmax(hi))
        if hi[k] > best_hi:
            best_hi, best_hi_sub = float(hi[k]), sub[k]
        sum_lo += float(lo.sum())
        sum_hi += float(hi.sum())
        count += len(sub)
        if len(extremes) < keep_extremes:
            for row, a, b in zip(sub[: keep_extremes - len(extremes)], lo, hi):
                extremes.append([list(to_one_based(row)), float(a), float(b)])
    if ps.m < v:
        best_lo = 0.0
    return DiscretizationReport(
        v=v, m=ps.m, N=N, C1=best_lo, C2=best_hi if side == "two-sided" else None,
        worst_subset=to_one_based(best_lo_sub), certified=(mode == "exhaustive"),
        seed=ps.seed if seed is None else seed, side=side, mode=mode, subsets_examined=count,
        worst_subset_upper=to_one_based(best_hi_sub) if side == "two-sided" else None,
        mean_lambda_min=sum_lo / count, mean_lambda_max=sum_hi / count,
        weights="uniform" if ps.uniform_weights else "custom", provenance=ps.provenance,
        extremes=extremes)


def gegenbauer_weighted_points(params: GegenbauerParams, points) -> PointSet:
    """Points in ``(-1, 1)`` carrying the weights ``w_alpha(xi_j) / m``."""
    pts = as_points(points, 1)
    if np.any(np.abs(pts[:, 0]) >= 1.0):
        raise DomainError("weighted Gegenbauer discretization needs points in (-1, 1)")
    w = chebyshev_weight(params.alpha, pts[:, 0]) / len(pts)
    return PointSet(pts, w, "random-Chebyshev", None, MeasureSpec("interval", "gegenbauer", params.alpha))


def verify_weighted_gegenbauer_discretization(params: GegenbauerParams, points, v: int,
                                              side: str = "two-sided", **kwargs) -> DiscretizationReport:
    """Discretization of ``L_2(mu_alpha)`` on ``Sigma_v(B_alpha^N)`` by the weighted
    sample norm ``(1/m) sum_j w_alpha(xi_j) |f(xi_j)|^2``."""
    pts = points.points if isinstance(points, PointSet) else points
    ps = gegenbauer_weighted_points(params, pts)
    if isinstance(points, PointSet):
        ps = PointSet(ps.points, ps.weights, points.provenance, points.seed, ps.measure)
    return verify_universal_discretization(gegenbauer_dictionary(params), ps, v, side=side, **kwargs)


def _draw(measure: MeasureSpec, m: int, rng, seed, weighting):
    ps = random_points(measure, m, rng, seed)
    if weighting is not None:
        wps = gegenbauer_weighted_points(weighting, ps.points)
        return PointSet(wps.points, wps.weights, ps.provenance, seed, wps.measure)
    return ps


def find_universal_points(dictionary: Dictionary, v: int, target_C1: float, m: int,
                          seed: int = 0, max_attempts: int = 20, side: str = "one-sided",
                          sampling: str = "random", weighting: GegenbauerParams | None = None,
                          cap: int = DEFAULT_CAP) -> tuple[PointSet, DiscretizationReport]:
    """Draw ``m`` i.i.d. points until the set certifies ``C1 >= target_C1``.

    Points come from the dictionary's measure (the Chebyshev measure for the
    weighted Gegenbauer system).  With ``weighting`` set, points come from the
    Chebyshev measure and carry ``w_alpha`` weights for the unweighted system.
    On exhaustion the best draw is returned with ``target_met = False``.
    """
    if not 0 < target_C1:
        raise ParameterError("target_C1 must be positive")
    if sampling == "equispaced":
        ps = equispaced_points(dictionary.measure, m)
        rep = verify_universal_discretization(dictionary, ps, v, side=side, cap=cap)
        rep.target_C1, rep.target_met, rep.attempts = target_C1, rep.C1 >= target_C1, 1
        return ps, rep
    rng = np.random.default_rng(seed)
    measure = MeasureSpec("interval", "chebyshev") if weighting is not None else dictionary.measure
    best = None
    for attempt in range(1, max_attempts + 1):
        ps = _draw(measure, m, rng, seed, weighting)
        rep = verify_universal_discretization(dictionary, ps, v, side=side, cap=cap, seed=seed)
        rep.attempts = attempt
        if best is None or rep.C1 > best[1].C1:
            best = (ps, rep)
        if rep.C1 >= target_C1:
            break
    ps, rep = best
    rep.target_C1, rep.target_met = target_C1, rep.C1 >= target_C1
    return ps, rep


def _infeasible(dictionary: Dictionary, target: float) -> bool:
    # trace bound: lambda_min <= tr(H_J)/v <= B^2 * sum(w) = B^2 for an orthonormal system
    return dictionary.orthonormal and dictionary.bound is not None and target > dictionary.bound ** 2


def estimate_m_required(dictionary: Dictionary, v: int, C1: float, seed: int = 0, trials: int = 3,
                        max_attempts: int = 1, m_cap: int = 4096, m_start: int | None = None,
                        weighting: GegenbauerParams | None = None) -> float:
    """Empirical upper estimate of ``m(X_v(D_N), C1)``.

    Doubling then bisection over ``m``; an ``m`` counts as sufficient when a
    majority of ``trials`` independent searches succeed.  Returns ``math.inf``
    past ``m_cap`` or when ``C1`` is provably out of reach.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if _infeasible(dictionary, C1):
        return math.inf

    def ok(m):
        wins = 0
        for t in range(trials):
            s = int(np.random.SeedSequence([seed, m, t]).generate_state(1)[0])
            _, rep = find_universal_points(dictionary, v, C1, m, seed=s, max_attempts=max_attempts,
                                           weighting=weighting)
            wins += bool(rep.target_met)
        return wins * 2 > trials

    m = max(1, m_start or v)
    lo = m - 1 if m > 1 else 0
    while not ok(m):
        lo = m
        m *= 2
        if m > m_cap:
            return math.inf
    hi = m
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
