"""Functions hidden from a sample set: vanishing subspaces, Lorentz vertices and
certified lower bounds for the worst-case L2 mass that m samples cannot see."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, null_space
from scipy.optimize import linprog, minimize

from .analysis import Quadrature, as_points, evaluation_grid, norm_lp
from .dictionaries import Dictionary
from .discretization import PointSet, sampled_gram
from .errors import ParameterError

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass
class NullspaceBasis:
    """Coefficients (columns) of an ``L_2(mu)``-orthonormal basis of the functions
    in the span of ``dictionary`` that vanish at ``points``."""

    dictionary: Dictionary
    coefficients: np.ndarray
    points: np.ndarray

    @property
    def dim(self) -> int:
        return self.coefficients.shape[1]

    def evaluate(self, x) -> np.ndarray:
        return self.dictionary.evaluate(x) @ self.coefficients


def _gram(dictionary: Dictionary, q: Quadrature | None) -> np.ndarray:
    return dictionary.gram(q) if q is not None else dictionary.gram()


def nullspace_basis(dictionary: Dictionary, points, q: Quadrature | None = None) -> NullspaceBasis:
    """Kernel of the sampling map on ``span(dictionary)``, orthonormalised in ``L_2(mu)``."""
    pts = points.points if isinstance(points, PointSet) else as_points(points, dictionary.measure.d)
    D = dictionary.size
    G = _gram(dictionary, q)
    if len(pts) == 0:
        K = np.eye(D, dtype=G.dtype)
    else:
        K = null_space(dictionary.evaluate(pts))
    if K.shape[1]:
        M = K.conj().T @ G @ K
        lam, U = eigh(0.5 * (M + M.conj().T))
        K = K @ U / np.sqrt(lam)[None, :]
    assert K.shape[1] >= D - len(pts), "kernel dimension below D - m"
    return NullspaceBasis(dictionary, K, pts)


# --- Lorentz vertices ------------------------------------------------------------

@dataclass
class LorentzResult:
    """``z = Y a`` with ``max|z_i| = 1``; ``count`` coordinates have modulus at least ``threshold``."""

    z: np.ndarray | None
    combination: np.ndarray | None
    count: int
    threshold: float
    success: bool
    attempts: int


def lorentz_vertex_search(Y: np.ndarray, n: int, rng: np.random.Generator | None = None,
                          max_attempts: int = 50) -> LorentzResult:
    """Point of the column span of ``Y`` with many coordinates of near-maximal modulus.

    A vertex of ``{a : |Re (Y a)_i| <= 1, |Im (Y a)_i| <= 1}`` (a vertex of
    ``{a : |(Y a)_i| <= 1}`` for real data) is found by the simplex method
    with a random objective.  At a vertex at least ``dim`` box constraints
    are active, so at least ``dim`` coordinates have modulus ``>= 1`` while
    none exceeds ``sqrt 2``; rescaling by the maximum modulus gives
    ``>= dim`` coordinates of modulus ``>= 1/sqrt 2`` (``= 1`` in the real
    case).  Every candidate is checked against that claim before it is
    returned.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    Y = np.asarray(Y)
    real = not np.iscomplexobj(Y) or np.allclose(np.imag(Y), 0.0)
    threshold = 1.0 if real else INV_SQRT2
    U, s, _ = np.linalg.svd(np.real(Y) if real else Y, full_matrices=False)
    B = U[:, s > max(Y.shape) * np.finfo(float).eps * max(float(s.max(initial=0.0)), 1e-300)]
    k = B.shape[1]
    if n > k:
        raise ParameterError(f"subspace dimension {k} is below n = {n}")
    if k == 0:
        return LorentzResult(None, None, 0, threshold, n == 0, 0)
    if real:
        E = B
    else:
        # real coordinates (Re a, Im a) -> stacked (Re z, Im z)
        E = np.vstack([np.hstack([B.real, -B.imag]), np.hstack([B.imag, B.real])])
    A_ub = np.vstack([E, -E])
    b_ub = np.ones(2 * E.shape[0])
    for attempt in range(1, max_attempts + 1):
        cost = rng.standard_normal(E.shape[1])
        res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * E.shape[1], method="highs-ds")
        if res.status != 0:
            continue
        a = res.x if real else res.x[:k] + 1j * res.x[k:]
        z = B @ a
        top = float(np.max(np.abs(z)))
        if top <= 0:
            continue
        z, a = z / top, a / top
        count = int(np.sum(np.abs(z) >= threshold - 1e-9))
        if count >= n and abs(np.max(np.abs(z)) - 1.0) <= 1e-12:
            comb = np.linalg.lstsq(Y, z, rcond=None)[0]
            return LorentzResult(z, comb, count, threshold, True, attempt)
    return LorentzResult(None, None, 0, threshold, False, max_attempts)


# --- condition D1 --------------------------------------------------------------

@dataclass
class D1Certificate:
    """Measured sandwich constants of sampled ``L_p`` and ``L_2`` norms on ``X_D``.

    ``lp_lower``/``lp_upper`` bound ``(1/M) sum |f(x_j)|^p / ||f||_p^p`` and
    ``l2_lower``/``l2_upper`` the same ratio for ``p = 2``.  For ``p = 2`` both
    pairs are exact generalised eigenvalues; otherwise the ``L_p`` pair is
    the extreme found by a seeded search and ``certified`` is false.
    """

    points: np.ndarray
    p: float
    lp_lower: float
    lp_upper: float
    l2_lower: float
    l2_upper: float
    passed: bool
    certified: bool
    restarts: int = 0
    nikolskii_K1: float | None = None
    info: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        return {"M": self.M, "p": self.p, "lp_lower": self.lp_lower, "lp_upper": self.lp_upper,
                "l2_lower": self.l2_lower, "l2_upper": self.l2_upper, "passed": self.passed,
                "certified": self.certified, "restarts": self.restarts,
                "nikolskii_K1": self.nikolskii_K1, "info": self.info}


def _in_band(lo: float, hi: float) -> bool:
    return lo >= 0.5 - 1e-12 and hi <= 1.5 + 1e-12


def _ratio_search(Phi_x: np.ndarray, Phi_q: np.ndarray, wq: np.ndarray, p: float, restarts: int,
                  rng: np.random.Generator) -> tuple[float, float]:
    M = Phi_x.shape[0]
    cplx = np.iscomplexobj(Phi_x) or np.iscomplexobj(Phi_q)
    D = Phi_x.shape[1]

    def unpack(x):
        return x[:D] + 1j * x[D:] if cplx else x

    def part(Phi, w, c):
        z = Phi @ c
        a = np.abs(z)
        val = float(np.sum(w * a ** p))
        h = Phi.conj().T @ (w * a ** (p - 2.0) * z) * p
        return val, h

    def ratio(x, sign):
        c = unpack(x)
        A, gA = part(Phi_x, np.full(M, 1.0 / M), c)
        B, gB = part(Phi_q, wq, c)
        R = A / B
        g = (gA * B - A * gB) / B ** 2
        grad = np.concatenate([g.real, g.imag]) if cplx else g.real
        return sign * R, sign * grad

    lo, hi = math.inf, -math.inf
    dim = 2 * D if cplx else D
    for _ in range(restarts):
        x0 = rng.standard_normal(dim)
        for sign in (1.0, -1.0):
            res = minimize(ratio, x0, args=(sign,), jac=True, method="L-BFGS-B")
            val = sign * float(res.fun)
            lo, hi = min(lo, val), max(hi, val)
    return lo, hi


def check_condition_D1(dictionary: Dictionary, points, p: float = 2.0, q: Quadrature | None = None,
                       restarts: int = 200, rng: np.random.Generator | None = None,
                       grid_size: int | None = None) -> D1Certificate:
    """Check the two-sided ``1/2``-``3/2`` sandwich for ``L_p`` and ``L_2`` on ``span(dictionary)``.

    The ``L_2`` pair comes from the generalised eigenvalues of the sampled
    and exact Gram matrices.  ``p = 2`` is therefore exact; for other ``p``
    the ``L_p`` pair is searched by L-BFGS from ``restarts`` seeded starting
    points, and a pass only means no violation was found.  ``||f||_p`` uses
    ``q`` (by default a rule exact for ``|f|^p`` when ``p`` is an even integer).
    """
    if p < 2:
        raise ParameterError("need p >= 2")
    pts = points.points if isinstance(points, PointSet) else as_points(points, dictionary.measure.d)
    ps = points if isinstance(points, PointSet) else PointSet(pts)
    D = dictionary.size
    G = dictionary.gram()
    if len(pts) < D:
        l2_lo = 0.0
        H = sampled_gram(dictionary, ps)
        l2_hi = float(eigh(H, G, eigvals_only=True)[-1])
    else:
        lam = eigh(sampled_gram(dictionary, ps), G, eigvals_only=True)
        l2_lo, l2_hi = float(lam[0]), float(lam[-1])
    if l2_lo <= 1e-11 * max(l2_hi, 1.0):
        l2_lo = 0.0
    grid = evaluation_grid(dictionary.measure, grid_size or 16 * D)
    Phi_g = dictionary.evaluate(grid)
    christoffel = np.real(np.einsum("gi,ij,gj->g", Phi_g, np.linalg.inv(G), Phi_g.conj()))
    K1 = float(christoffel.max()) / D
    if p == 2.0:
        lp_lo, lp_hi, certified, used = l2_lo, l2_hi, True, 0
    else:
        if q is None:
            deg = int(math.ceil(p / 2.0 * dictionary.max_degree))
            q = dictionary.quadrature(deg)
        rng = np.random.default_rng(0) if rng is None else rng
        lp_lo, lp_hi = _ratio_search(dictionary.evaluate(pts), dictionary.evaluate(q.nodes), q.weights,
                                     p, restarts, rng)
        if len(pts) < D:
            lp_lo = 0.0
        certified, used = False, restarts
    passed = _in_band(l2_lo, l2_hi) and _in_band(lp_lo, lp_hi)
    return D1Certificate(pts, p, lp_lo, lp_hi, l2_lo, l2_hi, passed, certified, used, K1,
                         {"nikolskii_p": 2.0, "grid_size": len(grid)})


# --- witnesses ------------------------------------------------------------------

@dataclass
class TauWitness:
    """``g`` in ``span(dictionary)`` vanishing on ``xi`` with ``||g||_p <= 1``.

    ``tau_lower = ||g||_2`` is a lower bound for the worst-case mass hidden
    from ``xi`` whenever ``valid``; ``certified`` additionally requires the
    discretization premise to be certified.
    """

    coefficients: np.ndarray | None
    tau_lower: float | None
    norm_p: float | None
    max_at_xi: float | None
    proof_bound: float
    theorem_bound: float
    valid: bool
    certified: bool
    reason: str = ""
    lorentz_count: int = 0
    nullspace_dim: int = 0

    def to_dict(self) -> dict:
        c = self.coefficients
        return {"tau_lower": self.tau_lower, "norm_p": self.norm_p, "max_at_xi": self.max_at_xi,
                "proof_bound": self.proof_bound, "theorem_bound": self.theorem_bound,
                "valid": self.valid, "certified": self.certified, "reason": self.reason,
                "lorentz_count": self.lorentz_count, "nullspace_dim": self.nullspace_dim,
                "coefficients_re": None if c is None else np.real(c).tolist(),
                "coefficients_im": None if c is None else np.imag(c).tolist()}


def tau_m_witness(dictionary: Dictionary, xi, p: float, cert: D1Certificate, q: Quadrature | None = None,
                  rng: np.random.Generator | None = None) -> TauWitness:
    """Witness for the hidden-mass lower bound built from a Lorentz vertex.

    The vanishing subspace ``V`` is sampled at the D1 points, a Lorentz
    vertex ``f_0`` of those samples is found and ``g = 2^(-1/p) f_0`` is
    returned after checking ``g(xi) = 0``, ``||g||_p <= 1`` and
    ``||g||_2^2 >= 2^(-2/p) (2/3) (D - m) / (3 M)``.
    """
    pts = xi.points if isinstance(xi, PointSet) else as_points(xi, dictionary.measure.d)
    D, m, M = dictionary.size, len(pts), cert.M
    proof_bound = math.sqrt(max(2.0 ** (-2.0 / p) * (2.0 / 3.0) * (D - m) / (3.0 * M), 0.0))
    theorem_bound = math.sqrt(max(D - m, 0) / M) / 3.0
    empty = dict(coefficients=None, tau_lower=None, norm_p=None, max_at_xi=None, proof_bound=proof_bound,
                 theorem_bound=theorem_bound, valid=False, certified=False)
    if not cert.passed:
        return TauWitness(**empty, reason="condition D1 not met")
    V = nullspace_basis(dictionary, pts, q)
    if V.dim == 0 or m >= D:
        return TauWitness(**empty, reason="sampling is injective on the subspace", nullspace_dim=V.dim)
    Y = dictionary.evaluate(cert.points) @ V.coefficients
    lor = lorentz_vertex_search(Y, min(V.dim, D - m), rng)
    if not lor.success:
        return TauWitness(**empty, reason="vertex search failed", nullspace_dim=V.dim)
    coef = 2.0 ** (-1.0 / p) * (V.coefficients @ lor.combination)
    if q is None:
        deg = int(math.ceil(max(p, 2.0) / 2.0 * dictionary.max_degree))
        q = dictionary.quadrature(deg)
    g_q = dictionary.evaluate(q.nodes) @ coef
    norm2 = norm_lp(g_q, q, 2.0)
    normp = norm_lp(g_q, q, p)
    at_xi = float(np.max(np.abs(dictionary.evaluate(pts) @ coef)))
    valid = at_xi <= 1e-10 and normp <= 1.0 + 1e-10 and norm2 >= proof_bound - 1e-12
    reason = "" if valid else "witness failed validation"
    return TauWitness(coef, norm2, normp, at_xi, proof_bound, theorem_bound, valid,
                      bool(valid and cert.certified), reason, lor.count, V.dim)
