"""Measures, quadrature rules and the norms used throughout the package.

Points are always stored as float arrays of shape ``(m, d)``.  On the torus
the coordinates live in ``[0, 2*pi)``; on the interval ``d == 1`` and the
single coordinate lives in ``[-1, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ParameterError

DOMAINS = ("torus", "interval")
DENSITIES = ("uniform", "gegenbauer", "chebyshev")


@dataclass(frozen=True)
class MeasureSpec:
    """A probability measure on the torus ``T^d`` or on ``[-1, 1]``.

    ``density="gegenbauer"`` is ``c_alpha (1 - x^2)^alpha dx`` and requires
    ``alpha > -1/2``; ``density="chebyshev"`` is ``pi^-1 (1 - x^2)^(-1/2) dx``.
    The uniform density on the interval is normalised to the Gegenbauer
    density with ``alpha = 0``.
    """

    domain: str = "torus"
    density: str = "uniform"
    alpha: float = 0.0
    d: int = 1

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ParameterError(f"unknown domain {self.domain!r}")
        if self.density not in DENSITIES:
            raise ParameterError(f"unknown density {self.density!r}")
        if self.d < 1:
            raise ParameterError("dimension must be >= 1")
        if self.domain == "torus":
            if self.density != "uniform":
                raise ParameterError("only the uniform measure is supported on the torus")
            return
        if self.d != 1:
            raise ParameterError("the interval domain is one-dimensional")
        if self.density == "uniform":
            object.__setattr__(self, "density", "gegenbauer")
            object.__setattr__(self, "alpha", 0.0)
        elif self.density == "chebyshev":
            object.__setattr__(self, "alpha", -0.5)
        elif not self.alpha > -0.5:
            raise ParameterError(f"Gegenbauer exponent must exceed -1/2, got {self.alpha}")

    @property
    def jacobi_exponent(self) -> float:
        """Exponent ``a`` of the interval weight ``(1 - x^2)^a``."""
        return float(self.alpha)

    def to_dict(self) -> dict:
        return {"domain": self.domain, "density": self.density,
                "alpha": float(self.alpha), "d": int(self.d)}

    @classmethod
    def from_dict(cls, data: dict) -> "MeasureSpec":
        return cls(domain=data.get("domain", "torus"), density=data.get("density", "uniform"),
                   alpha=float(data.get("alpha", 0.0)), d=int(data.get("d", 1)))


TORUS = MeasureSpec()


def gegenbauer_normalizer(alpha: float) -> float:
    """``c_alpha`` such that ``c_alpha * (1 - x^2)^alpha`` integrates to 1 on [-1, 1]."""
    return math.exp(gammaln(alpha + 1.5) - gammaln(alpha + 1.0) - 0.5 * math.log(math.pi))


def gegenbauer_recurrence(alpha: float, n: int) -> np.ndarray:
    """Off-diagonal Jacobi-matrix entries ``b_1..b_n`` for the weight ``(1-x^2)^alpha``.

    The orthonormal polynomials satisfy ``x p_k = b_{k+1} p_{k+1} + b_k p_{k-1}``;
    the diagonal vanishes by symmetry.
    """
    k = np.arange(1, n + 1, dtype=float)
    b2 = k * (k + 2 * alpha) / ((2 * k + 2 * alpha + 1) * (2 * k + 2 * alpha - 1))
    if n >= 1:
        # removable singularity at alpha = -1/2
        b2[0] = 1.0 / (2 * alpha + 3)
    return np.sqrt(b2)


def as_points(x, d: int | None = None) -> np.ndarray:
    """Coerce scalars, 1-d arrays or ``(m, d)`` arrays into an ``(m, d)`` float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if (d is None or d == 1) else arr.reshape(1, -1)
    if d is not None and arr.shape[1] != d:
        raise ParameterError(f"expected points of dimension {d}, got {arr.shape[1]}")
    return arr


@dataclass(frozen=True, eq=False)
class Quadrature:
    """A discrete measure ``sum_i weights[i] * delta(nodes[i])``.

    ``degree`` is the trigonometric (per coordinate) or algebraic degree up to
    which the rule is exact; ``None`` for rules without a polynomial exactness
    guarantee (sample measures, mixtures, evaluation grids).
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: int | None = None
    measure: MeasureSpec = field(default_factory=MeasureSpec)
    kind: str = "quadrature"

    def __post_init__(self):
        nodes = as_points(self.nodes, self.measure.d)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(weights) != len(nodes):
            raise ParameterError("nodes and weights differ in length")
        if np.any(weights <= 0):
            raise ParameterError("quadrature weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)

    def integrate(self, values) -> complex | float:
        return np.sum(self.weights * np.asarray(values))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "measure": self.measure.to_dict(),
            "degree": self.degree,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Quadrature":
        return cls(nodes=np.asarray(data["nodes"], dtype=float),
                   weights=np.asarray(data["weights"], dtype=float),
                   degree=data.get("degree"),
                   measure=MeasureSpec.from_dict(data.get("measure", {})),
                   kind=data.get("kind", "quadrature"))


def _gauss_jacobi_symmetric(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Golub-Welsch on the symmetric Jacobi matrix; the measure has unit mass
    b = gegenbauer_recurrence(alpha, n - 1)
    jac = np.diag(b, 1) + np.diag(b, -1)
    nodes, vecs = np.linalg.eigh(jac)
    weights = vecs[0, :] ** 2
    # symmetrise to remove rounding asymmetry
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights / weights.sum()


def build_quadrature(measure: MeasureSpec, resolution: int) -> Quadrature:
    """Quadrature rule for ``measure``.

    Torus: the equispaced tensor grid with ``resolution`` nodes per coordinate,
    exact for trigonometric polynomials of degree ``resolution - 1`` in each
    coordinate.  Interval: the ``resolution``-point Gauss rule for the weight
    ``(1 - x^2)^alpha``, exact up to algebraic degree ``2 * resolution - 1``.
    """
    if resolution < 1:
        raise ParameterError("resolution must be >= 1")
    if measure.domain == "torus":
        axis = 2.0 * np.pi * np.arange(resolution) / resolution
        grids = np.meshgrid(*([axis] * measure.d), indexing="ij")
        nodes = np.stack([g.reshape(-1) for g in grids], axis=1)
        weights = np.full(len(nodes), 1.0 / len(nodes))
        return Quadrature(nodes, weights, resolution - 1, measure, "torus-equispaced")
    if measure.density == "chebyshev":
        k = np.arange(1, resolution + 1)
        nodes = np.sort(np.cos((2 * k - 1) * np.pi / (2 * resolution)))
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = np.full(resolution, 1.0 / resolution)
        return Quadrature(nodes, weights, 2 * resolution - 1, measure, "gauss-chebyshev")
    if not measure.alpha > -0.5:
        raise ParameterError("Gegenbauer exponent must exceed -1/2")
    nodes, weights = _gauss_jacobi_symmetric(measure.alpha, resolution)
    return Quadrature(nodes, weights, 2 * resolution - 1, measure, "gauss-gegenbauer")


def quadrature_for_degree(measure: MeasureSpec, max_degree: int) -> Quadrature:
    """Rule exact for products of two functions of degree ``max_degree``."""
    return build_quadrature(measure, 2 * int(max_degree) + 1)


def sample_points(measure: MeasureSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``m`` i.i.d. points from ``measure``."""
    if measure.domain == "torus":
        return rng.uniform(0.0, 2.0 * np.pi, size=(m, measure.d))
    a = measure.alpha + 1.0
    return (2.0 * rng.beta(a, a, size=m) - 1.0).reshape(-1, 1)


def evaluation_grid(measure: MeasureSpec, size: int) -> np.ndarray:
    """Dense grid on which uniform norms are approximated.

    On the interval the grid is Chebyshev-Lobatto (it contains both endpoints);
    on ``T^d`` it is the equispaced tensor grid with ``ceil(size^(1/d))``
    points per coordinate.
    """
    if measure.domain == "torus":
        per_axis = max(1, math.ceil(size ** (1.0 / measure.d) - 1e-9))
        return build_quadrature(measure, per_axis).nodes
    size = max(size, 2)
    x = np.cos(np.pi * np.arange(size) / (size - 1))[::-1]
    x = 0.5 * (x - x[::-1])
    return x.reshape(-1, 1)


def check_in_domain(measure: MeasureSpec, points: np.ndarray, open_interval: bool = False):
    if measure.domain == "interval":
        x = points[:, 0]
        bad = (np.abs(x) >= 1.0) if open_interval else (np.abs(x) > 1.0 + 1e-14)
        if np.any(bad):
            raise DomainError("points must lie in " + ("(-1, 1)" if open_interval else "[-1, 1]"))


# --- norms -----------------------------------------------------------------

def norm_lp(values, q: Quadrature, p: float = 2.0) -> float:
    """``L_p`` norm of a function given by its values on the nodes of ``q``."""
    if p < 1:
        raise ParameterError("p must be >= 1")
    absval = np.abs(np.asarray(values)).reshape(-1)
    if len(absval) != len(q):
        raise ParameterError("values are not aligned with the quadrature nodes")
    if math.isinf(p):
        return float(absval.max(initial=0.0))
    return float(np.sum(q.weights * absval ** p) ** (1.0 / p))


def norm_l2_mu_xi(f_on_quadrature, q: Quadrature, f_at_points) -> float:
    """Norm in ``L_2(mu_xi)`` with ``mu_xi = mu/2 + (1/2m) sum_j delta(xi_j)``."""
    s = np.abs(np.asarray(f_at_points)).reshape(-1)
    if len(s) < 1:
        raise ParameterError("the sample vector must be nonempty")
    cont = norm_lp(f_on_quadrature, q, 2.0)
    return float(math.sqrt(0.5 * cont ** 2 + 0.5 * np.mean(s ** 2)))


def sample_norm_weighted(s, w, p: float = 2.0) -> float:
    """Weighted sample norm ``(sum_nu w_nu |s_nu|^p)^(1/p)``."""
    s = np.abs(np.asarray(s)).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    if len(s) != len(w):
        raise ParameterError("sample and weight vectors differ in length")
    if np.any(w <= 0):
        raise ParameterError("weights must be positive")
    if p < 1:
        raise ParameterError("p must be >= 1")
    if math.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.sum(w * s ** p) ** (1.0 / p))


def mixture_measure(q: Quadrature, points, weights=None) -> Quadrature:
    """Discrete form of ``mu_{w,xi} = mu/2 + (1/(2|w|_1)) sum_j w_j delta(xi_j)``.

    With ``weights=None`` this is ``mu_xi``.  Inner products in this measure are
    exact whenever ``q`` is exact for the functions involved.
    """
    pts = as_points(points, q.measure.d)
    w = np.full(len(pts), 1.0) if weights is None else np.asarray(weights, dtype=float)
    if len(pts) == 0:
        return q
    nodes = np.vstack([q.nodes, pts])
    mix = np.concatenate([0.5 * q.weights, 0.5 * w / w.sum()])
    return Quadrature(nodes, mix, None, q.measure, "mixture")


def sample_measure(points, weights=None, measure: MeasureSpec = TORUS) -> Quadrature:
    """The (weighted) empirical measure on ``points``; weights default to ``1/m``."""
    pts = as_points(points, measure.d)
    w = np.full(len(pts), 1.0 / len(pts)) if weights is None else np.asarray(weights, dtype=float)
    return Quadrature(pts, w, None, measure, "samples")


def grid_measure(measure: MeasureSpec, size: int) -> Quadrature:
    """Uniform weights on :func:`evaluation_grid` (used for uniform-norm estimates)."""
    pts = evaluation_grid(measure, size)
    return Quadrature(pts, np.full(len(pts), 1.0 / len(pts)), None, measure, "grid")
