"""Finite dictionaries: trigonometric systems on hyperbolic-cross index sets,
orthonormal Gegenbauer polynomials, the uniformly bounded weighted Gegenbauer
system, and explicit systems tabulated on a grid.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .analysis import (MeasureSpec, Quadrature, TORUS, as_points, build_quadrature,
                       check_in_domain, evaluation_grid, gegenbauer_normalizer,
                       gegenbauer_recurrence, quadrature_for_degree)
from .errors import DomainError, ParameterError, SizeError

FREQUENCY_KINDS = ("hyperbolic_cross", "step_hyperbolic_cross", "dyadic_block", "centered", "explicit")
DEFAULT_SET_CAP = 200_000


# --- frequency sets ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrequencySet:
    indices: np.ndarray  # (n, d) integers
    kind: str
    params: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.indices)

    @property
    def d(self) -> int:
        return self.indices.shape[1]

    def as_tuples(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.indices]


def _block_axis(s: int) -> list[int]:
    lo = (2 ** (s - 1)) if s >= 1 else 0  # [2^{s-1}] = 0 for s = 0
    hi = 2 ** s
    return [k for k in range(-hi + 1, hi) if lo <= abs(k)]


def dyadic_level(k) -> np.ndarray:
    """Per-coordinate dyadic index ``s_j`` with ``k_j in rho(s)``."""
    k = np.abs(np.asarray(k, dtype=np.int64))
    out = np.zeros_like(k)
    nz = k > 0
    out[nz] = np.floor(np.log2(k[nz])).astype(np.int64) + 1
    return out


def _cross_indices(N: int, d: int, cap: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def rec(prefix, budget):
        if len(prefix) == d:
            out.append(tuple(prefix))
            if len(out) > cap:
                raise SizeError(f"hyperbolic cross exceeds cap {cap}")
            return
        for k in range(-budget, budget + 1):
            rec(prefix + [k], budget // max(abs(k), 1))

    rec([], N)
    return out


def build_frequency_set(kind: str, d: int = 1, *, N: int | None = None, n: int | None = None,
                        s=None, indices=None, cap: int = DEFAULT_SET_CAP) -> FrequencySet:
    """Index sets on ``Z^d``.

    ``hyperbolic_cross``: ``Gamma(N) = {k : prod max(|k_j|, 1) <= N}``.
    ``step_hyperbolic_cross``: ``Q_n``, the union of ``rho(s)`` over ``|s|_1 <= n``.
    ``dyadic_block``: ``rho(s) = {k : [2^{s_j-1}] <= |k_j| < 2^{s_j}}``.
    ``centered`` (d = 1): the ``N`` integers ``-floor(N/2) .. ceil(N/2) - 1``,
    ordered by ``(|k|, k)`` so that low frequencies come first.
    ``explicit``: the given ``indices``.
    All other kinds are sorted lexicographically.
    """
    if d < 1:
        raise ParameterError("d must be >= 1")
    if kind == "hyperbolic_cross":
        if N is None or N < 0:
            raise ParameterError("hyperbolic_cross needs N >= 0")
        if N == 0:
            idx = []
        else:
            idx = _cross_indices(int(N), d, cap)
        params = {"N": int(N)}
    elif kind == "dyadic_block":
        s = (0,) * d if s is None else tuple(int(v) for v in np.atleast_1d(s))
        if len(s) != d or min(s) < 0:
            raise ParameterError("s must have d nonnegative entries")
        sizes = [len(_block_axis(v)) for v in s]
        if math.prod(sizes) > cap:
            raise SizeError(f"rho(s) exceeds cap {cap}")
        idx = list(itertools.product(*[_block_axis(v) for v in s]))
        params = {"s": list(s)}
    elif kind == "step_hyperbolic_cross":
        if n is None or n < 0:
            raise ParameterError("step_hyperbolic_cross needs n >= 0")
        idx = []
        for svec in itertools.product(range(n + 1), repeat=d):
            if sum(svec) <= n:
                idx.extend(itertools.product(*[_block_axis(v) for v in svec]))
                if len(idx) > cap:
                    raise SizeError(f"Q_n exceeds cap {cap}")
        params = {"n": int(n)}
    elif kind == "centered":
        if d != 1 or N is None or N < 1:
            raise ParameterError("centered sets are one-dimensional with N >= 1")
        ks = sorted(range(-(N // 2), N - N // 2), key=lambda k: (abs(k), k))
        arr = np.array(ks, dtype=np.int64).reshape(-1, 1)
        return FrequencySet(arr, kind, {"N": int(N)})
    elif kind == "explicit":
        arr = np.asarray(indices, dtype=np.int64).reshape(-1, d)
        return FrequencySet(arr, kind, {})
    else:
        raise ParameterError(f"unknown frequency set kind {kind!r}")
    arr = np.array(sorted(idx), dtype=np.int64).reshape(-1, d)
    return FrequencySet(arr, kind, params)


# --- dictionaries ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Dictionary:
    """``N`` evaluable functions with metadata.

    ``evaluator(points)`` returns the ``(m, N)`` matrix of element values.
    Elements are indexed ``0..N-1`` in code; reports use 1-based indices.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    size: int
    measure: MeasureSpec
    degrees: np.ndarray
    name: str = "dictionary"
    orthonormal: bool = False
    bound: float | None = None
    riesz_K: float | None = None
    exact_gram: np.ndarray | None = None
    labels: tuple = ()
    quadrature_builder: Callable[[int], Quadrature] | None = None
    info: dict = field(default_factory=dict)

    def __len__(self):
        return self.size

    @property
    def is_complex(self) -> bool:
        return self.measure.domain == "torus"

    @property
    def max_degree(self) -> int:
        return int(np.max(self.degrees)) if self.size else 0

    def evaluate(self, points, indices=None) -> np.ndarray:
        pts = as_points(points, self.measure.d)
        vals = self.evaluator(pts)
        return vals if indices is None else vals[:, np.asarray(indices, dtype=int)]

    def quadrature(self, extra_degree: int = 0) -> Quadrature:
        """Rule exact for products of elements (and functions up to ``extra_degree``)."""
        deg = max(self.max_degree, int(extra_degree))
        if self.quadrature_builder is not None:
            return self.quadrature_builder(deg)
        return quadrature_for_degree(self.measure, deg)

    def gram(self, q: Quadrature | None = None) -> np.ndarray:
        if q is None and self.exact_gram is not None:
            return self.exact_gram
        return dictionary_gram(self, q if q is not None else self.quadrature())

    def describe(self) -> dict:
        return {"name": self.name, "N": self.size, "measure": self.measure.to_dict(),
                "orthonormal": self.orthonormal, "bound": self.bound, "riesz_K": self.riesz_K,
                **self.info}


def dictionary_gram(dictionary: Dictionary, q: Quadrature) -> np.ndarray:
    """``G[i, j] = <phi_i, phi_j>`` computed by the quadrature ``q``."""
    deg = q.degree
    if dictionary.quadrature_builder is None and deg is not None:
        needed = 2 * dictionary.max_degree
        if deg < needed:
            warnings.warn(f"quadrature degree {deg} is below the {needed} needed for exact Gram entries",
                          RuntimeWarning, stacklevel=2)
    phi = dictionary.evaluate(q.nodes)
    g = (phi * q.weights[:, None]).T @ phi.conj()
    return 0.5 * (g + g.conj().T)


def trig_dictionary(freqs: FrequencySet) -> Dictionary:
    """The exponentials ``e^{i(k, x)}`` for ``k`` in ``freqs``."""
    if len(freqs) == 0:
        raise ParameterError("frequency set is empty")
    k = np.asarray(freqs.indices, dtype=float)
    d = freqs.d

    def evaluator(points):
        return np.exp(1j * (points @ k.T))

    return Dictionary(
        evaluator=evaluator, size=len(freqs), measure=MeasureSpec("torus", "uniform", 0.0, d),
        degrees=np.max(np.abs(freqs.indices), axis=1), name=f"trig[{freqs.kind}]",
        orthonormal=True, bound=1.0, riesz_K=1.0, exact_gram=np.eye(len(freqs)),
        labels=tuple(freqs.as_tuples()), info={"frequencies": freqs.as_tuples()},
    )


def trig_centered(N: int) -> Dictionary:
    """One-dimensional trigonometric dictionary with ``N`` centred frequencies."""
    return trig_dictionary(build_frequency_set("centered", 1, N=N))


@dataclass(frozen=True)
class GegenbauerParams:
    alpha: float
    N: int  # maximal degree; the system has N + 1 elements

    def __post_init__(self):
        if not self.alpha > -0.5:
            raise ParameterError("Gegenbauer exponent must exceed -1/2")
        if self.N < 0:
            raise ParameterError("maximal degree must be >= 0")


def gegenbauer_matrix(alpha: float, N: int, x) -> np.ndarray:
    """Values ``L_n^alpha(x)`` for ``n = 0..N``, shape ``(len(x), N + 1)``.

    Orthonormal with respect to the probability measure ``mu_alpha``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise DomainError("Gegenbauer polynomials are evaluated on [-1, 1]")
    b = gegenbauer_recurrence(alpha, N + 1)
    out = np.empty((len(x), N + 1))
    out[:, 0] = 1.0
    if N >= 1:
        out[:, 1] = x / b[0]
    for n in range(1, N):
        out[:, n + 1] = (x * out[:, n] - b[n - 1] * out[:, n - 1]) / b[n]
    return out


def gegenbauer_eval(params: GegenbauerParams, n: int, x):
    """``L_n^alpha(x)`` by the three-term recurrence."""
    if not 0 <= n <= params.N:
        raise ParameterError("degree outside 0..N")
    scalar = np.ndim(x) == 0
    vals = gegenbauer_matrix(params.alpha, n, x)[:, n]
    return float(vals[0]) if scalar else vals


def _weight_exponent(alpha: float) -> float:
    return alpha / 2.0 + 0.25


def weighted_gegenbauer_constant(alpha: float, N: int, grid_size: int = 4097) -> float:
    """``C(alpha) = max_n max_x |L_n^alpha(x)| (1 - x^2)^(alpha/2 + 1/4)`` over ``n <= N``.

    Found on a dense Chebyshev-Lobatto grid and polished by a bounded scalar
    search around the best grid point of every degree.
    """
    x = evaluation_grid(MeasureSpec("interval", "chebyshev"), max(grid_size, 64 * (N + 1)))[:, 0]
    e = _weight_exponent(alpha)
    vals = np.abs(gegenbauer_matrix(alpha, N, x)) * ((1.0 - x ** 2) ** e)[:, None]
    best = float(vals.max())
    for n in range(N + 1):
        i = int(np.argmax(vals[:, n]))
        lo, hi = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
        if hi <= lo:
            continue

        def neg(t, n=n):
            return -abs(gegenbauer_matrix(alpha, n, [t])[0, n]) * (1.0 - t * t) ** e

        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


def gegenbauer_dictionary(params: GegenbauerParams, weighted: bool = False) -> Dictionary:
    """The system ``B_alpha^N`` or its weighted, uniformly bounded version.

    Unweighted: ``L_0..L_N``, orthonormal in ``L_2(mu_alpha)``.  Weighted:
    ``phi_n(x) = C(alpha)^-1 L_n(x) (1 - x^2)^(alpha/2 + 1/4)``, orthogonal in
    ``L_2`` of the Chebyshev measure with ``|phi_n| <= 1``.
    """
    alpha, N = float(params.alpha), int(params.N)
    degrees = np.arange(N + 1)
    labels = tuple(range(N + 1))
    if not weighted:
        measure = MeasureSpec("interval", "gegenbauer", alpha)

        def evaluator(points):
            return gegenbauer_matrix(alpha, N, points[:, 0])

        return Dictionary(evaluator=evaluator, size=N + 1, measure=measure, degrees=degrees,
                          name=f"gegenbauer(alpha={alpha:g})", orthonormal=True, bound=None,
                          riesz_K=1.0, exact_gram=np.eye(N + 1), labels=labels,
                          info={"alpha": alpha, "max_degree": N, "weighted": False})

    c_alpha = weighted_gegenbauer_constant(alpha, N)
    e = _weight_exponent(alpha)
    norm2 = 1.0 / (c_alpha ** 2 * math.pi * gegenbauer_normalizer(alpha))

    def evaluator(points):
        x = points[:, 0]
        return gegenbauer_matrix(alpha, N, x) * (np.clip(1.0 - x ** 2, 0.0, None) ** e / c_alpha)[:, None]

    def quad_builder(deg):
        # products phi_i phi_j = poly * (1-x^2)^(alpha+1/2): Gauss rule for mu_alpha
        # transported to the Chebyshev measure
        base = build_quadrature(MeasureSpec("interval", "gegenbauer", alpha), 2 * deg + 1)
        x = base.nodes[:, 0]
        w = base.weights / (math.pi * gegenbauer_normalizer(alpha) * (1.0 - x ** 2) ** (alpha + 0.5))
        return Quadrature(base.nodes, w, base.degree, MeasureSpec("interval", "chebyshev"),
                          "gauss-gegenbauer-transported")

    return Dictionary(evaluator=evaluator, size=N + 1, measure=MeasureSpec("interval", "chebyshev"),
                      degrees=degrees, name=f"weighted-gegenbauer(alpha={alpha:g})", orthonormal=False,
                      bound=1.0, riesz_K=1.0 / norm2, exact_gram=norm2 * np.eye(N + 1), labels=labels,
                      quadrature_builder=quad_builder,
                      info={"alpha": alpha, "max_degree": N, "weighted": True, "C_alpha": c_alpha})


def chebyshev_weight(alpha: float, x) -> np.ndarray:
    """Sample weight ``w_alpha(x) = pi c_alpha (1 - x^2)^(alpha + 1/2)``.

    With points drawn from the Chebyshev measure,
    ``E[w_alpha(xi) |f(xi)|^2] = ||f||^2_{L_2(mu_alpha)}`` for every ``f``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    return math.pi * gegenbauer_normalizer(alpha) * np.clip(1.0 - x ** 2, 0.0, None) ** (alpha + 0.5)


def explicit_dictionary(grid: Quadrature, values, name: str = "explicit",
                        orthonormal: bool = False, bound: float | None = None) -> Dictionary:
    """A dictionary tabulated on the nodes of ``grid``; it can only be evaluated there."""
    vals = np.asarray(values)
    if vals.ndim != 2 or vals.shape[0] != len(grid):
        raise ParameterError("values must have one row per grid node")
    nodes = grid.nodes

    def evaluator(points):
        out = np.empty((len(points), vals.shape[1]), dtype=vals.dtype)
        for i, p in enumerate(points):
            dist = np.max(np.abs(nodes - p), axis=1)
            j = int(np.argmin(dist))
            if dist[j] > 1e-9:
                raise DomainError(f"point {p} is not a node of the tabulation grid")
            out[i] = vals[j]
        return out

    return Dictionary(evaluator=evaluator, size=vals.shape[1], measure=grid.measure,
                      degrees=np.zeros(vals.shape[1], dtype=int), name=name, orthonormal=orthonormal,
                      bound=bound, quadrature_builder=lambda _deg: grid,
                      info={"grid_size": len(grid)})


def load_dictionary(spec: dict) -> Dictionary:
    """Build a dictionary from a config mapping.

    ``{kind: trig, N: 16}`` (centred frequencies), ``{kind: trig, frequencies:
    {kind: hyperbolic_cross, N: 4, d: 2}}``, ``{kind: gegenbauer, alpha: 0, N: 12,
    weighted: false}`` or ``{kind: explicit, grid: <quadrature mapping>, values:
    [[...]], imag: [[...]]}``.
    """
    kind = spec.get("kind", "trig")
    if kind == "trig":
        if "frequencies" in spec:
            fs = dict(spec["frequencies"])
            fkind = fs.pop("kind")
            d = int(fs.pop("d", 1))
            return trig_dictionary(build_frequency_set(fkind, d, **fs))
        return trig_centered(int(spec["N"]))
    if kind == "gegenbauer":
        params = GegenbauerParams(float(spec.get("alpha", 0.0)), int(spec["N"]))
        return gegenbauer_dictionary(params, bool(spec.get("weighted", False)))
    if kind == "explicit":
        grid = Quadrature.from_dict(spec["grid"])
        vals = np.asarray(spec["values"], dtype=float)
        if "imag" in spec:
            vals = vals + 1j * np.asarray(spec["imag"], dtype=float)
        return explicit_dictionary(grid, vals, spec.get("name", "explicit"),
                                   bool(spec.get("orthonormal", False)), spec.get("bound"))
    raise ParameterError(f"unknown dictionary kind {kind!r}")


# --- functions represented by coefficients ------------------------------------

@dataclass(frozen=True, eq=False)
class Expansion:
    """``f = sum_j coefficients[j] * phi_{indices[j]}`` as a callable."""

    dictionary: Dictionary
    coefficients: np.ndarray
    indices: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.coefficients)
        idx = np.arange(self.dictionary.size) if self.indices is None else np.asarray(self.indices, dtype=int)
        if len(c) != len(idx):
            raise ParameterError("coefficient count does not match the index count")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "indices", idx)

    @property
    def degree(self) -> int:
        live = self.indices[np.asarray(self.coefficients) != 0]
        return int(np.max(self.dictionary.degrees[live])) if len(live) else 0

    def __call__(self, points) -> np.ndarray:
        return self.dictionary.evaluate(points, self.indices) @ self.coefficients

    def __add__(self, other: "Expansion") -> "Expansion":
        if other.dictionary is not self.dictionary:
            return SumFunction((self, other))
        full = np.zeros(self.dictionary.size, dtype=np.result_type(self.coefficients, other.coefficients))
        np.add.at(full, self.indices, self.coefficients)
        np.add.at(full, other.indices, other.coefficients)
        return Expansion(self.dictionary, full)

    def dense(self) -> np.ndarray:
        full = np.zeros(self.dictionary.size, dtype=complex if np.iscomplexobj(self.coefficients) else float)
        np.add.at(full, self.indices, self.coefficients)
        return full


@dataclass(frozen=True, eq=False)
class SumFunction:
    parts: tuple

    @property
    def degree(self) -> int:
        return max(getattr(p, "degree", 0) for p in self.parts)

    def __call__(self, points):
        return sum(p(points) for p in self.parts)

    def __add__(self, other):
        return SumFunction(self.parts + (other,))


def function_degree(f, default: int = 0) -> int:
    return int(getattr(f, "degree", default))
