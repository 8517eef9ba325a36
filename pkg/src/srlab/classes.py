"""Coefficient samplers and membership tests for the sparse-approximation classes."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dictionaries import Dictionary, dyadic_level
from .errors import ParameterError, SizeError

KINDS = ("A1r", "WabA", "GegWiener")
MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True)
class ClassSpec:
    """Parameters of a function class.

    ``A1r``: ``sum_j |c_j| j^r <= 1`` (1-based ``j``).  ``WabA``: the Wiener
    norm of the level-``j`` part is at most ``2^(-a j) max(j,1)^((d-1) b)``.
    ``GegWiener``: ``sum_j ((1+j)^r |c_j|)^theta <= 1`` over degrees ``j``.

    ``support_size`` limits the number of nonzero coefficients drawn by
    :func:`sample_class` (``None``: random size for ``A1r``, full support
    otherwise).  ``profile`` tilts the random budget shares of ``GegWiener``
    samples by ``(1+j)^(-profile)``; ``1`` gives every dyadic degree block the
    same expected share.
    """

    kind: str
    r: float = 0.0
    a: float = 1.0
    b: float = 0.0
    d: int = 1
    max_level: int | None = None
    alpha: float = 0.0
    theta: float = 1.0
    support_size: int | None = None
    profile: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"class kind must be one of {KINDS}")
        if self.r < 0:
            raise ParameterError("r must be >= 0")
        if self.kind == "WabA" and self.a <= 0:
            raise ParameterError("a must be > 0")
        if self.kind == "GegWiener":
            if not 0 < self.theta <= 1:
                raise ParameterError("theta must lie in (0, 1]")
            if not self.r > self.alpha + 0.5:
                raise ParameterError("need r > alpha + 1/2")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ClassSpec":
        return cls(**data)


def wab_levels(dictionary: Dictionary) -> np.ndarray:
    """``|s|_1`` of the dyadic block containing each frequency of a trigonometric dictionary."""
    freqs = np.asarray(dictionary.labels, dtype=np.int64)
    if freqs.ndim != 2:
        raise ParameterError("level structure needs a trigonometric dictionary")
    return dyadic_level(freqs).sum(axis=1)


def wab_level_bound(spec: ClassSpec, level) -> np.ndarray:
    j = np.asarray(level, dtype=float)
    return 2.0 ** (-spec.a * j) * np.maximum(j, 1.0) ** ((spec.d - 1) * spec.b)


def _support(rng: np.random.Generator, N: int, size: int | None, default_full: bool) -> np.ndarray:
    if size is None:
        size = N if default_full else int(rng.integers(1, N + 1))
    if not 1 <= size <= N:
        raise ParameterError(f"support size must lie in [1, {N}]")
    return np.sort(rng.choice(N, size=size, replace=False))


def sample_class(spec: ClassSpec, dictionary: Dictionary, rng: np.random.Generator) -> np.ndarray:
    """Random coefficients (in dictionary order) whose defining budget equals 1 exactly.

    Budget shares are Dirichlet distributed over the support and signs are
    random, so samples lie on the boundary of the class.
    """
    N = dictionary.size

    def signs_fn(n):
        return rng.choice(np.array([-1.0, 1.0]), size=n)

    c = np.zeros(N)
    if spec.kind == "A1r":
        supp = _support(rng, N, spec.support_size, default_full=False)
        share = rng.dirichlet(np.ones(len(supp)))
        c[supp] = signs_fn(len(supp)) * share / (supp + 1.0) ** spec.r
        return c
    if spec.kind == "GegWiener":
        supp = _support(rng, N, spec.support_size, default_full=True)
        deg = np.asarray(dictionary.degrees, dtype=float)[supp]
        share = rng.dirichlet(np.ones(len(supp))) * (1.0 + deg) ** (-spec.profile)
        share /= share.sum()
        c[supp] = signs_fn(len(supp)) * share ** (1.0 / spec.theta) / (1.0 + deg) ** spec.r
        return c
    levels = wab_levels(dictionary)
    top = int(levels.max()) if spec.max_level is None else spec.max_level
    for j in range(top + 1):
        idx = np.flatnonzero(levels == j)
        if len(idx) == 0:
            continue
        share = rng.dirichlet(np.ones(len(idx)))
        c[idx] = signs_fn(len(idx)) * share * wab_level_bound(spec, j)
    return c


@dataclass
class Membership:
    member: bool
    budget: float
    details: dict = field(default_factory=dict)


def class_budget(coefficients, spec: ClassSpec, dictionary: Dictionary | None = None) -> tuple[float, dict]:
    """The quantity that must be at most 1 for membership, and per-level details for ``WabA``."""
    c = np.abs(np.asarray(coefficients)).reshape(-1)
    if spec.kind == "A1r":
        return float(np.sum(c * np.arange(1, len(c) + 1, dtype=float) ** spec.r)), {}
    if spec.kind == "GegWiener":
        deg = np.arange(len(c), dtype=float) if dictionary is None else np.asarray(dictionary.degrees, float)
        return float(np.sum(((1.0 + deg) ** spec.r * c) ** spec.theta)), {}
    if dictionary is None:
        raise ParameterError("WabA membership needs the trigonometric dictionary")
    levels = wab_levels(dictionary)
    ratios = {}
    for j in np.unique(levels):
        ratios[int(j)] = float(np.sum(c[levels == j]) / wab_level_bound(spec, j))
    return max(ratios.values(), default=0.0), {"level_ratios": ratios}


def class_membership_check(coefficients, spec: ClassSpec, dictionary: Dictionary | None = None) -> Membership:
    """Recompute the defining budget; members have budget at most ``1 + 1e-12``."""
    budget, details = class_budget(coefficients, spec, dictionary)
    return Membership(budget <= 1.0 + MEMBERSHIP_TOL, budget, details)


# --- extremal block class ----------------------------------------------------------

@dataclass
class WitnessClass:
    """Vertices ``scale * sum_{2^m1 <= j < 2^(m1+1)} a_j L_j`` with ``a_j = +-1``.

    ``vertices`` holds coefficient rows over degrees ``0..N-1``; when the
    full vertex set exceeds the cap only a random subset (all-ones first) is
    kept and ``complete`` is false.
    """

    m_level: int
    m0: int
    m1: int
    scale: float
    degrees: tuple[int, int]
    vertices: np.ndarray
    complete: bool
    total_vertices: int

    def to_dict(self) -> dict:
        return {"m_level": self.m_level, "m0": self.m0, "m1": self.m1, "scale": self.scale,
                "degrees": list(self.degrees), "vertex_count": len(self.vertices),
                "complete": self.complete, "total_vertices": self.total_vertices}


def witness_scale(m1: int, r: float, theta: float) -> float:
    return 2.0 ** (-(m1 + 1) * (r + 1.0 / theta))


def thm83_witness_class(alpha: float, r: float, theta: float, m_level: int, m0: int = 3, N: int | None = None,
                        max_vertices: int = 4096, rng: np.random.Generator | None = None) -> WitnessClass:
    """Box vertices on the degree block ``[2^m1, 2^(m1+1))`` with ``m1 = m_level + m0``."""
    if m_level < 1:
        raise ParameterError("m_level must be >= 1")
    ClassSpec("GegWiener", r=r, alpha=alpha, theta=theta)
    m1 = m_level + m0
    lo, hi = 2 ** m1, 2 ** (m1 + 1)
    N = hi if N is None else N
    if hi > N:
        raise SizeError(f"block [{lo}, {hi}) exceeds the {N} available degrees")
    width = hi - lo
    scale = witness_scale(m1, r, theta)
    total = 2 ** width if width < 64 else math.inf
    rng = np.random.default_rng(0) if rng is None else rng
    if total <= max_vertices:
        bits = (np.arange(int(total))[:, None] >> np.arange(width - 1, -1, -1)[None, :]) & 1
        signs = 1.0 - 2.0 * bits
        complete = True
    else:
        signs = rng.choice(np.array([-1.0, 1.0]), size=(max_vertices, width))
        signs[0] = 1.0
        complete = False
    verts = np.zeros((len(signs), N))
    verts[:, lo:hi] = scale * signs
    return WitnessClass(m_level, m0, m1, scale, (lo, hi), verts, complete,
                        int(total) if math.isfinite(total) else -1)
