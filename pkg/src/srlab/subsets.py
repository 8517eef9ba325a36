"""Subset enumeration and batched least-squares kernels shared by the
discretization, recovery and oracle modules."""

from __future__ import annotations

import itertools
import math
from typing import Iterator

import numpy as np

from .errors import CapExceededError, ParameterError

DEFAULT_CAP = 1_000_000
CHUNK = 2048
TIE_TOL = 1e-12


def subset_count(N: int, v: int) -> int:
    return math.comb(N, v)


def iter_subset_chunks(N: int, v: int, cap: int = DEFAULT_CAP, chunk: int = CHUNK,
                       what: str = "subset enumeration") -> Iterator[np.ndarray]:
    """All ``v``-subsets of ``range(N)`` in lexicographic order, in chunks of shape ``(B, v)``."""
    if not 1 <= v <= N:
        raise ParameterError(f"need 1 <= v <= N, got v={v}, N={N}")
    total = math.comb(N, v)
    if total > cap:
        raise CapExceededError(f"{what}: C({N},{v}) = {total} exceeds the cap {cap}")
    it = itertools.combinations(range(N), v)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def random_subsets(N: int, v: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` uniformly drawn ``v``-subsets (rows sorted, duplicates removed, lexicographic order)."""
    rows = np.sort(np.argsort(rng.random((count, N)), axis=1)[:, :v], axis=1)
    return np.unique(rows, axis=0)


def batched_lstsq(A: np.ndarray, b: np.ndarray, rcond: float | None = None):
    """Minimum-norm least-squares solutions for a stack of problems.

    ``A`` has shape ``(B, n, v)``; ``b`` has shape ``(n,)`` or ``(B, n)``.
    Returns ``(x, rank)`` with ``x`` of shape ``(B, v)``.
    """
    u, s, vh = np.linalg.svd(A, full_matrices=False)
    n, v = A.shape[-2:]
    if rcond is None:
        rcond = max(n, v) * np.finfo(float).eps
    smax = s[..., :1]
    keep = s > rcond * np.where(smax > 0, smax, 1.0)
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    if b.ndim == 1:
        ub = np.einsum("bnk,n->bk", u.conj(), b)
    else:
        ub = np.einsum("bnk,bn->bk", u.conj(), b)
    x = np.einsum("bkv,bk->bv", vh.conj(), inv * ub)
    return x, keep.sum(axis=-1)


def argmin_lex(values: np.ndarray, tol: float = TIE_TOL) -> int:
    """First index whose value is within ``tol`` (relative, floor 1) of the minimum.

    Candidates are assumed to be listed in lexicographic subset order, so this
    realises the lexicographic tie rule.
    """
    vmin = float(np.min(values))
    return int(np.flatnonzero(values <= vmin + tol * max(1.0, abs(vmin)))[0])


def to_one_based(subset) -> tuple[int, ...]:
    return tuple(int(j) + 1 for j in subset)


def from_one_based(subset) -> np.ndarray:
    arr = np.asarray(subset, dtype=np.int64) - 1
    if np.any(arr < 0):
        raise ParameterError("subset indices are 1-based")
    return arr
