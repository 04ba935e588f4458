"""Randomly pivoted Nystrom (RPNys) coreset selection.

Each round samples a pivot with probability proportional to the residual
kernel diagonal, then applies a rank-one update to the inverse of the coreset
kernel. Only ``n * (r + 1)`` kernel entries are ever evaluated.

Besides ``M = h(K_S, K_S)^{-1}`` we keep the triangular factor ``G`` with
``M = G^T G`` and the residual rows ``D = G R``. The weight matrix is then
``W = G^T D``, which equals ``M R`` algebraically but avoids the cancellation
that makes ``M R`` lose most of its digits once the coreset kernel becomes
ill-conditioned.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .dense import ContractError, KernelSpec, as_matrix, as_rng

# Residual entries at or below this fraction of the largest initial diagonal
# are treated as exhausted.
RESIDUAL_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class RpnysResult:
    coreset_indices: np.ndarray  # (r,) distinct ints, in selection order
    inverse_core: np.ndarray  # M, (r, r)
    kernel_rows: np.ndarray  # R, (r, n)
    final_residual_diag: np.ndarray  # p, (n,)
    factor: np.ndarray  # G, lower triangular (r, r)
    residual_rows: np.ndarray  # D = G R, (r, n)
    n_pivoted: int  # rounds that used the residual law (rest are fallback)
    kernel_evals: int
    residual_trace: np.ndarray = field(repr=False)  # sum(p) before each round, then final

    @functools.cached_property
    def weights(self) -> np.ndarray:
        """Nystrom weights ``W = M R``, shape (r, n)."""
        return self.factor.T @ self.residual_rows

    @property
    def rank(self) -> int:
        return len(self.coreset_indices)


def _sample_pivot(p: np.ndarray, u: float) -> int:
    cdf = np.cumsum(p)
    s = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    s = min(s, len(p) - 1)
    # rounding in the cumulative sum can land on a trailing zero entry
    while p[s] <= 0.0:
        s -= 1
    return s


def rpnys(K, spec: KernelSpec, r: int, seed=0) -> RpnysResult:
    """Select ``r`` coreset rows of ``K`` for the kernel ``spec``.

    ``seed`` is an int or a ``numpy.random.Generator``. When the residual is
    exhausted before ``r`` pivots (the kernel is numerically low rank), the
    remaining indices are drawn uniformly without replacement and get zero
    weight rows, so they leave the approximation unchanged.
    """
    K = as_matrix(K, "K")
    n = K.shape[0]
    if n == 0:
        raise ContractError("K is empty")
    if not 1 <= r <= n:
        raise ContractError(f"rank r must satisfy 1 <= r <= n={n}, got {r}")
    rng = as_rng(seed)
    scale = spec.scale

    diag0 = np.exp(scale * np.einsum("ij,ij->i", K, K))
    p = diag0.copy()
    floor = RESIDUAL_FLOOR * diag0.max()

    G = np.zeros((r, r))
    M = np.zeros((r, r))
    R = np.zeros((r, n))
    D = np.zeros((r, n))
    S = np.empty(r, dtype=np.int64)
    trace = []
    evals = n
    n_pivoted = r

    for i in range(r):
        p[p <= floor] = 0.0
        total = float(p.sum())
        trace.append(total)
        if total == 0.0:
            n_pivoted = i
            taken = np.zeros(n, dtype=bool)
            taken[S[:i]] = True
            S[i:] = rng.choice(np.flatnonzero(~taken), size=r - i, replace=False)
            R[i:] = np.exp(scale * (K[S[i:]] @ K.T))
            evals += (r - i) * n
            break

        s = _sample_pivot(p, rng.random())
        root = math.sqrt(p[s])
        g = np.empty(i + 1)
        g[:i] = G[:i, :i].T @ D[:i, s]
        g[i] = -1.0
        g /= root
        G[i, : i + 1] = g
        M[: i + 1, : i + 1] += np.outer(g, g)

        R[i] = np.exp(scale * (K @ K[s]))
        evals += n
        D[i] = (D[:i].T @ D[:i, s] - R[i]) / root
        p -= D[i] ** 2
        p[s] = 0.0
        np.maximum(p, 0.0, out=p)
        S[i] = s

    trace.append(float(p.sum()))
    return RpnysResult(
        coreset_indices=S,
        inverse_core=M,
        kernel_rows=R,
        final_residual_diag=p,
        factor=G,
        residual_rows=D,
        n_pivoted=n_pivoted,
        kernel_evals=evals,
        residual_trace=np.array(trace),
    )


def nystrom_apply(res: RpnysResult, spec: KernelSpec, K) -> tuple[np.ndarray, np.ndarray]:
    """Low-rank factors ``(h(K, K_S), W)`` whose product is the Nystrom
    approximation of ``h(K, K)``."""
    K = as_matrix(K, "K")
    if K.shape[0] != res.kernel_rows.shape[1]:
        raise ContractError("K does not match the rows used to build the result")
    # h(K, K_S) is the transpose of the stored kernel rows
    return res.kernel_rows.T.copy(), res.weights
