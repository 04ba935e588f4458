"""KV-cache compression: recentre keys, split into bins, pick a temperature
per bin and run RPNys on each bin independently."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dense import ContractError, KernelSpec, as_matrix, make_rng, row_norm
from .rpnys import RpnysResult, rpnys
from .temperature import get_temperature


@dataclass(frozen=True, eq=False)
class CompressedCache:
    """Compressed keys and values. Every array field has O(r) rows; nothing
    scales with the original sequence length except the bin offsets."""

    coreset_keys: np.ndarray  # K_S, (r, d), original (uncentred) coordinates
    compressed_values: np.ndarray  # V_S = W V, (r, d_v)
    norm_weights: np.ndarray  # w = W 1, (r,)
    value_min: np.ndarray  # (d_v,)
    value_max: np.ndarray  # (d_v,)
    beta: float
    bins: int
    bin_boundaries: np.ndarray  # (B + 1,) row offsets into the original K
    per_bin_tau: np.ndarray  # (B,)
    per_bin_radius: np.ndarray  # (B,) R_K of the centred bin keys
    coreset_indices: np.ndarray  # (r,) rows of K chosen as coreset

    @property
    def rank(self) -> int:
        return self.coreset_keys.shape[0]

    @property
    def n(self) -> int:
        return int(self.bin_boundaries[-1])


def bin_boundaries(n: int, B: int) -> np.ndarray:
    """Offsets of ``B`` contiguous bins of ``floor(n/B)`` rows; the last bin
    also takes the remainder."""
    size = n // B
    edges = np.arange(B + 1, dtype=np.int64) * size
    edges[-1] = n
    return edges


def bin_rank(r: int, B: int, bin_size: int) -> int:
    return min(math.ceil(r / B), bin_size)


def _compress_bin(Kc, beta, r_q, r_b, rng):
    r_k = row_norm(Kc)
    tau = get_temperature(beta, r_q, r_k, Kc.shape[0])
    return rpnys(Kc, KernelSpec(beta, tau), r_b, rng), tau, r_k


def compress_kv(K, V, r_q: float, beta: float, r: int, B: int = 1, seed: int = 0,
                workers: int = 1, return_weights: bool = False):
    """Compress ``(K, V)`` to a weighted coreset of about ``r`` keys.

    Bin ``b`` is compressed with its own generator ``make_rng(seed, b)``, so
    the result does not depend on ``workers``. With ``return_weights=True``
    also returns the dense ``(r, n)`` weight matrix (bins occupy disjoint
    column blocks), which is useful for diagnostics on small inputs.
    """
    K = as_matrix(K, "K")
    V = as_matrix(V, "V")
    n = K.shape[0]
    if n == 0:
        raise ContractError("K is empty")
    if V.shape[0] != n:
        raise ContractError(f"K has {n} rows but V has {V.shape[0]}")
    if not 1 <= B <= r <= n:
        raise ContractError(f"need 1 <= B <= r <= n, got B={B}, r={r}, n={n}")
    if r_q < 0:
        raise ContractError("r_q must be nonnegative")

    k_bar = K.mean(axis=0)
    Kc = K - k_bar
    edges = bin_boundaries(n, B)

    def job(b):
        lo, hi = edges[b], edges[b + 1]
        return _compress_bin(Kc[lo:hi], beta, r_q, bin_rank(r, B, hi - lo),
                             make_rng(seed, b))

    if workers > 1 and B > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(job, range(B)))
    else:
        outs = [job(b) for b in range(B)]

    results: list[RpnysResult] = [o[0] for o in outs]
    idx = np.concatenate([res.coreset_indices + edges[b] for b, res in enumerate(results)])
    VS = np.concatenate([res.weights @ V[edges[b]:edges[b + 1]]
                         for b, res in enumerate(results)])
    w = np.concatenate([res.weights.sum(axis=1) for res in results])

    cache = CompressedCache(
        coreset_keys=K[idx],
        compressed_values=VS,
        norm_weights=w,
        value_min=V.min(axis=0),
        value_max=V.max(axis=0),
        beta=float(beta),
        bins=B,
        bin_boundaries=edges,
        per_bin_tau=np.array([o[1] for o in outs]),
        per_bin_radius=np.array([o[2] for o in outs]),
        coreset_indices=idx,
    )
    if not return_weights:
        return cache
    W = np.zeros((len(idx), n))
    row = 0
    for b, res in enumerate(results):
        W[row:row + res.rank, edges[b]:edges[b + 1]] = res.weights
        row += res.rank
    return cache, W
