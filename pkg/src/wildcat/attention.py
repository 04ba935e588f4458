"""Exact softmax attention, the weighted-coreset forward pass and the
end-to-end WildCat pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compress import CompressedCache, compress_kv
from .dense import ContractError, as_matrix, max_norm, row_norm

# query rows per block, sized so one block of scores stays around 32 MB
_BLOCK_ENTRIES = 1 << 22


@dataclass(frozen=True, eq=False)
class AttentionOutput:
    O: np.ndarray
    clipped_fraction: float = 0.0
    zero_denominator_rows: int = 0


def _row_blocks(m: int, n: int):
    step = max(1, _BLOCK_ENTRIES // max(n, 1))
    for lo in range(0, m, step):
        yield lo, min(m, lo + step)


def _shifted_exp(logits: np.ndarray) -> np.ndarray:
    logits -= logits.max(axis=1, keepdims=True)
    return np.exp(logits, out=logits)


def exact_attention(Q, K, V, beta: float) -> AttentionOutput:
    """Softmax attention ``D^{-1} A V`` with ``A = exp(beta Q K^T)``.

    Scores are shifted by their row maximum before exponentiating; the shift
    cancels in the normalisation. ``beta = 0`` gives uniform weights.
    """
    Q = as_matrix(Q, "Q")
    K = as_matrix(K, "K")
    V = as_matrix(V, "V")
    if Q.shape[1] != K.shape[1]:
        raise ContractError(f"Q has {Q.shape[1]} columns but K has {K.shape[1]}")
    if K.shape[0] != V.shape[0]:
        raise ContractError(f"K has {K.shape[0]} rows but V has {V.shape[0]}")
    if not beta >= 0:
        raise ContractError(f"beta must be nonnegative, got {beta}")
    O = np.empty((Q.shape[0], V.shape[1]))
    for lo, hi in _row_blocks(Q.shape[0], K.shape[0]):
        A = _shifted_exp(beta * (Q[lo:hi] @ K.T))
        O[lo:hi] = (A @ V) / A.sum(axis=1, keepdims=True)
    return AttentionOutput(O)


def wtd_attention(Q, cache: CompressedCache) -> AttentionOutput:
    """Weighted coreset attention ``clip(diag(A_hat w)^{-1} A_hat V_S)``.

    Rows whose denominator is not positive become zero before clipping.
    """
    Q = as_matrix(Q, "Q")
    KS = cache.coreset_keys
    if Q.shape[1] != KS.shape[1]:
        raise ContractError(f"Q has {Q.shape[1]} columns but cache keys have {KS.shape[1]}")
    VS = cache.compressed_values
    m = Q.shape[0]
    O = np.zeros((m, VS.shape[1]))
    zero_rows = 0
    for lo, hi in _row_blocks(m, KS.shape[0]):
        A_hat = _shifted_exp(cache.beta * (Q[lo:hi] @ KS.T))
        den = A_hat @ cache.norm_weights
        ok = den > 0
        zero_rows += int(np.count_nonzero(~ok))
        O[lo:hi][ok] = (A_hat[ok] @ VS) / den[ok, None]
    clipped = np.clip(O, cache.value_min, cache.value_max)
    frac = float(np.count_nonzero(clipped != O)) / O.size if O.size else 0.0
    return AttentionOutput(clipped, frac, zero_rows)


def wildcat(Q, K, V, beta: float, r: int, B: int = 1, seed: int = 0,
            workers: int = 1) -> AttentionOutput:
    """Compress ``(K, V)`` with ``R_Q = row_norm(Q)`` and attend with ``Q``."""
    Q = as_matrix(Q, "Q")
    cache = compress_kv(K, V, row_norm(Q), beta, r, B, seed, workers=workers)
    return wtd_attention(Q, cache)


def clip_bound(A, A_hat, V) -> float:
    """Entrywise error bound for clipped weighted attention:
    ``|V|_max * min(3 / sqrt(n) * |A - A_hat|_{2->inf} / min(A), 2)``."""
    A = np.asarray(A, dtype=np.float64)
    A_hat = np.asarray(A_hat, dtype=np.float64)
    if A.shape != A_hat.shape:
        raise ContractError(f"A is {A.shape} but A_hat is {A_hat.shape}")
    a_min = float(A.min())
    if not a_min > 0:
        raise ContractError("A must have positive entries")
    return clip_bound_from_gap(row_norm(A - A_hat), a_min, A.shape[1], max_norm(V))


def attention_gap(Q, K, beta: float, cache: CompressedCache, W) -> tuple[float, float]:
    """``(|A - A_hat|_{2->inf}, min A)`` with ``A_hat = exp(beta Q K_S^T) W``,
    accumulated over query blocks so only one block of ``A`` is live."""
    Q = as_matrix(Q, "Q")
    K = as_matrix(K, "K")
    worst = 0.0
    a_min = np.inf
    for lo, hi in _row_blocks(Q.shape[0], K.shape[0]):
        A = np.exp(beta * (Q[lo:hi] @ K.T))
        A_hat = np.exp(beta * (Q[lo:hi] @ cache.coreset_keys.T)) @ W
        worst = max(worst, row_norm(A - A_hat))
        a_min = min(a_min, float(A.min()))
    return worst, a_min


def clip_bound_from_gap(gap: float, a_min: float, n: int, v_max_norm: float) -> float:
    return v_max_norm * min(3.0 / np.sqrt(n) * gap / a_min, 2.0)
