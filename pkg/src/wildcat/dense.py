"""Dense linear-algebra helpers shared by the rest of the package.

Matrices are plain 2-D ``float64`` numpy arrays. ``as_matrix`` is the single
entry point that enforces the invariants every other routine relies on
(two dimensions, 64-bit floats, finite entries).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ContractError(ValueError):
    """Raised when an argument violates a documented precondition."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a C-contiguous 2-D float64 array.

    32-bit inputs are upcast; NaN or Inf entries are rejected.
    """
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains NaN or Inf")
    return arr


def _nonempty(m: np.ndarray, name: str) -> None:
    if m.size == 0:
        raise ContractError(f"{name} is empty")


@dataclass(frozen=True)
class KernelSpec:
    """Exponential kernel ``exp(beta * <x, y> / tau**2)``."""

    beta: float
    tau: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ContractError(f"beta must be positive and finite, got {self.beta}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ContractError(f"tau must be positive and finite, got {self.tau}")

    @property
    def scale(self) -> float:
        return self.beta / (self.tau * self.tau)


def kernel_block(spec: KernelSpec, X, Y) -> np.ndarray:
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ContractError(f"column mismatch: X has {X.shape[1]}, Y has {Y.shape[1]}")
    return np.exp(spec.scale * (X @ Y.T))


def kernel_diag(spec: KernelSpec, X) -> np.ndarray:
    """Diagonal of ``kernel_block(spec, X, X)`` without forming the block."""
    X = as_matrix(X, "X")
    return np.exp(spec.scale * np.einsum("ij,ij->i", X, X))


def max_norm(M) -> float:
    M = np.asarray(M, dtype=np.float64)
    _nonempty(M, "M")
    return float(np.max(np.abs(M)))


def row_norm(M) -> float:
    """Largest Euclidean row norm (the 2-to-infinity norm)."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    _nonempty(M, "M")
    scale = float(np.max(np.abs(M)))
    if scale == 0.0:
        return 0.0
    S = M / scale  # keeps the squares clear of underflow and overflow
    return scale * float(np.sqrt(np.max(np.einsum("ij,ij->i", S, S))))


def spectral_norm(M, tol: float = 1e-8, max_iters: int | None = None,
                  full_output: bool = False):
    """Largest singular value of ``M`` by power iteration on ``M^T M``.

    The start vector is drawn from ``make_rng(0)`` so repeated calls agree.
    With ``full_output=True`` returns ``(estimate, converged)``; otherwise
    only the estimate (the best one reached, even without convergence).
    """
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    _nonempty(M, "M")
    rows, cols = M.shape
    if max_iters is None:
        max_iters = 10 * max(rows, cols)

    x = box_muller(make_rng(0), cols)
    x /= np.linalg.norm(x)
    if not np.any(M):
        return (0.0, True) if full_output else 0.0
    sigma = 0.0
    converged = False
    restarts = 0
    for _ in range(max_iters):
        y = M.T @ (M @ x)
        ynorm = np.linalg.norm(y)
        if ynorm == 0.0:
            # start vector landed in the null space
            restarts += 1
            x = box_muller(make_rng(0, restarts), cols)
            x /= np.linalg.norm(x)
            continue
        new_sigma = math.sqrt(ynorm)
        x = y / ynorm
        if abs(new_sigma - sigma) <= tol * new_sigma:
            sigma, converged = new_sigma, True
            break
        sigma = new_sigma
    # final Rayleigh-type estimate from the current unit vector
    sigma = max(sigma, float(np.linalg.norm(M @ x)))
    if full_output:
        return sigma, converged
    return sigma


def recenter_rows(K):
    """Subtract the mean row; returns ``(K - 1 k_bar^T, k_bar)``."""
    K = as_matrix(K, "K")
    _nonempty(K, "K")
    k_bar = K.mean(axis=0)
    return K - k_bar, k_bar


# --- random numbers -------------------------------------------------------
#
# Philox4x64 is counter based: the 128-bit key is ``seed | stream << 64`` and
# the counter starts at zero, so streams never overlap and any (seed, stream)
# pair reproduces the same sequence on every platform.


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    if not (0 <= seed < 2**64 and 0 <= stream < 2**64):
        raise ContractError("seed and stream must lie in [0, 2**64)")
    return np.random.Generator(np.random.Philox(key=(stream << 64) | seed))


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(int(seed))


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` standard normal variates via the Box-Muller transform."""
    pairs = (size + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1], keeps log finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:size]


def gen_gaussian(rows: int, cols: int, target_row_norm: float | None = None,
                 seed: int = 0, stream: int = 0) -> np.ndarray:
    """i.i.d. standard normal matrix, optionally with every row rescaled
    to Euclidean norm ``target_row_norm``."""
    if rows < 1 or cols < 1:
        raise ContractError(f"rows and cols must be >= 1, got {rows}x{cols}")
    G = box_muller(make_rng(seed, stream), rows * cols).reshape(rows, cols)
    if target_row_norm is not None:
        if target_row_norm < 0:
            raise ContractError("target_row_norm must be nonnegative")
        G *= target_row_norm / np.linalg.norm(G, axis=1, keepdims=True)
    return G
