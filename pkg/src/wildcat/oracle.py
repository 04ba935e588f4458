"""Slow, dense reference implementations for testing.

Nothing here shares code with the fast path beyond ``kernel_block``: the
eigensolver is cyclic Jacobi and the linear solver is Gaussian elimination
with partial pivoting, both written out by hand. Size guards fail loudly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dense import ContractError, KernelSpec, as_matrix, kernel_block, max_norm, row_norm, spectral_norm

MAX_DENSE = 512
PINV_CUTOFF = 1e-12


class SingularMatrixError(ArithmeticError):
    pass


def _guard(n: int, what: str) -> None:
    if n > MAX_DENSE:
        raise ContractError(f"{what}: size {n} exceeds the oracle limit {MAX_DENSE}")


def jacobi_eigh(A, tol: float = 1e-14, max_sweeps: int = 60):
    """Eigenvalues (ascending) and eigenvectors of a symmetric matrix by
    cyclic Jacobi rotations."""
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ContractError("jacobi_eigh needs a square matrix")
    _guard(n, "jacobi_eigh")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    scale = max(float(np.abs(A).max()), np.finfo(float).tiny) if n else 1.0
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        if np.sqrt(np.sum(A[offdiag] ** 2)) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta^2 would overflow
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p and q
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def dense_solve(A, B):
    """Solve ``A X = B`` by Gaussian elimination with partial pivoting."""
    A = np.array(as_matrix(A, "A"))
    B = np.asarray(B, dtype=np.float64)
    vector = B.ndim == 1
    B = np.array(B.reshape(len(B), -1))
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n:
        raise ContractError("dense_solve needs square A and matching B")
    _guard(n, "dense_solve")
    scale = float(np.abs(A).max()) if n else 0.0
    for k in range(n):
        piv = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[piv, k]) <= 1e-15 * n * scale:
            raise SingularMatrixError(f"matrix is singular to working precision at column {k}")
        if piv != k:
            A[[k, piv]] = A[[piv, k]]
            B[[k, piv]] = B[[piv, k]]
        f = A[k + 1:, k] / A[k, k]
        A[k + 1:, k:] -= np.outer(f, A[k, k:])
        B[k + 1:] -= np.outer(f, B[k])
    X = np.zeros_like(B)
    for k in range(n - 1, -1, -1):
        X[k] = (B[k] - A[k, k + 1:] @ X[k + 1:]) / A[k, k]
    return X[:, 0] if vector else X


def dense_inverse(A):
    return dense_solve(A, np.eye(len(A)))


def pinv_sym(A, cutoff: float = PINV_CUTOFF):
    """Pseudo-inverse of a symmetric PSD matrix, dropping eigenvalues below
    ``cutoff * lambda_max``."""
    w, U = jacobi_eigh(A)
    if len(w) == 0:
        return np.zeros((0, 0))
    keep = w > cutoff * max(w[-1], 0.0)
    Uk = U[:, keep]
    return (Uk / w[keep]) @ Uk.T


def direct_nystrom(K, spec: KernelSpec, S) -> np.ndarray:
    """Dense ``h(K, K_S) h(K_S, K_S)^+ h(K_S, K)``."""
    K = as_matrix(K, "K")
    n = K.shape[0]
    _guard(n, "direct_nystrom")
    S = np.asarray(S, dtype=np.int64).reshape(-1)
    if len(S) == 0:
        return np.zeros((n, n))
    C = kernel_block(spec, K, K[S])
    return C @ pinv_sym(C[S]) @ C.T


def _multi_indices(d: int, degree: int):
    for combo in itertools.combinations_with_replacement(range(d), degree):
        alpha = [0] * d
        for j in combo:
            alpha[j] += 1
        yield tuple(alpha)


def taylor_features(K, spec: KernelSpec, s: int) -> np.ndarray:
    """Feature map ``phi_alpha(k) = sqrt(c^|a| / prod(a_j!)) k^alpha`` for all
    multi-indices with ``|alpha| <= s``, ``c = beta / tau^2``."""
    K = as_matrix(K, "K")
    n, d = K.shape
    if d > 4 or s > 8:
        raise ContractError(f"taylor features limited to d <= 4 and s <= 8, got d={d}, s={s}")
    if s < 0:
        raise ContractError("s must be nonnegative")
    c = spec.scale
    cols = []
    for degree in range(s + 1):
        for alpha in _multi_indices(d, degree):
            # (1/|a|!) * multinomial(|a|; a) = 1 / prod(a_j!)
            coef = math.sqrt(c ** degree / math.prod(math.factorial(a) for a in alpha))
            cols.append(coef * np.prod(K ** np.array(alpha), axis=1))
    return np.stack(cols, axis=1)


def taylor_feature_gram(K, spec: KernelSpec, s: int) -> np.ndarray:
    Phi = taylor_features(K, spec, s)
    return Phi @ Phi.T


def nuclear_norm_sym(A) -> float:
    w, _ = jacobi_eigh(A)
    return float(np.sum(np.abs(w)))


@dataclass(frozen=True)
class ErrorStats:
    max_norm_err: float
    rowwise_err: float
    spectral_err: float
    clipped_bound: float = math.nan


def measure_errors(exact, approx, bound: float = math.nan) -> ErrorStats:
    """Max-norm, 2->inf and spectral norms of ``exact - approx``. Accepts
    arrays or anything with an ``O`` attribute."""
    E = np.asarray(getattr(exact, "O", exact), dtype=np.float64)
    F = np.asarray(getattr(approx, "O", approx), dtype=np.float64)
    if E.shape != F.shape:
        raise ContractError(f"shape mismatch {E.shape} vs {F.shape}")
    diff = np.atleast_2d(E - F)
    return ErrorStats(max_norm(diff), row_norm(diff), spectral_norm(diff), bound)
