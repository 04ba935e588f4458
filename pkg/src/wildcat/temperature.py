"""Closed-form key/query rescaling.

Queries are scaled by tau and keys by 1/tau; the attention matrix is unchanged
but the key kernel ``exp(beta <k, k'> / tau^2)`` becomes easier to
approximate at low rank. The balance point used here is

    b0  = log(n) / (beta R_Q R_K) + 2
    tau = sqrt((R_K / R_Q) * b0 / (2 W0(b0 / (2 rho0))))
"""

from __future__ import annotations

import math

from .special import rho0, w0


def _check(beta: float, r_q: float, r_k: float, n: int) -> None:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if r_q < 0 or r_k < 0:
        raise ValueError("radii must be nonnegative")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")


def balance_rho(beta: float, r_q: float, r_k: float, n: int) -> float:
    """The ratio ``tau^2 R_Q / R_K`` selected for these inputs."""
    b0 = math.log(n) / (beta * r_q * r_k) + 2.0
    return b0 / (2.0 * w0(b0 / (2.0 * rho0())))


def get_temperature(beta: float, r_q: float, r_k: float, n: int) -> float:
    """Temperature tau for query radius ``r_q``, key radius ``r_k`` and ``n``
    keys. Falls back to 1 when either radius is zero (then every attention
    weight is equal and any tau is exact)."""
    _check(beta, r_q, r_k, n)
    if r_q == 0 or r_k == 0:
        return 1.0
    return math.sqrt((r_k / r_q) * balance_rho(beta, r_q, r_k, n))


def rho_of(tau: float, r_q: float, r_k: float) -> float:
    if not r_k > 0:
        raise ValueError("r_k must be positive")
    return tau * tau * r_q / r_k
