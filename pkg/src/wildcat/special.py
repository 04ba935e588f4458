"""Scalar special functions: principal Lambert W, binary entropy and the
Stirling-type bound on binomial coefficients."""

from __future__ import annotations

import functools
import math
from typing import NamedTuple

LAMBERT_ITERATIONS = 6


class LambertResult(NamedTuple):
    value: float
    iterations: int
    residual: float  # |w e^w - z|


def lambert_w0(z: float) -> LambertResult:
    """Principal branch W0(z) for z >= 0.

    Seeded with ``log z - log log z`` above e and ``z / e`` below, then six
    steps of ``w <- w / (1 + w) * (1 + log z - log w)``. The iterates
    approach W0 from above with error below ``0.633**(2**n) / 3`` after n
    steps, so six steps land below 1e-13 before rounding.
    """
    z = float(z)
    if not z >= 0.0:  # also catches NaN
        raise ValueError(f"lambert_w0 is defined here for z >= 0, got {z}")
    if math.isinf(z):
        raise ValueError("lambert_w0 needs a finite argument")
    if z == 0.0:
        return LambertResult(0.0, 0, 0.0)
    if z == math.e:
        return LambertResult(1.0, 0, abs(math.e - z))
    if z < 1e-300:
        w = z * (1.0 - z)
        return LambertResult(w, 0, abs(w * math.exp(w) - z))

    log_z = math.log(z)
    w = log_z - math.log(log_z) if z > math.e else math.exp(log_z - 1.0)
    for _ in range(LAMBERT_ITERATIONS):
        w = w / (1.0 + w) * (1.0 + log_z - math.log(w))
    return LambertResult(w, LAMBERT_ITERATIONS, abs(w * math.exp(w) - z))


def w0(z: float) -> float:
    return lambert_w0(z).value


@functools.cache
def rho0() -> float:
    """``sqrt(1 + exp(W0(2/e^2) + 2))``, roughly 3.19."""
    return math.sqrt(1.0 + math.exp(w0(2.0 / math.e**2) + 2.0))


def _xlogx(x: float) -> float:
    return x * math.log(x) if x > 0.0 else 0.0


def binary_entropy(p: float) -> float:
    """Natural-log binary entropy; 0 at both endpoints."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    # written as f(p) + f(1-p) so swapping p and 1-p gives identical bits
    return -(_xlogx(p) + _xlogx(1.0 - p))


def log_binom_bound(s: int, d: int) -> float:
    """Log of ``sqrt((1/s + 1/d) / (2 pi)) * exp((s+d) Ent(s/(s+d)))``.

    Upper-bounds ``log C(s+d, d)``; returns 0 when s or d is 0, where the
    binomial coefficient is exactly 1.
    """
    if s < 0 or d < 0:
        raise ValueError("s and d must be nonnegative")
    if s == 0 or d == 0:
        return 0.0
    total = s + d
    return (0.5 * math.log((1.0 / s + 1.0 / d) / (2.0 * math.pi))
            + total * binary_entropy(s / total))
