"""Calculator for the rank guarantees: Taylor truncation order, Taylor
residual and the sufficient coreset size for a target error decay.

All large quantities are carried in log space; exponents such as
``n ** (sigma * Ent)`` overflow a double long before ``n`` is unusual.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .special import binary_entropy, rho0, w0
from .temperature import get_temperature


def _growth(beta: float, r_k: float, tau: float) -> float:
    if not (beta > 0 and tau > 0 and r_k >= 0):
        raise ValueError("need beta > 0, tau > 0 and r_k >= 0")
    return beta * r_k * r_k / (tau * tau)


def taylor_order(n: int, eps: float, beta: float, r_k: float, tau: float = 1.0) -> float:
    """Degree ``s_tilde`` beyond which the Taylor truncation of the key
    kernel has nuclear-norm error at most ``eps``:

        (log(n/eps) + c) / W0(log(n/eps) / (e c) + 1/e),   c = beta r_k^2 / tau^2

    Raises ``ValueError`` when ``eps >= n e^c`` (any degree works there, and
    the formula has no meaning).
    """
    if n < 1 or not eps > 0:
        raise ValueError("need n >= 1 and eps > 0")
    c = _growth(beta, r_k, tau)
    if c == 0.0:
        return 0.0  # the kernel is constant, degree 0 is exact
    log_ratio = math.log(n / eps)
    if log_ratio + c <= 0.0:
        raise ValueError(f"eps={eps} is at least n*exp(beta r_k^2/tau^2); order undefined")
    return (log_ratio + c) / w0(log_ratio / (math.e * c) + 1.0 / math.e)


def taylor_residual_log(n: int, beta: float, r_k: float, tau: float, s: int) -> float:
    """Log of ``n e^c (e c / (s+1))^(s+1)``; ``-inf`` when ``c = 0``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    c = _growth(beta, r_k, tau)
    if c == 0.0:
        return -math.inf
    return math.log(n) + c + (s + 1) * math.log(math.e * c / (s + 1))


def taylor_residual(n: int, beta: float, r_k: float, tau: float, s: int) -> float:
    """Bound on the nuclear norm of ``H - T^s`` for degree-``s`` Taylor
    features of ``n`` keys with radius ``r_k``."""
    log_val = taylor_residual_log(n, beta, r_k, tau, s)
    return math.exp(log_val) if log_val < 709.0 else math.inf


@dataclass(frozen=True)
class GuaranteeReport:
    n: int
    d: int
    a: float
    beta: float
    r_q: float
    r_k: float
    bins: int
    n_eff: int
    gamma: float
    delta: float
    sigma: float
    s_tilde: float
    log_r_sufficient: float  # log(r_sufficient - 1)
    r_sufficient: float  # per bin; inf when it overflows
    r_eff: int  # ceil(r_sufficient), per bin
    r_total: float  # bins * r_eff
    taylor_residual_log: float
    vacuous: bool  # r_sufficient > n_eff: the guarantee says nothing
    weak_decay: bool  # a < 1/2, outside the theorem's hypothesis
    degenerate: bool  # gamma = 0

    def to_text(self) -> str:
        return "".join(f"{k}={_fmt(v)}\n" for k, v in asdict(self).items())

    def csv_header(self) -> str:
        return ",".join(asdict(self))

    def csv_row(self) -> str:
        return ",".join(_fmt(v) for v in asdict(self).values())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def theorem_rank(n: int, d: int, a: float, beta: float, r_q: float, r_k: float,
                 B: int = 1) -> GuaranteeReport:
    """Sufficient per-bin coreset size for expected max-norm output error
    ``3 |V|_max n^-a``.

    With ``gamma = beta r_q r_k / log n`` and ``delta = d / log n``:

        sigma = (a + gamma) / W0(1 / (2 rho0 gamma) + 1 / rho0)
        r    >= 1 + n^((sigma + delta) Ent(sigma / (sigma + delta)))
                  * (2a + sigma + 3 gamma) log(n) / sqrt(pi)

    For ``B > 1`` every ``n`` above is the bin length ``floor(n / B)``.
    ``gamma = 0`` uses the limit ``sigma = 0`` and sets ``degenerate``.
    """
    if B < 1 or d < 1:
        raise ValueError("need B >= 1 and d >= 1")
    n_eff = n // B
    if n_eff < 2:
        raise ValueError(f"need floor(n/B) >= 2, got {n_eff}")
    if beta <= 0 or r_q < 0 or r_k < 0:
        raise ValueError("need beta > 0 and nonnegative radii")
    if a < 0:
        raise ValueError("a must be nonnegative")

    log_n = math.log(n_eff)
    gamma = beta * r_q * r_k / log_n
    delta = d / log_n
    r0 = rho0()
    degenerate = gamma == 0.0
    sigma = 0.0 if degenerate else (a + gamma) / w0(1.0 / (2.0 * r0 * gamma) + 1.0 / r0)

    exponent = (sigma + delta) * binary_entropy(sigma / (sigma + delta))
    log_tail = (exponent * log_n + math.log((2.0 * a + sigma + 3.0 * gamma) * log_n)
                - 0.5 * math.log(math.pi))
    r_suff = 1.0 + math.exp(log_tail) if log_tail < 709.0 else math.inf
    r_eff = math.ceil(r_suff) if math.isfinite(r_suff) else -1

    s_tilde = sigma * log_n
    if degenerate or r_k == 0 or r_q == 0:
        t_log = -math.inf
    else:
        tau = get_temperature(beta, r_q, r_k, n_eff)
        t_log = taylor_residual_log(n_eff, beta, r_k, tau, math.floor(s_tilde))

    return GuaranteeReport(
        n=n, d=d, a=a, beta=beta, r_q=r_q, r_k=r_k, bins=B, n_eff=n_eff,
        gamma=gamma, delta=delta, sigma=sigma, s_tilde=s_tilde,
        log_r_sufficient=log_tail, r_sufficient=r_suff, r_eff=r_eff,
        r_total=B * r_suff if r_eff < 0 else float(B * r_eff),
        taylor_residual_log=t_log,
        vacuous=r_suff > n_eff, weak_decay=a < 0.5, degenerate=degenerate,
    )
