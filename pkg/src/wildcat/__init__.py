"""Weighted-coreset approximation of softmax attention."""

from .attention import AttentionOutput, clip_bound, exact_attention, wildcat, wtd_attention
from .compress import CompressedCache, compress_kv
from .dense import (
    ContractError,
    KernelSpec,
    gen_gaussian,
    kernel_block,
    make_rng,
    max_norm,
    recenter_rows,
    row_norm,
    spectral_norm,
)
from .guarantees import GuaranteeReport, taylor_order, taylor_residual, theorem_rank
from .rpnys import RpnysResult, nystrom_apply, rpnys
from .special import LambertResult, binary_entropy, lambert_w0, log_binom_bound, rho0
from .temperature import get_temperature, rho_of

__all__ = [
    "AttentionOutput", "CompressedCache", "ContractError", "GuaranteeReport", "KernelSpec",
    "LambertResult", "RpnysResult", "binary_entropy", "clip_bound", "compress_kv",
    "exact_attention", "gen_gaussian", "get_temperature", "kernel_block", "lambert_w0",
    "log_binom_bound", "make_rng", "max_norm", "nystrom_apply", "recenter_rows", "rho0",
    "rho_of", "row_norm", "rpnys", "spectral_norm", "taylor_order", "taylor_residual",
    "theorem_rank", "wildcat", "wtd_attention",
]
