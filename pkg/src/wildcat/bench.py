"""Error-vs-rank and time-vs-n sweeps, written as versioned CSV."""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import astuple, dataclass, field, fields

import numpy as np

from .attention import attention_gap, clip_bound_from_gap, exact_attention, wtd_attention
from .compress import compress_kv
from .dense import ContractError, gen_gaussian, max_norm, row_norm

CSV_VERSION = "# wct-bench v1"
EXACT_LIMIT = 8192  # largest n for which bench-error computes the exact oracle


@dataclass
class BenchRecord:
    n: int
    m: int
    d: int
    d_v: int
    r: int
    B: int
    seed: int
    beta: float
    max_err: float
    rowwise_err: float
    bound: float
    wall_nanos_compress: int
    wall_nanos_attend: int
    wall_nanos_exact: int
    samples: dict = field(default_factory=dict, compare=False, repr=False)


CSV_COLUMNS = [f.name for f in fields(BenchRecord) if f.name != "samples"]


def write_csv(path_or_file, records) -> None:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        fh.write(CSV_VERSION + "\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(astuple(rec)[:len(CSV_COLUMNS)])
    finally:
        if own:
            fh.close()


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != CSV_VERSION:
            raise ValueError(f"{path}: missing '{CSV_VERSION}' header")
        return list(csv.DictReader(fh))


def make_problem(n: int, m: int, d: int, d_v: int, seed: int, r_q: float = 1.0,
                 r_k: float = 1.0):
    """Gaussian Q, K, V with rows of Q and K rescaled to the given radii."""
    Q = gen_gaussian(m, d, r_q, seed=seed, stream=0)
    K = gen_gaussian(n, d, r_k, seed=seed, stream=1)
    V = gen_gaussian(n, d_v, seed=seed, stream=2)
    return Q, K, V


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter_ns()
    out = fn(*args, **kwargs)
    return out, time.perf_counter_ns() - t0


def error_sweep(n: int, d: int, beta: float, ranks, bins: int = 1, seeds=range(10),
                m: int | None = None, d_v: int | None = None, exact: bool = True):
    """One record per (rank, seed). The exact output is computed once per
    seed and shared across ranks."""
    m = n if m is None else m
    d_v = d if d_v is None else d_v
    if exact and n > EXACT_LIMIT:
        raise ContractError(f"n={n} exceeds the exact-oracle limit {EXACT_LIMIT}; pass exact=False")
    records = []
    for seed in seeds:
        Q, K, V = make_problem(n, m, d, d_v, seed)
        r_q = row_norm(Q)
        v_scale = max_norm(V)
        O_exact, t_exact = _timed(exact_attention, Q, K, V, beta) if exact else (None, 0)
        for r in ranks:
            cache, t_c = _timed(compress_kv, K, V, r_q, beta, r, bins, seed)
            out, t_a = _timed(wtd_attention, Q, cache)
            if exact:
                _, W = compress_kv(K, V, r_q, beta, r, bins, seed, return_weights=True)
                err = max_norm(O_exact.O - out.O)
                gap, a_min = attention_gap(Q, K, beta, cache, W)
                bound = clip_bound_from_gap(gap, a_min, n, v_scale)
            else:
                err = gap = bound = math.nan
            records.append(BenchRecord(n, m, d, d_v, r, bins, seed, beta, err, gap, bound,
                                       t_c, t_a, t_exact))
    return records


def time_sweep(ns, r: int, bins: int = 1, reps: int = 5, warmup: int = 3, d: int = 8,
               seed: int = 0, beta: float | None = None):
    """Median wall times of compress, weighted attend and exact attention
    with ``m = n``. Raw per-repetition timings are kept in ``samples``."""
    if reps < 1 or warmup < 0:
        raise ContractError("need reps >= 1 and warmup >= 0")
    beta = 1.0 / math.sqrt(d) if beta is None else beta
    records = []
    for n in ns:
        Q, K, V = make_problem(n, n, d, d, seed)
        r_q = row_norm(Q)
        samples = {"compress": [], "attend": [], "exact": []}
        for it in range(warmup + reps):
            cache, t_c = _timed(compress_kv, K, V, r_q, beta, r, bins, seed)
            out, t_a = _timed(wtd_attention, Q, cache)
            ref, t_e = _timed(exact_attention, Q, K, V, beta)
            if it >= warmup:
                samples["compress"].append(t_c)
                samples["attend"].append(t_a)
                samples["exact"].append(t_e)
        err = max_norm(ref.O - out.O)
        _, W = compress_kv(K, V, r_q, beta, r, bins, seed, return_weights=True)
        gap, a_min = attention_gap(Q, K, beta, cache, W)
        bound = clip_bound_from_gap(gap, a_min, n, max_norm(V))
        med = {k: int(statistics.median(v)) for k, v in samples.items()}
        records.append(BenchRecord(n, n, d, d, r, bins, seed, beta, err, gap, bound,
                                   med["compress"], med["attend"], med["exact"], samples))
    return records


def wildcat_nanos(rec: BenchRecord) -> int:
    return rec.wall_nanos_compress + rec.wall_nanos_attend


def mean_error_by_rank(records) -> dict[int, float]:
    by_rank: dict[int, list[float]] = {}
    for rec in records:
        by_rank.setdefault(rec.r, []).append(rec.max_err)
    return {r: float(np.mean(v)) for r, v in sorted(by_rank.items())}
