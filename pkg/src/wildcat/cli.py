"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 contract violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from . import bench
from .attention import exact_attention, wtd_attention
from .compress import compress_kv
from .dense import ContractError, as_matrix, gen_gaussian
from .guarantees import theorem_rank
from .tensorfile import read_cache, read_tensor, write_cache, write_tensor

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_CONTRACT = 0, 2, 3, 4


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _dtype(args) -> type:
    return np.float32 if args.dtype == "f32" else np.float64


def cmd_gen(args) -> int:
    out = {}
    for name, rows, cols, radius, stream in (("q", args.m, args.d, args.rq, 0),
                                             ("k", args.n, args.d, args.rk, 1),
                                             ("v", args.n, args.dv, None, 2)):
        out[name] = gen_gaussian(rows, cols, radius, seed=args.seed, stream=stream)
        write_tensor(f"{args.out_prefix}{name}.wct", out[name].astype(_dtype(args)))
    return EXIT_OK


def _load(path, name):
    return as_matrix(read_tensor(path), name)


def cmd_compress(args) -> int:
    K = _load(args.k, "K")
    V = _load(args.v, "V")
    n = K.shape[0]
    if V.shape[0] != n:
        raise ContractError(f"K has {n} rows but V has {V.shape[0]}")
    lo, hi = args.keep_first, n - args.keep_last
    if lo > hi:
        raise ContractError("--keep-first plus --keep-last exceeds the number of rows")
    cache = compress_kv(K[lo:hi], V[lo:hi], args.rq, args.beta, args.rank, args.bins,
                        args.seed, workers=args.workers)
    if lo or args.keep_last:
        # kept rows enter the cache verbatim with unit weight
        kept = np.r_[0:lo, hi:n]
        cache = dataclasses.replace(
            cache,
            coreset_keys=np.vstack([K[:lo], cache.coreset_keys, K[hi:]]),
            compressed_values=np.vstack([V[:lo], cache.compressed_values, V[hi:]]),
            norm_weights=np.concatenate([np.ones(lo), cache.norm_weights, np.ones(n - hi)]),
            coreset_indices=np.concatenate([kept[:lo], cache.coreset_indices + lo, kept[lo:]]),
            value_min=V.min(axis=0),
            value_max=V.max(axis=0),
        )
    write_cache(args.out, cache, {"keep_first": args.keep_first, "keep_last": args.keep_last,
                                  "seed": args.seed, "rank": cache.rank})
    return EXIT_OK


def cmd_attend(args) -> int:
    Q = _load(args.q, "Q")
    res = wtd_attention(Q, read_cache(args.cache))
    write_tensor(args.out, res.O.astype(_dtype(args)))
    return EXIT_OK


def cmd_attend_exact(args) -> int:
    res = exact_attention(_load(args.q, "Q"), _load(args.k, "K"), _load(args.v, "V"), args.beta)
    write_tensor(args.out, res.O.astype(_dtype(args)))
    return EXIT_OK


def _beta(args) -> float:
    return args.beta if args.beta is not None else 1.0 / math.sqrt(args.d)


def cmd_bench_error(args) -> int:
    records = bench.error_sweep(args.n, args.d, _beta(args), args.ranks, args.bins,
                                range(args.seed, args.seed + args.seeds), m=args.m,
                                d_v=args.dv, exact=not args.no_exact)
    bench.write_csv(args.csv if args.csv else sys.stdout, records)
    return EXIT_OK


def cmd_bench_time(args) -> int:
    records = bench.time_sweep(args.ns, args.rank, args.bins, args.reps, args.warmup,
                               args.d, args.seed, args.beta)
    bench.write_csv(args.csv if args.csv else sys.stdout, records)
    return EXIT_OK


def cmd_guarantee(args) -> int:
    report = theorem_rank(args.n, args.d, args.a, _beta(args), args.rq, args.rk, args.bins)
    sys.stdout.write(report.to_text())
    if report.vacuous:
        sys.stdout.write("# vacuous: r_sufficient exceeds n_eff, the guarantee is empty here\n")
    if report.weak_decay:
        sys.stdout.write("# warning: a < 1/2 is outside the theorem's hypothesis\n")
    if report.degenerate:
        sys.stdout.write("# degenerate: gamma = 0 (zero radius)\n")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.csv_header() + "\n" + report.csv_row() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wildcat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write seeded Gaussian q/k/v tensors")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--d", type=_positive, required=True)
    p.add_argument("--dv", type=_positive, required=True)
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--rq", type=float, default=None, help="row norm of Q")
    p.add_argument("--rk", type=float, default=None, help="row norm of K")
    p.add_argument("--dtype", choices=("f32", "f64"), default="f64")
    p.add_argument("--out-prefix", required=True,
                   help="files are written to <prefix>q.wct, <prefix>k.wct, <prefix>v.wct")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compress", help="compress a KV cache")
    p.add_argument("--k", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--rank", type=_positive, required=True)
    p.add_argument("--bins", type=_positive, default=1)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--rq", type=float, required=True, help="query radius R_Q")
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--keep-first", type=_nonneg, default=0)
    p.add_argument("--keep-last", type=_nonneg, default=0)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("attend", help="weighted attention against a compressed cache")
    p.add_argument("--q", required=True)
    p.add_argument("--cache", required=True)
    p.add_argument("--dtype", choices=("f32", "f64"), default="f64")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attend)

    p = sub.add_parser("attend-exact", help="exact softmax attention")
    p.add_argument("--q", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--dtype", choices=("f32", "f64"), default="f64")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attend_exact)

    p = sub.add_parser("bench-error", help="output error against rank")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--m", type=_positive, default=None)
    p.add_argument("--d", type=_positive, default=8)
    p.add_argument("--dv", type=_positive, default=None)
    p.add_argument("--beta", type=float, default=None, help="default 1/sqrt(d)")
    p.add_argument("--ranks", type=_int_list, default=[32, 64, 128, 256])
    p.add_argument("--bins", type=_positive, default=1)
    p.add_argument("--seeds", type=_positive, default=10)
    p.add_argument("--seed", type=_nonneg, default=0, help="first seed")
    p.add_argument("--no-exact", action="store_true")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_bench_error)

    p = sub.add_parser("bench-time", help="wall time against sequence length")
    p.add_argument("--ns", type=_int_list, default=[1024, 2048, 4096, 8192])
    p.add_argument("--rank", type=_positive, default=128)
    p.add_argument("--bins", type=_positive, default=1)
    p.add_argument("--reps", type=_positive, default=5)
    p.add_argument("--warmup", type=_nonneg, default=3)
    p.add_argument("--d", type=_positive, default=8)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_bench_time)

    p = sub.add_parser("guarantee", help="evaluate the sufficient-rank guarantee")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=_positive, required=True)
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--rq", type=float, default=1.0)
    p.add_argument("--rk", type=float, default=1.0)
    p.add_argument("--bins", type=_positive, default=1)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_guarantee)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        return args.func(args)
    except OSError as exc:
        print(f"wildcat: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ContractError, ValueError) as exc:
        print(f"wildcat: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
