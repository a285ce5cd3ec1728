"""Command-line entry point: gen, run, bench, attack, convert, svt-trace.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness
from .noise import NoiseSource, ZeroNoise, dp_to_zcdp_budget, zcdp_to_dp
from .reductions import inner_products_via_mechanism, marginals_via_mechanism
from .stream import StreamParseError, read_stream, serialize_stream, validate_model
from .svt import SparseVector

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=["csv"], default="csv")
    return p


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)


def _noise(args):
    return ZeroNoise() if getattr(args, "zero_noise", False) else NoiseSource(args.seed)


def cmd_gen(args):
    spec = harness.GeneratorSpec(args.model, args.T, args.universe, args.w, args.seed)
    try:
        x = harness.generate(spec)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _emit(serialize_stream(x), args.out)


def _load(path):
    try:
        return read_stream(path)
    except (OSError, StreamParseError) as exc:
        raise DataError(str(exc)) from exc


def cmd_run(args):
    x = _load(args.stream)
    if args.model != "general":
        violation = validate_model(x, args.model)
        if violation is not None:
            raise DataError(f"stream violates the {args.model} model: {violation}")
    if args.mechanism == "bounded" and args.w is None:
        raise UsageError("--w is required for the bounded mechanism")
    mech = harness.make_mechanism(args.mechanism, len(x), args.rho, args.w, _noise(args),
                                  trace=args.trace, clamp=args.clamp)
    trace = harness.measure_error(x, mech.run(x))
    w_hist = getattr(mech, "w_max_history", None)
    header = ["t", "true", "estimate", "abs_error"]
    rows = list(trace.rows())
    if w_hist is not None:
        header.append("w_max")
        rows = [r + (w,) for r, w in zip(rows, w_hist)]
    _emit(harness.to_csv(header, rows), args.out)
    if args.trace and getattr(mech, "trace", None) is not None:
        sys.stderr.write(harness.to_csv(
            ["t", "w_max", "query", "answer"],
            [(r.t, r.w_max, r.query, r.answer) for r in mech.trace]))


def cmd_bench(args):
    grid = [int(v) for v in args.w_grid.split(",") if v]
    try:
        rows = harness.bench_sweep(args.mechanism, grid, args.trials, args.rho, args.T,
                                   args.seed, args.universe, args.zero_noise, args.jobs)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _emit(harness.bench_csv(rows), args.out)


def cmd_attack(args):
    rows = []
    for trial in range(args.trials):
        data_seq, mech_seq = harness.trial_seeds(args.seed, trial)
        rng = np.random.default_rng(data_seq)
        noise = ZeroNoise() if args.zero_noise else NoiseSource(mech_seq)
        if args.problem == "inner-product":
            y = rng.integers(0, 2, args.n)
            queries = rng.integers(0, 2, (args.k, args.n))
            w = args.w if args.w is not None else max(1, 2 * args.k)
            run = harness.runner(args.mechanism, args.rho, w, noise)
            res = inner_products_via_mechanism(y, queries, run)
        else:
            y = rng.integers(0, 2, (args.n, args.d))
            w = args.w if args.w is not None else max(1, 2 * args.d)
            run = harness.runner(args.mechanism, args.rho, w, noise)
            res = marginals_via_mechanism(y, run)
        for j, (truth, est) in enumerate(zip(res.truth, res.estimates), start=1):
            rows.append((trial, j, float(truth), float(est), abs(float(est) - float(truth))))
    _emit(harness.to_csv(["trial", "j", "truth", "estimate", "abs_error"], rows), args.out)


def cmd_convert(args):
    if args.delta is None:
        raise UsageError("--delta is required")
    try:
        if args.rho is not None:
            eps, delta = zcdp_to_dp(args.rho, args.delta)
            text = f"epsilon={eps:.6g}\ndelta={delta:.6g}\n"
        else:
            text = f"rho={dp_to_zcdp_budget(args.eps, args.delta):.6g}\n"
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _emit(text, args.out)


def cmd_svt_trace(args):
    try:
        with open(args.values, encoding="utf-8") as fh:
            values = [float(line) for line in fh if line.strip() and not line.startswith("#")]
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from exc
    svt = SparseVector(args.rho, args.cutoff, _noise(args))
    rows = [(i, v, svt.query(v)) for i, v in enumerate(values, start=1)]
    _emit(harness.to_csv(["i", "value", "answer"], rows), args.out)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="turnstile-dp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="generate a synthetic stream")
    p.add_argument("--model", choices=harness.MODELS, default="uniform-turnstile")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--universe", type=int, default=8)
    p.add_argument("--w", type=int, default=None, help="target flippancy (adversarial-flip)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", parents=[common], help="run a mechanism on a stream file")
    p.add_argument("--mechanism", choices=harness.MECHANISMS, required=True)
    p.add_argument("--stream", required=True)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--w", type=int, default=None)
    p.add_argument("--model", choices=["general", "strict", "likes"], default="general")
    p.add_argument("--trace", action="store_true", help="dump SVT queries to stderr")
    p.add_argument("--clamp", action="store_true")
    p.add_argument("--zero-noise", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", parents=[common], help="error vs flippancy sweep")
    p.add_argument("--mechanism", choices=harness.MECHANISMS, default="adaptive")
    p.add_argument("--w-grid", default="2,8,32,128")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--T", type=int, default=4096)
    p.add_argument("--universe", type=int, default=32)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--zero-noise", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("attack", help="batch reductions driven by a mechanism")
    asub = p.add_subparsers(dest="problem", required=True, parser_class=_Parser)
    for name in ("inner-product", "marginals"):
        a = asub.add_parser(name, parents=[common])
        a.add_argument("--n", type=int, required=True)
        if name == "inner-product":
            a.add_argument("--k", type=int, required=True)
        else:
            a.add_argument("--d", type=int, required=True)
        a.add_argument("--rho", type=float, default=1.0)
        a.add_argument("--mechanism", choices=harness.MECHANISMS, default="bounded")
        a.add_argument("--w", type=int, default=None)
        a.add_argument("--trials", type=int, default=1)
        a.add_argument("--zero-noise", action="store_true")
        a.set_defaults(func=cmd_attack)

    p = sub.add_parser("convert", parents=[common], help="zCDP <-> (eps, delta)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rho", type=float)
    g.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("svt-trace", parents=[common], help="replay query values through SVT")
    p.add_argument("--values", required=True, help="file with one query value per line")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--cutoff", type=int, default=1)
    p.add_argument("--zero-noise", action="store_true")
    p.set_defaults(func=cmd_svt_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"turnstile-dp: error: {exc}\n")
        return EXIT_USAGE
    except DataError as exc:
        sys.stderr.write(f"turnstile-dp: {exc}\n")
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
