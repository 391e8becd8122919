"""Command-line entry point.

Exit codes: 0 success, 1 parse/usage error, 2 infeasible input,
3 premises unmet (strict mode), 4 verify-suite failure. Every randomized
command requires an explicit --seed so reported numbers are reproducible.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from . import estimator, verify
from .errors import (
    GraphFormatError,
    InfeasibleError,
    InvalidAccuracyError,
    InvalidRangeError,
    MatrixFormatError,
    PolyspinError,
    PremisesUnmetError,
)
from .graph import (
    generate_random_regular_bipartite,
    load_graph,
    save_graph,
    second_eigenvalue,
)
from .spin_model import load_matrix

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INFEASIBLE = 2
EXIT_PREMISES = 3
EXIT_VERIFY = 4


def _emit(record: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(record))
    else:
        print(" ".join(f"{k}={v}" for k, v in record.items()))


def cmd_gen(args) -> int:
    graph = generate_random_regular_bipartite(args.n, args.degree, args.seed)
    save_graph(graph, args.out)
    cert = second_eigenvalue(graph)
    bound = 2.0 * math.sqrt(args.degree)
    verdict = "pass" if cert.lam <= bound else "fail"
    _emit(
        {
            "n": graph.n,
            "degree": graph.degree,
            "edges": graph.num_edges,
            "lambda": f"{cert.lam:.9g}",
            "bound_2sqrtD": f"{bound:.9g}",
            "spectral_check": verdict,
            "seed": args.seed,
            "out": args.out,
        },
        args.format,
    )
    return EXIT_OK


def cmd_estimate(args) -> int:
    graph = load_graph(args.graph, oracle_only=args.relaxed)
    matrix = load_matrix(args.matrix)
    config = estimator.EstimatorConfig(
        threads=args.threads,
        eps_override=args.eps_model,
        brute_force_budget=args.brute_force_budget,
        size_cap=args.size_cap,
    )
    start = time.monotonic()
    result = estimator.approximate_Z(
        graph, matrix, args.eps, args.seed, mode=args.mode, config=config
    )
    elapsed_ms = int(1000 * (time.monotonic() - start))
    record = {
        "lnZ": f"{result.ln_value:.12g}",
        "eps_star": args.eps,
        "mode": result.mode,
        "seed": args.seed,
        "bicliques": result.bicliques,
        "wallclock_ms": elapsed_ms,
    }
    _emit(record, args.format)
    for note in result.warnings:
        print(f"# {note}", file=sys.stderr)
    return EXIT_OK


def cmd_sample(args) -> int:
    graph = load_graph(args.graph, oracle_only=args.relaxed)
    matrix = load_matrix(args.matrix)
    config = estimator.EstimatorConfig(
        threads=args.threads,
        eps_override=args.eps_model,
        brute_force_budget=args.brute_force_budget,
        size_cap=args.size_cap,
    )
    samples = estimator.spin_sample_many(
        graph, matrix, args.eps, args.seed, args.count, mode=args.mode, config=config
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for row in samples:
            fh.write(" ".join(str(int(s)) for s in row) + "\n")
    _emit(
        {"count": args.count, "vertices": graph.num_vertices, "seed": args.seed, "out": args.out},
        args.format,
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    rows = verify.run_suites(args.level)
    failed = 0
    for name, ok, detail in rows:
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}: {detail}")
        failed += not ok
    print(f"{len(rows) - failed}/{len(rows)} suites passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyspin",
        description="Partition functions and Gibbs samples of q-spin systems "
        "on regular bipartite expanders via biclique polymer models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random regular bipartite graph")
    gen.add_argument("-n", type=int, required=True, help="vertices per side")
    gen.add_argument("-d", "--degree", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("-o", "--out", required=True)
    gen.add_argument("--format", choices=("kv", "json"), default="kv")
    gen.set_defaults(func=cmd_gen)

    est = sub.add_parser("estimate", help="approximate ln Z for a graph/matrix pair")
    est.add_argument("graph")
    est.add_argument("matrix")
    est.add_argument("-e", "--eps", type=float, required=True, help="relative accuracy target")
    est.add_argument("--seed", type=int, required=True)
    est.add_argument("--mode", choices=("lab", "strict"), default="lab")
    est.add_argument("--format", choices=("kv", "json"), default="kv")
    est.add_argument("--threads", type=int, default=1)
    est.add_argument("--eps-model", type=float, default=None, help="override the model closeness eps")
    est.add_argument("--brute-force-budget", type=int, default=1 << 24)
    est.add_argument("--size-cap", type=int, default=None, help="truncate polymer size (default: floor(2 eps n))")
    est.add_argument("--relaxed", action="store_true", help="accept oracle-only graphs")
    est.set_defaults(func=cmd_estimate)

    smp = sub.add_parser("sample", help="draw approximate Gibbs configurations")
    smp.add_argument("graph")
    smp.add_argument("matrix")
    smp.add_argument("-c", "--count", type=int, required=True)
    smp.add_argument("-e", "--eps", type=float, required=True)
    smp.add_argument("--seed", type=int, required=True)
    smp.add_argument("-o", "--out", required=True)
    smp.add_argument("--mode", choices=("lab", "strict"), default="lab")
    smp.add_argument("--format", choices=("kv", "json"), default="kv")
    smp.add_argument("--threads", type=int, default=1)
    smp.add_argument("--eps-model", type=float, default=None)
    smp.add_argument("--brute-force-budget", type=int, default=1 << 24)
    smp.add_argument("--size-cap", type=int, default=None)
    smp.add_argument("--relaxed", action="store_true")
    smp.set_defaults(func=cmd_sample)

    ver = sub.add_parser("verify", help="run the invariant self-check suites")
    ver.add_argument("level", choices=("quick", "full"), nargs="?", default="quick")
    ver.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (MatrixFormatError, GraphFormatError, InvalidAccuracyError, InvalidRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PremisesUnmetError as exc:
        print(f"premises unmet: {exc}", file=sys.stderr)
        return EXIT_PREMISES
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PolyspinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
