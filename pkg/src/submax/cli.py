"""Command line interface.

Subcommands:
  solve       one seeded run of one algorithm on one instance
  bench       a full (algo, k, repetition) grid with CSV/SVG reporting
  bruteforce  exhaustive optimum for desk-scale instances
  gen         write a synthetic instance to a data file

Exit codes: 0 on success, 1 on configuration or parse errors, 2 on I/O
errors. A flat key=value config file can seed the bench flags.
"""

from __future__ import annotations

import argparse
import sys
import time

from .bench import (
    ALGORITHMS,
    ExperimentSpec,
    SyntheticSpec,
    load_edge_list,
    load_similarity_csv,
    materialize_instance,
    render_svg,
    run_experiment,
    summarize,
    write_csv,
    write_instance,
)
from .config import DEFAULT_EPS, DEFAULT_FLIP_POINT, DEFAULT_REPS, SolverConfig
from .errors import ConfigError, ParseError, SubmaxError
from .objectives import (
    COVERAGE,
    CUT,
    FACILITY,
    brute_force_opt,
    gen_synthetic,
    make_handle,
    objective_value,
)
from .oracle import RngStream

OBJECTIVES = {"coverage": COVERAGE, "facility": FACILITY, "cut": CUT}


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--objective", choices=sorted(OBJECTIVES), default="coverage")
    p.add_argument("--data", help="similarity CSV or edge list; omit to use a synthetic instance")
    p.add_argument("--lambda", dest="lam", type=float, default=0.75,
                   help="diversity weight for the coverage objective")
    p.add_argument("--n", type=int, default=100, help="synthetic instance size")
    p.add_argument("--density", type=float, default=0.5, help="synthetic edge density")
    p.add_argument("--instance-seed", type=int, default=0, help="synthetic generation seed")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--ts", type=float, default=DEFAULT_FLIP_POINT,
                   help="flip point for the guided phase")
    p.add_argument("--p-mode", choices=["practical", "theoretical"], default="practical")
    p.add_argument("--seed", type=int, default=0)


def _load_instance(args):
    kind = OBJECTIVES[args.objective]
    if args.data:
        if kind == CUT:
            return load_edge_list(args.data)
        return load_similarity_csv(args.data, kind=kind, lam=args.lam)
    rng = RngStream.from_seed(args.instance_seed)
    return gen_synthetic(kind, args.n, rng, density=args.density, lam=args.lam)


def _parse_k_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad k list {text!r}") from None


def read_config_file(path) -> dict:
    """Flat key=value lines mirroring the bench flags; # starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"expected key=value, got {line!r}", lineno)
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _apply_config_file(args) -> None:
    conf = read_config_file(args.config)
    casts = {
        "objective": str, "data": str, "lambda": float, "n": int, "density": float,
        "instance_seed": int, "algo": str, "k": str, "eps": float, "ts": float,
        "p_mode": str, "reps": int, "seed": int, "out": str, "svg": str,
    }
    dests = {"lambda": "lam"}
    for key, raw in conf.items():
        norm = key.replace("-", "_")
        if norm not in casts:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(args, dests.get(norm, norm), casts[norm](raw))


def cmd_solve(args) -> int:
    inst = _load_instance(args)
    ks = _parse_k_list(args.k)
    if len(ks) != 1:
        raise ConfigError("solve takes a single k")
    if args.algo not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {args.algo!r}")
    cfg = SolverConfig(k=ks[0], eps=args.eps, t_s=args.ts, p_mode=args.p_mode, seed=args.seed)
    handle = make_handle(inst, cfg.k)
    t0 = time.perf_counter()
    sol, failed = ALGORITHMS[args.algo](handle, cfg)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    real = sorted(sol.strip_dummies(handle.ground))
    value = objective_value(inst, real)
    print(f"algo={args.algo} k={cfg.k} seed={cfg.seed}")
    print(f"value={value:.9g} queries={handle.ledger.queries} wall_ms={wall_ms:.3f} "
          f"failed={int(failed)}")
    print("elements=" + ",".join(map(str, real)))
    return 0


def cmd_bench(args) -> int:
    if args.config:
        _apply_config_file(args)
    if args.algo is None:
        raise ConfigError("bench requires --algo (comma list) or a config file")
    algos = [a.strip() for a in args.algo.split(",") if a.strip()]
    ks = _parse_k_list(args.k)
    if args.data:
        instance = _load_instance(args)
    else:
        instance = SyntheticSpec(
            kind=OBJECTIVES[args.objective],
            n=args.n,
            density=args.density,
            lam=args.lam,
            instance_seed=args.instance_seed,
        )
    spec = ExperimentSpec(
        instance=instance,
        algos=algos,
        ks=ks,
        eps=args.eps,
        t_s=args.ts,
        p_mode=args.p_mode,
        reps=args.reps,
        master_seed=args.seed,
    )
    records = run_experiment(spec)
    table = summarize(records)
    for row in table:
        print(f"{row.algo:>14s} k={row.k:<4d} mean={row.mean_value:.6g} "
              f"std={row.std_value:.4g} queries={row.mean_queries:.4g} "
              f"fail={row.failure_rate:.3f}")
    if args.out:
        write_csv(records, args.out)
        print(f"records -> {args.out}")
    if args.svg:
        render_svg(table, args.svg)
        print(f"plot -> {args.svg}")
    return 0


def cmd_bruteforce(args) -> int:
    inst = _load_instance(args)
    ks = _parse_k_list(args.k)
    if len(ks) != 1:
        raise ConfigError("bruteforce takes a single k")
    handle = make_handle(inst, ks[0])
    cert = brute_force_opt(handle, ks[0])
    ids = sorted(cert.opt_set.elements)
    print(f"opt_value={cert.opt_value:.9g}")
    print("opt_set=" + ",".join(map(str, ids)))
    print(f"enumerated={cert.enumerated}")
    return 0


def cmd_gen(args) -> int:
    kind = OBJECTIVES[args.objective]
    rng = RngStream.from_seed(args.seed)
    inst = gen_synthetic(
        kind, args.n, rng,
        density=args.density, lam=args.lam,
        weight_range=(args.weight_lo, args.weight_hi),
    )
    write_instance(inst, args.out)
    print(f"{kind} n={args.n} -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="submax", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one algorithm once")
    _add_instance_flags(p)
    _add_solver_flags(p)
    p.add_argument("--algo", default="main", help="algorithm name")
    p.add_argument("--k", required=True, help="cardinality bound")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="seeded experiment grid")
    _add_instance_flags(p)
    _add_solver_flags(p)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--algo", help="comma-separated algorithm names")
    p.add_argument("--k", default="10", help="comma-separated k sweep")
    p.add_argument("--reps", type=int, default=DEFAULT_REPS)
    p.add_argument("--out", help="write per-run records CSV here")
    p.add_argument("--svg", help="write the value-vs-k plot here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("bruteforce", help="exhaustive optimum (small n only)")
    _add_instance_flags(p)
    p.add_argument("--k", required=True)
    p.set_defaults(func=cmd_bruteforce)

    p = sub.add_parser("gen", help="write a synthetic instance to file")
    p.add_argument("--objective", choices=sorted(OBJECTIVES), default="cut")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", type=float, default=0.75)
    p.add_argument("--weight-lo", type=float, default=0.0)
    p.add_argument("--weight-hi", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SubmaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
