"""Command-line front end.

Every command writes a machine-readable JSON summary (with a ``schema``
field and the tolerances/truncations used) next to any tabular artifact,
and is byte-deterministic for a fixed seed.  Exit codes: 2 for config
errors, 3 for domain errors, 4 for numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import asymptotics, exact, gitn, invariant, vlmc
from .chain import simulate_path
from .config import hazard_from_config, load_comb, load_model
from .errors import ConfigError, ConvergenceError, DomainError
from .model import ChainState, PLUS
from .rng import DEFAULT_SEED, make_rng


def _write_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _summary_path(out: str) -> str:
    return f"{out}.summary.json"


def cmd_simulate(args) -> int:
    spec = load_model(args.model)
    init = ChainState(args.init_letter, args.init_memory)
    traj = simulate_path(spec, init, args.n, seed=args.seed)
    if args.format == "json":
        from .model import INFINITE_MEMORY

        _write_json(
            {
                "schema": 1,
                "command": "simulate",
                "seed": args.seed,
                "letters": [int(x) for x in traj.letters],
                "memories": [
                    None if m == INFINITE_MEMORY else int(m) for m in traj.memories
                ],
                "sums": [int(s) for s in traj.sums] if spec.is_walk else None,
            },
            args.out,
        )
    else:
        traj.to_csv(args.out)
    _write_json(
        {
            "schema": 1,
            "command": "simulate",
            "model": str(args.model),
            "n": args.n,
            "seed": args.seed,
            "format": args.format,
            "init": {"letter": args.init_letter, "memory": args.init_memory},
            "rows": args.n + 1,
        },
        _summary_path(args.out),
    )
    return 0


def cmd_exact(args) -> int:
    spec = load_model(args.model)
    if args.action == "phi":
        if args.lam is None or args.rho is None:
            raise ConfigError("exact phi needs --lambda and --rho")
        value = exact.phi_s_tau(spec, args.lam, args.rho)
        _write_json(
            {
                "schema": 1,
                "command": "exact phi",
                "lambda": args.lam,
                "rho": args.rho,
                "phi": value,
            },
            args.out,
        )
        return 0
    if args.n is None:
        raise ConfigError("exact needs --n for the fixed-time law")
    table = exact.eta(spec, args.n)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "eta", "S"])
            for k in range(args.n + 1):
                w.writerow([k, repr(float(table.eta[k])), 1 + 2 * k - args.n])
        _write_json(
            {
                "schema": 1,
                "command": "exact",
                "model": str(args.model),
                "n": args.n,
                "normalisation_defect": float(abs(table.eta.sum() - 1.0)),
                "notes": table.notes,
            },
            _summary_path(args.out),
        )
    else:
        _write_json(
            {
                "schema": 1,
                "command": "exact",
                "n": args.n,
                "eta": [float(x) for x in table.eta],
                "s_values": [int(s) for s in table.s_values()],
            },
            None,
        )
    return 0


def cmd_stationary(args) -> int:
    spec = load_model(args.model)
    measure = invariant.stationary_measure(spec, tol=args.tol)
    payload = measure.to_json_dict()
    payload["command"] = "stationary"
    payload["tolerance"] = args.tol
    payload["stationarity_residual"] = invariant.stationarity_residual(spec, measure)
    _write_json(payload, args.out)
    return 0


def cmd_vlmc(args) -> int:
    if args.action == "pi":
        if args.comb is None:
            raise ConfigError("vlmc pi needs --comb")
        tree = load_comb(args.comb)
        measure = vlmc.double_comb_stationary(tree, a=args.a, b=args.b)
        _write_json(
            {
                "schema": 1,
                "command": "vlmc pi",
                "word": args.word,
                "branch": measure.branch,
                "pi": measure.pi(args.word),
                "pi10": measure.pi10,
                "mass_zero_inf": measure.mass_zero_inf,
                "mass_one_inf": measure.mass_one_inf,
                "partition_gap": measure.partition_gap(),
            },
            args.out,
        )
        return 0
    if args.model is None:
        raise ConfigError("vlmc check needs --model")
    spec = load_model(args.model)
    entries = vlmc.consistency_nu_pi(spec)
    _write_json(
        {
            "schema": 1,
            "command": "vlmc check",
            "entries": [
                {"comb": e.comb_kind, "nu": e.nu_value, "pi": e.pi_value, "gap": e.gap}
                for e in entries
            ],
        },
        args.out,
    )
    return 0


def cmd_asymptotics(args) -> int:
    spec = load_model(args.model)
    report = asymptotics.clt_check(spec, args.n, args.replicas, make_rng(args.seed))
    payload = report.to_json_dict()
    payload["command"] = "asymptotics"
    payload["seed"] = args.seed
    _write_json(payload, args.out)
    return 0


def cmd_gitn(args) -> int:
    f1 = hazard_from_config(args.f1)
    f2 = hazard_from_config(args.f2)
    if args.action == "sample":
        if args.out is None:
            raise ConfigError("gitn sample needs --out")
        path = gitn.sample_gitn(f1, f2, args.horizon, make_rng(args.seed))
        with open(args.out, "w", newline="\n") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "epoch", "S", "slope_after"])
            epochs = path.epochs
            for i, t in enumerate(epochs, start=1):
                w.writerow([i, repr(float(t)), repr(float(path.position(t))), (-1) ** i])
        _write_json(
            {
                "schema": 1,
                "command": "gitn sample",
                "f1": args.f1,
                "f2": args.f2,
                "horizon": args.horizon,
                "seed": args.seed,
                "jumps": int(len(path.epochs)),
            },
            _summary_path(args.out),
        )
        return 0
    if args.action == "laplace":
        method = "closed" if args.closed_form else args.method
        value = gitn.double_laplace(f1, f2, args.r, args.gamma, method=method)
        _write_json(
            {
                "schema": 1,
                "command": "gitn laplace",
                "f1": args.f1,
                "f2": args.f2,
                "r": args.r,
                "gamma": args.gamma,
                "method": method,
                "value": value,
            },
            args.out,
        )
        return 0
    eps_list = [float(e) for e in args.eps.split(",")]
    report = gitn.convergence_check(
        f1, f2, eps_list, args.replicas, make_rng(args.seed), t_max=args.t_max
    )
    payload = report.to_json_dict()
    payload["command"] = "gitn converge"
    payload["seed"] = args.seed
    _write_json(payload, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persistwalk",
        description="Persistent random walks with variable-length memory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a letter/memory path")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--init-letter", type=int, default=PLUS)
    p.add_argument("--init-memory", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact", help="exact law of the walk (or phi at a geometric time)")
    p.add_argument("action", nargs="?", choices=["law", "phi"], default="law")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("stationary", help="invariant measure of the chain")
    p.add_argument("--model", required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("vlmc", help="comb-tree stationary measures")
    p.add_argument("action", choices=["pi", "check"])
    p.add_argument("--comb")
    p.add_argument("--model")
    p.add_argument("--word", default="")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_vlmc)

    p = sub.add_parser("asymptotics", help="drift, fluctuation constant, CLT check")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--replicas", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("gitn", help="scaling limit: sampling, Laplace, convergence")
    p.add_argument("action", choices=["sample", "laplace", "converge"])
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p.add_argument("--horizon", type=float, default=20.0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.4)
    p.add_argument("--method", choices=["auto", "closed", "quadrature"], default="auto")
    p.add_argument("--closed-form", action="store_true")
    p.add_argument("--eps", default="1e-2,1e-3")
    p.add_argument("--replicas", type=int, default=10_000)
    p.add_argument("--t-max", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gitn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
