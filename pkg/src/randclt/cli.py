"""Command-line interface.

Subcommands: systems, jn, moments, distance, predict, bounds, audit, table, run.
Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, expansions, harness, moments, sphere
from .errors import NumericFailure, ParameterError
from .systems import KINDS, make_system, system_to_json


def _default_threads():
    env = os.environ.get("RANDCLT_THREADS")
    return int(env) if env else None


def _add_system_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--system", required=required, choices=KINDS, help="system kind")
    p.add_argument("--n", type=int, help="dimension")
    p.add_argument("--d", type=int, help="walsh cube dimension (n = 2^d - 1)")
    p.add_argument("--psi", help="shifted_periodic profile preset (cos2pi, triangle)")
    p.add_argument("--q", type=float, help="lacunary frequency ratio")
    p.add_argument("--m1", type=int, default=1, help="first lacunary frequency")
    p.add_argument("--freqs", help="explicit lacunary frequencies, comma separated")


def _system_from_args(args) -> "make_system":
    freqs = [int(v) for v in args.freqs.split(",")] if getattr(args, "freqs", None) else None
    return make_system(args.system, args.n, d=args.d, psi=args.psi,
                       frequencies=freqs, q=args.q, m1=args.m1)


def _emit(obj, args) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_grid(spec: str) -> np.ndarray:
    try:
        start, step, stop = (float(v) for v in spec.split(":"))
    except ValueError:
        raise ParameterError(f"bad grid {spec!r}; expected start:step:stop") from None
    if step <= 0 or stop < start:
        raise ParameterError(f"bad grid {spec!r}")
    return np.arange(start, stop + 0.5 * step, step)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="randclt",
        description="distances, expansions and bounds for sphere-averaged weighted sums",
    )
    ap.add_argument("--version", action="version", version=f"randclt {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("systems", help="inspect the system catalogue")
    p.add_argument("action", choices=["list"])

    p = sub.add_parser("jn", help="characteristic function of the first sphere coordinate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t-grid", required=True, help="start:step:stop")
    p.add_argument("--scaled", action="store_true",
                   help="evaluate at t*sqrt(n) and include the Gaussian approximant")
    p.add_argument("--out")

    p = sub.add_parser("moments", help="m_p / sigma_2p / xi moment report")
    _add_system_args(p)
    p.add_argument("--budget", default="exact", help='"exact" or a Monte Carlo sample count')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("distance", help="sphere-averaged distance estimate")
    _add_system_args(p)
    p.add_argument("--metric", required=True, choices=list(harness.METRICS))
    p.add_argument("--target", required=True, choices=list(harness.TARGETS))
    p.add_argument("--n-theta", type=int, default=2000)
    p.add_argument("--inner-budget", type=int, default=harness.DEFAULT_INNER_BUDGET)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("predict", help="expansion predictions")
    p.add_argument("--kind", required=True, choices=["thm11", "cor51", "prop42"])
    _add_system_args(p)
    p.add_argument("--budget", default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("bounds", help="lower-bound functionals")
    p.add_argument("--kind", required=True, choices=["thm12", "eq211", "eq81"])
    _add_system_args(p, required=False)
    p.add_argument("--T", type=float, help="integration cutoff (eq211 default 1, eq81 default 4n)")
    p.add_argument("--c1", type=float, default=expansions.THM12_C1_DEFAULT)
    p.add_argument("--c2", type=float, default=expansions.THM12_C2_DEFAULT)
    p.add_argument("--budget", default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("audit", help="named inequality audits")
    p.add_argument("--name", required=True, choices=sorted(harness.AUDITS))
    _add_system_args(p, required=False)
    p.add_argument("--n-list", help="comma-separated dimensions")
    p.add_argument("--targets", default="typical,normal")
    p.add_argument("--n-theta", type=int, default=1000)
    p.add_argument("--inner-budget", type=int, default=harness.DEFAULT_INNER_BUDGET)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out")

    p = sub.add_parser("table", help="preset experiment tables")
    p.add_argument("--preset", required=True, choices=["two_sided", "lacunary", "walsh"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-theta", type=int)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--m1", type=int, default=1)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("run", help="run a JSON experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the config output path")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--threads", type=int, default=_default_threads())

    return ap


def _cmd_systems(args) -> None:
    catalogue = []
    for kind, kw in [("trig", {"n": 8}), ("cosine", {"n": 8}), ("chebyshev", {"n": 8}),
                     ("shifted_periodic", {"n": 8}), ("walsh", {"d": 3}),
                     ("empirical", {"n": 8}), ("lacunary_trig", {"n": 8, "q": 2.0})]:
        catalogue.append(system_to_json(make_system(kind, **kw)))
    _emit({"systems": catalogue}, args)


def _cmd_jn(args) -> None:
    ts = _parse_grid(args.t_grid)
    if args.scaled:
        vals = sphere.jn_many(args.n, ts * math.sqrt(args.n))
        approx = sphere.jn_edgeworth(args.n, ts)
        rows = [{"t": float(t), "jn_scaled": float(v), "gaussian_approx": float(a)}
                for t, v, a in zip(ts, vals, approx)]
    else:
        vals = sphere.jn_many(args.n, ts)
        rows = [{"s": float(t), "jn": float(v)} for t, v in zip(ts, vals)]
    _emit({"n": args.n, "values": rows}, args)


def _parse_budget(text):
    return moments.EXACT if text == "exact" else int(text)


def _cmd_moments(args) -> None:
    system = _system_from_args(args)
    report = moments.moment_report(system, _parse_budget(args.budget), args.seed)
    _emit({"system": system_to_json(system), "report": report.to_json()}, args)


def _cmd_distance(args) -> None:
    system = _system_from_args(args)
    config = harness.ExperimentConfig(
        system={"kind": args.system, "params": dict(system.params) if args.system != "shifted_periodic"
                else {"psi": system.params["psi_name"]}},
        n_list=[system.n], seed=args.seed, metrics=[args.metric], targets=[args.target],
        n_theta=args.n_theta, inner_budget=args.inner_budget, threads=args.threads,
        output=args.out, format=args.format,
    )
    report = harness.run(config)
    if not args.out:
        if args.format == "csv":
            sys.stdout.write(report.csv_text())
        else:
            _emit(report.to_json(), args)


def _cmd_predict(args) -> None:
    system = _system_from_args(args)
    budget = _parse_budget(args.budget)
    if args.kind == "cor51":
        xi = moments.xi_functionals(system, budget, args.seed)
        pred = expansions.cor51_prediction(system, xi)
    elif args.kind == "prop42":
        pred = expansions.prop42_prediction(system, budget, args.seed)
    else:
        rep = moments.moment_report(system, budget, args.seed)
        pred = expansions.thm11_prediction(system, rep)
    _emit({"system": system_to_json(system), "prediction": pred.to_json()}, args)


def _cmd_bounds(args) -> None:
    if args.kind == "thm12":
        if not args.system:
            raise ParameterError("bounds --kind thm12 needs --system")
        system = _system_from_args(args)
        bound = expansions.thm12_lower_bound(system, _parse_budget(args.budget),
                                             args.c1, args.c2, args.seed)
        _emit({"system": system_to_json(system), "bound": bound.to_json()}, args)
        return
    if args.n is None:
        raise ParameterError(f"bounds --kind {args.kind} needs --n")
    n = args.n
    cf = lambda t: sphere.jn_many(n, np.asarray(t, dtype=float) * math.sqrt(n))
    if args.kind == "eq211":
        T = args.T if args.T else 1.0
        value = expansions.rho_lower_functional(cf, T)
        _emit({"bound": {"kind": "eq211_lower", "value": value, "params": {"n": n, "T": T}}}, args)
    else:  # eq81
        T = args.T if args.T else 4.0 * n
        gauss = lambda t: np.exp(-0.5 * np.square(np.asarray(t, dtype=float)))
        value = expansions.smoothing_functional(cf, gauss, T)
        _emit({"bound": {"kind": "eq81_smoothing", "value": value, "params": {"n": n, "T": T}}}, args)


def _cmd_audit(args) -> None:
    ctx = None
    if args.name not in harness.STANDALONE_AUDITS:
        if not args.system:
            raise ParameterError(f"audit {args.name!r} needs --system and --n-list/--n/--d")
        if args.n_list:
            n_list = [int(v) for v in args.n_list.split(",")]
        else:
            n_list = [_system_from_args(args).n]
        params = {}
        if args.d is not None:
            params["d"] = None  # d is recomputed from each n for walsh
        if args.psi:
            params["psi"] = args.psi
        if args.q:
            params["q"] = args.q
        config = harness.ExperimentConfig(
            system={"kind": args.system, "params": params}, n_list=n_list, seed=args.seed,
            targets=[t for t in args.targets.split(",") if t],
            n_theta=args.n_theta, inner_budget=args.inner_budget, threads=args.threads,
        )
        ctx = harness.AuditContext(config)
    results = harness.audit(args.name, ctx)
    _emit({"audits": [r.to_json() for r in results]}, args)


def _cmd_table(args) -> None:
    if args.preset == "lacunary":
        rows = harness.lacunary_table(args.q, args.n_max, args.m1)
        if args.format == "json":
            _emit({"schema": harness.LACUNARY_SCHEMA, "rows": rows}, args)
        else:
            text = harness.lacunary_csv(rows)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
        return
    if args.preset == "two_sided":
        config = harness.preset_two_sided(args.seed, args.n_theta or 2000, args.threads,
                                          args.out, args.format)
    else:
        config = harness.preset_walsh(args.seed, args.n_theta or 20000, args.threads,
                                      args.out, args.format)
    report = harness.run(config)
    if not args.out:
        if config.format == "csv":
            sys.stdout.write(report.csv_text())
        else:
            _emit(report.to_json(), args)


def _cmd_run(args) -> None:
    with open(args.config) as fh:
        obj = json.load(fh)
    if args.out:
        obj["output"] = args.out
    if args.format:
        obj["format"] = args.format
    if args.threads is not None:
        obj["threads"] = args.threads
    config = harness.ExperimentConfig.from_json(obj)
    report = harness.run(config)
    if not config.output:
        if config.format == "csv":
            sys.stdout.write(report.csv_text())
        else:
            sys.stdout.write(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")


_COMMANDS = {
    "systems": _cmd_systems,
    "jn": _cmd_jn,
    "moments": _cmd_moments,
    "distance": _cmd_distance,
    "predict": _cmd_predict,
    "bounds": _cmd_bounds,
    "audit": _cmd_audit,
    "table": _cmd_table,
    "run": _cmd_run,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _COMMANDS[args.command](args)
        return 0
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
