"""Command line: ``qcburk {verify,solve,table}``.

Exit codes: 0 all verdicts pass/equality, 1 usage or I/O error, 2 a check
failed, 3 the solver did not converge.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import fields
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .beltrami import GridField, area_integral, solve_principal
from .errors import NonConvergence, QCError
from .fieldio import write_field
from .reports import jsonable, to_csv, to_json
from .suites import Row, RunConfig, parse_mu, run_suite

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_NONCONV = 0, 1, 2, 3
SUITE_NAMES = ("core", "radial", "solver", "inequalities", "interpolation", "all")
TABLES = ("lp-mean", "llogl", "expint", "loginv", "main")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--grid", type=int, dest="N", help="grid size N (power of two)")
    common.add_argument("--box", type=float, dest="L", help="half-width L of the periodic box")
    common.add_argument("--tol", type=float, help="solver residual tolerance")
    common.add_argument("--seed", type=int)
    common.add_argument("--mu", help="KIND[:key=value,...]: zero, const, radial, random, file:PATH")
    common.add_argument("--packing", help="packing spec (JSON)")
    common.add_argument("--p", type=_floats, help="exponent or comma-separated list")
    common.add_argument("--K", type=float)
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--config", help="JSON config; flags override its keys")
    common.add_argument("--k-cap", type=float, dest="k_cap")

    ap = _Parser(prog="qcburk", description="Burkholder functionals, Beltrami solver and sharp inequality checks")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", parents=[common], help="run a verification battery")
    v.add_argument("suite", choices=SUITE_NAMES)
    v.add_argument("--family", choices=("counterexample",), help="interpolation: run a single family")
    v.add_argument("--probes", type=int, help="rank-one probes for the core battery")
    sub.add_parser("solve", parents=[common], help="solve for a principal solution and write fields")
    t = sub.add_parser("table", parents=[common], help="parameter sweep for one inequality")
    t.add_argument("inequality", choices=TABLES)
    return ap


def make_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    names = {f.name for f in fields(RunConfig)}
    if getattr(ns, "config", None):
        try:
            doc = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config: {e}")
        alias = {"grid": "N", "box": "L", "k-cap": "k_cap"}
        for k, val in doc.items():
            k = alias.get(k, k)
            if k not in names:
                raise UsageError(f"unknown config key {k!r}")
            if k == "p" and not isinstance(val, list):
                val = [val]
            setattr(cfg, k, val)
    for k in names:
        val = getattr(ns, k, None)
        if val is not None and k != "command":
            setattr(cfg, k, val)
    cfg.spec()
    if cfg.command == "solve" and not cfg.mu:
        raise UsageError("solve needs --mu")
    return cfg


def _emit(cfg: RunConfig, rows, stem: str, extra=None) -> None:
    text = to_csv(rows) if cfg.format == "csv" else to_json(rows, extra)
    if cfg.out:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{stem}.{cfg.format}").write_text(text)
    else:
        sys.stdout.write(text)


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    rows = run_suite(suite, cfg)
    _emit(cfg, rows, f"verify-{suite}", {"config": cfg.record(), "suite": suite})
    return EXIT_FAIL if any(r.verdict == "fail" for r in rows) else EXIT_OK


def cmd_solve(cfg: RunConfig) -> int:
    spec = cfg.spec()
    mu = parse_mu(cfg.mu, spec, np.random.default_rng(cfg.seed), cfg.k_cap)
    sol = solve_principal(mu, cfg.tol)
    summary = jsonable({
        "mu": cfg.mu, "N": spec.N, "L": spec.L, "k": mu.k, "iterations": sol.iterations,
        "residual": sol.residual, "b1": complex(sol.b1), "area_integral": area_integral(sol),
    })
    if cfg.out:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        absdf = np.abs(sol.fz) + np.abs(sol.fzbar)
        for name, vals in (("omega", sol.omega.values), ("s_omega", sol.s_omega.values), ("absdf", absdf),
                           ("jacobian", sol.jacobian())):
            write_field(d / f"{name}.qcgf", GridField(spec, np.asarray(vals, complex)))
        (d / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _table_rows(cfg: RunConfig, inequality: str):
    from .inequalities import check_expint, check_llogl, check_loginv, check_lp_mean, check_main_inequality
    from .radial import RadialCoefficient, RadialProfile

    K = cfg.K or 2.0
    if inequality == "lp-mean":
        grid = [("p", p, lambda p=p: check_lp_mean(RadialProfile.power(K), K, p))
                for p in (cfg.p or [2.0, 2.5, 3.0, 3.5])]
    elif inequality == "llogl":
        grid = [("K", k, lambda k=k: check_llogl(RadialProfile.power(k))) for k in (cfg.p or [1.5, 2.0, 3.0])]
    elif inequality == "loginv":
        grid = [("K", k, lambda k=k: check_loginv(RadialProfile.monomial(k))) for k in (cfg.p or [1.5, 2.0, 3.0])]
    elif inequality == "expint":
        grid = [("a", a, lambda a=a: check_expint(RadialCoefficient.constant(a)))
                for a in (cfg.p or [0.0, 0.25, 0.5, 0.75])]
    else:
        prof = RadialProfile.blend(0.5, 2.0)
        ps = cfg.p or [2.0, 2.5, 3.0, 3.5, 4.0]
        grid = [("p", p, lambda p=p: check_main_inequality(prof, p)) for p in ps]
    rows = []
    for name, val, run in grid:
        try:
            r = run()
            r.params = {name: val, **{k: v for k, v in r.params.items() if k != name}}
        except QCError as e:
            r = Row(inequality, math.nan, math.nan, math.nan, {name: val}, "error", f"{type(e).__name__}: {e}")
        rows.append(r)
    return rows


def cmd_table(cfg: RunConfig, inequality: str) -> int:
    rows = _table_rows(cfg, inequality)
    if cfg.format == "json":
        _emit(cfg, rows, f"table-{inequality}", {"config": cfg.record()})
    else:
        _emit(cfg, rows, f"table-{inequality}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = make_config(ns)
        if ns.command == "verify":
            return cmd_verify(cfg, ns.suite)
        if ns.command == "solve":
            return cmd_solve(cfg)
        return cmd_table(cfg, ns.inequality)
    except UsageError as e:
        print(f"qcburk: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergence as e:
        print(f"qcburk: solver did not converge: {e}", file=sys.stderr)
        print(json.dumps({"residual_history": list(e.history)}), file=sys.stderr)
        return EXIT_NONCONV
    except (QCError, OSError) as e:
        print(f"qcburk: error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
