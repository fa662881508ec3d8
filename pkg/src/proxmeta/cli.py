"""Command line entry point: ``proxmeta {moduli,run,verify,cover}``.

Exit codes: 0 ok, 1 verification failed, 2 config error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import engine, moduli
from .config import ConfigError, builtin_scenario_dir, load_config, load_scenarios
from .geometry import GeometryError, ball_total_boundedness_modulus
from .rates import RateError, RateFn, as_fraction, nat_str
from .verify import CounterexampleFn, default_catalog, run_grid

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parse_g(text):
    if text is None:
        return CounterexampleFn.constant(0)
    try:
        node = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"--g: invalid JSON: {exc}") from None
    try:
        if "op" in node:
            return CounterexampleFn("custom", RateFn.from_json(node))
        return CounterexampleFn.from_json(node)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_CONFIG, f"--g: {exc}") from None


def _load(path):
    try:
        return load_config(path)
    except ConfigError as exc:
        raise CliError(EXIT_CONFIG, f"config error in {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_CONFIG, f"cannot read config: {exc}") from None


def cmd_moduli(args) -> int:
    sc = _load(args.config)
    ctx = sc.context()
    k = args.k
    g = _parse_g(args.g)
    out = {}
    try:
        out["delta_liminf"] = nat_str(moduli.delta_liminf(sc.b, k, args.L))
        out["beta"] = nat_str(moduli.beta_rate(sc.b, sc.schedule.theta, k))
        dF, wF = moduli.closedness_moduli(k)
        out["closedness"] = f"{dF} {wF}"
        out["fejer"] = nat_str(moduli.fejer_modulus(args.n, args.m, args.r))
        out["phi"] = nat_str(moduli.approx_point_modulus(ctx, k))
        for name, fn in (("psi", moduli.psi_rate), ("omega", moduli.omega_rate)):
            try:
                out[name] = nat_str(fn(ctx, k, g.fn, force=args.force, max_bits=args.max_bits))
            except moduli.DepthGuardError as exc:
                out[name] = f"refused: {exc}"
            except RateError as exc:
                out[name] = f"refused: {exc}"
    except RateError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    if args.format == "json":
        print(json.dumps(out, indent=1))
    else:
        for key, val in out.items():
            print(f"{key} {val}")
    return EXIT_OK


def cmd_run(args) -> int:
    sc = _load(args.config)
    try:
        traj = engine.run(sc, args.steps)
    except engine.EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    try:
        fh = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from None
    try:
        if args.format == "csv":
            engine.write_csv(traj, fh)
        else:
            engine.write_json(traj, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_verify(args) -> int:
    path = Path(args.config) if args.config else builtin_scenario_dir()
    if not path.exists():
        raise CliError(EXIT_CONFIG, f"{path} does not exist")
    try:
        scenarios = load_scenarios(path)
    except ConfigError as exc:
        raise CliError(EXIT_CONFIG, f"config error in {exc}") from None
    if not scenarios:
        raise CliError(EXIT_CONFIG, "no scenarios")
    catalog = default_catalog()
    if args.g:
        wanted = set(args.g.split(","))
        catalog = [g for g in catalog if g.name.split("(")[0] in wanted]
        if not catalog:
            raise CliError(EXIT_CONFIG, f"--g selects nothing from the catalog: {args.g}")
    omega_max = args.k_max if args.omega_k_max is None else args.omega_k_max
    reports = run_grid(
        scenarios, range(args.k_max + 1), range(omega_max + 1), catalog,
        search_cap=args.search_cap, workers=args.workers,
    )
    text = json.dumps([r.to_json() for r in reports], indent=1)
    if args.out in (None, "-"):
        print(text)
    else:
        try:
            Path(args.out).write_text(text + "\n")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from None
    failed = [r for r in reports if not r.holds]
    for r in failed:
        print(f"FAIL {r.scenario} {r.rate} k={r.k} g={r.g}: {r.diagnostic}", file=sys.stderr)
    print(f"{len(reports) - len(failed)}/{len(reports)} trials hold", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_cover(args) -> int:
    if args.config:
        sc = _load(args.config)
        dim, b = sc.space.dimension, sc.b
    else:
        if args.dimension is None or args.b is None:
            raise CliError(EXIT_CONFIG, "cover needs --config or both --dimension and --b")
        dim = args.dimension
        try:
            b = as_fraction(args.b)
        except (ValueError, ZeroDivisionError) as exc:
            raise CliError(EXIT_CONFIG, f"--b: {exc}") from None
    try:
        alpha = ball_total_boundedness_modulus(dim, b)
    except GeometryError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    for k in range(args.k_max + 1):
        print(f"{k} {nat_str(alpha(k))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxmeta", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("moduli", help="print exact moduli for a scenario")
    m.add_argument("--config", required=True)
    m.add_argument("--k", type=int, default=0)
    m.add_argument("--g", help="JSON catalog entry or rate AST (default: constant 0)")
    m.add_argument("--L", type=int, default=0)
    m.add_argument("--n", type=int, default=0)
    m.add_argument("--m", type=int, default=0)
    m.add_argument("--r", type=int, default=0)
    m.add_argument("--format", choices=("plain", "json"), default="plain")
    m.add_argument("--force", action="store_true", help="ignore the recursion-depth guard")
    m.add_argument("--max-bits", type=int, default=1 << 20)
    m.set_defaults(func=cmd_moduli)

    r = sub.add_parser("run", help="run the proximal point algorithm")
    r.add_argument("--config", required=True)
    r.add_argument("--steps", type=int, default=100)
    r.add_argument("--out")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="certify metastability rates on a scenario grid")
    v.add_argument("--config", help="config file or directory (default: shipped suite)")
    v.add_argument("--k-max", type=int, default=5)
    v.add_argument("--omega-k-max", type=int, default=3)
    v.add_argument("--g", help="comma-separated catalog names: constant,identity_plus,doubling,table")
    v.add_argument("--search-cap", type=int, default=10**4)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cover", help="print the total-boundedness modulus alpha(k)")
    c.add_argument("--config")
    c.add_argument("--dimension", type=int)
    c.add_argument("--b")
    c.add_argument("--k-max", type=int, default=10)
    c.set_defaults(func=cmd_cover)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
