"""Command-line front end.

Exit status: 0 when a command ran to completion (Unknown verdicts included),
1 for usage or parse errors, 2 when an internal cross-check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import clp_engine as ce
from . import machines as mc
from .gallery import load_machine_dir, run_gallery, to_json, verdict_json
from .numerics import crn_approx, crn_order_of_apart, FuelExhausted
from .problem import ParseError, load_problem, parse_expr, resolve_machine
from .simplex import Infeasible, LpError, Optimal, Unbounded, solve_rational_lp

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def _emit(obj, out) -> None:
    out.write(json.dumps(to_json(obj), sort_keys=True) + "\n")


def _outcome_json(outcome) -> dict:
    if isinstance(outcome, Optimal):
        return {"status": "optimal", "value": outcome.value, "plan": outcome.plan, "pivots": outcome.pivots}
    if isinstance(outcome, Unbounded):
        return {"status": "unbounded", "point": outcome.point, "ray": outcome.ray, "pivots": outcome.pivots}
    assert isinstance(outcome, Infeasible)
    return {"status": "infeasible", "phase1_value": outcome.phase1_value, "pivots": outcome.pivots}


def _environment(pf, extra: dict[str, mc.StepMachine]) -> dict[str, mc.StepMachine]:
    env = pf.environment(extra)
    missing = pf.clpp.machine_refs() - set(env)
    if missing:
        raise UsageError(f"unbound machine(s): {', '.join(sorted(missing))}")
    return env


def _machine_env(machine_dir: str | None, binds: Sequence[str]) -> dict[str, mc.StepMachine]:
    env: dict[str, mc.StepMachine] = {}
    if machine_dir is not None:
        if not Path(machine_dir).is_dir():
            raise UsageError(f"no such machine directory: {machine_dir}")
        found, errors = load_machine_dir(machine_dir)
        for name, err in errors.items():
            print(f"warning: skipping machine {name}: {err}", file=sys.stderr)
        env.update(found)
    for b in binds:
        name, sep, spec = b.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--bind expects NAME=SPEC, got {b!r}")
        env[name.strip()] = resolve_machine(spec.strip(), ".", name.strip())
    return env


def _parse_plan(text: str, variables: Sequence[str]) -> dict[str, Fraction]:
    plan = {}
    for part in text.split(","):
        name, sep, val = part.partition("=")
        if not sep:
            raise UsageError(f"plan entries look like x=1/2, got {part!r}")
        plan[name.strip()] = _fraction(val)
    unknown = set(plan) - set(variables)
    missing = set(variables) - set(plan)
    if unknown or missing:
        raise UsageError(f"plan must assign exactly {', '.join(variables)}")
    return plan


# -- commands -----------------------------------------------------------------


def cmd_solve_rational(args, out) -> int:
    pf = load_problem(args.file)
    if not pf.clpp.is_rational():
        raise UsageError("problem mentions machine sequences; use 'analyze'")
    lp = ce.to_rational_lp(pf.clpp)
    outcome = solve_rational_lp(lp)
    rec = _outcome_json(outcome)
    rec["variables"] = list(pf.clpp.variables)
    _emit(rec, out)
    return EXIT_OK


def cmd_analyze(args, out) -> int:
    extra = _machine_env(args.machines, args.bind)
    pf = load_problem(args.file, set(extra))
    p = pf.clpp
    env = _environment(pf, extra)
    fuel = args.fuel
    plan = _parse_plan(args.plan, p.variables) if args.plan else None

    def record(kind, v):
        rec = {"kind": kind, "fuel": fuel, "verdict": verdict_json(v)}
        if isinstance(v, ce.Decided):
            rec["certificate"] = v.certificate
            rec["fuel_used"] = v.fuel_used
        _emit(rec, out)

    record("feasibility", ce.decide_feasibility(p, fuel, env))
    record("boundedness", ce.decide_boundedness(p, fuel, env))
    vb = ce.value_bounds(p, fuel, env)
    _emit({"kind": "value_bounds", "fuel": fuel, "bounds": [vb.lower, vb.upper]}, out)
    if plan is not None:
        record("plan_feasible", ce.check_plan_feasible(p, plan, fuel, env))
        record("plan_optimal", ce.check_plan_optimal(p, plan, fuel, env))

    # an all-rational problem can be checked against the exact solver directly
    if p.is_rational():
        exact = solve_rational_lp(ce.to_rational_lp(p))
        feas = ce.decide_feasibility(p, fuel, env)
        want = "infeasible" if isinstance(exact, Infeasible) else "feasible"
        if isinstance(feas, ce.Decided) and feas.answer != want:
            print(f"invariant violated: feasibility {feas.answer} but exact solver says {want}", file=sys.stderr)
            return EXIT_INVARIANT
    return EXIT_OK


def cmd_gallery(args, out) -> int:
    mdir = Path(args.machines)
    if not mdir.is_dir():
        raise UsageError(f"no such machine directory: {mdir}")
    machines, errors = load_machine_dir(mdir)
    families = args.families.split(",") if args.families else ce.FAMILIES
    bad = [f for f in families if f not in ce.FAMILIES]
    if bad:
        raise UsageError(f"unknown families: {', '.join(bad)}")
    report = run_gallery(machines, range(1, args.n_max + 1), args.fuel, families, errors)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            report.write(fh, with_time=not args.no_time)
    else:
        report.write(out, with_time=not args.no_time)
    for s in report.surprises:
        print(f"note: {s}", file=sys.stderr)
    if not report.ok:
        for m in report.mismatches:
            print(f"mismatch: {m}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _decimal(q: Fraction, digits: int) -> str:
    # round half away from zero at the requested number of places
    scaled = abs(q) * 10**digits
    n = int(scaled + Fraction(1, 2))
    sign = "-" if q < 0 and n else ""
    whole, frac = divmod(n, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"


def cmd_approx(args, out) -> int:
    eps = _fraction(args.eps)
    if eps <= 0:
        raise UsageError("--eps must be positive")
    env = _machine_env(args.machines, args.bind)
    e = parse_expr(args.expr, set(env))
    q = crn_approx(ce.eval_expr(e, env), eps)
    digits = 0  # ceil(log10(1/eps)), computed exactly
    while Fraction(1, 10**digits) > eps:
        digits += 1
    out.write(f"{q}\n{_decimal(q, digits)}\n")
    return EXIT_OK


def cmd_order(args, out) -> int:
    env = _machine_env(args.machines, args.bind)
    known = set(env)
    x = ce.eval_expr(parse_expr(args.x, known), env)
    y = ce.eval_expr(parse_expr(args.y, known), env)
    try:
        o = crn_order_of_apart(x, y, max_fuel=args.max_fuel)
    except FuelExhausted:
        out.write(f"unknown (no separation up to fuel {args.max_fuel})\n")
        return EXIT_OK
    out.write(f"{o.name.lower()}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clp", description="Constructive linear programming workbench.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve-rational", help="solve an all-rational problem exactly")
    s.add_argument("file")
    s.set_defaults(func=cmd_solve_rational)

    a = sub.add_parser("analyze", help="run the semi-deciders on a problem file")
    a.add_argument("file")
    a.add_argument("--fuel", type=int, required=True)
    a.add_argument("--plan", help='candidate plan, e.g. "x=1,y=1/2"')
    a.add_argument("--machines", help="directory of machine specs")
    a.add_argument("--bind", action="append", default=[], metavar="NAME=SPEC")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("gallery", help="run every family against a machine directory")
    g.add_argument("--machines", required=True)
    g.add_argument("--n-max", type=int, default=1)
    g.add_argument("--fuel", type=int, required=True)
    g.add_argument("--families", help="comma-separated subset of " + ",".join(ce.FAMILIES))
    g.add_argument("--out", help="write JSONL here instead of stdout")
    g.add_argument("--no-time", action="store_true", help="omit wall_ms for byte-stable output")
    g.set_defaults(func=cmd_gallery)

    x = sub.add_parser("approx", help="print an approximation of an expression")
    x.add_argument("expr")
    x.add_argument("--eps", required=True, help="tolerance as p/q")
    x.add_argument("--machines")
    x.add_argument("--bind", action="append", default=[], metavar="NAME=SPEC")
    x.set_defaults(func=cmd_approx)

    o = sub.add_parser("order", help="search for the order of two apart expressions")
    o.add_argument("x")
    o.add_argument("y")
    o.add_argument("--max-fuel", type=int, default=64)
    o.add_argument("--machines")
    o.add_argument("--bind", action="append", default=[], metavar="NAME=SPEC")
    o.set_defaults(func=cmd_order)
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(args, "fuel", 0) is not None and getattr(args, "fuel", 0) < 0:
        print("error: --fuel must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, mc.MachineError, LpError, ce.UnresolvedMachine, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
