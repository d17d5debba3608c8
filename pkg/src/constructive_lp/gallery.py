"""Empirical harness: every counterexample family against a set of machines.

For each family, machine, input n and fuel in a doubling schedule, the
matching semi-deciders are run and one record per (query, fuel) is emitted.
Every decided verdict is compared with the exact answer whenever the
machine's halting behaviour can be established by simulation; the harness
also checks that verdicts never regress or flip as fuel grows and that value
bounds nest.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

from . import clp_engine as ce
from . import machines as mc
from .numerics import Interval, Unknown, coarse_locate, crn_approx, crn_from_rational, dyadic, locate_halves
from .simplex import Optimal, Unbounded

VALUE_EPS = dyadic(16)

# queries whose answer encodes halting; for a non-halting machine they must stay Unknown
UNDECIDABLE = {
    ("P", "plan_feasible[x=1]"),
    ("P", "plan_optimal[x=0]"),
    ("Q", "boundedness"),
    ("R", "feasibility"),
    ("T", "diagnose"),
}

# attached to every record of the family so readers of the report see it
FAMILY_NOTES = {
    "T": "s*x = 0 with x = 1 is feasible exactly when s = 0, i.e. when the machine never halts "
    "on input n; verdicts follow these constraints",
}


def doubling_schedule(cap: int) -> list[int]:
    fuels, f = [], 1
    while f < cap:
        fuels.append(f)
        f *= 2
    if cap >= 1:
        fuels.append(cap)
    return fuels


def to_json(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, Interval):
        return [str(value.lo), str(value.hi)]
    if isinstance(value, (list, tuple)):
        return [to_json(v) for v in value]
    if isinstance(value, dict):
        return {str(k): to_json(v) for k, v in value.items()}
    return value


def verdict_json(v) -> Any:
    if isinstance(v, Unknown):
        return "unknown"
    return v.answer


@dataclass
class Report:
    records: list[dict] = field(default_factory=list)
    mismatches: list[str] = field(default_factory=list)
    surprises: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def sorted_records(self) -> list[dict]:
        key = lambda r: (r["family"], r["machine"], r["n"], r["fuel"], r["kind"])  # noqa: E731
        return sorted(self.records, key=key)

    def lines(self, with_time: bool = True) -> list[str]:
        out = []
        for r in self.sorted_records():
            r = dict(r)
            if not with_time:
                r.pop("wall_ms", None)
            out.append(json.dumps(to_json(r), sort_keys=True))
        return out

    def write(self, stream, with_time: bool = True) -> None:
        for line in self.lines(with_time):
            stream.write(line + "\n")


def _queries(kind: str) -> list[tuple[str, Callable, Any]]:
    """(query name, runner(p, fuel, env), plan or None)."""
    feas = ("feasibility", ce.decide_feasibility, None)
    bnd = ("boundedness", ce.decide_boundedness, None)
    diag = ("diagnose", ce.diagnose_unsolvable, None)

    def plan_q(name, fn, plan):
        return (f"{name}[{','.join(f'{k}={v}' for k, v in plan.items())}]", _plan_runner(fn), plan)

    pf, po = ce.check_plan_feasible, ce.check_plan_optimal
    if kind == "P":
        return [
            feas,
            plan_q("plan_feasible", pf, {"x": 0}),
            plan_q("plan_feasible", pf, {"x": 1}),
            plan_q("plan_optimal", po, {"x": 0}),
            plan_q("plan_optimal", po, {"x": 1}),
        ]
    if kind == "H":
        return [bnd]
    if kind == "Q":
        return [feas, bnd]
    if kind == "R":
        return [feas]
    if kind == "T":
        return [diag]
    if kind == "D":
        return [feas, plan_q("plan_feasible", pf, {"x": 0}), plan_q("plan_feasible", pf, {"x": 1})]
    raise ValueError(kind)


def _truth_for(query: str, lp, plan, variables) -> Any:
    base = query.split("[", 1)[0]
    vec = None if plan is None else tuple(Fraction(plan[v]) for v in variables)
    return ce.truth(base, lp, vec)


def _check_bounds_nesting(prev: ce.ValueBounds | None, cur: ce.ValueBounds) -> bool:
    lo, hi = cur.as_pair()
    if lo > hi:
        return False
    if prev is None:
        return True
    plo, phi = prev.as_pair()
    return plo <= lo and hi <= phi


def run_instance(
    kind: str,
    name: str,
    machine: mc.StepMachine,
    n: int,
    fuels: Iterable[int],
    report: Report,
    truth_cap: int = 100_000,
) -> None:
    p = ce.family(kind, name, n)
    env = {name: machine}
    leaves = ce.leaf_values(p, env, truth_cap)
    lp = None if leaves is None else ce.to_rational_lp(p, leaves)
    diverges = mc.ground_truth(machine, n, truth_cap) is False
    base = {"family": kind, "machine": name, "n": n}
    if kind in FAMILY_NOTES:
        base["note"] = FAMILY_NOTES[kind]
    fuels = list(fuels)

    for query, fn, plan in _queries(kind):
        tag = f"{kind}/{name}/n={n}/{query}"
        expected = None if lp is None else _truth_for(query, lp, plan, p.variables)
        last = None
        for fuel in fuels:
            t0 = time.perf_counter()
            v = fn(p, fuel, env, plan) if plan is not None else fn(p, fuel, env)
            ms = round((time.perf_counter() - t0) * 1000, 3)
            rec = dict(base, fuel=fuel, kind=query, verdict=verdict_json(v), wall_ms=ms)
            if isinstance(v, ce.Decided):
                rec["certificate"] = v.certificate
                rec["fuel_used"] = v.fuel_used
                if expected is not None and v.answer != expected:
                    report.mismatches.append(f"{tag} fuel={fuel}: decided {v.answer!r}, truth {expected!r}")
                if diverges and (kind, query) in UNDECIDABLE:
                    report.surprises.append(f"{tag} fuel={fuel}: decided on a non-halting machine")
            if expected is not None:
                rec["truth"] = expected
            if isinstance(last, ce.Decided) and (not isinstance(v, ce.Decided) or v.answer != last.answer):
                report.mismatches.append(f"{tag} fuel={fuel}: verdict regressed from {last.answer!r} to {rec['verdict']!r}")
            last = v
            report.records.append(rec)

    _value_records(kind, name, machine, n, p, env, lp, fuels, base, report)
    if kind == "H":
        _locate_records(name, n, p, env, fuels, base, report)


def _plan_runner(fn):
    return lambda p, fuel, env, plan: fn(p, plan, fuel, env)


def _value_records(kind, name, machine, n, p, env, lp, fuels, base, report):
    tag = f"{kind}/{name}/n={n}/value_bounds"
    exact = None if lp is None else ce.truth("value", lp)
    value_approx = None
    if kind == "H":
        value_approx = crn_approx(ce.optimal_value_crn_H(machine, n), VALUE_EPS)
        if exact is not None and abs(value_approx - exact.value) > VALUE_EPS:
            report.mismatches.append(f"{tag}: optimal value approx {value_approx} vs exact {exact.value}")
    prev = None
    for fuel in fuels:
        t0 = time.perf_counter()
        vb = ce.value_bounds(p, fuel, env)
        ms = round((time.perf_counter() - t0) * 1000, 3)
        rec = dict(base, fuel=fuel, kind="value_bounds", verdict="bounds", bounds=[vb.lower, vb.upper], wall_ms=ms)
        if value_approx is not None:
            rec["value_approx"] = value_approx
        if not _check_bounds_nesting(prev, vb):
            report.mismatches.append(f"{tag} fuel={fuel}: bounds {vb} do not nest inside {prev}")
        if exact is not None:
            lo, hi = vb.as_pair()
            if isinstance(exact, Optimal):
                rec["truth"] = exact.value
                ok = lo <= exact.value <= hi
            elif isinstance(exact, Unbounded):
                rec["truth"] = "unbounded"
                ok = hi == ce.INF if p.sense == "max" else lo == -ce.INF
            else:
                rec["truth"] = "infeasible"
                ok = True
            if not ok:
                report.mismatches.append(f"{tag} fuel={fuel}: bounds {vb} miss the exact value {rec['truth']}")
        prev = vb
        report.records.append(rec)


def _locate_records(name, n, p, env, fuels, base, report):
    """Locate the best INNER plan of H on the segment x + y = 1.

    The located bit may change between fuels; only the membership guarantee
    x in E_b is checked.
    """
    e = Interval(Fraction(0), Fraction(1))
    halves = locate_halves(e)
    for fuel in fuels:
        relax, outer, inner = ce._levels(p, env).solved(fuel)
        if not isinstance(inner, Optimal):
            continue
        x = relax.split.to_original(inner.plan)[0]
        bit = coarse_locate(crn_from_rational(x), e)
        rec = dict(base, fuel=fuel, kind="locate", verdict=bit, plan=[x, 1 - x], wall_ms=0.0)
        if x not in halves[bit]:
            report.mismatches.append(f"H/{name}/n={n}/locate fuel={fuel}: {x} not in E_{bit}")
        report.records.append(rec)


def run_gallery(
    machine_set: Mapping[str, mc.StepMachine],
    n_values: Iterable[int],
    fuel_cap: int,
    families: Iterable[str] = ce.FAMILIES,
    load_errors: Mapping[str, str] | None = None,
) -> Report:
    report = Report()
    fuels = doubling_schedule(fuel_cap)
    n_values = list(n_values)
    for name, err in sorted((load_errors or {}).items()):
        report.records.append(
            {"family": "-", "machine": name, "n": 0, "fuel": 0, "kind": "load_error", "verdict": err, "wall_ms": 0.0}
        )
    for kind in families:
        for name in sorted(machine_set):
            for n in n_values:
                run_instance(kind, name, machine_set[name], n, fuels, report)
    return report


def load_machine_dir(path: str | Path) -> tuple[dict[str, mc.StepMachine], dict[str, str]]:
    """Every ``*.json`` in ``path``; failures are collected, not raised."""
    machines, errors = {}, {}
    for f in sorted(Path(path).glob("*.json")):
        try:
            machines[f.stem] = mc.load_machine(f)
        except (mc.MachineError, OSError) as exc:
            errors[f.stem] = str(exc)
    return machines, errors
