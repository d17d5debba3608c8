"""Linear programs whose coefficients are constructive reals.

No total decision procedure exists for feasibility, boundedness, plan
allowability or optimality of such problems.  What this module offers instead
is a family of *sound but incomplete* procedures: each one sweeps a fuel
level ``t = 0, 1, ..., fuel``, encloses every coefficient in a rational
interval of width at most ``2**(1-t)`` (the machines behind the coefficients
are run for about ``t`` steps), and asks two exact rational LPs:

* OUTER, whose feasible set contains the true one, and
* INNER, whose feasible set is contained in the true one.

A verdict is returned only when one of them settles the question for every
coefficient vector in the box; otherwise the answer is ``Unknown(fuel)``.
Because each level is decided independently and the sweep stops at the first
decided level, a verdict reached at some fuel is reproduced at every larger
fuel.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence, Union

from . import machines as mc
from .numerics import (
    Crn,
    Interval,
    Unknown,
    as_fraction,
    crn_approx,
    crn_arith,
    crn_div_rational,
    crn_from_rational,
    dyadic,
)
from .simplex import (
    Constraint,
    Infeasible,
    LpOutcome,
    Optimal,
    RatLp,
    Unbounded,
    check_feasible_rational,
    objective_value,
    solve_rational_lp,
)

INF = float("inf")

# -- expressions --------------------------------------------------------------


@dataclass(frozen=True)
class RatLit:
    value: Fraction


@dataclass(frozen=True)
class Specker:
    machine: str
    n: int


@dataclass(frozen=True)
class PairA:
    machine: str
    n: int


@dataclass(frozen=True)
class PairB:
    machine: str
    n: int


@dataclass(frozen=True)
class Add:
    left: "CrnExpr"
    right: "CrnExpr"


@dataclass(frozen=True)
class Neg:
    arg: "CrnExpr"


@dataclass(frozen=True)
class Mul:
    left: "CrnExpr"
    right: "CrnExpr"


@dataclass(frozen=True)
class Max:
    left: "CrnExpr"
    right: "CrnExpr"


@dataclass(frozen=True)
class Min:
    left: "CrnExpr"
    right: "CrnExpr"


@dataclass(frozen=True)
class DivRat:
    arg: "CrnExpr"
    divisor: Fraction

    def __post_init__(self):
        if self.divisor == 0:
            raise ZeroDivisionError("DivRat divisor must be nonzero")


CrnExpr = Union[RatLit, Specker, PairA, PairB, Add, Neg, Mul, Max, Min, DivRat]
_LEAVES = (Specker, PairA, PairB)
_BINARY = {Add: "add", Mul: "mul", Max: "max", Min: "min"}


def lit(q) -> RatLit:
    return RatLit(as_fraction(q))


ZERO, ONE = lit(0), lit(1)


def sub(a: CrnExpr, b: CrnExpr) -> Add:
    return Add(a, Neg(b))


def machine_refs(e: CrnExpr) -> set[str]:
    if isinstance(e, _LEAVES):
        return {e.machine}
    if isinstance(e, RatLit):
        return set()
    if isinstance(e, (Neg, DivRat)):
        return machine_refs(e.arg)
    return machine_refs(e.left) | machine_refs(e.right)


def rational_value(e: CrnExpr) -> Fraction | None:
    """Exact value of an expression with no machine leaves, else None."""
    return exact_value(e, {}) if not machine_refs(e) else None


def exact_value(e: CrnExpr, leaves: Mapping[tuple[str, str, int], Fraction]) -> Fraction:
    """Evaluate with every machine leaf replaced by a known exact rational.

    ``leaves`` maps ``(kind, machine, n)`` with kind in {"s", "a", "b"}.
    """
    if isinstance(e, RatLit):
        return e.value
    if isinstance(e, Specker):
        return leaves[("s", e.machine, e.n)]
    if isinstance(e, PairA):
        return leaves[("a", e.machine, e.n)]
    if isinstance(e, PairB):
        return leaves[("b", e.machine, e.n)]
    if isinstance(e, Neg):
        return -exact_value(e.arg, leaves)
    if isinstance(e, DivRat):
        return exact_value(e.arg, leaves) / e.divisor
    x, y = exact_value(e.left, leaves), exact_value(e.right, leaves)
    if isinstance(e, Add):
        return x + y
    if isinstance(e, Mul):
        return x * y
    if isinstance(e, Max):
        return max(x, y)
    return min(x, y)


class UnresolvedMachine(KeyError):
    pass


def _lookup(env: Mapping[str, mc.StepMachine], name: str) -> mc.StepMachine:
    try:
        return env[name]
    except KeyError:
        raise UnresolvedMachine(f"machine {name!r} is not bound") from None


def eval_expr(e: CrnExpr, env: Mapping[str, mc.StepMachine]) -> Crn:
    if isinstance(e, RatLit):
        return crn_from_rational(e.value)
    if isinstance(e, Specker):
        return mc.specker_crn(_lookup(env, e.machine), e.n)
    if isinstance(e, PairA):
        return mc.split_pair_crn(_lookup(env, e.machine), e.n)[0]
    if isinstance(e, PairB):
        return mc.split_pair_crn(_lookup(env, e.machine), e.n)[1]
    if isinstance(e, Neg):
        return crn_arith("neg", eval_expr(e.arg, env))
    if isinstance(e, DivRat):
        return crn_div_rational(eval_expr(e.arg, env), e.divisor)
    return crn_arith(_BINARY[type(e)], eval_expr(e.left, env), eval_expr(e.right, env))


# -- problems -----------------------------------------------------------------


@dataclass(frozen=True)
class ClppConstraint:
    row: tuple[CrnExpr, ...]
    rel: str
    rhs: CrnExpr


@dataclass(frozen=True)
class Clpp:
    sense: str
    variables: tuple[str, ...]
    objective: tuple[CrnExpr, ...]
    constraints: tuple[ClppConstraint, ...]
    nonneg: tuple[bool, ...]

    def __post_init__(self):
        n = len(self.variables)
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        if len(self.objective) != n or len(self.nonneg) != n:
            raise ValueError("objective and sign vectors need one entry per variable")
        for i, con in enumerate(self.constraints):
            if len(con.row) != n:
                raise ValueError(f"constraint {i}: expected {n} coefficients")
            if con.rel not in ("<=", ">=", "="):
                raise ValueError(f"constraint {i}: unknown relation {con.rel!r}")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def expressions(self) -> list[CrnExpr]:
        out = list(self.objective)
        for con in self.constraints:
            out.extend(con.row)
            out.append(con.rhs)
        return out

    def machine_refs(self) -> set[str]:
        refs: set[str] = set()
        for e in self.expressions():
            refs |= machine_refs(e)
        return refs

    def is_rational(self) -> bool:
        return not self.machine_refs()


def to_rational_lp(p: Clpp, leaves: Mapping | None = None) -> RatLp:
    """The exact LP once every coefficient has a known rational value."""
    leaves = leaves or {}
    val = lambda e: exact_value(e, leaves)  # noqa: E731
    return RatLp(
        p.sense,
        tuple(val(c) for c in p.objective),
        tuple(Constraint(tuple(val(c) for c in con.row), con.rel, val(con.rhs)) for con in p.constraints),
        tuple(Fraction(0) if s else None for s in p.nonneg),
        tuple(None for _ in p.variables),
    )


# -- interval snapshots and relaxations ---------------------------------------


@dataclass(frozen=True)
class IntervalRow:
    row: tuple[Interval, ...]
    rel: str
    rhs: Interval


@dataclass(frozen=True)
class IntervalLp:
    sense: str
    objective: tuple[Interval, ...]
    rows: tuple[IntervalRow, ...]
    nonneg: tuple[bool, ...]
    fuel: int


def _env_key(p: Clpp, env: Mapping[str, mc.StepMachine]) -> tuple:
    return tuple(sorted((name, _lookup(env, name)) for name in p.machine_refs()))


class _Levels:
    """Per-problem cache of coefficient enclosures and relaxation outcomes by level.

    Level t intersects the raw enclosures ``[approx(c, 2**-t) -+ 2**-t]`` of all
    levels up to t, so enclosures are nested and the LPs move monotonically.
    """

    def __init__(self, p: Clpp, env: Mapping[str, mc.StepMachine]):
        self.problem = p
        exprs = p.expressions()
        self.points = [rational_value(e) for e in exprs]
        self.crns = [None if q is not None else eval_expr(e, env) for e, q in zip(exprs, self.points)]
        self.boxes: list[list[Interval]] = []
        self.relaxed: dict[int, tuple[Relaxation, LpOutcome, LpOutcome]] = {}
        self.lock = threading.RLock()

    def boxes_at(self, t: int) -> list[Interval]:
        with self.lock:
            while len(self.boxes) <= t:
                level = len(self.boxes)
                eps = dyadic(level)
                prev = self.boxes[-1] if self.boxes else None
                cur = []
                for i, (q, x) in enumerate(zip(self.points, self.crns)):
                    if q is not None:
                        cur.append(Interval.point(q))
                        continue
                    a = crn_approx(x, eps)
                    box = Interval(a - eps, a + eps)
                    cur.append(box if prev is None else prev[i].intersect(box))
                self.boxes.append(cur)
            return self.boxes[t]

    def snapshot(self, t: int) -> IntervalLp:
        boxes = iter(self.boxes_at(t))
        p = self.problem
        objective = tuple(next(boxes) for _ in p.objective)
        rows = []
        for con in p.constraints:
            row = tuple(next(boxes) for _ in con.row)
            rows.append(IntervalRow(row, con.rel, next(boxes)))
        return IntervalLp(p.sense, objective, tuple(rows), p.nonneg, t)

    def solved(self, t: int) -> tuple["Relaxation", LpOutcome, LpOutcome]:
        with self.lock:
            hit = self.relaxed.get(t)
        if hit is None:
            relax = outer_inner_relax(split_free(self.snapshot(t)))
            hit = (relax, solve_rational_lp(relax.outer), solve_rational_lp(relax.inner))
            with self.lock:
                hit = self.relaxed.setdefault(t, hit)
        return hit


_levels_cache: dict[tuple, _Levels] = {}
_levels_lock = threading.Lock()


def _levels(p: Clpp, env: Mapping[str, mc.StepMachine] | None) -> _Levels:
    env = env or {}
    key = (p, _env_key(p, env))
    with _levels_lock:
        lv = _levels_cache.get(key)
        if lv is None:
            lv = _levels_cache[key] = _Levels(p, env)
        return lv


def clear_caches() -> None:
    with _levels_lock:
        _levels_cache.clear()


def interval_snapshot(p: Clpp, fuel: int, env: Mapping[str, mc.StepMachine] | None = None) -> IntervalLp:
    return _levels(p, env).snapshot(fuel)


@dataclass(frozen=True)
class SplitMap:
    """Column j of the normalised problem is ``sign * x[var]``."""

    columns: tuple[tuple[int, int], ...]
    nvars: int

    def to_original(self, values: Sequence[Fraction]) -> tuple[Fraction, ...]:
        out = [Fraction(0)] * self.nvars
        for (var, sign), v in zip(self.columns, values):
            out[var] += sign * v
        return tuple(out)


def split_free(snap: IntervalLp) -> tuple[IntervalLp, SplitMap]:
    """Replace each free variable x by x+ - x-, both sign-restricted."""
    cols: list[tuple[int, int]] = []
    for j, nn in enumerate(snap.nonneg):
        cols.append((j, 1))
        if not nn:
            cols.append((j, -1))

    def spread(row: Sequence[Interval]) -> tuple[Interval, ...]:
        return tuple(row[j] if s > 0 else -row[j] for j, s in cols)

    rows = tuple(IntervalRow(spread(r.row), r.rel, r.rhs) for r in snap.rows)
    out = IntervalLp(snap.sense, spread(snap.objective), rows, tuple(True for _ in cols), snap.fuel)
    return out, SplitMap(tuple(cols), len(snap.nonneg))


@dataclass(frozen=True)
class Relaxation:
    outer: RatLp
    inner: RatLp
    # rows whose uncertain equality INNER could only honour by zeroing variables
    noncertifiable: tuple[int, ...]
    split: SplitMap


class UnsignedVariable(ValueError):
    pass


def outer_inner_relax(snapshot: tuple[IntervalLp, SplitMap] | IntervalLp) -> Relaxation:
    if isinstance(snapshot, tuple):
        snap, split = snapshot
    else:
        snap, split = snapshot, SplitMap(tuple((j, 1) for j in range(len(snapshot.nonneg))), len(snapshot.nonneg))
    if not all(snap.nonneg):
        raise UnsignedVariable("relaxations need every variable sign-restricted; split free variables first")
    n = len(snap.objective)
    lo = lambda row: tuple(c.lo for c in row)  # noqa: E731
    hi = lambda row: tuple(c.hi for c in row)  # noqa: E731

    outer_rows: list[Constraint] = []
    inner_rows: list[Constraint] = []
    forced_zero = [False] * n
    noncert = []
    for i, r in enumerate(snap.rows):
        # for x >= 0 the box reaches exactly [sum lo*x, sum hi*x]
        if r.rel in ("<=", "="):
            outer_rows.append(Constraint(lo(r.row), "<=", r.rhs.hi))
        if r.rel in (">=", "="):
            outer_rows.append(Constraint(hi(r.row), ">=", r.rhs.lo))
        if r.rel == "<=":
            inner_rows.append(Constraint(hi(r.row), "<=", r.rhs.lo))
        elif r.rel == ">=":
            inner_rows.append(Constraint(lo(r.row), ">=", r.rhs.hi))
        else:
            fat = [j for j, c in enumerate(r.row) if not c.is_point]
            if fat:
                noncert.append(i)
                for j in fat:
                    forced_zero[j] = True
            if r.rhs.is_point:
                point_row = tuple(Fraction(0) if not c.is_point else c.lo for c in r.row)
                inner_rows.append(Constraint(point_row, "=", r.rhs.lo))
            else:
                inner_rows.append(Constraint((Fraction(0),) * n, "=", Fraction(1)))

    if snap.sense == "max":
        outer_obj, inner_obj = hi(snap.objective), lo(snap.objective)
    else:
        outer_obj, inner_obj = lo(snap.objective), hi(snap.objective)
    zero_lower = tuple(Fraction(0) for _ in range(n))
    outer = RatLp(snap.sense, outer_obj, tuple(outer_rows), zero_lower, (None,) * n)
    inner_upper = tuple(Fraction(0) if z else None for z in forced_zero)
    inner = RatLp(snap.sense, inner_obj, tuple(inner_rows), zero_lower, inner_upper)
    return Relaxation(outer, inner, tuple(noncert), split)


# -- verdicts -----------------------------------------------------------------


@dataclass(frozen=True)
class Decided:
    answer: Any
    certificate: dict = field(default_factory=dict, compare=False)
    fuel_used: int = 0


SemiVerdict = Union[Decided, Unknown]


@dataclass(frozen=True)
class ValueBounds:
    """Enclosure of the optimal value.

    ``lower``/``upper`` are Fractions, ``+-inf`` or None (unknown).  An
    infeasible problem gets ``upper = -inf`` for max (``lower = +inf`` for min):
    the supremum over the empty set.
    """

    lower: Fraction | float | None
    upper: Fraction | float | None
    fuel: int

    def as_pair(self) -> tuple[Fraction | float, Fraction | float]:
        return (-INF if self.lower is None else self.lower, INF if self.upper is None else self.upper)


def _orig_point(relax: Relaxation, outcome: LpOutcome) -> tuple[Fraction, ...]:
    pt = outcome.plan if isinstance(outcome, Optimal) else outcome.point
    return relax.split.to_original(pt)


def decide_feasibility(p: Clpp, fuel: int, env: Mapping | None = None) -> SemiVerdict:
    lv = _levels(p, env)
    for t in range(fuel + 1):
        relax, outer, inner = lv.solved(t)
        if isinstance(outer, Infeasible):
            return Decided("infeasible", {"phase1_value": outer.phase1_value}, t)
        if not isinstance(inner, Infeasible):
            return Decided("feasible", {"plan": _orig_point(relax, inner)}, t)
    return Unknown(fuel)


def decide_boundedness(p: Clpp, fuel: int, env: Mapping | None = None) -> SemiVerdict:
    """Is the objective bounded in its optimisation direction?

    An infeasible problem counts as bounded; the certificate says so.
    """
    lv = _levels(p, env)
    for t in range(fuel + 1):
        relax, outer, inner = lv.solved(t)
        if isinstance(outer, Infeasible):
            return Decided("bounded", {"reason": "infeasible", "phase1_value": outer.phase1_value}, t)
        if isinstance(outer, Optimal):
            return Decided("bounded", {"reason": "outer optimum", "bound": outer.value}, t)
        if isinstance(inner, Unbounded):
            return Decided(
                "unbounded",
                {"point": relax.split.to_original(inner.point), "ray": relax.split.to_original(inner.ray)},
                t,
            )
    return Unknown(fuel)


def diagnose_unsolvable(p: Clpp, fuel: int, env: Mapping | None = None) -> SemiVerdict:
    """Why a problem promised to be unsolvable is unsolvable."""
    lv = _levels(p, env)
    for t in range(fuel + 1):
        relax, outer, inner = lv.solved(t)
        if isinstance(outer, Infeasible):
            return Decided("infeasible", {"phase1_value": outer.phase1_value}, t)
        if isinstance(inner, Unbounded):
            return Decided(
                "unbounded",
                {"point": relax.split.to_original(inner.point), "ray": relax.split.to_original(inner.ray)},
                t,
            )
    return Unknown(fuel)


def value_bounds(p: Clpp, fuel: int, env: Mapping | None = None) -> ValueBounds:
    relax, outer, inner = _levels(p, env).solved(fuel)
    maximise = p.sense == "max"
    if isinstance(outer, Optimal):
        o = outer.value
    elif isinstance(outer, Unbounded):
        o = INF if maximise else -INF
    else:
        o = -INF if maximise else INF
    if isinstance(inner, Optimal):
        i = inner.value
    elif isinstance(inner, Unbounded):
        i = INF if maximise else -INF
    else:
        i = None
    return ValueBounds(i, o, fuel) if maximise else ValueBounds(o, i, fuel)


# -- plan checks --------------------------------------------------------------


def _plan_vector(p: Clpp, plan) -> tuple[Fraction, ...]:
    if isinstance(plan, Mapping):
        missing = set(p.variables) - set(plan)
        extra = set(plan) - set(p.variables)
        if missing or extra:
            raise ValueError(f"plan variables mismatch: missing {sorted(missing)}, unknown {sorted(extra)}")
        return tuple(as_fraction(plan[v]) for v in p.variables)
    if len(plan) != p.nvars:
        raise ValueError(f"plan has {len(plan)} components, expected {p.nvars}")
    return tuple(as_fraction(v) for v in plan)


def _dot(row: Sequence[Interval], x: Sequence[Fraction]) -> Interval:
    acc = Interval.point(0)
    for c, v in zip(row, x):
        if v != 0:
            acc = acc + c.scale(v)
    return acc


def _slack_crns(p: Clpp, x: Sequence[Fraction], env) -> list[Crn]:
    out = []
    for con in p.constraints:
        acc = crn_arith("neg", eval_expr(con.rhs, env))
        for c, v in zip(con.row, x):
            if v != 0:
                acc = crn_arith("add", acc, crn_arith("mul", eval_expr(c, env), crn_from_rational(v)))
        out.append(acc)
    return out


def _violates(enc: Interval, rel: str) -> bool:
    if rel == "=":
        return 0 not in enc
    if rel == "<=":
        return enc.lo > 0
    return enc.hi < 0


def _certified(enc: Interval, rel: str) -> bool:
    if rel == "=":
        return enc.is_point and enc.lo == 0
    if rel == "<=":
        return enc.hi <= 0
    return enc.lo >= 0


class _PlanCheck:
    """Level-by-level refutation and certification of one plan."""

    def __init__(self, p: Clpp, x: tuple[Fraction, ...], env):
        self.p, self.x = p, x
        self.levels = _levels(p, env)
        self.slacks = _slack_crns(p, x, env)
        self.encl: list[Interval | None] = [None] * len(self.slacks)
        self.sign_violation = next(
            (v for v, s, val in zip(p.variables, p.nonneg, x) if s and val < 0), None
        )

    def refuted(self, t: int) -> int | None:
        """Index of a constraint whose slack is separated from its admissible side."""
        eps = dyadic(t)
        snap = self.levels.snapshot(t)
        for i, (con, s, r) in enumerate(zip(self.p.constraints, self.slacks, snap.rows)):
            q = crn_approx(s, eps)
            # both enclose the true slack; the interval one is exact on rational rows
            box = Interval(q - eps, q + eps).intersect(_dot(r.row, self.x) + (-r.rhs))
            self.encl[i] = box if self.encl[i] is None else self.encl[i].intersect(box)
            if _violates(self.encl[i], con.rel):
                return i
        return None

    def certified(self, t: int) -> bool:
        snap = self.levels.snapshot(t)
        for r in snap.rows:
            slack = _dot(r.row, self.x) + (-r.rhs)
            if not _certified(slack, r.rel):
                return False
        return True

    def objective(self, t: int) -> Interval:
        return _dot(self.levels.snapshot(t).objective, self.x)


def check_plan_feasible(p: Clpp, plan, fuel: int, env: Mapping | None = None) -> SemiVerdict:
    """Is ``plan`` allowable?  Answers True/False when decided."""
    chk = _PlanCheck(p, _plan_vector(p, plan), env or {})
    if chk.sign_violation is not None:
        return Decided(False, {"sign": chk.sign_violation}, 0)
    for t in range(fuel + 1):
        bad = chk.refuted(t)
        if bad is not None:
            return Decided(False, {"constraint": bad, "slack": chk.encl[bad]}, t)
        if chk.certified(t):
            return Decided(True, {}, t)
    return Unknown(fuel)


def check_plan_optimal(p: Clpp, plan, fuel: int, env: Mapping | None = None) -> SemiVerdict:
    """Is ``plan`` an optimal plan?  Answers True/False when decided.

    True needs the plan's allowability certified at the same level, so a
    plan that only looks good against a loose OUTER bound is never accepted.
    """
    env = env or {}
    chk = _PlanCheck(p, _plan_vector(p, plan), env)
    if chk.sign_violation is not None:
        return Decided(False, {"sign": chk.sign_violation}, 0)
    lv = chk.levels
    maximise = p.sense == "max"
    for t in range(fuel + 1):
        bad = chk.refuted(t)
        if bad is not None:
            return Decided(False, {"not_allowable": bad}, t)
        relax, outer, inner = lv.solved(t)
        if isinstance(outer, Infeasible):
            return Decided(False, {"not_allowable": "problem infeasible"}, t)
        val = chk.objective(t)
        if isinstance(outer, Optimal) and chk.certified(t):
            if (val.lo >= outer.value) if maximise else (val.hi <= outer.value):
                return Decided(True, {"outer_optimum": outer.value}, t)
        if isinstance(inner, Unbounded):
            return Decided(False, {"unbounded_from": relax.split.to_original(inner.point)}, t)
        if isinstance(inner, Optimal):
            if (inner.value > val.hi) if maximise else (inner.value < val.lo):
                return Decided(False, {"better_plan": _orig_point(relax, inner), "value": inner.value}, t)
    return Unknown(fuel)


# -- the counterexample families ----------------------------------------------

FAMILIES = ("P", "H", "Q", "R", "T", "D")


def family(kind: str, machine: str, n: int) -> Clpp:
    s = Specker(machine, n)
    C = ClppConstraint
    if kind == "P":
        return Clpp("max", ("x",), (ONE,), (C((s,), "=", ZERO), C((ONE,), "<=", ONE)), (True,))
    if kind == "H":
        return Clpp(
            "max",
            ("x", "y"),
            (Add(ONE, s), sub(ONE, s)),
            (C((ONE, ONE), "<=", ONE),),
            (True, True),
        )
    if kind == "Q":
        return Clpp("max", ("x",), (ONE,), (C((s,), "=", ZERO),), (True,))
    if kind == "R":
        return Clpp("max", ("x",), (ONE,), (C((s,), "=", ZERO), C((ONE,), "=", ONE)), (True,))
    if kind == "T":
        return Clpp(
            "max",
            ("x", "y"),
            (ZERO, ONE),
            (C((s, ZERO), "=", ZERO), C((ONE, ZERO), "=", ONE)),
            (True, True),
        )
    if kind == "D":
        a, b = PairA(machine, n), PairB(machine, n)
        return Clpp("max", ("x",), (ZERO,), (C((Add(a, b),), "=", a), C((ONE,), "<=", ONE)), (True,))
    raise ValueError(f"unknown family {kind!r}; expected one of {FAMILIES}")


def optimal_value_crn_H(machine: mc.StepMachine, n: int) -> Crn:
    """The optimal value of H(n): max(1 + s_n, 1 - s_n), computable without a plan."""
    s = mc.specker_crn(machine, n)
    one = crn_from_rational(1)
    return crn_arith("max", crn_arith("add", one, s), crn_arith("add", one, crn_arith("neg", s)))


# -- ground truth for cross-checks --------------------------------------------


def leaf_values(p: Clpp, env: Mapping[str, mc.StepMachine], cap: int = 100_000) -> dict | None:
    """Exact values of every machine leaf, or None if some halting status is unknown."""
    out: dict[tuple[str, str, int], Fraction] = {}
    for e in p.expressions():
        for leaf in _leaves(e):
            status = mc.ground_truth(_lookup(env, leaf.machine), leaf.n, cap)
            if status is None:
                return None
            if status is False:
                s = a = b = Fraction(0)
            else:
                mag = dyadic(status.m)
                s = mag if status.bit == 1 else -mag
                a, b = (mag, Fraction(0)) if status.bit == 0 else (Fraction(0), mag)
            out[("s", leaf.machine, leaf.n)] = s
            out[("a", leaf.machine, leaf.n)] = a
            out[("b", leaf.machine, leaf.n)] = b
    return out


def _leaves(e: CrnExpr):
    if isinstance(e, _LEAVES):
        yield e
    elif isinstance(e, (Neg, DivRat)):
        yield from _leaves(e.arg)
    elif not isinstance(e, RatLit):
        yield from _leaves(e.left)
        yield from _leaves(e.right)


def truth(query: str, lp: RatLp, plan: Sequence[Fraction] | None = None) -> Any:
    """What a decided verdict of ``query`` must say on the exact LP ``lp``."""
    out = solve_rational_lp(lp)
    if query == "feasibility":
        return "infeasible" if isinstance(out, Infeasible) else "feasible"
    if query == "boundedness":
        return "unbounded" if isinstance(out, Unbounded) else "bounded"
    if query == "diagnose":
        return {Infeasible: "infeasible", Unbounded: "unbounded"}.get(type(out))
    if query == "plan_feasible":
        return check_feasible_rational(lp, plan)
    if query == "plan_optimal":
        return (
            check_feasible_rational(lp, plan)
            and isinstance(out, Optimal)
            and objective_value(lp, plan) == out.value
        )
    if query == "value":
        return out
    raise ValueError(f"unknown query {query!r}")
