"""Exact two-phase simplex over the rationals, plus a brute-force oracle.

Everything is ``Fraction``; no tolerance appears anywhere.  Phase 1 uses one
artificial variable per row, phase 2 optimises the original objective, and
Bland's smallest-index rule is used in both phases so the method terminates
on degenerate problems too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Sequence, Union

from .numerics import as_fraction

RELATIONS = ("<=", ">=", "=")


class LpError(ValueError):
    """Malformed linear program."""


@dataclass(frozen=True)
class Constraint:
    row: tuple[Fraction, ...]
    rel: str
    rhs: Fraction


@dataclass(frozen=True)
class RatLp:
    """A linear program with exact rational data.

    ``lower[j]`` is ``0`` (sign-restricted) or ``None`` (free); ``upper[j]`` is
    an optional rational upper bound.
    """

    sense: str
    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...]
    lower: tuple[Fraction | None, ...]
    upper: tuple[Fraction | None, ...]

    @property
    def nvars(self) -> int:
        return len(self.objective)

    @classmethod
    def build(
        cls,
        sense: str,
        objective: Sequence,
        constraints: Iterable[tuple[Sequence, str, object]] = (),
        free: Iterable[int] = (),
        upper: Sequence | None = None,
    ) -> "RatLp":
        """Convenience constructor: variables are x >= 0 unless listed in ``free``."""
        c = tuple(as_fraction(v) for v in objective)
        free = set(free)
        rows = tuple(Constraint(tuple(as_fraction(v) for v in a), rel, as_fraction(b)) for a, rel, b in constraints)
        lower = tuple(None if j in free else Fraction(0) for j in range(len(c)))
        ub = tuple(None if u is None else as_fraction(u) for u in (upper or [None] * len(c)))
        lp = cls(sense, c, rows, lower, ub)
        validate(lp)
        return lp


@dataclass(frozen=True)
class Optimal:
    plan: tuple[Fraction, ...]
    value: Fraction
    basis: tuple[int, ...]
    pivots: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Infeasible:
    phase1_value: Fraction
    pivots: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unbounded:
    point: tuple[Fraction, ...]
    ray: tuple[Fraction, ...]
    pivots: int = field(default=0, compare=False)


LpOutcome = Union[Optimal, Infeasible, Unbounded]


def validate(lp: RatLp) -> None:
    if lp.sense not in ("max", "min"):
        raise LpError(f"sense must be 'max' or 'min', got {lp.sense!r}")
    n = lp.nvars
    if len(lp.lower) != n or len(lp.upper) != n:
        raise LpError("bound vectors must have one entry per variable")
    for j, lo in enumerate(lp.lower):
        if lo is not None and lo != 0:
            raise LpError(f"variable {j}: lower bound must be 0 or free")
        if lo is None and lp.upper[j] is not None:
            raise LpError(f"variable {j}: a free variable cannot carry an upper bound")
    for i, con in enumerate(lp.constraints):
        if len(con.row) != n:
            raise LpError(f"constraint {i}: row has {len(con.row)} entries, expected {n}")
        if con.rel not in RELATIONS:
            raise LpError(f"constraint {i}: unknown relation {con.rel!r}")


def objective_value(lp: RatLp, plan: Sequence[Fraction]) -> Fraction:
    return sum((c * x for c, x in zip(lp.objective, plan)), Fraction(0))


def _holds(lhs: Fraction, rel: str, rhs: Fraction) -> bool:
    if rel == "<=":
        return lhs <= rhs
    if rel == ">=":
        return lhs >= rhs
    return lhs == rhs


def check_feasible_rational(lp: RatLp, plan: Sequence) -> bool:
    if len(plan) != lp.nvars:
        raise LpError(f"plan has {len(plan)} components, expected {lp.nvars}")
    plan = [as_fraction(v) for v in plan]
    for j, x in enumerate(plan):
        if lp.lower[j] is not None and x < lp.lower[j]:
            return False
        if lp.upper[j] is not None and x > lp.upper[j]:
            return False
    for con in lp.constraints:
        lhs = sum((a * x for a, x in zip(con.row, plan)), Fraction(0))
        if not _holds(lhs, con.rel, con.rhs):
            return False
    return True


# -- tableau ------------------------------------------------------------------


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        self.rows = rows  # each row: coefficients followed by rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, col: int) -> None:
        prow = self.rows[r]
        p = prow[col]
        if p != 1:
            prow[:] = [v / p for v in prow]
        for i, row in enumerate(self.rows):
            if i != r:
                f = row[col]
                if f:
                    row[:] = [v - f * pv for v, pv in zip(row, prow)]
        self.basis[r] = col
        self.pivots += 1

    def reduced_costs(self, cost: Sequence[Fraction], cols: Sequence[int]) -> dict[int, Fraction]:
        cb = [cost[b] for b in self.basis]
        out = {}
        for j in cols:
            out[j] = cost[j] - sum((c * row[j] for c, row in zip(cb, self.rows) if c), Fraction(0))
        return out

    def run(self, cost: Sequence[Fraction], cols: Sequence[int]) -> int | None:
        """Maximise cost over the current tableau restricted to ``cols``.

        Returns None at optimality, else the entering column of an unbounded ray.
        """
        while True:
            rc = self.reduced_costs(cost, cols)
            entering = next((j for j in cols if rc[j] > 0), None)  # Bland: smallest index
            if entering is None:
                return None
            best_row, best_ratio = None, None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[best_row])
                    ):
                        best_row, best_ratio = i, ratio
            if best_row is None:
                return entering
            self.pivot(best_row, entering)

    def column_values(self, ncols: int) -> list[Fraction]:
        x = [Fraction(0)] * ncols
        for b, row in zip(self.basis, self.rows):
            x[b] = row[-1]
        return x


def _standard_form(lp: RatLp):
    """Rows over split structural columns, slacks and one artificial per row."""
    col_of: list[tuple[int, int]] = []  # (plus column, minus column or -1)
    nstruct = 0
    for j in range(lp.nvars):
        if lp.lower[j] is None:
            col_of.append((nstruct, nstruct + 1))
            nstruct += 2
        else:
            col_of.append((nstruct, -1))
            nstruct += 1

    raw: list[tuple[list[Fraction], str, Fraction]] = []
    for con in lp.constraints:
        coeffs = [Fraction(0)] * nstruct
        for j, a in enumerate(con.row):
            p, m = col_of[j]
            coeffs[p] += a
            if m >= 0:
                coeffs[m] -= a
        raw.append((coeffs, con.rel, con.rhs))
    for j, u in enumerate(lp.upper):
        if u is not None:
            coeffs = [Fraction(0)] * nstruct
            coeffs[col_of[j][0]] = Fraction(1)
            raw.append((coeffs, "<=", u))

    m = len(raw)
    nslack = sum(1 for _, rel, _ in raw if rel != "=")
    art0 = nstruct + nslack
    ncols = art0 + m
    rows = []
    s = nstruct
    for i, (coeffs, rel, b) in enumerate(raw):
        row = coeffs + [Fraction(0)] * (nslack + m) + [b]
        if rel != "=":
            row[s] = Fraction(1) if rel == "<=" else Fraction(-1)
            s += 1
        if b < 0:
            row = [-v for v in row]
        row[art0 + i] = Fraction(1)
        rows.append(row)
    return col_of, nstruct, art0, ncols, rows


def _to_original(lp: RatLp, col_of, values: Sequence[Fraction]) -> tuple[Fraction, ...]:
    out = []
    for p, m in col_of:
        v = values[p]
        if m >= 0:
            v -= values[m]
        out.append(v)
    return tuple(out)


def solve_rational_lp(lp: RatLp) -> LpOutcome:
    validate(lp)
    col_of, nstruct, art0, ncols, rows = _standard_form(lp)
    tab = _Tableau(rows, list(range(art0, ncols)))

    # phase 1: maximise -(sum of artificials)
    cost1 = [Fraction(0)] * art0 + [Fraction(-1)] * (ncols - art0)
    tab.run(cost1, list(range(ncols)))
    phase1 = -sum((row[-1] for b, row in zip(tab.basis, tab.rows) if b >= art0), Fraction(0))
    if phase1 < 0:
        return Infeasible(-phase1, pivots=tab.pivots)

    # drive zero-level artificials out of the basis; drop redundant rows
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= art0:
            row = tab.rows[i]
            col = next((j for j in range(art0) if row[j] != 0), None)
            if col is None:
                del tab.rows[i]
                del tab.basis[i]
                continue
            tab.pivot(i, col)
        i += 1

    sign = 1 if lp.sense == "max" else -1
    cost2 = [Fraction(0)] * ncols
    for j, c in enumerate(lp.objective):
        p, m = col_of[j]
        cost2[p] += sign * c
        if m >= 0:
            cost2[m] -= sign * c
    entering = tab.run(cost2, list(range(art0)))
    values = tab.column_values(ncols)
    point = _to_original(lp, col_of, values)
    if entering is not None:
        direction = [Fraction(0)] * ncols
        direction[entering] = Fraction(1)
        for b, row in zip(tab.basis, tab.rows):
            direction[b] = -row[entering]
        return Unbounded(point, _to_original(lp, col_of, direction), pivots=tab.pivots)
    return Optimal(point, objective_value(lp, point), tuple(tab.basis), pivots=tab.pivots)


def pivot_bound(lp: RatLp) -> int:
    """A generous ceiling on Bland pivots: twice the number of possible bases."""
    col_of, nstruct, art0, ncols, rows = _standard_form(lp)
    return 2 * comb(ncols, len(rows)) + len(rows)


def is_improving_ray(lp: RatLp, ray: Sequence[Fraction]) -> bool:
    """Homogeneous feasibility of ``ray`` plus strict objective improvement."""
    for j, r in enumerate(ray):
        if lp.lower[j] is not None and r < 0:
            return False
        if lp.upper[j] is not None and r > 0:
            return False
    for con in lp.constraints:
        if not _holds(sum((a * r for a, r in zip(con.row, ray)), Fraction(0)), con.rel, Fraction(0)):
            return False
    gain = objective_value(lp, ray)
    return gain > 0 if lp.sense == "max" else gain < 0


# -- brute-force oracle -------------------------------------------------------


def _solve_square(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Unique solution of a square system by exact elimination, or None if singular."""
    n = len(a)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * pv for v, pv in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def _hyperplanes(lp: RatLp) -> list[tuple[list[Fraction], Fraction]]:
    n = lp.nvars
    planes = [(list(con.row), con.rhs) for con in lp.constraints]
    for j in range(n):
        e = [Fraction(0)] * n
        e[j] = Fraction(1)
        if lp.lower[j] is not None:
            planes.append((e, lp.lower[j]))
        if lp.upper[j] is not None:
            planes.append((e, lp.upper[j]))
    return planes


def _guard(lp: RatLp) -> None:
    validate(lp)
    if lp.nvars > 6 or len(lp.constraints) > 12:
        raise LpError("vertex enumeration is limited to 6 variables and 12 rows")


def enumerate_vertices(lp: RatLp) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """All vertices of the feasible region with their objective values."""
    _guard(lp)
    n = lp.nvars
    found: dict[tuple[Fraction, ...], Fraction] = {}
    for subset in combinations(_hyperplanes(lp), n):
        x = _solve_square([a for a, _ in subset], [b for _, b in subset])
        if x is None:
            continue
        x = tuple(x)
        if x not in found and check_feasible_rational(lp, x):
            found[x] = objective_value(lp, x)
    return sorted(found.items())


def enumerate_extreme_rays(lp: RatLp) -> list[tuple[Fraction, ...]]:
    """Extreme rays of the recession cone, normalised to unit coordinate sum.

    Only meaningful when every variable is sign-restricted, which makes the
    cone pointed and the normalisation valid.
    """
    _guard(lp)
    if any(lo is None for lo in lp.lower):
        raise LpError("extreme-ray enumeration needs every variable sign-restricted")
    n = lp.nvars
    zero = [(a, Fraction(0)) for a, _ in _hyperplanes(lp)]
    ones = [Fraction(1)] * n
    rays = set()
    for subset in combinations(zero, n - 1):
        r = _solve_square([a for a, _ in subset] + [ones], [Fraction(0)] * (n - 1) + [Fraction(1)])
        if r is None:
            continue
        if _in_recession_cone(lp, r):
            rays.add(tuple(r))
    return sorted(rays)


def _in_recession_cone(lp: RatLp, r: Sequence[Fraction]) -> bool:
    for j, v in enumerate(r):
        if lp.lower[j] is not None and v < 0:
            return False
        if lp.upper[j] is not None and v > 0:
            return False
    return all(
        _holds(sum((a * v for a, v in zip(con.row, r)), Fraction(0)), con.rel, Fraction(0)) for con in lp.constraints
    )


def brute_force_outcome(lp: RatLp) -> tuple[str, Fraction | None]:
    """Outcome class and optimal value by enumeration (sign-restricted variables only)."""
    vertices = enumerate_vertices(lp)
    if not vertices:
        return "infeasible", None
    for r in enumerate_extreme_rays(lp):
        gain = objective_value(lp, r)
        if (gain > 0) if lp.sense == "max" else (gain < 0):
            return "unbounded", None
    values = [v for _, v in vertices]
    return "optimal", max(values) if lp.sense == "max" else min(values)


def outcome_class(outcome: LpOutcome) -> str:
    return {Optimal: "optimal", Infeasible: "infeasible", Unbounded: "unbounded"}[type(outcome)]
