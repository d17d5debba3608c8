import random
from fractions import Fraction as F

import pytest

from constructive_lp import clp_engine as ce
from constructive_lp import machines as mc
from constructive_lp.numerics import Interval, Unknown, crn_approx, dyadic

H31, H40, NEVER = mc.halts_at(3, 1), mc.halts_at(4, 0), mc.never_halts()
ENV = {"M": H31, "K": H40, "N": NEVER}


def fam(kind, name="M", n=2):
    return ce.family(kind, name, n)


def answer(v):
    return v.answer if isinstance(v, ce.Decided) else None


def test_eval_expr_values():
    assert crn_approx(ce.eval_expr(ce.lit(F(1, 2)), {}), F(1, 100)) == F(1, 2)
    e = ce.Add(ce.ONE, ce.Specker("M", 1))
    assert crn_approx(ce.eval_expr(e, ENV), dyadic(12)) == F(9, 8)
    s = ce.Specker("N", 4)
    e = ce.Max(ce.Add(ce.ONE, s), ce.Add(ce.ONE, ce.Neg(s)))
    assert crn_approx(ce.eval_expr(e, ENV), dyadic(20)) == 1


def test_eval_expr_unresolved():
    with pytest.raises(ce.UnresolvedMachine):
        ce.eval_expr(ce.Specker("Z", 1), ENV)


def test_snapshot_boxes():
    p = ce.Clpp("max", ("x",), (ce.lit(F(1, 2)),), (ce.ClppConstraint((ce.Specker("N", 1),), "<=", ce.ONE),), (True,))
    snap = ce.interval_snapshot(p, 8, ENV)
    assert snap.objective[0] == Interval.point(F(1, 2))
    box = snap.rows[0].row[0]
    assert 0 in box and box.width <= 2 * dyadic(7)
    p = ce.Clpp("max", ("x",), (ce.ONE,), (ce.ClppConstraint((ce.Specker("M", 1),), "<=", ce.ONE),), (True,))
    assert ce.interval_snapshot(p, 8, ENV).rows[0].row[0].lo > 0


def test_snapshots_nest_in_fuel():
    p = fam("H", "N")
    prev = None
    for t in range(12):
        snap = ce.interval_snapshot(p, t, ENV)
        if prev is not None:
            for a, b in zip(snap.objective, prev.objective):
                assert prev_contains(b, a)
        prev = snap


def prev_contains(outer: Interval, inner: Interval) -> bool:
    return outer.lo <= inner.lo and inner.hi <= outer.hi


def test_relaxation_rejects_free_variables_without_split():
    p = ce.Clpp("max", ("x",), (ce.ONE,), (ce.ClppConstraint((ce.ONE,), "<=", ce.ONE),), (False,))
    relax = ce.outer_inner_relax(ce.split_free(ce.interval_snapshot(p, 0)))
    assert relax.outer.nvars == 2
    with pytest.raises(ce.UnsignedVariable):
        ce.outer_inner_relax(ce.interval_snapshot(p, 0))


def test_feasibility_examples():
    assert answer(ce.decide_feasibility(fam("R"), 4, ENV)) == "infeasible"
    assert isinstance(ce.decide_feasibility(fam("R"), 3, ENV), Unknown)
    v = ce.decide_feasibility(fam("P", "N"), 0, ENV)
    assert v.answer == "feasible" and v.certificate["plan"] == (0,) and v.fuel_used == 0
    assert isinstance(ce.decide_feasibility(fam("R", "N"), 64, ENV), Unknown)


def test_boundedness_examples():
    q = ce.family("Q", "Z", 2)
    env = {"Z": mc.halts_at(3, 0)}
    assert answer(ce.decide_boundedness(q, 4, env)) == "bounded"
    assert isinstance(ce.decide_boundedness(fam("Q", "N"), 64, ENV), Unknown)
    zero_s = ce.Clpp("max", ("x",), (ce.ONE,), (ce.ClppConstraint((ce.ZERO,), "=", ce.ZERO),), (True,))
    v = ce.decide_boundedness(zero_s, 0)
    assert v.answer == "unbounded" and v.fuel_used == 0


def test_plan_feasible_examples():
    assert answer(ce.check_plan_feasible(fam("P"), {"x": 1}, 4, ENV)) is False
    assert isinstance(ce.check_plan_feasible(fam("P"), {"x": 1}, 3, ENV), Unknown)
    assert answer(ce.check_plan_feasible(fam("P", "N"), {"x": 0}, 0, ENV)) is True
    assert isinstance(ce.check_plan_feasible(fam("P", "N"), {"x": 1}, 64, ENV), Unknown)
    assert answer(ce.check_plan_feasible(fam("P"), [F(-1)], 0, ENV)) is False


def test_plan_optimal_examples():
    assert answer(ce.check_plan_optimal(fam("P"), {"x": 0}, 4, ENV)) is True
    assert isinstance(ce.check_plan_optimal(fam("P", "N"), {"x": 0}, 64, ENV), Unknown)
    rational = ce.Clpp("max", ("x",), (ce.ONE,), (ce.ClppConstraint((ce.ONE,), "<=", ce.ONE),), (True,))
    assert answer(ce.check_plan_optimal(rational, {"x": 1}, 0)) is True
    assert answer(ce.check_plan_optimal(rational, {"x": F(1, 2)}, 0)) is False


def test_value_bounds_examples():
    vb = ce.value_bounds(fam("H", "N"), 8, ENV)
    assert 1 - dyadic(6) <= vb.lower <= 1 <= vb.upper <= 1 + dyadic(6)
    vb = ce.value_bounds(fam("P"), 4, ENV)
    assert (vb.lower, vb.upper) == (0, 0)
    vb = ce.value_bounds(fam("R"), 4, ENV)
    assert vb.upper == -ce.INF and vb.lower is None


def test_diagnose_examples():
    assert answer(ce.diagnose_unsolvable(fam("T"), 4, ENV)) == "infeasible"
    assert isinstance(ce.diagnose_unsolvable(fam("T", "N"), 64, ENV), Unknown)
    C = ce.ClppConstraint
    p = ce.Clpp("max", ("x", "y"), (ce.ZERO, ce.ONE), (C((ce.ONE, ce.ZERO), "=", ce.ONE), C((ce.ZERO, ce.ZERO), "=", ce.ZERO)), (True, True))
    assert answer(ce.diagnose_unsolvable(p, 0)) == "unbounded"


@pytest.mark.parametrize("m,bit,value", [(3, 1, F(9, 8)), (4, 0, F(17, 16)), (10, 1, 1 + dyadic(10))])
def test_optimal_value_H(m, bit, value):
    assert crn_approx(ce.optimal_value_crn_H(mc.halts_at(m, bit), 0), dyadic(20)) == value


def test_optimal_value_H_never_halts():
    assert crn_approx(ce.optimal_value_crn_H(NEVER, 3), dyadic(20)) == 1


def test_family_shapes():
    d = ce.family("D", "M", 1)
    assert d.constraints[0].row[0] == ce.Add(ce.PairA("M", 1), ce.PairB("M", 1))
    assert d.constraints[0].rhs == ce.PairA("M", 1)
    with pytest.raises(ValueError):
        ce.family("Z", "M", 1)


def test_d_family_plans():
    # halts with bit 0: a = 2^-4, b = 0, so (a+b)x = a forces x = 1
    p = ce.family("D", "K", 1)
    assert answer(ce.check_plan_feasible(p, {"x": 0}, 8, ENV)) is False
    assert answer(ce.decide_feasibility(p, 64, ENV)) is None


def perturbed_problem(rng: random.Random):
    """A random LP whose coefficients mix rationals with halting-driven sequences."""
    names = ["M", "K", "N"]
    n = rng.randint(1, 3)

    def coef():
        r = rng.random()
        base = ce.lit(F(rng.randint(-3, 3), rng.choice([1, 2])))
        if r < 0.6:
            return base
        leaf = ce.Specker(rng.choice(names), rng.randint(0, 5))
        return ce.Add(base, leaf) if r < 0.85 else ce.Mul(ce.lit(rng.randint(1, 3)), leaf)

    rows = tuple(
        ce.ClppConstraint(tuple(coef() for _ in range(n)), rng.choice(["<=", ">=", "="]), coef())
        for _ in range(rng.randint(1, 3))
    )
    return ce.Clpp(rng.choice(["max", "min"]), tuple("xyz"[:n]), tuple(coef() for _ in range(n)), rows, (True,) * n)


def test_soundness_on_perturbed_problems():
    rng = random.Random(5)
    decided = 0
    for _ in range(120):
        p = perturbed_problem(rng)
        lp = ce.to_rational_lp(p, ce.leaf_values(p, ENV))
        for query, fn in [("feasibility", ce.decide_feasibility), ("boundedness", ce.decide_boundedness)]:
            v = fn(p, 12, ENV)
            if isinstance(v, ce.Decided):
                decided += 1
                assert v.answer == ce.truth(query, lp)
        vb = ce.value_bounds(p, 12, ENV)
        exact = ce.truth("value", lp)
        lo, hi = vb.as_pair()
        if hasattr(exact, "value"):
            assert lo <= exact.value <= hi
    assert decided > 100


def test_verdicts_monotone_in_fuel():
    for kind in ce.FAMILIES:
        for name in ENV:
            p = ce.family(kind, name, 2)
            first = None
            for fuel in range(0, 10):
                v = ce.decide_feasibility(p, fuel, ENV)
                if first is not None:
                    assert v == first
                elif isinstance(v, ce.Decided):
                    first = v
