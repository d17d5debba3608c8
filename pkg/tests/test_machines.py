import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from constructive_lp import machines as mc
from constructive_lp.numerics import crn_approx, dyadic


def test_halts_at_runs_exactly_m_steps():
    m = mc.halts_at(5, 1)
    assert mc.run_bounded(m, 0, 4) == mc.Running(4, 4, (0, 4))
    assert mc.run_bounded(m, 0, 5) == mc.Halted(1, 5)
    assert mc.run_bounded(m, 0, 100) == mc.Halted(1, 5)


def test_shorter_budget_after_longer_one():
    m = mc.halts_at(6, 0)
    assert isinstance(mc.run_bounded(m, 3, 50), mc.Halted)
    assert mc.run_bounded(m, 3, 2) == mc.Running(2, 2, (3, 2))


def test_never_halts_is_detected_by_ground_truth():
    assert mc.ground_truth(mc.never_halts(), 7, 1000) is False
    assert mc.run_bounded(mc.never_halts(), 7, 1000) == mc.Running(1000, 0, (7, 0))


def test_parity_or_loop():
    m = mc.parity_or_loop()
    for n in range(8):
        g = mc.ground_truth(m, n, 10_000)
        if n % 2 == 0:
            assert isinstance(g, mc.Halted) and g.bit == 1
        else:
            assert g is False


def test_square_search_decides_perfect_squares():
    m = mc.square_search()
    for n in range(40):
        g = mc.ground_truth(m, n, 10_000)
        is_square = int(n**0.5) ** 2 == n
        assert isinstance(g, mc.Halted) and g.bit == int(is_square)


def test_countdown_halts_after_input_dependent_steps():
    m = mc.countdown(1)
    steps = [mc.ground_truth(m, n).m for n in range(5)]
    assert steps == sorted(set(steps))


@pytest.mark.parametrize("m", range(1, 13))
@pytest.mark.parametrize("bit", [0, 1])
def test_specker_limit(m, bit):
    s = mc.specker_crn(mc.halts_at(m, bit), 0)
    expected = dyadic(m) if bit else -dyadic(m)
    assert crn_approx(s, dyadic(m + 4)) == expected
    assert [mc.specker_term(mc.halts_at(m, bit), 0, k) for k in range(m)] == [0] * m


def test_never_halts_sequence_is_zero():
    s = mc.specker_crn(mc.never_halts(), 3)
    assert all(crn_approx(s, dyadic(t)) == 0 for t in range(1, 40))


def test_pair_sequences_split_by_bit():
    a, b = mc.split_pair_crn(mc.halts_at(4, 0), 1)
    assert crn_approx(a, F(1, 1000)) == F(1, 16) and crn_approx(b, F(1, 1000)) == 0
    a, b = mc.split_pair_crn(mc.halts_at(4, 1), 1)
    assert crn_approx(a, F(1, 1000)) == 0 and crn_approx(b, F(1, 1000)) == F(1, 16)


@settings(max_examples=60)
@given(st.integers(1, 12), st.integers(0, 1), st.integers(0, 64), st.integers(0, 64))
def test_cauchy_bound(m, bit, j, k):
    mach = mc.halts_at(m, bit)
    d = abs(mc.specker_term(mach, 2, j) - mc.specker_term(mach, 2, k))
    assert d <= dyadic(min(j, k))


def test_spec_round_trip(tmp_path):
    for name, m in mc.library().items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(mc.dump_machine(m)))
        assert mc.load_machine(path) == m


def test_labels_resolve():
    spec = {"registers": 1, "code": [["DECJZ", 0, "done"], ["INC", 0], ["HALT1"]], "labels": {"done": 2}}
    m = mc.load_machine_obj(spec)
    assert mc.ground_truth(m, 0) == mc.Halted(1, 2)


@pytest.mark.parametrize(
    "spec",
    [
        {"registers": 1, "code": [["INC", 0]]},
        {"registers": 1, "code": [["INC", 3], ["HALT0"]]},
        {"registers": 1, "code": [["DECJZ", 0, 9], ["HALT0"]]},
        {"registers": 1, "code": [["JMP", 0], ["HALT0"]]},
        {"registers": 1, "code": [["DECJZ", 0, "nowhere"], ["HALT0"]]},
        {"registers": 1, "code": [["HALT0"]], "extra": 1},
        {"registers": 0, "code": [["HALT0"]]},
        {"code": [["HALT0"]]},
    ],
)
def test_malformed_specs_rejected(spec):
    with pytest.raises(mc.MachineError):
        mc.load_machine_obj(spec)


def test_builtin_names():
    assert mc.builtin_machine("halts_at(3, 1)") == mc.halts_at(3, 1)
    assert mc.builtin_machine("never_halts") == mc.never_halts()
    assert mc.builtin_machine("square_search") == mc.square_search()
    assert mc.builtin_machine("nonsense") is None
