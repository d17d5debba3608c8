"""Counter machines and the halting-driven rational sequences built from them.

A machine is a Minsky-style program over natural-number registers::

    INC r            r += 1, fall through
    DECJZ r label    if r == 0 jump to label, else r -= 1 and fall through
    HALT0 / HALT1    stop with output bit 0 / 1

Input n is loaded into register 0, every other register starts at 0.  Step
counting starts at 1: ``Halted(b, m)`` means the HALT instruction was the
m-th instruction executed.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Union

from .numerics import Crn, dyadic, precision_index

OPCODES = {"INC": 1, "DECJZ": 2, "HALT0": 0, "HALT1": 0}


class MachineError(ValueError):
    """Malformed machine program or spec file."""


@dataclass(frozen=True)
class Instr:
    op: str
    reg: int = -1
    target: int = -1

    def as_json(self) -> list:
        if self.op == "INC":
            return ["INC", self.reg]
        if self.op == "DECJZ":
            return ["DECJZ", self.reg, self.target]
        return [self.op]


@dataclass(frozen=True)
class StepMachine:
    registers: int
    code: tuple[Instr, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.registers < 1:
            raise MachineError("a machine needs at least register 0 for its input")
        if not self.code:
            raise MachineError("empty program")
        for pc, ins in enumerate(self.code):
            if ins.op not in OPCODES:
                raise MachineError(f"instruction {pc}: unknown opcode {ins.op!r}")
            if ins.op in ("INC", "DECJZ") and not 0 <= ins.reg < self.registers:
                raise MachineError(f"instruction {pc}: register {ins.reg} not declared")
            if ins.op == "DECJZ" and not 0 <= ins.target < len(self.code):
                raise MachineError(f"instruction {pc}: jump target {ins.target} out of range")
        # falling off the end would be a run-time failure; rule it out here
        if self.code[-1].op not in ("HALT0", "HALT1"):
            raise MachineError("the last instruction must be HALT0 or HALT1")

    def __str__(self) -> str:
        return self.name or f"<machine {len(self.code)} instrs>"


@dataclass(frozen=True)
class Running:
    steps: int
    pc: int
    regs: tuple[int, ...]


@dataclass(frozen=True)
class Halted:
    bit: int
    m: int


RunStatus = Union[Running, Halted]


class _Trace:
    """Incrementally extended execution of one machine on one input."""

    def __init__(self, machine: StepMachine, n: int):
        self.machine = machine
        self.steps = 0
        self.pc = 0
        self.regs = [n] + [0] * (machine.registers - 1)
        self.halted: Halted | None = None
        self.lock = threading.Lock()

    def advance_to(self, k: int) -> RunStatus:
        with self.lock:
            code = self.machine.code
            regs = self.regs
            pc, steps = self.pc, self.steps
            while self.halted is None and steps < k:
                ins = code[pc]
                steps += 1
                op = ins.op
                if op == "INC":
                    regs[ins.reg] += 1
                    pc += 1
                elif op == "DECJZ":
                    if regs[ins.reg] == 0:
                        pc = ins.target
                    else:
                        regs[ins.reg] -= 1
                        pc += 1
                else:
                    self.halted = Halted(1 if op == "HALT1" else 0, steps)
            self.pc, self.steps = pc, steps
            if self.halted is not None:
                return self.halted
            return Running(steps, pc, tuple(regs))


_traces: dict[tuple[StepMachine, int], _Trace] = {}
_traces_lock = threading.Lock()


def _trace(machine: StepMachine, n: int) -> _Trace:
    key = (machine, n)
    with _traces_lock:
        tr = _traces.get(key)
        if tr is None:
            tr = _traces[key] = _Trace(machine, n)
        return tr


def run_bounded(machine: StepMachine, n: int, k: int) -> RunStatus:
    """Run at most k steps on input n.

    Runs are cached per (machine, input) and extended on demand.  Asking for
    fewer steps than already simulated replays from scratch only when the
    machine has not halted yet within that shorter budget.
    """
    if n < 0 or k < 0:
        raise ValueError("input and step budget must be natural numbers")
    tr = _trace(machine, n)
    status = tr.advance_to(k)
    if isinstance(status, Halted):
        return status if status.m <= k else _replay(machine, n, k)
    if status.steps > k:
        return _replay(machine, n, k)
    return status


def _replay(machine: StepMachine, n: int, k: int) -> RunStatus:
    return _Trace(machine, n).advance_to(k)


def halted_by(machine: StepMachine, n: int, k: int) -> Halted | None:
    """The halt record if the machine halts on n within k steps, else None.

    Cheaper than ``run_bounded`` for sequence terms: never replays.
    """
    tr = _trace(machine, n)
    with tr.lock:
        h = tr.halted
        if h is None and tr.steps >= k:
            return None
    if h is None:
        status = tr.advance_to(k)
        h = status if isinstance(status, Halted) else None
    return h if h is not None and h.m <= k else None


def ground_truth(machine: StepMachine, n: int, cap: int = 100_000) -> Halted | None | bool:
    """Halting status decided by simulation.

    Returns ``Halted`` if the machine halts within ``cap`` steps, ``False`` if
    a repeated configuration proves it never halts, and ``None`` if neither
    was established.
    """
    code = machine.code
    pc, regs = 0, [n] + [0] * (machine.registers - 1)
    seen = set()
    for step in range(1, cap + 1):
        state = (pc, tuple(regs))
        if state in seen:
            return False
        seen.add(state)
        ins = code[pc]
        if ins.op == "INC":
            regs[ins.reg] += 1
            pc += 1
        elif ins.op == "DECJZ":
            if regs[ins.reg] == 0:
                pc = ins.target
            else:
                regs[ins.reg] -= 1
                pc += 1
        else:
            return Halted(1 if ins.op == "HALT1" else 0, step)
    return None


# -- halting-driven sequences -------------------------------------------------


def specker_term(machine: StepMachine, n: int, k: int) -> Fraction:
    status = halted_by(machine, n, k)
    if status is None:
        return Fraction(0)
    mag = dyadic(status.m)
    return mag if status.bit == 1 else -mag


def _pair_terms(machine: StepMachine, n: int, k: int) -> tuple[Fraction, Fraction]:
    status = halted_by(machine, n, k)
    if status is None:
        return Fraction(0), Fraction(0)
    mag = dyadic(status.m)
    return (mag, Fraction(0)) if status.bit == 0 else (Fraction(0), mag)


def geometric_regulator(eps: Fraction) -> int:
    return precision_index(eps)


def specker_crn(machine: StepMachine, n: int) -> Crn:
    return Crn(lambda k: specker_term(machine, n, k), geometric_regulator, label=f"s({machine},{n})")


def split_pair_crn(machine: StepMachine, n: int) -> tuple[Crn, Crn]:
    a = Crn(lambda k: _pair_terms(machine, n, k)[0], geometric_regulator, label=f"a({machine},{n})")
    b = Crn(lambda k: _pair_terms(machine, n, k)[1], geometric_regulator, label=f"b({machine},{n})")
    return a, b


# -- built-in machines --------------------------------------------------------


def halts_at(m: int, bit: int) -> StepMachine:
    """Halts with ``bit`` at exactly step m on every input."""
    if m < 1 or bit not in (0, 1):
        raise ValueError("halts_at needs m >= 1 and bit in {0, 1}")
    code = tuple(Instr("INC", 1) for _ in range(m - 1)) + (Instr(f"HALT{bit}"),)
    return StepMachine(2, code, name=f"halts_at({m},{bit})")


def never_halts() -> StepMachine:
    # register 1 is always zero, so the jump is taken forever
    return StepMachine(2, (Instr("DECJZ", 1, 0), Instr("HALT0")), name="never_halts")


def parity_or_loop() -> StepMachine:
    """Halts with output 1 on even n (after about n steps); loops forever on odd n."""
    code = (
        Instr("DECJZ", 0, 3),  # 0: n == 0 -> even, halt
        Instr("DECJZ", 0, 4),  # 1: n odd -> loop
        Instr("DECJZ", 1, 0),  # 2: r1 == 0, jump back
        Instr("HALT1"),        # 3
        Instr("DECJZ", 1, 4),  # 4: spin
        Instr("HALT0"),
    )
    return StepMachine(2, code, name="parity_or_loop")


def countdown(bit: int = 0) -> StepMachine:
    """Halts with ``bit`` after 2n + 2 steps: a plain loop emptying register 0."""
    code = (
        Instr("DECJZ", 0, 2),  # 0
        Instr("DECJZ", 1, 0),  # 1: r1 == 0, back to 0
        Instr(f"HALT{bit}"),   # 2
    )
    return StepMachine(2, code, name=f"countdown({bit})")


def square_search() -> StepMachine:
    """Halts with 1 if n is a perfect square, else 0, by subtracting 1, 3, 5, ...

    r0: remaining, r1: 2k for round k, r2: copy buffer, r3: always zero.
    """
    labels: dict[str, int] = {}
    prog: list[list] = []

    def mark(name):
        labels[name] = len(prog)

    mark("round")
    prog += [["DECJZ", 0, "square"], ["INC", 0]]  # probe for zero, undo
    mark("copy")  # subtract r1 from r0, moving r1 into r2
    prog += [["DECJZ", 1, "sub_one"], ["INC", 2], ["DECJZ", 0, "not_square"], ["DECJZ", 3, "copy"]]
    mark("sub_one")
    prog += [["DECJZ", 0, "not_square"]]
    mark("restore")
    prog += [["DECJZ", 2, "bump"], ["INC", 1], ["DECJZ", 3, "restore"]]
    mark("bump")
    prog += [["INC", 1], ["INC", 1], ["DECJZ", 3, "round"]]
    mark("not_square")
    prog += [["HALT0"]]
    mark("square")
    prog += [["HALT1"]]
    return load_machine_obj({"registers": 4, "code": prog, "labels": labels}, name="square_search")


def library() -> dict[str, StepMachine]:
    """Machines shipped with the package, keyed by their spec-file stem."""
    ms = [
        halts_at(3, 1),
        halts_at(4, 0),
        halts_at(10, 1),
        never_halts(),
        parity_or_loop(),
        countdown(1),
        square_search(),
    ]
    return {_file_stem(m.name): m for m in ms}


def _file_stem(name: str) -> str:
    return name.replace("(", "_").replace(")", "").replace(",", "_")


# -- spec files ---------------------------------------------------------------

_ALLOWED_KEYS = {"registers", "code", "labels"}


def load_machine_obj(obj: dict, name: str = "") -> StepMachine:
    if not isinstance(obj, dict):
        raise MachineError("machine spec must be a JSON object")
    extra = set(obj) - _ALLOWED_KEYS
    if extra:
        raise MachineError(f"unknown machine spec fields: {sorted(extra)}")
    missing = {"registers", "code"} - set(obj)
    if missing:
        raise MachineError(f"missing machine spec fields: {sorted(missing)}")
    registers = obj["registers"]
    if not isinstance(registers, int) or isinstance(registers, bool):
        raise MachineError("'registers' must be an integer")
    labels = obj.get("labels", {})
    if not isinstance(labels, dict) or not all(isinstance(v, int) for v in labels.values()):
        raise MachineError("'labels' must map names to instruction indices")
    code = obj["code"]
    if not isinstance(code, list):
        raise MachineError("'code' must be a list of instructions")

    def resolve(target, pc):
        if isinstance(target, str):
            if target not in labels:
                raise MachineError(f"instruction {pc}: undefined label {target!r}")
            return labels[target]
        if isinstance(target, int) and not isinstance(target, bool):
            return target
        raise MachineError(f"instruction {pc}: bad jump target {target!r}")

    instrs = []
    for pc, raw in enumerate(code):
        if not isinstance(raw, list) or not raw or raw[0] not in OPCODES:
            raise MachineError(f"instruction {pc}: malformed {raw!r}")
        op = raw[0]
        if len(raw) != 1 + OPCODES[op]:
            raise MachineError(f"instruction {pc}: {op} takes {OPCODES[op]} operand(s)")
        if op in ("HALT0", "HALT1"):
            instrs.append(Instr(op))
            continue
        reg = raw[1]
        if not isinstance(reg, int) or isinstance(reg, bool):
            raise MachineError(f"instruction {pc}: register must be an integer")
        if op == "INC":
            instrs.append(Instr(op, reg))
        else:
            instrs.append(Instr(op, reg, resolve(raw[2], pc)))
    return StepMachine(registers, tuple(instrs), name=name)


def load_machine(path: str | Path) -> StepMachine:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MachineError(f"{path}: invalid JSON: {exc}") from exc
    return load_machine_obj(obj, name=path.stem)


def dump_machine(machine: StepMachine) -> dict:
    return {"registers": machine.registers, "code": [i.as_json() for i in machine.code], "labels": {}}


def builtin_machine(text: str) -> StepMachine | None:
    """Resolve ``halts_at(m,b)`` / ``never_halts`` style names, else None."""
    text = text.strip().replace(" ", "")
    if text == "never_halts":
        return never_halts()
    if text.startswith("halts_at(") and text.endswith(")"):
        try:
            m, b = (int(p) for p in text[len("halts_at("):-1].split(","))
        except ValueError:
            return None
        return halts_at(m, b)
    return library().get(text)
