"""Problem files: a small text grammar for LPs with CRN coefficients.

Example::

    # family P
    machine M = halts_at(3,1)
    max x ; st s(M,5)*x = 0, x >= 0, x <= 1

Coefficient expressions::

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := rational | s(M,n) | a(M,n) | b(M,n) | max(expr,expr) | min(expr,expr)
            | '(' expr ')' | '-' factor | factor '/' rational | variable
    rational := int | int '/' posint

A variable is sign-restricted exactly when the constraint ``name >= 0``
appears; all other variables are free.  ``machine NAME = SPEC`` binds a machine
name to a built-in (``halts_at(m,b)``, ``never_halts``, a library name) or to a
JSON spec path relative to the problem file.  An optional ``vars x, y`` line
fixes the variable order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from . import machines as mc
from .clp_engine import (
    ONE,
    ZERO,
    Add,
    Clpp,
    ClppConstraint,
    CrnExpr,
    DivRat,
    Max,
    Min,
    Mul,
    Neg,
    PairA,
    PairB,
    RatLit,
    Specker,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, IDENT, OP, NL, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(<=|>=|[-+*/(),;=]))")


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    depth = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        pos = 0
        while True:
            while pos < len(line) and line[pos] in " \t\r":
                pos += 1
            if pos >= len(line):
                break
            m = _TOKEN_RE.match(line, pos)
            if m is None or m.end() == pos:
                raise ParseError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
            col = m.start(m.lastindex) + 1
            if m.group(1):
                tokens.append(Token("NUM", m.group(1), lineno, col))
            elif m.group(2):
                tokens.append(Token("IDENT", m.group(2), lineno, col))
            else:
                op = m.group(3)
                depth += op == "("
                depth -= op == ")"
                tokens.append(Token("OP", op, lineno, col))
            pos = m.end()
        if depth == 0 and tokens and tokens[-1].kind != "NL":
            tokens.append(Token("NL", "\n", lineno, len(line) + 1))
    last = tokens[-1].line if tokens else 1
    tokens.append(Token("EOF", "", last + 1, 1))
    return tokens


# -- linear forms -------------------------------------------------------------


@dataclass
class _Linear:
    coeffs: dict[str, CrnExpr] = field(default_factory=dict)
    const: CrnExpr | None = None


def _scale(k: CrnExpr, c: CrnExpr) -> CrnExpr:
    if c == ONE:
        return k
    if k == ONE:
        return c
    return Mul(k, c)


def _lin_add(a: _Linear, b: _Linear) -> _Linear:
    coeffs = dict(a.coeffs)
    for v, c in b.coeffs.items():
        coeffs[v] = Add(coeffs[v], c) if v in coeffs else c
    if a.const is None:
        const = b.const
    elif b.const is None:
        const = a.const
    else:
        const = Add(a.const, b.const)
    return _Linear(coeffs, const)


def _lin_neg(a: _Linear) -> _Linear:
    return _Linear({v: Neg(c) for v, c in a.coeffs.items()}, None if a.const is None else Neg(a.const))


def _lin_map(a: _Linear, f) -> _Linear:
    return _Linear({v: f(c) for v, c in a.coeffs.items()}, None if a.const is None else f(a.const))


# -- parser -------------------------------------------------------------------

_FUNCS = {"s": Specker, "a": PairA, "b": PairB}
_KEYWORDS = {"max", "min", "st", "vars", "machine"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0
        self.refs: list[tuple[str, Token]] = []
        self.var_order: list[str] = []

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def take(self, text: str | None = None, kind: str | None = None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            got = "end of input" if t.kind == "EOF" else repr(t.text)
            self.error(f"expected {want}, found {got}")
        self.i += 1
        return t

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("OP", "IDENT") and self.tok.text in texts

    def skip_newlines(self):
        while self.tok.kind == "NL":
            self.i += 1

    # expr := term (('+'|'-') term)*
    def expr(self) -> _Linear:
        acc = self.term()
        while self.at("+", "-"):
            op = self.take().text
            rhs = self.term()
            acc = _lin_add(acc, rhs if op == "+" else _lin_neg(rhs))
        return acc

    def term(self) -> _Linear:
        acc = self.factor()
        while self.at("*"):
            op_tok = self.take()
            rhs = self.factor()
            if acc.coeffs and rhs.coeffs:
                self.error("product of two variable terms is not linear", op_tok)
            if not acc.coeffs:
                k = acc.const
                acc = _Linear(
                    {v: _scale(k, c) for v, c in rhs.coeffs.items()},
                    None if rhs.const is None else Mul(k, rhs.const),
                )
            else:
                k = rhs.const
                acc = _Linear(
                    {v: _scale(k, c) for v, c in acc.coeffs.items()},
                    None if acc.const is None else Mul(acc.const, k),
                )
        return acc

    def factor(self, acc: _Linear | None = None) -> _Linear:
        if acc is None:
            acc = self.primary()
        while self.at("/"):
            self.take()
            q = self.rational(divisor=True)
            acc = _lin_map(acc, lambda c, q=q: DivRat(c, q))
        return acc

    def rational(self, divisor: bool = False) -> Fraction:
        num_tok = self.take(kind="NUM")
        value = Fraction(int(num_tok.text))
        if self.at("/") and self.peek().kind == "NUM":
            self.take()
            den_tok = self.take(kind="NUM")
            if int(den_tok.text) == 0:
                self.error("zero denominator in rational literal", den_tok)
            value /= int(den_tok.text)
        if divisor and value == 0:
            self.error("division by zero", num_tok)
        return value

    def constant_arg(self) -> CrnExpr:
        tok = self.tok
        lin = self.expr()
        if lin.coeffs:
            self.error("max/min arguments must not contain variables", tok)
        return lin.const

    def primary(self) -> _Linear:
        t = self.tok
        if t.kind == "NUM":
            return _Linear({}, RatLit(self.rational()))
        if t.kind == "OP" and t.text == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        if t.kind == "OP" and t.text == "-":
            self.take()
            if self.tok.kind == "NUM":
                # a minus sign glued to a number is a signed literal
                return self.factor(_Linear({}, RatLit(-self.rational())))
            return _lin_neg(self.factor())
        if t.kind == "IDENT" and self.peek().text == "(":
            name = t.text
            if name in _FUNCS:
                self.take()
                self.take("(")
                ref = self.take(kind="IDENT")
                self.take(",")
                n = int(self.take(kind="NUM").text)
                self.take(")")
                self.refs.append((ref.text, ref))
                return _Linear({}, _FUNCS[name](ref.text, n))
            if name in ("max", "min"):
                self.take()
                self.take("(")
                left = self.constant_arg()
                self.take(",")
                right = self.constant_arg()
                self.take(")")
                return _Linear({}, (Max if name == "max" else Min)(left, right))
            self.error(f"unknown function {name!r}")
        if t.kind == "IDENT" and t.text not in _KEYWORDS:
            self.take()
            if t.text not in self.var_order:
                self.var_order.append(t.text)
            return _Linear({t.text: ONE}, None)
        got = "end of input" if t.kind == "EOF" else repr(t.text)
        self.error(f"expected an expression, found {got}")


@dataclass(frozen=True)
class ProblemFile:
    clpp: Clpp
    bindings: tuple[tuple[str, str], ...] = ()
    base_dir: str = "."

    def environment(self, extra: Mapping[str, mc.StepMachine] | None = None) -> dict[str, mc.StepMachine]:
        env = dict(extra or {})
        for name, spec in self.bindings:
            env[name] = resolve_machine(spec, self.base_dir, name)
        return env


def resolve_machine(spec: str, base_dir: str | Path = ".", name: str = "") -> mc.StepMachine:
    m = mc.builtin_machine(spec)
    if m is not None:
        return m
    path = Path(spec)
    if not path.is_absolute():
        path = Path(base_dir) / path
    if not path.exists():
        raise mc.MachineError(f"machine {name or spec!r}: no built-in or file named {spec!r}")
    return mc.load_machine(path)


_BINDING_RE = re.compile(r"^\s*machine\s+([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(\S.*?)\s*$")


def _split_bindings(text: str) -> tuple[str, list[tuple[str, str, int]]]:
    body, bindings = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0]
        if re.match(r"^\s*machine\b", stripped):
            m = _BINDING_RE.match(stripped)
            if m is None:
                raise ParseError("malformed machine binding; expected 'machine NAME = SPEC'", lineno, 1)
            bindings.append((m.group(1), m.group(2), lineno))
            body.append("")
        else:
            body.append(line)
    return "\n".join(body), bindings


def parse_problem(text: str, known_machines: Mapping | set | None = None, base_dir: str | Path = ".") -> ProblemFile:
    """Parse problem text into a ``ProblemFile`` (a ``Clpp`` plus machine bindings)."""
    body, bindings = _split_bindings(text)
    seen: dict[str, int] = {}
    for name, _, lineno in bindings:
        if name in seen:
            raise ParseError(f"machine {name!r} bound twice", lineno, 1)
        seen[name] = lineno
    p = _Parser(_tokenize(body))
    p.skip_newlines()

    declared: list[str] | None = None
    if p.at("vars"):
        p.take()
        declared = [p.take(kind="IDENT").text]
        while p.at(","):
            p.take()
            declared.append(p.take(kind="IDENT").text)
        bad = [v for v in declared if v in _KEYWORDS]
        if bad:
            p.error(f"{bad[0]!r} is a keyword, not a variable name")
        if len(set(declared)) != len(declared):
            p.error("duplicate variable in vars declaration")
        p.var_order = list(declared)
        if p.at(";"):
            p.take()
        p.skip_newlines()

    if not p.at("max", "min"):
        p.error("expected 'max' or 'min'")
    sense = p.take().text
    obj_tok = p.tok
    objective = p.expr()
    if objective.const is not None:
        p.error("constant terms in the objective are not supported", obj_tok)
    while p.at(";") or p.tok.kind == "NL":
        p.take()

    rows: list[tuple[_Linear, str, _Linear, Token]] = []
    if p.at("st"):
        p.take()
        while True:
            while p.at(",", ";") or p.tok.kind == "NL":
                p.take()
            if p.tok.kind == "EOF":
                break
            start = p.tok
            lhs = p.expr()
            if not p.at("=", "<=", ">="):
                p.error("expected a relation '=', '<=' or '>='")
            rel = p.take().text
            rhs = p.expr()
            rows.append((lhs, rel, rhs, start))
            if not (p.at(",", ";") or p.tok.kind in ("NL", "EOF")):
                p.error("expected ',' ';' or a new line between constraints")
    elif p.tok.kind != "EOF":
        p.error("expected 'st' before the constraints")

    known = set(known_machines or ()) | set(seen)
    for name, tok in p.refs:
        if name not in known:
            raise ParseError(f"machine {name!r} is not bound", tok.line, tok.col)

    variables = tuple(p.var_order)
    if declared is not None and set(variables) != set(declared):
        extra = [v for v in variables if v not in declared]
        raise ParseError(f"undeclared variable(s): {', '.join(extra)}")

    nonneg = {v: False for v in variables}
    constraints = []
    for lhs, rel, rhs, start in rows:
        # (lhs - rhs) rel 0  ->  coeffs rel (rhs.const - lhs.const)
        coeffs = dict(lhs.coeffs)
        for v, c in rhs.coeffs.items():
            coeffs[v] = Add(coeffs[v], Neg(c)) if v in coeffs else Neg(c)
        if lhs.const is None:
            const = rhs.const if rhs.const is not None else ZERO
        else:
            const = Add(rhs.const if rhs.const is not None else ZERO, Neg(lhs.const))
        if rel == ">=" and const == ZERO and len(coeffs) == 1 and next(iter(coeffs.values())) == ONE and lhs.const is None:
            nonneg[next(iter(coeffs))] = True
            continue
        if not coeffs:
            raise ParseError("constraint has no variables", start.line, start.col)
        constraints.append(ClppConstraint(tuple(coeffs.get(v, ZERO) for v in variables), rel, const))

    clpp = Clpp(
        sense,
        variables,
        tuple(objective.coeffs.get(v, ZERO) for v in variables),
        tuple(constraints),
        tuple(nonneg[v] for v in variables),
    )
    return ProblemFile(clpp, tuple((n, s) for n, s, _ in bindings), str(base_dir))


def parse_expr(text: str, known_machines: Mapping | set | None = None) -> CrnExpr:
    """Parse a variable-free coefficient expression."""
    p = _Parser(_tokenize(text))
    p.skip_newlines()
    start = p.tok
    lin = p.expr()
    p.skip_newlines()
    if p.tok.kind != "EOF":
        p.error(f"unexpected {p.tok.text!r} after expression")
    if lin.coeffs:
        p.error("expression must not contain variables", start)
    if known_machines is not None:
        for name, tok in p.refs:
            if name not in known_machines:
                raise ParseError(f"machine {name!r} is not bound", tok.line, tok.col)
    return lin.const


def load_problem(path: str | Path, known_machines=None) -> ProblemFile:
    path = Path(path)
    return parse_problem(path.read_text(encoding="utf-8"), known_machines, base_dir=path.parent)


# -- formatting ---------------------------------------------------------------


def _fmt_rat(q: Fraction) -> str:
    if q < 0:
        return f"(-{_fmt_rat(-q)})"
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_expr(e: CrnExpr) -> str:
    if isinstance(e, RatLit):
        return _fmt_rat(e.value)
    if isinstance(e, Specker):
        return f"s({e.machine},{e.n})"
    if isinstance(e, PairA):
        return f"a({e.machine},{e.n})"
    if isinstance(e, PairB):
        return f"b({e.machine},{e.n})"
    if isinstance(e, Neg):
        return f"-({format_expr(e.arg)})"
    if isinstance(e, DivRat):
        if e.divisor < 0:
            return f"-(({format_expr(e.arg)})/{_fmt_rat(-e.divisor)})"
        return f"({format_expr(e.arg)})/{_fmt_rat(e.divisor)}"
    if isinstance(e, Add):
        return f"({format_expr(e.left)} + {format_expr(e.right)})"
    if isinstance(e, Mul):
        return f"({format_expr(e.left)} * {format_expr(e.right)})"
    name = "max" if isinstance(e, Max) else "min"
    return f"{name}({format_expr(e.left)}, {format_expr(e.right)})"


def _fmt_linear(variables, coeffs) -> str:
    terms = [f"({format_expr(c)})*{v}" for v, c in zip(variables, coeffs) if c != ZERO]
    if not terms:
        terms = [f"(0)*{variables[0]}"]
    return " + ".join(terms)


def format_problem(pf: ProblemFile | Clpp) -> str:
    if isinstance(pf, Clpp):
        pf = ProblemFile(pf)
    p = pf.clpp
    lines = [f"machine {name} = {spec}" for name, spec in pf.bindings]
    lines.append("vars " + ", ".join(p.variables))
    lines.append(f"{p.sense} {_fmt_linear(p.variables, p.objective)}")
    lines.append("st")
    for v, nn in zip(p.variables, p.nonneg):
        if nn:
            lines.append(f"  {v} >= 0")
    for con in p.constraints:
        lines.append(f"  {_fmt_linear(p.variables, con.row)} {con.rel} {format_expr(con.rhs)}")
    return "\n".join(lines) + "\n"
