"""
A small expression language for coefficient formulas.

Grammar, lowest precedence first::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

So ``-x^2`` is ``-(x^2)`` and ``2^-1`` is ``2^(-1)``.  The only named
constant is ``pi``.  Functions: sin cos tan exp log sqrt abs pow min max.

Evaluation accepts floats or numpy arrays as bindings and broadcasts.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DomainError,
    ExprSyntaxError,
    UnboundVariableError,
    UnknownNameError,
)

# name -> allowed arity
FUNCTIONS = {
    "sin": (1,),
    "cos": (1,),
    "tan": (1,),
    "exp": (1,),
    "log": (1,),
    "sqrt": (1,),
    "abs": (1,),
    "pow": (2,),
    "min": (2, None),
    "max": (2, None),
}
CONSTANTS = {"pi": math.pi}


class Expr:
    """Base class of AST nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""",
    re.VERBOSE,
)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source, variables):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.peek()
        if value != text or kind != "op":
            what = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {what}", pos)
        self.advance()

    def parse(self):
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {value!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            x = float(value)
            if not math.isfinite(x):
                raise ExprSyntaxError("numeric literal out of range", pos)
            return Num(x)
        if kind == "name":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                return self.call(value, pos)
            if value in CONSTANTS:
                return Const(value)
            if value in FUNCTIONS:
                raise ExprSyntaxError(f"function {value!r} needs arguments", self.peek()[2])
            if self.variables is not None and value not in self.variables:
                allowed = ", ".join(sorted(self.variables)) or "none"
                raise UnknownNameError(
                    f"unknown variable {value!r} at offset {pos} (allowed: {allowed})"
                )
            return Var(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {what}", pos)

    def call(self, name, pos):
        if name not in FUNCTIONS:
            raise UnknownNameError(f"unknown function {name!r} at offset {pos}")
        self.expect("(")
        args = [self.expr()]
        while self.peek()[0] == "op" and self.peek()[1] == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name]
        if len(args) not in arity and not (None in arity and len(args) >= arity[0]):
            raise ExprSyntaxError(
                f"{name} takes {arity[0]} argument(s), got {len(args)}", pos
            )
        return Call(name, tuple(args))


def parse(source: str, variables: Iterable[str] | None = None) -> Expr:
    """Parse ``source`` into an AST.

    If ``variables`` is given, any other free name is rejected.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    allowed = None if variables is None else frozenset(variables)
    return _Parser(source, allowed).parse()


def as_expr(value, variables: Iterable[str] | None = None) -> Expr:
    """Coerce a string, number or Expr into an Expr, checking its variables."""
    if isinstance(value, Expr):
        if variables is not None:
            extra = free_variables(value) - set(variables)
            if extra:
                raise UnknownNameError(f"unknown variable(s) {sorted(extra)}")
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Num(float(value))
    return parse(value, variables)


# ------------------------------------------------------------ pretty print

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node):
    if isinstance(node, BinOp):
        return _POW_PREC if node.op == "^" else _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def _wrap(node, needed):
    text = pretty(node)
    return f"({text})" if _prec(node) < needed else text


def pretty(node: Expr) -> str:
    """Render with the minimum parentheses that re-parse to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _NEG_PREC)
    if isinstance(node, Call):
        return f"{node.func}({', '.join(pretty(a) for a in node.args)})"
    if node.op == "^":
        return f"{_wrap(node.left, _ATOM_PREC)}^{_wrap(node.right, _NEG_PREC)}"
    p = _PREC[node.op]
    return f"{_wrap(node.left, p)} {node.op} {_wrap(node.right, p + 1)}"


def free_variables(node: Expr) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        out = set()
        for a in node.args:
            out |= free_variables(a)
        return out
    return set()


def is_constant(node: Expr) -> bool:
    return not free_variables(node)


def is_zero(node: Expr) -> bool:
    return isinstance(node, Num) and node.value == 0.0


# -------------------------------------------------------------- evaluation


def _check(mask, message):
    if np.any(mask):
        raise DomainError(message)


def _log(x):
    _check(np.asarray(x) <= 0, "log of nonpositive argument")
    return np.log(x)


def _sqrt(x):
    _check(np.asarray(x) < 0, "sqrt of negative argument")
    return np.sqrt(x)


def _div(a, b):
    _check(np.asarray(b) == 0, "division by zero")
    return np.divide(a, b)


def _int_pow(a, n):
    """a**n by repeated squaring for a small nonnegative integer n."""
    out = np.ones_like(a)
    base = a
    while n:
        if n & 1:
            out = out * base
        n >>= 1
        if n:
            base = base * base
    return out


def _pow(a, b):
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if b_arr.ndim == 0 and 0 <= b_arr <= 16 and b_arr == int(b_arr):
        return _int_pow(a_arr, int(b_arr))
    _check((a_arr == 0) & (b_arr < 0), "zero raised to a negative power")
    _check((a_arr < 0) & (b_arr != np.round(b_arr)), "negative base with fractional exponent")
    return np.power(a_arr, b_arr)


def _min(*args):
    return _reduce(np.minimum, args)


def _max(*args):
    return _reduce(np.maximum, args)


def _reduce(fn, args):
    out = args[0]
    for a in args[1:]:
        out = fn(out, a)
    return out


_IMPL = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": _log,
    "sqrt": _sqrt,
    "abs": np.abs,
    "pow": _pow,
    "min": _min,
    "max": _max,
}
_BINARY = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": _div, "^": _pow}


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariableError(f"variable {node.name!r} is not bound") from None
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return np.negative(_eval(node.operand, env))
    if isinstance(node, BinOp):
        return _BINARY[node.op](_eval(node.left, env), _eval(node.right, env))
    return _IMPL[node.func](*(_eval(a, env) for a in node.args))


def evaluate(e: Expr | str, bindings: Mapping[str, object] | None = None, **kw):
    """Evaluate an expression.

    Bindings may be scalars or arrays; the result is a float when every
    binding is scalar, otherwise an ndarray.  Raises DomainError for
    log/sqrt/division/power domain violations and for non-finite results.
    """
    if isinstance(e, str):
        e = parse(e)
    env = dict(bindings or {})
    env.update(kw)
    with np.errstate(all="ignore"):
        out = _eval(e, env)
    if not np.all(np.isfinite(out)):
        raise DomainError(f"non-finite value from {pretty(e)!r}")
    if np.ndim(out) == 0:
        return float(out)
    return out


def evaluate_on(e: Expr, shape, bindings=None, **kw) -> np.ndarray:
    """Like evaluate, but always returns an array broadcast to ``shape``."""
    out = evaluate(e, bindings, **kw)
    return np.broadcast_to(np.asarray(out, dtype=float), shape)


# ------------------------------------------------- derivative consistency


@dataclass(frozen=True)
class DerivativeCheck:
    max_discrepancy: float
    worst_point: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tol


def check_derivative_pair(f, fz, interval, n=101, tol=1e-6, var="z") -> DerivativeCheck:
    """Compare ``fz`` against central differences of ``f`` at n points."""
    lo, hi = interval
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    if n < 3:
        raise ValueError("need at least 3 sample points")
    f, fz = as_expr(f), as_expr(fz)
    z = np.linspace(lo, hi, n)
    step = np.maximum(1e-6, 1e-6 * np.abs(z))
    fd = (evaluate_on(f, z.shape, {var: z + step}) - evaluate_on(f, z.shape, {var: z - step})) / (
        2 * step
    )
    err = np.abs(fd - evaluate_on(fz, z.shape, {var: z}))
    i = int(np.argmax(err))
    return DerivativeCheck(float(err[i]), float(z[i]), tol)
