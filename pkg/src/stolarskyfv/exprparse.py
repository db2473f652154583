"""Small arithmetic expression language for potentials and coefficients.

Grammar (``^`` is right-associative and binds tighter than unary minus)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Names: variables x, y, z; constants pi, e; functions sin cos exp log
sqrt abs. Evaluation is vectorised over numpy arrays.
"""
from dataclasses import dataclass
import math
import re

import numpy as np

from .errors import ExprDomainError, ExprEvalError, ExprSyntaxError

VARIABLES = ("x", "y", "z")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), len(text[:start].encode())))
        pos = m.end()
    toks.append(("end", "", len(text.encode())))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.take()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off)

    def parse(self):
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in VARIABLES:
                return Var(val)
            if val in CONSTANTS:
                return Const(val)
            raise ExprSyntaxError(f"unknown name {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", off)


def parse(text):
    """Parse ``text`` into an expression tree; raises ExprSyntaxError."""
    if not isinstance(text, str):
        raise ExprSyntaxError("expression must be a string", 0)
    return _Parser(text).parse()


def to_string(node):
    """Fully parenthesised text that parses back to the same tree."""
    if isinstance(node, Num):
        v = node.value
        if not v >= 0:
            raise ValueError("numeric literals are non-negative; use Neg")
        return "1e999" if v == math.inf else repr(v)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_string(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_string(node.left)} {node.op} {to_string(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def variables(node):
    """Set of variable names used by ``node``."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        return variables(node.arg)
    return set()


def _bad(mask):
    return bool(np.any(mask))


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        if node.name not in env:
            raise ExprEvalError(f"variable {node.name!r} is not defined here")
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        a = _eval(node.arg, env)
        fn = node.func
        if fn == "log" and _bad(np.asarray(a) <= 0):
            raise ExprDomainError("log of a non-positive number")
        if fn == "sqrt" and _bad(np.asarray(a) < 0):
            raise ExprDomainError("sqrt of a negative number")
        out = getattr(np, "abs" if fn == "abs" else fn)(a)
        if fn == "exp" and _bad(~np.isfinite(out)):
            raise ExprDomainError("exp overflow")
        return out
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if _bad(np.asarray(b) == 0):
                raise ExprDomainError("division by zero")
            return a / b
        if op == "^":
            base = np.asarray(a, dtype=float)
            ex = np.asarray(b, dtype=float)
            if _bad((base == 0) & (ex < 0)):
                raise ExprDomainError("zero raised to a negative power")
            if _bad((base < 0) & (ex != np.round(ex))):
                raise ExprDomainError("negative base with non-integer exponent")
            out = np.power(base, ex)
            return out if np.ndim(out) else float(out)
    raise TypeError(f"not an expression node: {node!r}")  # pragma: no cover


def evaluate(node, point):
    """Evaluate at ``point``: a mapping of variable names, or a coordinate
    sequence/array whose entries are x, y, z in order. Arrays broadcast."""
    if isinstance(point, dict):
        env = {k: np.asarray(v, dtype=float) if np.ndim(v) else float(v) for k, v in point.items()}
    else:
        coords = list(point) if not np.isscalar(point) else [point]
        env = {}
        for name, c in zip(VARIABLES, coords):
            env[name] = np.asarray(c, dtype=float) if np.ndim(c) else float(c)
    with np.errstate(all="ignore"):
        out = _eval(node, env)
    if _bad(~np.isfinite(out)):
        raise ExprDomainError("expression value is not finite")
    return out


class Expression:
    """A parsed expression usable as a coefficient function f(x, y, ...)."""

    def __init__(self, text):
        self.text = text
        self.tree = parse(text)

    def __call__(self, *coords):
        out = evaluate(self.tree, list(coords))
        if coords and np.ndim(coords[0]):
            return np.broadcast_to(np.asarray(out, dtype=float), np.shape(coords[0])).copy()
        return float(out)

    def __repr__(self):
        return f"Expression({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and other.tree == self.tree

    def __hash__(self):
        return hash(self.tree)
