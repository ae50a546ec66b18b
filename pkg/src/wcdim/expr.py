"""A small arithmetic expression language for map and coefficient formulas.

Grammar (``^`` is right associative and binds tighter than unary minus)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Evaluation works on Python floats and on numpy arrays alike, so a map given
as coordinate formulas can be applied to a whole batch of points at once.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import ExpressionDomainError, ExpressionSyntaxError, UnboundVariable

CONSTANTS = {"pi": math.pi}
FUNCTIONS = {
    # name: (min args, max args or None)
    "abs": (1, 1),
    "sqrt": (1, 1),
    "sin": (1, 1),
    "cos": (1, 1),
    "exp": (1, 1),
    "log": (1, 1),
    "min": (2, None),
    "max": (2, None),
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Unary, Bin, Call]


@dataclass(frozen=True)
class Expression:
    """A parsed expression. Equality is structural (on the tree)."""

    tree: Node
    variables: frozenset

    def __call__(self, **bindings):
        return eval_expression(self, bindings)

    def __str__(self) -> str:
        return to_source(self.tree)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[col - 1]!r}", col)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start + 1))
        pos = m.end()
    toks.append(("end", "", len(text) + 1))
    return toks


class _Parser:
    def __init__(self, text: str, allowed: frozenset | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.allowed = allowed
        self.used: set[str] = set()

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, col = self.take()
        if val != value:
            raise ExpressionSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", col)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, col = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {val!r}", col)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[0] == "op" and self.peek()[1] in ("-", "+"):
            op = self.take()[1]
            return Unary(op, self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, col = self.take()
        if kind == "num":
            value = float(val)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(f"number {val} is not finite", col)
            return Num(value)
        if kind == "name":
            if self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    raise ExpressionSyntaxError(f"unknown function {val!r}", col)
                self.take()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                lo, hi = FUNCTIONS[val]
                if len(args) < lo or (hi is not None and len(args) > hi):
                    raise ExpressionSyntaxError(f"wrong number of arguments to {val}", col)
                return Call(val, tuple(args))
            if val in CONSTANTS:
                return Var(val)
            if self.allowed is not None and val not in self.allowed:
                raise ExpressionSyntaxError(f"unknown variable {val!r}", col)
            self.used.add(val)
            return Var(val)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionSyntaxError(f"unexpected {val or 'end of input'!r}", col)


def parse_expression(text: str, variables=None) -> Expression:
    """Parse ``text``; if ``variables`` is given, any other free name is an error."""
    allowed = frozenset(variables) if variables is not None else None
    p = _Parser(text, allowed)
    tree = p.parse()
    return Expression(tree, frozenset(p.used))


def to_source(node: Node) -> str:
    """Render a tree as fully parenthesised source that parses back to itself."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        return f"({node.op}{to_source(node.operand)})"
    if isinstance(node, Bin):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    return f"{node.name}({', '.join(to_source(a) for a in node.args)})"


def _check(value, what: str):
    if not np.all(np.isfinite(value)):
        raise ExpressionDomainError(f"{what} produced a non-finite value")
    return value


def _eval(node: Node, env: Mapping):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name in env:
            return env[node.name]
        if node.name in CONSTANTS:
            return CONSTANTS[node.name]
        raise UnboundVariable(node.name)
    if isinstance(node, Unary):
        v = _eval(node.operand, env)
        return -v if node.op == "-" else v
    if isinstance(node, Bin):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return _check(np.add(a, b), "addition")
        if node.op == "-":
            return _check(np.subtract(a, b), "subtraction")
        if node.op == "*":
            return _check(np.multiply(a, b), "multiplication")
        if node.op == "/":
            if np.any(np.asarray(b) == 0):
                raise ExpressionDomainError("division by zero")
            return _check(np.divide(a, b), "division")
        return _check(np.power(np.asarray(a, dtype=float), b), "power")
    args = [_eval(a, env) for a in node.args]
    name = node.name
    if name == "sqrt":
        if np.any(np.asarray(args[0]) < 0):
            raise ExpressionDomainError("sqrt of a negative number")
        return np.sqrt(args[0])
    if name == "log":
        if np.any(np.asarray(args[0]) <= 0):
            raise ExpressionDomainError("log of a non-positive number")
        return np.log(args[0])
    if name == "exp":
        return _check(np.exp(args[0]), "exp")
    if name == "abs":
        return np.abs(args[0])
    if name == "sin":
        return np.sin(args[0])
    if name == "cos":
        return np.cos(args[0])
    if name == "min":
        return np.minimum.reduce(np.broadcast_arrays(*args))
    return np.maximum.reduce(np.broadcast_arrays(*args))


def eval_expression(e: Expression, bindings: Mapping):
    """Evaluate ``e`` with ``bindings``; returns a float for scalar inputs."""
    with np.errstate(all="ignore"):
        value = _eval(e.tree, bindings)
    value = _check(np.asarray(value, dtype=float), "expression")
    if value.ndim == 0:
        return float(value)
    return value
