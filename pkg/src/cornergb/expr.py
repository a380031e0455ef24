"""Small expression language for metric components and conformal factors.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' intexp)?
    intexp := [+-] INT | '(' [+-] INT ')'
    atom   := NUMBER | 'pi' | 'x1'..'x4' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := exp | log | sin | cos | sqrt

Expressions evaluate to plain floats/arrays or to :class:`~cornergb.jets.Jet`
values, depending on what the variables are bound to.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import jets
from .errors import SceneError

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


class ExpressionError(SceneError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}, column {column}: "
        elif column is not None:
            where = f"column {column}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    index: int  # 0-based


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Const, Var, Neg, BinOp, Pow, Call]

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(text, line, col0):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r}", line, col0 + pos + 1)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), col0 + pos + 1))
        pos = m.end()
    out.append(("end", "", col0 + len(text) + 1))
    return out


class _Parser:
    def __init__(self, text, line, col0):
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.line = line

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ExpressionError(message, self.line, tok[2])

    def expect(self, value):
        tok = self.next()
        if tok[1] != value:
            raise self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[1] == "-":
            self.next()
            arg = self.unary()
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Neg(arg)
        if tok[1] == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] != "^":
            return base
        self.next()
        paren = self.peek()[1] == "("
        if paren:
            self.next()
        sign = 1
        if self.peek()[1] in ("+", "-"):
            sign = -1 if self.next()[1] == "-" else 1
        tok = self.next()
        if tok[0] != "num" or not tok[1].isdigit():
            raise self.error("exponent must be an integer literal", tok)
        if paren:
            self.expect(")")
        return Pow(base, sign * int(tok[1]))

    def atom(self):
        tok = self.next()
        kind, text, _ = tok
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text == "pi":
                return Const("pi")
            m = re.fullmatch(r"x([1-4])", text)
            if m:
                return Var(int(m.group(1)) - 1)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise self.error(f"unknown variable {text!r}", tok)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise self.error(f"unexpected {text or 'end of input'!r}", tok)


def parse_expression(text, line=None, column=1):
    """Parse ``text`` into an expression tree; errors carry line/column."""
    return _Parser(text, line, column - 1).parse()


def format_expression(node):
    """Render an expression so that ``parse_expression`` reproduces it exactly."""
    if isinstance(node, Num):
        s = repr(float(node.value))
        return f"({s})" if node.value < 0 or s.startswith("-") else s
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{format_expression(node.arg)})"
    if isinstance(node, BinOp):
        return f"({format_expression(node.left)} {node.op} {format_expression(node.right)})"
    if isinstance(node, Pow):
        return f"{format_expression(node.base)}^({node.exponent})" if node.exponent < 0 \
            else f"{format_expression(node.base)}^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.func}({format_expression(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node, variables):
    """Evaluate with ``variables[i]`` bound to x_{i+1} (floats, arrays or Jets).

    Structurally equal subtrees are evaluated once per call.
    """
    return _evaluate(node, variables, {})


def _evaluate(node, variables, memo):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return math.pi
    if isinstance(node, Var):
        return variables[node.index]
    hit = memo.get(node)
    if hit is not None:
        return hit
    if isinstance(node, Neg):
        out = -_evaluate(node.arg, variables, memo)
    elif isinstance(node, BinOp):
        a = _evaluate(node.left, variables, memo)
        b = _evaluate(node.right, variables, memo)
        if node.op == "+":
            out = a + b
        elif node.op == "-":
            out = a - b
        elif node.op == "*":
            out = a * b
        else:
            if not isinstance(b, jets.Jet) and np.any(np.asarray(b) == 0.0):
                raise ZeroDivisionError("division by zero in expression")
            out = a / b
    elif isinstance(node, Pow):
        out = jets.powi(_evaluate(node.base, variables, memo), node.exponent)
    elif isinstance(node, Call):
        out = jets.ANALYTIC[node.func](_evaluate(node.arg, variables, memo))
    else:
        raise TypeError(f"not an expression node: {node!r}")
    memo[node] = out
    return out


def variables(node):
    """Set of 0-based variable indices referenced by ``node``."""
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, (Num, Const)):
        return set()
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Pow):
        return variables(node.base)
    return variables(node.arg)


def is_constant(node):
    if isinstance(node, Var):
        return False
    if isinstance(node, (Num, Const)):
        return True
    if isinstance(node, (Neg,)):
        return is_constant(node.arg)
    if isinstance(node, BinOp):
        return is_constant(node.left) and is_constant(node.right)
    if isinstance(node, Pow):
        return is_constant(node.base)
    return is_constant(node.arg)


# builders used by the catalog -----------------------------------------

def num(v):
    v = float(v)
    return Num(v)


def add(*terms):
    terms = [t for t in terms if not (isinstance(t, Num) and t.value == 0.0)]
    if not terms:
        return Num(0.0)
    node = terms[0]
    for t in terms[1:]:
        node = BinOp("+", node, t)
    return node


def mul(*factors):
    node = factors[0]
    for f in factors[1:]:
        node = BinOp("*", node, f)
    return node


def var(i):
    return Var(i - 1)


def call(name, arg):
    return Call(name, arg)
