"""Small arithmetic-expression parser used for anisotropy data.

Grammar (radians everywhere):

    expr    := term (('+'|'-') term)*
    term    := unary (('*'|'/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Identifiers: variables ``theta`` (normal angle), ``s`` (support), ``absx``
(distance from the origin) and the functions sin, cos, tan, cosh, sinh,
exp, log.  Evaluation is vectorised over numpy arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import ExpressionError

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "exp": np.exp,
    "log": np.log,
}

VARIABLES = ("theta", "s", "absx")


class Node:
    """AST node base; subclasses implement ``evaluate`` and ``pretty``."""

    def evaluate(self, env):
        raise NotImplementedError

    def pretty(self):
        raise NotImplementedError

    def variables(self):
        return set()


class Num(Node):
    def __init__(self, value):
        self.value = float(value)

    def evaluate(self, env):
        return self.value

    def pretty(self):
        return repr(self.value)


class Var(Node):
    def __init__(self, name):
        self.name = name

    def evaluate(self, env):
        return env[self.name]

    def pretty(self):
        return self.name

    def variables(self):
        return {self.name}


class Neg(Node):
    def __init__(self, child):
        self.child = child

    def evaluate(self, env):
        return -self.child.evaluate(env)

    def pretty(self):
        return "(-" + self.child.pretty() + ")"

    def variables(self):
        return self.child.variables()


class BinOp(Node):
    def __init__(self, op, left, right):
        self.op = op
        self.left = left
        self.right = right

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            bad = np.any(b == 0) if np.ndim(b) else b == 0
            if bad:
                raise ExpressionError("division by zero during evaluation")
            return a / b
        # power
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.power(a, b, dtype=float) if np.ndim(a) or np.ndim(b) else float(a) ** float(b)
        if not np.all(np.isfinite(out)):
            raise ExpressionError("non-finite result in power evaluation")
        return out

    def pretty(self):
        return "(" + self.left.pretty() + " " + self.op + " " + self.right.pretty() + ")"

    def variables(self):
        return self.left.variables() | self.right.variables()


class Call(Node):
    def __init__(self, fname, arg):
        self.fname = fname
        self.arg = arg

    def evaluate(self, env):
        val = FUNCTIONS[self.fname](self.arg.evaluate(env))
        if not np.all(np.isfinite(val)):
            raise ExpressionError(f"non-finite result in {self.fname}()")
        return val

    def pretty(self):
        return self.fname + "(" + self.arg.pretty() + ")"

    def variables(self):
        return self.arg.variables()


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, expected):
        raise ExpressionError(
            f"syntax error at byte {self.pos}: expected {expected}",
            position=self.pos,
            expected=expected,
        )

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self):
        node = self.parse_expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("end of input")
        return node

    def parse_expr(self):
        node = self.parse_term()
        while True:
            ch = self.peek()
            if ch and ch in "+-":
                self.pos += 1
                rhs = self.parse_term()
                node = BinOp(ch, node, rhs)
            else:
                return node

    def parse_term(self):
        node = self.parse_unary()
        while True:
            ch = self.peek()
            if ch and ch in "*/":
                self.pos += 1
                rhs = self.parse_unary()
                node = BinOp(ch, node, rhs)
            else:
                return node

    def parse_unary(self):
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.peek() == "^":
            self.pos += 1
            exponent = self.parse_unary()
            return BinOp("^", base, exponent)
        return base

    def parse_atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.parse_expr()
            if self.peek() != ")":
                self.error("')'")
            self.pos += 1
            return node
        if ch.isdigit() or ch == ".":
            return self.parse_number()
        if ch.isalpha() or ch == "_":
            return self.parse_ident()
        self.error("expression")

    def parse_number(self):
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isdigit() or text[self.pos] == "."):
            self.pos += 1
        if self.pos < len(text) and text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(text) and text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(text) and text[self.pos].isdigit():
                while self.pos < len(text) and text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark
        try:
            return Num(float(text[start:self.pos]))
        except ValueError:
            self.pos = start
            self.error("number")

    def parse_ident(self):
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
            self.pos += 1
        name = text[start:self.pos]
        if name in FUNCTIONS:
            if self.peek() != "(":
                self.error("'(' after function name")
            self.pos += 1
            arg = self.parse_expr()
            if self.peek() != ")":
                self.error("')'")
            self.pos += 1
            return Call(name, arg)
        if name in VARIABLES:
            return Var(name)
        self.pos = start
        self.error(f"known identifier (got '{name}')")


def parse_expression(text: str) -> Node:
    """Parse ``text`` into an evaluable AST.

    Raises ExpressionError with byte position and the expected token on
    malformed input.
    """
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression", position=0, expected="expression")
    return _Parser(text).parse()


def evaluate(node: Node, theta=None, s=None, absx=None):
    """Evaluate an AST with the given variable bindings (numpy-vectorised)."""
    env = {}
    if theta is not None:
        env["theta"] = np.asarray(theta, dtype=float) if np.ndim(theta) else float(theta)
    if s is not None:
        env["s"] = np.asarray(s, dtype=float) if np.ndim(s) else float(s)
    if absx is not None:
        env["absx"] = np.asarray(absx, dtype=float) if np.ndim(absx) else float(absx)
    missing = node.variables() - set(env)
    if missing:
        raise ExpressionError(f"unbound variables: {sorted(missing)}")
    return node.evaluate(env)
