"""Small arithmetic expression language for coefficients and loads.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          # right associative
    primary := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Names are the variables x and t and the functions sin, cos, exp, sqrt.
Evaluation works elementwise on numpy arrays.
"""

import re
from dataclasses import dataclass, field, replace

import numpy as np

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt}
VARIABLES = ("x", "t")


class ExprError(ValueError):
    """Problem in expression text or its evaluation; ``offset`` is a character offset."""

    def __init__(self, message, offset=None, text=None):
        self.offset = offset
        self.text = text
        if offset is not None:
            message = f"{message} at offset {offset}"
            if text is not None:
                message += f"\n  {text}\n  {' ' * offset}^"
        super().__init__(message)


class ExprSyntaxError(ExprError):
    pass


class ExprEvalError(ExprError):
    pass


@dataclass(frozen=True)
class Num:
    value: float
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    span: tuple = field(default=(0, 0), compare=False)


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


def tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), m.start()))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.variables = tuple(variables)
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        kind, value, pos = self.tok
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"expected {expected}, found {found}", pos, self.text)

    def expect(self, value):
        if self.tok[1] != value or self.tok[0] != "op":
            self.fail(repr(value))
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok[0] != "end":
            self.fail("operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            right = self.term()
            node = BinOp(op, node, right, (node.span[0], right.span[1]))
        return node

    def term(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            right = self.unary()
            node = BinOp(op, node, right, (node.span[0], right.span[1]))
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            start = self.advance()[2]
            operand = self.unary()
            return Neg(operand, (start, operand.span[1]))
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            exponent = self.unary()
            return BinOp("^", base, exponent, (base.span[0], exponent.span[1]))
        return base

    def primary(self):
        kind, value, pos = self.tok
        if kind == "num":
            self.advance()
            return Num(float(value), (pos, pos + len(value)))
        if kind == "name":
            self.advance()
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                close = self.expect(")")
                return Call(value, arg, (pos, close[2] + 1))
            if value in self.variables:
                return Var(value, (pos, pos + len(value)))
            allowed = ", ".join(self.variables + tuple(FUNCTIONS))
            raise ExprSyntaxError(f"unknown identifier {value!r} (allowed: {allowed})", pos, self.text)
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            close = self.expect(")")
            return replace(node, span=(pos, close[2] + 1))
        self.fail("number, variable, function call or '('")


def parse_expr(text, variables=VARIABLES):
    """Parse text into an expression tree; only the given variable names are accepted."""
    return _Parser(text, variables).parse()


def to_text(node):
    """Fully parenthesised source text; parsing it gives back an equal tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node, env, text=None):
    """Evaluate with variable values from env (scalars or arrays)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise ExprEvalError(f"no value for variable {node.name!r}", node.span[0], text) from None
    if isinstance(node, Neg):
        return -evaluate(node.operand, env, text)
    if isinstance(node, Call):
        arg = evaluate(node.arg, env, text)
        if node.func == "sqrt" and np.any(np.asarray(arg) < 0):
            raise ExprEvalError("square root of a negative number", node.span[0], text)
        return FUNCTIONS[node.func](arg)
    if isinstance(node, BinOp):
        left = evaluate(node.left, env, text)
        right = evaluate(node.right, env, text)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if np.any(np.asarray(right) == 0):
                raise ExprEvalError("division by zero", node.right.span[0], text)
            return left / right
        with np.errstate(all="ignore"):
            out = np.power(np.asarray(left, dtype=float), right)
        if not np.all(np.isfinite(out)) and np.all(np.isfinite(left)) and np.all(np.isfinite(right)):
            raise ExprEvalError("power is undefined here", node.span[0], text)
        return out if np.ndim(out) else float(out)
    raise TypeError(f"not an expression node: {node!r}")


def uses(node, name):
    if isinstance(node, Var):
        return node.name == name
    if isinstance(node, (Neg, Call)):
        return uses(node.operand if isinstance(node, Neg) else node.arg, name)
    if isinstance(node, BinOp):
        return uses(node.left, name) or uses(node.right, name)
    return False


class Expression:
    """Compiled expression callable as f(x) or f(x, t), broadcasting over arrays."""

    def __init__(self, text, variables=VARIABLES):
        self.text = text
        self.variables = tuple(variables)
        self.tree = parse_expr(text, self.variables)

    def __call__(self, *args):
        if len(args) != len(self.variables):
            raise TypeError(f"expression in {self.variables} called with {len(args)} arguments")
        env = dict(zip(self.variables, args))
        shape = np.broadcast(*[np.asarray(a) for a in args]).shape
        value = evaluate(self.tree, env, self.text)
        if shape:
            return np.broadcast_to(np.asarray(value, dtype=float), shape).copy()
        return float(value)

    def constant(self):
        """Value of an expression with no free variables."""
        for v in self.variables:
            if uses(self.tree, v):
                raise ExprError(f"expected a constant, {self.text!r} depends on {v}")
        return float(evaluate(self.tree, {}, self.text))

    def __repr__(self):
        return f"Expression({self.text!r})"


def constant(text):
    return Expression(text, ()).constant()
