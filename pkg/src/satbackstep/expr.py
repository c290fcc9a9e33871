"""Closed-form expressions used in scenario files.

Grammar: numeric literals, the names ``t`` and ``x1 .. xn`` (plus ``pi``),
``+ - * /``, integer powers written ``**`` or ``^`` and the calls ``sin(.)``
and ``cos(.)``.  Parsing goes through :mod:`ast`; anything outside the
whitelist is rejected.  A compiled :class:`Expr` evaluates on floats, on
:class:`~satbackstep.jet.Jet` values and on traced scalars alike.
"""

import ast
import math

from . import jet as _jet
from .errors import ConfigError

_BINOPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/", ast.Pow: "**"}
_FUNCS = {"sin": _jet.sin, "cos": _jet.cos}


class Expr:
    """A parsed expression with a fixed set of free variables.

    Attributes:
        text: the source string.
        names: free variable names, sorted.
    """

    def __init__(self, text, fn, names, const=None):
        self.text = text
        self._fn = fn
        self.names = tuple(sorted(names))
        self.const = const

    def __call__(self, env):
        return self._fn(env)

    def __repr__(self):
        return f"Expr({self.text!r})"

    @property
    def is_constant(self):
        return self.const is not None

    def max_state_index(self):
        idx = [int(n[1:]) for n in self.names if n.startswith("x")]
        return max(idx, default=0)


def _int_exponent(node, where):
    sign = 1
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        sign = -1 if isinstance(node.op, ast.USub) else 1
        node = node.operand
    if (isinstance(node, ast.Constant) and isinstance(node.value, (int, float))
            and not isinstance(node.value, bool)
            and float(node.value).is_integer()):
        m = sign * int(node.value)
        if m >= 0:
            return m
    raise ConfigError(f"{where}: exponent must be a non-negative integer literal")


def _build(node, where, allowed, names):
    """Return ``(closure, constant_or_None)`` for an AST node."""
    if isinstance(node, ast.Expression):
        return _build(node.body, where, allowed, names)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ConfigError(f"{where}: unsupported literal {node.value!r}")
        c = float(node.value)
        return (lambda env: c), c
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return (lambda env: math.pi), math.pi
        if node.id not in allowed:
            raise ConfigError(
                f"{where}: unknown name {node.id!r} (allowed: {', '.join(sorted(allowed))})")
        key = node.id
        names.add(key)
        return (lambda env: env[key]), None
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner, c = _build(node.operand, where, allowed, names)
        if isinstance(node.op, ast.UAdd):
            return inner, c
        if c is not None:
            return (lambda env: -c), -c
        return (lambda env: -inner(env)), None
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left, lc = _build(node.left, where, allowed, names)
        if isinstance(node.op, ast.Pow):
            m = _int_exponent(node.right, where)
            if lc is not None:
                v = _jet.int_pow(lc, m)
                return (lambda env: v), v
            return (lambda env: _jet.int_pow(left(env), m)), None
        right, rc = _build(node.right, where, allowed, names)
        op = type(node.op)
        if lc is not None and rc is not None:
            v = _apply(op, lc, rc, where)
            return (lambda env: v), v
        return (lambda env: _apply(op, left(env), right(env))), None
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ConfigError(f"{where}: only sin() and cos() calls are allowed")
        if len(node.args) != 1 or node.keywords:
            raise ConfigError(f"{where}: {node.func.id}() takes exactly one argument")
        fn = _FUNCS[node.func.id]
        arg, c = _build(node.args[0], where, allowed, names)
        if c is not None:
            v = fn(c)
            return (lambda env: v), v
        return (lambda env: fn(arg(env))), None
    raise ConfigError(f"{where}: unsupported syntax {type(node).__name__}")


def _apply(op, a, b, where="expression"):
    if op is ast.Add:
        return a + b
    if op is ast.Sub:
        return a - b
    if op is ast.Mult:
        return a * b
    if op is ast.Div:
        if isinstance(a, (int, float)) and isinstance(b, (int, float)) and b == 0:
            raise ConfigError(f"{where}: division by the constant zero")
        return a / b
    raise ConfigError(f"{where}: unsupported operator {op.__name__}")


def parse_expr(text, allowed, where="expression"):
    """Parse ``text`` allowing only the free variable names in ``allowed``.

    Raises:
        ConfigError: on syntax errors or anything outside the grammar; the
            message names ``where`` and the column of the problem.
    """
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str):
        raise ConfigError(f"{where}: expected an expression string, got {type(text).__name__}")
    source = text.replace("^", "**")
    try:
        tree = ast.parse(source.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"{where}: syntax error at column {exc.offset}: {text!r}") from None
    names = set()
    fn, const = _build(tree, where, frozenset(allowed), names)
    return Expr(text, fn, names, const)
