"""
A small expression language for functions ``f(t)`` and Lagrangians ``L(t, x, v)``.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?            # right-associative
    atom   := NUMBER | 'pi' | 'e' | IDENT | FUNC '(' expr ')' | '(' expr ')'

The exponent of ``^`` must be free of variables; it is folded to a constant
at parse time.  Trees are immutable and compare structurally.

    >>> e = parse("v*v/2", {"t", "x", "v"})
    >>> str(diff(e, "v"))
    '(v + v)/2'
    >>> evaluate(e, {"v": 3.0})
    4.5
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DomainError, ExprSyntaxError, UnboundVariable, UnknownVariable

FUNCTIONS = ("sin", "cos", "exp", "ln", "abs", "sqrt", "sign")
CONSTANTS = {"pi": math.pi, "e": math.e}

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


class Expr:
    """Base node.  Subclasses are frozen dataclasses."""

    __slots__ = ()

    def __str__(self):
        return to_source(self)

    def free_vars(self) -> frozenset[str]:
        return free_vars(self)

    def __call__(self, **bindings: float) -> float:
        return evaluate(self, bindings)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float
    name: str | None = None  # "pi" / "e" for named constants


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Unary(Expr):
    op: str  # "neg" or one of FUNCTIONS
    arg: Expr


@dataclass(frozen=True, eq=True)
class Binary(Expr):
    op: str  # + - * / ^
    left: Expr
    right: Expr


ZERO = Const(0.0)
ONE = Const(1.0)

# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),−])
""", re.VERBOSE)


def _tokenize(source: str):
    pos = 0
    out = []
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        text = m.group(kind)
        if kind == "op":
            text = {"−": "-", "**": "^"}.get(text, text)
        if kind != "ws":
            out.append((kind, text, pos))
        pos = m.end()
    out.append(("end", "", len(source)))
    return out


class _Parser:
    def __init__(self, source: str, allowed: frozenset[str]):
        self.tokens = _tokenize(source)
        self.i = 0
        self.allowed = allowed

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, tok, pos = self.take()
        if tok != text:
            raise ExprSyntaxError(f"expected {text!r}, found {tok or 'end of input'!r}", pos)

    def parse(self) -> Expr:
        node = self.expr()
        kind, tok, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {tok!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        kind, tok, pos = self.peek()
        if kind == "op" and tok == "-":
            self.take()
            return Unary("neg", self.unary())
        if kind == "op" and tok == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, tok, pos = self.peek()
        if kind == "op" and tok == "^":
            self.take()
            exp_pos = self.peek()[2]
            exponent = self.unary()
            if free_vars(exponent):
                raise ExprSyntaxError("exponent must be a constant", exp_pos)
            try:
                value = evaluate(exponent, {})
            except DomainError as exc:
                raise ExprSyntaxError(f"invalid exponent: {exc}", exp_pos) from None
            return Binary("^", base, exponent if isinstance(exponent, Const) else Const(value))
        return base

    def atom(self):
        kind, tok, pos = self.take()
        if kind == "num":
            return Const(float(tok))
        if kind == "ident":
            if tok in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(tok, arg)
            if self.peek()[1] == "(":
                raise ExprSyntaxError(f"unknown function {tok!r}", pos)
            if tok in self.allowed:
                return Var(tok)
            if tok in CONSTANTS:
                return Const(CONSTANTS[tok], tok)
            raise UnknownVariable(tok, pos)
        if kind == "op" and tok == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"unexpected {tok or 'end of input'!r}", pos)


def parse(source: str, allowed_vars: Iterable[str] = ("t",)) -> Expr:
    """Parse ``source`` into an expression tree over ``allowed_vars``.

    Raises :class:`ExprSyntaxError` (with a character position) on malformed
    input and :class:`UnknownVariable` for identifiers outside the allowed set.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(source, frozenset(allowed_vars)).parse()


# ---------------------------------------------------------------------------
# printing


def _fmt_number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _prec(e: Expr) -> int:
    if isinstance(e, Const):
        return _PREC_NEG if e.value < 0 and e.name is None else _PREC_ATOM
    if isinstance(e, Var):
        return _PREC_ATOM
    if isinstance(e, Unary):
        return _PREC_NEG if e.op == "neg" else _PREC_ATOM
    return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[e.op]


def _wrap(e: Expr, parens: bool) -> str:
    s = to_source(e)
    return f"({s})" if parens else s


def to_source(e: Expr) -> str:
    """Render ``e`` in the parser's syntax with minimal parentheses."""
    if isinstance(e, Const):
        return e.name if e.name else _fmt_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + _wrap(e.arg, _prec(e.arg) <= _PREC_NEG)
        return f"{e.op}({to_source(e.arg)})"
    p = _prec(e)
    if e.op == "^":
        return _wrap(e.left, _prec(e.left) <= _PREC_POW) + "^" + _wrap(e.right, _prec(e.right) < _PREC_ATOM)
    right_parens = _prec(e.right) <= p or _prec(e.right) == _PREC_NEG
    left = _wrap(e.left, _prec(e.left) < p or (e.op in "*/" and _prec(e.left) == _PREC_NEG))
    right = _wrap(e.right, right_parens)
    if e.op in "+-":
        return f"{left} {e.op} {right}"
    return f"{left}{e.op}{right}"


# ---------------------------------------------------------------------------
# structure


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Unary):
        return free_vars(e.arg)
    return free_vars(e.left) | free_vars(e.right)


# ---------------------------------------------------------------------------
# evaluation


def _check(x: float) -> float:
    if not math.isfinite(x):
        raise DomainError(f"non-finite intermediate value {x!r}")
    return x


def _sign(x):
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    raise DomainError("sign(0) is undefined (derivative of abs at its kink)")


def evaluate(e: Expr, bindings: Mapping[str, float]) -> float:
    """Tree-walking evaluation; domain violations raise :class:`DomainError`."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Unary):
        a = evaluate(e.arg, bindings)
        op = e.op
        if op == "neg":
            return -a
        if op == "ln":
            if a <= 0:
                raise DomainError(f"ln of non-positive value {a!r}")
            return math.log(a)
        if op == "sqrt":
            if a < 0:
                raise DomainError(f"sqrt of negative value {a!r}")
            return math.sqrt(a)
        if op == "exp":
            try:
                return math.exp(a)
            except OverflowError:
                raise DomainError(f"exp({a!r}) overflows") from None
        if op == "sin":
            return math.sin(a)
        if op == "cos":
            return math.cos(a)
        if op == "abs":
            return abs(a)
        if op == "sign":
            return _sign(a)
        raise ValueError(f"unknown unary op {op!r}")
    a = evaluate(e.left, bindings)
    b = evaluate(e.right, bindings)
    op = e.op
    if op == "+":
        return _check(a + b)
    if op == "-":
        return _check(a - b)
    if op == "*":
        return _check(a * b)
    if op == "/":
        if b == 0:
            raise DomainError("division by zero")
        return _check(a / b)
    if a == 0 and b < 0:
        raise DomainError("zero raised to a negative power")
    if a < 0 and not float(b).is_integer():
        raise DomainError("negative base with non-integer exponent")
    try:
        return _check(a ** b)
    except OverflowError:
        raise DomainError("power overflows") from None


def _codegen(e: Expr) -> str:
    if isinstance(e, Const):
        return f"({e.value!r})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        a = _codegen(e.arg)
        return {
            "neg": f"(-{a})", "sin": f"_m.sin({a})", "cos": f"_m.cos({a})",
            "exp": f"_m.exp({a})", "ln": f"_m.log({a})", "sqrt": f"_m.sqrt({a})",
            "abs": f"abs({a})", "sign": f"_sign({a})",
        }[e.op]
    a, b = _codegen(e.left), _codegen(e.right)
    if e.op == "^":
        return f"_m.pow({a}, {b})"
    return f"({a} {e.op} {b})"


def compile_expr(e: Expr, args: Sequence[str]) -> Callable[..., float]:
    """Compile ``e`` to a fast positional-argument Python function.

    Semantics match :func:`evaluate`: math-domain failures, division by zero
    and overflow all surface as :class:`DomainError`.
    """
    missing = free_vars(e) - set(args)
    if missing:
        raise UnboundVariable(sorted(missing)[0])
    src = f"lambda {', '.join(args)}: {_codegen(e)}" if args else f"lambda: {_codegen(e)}"
    raw = eval(src, {"_m": math, "_sign": _sign, "__builtins__": {"abs": abs}})
    isfinite = math.isfinite

    def fn(*values):
        try:
            r = raw(*values)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"{to_source(e)} at {values}: {exc}") from None
        if not isfinite(r):
            raise DomainError(f"{to_source(e)} is not finite at {values}")
        return r

    fn.source = to_source(e)
    return fn


# ---------------------------------------------------------------------------
# simplifying constructors


def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def neg(a: Expr) -> Expr:
    if isinstance(a, Const) and a.name is None:
        return Const(-a.value + 0.0)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def add(a: Expr, b: Expr) -> Expr:
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return neg(b)
    if _is(b, -1):
        return neg(a)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is(b, 1):
        return a
    if _is(a, 0):
        return ZERO
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    return Binary("/", a, b)


def power(a: Expr, n: float) -> Expr:
    if n == 1:
        return a
    if n == 0:
        return ONE
    return Binary("^", a, Const(float(n)))


def func(name: str, a: Expr) -> Expr:
    return Unary(name, a)


# ---------------------------------------------------------------------------
# differentiation and substitution


def diff(e: Expr, var: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to ``var``.

    ``abs`` differentiates to ``sign``, whose evaluation at 0 raises
    :class:`DomainError`.
    """
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, Unary):
        u = e.arg
        du = diff(u, var)
        if e.op == "neg":
            return neg(du)
        if _is(du, 0):
            return ZERO
        outer = {
            "sin": lambda: func("cos", u),
            "cos": lambda: neg(func("sin", u)),
            "exp": lambda: e,
            "ln": lambda: div(ONE, u),
            "sqrt": lambda: div(ONE, mul(Const(2.0), e)),
            "abs": lambda: func("sign", u),
            "sign": lambda: ZERO,
        }[e.op]()
        return mul(outer, du)
    a, b = e.left, e.right
    if e.op == "+":
        return add(diff(a, var), diff(b, var))
    if e.op == "-":
        return sub(diff(a, var), diff(b, var))
    if e.op == "*":
        return add(mul(diff(a, var), b), mul(a, diff(b, var)))
    if e.op == "/":
        da, db = diff(a, var), diff(b, var)
        if _is(db, 0):
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    # constant exponent
    n = b.value
    da = diff(a, var)
    if _is(da, 0):
        return ZERO
    return mul(mul(Const(n), power(a, n - 1)), da)


def substitute_negate(e: Expr, var: str) -> Expr:
    """Replace every occurrence of ``var`` by ``-var``.

    A chain of ``k`` negations around ``var`` gains one negation when ``k``
    is even and loses one when ``k`` is odd, so applying the substitution
    twice returns a structurally identical tree.
    """
    if isinstance(e, Var):
        return Unary("neg", e) if e.name == var else e
    if isinstance(e, Const):
        return e
    if isinstance(e, Unary):
        depth, inner = 0, e
        while isinstance(inner, Unary) and inner.op == "neg":
            depth, inner = depth + 1, inner.arg
        if isinstance(inner, Var) and inner.name == var:
            return e.arg if depth % 2 else Unary("neg", e)
        return Unary(e.op, substitute_negate(e.arg, var))
    return Binary(e.op, substitute_negate(e.left, var), substitute_negate(e.right, var))
