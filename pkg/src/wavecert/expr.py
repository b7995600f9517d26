"""Closed-form scalar expressions: parsing, evaluation, exact differentiation.

Every derivative in the toolkit is produced symbolically by
:func:`differentiate`, never by finite differences, so positivity margins
downstream are not polluted by truncation error.  Expressions are immutable
trees over numeric literals, variables ``x1..xn``, named constants, the
binary operators ``+ - * / ^``, unary negation, and the functions
``exp log sin cos sqrt``.

Grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)* ;
    term   := factor (('*'|'/') factor)* ;
    factor := unary ('^' unary)? ;
    unary  := '-' unary | atom ;
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')' ;

An ``IDENT`` followed by ``(`` must be one of the five function names;
otherwise ``x<digits>`` is a variable and anything else a named constant.
``^`` with an integer-literal exponent stays a power node; any other
exponent is rewritten to ``exp(e*log(b))`` at parse time so differentiation
is total on the whole tree.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    EvaluationError,
    ExpOverflowError,
    ParseError,
    UnboundConstantError,
)

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")

# exp() results are monitored against this bound; anything above is treated
# as an overflow rather than silently saturating toward inf.
EXP_LIMIT = 1e300
_EXP_MAX_ARG = math.log(EXP_LIMIT)


@dataclass(frozen=True, slots=True)
class Expression:
    """Abstract syntax tree node; immutable and safe to share across threads."""


@dataclass(frozen=True, slots=True)
class Num(Expression):
    value: float


@dataclass(frozen=True, slots=True)
class Var(Expression):
    index: int  # 1-based


@dataclass(frozen=True, slots=True)
class Const(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True, slots=True)
class BinOp(Expression):
    op: str  # one of + - * /
    left: Expression
    right: Expression


@dataclass(frozen=True, slots=True)
class Pow(Expression):
    base: Expression
    exponent: int


@dataclass(frozen=True, slots=True)
class Call(Expression):
    func: str
    arg: Expression


# ---------------------------------------------------------------------------
# parsing


_TOKEN_RE = re.compile(
    r"(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)
_VAR_RE = re.compile(r"^x(\d+)$")


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.tokens = []  # (kind, value, offset)
        pos = 0
        n = len(text)
        while pos < n:
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(), pos))
            pos = m.end()
        self.tokens.append(("end", "", n))
        self.i = 0

    def _peek(self):
        return self.tokens[self.i]

    def _next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect_op(self, op: str):
        kind, value, offset = self._next()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}, found {value!r}", offset)

    def parse(self) -> Expression:
        e = self.expr()
        kind, value, offset = self._peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {value!r}", offset)
        return e

    def expr(self) -> Expression:
        e = self.term()
        while True:
            kind, value, _ = self._peek()
            if kind == "op" and value in "+-":
                self._next()
                e = BinOp(value, e, self.term())
            else:
                return e

    def term(self) -> Expression:
        e = self.factor()
        while True:
            kind, value, _ = self._peek()
            if kind == "op" and value in "*/":
                self._next()
                e = BinOp(value, e, self.factor())
            else:
                return e

    def factor(self) -> Expression:
        base = self.unary()
        kind, value, offset = self._peek()
        if kind == "op" and value == "^":
            self._next()
            exponent = self.unary()
            return _make_power(base, exponent)
        return base

    def unary(self) -> Expression:
        kind, value, _ = self._peek()
        if kind == "op" and value == "-":
            self._next()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Expression:
        kind, value, offset = self._next()
        if kind == "num":
            return Num(float(value))
        if kind == "ident":
            peek_kind, peek_value, _ = self._peek()
            if peek_kind == "op" and peek_value == "(":
                if value not in FUNCTIONS:
                    raise ParseError(f"unknown function name {value!r}", offset)
                self._next()
                arg = self.expr()
                self._expect_op(")")
                return Call(value, arg)
            m = _VAR_RE.match(value)
            if m:
                index = int(m.group(1))
                if index < 1:
                    raise ParseError("variable index must be >= 1", offset)
                if index > self.dim:
                    raise ParseError(
                        f"variable x{index} exceeds dimension {self.dim}", offset
                    )
                return Var(index)
            return Const(value)
        if kind == "op" and value == "(":
            e = self.expr()
            self._expect_op(")")
            return e
        raise ParseError(f"unexpected token {value!r}", offset)


def _integer_literal(e: Expression):
    """Return the int value of a (possibly negated) integral literal, else None."""
    if isinstance(e, Num) and float(e.value).is_integer() and abs(e.value) < 2**31:
        return int(e.value)
    if isinstance(e, Neg):
        inner = _integer_literal(e.arg)
        if inner is not None:
            return -inner
    return None


def _make_power(base: Expression, exponent: Expression) -> Expression:
    k = _integer_literal(exponent)
    if k is not None:
        return Pow(base, k)
    return Call("exp", BinOp("*", exponent, Call("log", base)))


def parse(text: str, dim: int) -> Expression:
    """Parse ``text`` into an expression over at most ``dim`` variables."""
    if dim < 1:
        raise ParseError("dimension must be >= 1", 0)
    return _Parser(text, dim).parse()


# ---------------------------------------------------------------------------
# rendering (inverse of parse up to structural equality)


def _fmt_num(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def _r_expr(e: Expression) -> str:
    if isinstance(e, BinOp) and e.op in "+-":
        return f"{_r_expr(e.left)} {e.op} {_r_term(e.right)}"
    return _r_term(e)


def _r_term(e: Expression) -> str:
    if isinstance(e, BinOp) and e.op in "*/":
        return f"{_r_term(e.left)}{e.op}{_r_factor(e.right)}"
    return _r_factor(e)


def _r_factor(e: Expression) -> str:
    if isinstance(e, Pow):
        n = e.exponent
        exp_txt = str(n) if n >= 0 else f"-{-n}"
        return f"{_r_unary(e.base)}^{exp_txt}"
    return _r_unary(e)


def _r_unary(e: Expression) -> str:
    if isinstance(e, Neg):
        return f"-{_r_unary(e.arg)}"
    return _r_atom(e)


def _r_atom(e: Expression) -> str:
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({_r_expr(e.arg)})"
    return f"({_r_expr(e)})"


def render(e: Expression) -> str:
    """Render ``e`` as text that reparses to a structurally equal tree."""
    return _r_expr(e)


# ---------------------------------------------------------------------------
# constant-folding constructors (used by differentiate; no general rewriting)


def _num(v: float) -> Expression:
    if v == 0.0:
        return Num(0.0)
    if v < 0.0:
        return Neg(Num(-v))
    return Num(v)


def _lit(e: Expression):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg) and isinstance(e.arg, Num):
        return -e.arg.value
    return None


def add(l: Expression, r: Expression) -> Expression:
    lv, rv = _lit(l), _lit(r)
    if lv is not None and rv is not None and math.isfinite(lv + rv):
        return _num(lv + rv)
    if lv == 0.0:
        return r
    if rv == 0.0:
        return l
    return BinOp("+", l, r)


def sub(l: Expression, r: Expression) -> Expression:
    lv, rv = _lit(l), _lit(r)
    if lv is not None and rv is not None and math.isfinite(lv - rv):
        return _num(lv - rv)
    if rv == 0.0:
        return l
    if lv == 0.0:
        return neg(r)
    return BinOp("-", l, r)


def mul(l: Expression, r: Expression) -> Expression:
    lv, rv = _lit(l), _lit(r)
    if lv is not None and rv is not None and math.isfinite(lv * rv):
        return _num(lv * rv)
    if lv == 0.0 or rv == 0.0:
        return Num(0.0)
    if lv == 1.0:
        return r
    if rv == 1.0:
        return l
    if lv == -1.0:
        return neg(r)
    if rv == -1.0:
        return neg(l)
    return BinOp("*", l, r)


def div(l: Expression, r: Expression) -> Expression:
    lv, rv = _lit(l), _lit(r)
    if rv is not None and rv != 0.0:
        if lv is not None and math.isfinite(lv / rv):
            return _num(lv / rv)
        if rv == 1.0:
            return l
    if lv == 0.0:
        return Num(0.0)
    return BinOp("/", l, r)


def neg(e: Expression) -> Expression:
    if isinstance(e, Neg):
        return e.arg
    v = _lit(e)
    if v is not None:
        return _num(-v)
    return Neg(e)


def powi(base: Expression, exponent: int) -> Expression:
    if exponent == 1:
        return base
    if exponent == 0:
        return Num(1.0)
    v = _lit(base)
    if v is not None and (exponent > 0 or v != 0.0):
        folded = float(v) ** exponent
        if math.isfinite(folded):
            return _num(folded)
    return Pow(base, exponent)


def call(func: str, arg: Expression) -> Expression:
    v = _lit(arg)
    if v is not None:
        if func == "exp" and v <= _EXP_MAX_ARG:
            return _num(math.exp(v))
        if func == "log" and v > 0.0:
            return _num(math.log(v))
        if func == "sqrt" and v > 0.0:
            return _num(math.sqrt(v))
        if func == "sin":
            return _num(math.sin(v))
        if func == "cos":
            return _num(math.cos(v))
    return Call(func, arg)


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e: Expression, var_index: int) -> Expression:
    """Exact partial derivative of ``e`` with respect to ``x<var_index>``.

    The result is constant-folded: subtrees made of literals collapse and
    additive/multiplicative identities with literal 0/1 are eliminated.  No
    other simplification is performed.
    """
    if var_index < 1:
        raise ValueError("variable index must be >= 1")
    return _d(e, var_index)


def _d(e: Expression, k: int) -> Expression:
    t = type(e)
    if t is Num or t is Const:
        return Num(0.0)
    if t is Var:
        return Num(1.0) if e.index == k else Num(0.0)
    if t is Neg:
        return neg(_d(e.arg, k))
    if t is BinOp:
        dl, dr = _d(e.left, k), _d(e.right, k)
        if e.op == "+":
            return add(dl, dr)
        if e.op == "-":
            return sub(dl, dr)
        if e.op == "*":
            return add(mul(dl, e.right), mul(e.left, dr))
        # quotient rule; the folded numerator keeps literal zeros out
        return div(sub(mul(dl, e.right), mul(e.left, dr)), powi(e.right, 2))
    if t is Pow:
        n = e.exponent
        if n == 0:
            return Num(0.0)
        return mul(mul(_num(float(n)), powi(e.base, n - 1)), _d(e.base, k))
    if t is Call:
        da = _d(e.arg, k)
        if e.func == "exp":
            return mul(da, e)
        if e.func == "log":
            return div(da, e.arg)
        if e.func == "sqrt":
            return div(da, mul(Num(2.0), e))
        if e.func == "sin":
            return mul(da, call("cos", e.arg))
        if e.func == "cos":
            return neg(mul(da, call("sin", e.arg)))
    raise TypeError(f"cannot differentiate node {e!r}")


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expression, point, consts=None):
    """Evaluate ``e`` at one point ``(x1..xn)`` or a batch of shape (m, n).

    Returns a float for a single point and an (m,) array for a batch.
    Raises :class:`DomainError` on log/sqrt of a non-positive value, division
    by zero, or a non-finite result, :class:`ExpOverflowError` for
    exponentials above 1e300, and :class:`UnboundConstantError` for missing
    constants; all carry the offending point.
    """
    consts = consts or {}
    arr = np.asarray(point, dtype=float)
    if arr.ndim == 1:
        pt = tuple(arr.tolist())
        value = _eval_scalar(e, pt, consts)
        if not math.isfinite(value):
            raise DomainError("non-finite result", point=pt)
        return value
    if arr.ndim != 2:
        raise EvaluationError("point must have shape (n,) or (m, n)")
    out = _eval_array(e, arr, consts)
    if np.isscalar(out) or getattr(out, "ndim", 0) == 0:
        out = np.full(arr.shape[0], float(out))
    bad = ~np.isfinite(out)
    if bad.any():
        raise DomainError("non-finite result", point=arr[int(np.argmax(bad))])
    return out


def _eval_scalar(e: Expression, pt, consts) -> float:
    t = type(e)
    if t is Num:
        return e.value
    if t is Var:
        if e.index > len(pt):
            raise EvaluationError(
                f"variable x{e.index} exceeds point dimension {len(pt)}", point=pt
            )
        return pt[e.index - 1]
    if t is Const:
        try:
            return float(consts[e.name])
        except KeyError:
            raise UnboundConstantError(f"unbound constant {e.name!r}", point=pt) from None
    if t is Neg:
        return -_eval_scalar(e.arg, pt, consts)
    if t is BinOp:
        l = _eval_scalar(e.left, pt, consts)
        r = _eval_scalar(e.right, pt, consts)
        op = e.op
        if op == "+":
            return l + r
        if op == "-":
            return l - r
        if op == "*":
            return l * r
        if r == 0.0:
            raise DomainError("division by zero", point=pt)
        return l / r
    if t is Pow:
        b = _eval_scalar(e.base, pt, consts)
        if e.exponent < 0 and b == 0.0:
            raise DomainError("zero raised to a negative power", point=pt)
        return float(b**e.exponent)
    if t is Call:
        a = _eval_scalar(e.arg, pt, consts)
        f = e.func
        if f == "exp":
            if a > _EXP_MAX_ARG:
                raise ExpOverflowError("exponential exceeds 1e300", point=pt)
            return math.exp(a)
        if f == "log":
            if a <= 0.0:
                raise DomainError("log of non-positive value", point=pt)
            return math.log(a)
        if f == "sqrt":
            if a <= 0.0:
                raise DomainError("sqrt of non-positive value", point=pt)
            return math.sqrt(a)
        if f == "sin":
            return math.sin(a)
        return math.cos(a)
    raise TypeError(f"cannot evaluate node {e!r}")


def _first_bad_point(mask, pts):
    mask = np.asarray(mask)
    if mask.ndim == 0:
        return pts[0]
    return pts[int(np.argmax(mask))]


def _eval_array(e: Expression, pts, consts):
    """Recursive batch evaluation; literals stay scalar so numpy broadcasts."""
    t = type(e)
    if t is Num:
        return e.value
    if t is Var:
        if e.index > pts.shape[1]:
            raise EvaluationError(
                f"variable x{e.index} exceeds point dimension {pts.shape[1]}"
            )
        return pts[:, e.index - 1]
    if t is Const:
        try:
            return float(consts[e.name])
        except KeyError:
            raise UnboundConstantError(f"unbound constant {e.name!r}") from None
    if t is Neg:
        return -_eval_array(e.arg, pts, consts)
    if t is BinOp:
        l = _eval_array(e.left, pts, consts)
        r = _eval_array(e.right, pts, consts)
        op = e.op
        if op == "+":
            return l + r
        if op == "-":
            return l - r
        if op == "*":
            return l * r
        zero = r == 0.0
        if np.any(zero):
            raise DomainError("division by zero", point=_first_bad_point(zero, pts))
        return l / r
    if t is Pow:
        b = _eval_array(e.base, pts, consts)
        if e.exponent < 0:
            zero = b == 0.0
            if np.any(zero):
                raise DomainError(
                    "zero raised to a negative power", point=_first_bad_point(zero, pts)
                )
        with np.errstate(over="ignore", invalid="ignore"):
            return b ** float(e.exponent)
    if t is Call:
        a = _eval_array(e.arg, pts, consts)
        f = e.func
        if f == "exp":
            over = a > _EXP_MAX_ARG
            if np.any(over):
                raise ExpOverflowError(
                    "exponential exceeds 1e300", point=_first_bad_point(over, pts)
                )
            return np.exp(a)
        if f == "log":
            bad = a <= 0.0
            if np.any(bad):
                raise DomainError(
                    "log of non-positive value", point=_first_bad_point(bad, pts)
                )
            return np.log(a)
        if f == "sqrt":
            bad = a <= 0.0
            if np.any(bad):
                raise DomainError(
                    "sqrt of non-positive value", point=_first_bad_point(bad, pts)
                )
            return np.sqrt(a)
        if f == "sin":
            return np.sin(a)
        return np.cos(a)
    raise TypeError(f"cannot evaluate node {e!r}")
