"""Closed-form functions on the naturals with exact big-integer evaluation.

A :class:`RateFn` wraps a small expression tree over a single natural
variable.  Trees are built with the helpers at the bottom of this module
(``var``, ``const``, ``add``, ...) and serialize to a JSON AST, e.g.::

    {"op": "monus", "args": [{"op": "var"}, {"op": "const", "value": "1"}]}

Every node knows whether it is nondecreasing by construction; that flag is
what lets the moduli evaluate prefix maxima at astronomically large
arguments without scanning.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Any, Union

Number = Union[int, Fraction]

#: Largest argument for which a prefix max of a non-monotone function is scanned.
SCAN_THRESHOLD = 10**6

#: Refuse to build integers longer than this many bits.
MAX_BITS = 1 << 24


class RateError(ValueError):
    """Base class for rate-function evaluation failures."""


class ScanThresholdError(RateError):
    """A prefix max of a non-monotone function was requested past the scan threshold."""

    def __init__(self, n: int, threshold: int = SCAN_THRESHOLD):
        super().__init__(
            f"prefix max of a non-monotone function requested at n={n}, "
            f"above the scan threshold {threshold}"
        )
        self.n = n
        self.threshold = threshold


class ValueTooLarge(RateError):
    """An intermediate value would exceed :data:`MAX_BITS`."""


def as_nat(n: Any) -> int:
    """Validate and return a natural number."""
    if isinstance(n, bool) or not isinstance(n, int):
        if isinstance(n, Fraction) and n.denominator == 1:
            n = n.numerator
        else:
            raise TypeError(f"expected a natural number, got {n!r}")
    if n < 0:
        raise ValueError(f"expected a natural number, got {n}")
    return n


def as_fraction(value: Any) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings exactly; floats are rejected."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            p, q = text.split("/", 1)
            p, q = int(p), int(q)
            if q == 0:
                raise ZeroDivisionError(f"zero denominator in {value!r}")
            return Fraction(p, q)
        return Fraction(text)
    raise TypeError(f"cannot read {value!r} as an exact rational")


_STR_CHUNK_BITS = 8000


def nat_str(n: int) -> str:
    """Exact decimal string of a natural of any size."""
    n = as_nat(n)
    if n.bit_length() <= _STR_CHUNK_BITS:
        return str(n)
    digits = (n.bit_length() * 30103) // 100000 + 1
    half = digits // 2
    hi, lo = divmod(n, 10**half)
    if not hi:
        return nat_str(lo)
    return nat_str(hi) + nat_str(lo).rjust(half, "0")


def fraction_str(x: Number) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def ceil_frac(x: Number) -> int:
    x = Fraction(x)
    return -((-x.numerator) // x.denominator)


def isqrt_ceil_int(n: int) -> int:
    r = isqrt(n)
    return r if r * r == n else r + 1


def _normalize(x: Number) -> Number:
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def _check_size(x: int) -> int:
    if x.bit_length() > MAX_BITS:
        raise ValueTooLarge(f"value with {x.bit_length()} bits exceeds MAX_BITS={MAX_BITS}")
    return x


# --------------------------------------------------------------------------
# expression nodes

class Expr:
    """Base class of expression nodes; subclasses are frozen dataclasses."""

    op: str = ""

    def eval(self, n: int) -> Number:
        raise NotImplementedError

    @property
    def monotone(self) -> bool:
        raise NotImplementedError

    @property
    def constant(self) -> bool:
        return False

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Var(Expr):
    op = "var"

    def eval(self, n):
        return n

    @property
    def monotone(self):
        return True

    def to_json(self):
        return {"op": "var"}


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction
    op = "const"

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))
        if self.value < 0:
            raise ValueError("constants must be nonnegative")

    def eval(self, n):
        return _normalize(self.value)

    @property
    def monotone(self):
        return True

    @property
    def constant(self):
        return True

    def to_json(self):
        return {"op": "const", "value": fraction_str(self.value)}


@dataclass(frozen=True)
class _Nary(Expr):
    args: tuple

    @property
    def constant(self):
        return all(a.constant for a in self.args)

    def to_json(self):
        return {"op": self.op, "args": [a.to_json() for a in self.args]}


class Add(_Nary):
    op = "add"

    def eval(self, n):
        return _normalize(sum((a.eval(n) for a in self.args), 0))

    @property
    def monotone(self):
        return all(a.monotone for a in self.args)


class Mul(_Nary):
    op = "mul"

    def eval(self, n):
        out: Number = 1
        for a in self.args:
            out = out * a.eval(n)
            if isinstance(out, int):
                _check_size(out)
        return _normalize(out)

    @property
    def monotone(self):
        # all values are nonnegative, so products of nondecreasing factors are nondecreasing
        return all(a.monotone for a in self.args)


class Max(_Nary):
    op = "max"

    def eval(self, n):
        return max(a.eval(n) for a in self.args)

    @property
    def monotone(self):
        return all(a.monotone for a in self.args)


class Monus(_Nary):
    """Truncated subtraction ``max(a - b, 0)``."""

    op = "monus"

    def eval(self, n):
        a, b = self.args
        return _normalize(max(a.eval(n) - b.eval(n), 0))

    @property
    def monotone(self):
        a, b = self.args
        return a.monotone and b.constant


class CeilDiv(_Nary):
    """Integer ceiling division ``ceil(a / b)``; ``b`` must evaluate positive."""

    op = "cdiv"

    def eval(self, n):
        a, b = self.args
        den = b.eval(n)
        if den == 0:
            raise RateError("ceiling division by zero")
        return ceil_frac(Fraction(a.eval(n)) / den)

    @property
    def monotone(self):
        a, b = self.args
        return a.monotone and b.constant


class Pow(_Nary):
    op = "pow"

    def eval(self, n):
        base, exp = self.args
        bv, ev = base.eval(n), as_nat(exp.eval(n))
        if isinstance(bv, Fraction) and bv.denominator != 1:
            return bv**ev
        bv = int(bv)
        if bv >= 2 and ev * bv.bit_length() > MAX_BITS + bv.bit_length():
            raise ValueTooLarge(f"{bv}**{ev} exceeds MAX_BITS={MAX_BITS}")
        return bv**ev

    @property
    def monotone(self):
        base, exp = self.args
        if not (base.monotone and exp.monotone):
            return False
        if exp.constant:
            return True
        return base.constant and base.eval(0) >= 1


class Ceil(_Nary):
    """Ceiling of a rational-valued subexpression."""

    op = "ceil"

    def eval(self, n):
        return ceil_frac(self.args[0].eval(n))

    @property
    def monotone(self):
        return self.args[0].monotone


class IsqrtCeil(_Nary):
    """Least natural ``r`` with ``r*r >= ceil(a)``."""

    op = "isqrt_ceil"

    def eval(self, n):
        return isqrt_ceil_int(ceil_frac(self.args[0].eval(n)))

    @property
    def monotone(self):
        return self.args[0].monotone


class Compose(_Nary):
    """``outer(inner(n))``."""

    op = "compose"

    def eval(self, n):
        outer, inner = self.args
        m = inner.eval(n)
        if isinstance(m, Fraction):
            if m.denominator != 1:
                raise RateError("composition argument is not a natural number")
            m = m.numerator
        return outer.eval(m)

    @property
    def monotone(self):
        outer, inner = self.args
        return outer.constant or (outer.monotone and inner.monotone)


class MaxPrefix(_Nary):
    """``f^M(n) = max_{i <= n} f(i)``, scanned explicitly."""

    op = "max_prefix"

    def eval(self, n):
        inner = self.args[0]
        if inner.monotone:
            return inner.eval(n)
        if n > SCAN_THRESHOLD:
            raise ScanThresholdError(n)
        return max(inner.eval(i) for i in range(n + 1))

    @property
    def monotone(self):
        return True


@dataclass(frozen=True)
class Table(Expr):
    """Finite table ``values[n]``, extended past its end by the last entry."""

    values: tuple
    op = "table"

    def __post_init__(self):
        vals = tuple(as_nat(v) for v in self.values)
        if not vals:
            raise ValueError("table needs at least one value")
        object.__setattr__(self, "values", vals)

    def eval(self, n):
        return self.values[min(n, len(self.values) - 1)]

    @property
    def monotone(self):
        return all(a <= b for a, b in zip(self.values, self.values[1:]))

    @property
    def constant(self):
        return len(set(self.values)) == 1

    def to_json(self):
        return {"op": "table", "values": list(self.values)}


_NARY = {cls.op: cls for cls in (Add, Mul, Max, Monus, CeilDiv, Pow, Ceil, IsqrtCeil, Compose, MaxPrefix)}
_ARITY = {"monus": 2, "cdiv": 2, "pow": 2, "compose": 2, "ceil": 1, "isqrt_ceil": 1, "max_prefix": 1}


def expr_from_json(node: Any) -> Expr:
    if not isinstance(node, dict) or "op" not in node:
        raise ValueError(f"malformed rate expression node: {node!r}")
    op = node["op"]
    allowed = {"op", "args"}
    if op == "var":
        allowed = {"op"}
    elif op == "const":
        allowed = {"op", "value"}
    elif op == "table":
        allowed = {"op", "values"}
    extra = set(node) - allowed
    if extra:
        raise ValueError(f"unknown fields {sorted(extra)} in {op!r} node")
    if op == "var":
        return Var()
    if op == "const":
        return Const(as_fraction(node["value"]))
    if op == "table":
        return Table(tuple(node["values"]))
    if op not in _NARY:
        raise ValueError(f"unknown rate expression op {op!r}")
    args = tuple(expr_from_json(a) for a in node.get("args", []))
    want = _ARITY.get(op)
    if (want is not None and len(args) != want) or not args:
        raise ValueError(f"op {op!r} got {len(args)} arguments")
    return _NARY[op](args)


# --------------------------------------------------------------------------
# public wrapper

@dataclass(frozen=True)
class RateFn:
    """A total function on the naturals given by a closed-form expression.

    ``integral=False`` marks rational-valued functions (the weight bound
    ``M``); evaluation then returns a :class:`~fractions.Fraction`.
    """

    expr: Expr
    integral: bool = True

    @property
    def monotone(self) -> bool:
        return self.expr.monotone

    def __call__(self, n: int) -> Number:
        n = as_nat(n)
        value = self.expr.eval(n)
        if not self.integral:
            return Fraction(value)
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise RateError(f"integral rate function produced {value} at n={n}")
            value = value.numerator
        return value

    def to_json(self) -> dict:
        return self.expr.to_json()

    @classmethod
    def from_json(cls, node: Any, integral: bool = True) -> "RateFn":
        return cls(expr_from_json(node), integral=integral)

    def describe(self) -> str:
        return _render(self.expr)


def _render(e: Expr) -> str:
    if isinstance(e, Var):
        return "n"
    if isinstance(e, Const):
        return fraction_str(e.value)
    if isinstance(e, Table):
        return "table" + str(list(e.values))
    inner = ", ".join(_render(a) for a in e.args)
    return f"{e.op}({inner})"


def max_prefix(f: RateFn) -> RateFn:
    """Return ``f^M``; nondecreasing functions come back unchanged."""
    if f.monotone:
        return f
    return RateFn(MaxPrefix((f.expr,)), integral=f.integral)


# --------------------------------------------------------------------------
# builders

def _e(x: Any) -> Expr:
    if isinstance(x, RateFn):
        return x.expr
    if isinstance(x, Expr):
        return x
    return Const(as_fraction(x))


def var() -> Expr:
    return Var()


def const(value: Any) -> Expr:
    return Const(as_fraction(value))


def add(*args) -> Expr:
    return Add(tuple(_e(a) for a in args))


def mul(*args) -> Expr:
    return Mul(tuple(_e(a) for a in args))


def max_(*args) -> Expr:
    return Max(tuple(_e(a) for a in args))


def monus(a, b) -> Expr:
    return Monus((_e(a), _e(b)))


def cdiv(a, b) -> Expr:
    return CeilDiv((_e(a), _e(b)))


def power(base, exp) -> Expr:
    return Pow((_e(base), _e(exp)))


def ceil(a) -> Expr:
    return Ceil((_e(a),))


def isqrt_ceil(a) -> Expr:
    return IsqrtCeil((_e(a),))


def compose(outer, inner) -> Expr:
    return Compose((_e(outer), _e(inner)))


def table(values) -> Expr:
    return Table(tuple(values))


def rate(expr, integral: bool = True) -> RateFn:
    return RateFn(_e(expr), integral=integral)
