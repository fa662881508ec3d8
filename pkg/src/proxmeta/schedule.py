"""Step-size sequences with a rate of divergence and a running-max bound."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .rates import (
    RateFn,
    add,
    as_fraction,
    as_nat,
    ceil,
    const,
    fraction_str,
    isqrt_ceil,
    monus,
    mul,
    power,
    rate,
    var,
)

KINDS = ("constant", "linear", "harmonic")

#: Partial sums of the harmonic family are summed exactly up to this many terms;
#: beyond it only complete dyadic blocks (each worth at least 1/2) are added.
HARMONIC_EXACT_TERMS = 1 << 12

#: Audit depth for the divergence-rate and running-max certificates.
CERTIFICATE_DEPTH = 100


class ScheduleError(ValueError):
    pass


def default_theta(kind: str, c) -> RateFn:
    """Rate of divergence for a shipped family.

    constant(c): ceil(P/c) monus 1 (the least valid index);
    linear(c): isqrt_ceil(ceil(2P/c));
    harmonic(c): 2 ** ceil(2P/c), since 2**m terms of 1/(n+1) sum to at least m/2.
    """
    c = as_fraction(c)
    if c <= 0:
        raise ScheduleError("weight constant must be positive")
    inv = 1 / c
    if kind == "constant":
        return rate(monus(ceil(mul(inv, var())), 1))
    if kind == "linear":
        return rate(isqrt_ceil(ceil(mul(2 * inv, var()))))
    if kind == "harmonic":
        return rate(power(2, ceil(mul(2 * inv, var()))))
    raise ScheduleError(f"unknown schedule kind {kind!r}")


def default_bound(kind: str, c) -> RateFn:
    """``M(k) = max_{i <= k} gamma_i`` in closed form (rational-valued)."""
    c = as_fraction(c)
    if kind in ("constant", "harmonic"):
        return rate(const(c), integral=False)
    if kind == "linear":
        return rate(mul(c, add(var(), 1)), integral=False)
    raise ScheduleError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class WeightSchedule:
    kind: str
    c: Fraction
    theta: RateFn = field(default=None)
    bigM: RateFn = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        c = as_fraction(self.c)
        if c <= 0:
            raise ScheduleError("weight constant must be positive")
        object.__setattr__(self, "c", c)
        if self.theta is None:
            object.__setattr__(self, "theta", default_theta(self.kind, c))
        if self.bigM is None:
            object.__setattr__(self, "bigM", default_bound(self.kind, c))

    @classmethod
    def constant(cls, c=1) -> "WeightSchedule":
        return cls("constant", as_fraction(c))

    @classmethod
    def linear(cls, c=1) -> "WeightSchedule":
        return cls("linear", as_fraction(c))

    @classmethod
    def harmonic(cls, c=1) -> "WeightSchedule":
        return cls("harmonic", as_fraction(c))

    def to_json(self) -> dict:
        out = {"kind": self.kind, "c": fraction_str(self.c)}
        if self.theta != default_theta(self.kind, self.c):
            out["theta"] = self.theta.to_json()
        return out


def gamma(ws: WeightSchedule, n: int) -> Fraction:
    """Exact step size ``gamma_n``."""
    n = as_nat(n)
    if ws.kind == "constant":
        return ws.c
    if ws.kind == "linear":
        return ws.c * (n + 1)
    return ws.c / (n + 1)


@lru_cache(maxsize=None)
def _harmonic_prefix(terms: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, terms + 1)), Fraction(0))


def partial_sum_lower(ws: WeightSchedule, n: int) -> Fraction:
    """Exact rational lower bound on ``sum_{i=0}^{n} gamma_i``.

    Exact for the constant and linear families and for harmonic sums of at
    most :data:`HARMONIC_EXACT_TERMS` terms.
    """
    n = as_nat(n)
    terms = n + 1
    if ws.kind == "constant":
        return ws.c * terms
    if ws.kind == "linear":
        return ws.c * Fraction(terms * (terms + 1), 2)
    if terms <= HARMONIC_EXACT_TERMS:
        return ws.c * _harmonic_prefix(terms)
    total = _harmonic_prefix(HARMONIC_EXACT_TERMS)
    # terms 2^j + 1 .. 2^(j+1) each exceed 1/2^(j+1): a block contributes >= 1/2
    upto = HARMONIC_EXACT_TERMS
    while 2 * upto <= terms:
        total += Fraction(1, 2)
        upto *= 2
    return ws.c * total


def check_theta(ws: WeightSchedule, depth: int = CERTIFICATE_DEPTH) -> Optional[int]:
    """Return the first ``P <= depth`` where theta fails to be a divergence rate, else None."""
    for P in range(depth + 1):
        if partial_sum_lower(ws, ws.theta(P)) < P:
            return P
    return None


def check_bound(ws: WeightSchedule, depth: int = CERTIFICATE_DEPTH) -> Optional[int]:
    """Return the first ``k <= depth`` with ``M(k) < max_{i<=k} gamma_i``, else None."""
    running = Fraction(0)
    for k in range(depth + 1):
        running = max(running, gamma(ws, k))
        if ws.bigM(k) < running:
            return k
    return None


def certify(ws: WeightSchedule, depth: int = CERTIFICATE_DEPTH) -> WeightSchedule:
    """Raise :class:`ScheduleError` unless theta and M pass their audits."""
    bad = check_theta(ws, depth)
    if bad is not None:
        raise ScheduleError(f"theta is not a rate of divergence at P={bad}")
    bad = check_bound(ws, depth)
    if bad is not None:
        raise ScheduleError(f"M({bad}) is below max of the first {bad + 1} weights")
    return ws
