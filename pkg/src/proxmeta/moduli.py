"""Exact quantitative moduli for the proximal point algorithm.

All functions here work on Python ints (naturals) and Fractions; nothing is
rounded through floating point.  Subtractions that can go negative are
truncated at zero.

The metastability rates :func:`psi_rate` and :func:`omega_rate` iterate
``approx_point_modulus`` ``alpha(...)`` times and grow doubly exponentially,
so besides full evaluation this module offers :func:`psi_at_least` /
:func:`omega_at_least`, which decide ``N <= rate`` exactly by stopping as
soon as an iterate reaches ``N``.  That is sound because the recursion is
nondecreasing in its iteration index (``Phi`` and the prefix-max ``chi``
are nondecreasing).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .rates import (
    SCAN_THRESHOLD,
    RateFn,
    ScanThresholdError,
    ValueTooLarge,
    as_fraction,
    as_nat,
    ceil_frac,
    max_prefix,
)

#: Iteration cap for full Psi/Omega evaluation unless ``force`` is given.
DEPTH_GUARD = 10**5


class ModuliError(ValueError):
    pass


class DepthGuardError(ModuliError):
    def __init__(self, depth: int, guard: int = DEPTH_GUARD):
        super().__init__(f"recursion depth alpha(...) = {depth} exceeds the guard {guard}; pass force=True")
        self.depth = depth
        self.guard = guard


@dataclass(frozen=True)
class BoundContext:
    """Parameters ``(b, theta, M, alpha)`` of the metastability rates."""

    b: Fraction
    theta: RateFn
    bigM: RateFn
    alpha: RateFn

    def __post_init__(self):
        b = as_fraction(self.b)
        if b <= 0:
            raise ModuliError("b must be positive")
        object.__setattr__(self, "b", b)

    @property
    def b2(self) -> Fraction:
        return self.b * self.b


def delta_liminf(b, k: int, L: int) -> int:
    """Modulus of liminf for the step lengths ``d(x_n, x_{n+1})``."""
    b = as_fraction(b)
    if b <= 0:
        raise ModuliError("b must be positive")
    k, L = as_nat(k), as_nat(L)
    return max(ceil_frac(b * b * (k + 1) ** 2) + L - 1, 0)


def beta_rate(b, theta: RateFn, k: int) -> int:
    """Rate of convergence of ``f(x_n)`` to ``min f``."""
    b = as_fraction(b)
    if b <= 0:
        raise ModuliError("b must be positive")
    k = as_nat(k)
    return max_prefix(theta)(ceil_frac(b * b * (k + 1) / 2)) + 1


def closedness_moduli(k: int) -> tuple[int, int]:
    """``(delta_F(k), omega_F(k)) = (2k+1, 4k+3)``."""
    k = as_nat(k)
    return 2 * k + 1, 4 * k + 3


def fejer_modulus(n: int, m: int, r: int) -> int:
    """Uniform Fejer modulus ``max(n + m monus 1, m (r+1))``."""
    n, m, r = as_nat(n), as_nat(m), as_nat(r)
    return max(n + m - 1, m * (r + 1), 0)


def approx_point_modulus(ctx: BoundContext, k: int) -> int:
    """``Phi(k)``: some ``N <= Phi(k)`` has ``x_N`` in ``AF_k``."""
    k = as_nat(k)
    j = max(ceil_frac(2 * (k + 1) ** 2 * ctx.bigM(k)) - 1, 0)
    return ceil_frac(ctx.b2 * (k + 1) ** 2) + beta_rate(ctx.b, ctx.theta, j)


def _chi(i: int, gi: int, r: int) -> int:
    return max(i + gi - 1, gi * (r + 1), 0)


def chi_g_sup(g: RateFn, n: int, r: int) -> int:
    """``max_{i<=n} max(i + g(i) monus 1, g(i)(r+1))``.

    For nondecreasing ``g`` both inner terms are nondecreasing in ``i``, so
    only ``i = n`` is evaluated; otherwise the prefix is scanned.
    """
    n, r = as_nat(n), as_nat(r)
    if g.monotone:
        return _chi(n, g(n), r)
    if n > SCAN_THRESHOLD:
        raise ScanThresholdError(n)
    return max(_chi(i, g(i), r) for i in range(n + 1))


def chi_tilde_sup(k: int, g: RateFn, n: int, r: int) -> int:
    return max(2 * as_nat(k) + 1, chi_g_sup(g, n, r))


def _psi_step(ctx, k, g, value):
    return approx_point_modulus(ctx, chi_g_sup(g, value, 4 * k + 3))


def _omega_step(ctx, k, g, value):
    return approx_point_modulus(ctx, chi_tilde_sup(k, g, value, 8 * k + 8))


def psi_depth(ctx: BoundContext, k: int) -> int:
    return ctx.alpha(4 * as_nat(k) + 3)


def omega_depth(ctx: BoundContext, k: int) -> int:
    return ctx.alpha(8 * as_nat(k) + 7)


def _iterate(step, ctx, k, g, depth, force, max_bits):
    if depth > DEPTH_GUARD and not force:
        raise DepthGuardError(depth)
    value = 0
    for _ in range(depth):
        value = step(ctx, k, g, value)
        if max_bits is not None and value.bit_length() > max_bits:
            raise ValueTooLarge(f"recursion value exceeds {max_bits} bits")
    return value


def psi_rate(ctx: BoundContext, k: int, g: RateFn, force: bool = False, max_bits: Optional[int] = None) -> int:
    """Rate of metastability ``Psi(k, g)``, evaluated in full.

    Raises :class:`DepthGuardError` when ``alpha(4k+3)`` exceeds
    :data:`DEPTH_GUARD` (unless ``force``) and :class:`ValueTooLarge` once an
    iterate is longer than ``max_bits``.
    """
    k = as_nat(k)
    return _iterate(_psi_step, ctx, k, g, psi_depth(ctx, k), force, max_bits)


def omega_rate(ctx: BoundContext, k: int, g: RateFn, force: bool = False, max_bits: Optional[int] = None) -> int:
    """Rate ``Omega(k, g)`` (metastability plus approximate minimizers), in full."""
    k = as_nat(k)
    return _iterate(_omega_step, ctx, k, g, omega_depth(ctx, k), force, max_bits)


@dataclass(frozen=True)
class LowerBound:
    """``value`` equals the recursion after ``iterations`` of ``depth`` steps."""

    value: int
    iterations: int
    depth: int

    @property
    def complete(self) -> bool:
        return self.iterations == self.depth


def _at_least(step, ctx, k, g, depth, target) -> LowerBound:
    if not ctx.bigM.monotone:
        raise ModuliError("early stopping needs a nondecreasing M; evaluate the rate in full")
    value, it = 0, 0
    while it < depth and value < target:
        value = step(ctx, k, g, value)
        it += 1
    return LowerBound(value, it, depth)


def psi_at_least(ctx: BoundContext, k: int, g: RateFn, target: int) -> LowerBound:
    """Iterate the Psi recursion until it reaches ``target`` or completes.

    ``target <= Psi(k, g)`` iff the returned ``value >= target``.
    """
    k = as_nat(k)
    return _at_least(_psi_step, ctx, k, g, psi_depth(ctx, k), as_nat(target))


def omega_at_least(ctx: BoundContext, k: int, g: RateFn, target: int) -> LowerBound:
    k = as_nat(k)
    return _at_least(_omega_step, ctx, k, g, omega_depth(ctx, k), as_nat(target))


def rate_sequence(ctx: BoundContext, k: int, g: RateFn, which: str = "psi", steps: Optional[int] = None) -> list[int]:
    """First ``steps`` iterates of the Psi (or Omega) recursion, starting at 0."""
    k = as_nat(k)
    step = _psi_step if which == "psi" else _omega_step
    depth = psi_depth(ctx, k) if which == "psi" else omega_depth(ctx, k)
    steps = depth if steps is None else min(steps, depth)
    out = [0]
    for _ in range(steps):
        out.append(step(ctx, k, g, out[-1]))
    return out
