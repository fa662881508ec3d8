"""Metric-space interface (distance + geodesics) and the Euclidean instance."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt

import numpy as np

from .rates import RateFn, add, as_fraction, ceil, const, mul, power, var

#: Largest denominator tried when bounding sqrt(dimension) from above.
SIGMA_MAX_DENOMINATOR = 16


class GeometryError(ValueError):
    pass


class DimensionMismatch(GeometryError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"point has dimension {got}, space has dimension {expected}")
        self.expected = expected
        self.got = got


@dataclass(frozen=True)
class SpaceInstance:
    dimension: int
    kind: str = "euclidean"

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise GeometryError(f"dimension must be a positive integer, got {self.dimension!r}")
        if self.kind != "euclidean":
            raise GeometryError(f"unsupported space kind {self.kind!r}")

    def point(self, coords) -> np.ndarray:
        """Coerce ``coords`` to a read-only float64 point of this space."""
        x = np.array(coords, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.dimension:
            raise DimensionMismatch(self.dimension, x.shape[0])
        if not np.all(np.isfinite(x)):
            raise GeometryError("point coordinates must be finite")
        x.setflags(write=False)
        return x

    def to_json(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension}


def _check(s: SpaceInstance, *pts: np.ndarray) -> None:
    for p in pts:
        if np.shape(p)[-1] != s.dimension:
            raise DimensionMismatch(s.dimension, np.shape(p)[-1])


def distance(s: SpaceInstance, x, y) -> float:
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    _check(s, x, y)
    return float(np.linalg.norm(x - y))


def distances(s: SpaceInstance, xs, y) -> np.ndarray:
    """Row-wise distances from each row of ``xs`` to ``y``."""
    xs, y = np.asarray(xs, dtype=np.float64), np.asarray(y, dtype=np.float64)
    _check(s, xs, y)
    return np.linalg.norm(xs - y, axis=-1)


def combine(s: SpaceInstance, x, w, t: float) -> np.ndarray:
    """Point at fraction ``t`` along the geodesic from ``x`` to ``w``."""
    if not 0.0 <= t <= 1.0:
        raise GeometryError(f"geodesic parameter must lie in [0, 1], got {t}")
    x, w = np.asarray(x, dtype=np.float64), np.asarray(w, dtype=np.float64)
    _check(s, x, w)
    return (1.0 - t) * x + t * w


@lru_cache(maxsize=None)
def sqrt_upper_bound(dimension: int) -> Fraction:
    """Least p/q with q <= 16 and (p/q)**2 >= dimension."""
    best = None
    for q in range(1, SIGMA_MAX_DENOMINATOR + 1):
        n = q * q * dimension
        p = isqrt(n)
        if p * p < n:
            p += 1
        cand = Fraction(p, q)
        if best is None or cand < best:
            best = cand
    return best


def ball_total_boundedness_modulus(dimension: int, b, sigma=None) -> RateFn:
    """Modulus of total boundedness for a closed Euclidean ball of radius ``b``.

    ``alpha(k) = R**dimension`` with ``R = ceil(2 b (k+1) sigma)``: the
    enclosing cube splits into R**dimension cells of diameter at most
    ``1/(k+1)``, so any ``alpha(k)+1`` points put two in one cell.
    """
    if not isinstance(dimension, int) or dimension < 1:
        raise GeometryError("dimension must be a positive integer")
    b = as_fraction(b)
    if b <= 0:
        raise GeometryError("ball radius must be positive")
    sigma = sqrt_upper_bound(dimension) if sigma is None else as_fraction(sigma)
    if sigma * sigma < dimension:
        raise GeometryError(f"sigma={sigma} is below sqrt({dimension})")
    side = ceil(mul(2 * b * sigma, add(var(), 1)))
    return RateFn(power(side, const(dimension)))

