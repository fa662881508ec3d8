"""Convex lsc proper objectives with evaluable resolvents.

Nonsmooth members of the catalog (l1 norm, indicators) have closed-form
proximal maps.  ``smooth_custom`` objectives are handled by plain gradient
descent on the strongly convex proximal subproblem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .geometry import DimensionMismatch, SpaceInstance

KINDS = ("quadratic", "l1_norm", "ball_indicator", "box_indicator", "smooth_custom")

INNER_TOL = 1e-12
INNER_MAX_ITER = 10**6
CERTIFICATE_SLACK = 1e-8
GEODESIC_GRID = 100

# slack for set membership of points that were just projected onto the set
_MEMBERSHIP_RTOL = 1e-12


class ObjectiveError(ValueError):
    pass


class InnerSolverError(RuntimeError):
    """The smooth resolvent solver hit its iteration cap."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"inner gradient descent did not converge in {iterations} iterations "
            f"(last displacement {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True, eq=False)
class Objective:
    """A member of the objective catalog.

    Build instances with the classmethods; ``params`` holds the float64
    arrays and scalars of the chosen ``kind``.
    """

    kind: str
    dimension: int
    params: dict
    known_min_value: float
    known_minimizer: Optional[np.ndarray] = None
    value_fn: Optional[Callable] = field(default=None, repr=False)
    grad_fn: Optional[Callable] = field(default=None, repr=False)
    lipschitz: Optional[float] = None
    vectorized: bool = False
    family: Optional[str] = None

    @property
    def space(self) -> SpaceInstance:
        return SpaceInstance(self.dimension)

    # -- catalog -----------------------------------------------------------

    @classmethod
    def quadratic(cls, anchor, weight=1.0) -> "Objective":
        """``weight/2 * ||y - anchor||^2``."""
        a = _vec(anchor)
        if not weight > 0:
            raise ObjectiveError("quadratic weight must be positive")
        return cls("quadratic", a.size, {"anchor": a, "weight": float(weight)}, 0.0, a)

    @classmethod
    def l1_norm(cls, dimension: int, scale=1.0) -> "Objective":
        if not scale > 0:
            raise ObjectiveError("l1 scale must be positive")
        zero = _vec(np.zeros(dimension))
        return cls("l1_norm", dimension, {"scale": float(scale)}, 0.0, zero)

    @classmethod
    def ball_indicator(cls, center, radius) -> "Objective":
        c = _vec(center)
        if not radius > 0:
            raise ObjectiveError("ball radius must be positive")
        return cls("ball_indicator", c.size, {"center": c, "radius": float(radius)}, 0.0, c)

    @classmethod
    def box_indicator(cls, lower, upper) -> "Objective":
        lo, hi = _vec(lower), _vec(upper)
        if lo.shape != hi.shape:
            raise ObjectiveError("box bounds have different dimensions")
        if np.any(lo > hi):
            raise ObjectiveError("box lower bound exceeds upper bound")
        mid = _vec((lo + hi) / 2)
        return cls("box_indicator", lo.size, {"lower": lo, "upper": hi}, 0.0, mid)

    @classmethod
    def smooth_custom(
        cls,
        dimension: int,
        value: Callable,
        gradient: Callable,
        lipschitz: float,
        known_min_value: float,
        known_minimizer=None,
        vectorized: bool = False,
        family: Optional[str] = None,
        params: Optional[dict] = None,
        check_samples: int = 256,
        seed: int = 0,
    ) -> "Objective":
        """Smooth convex objective given by value/gradient oracles.

        ``known_min_value`` is spot-checked against ``check_samples`` random
        points; a sample with a smaller value raises ``ObjectiveError``.
        ``vectorized`` means ``value`` accepts an ``(m, dimension)`` batch.
        """
        if not lipschitz > 0:
            raise ObjectiveError("gradient Lipschitz constant must be positive")
        xm = None if known_minimizer is None else _vec(known_minimizer)
        f = cls(
            "smooth_custom", dimension, dict(params or {}), float(known_min_value), xm,
            value_fn=value, grad_fn=gradient, lipschitz=float(lipschitz),
            vectorized=vectorized, family=family,
        )
        rng = np.random.default_rng(seed)
        centre = np.zeros(dimension) if xm is None else xm
        ys = centre + rng.normal(scale=3.0, size=(check_samples, dimension))
        vals = evaluate_many(f, ys)
        if np.any(vals < f.known_min_value - 1e-9):
            raise ObjectiveError("sampled value below the declared minimum")
        if xm is not None and abs(evaluate(f, xm) - f.known_min_value) > 1e-10:
            raise ObjectiveError("declared minimizer does not attain the declared minimum")
        return f

    @classmethod
    def logcosh(cls, anchor, scale=1.0) -> "Objective":
        """``scale * sum_i log cosh(y_i - anchor_i)``; gradient is ``scale``-Lipschitz."""
        a = _vec(anchor)
        s = float(scale)
        if not s > 0:
            raise ObjectiveError("logcosh scale must be positive")

        def value(y):
            z = np.abs(np.asarray(y) - a)
            # log cosh z = z + log1p(exp(-2z)) - log 2, stable for large z
            return s * np.sum(z + np.log1p(np.exp(-2 * z)) - math.log(2.0), axis=-1)

        def gradient(y):
            return s * np.tanh(np.asarray(y) - a)

        return cls.smooth_custom(
            a.size, value, gradient, s, 0.0, a, vectorized=True, family="logcosh",
            params={"anchor": a, "scale": s},
        )

    def to_json(self) -> dict:
        p = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.params.items()}
        if self.kind == "smooth_custom":
            if self.family is None:
                raise ObjectiveError("callable-backed objectives cannot be serialized")
            p = {"family": self.family, **p}
        if self.kind == "l1_norm":
            p["dimension"] = self.dimension
        out = {"kind": self.kind, "parameters": p, "known_min_value": self.known_min_value}
        if self.known_minimizer is not None:
            out["known_minimizer"] = self.known_minimizer.tolist()
        return out


def _vec(x) -> np.ndarray:
    v = np.array(x, dtype=np.float64).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise ObjectiveError("vectors must be nonempty and finite")
    v.setflags(write=False)
    return v


def _as_point(f: Objective, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != f.dimension:
        raise DimensionMismatch(f.dimension, y.shape[-1])
    return y


def evaluate_many(f: Objective, ys) -> np.ndarray:
    """Vectorized :func:`evaluate` over the rows of ``ys``."""
    ys = np.atleast_2d(_as_point(f, ys))
    p = f.params
    if f.kind == "quadratic":
        return 0.5 * p["weight"] * np.sum((ys - p["anchor"]) ** 2, axis=1)
    if f.kind == "l1_norm":
        return p["scale"] * np.sum(np.abs(ys), axis=1)
    if f.kind == "ball_indicator":
        r = p["radius"]
        inside = np.linalg.norm(ys - p["center"], axis=1) <= r * (1 + _MEMBERSHIP_RTOL) + _MEMBERSHIP_RTOL
        return np.where(inside, 0.0, np.inf)
    if f.kind == "box_indicator":
        lo, hi = p["lower"], p["upper"]
        slack = _MEMBERSHIP_RTOL * (1 + np.maximum(np.abs(lo), np.abs(hi)))
        inside = np.all((ys >= lo - slack) & (ys <= hi + slack), axis=1)
        return np.where(inside, 0.0, np.inf)
    if f.vectorized:
        return np.asarray(f.value_fn(ys), dtype=np.float64).reshape(-1)
    return np.array([float(f.value_fn(y)) for y in ys])


def evaluate(f: Objective, y) -> float:
    """Value of ``f`` at ``y``; indicators give ``inf`` off their set."""
    return float(evaluate_many(f, _as_point(f, y).reshape(1, -1))[0])


def resolvent(f: Objective, gamma, x) -> np.ndarray:
    """Proximal map: the minimizer of ``f(y) + d(x, y)**2 / (2 gamma)``."""
    if isinstance(gamma, Fraction):
        gamma = float(gamma)
    if not gamma > 0:
        raise ObjectiveError(f"resolvent order must be positive, got {gamma}")
    x = _as_point(f, x).astype(np.float64, copy=False)
    p = f.params
    if f.kind == "quadratic":
        gw = gamma * p["weight"]
        return (x + gw * p["anchor"]) / (1.0 + gw)
    if f.kind == "l1_norm":
        t = gamma * p["scale"]
        return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    if f.kind == "ball_indicator":
        c, r = p["center"], p["radius"]
        off = x - c
        n = np.linalg.norm(off)
        return x.copy() if n <= r else c + off * (r / n)
    if f.kind == "box_indicator":
        return np.clip(x, p["lower"], p["upper"])
    return _smooth_prox(f, gamma, x)


def _smooth_prox(f: Objective, gamma: float, x: np.ndarray) -> np.ndarray:
    step = 1.0 / (f.lipschitz + 1.0 / gamma)
    y = x.copy()
    disp = math.inf
    for _ in range(INNER_MAX_ITER):
        g = np.asarray(f.grad_fn(y), dtype=np.float64) + (y - x) / gamma
        y_new = y - step * g
        disp = float(np.linalg.norm(y_new - y))
        y = y_new
        if disp < INNER_TOL:
            return y
    raise InnerSolverError(INNER_MAX_ITER, disp)


def prox_objective(f: Objective, gamma, x, ys) -> np.ndarray:
    """``f(y) + d(x, y)**2 / (2 gamma)`` for each row of ``ys``."""
    ys = np.atleast_2d(ys)
    return evaluate_many(f, ys) + np.sum((ys - x) ** 2, axis=1) / (2.0 * float(gamma))


def prox_certificate(f: Objective, gamma, x, y, samples: int, seed: int = 0) -> bool:
    """Brute-force optimality check of a claimed resolvent output ``y``.

    Compares against ``samples`` random points of the ball of radius
    ``2 d(x, y) + 1`` about ``x`` and against 100 grid points on the
    geodesic from ``y`` to each of them.
    """
    x = _as_point(f, x).astype(np.float64)
    y = _as_point(f, y).astype(np.float64)
    target = prox_objective(f, gamma, x, y)[0]
    if not np.isfinite(target):
        return False
    rng = np.random.default_rng(seed)
    radius = 2.0 * float(np.linalg.norm(x - y)) + 1.0
    d = f.dimension
    dirs = rng.normal(size=(samples, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = radius * rng.random(samples) ** (1.0 / d)
    zs = x + dirs * radii[:, None]
    ts = np.arange(1, GEODESIC_GRID + 1) / GEODESIC_GRID
    grid = y[None, None, :] + ts[None, :, None] * (zs - y)[:, None, :]
    cands = np.concatenate([zs, grid.reshape(-1, d)])
    return bool(np.all(target <= prox_objective(f, gamma, x, cands) + CERTIFICATE_SLACK))
