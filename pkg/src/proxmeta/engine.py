"""Proximal point iteration with per-step inequality monitors."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .geometry import SpaceInstance, ball_total_boundedness_modulus
from .moduli import BoundContext
from .objective import Objective, evaluate, resolvent
from .rates import RateFn, as_fraction, as_nat
from .schedule import WeightSchedule, gamma

MAX_STEPS = 10**6
TOL = 1e-9
DESCENT_TOL = 1e-10
AF_TOL = 1e-10


class EngineError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"resolvent failed at step {step}: {cause}")
        self.step = step
        self.cause = cause


@dataclass(frozen=True, eq=False)
class Scenario:
    space: SpaceInstance
    objective: Objective
    schedule: WeightSchedule
    start: np.ndarray
    b: Fraction
    seed: int = 0
    name: str = "scenario"
    alpha_override: Optional[RateFn] = None

    def __post_init__(self):
        object.__setattr__(self, "start", self.space.point(self.start))
        object.__setattr__(self, "b", as_fraction(self.b))
        if self.b <= 0:
            raise ValueError("b must be positive")
        if self.objective.dimension != self.space.dimension:
            raise ValueError("objective and space dimensions differ")

    @property
    def minimizer(self) -> Optional[np.ndarray]:
        return self.objective.known_minimizer

    @property
    def b_verified(self) -> bool:
        p = self.minimizer
        if p is None:
            return False
        return float(np.linalg.norm(self.start - p)) <= float(self.b) * (1 + 1e-15)

    @property
    def warnings(self) -> list[str]:
        return [] if self.b_verified else ["unverified-b"]

    def gamma(self, n: int) -> float:
        return float(gamma(self.schedule, n))

    def context(self) -> BoundContext:
        alpha = self.alpha_override
        if alpha is None:
            alpha = ball_total_boundedness_modulus(self.space.dimension, self.b)
        return BoundContext(self.b, self.schedule.theta, self.schedule.bigM, alpha)


@dataclass(frozen=True)
class MonitorRecord:
    """Residuals (slack) of the per-step inequalities for the step n -> n+1.

    Each field should be >= -1e-9 (``descent`` >= -1e-10).
    """

    n: int
    fejer_step: float
    bacak: float
    squared_step: float
    value_rate: float
    descent: float

    def ok(self, tol: float = TOL) -> bool:
        return (
            min(self.fejer_step, self.bacak, self.squared_step, self.value_rate) >= -tol
            and self.descent >= -DESCENT_TOL
        )


class Trajectory:
    """PPA iterates ``x_0 .. x_N`` of a scenario, extendable on demand."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        d = scenario.space.dimension
        self._pts = np.empty((64, d))
        self._pts[0] = scenario.start
        self._len = 1
        self.values: list[float] = [evaluate(scenario.objective, scenario.start)]
        self.monitors: list[MonitorRecord] = []
        self._gamma_sum = 0.0
        self._p_disp: dict[float, float] = {}

    def __len__(self) -> int:
        return self._len

    @property
    def points(self) -> np.ndarray:
        view = self._pts[: self._len]
        view.flags.writeable = False
        return view

    def point(self, n: int) -> np.ndarray:
        self.extend_to(n)
        return self._pts[n]

    def extend_to(self, n: int) -> None:
        """Make sure ``x_n`` has been computed."""
        if n >= MAX_STEPS + 1:
            raise ValueError(f"trajectory cap of {MAX_STEPS} steps exceeded")
        while self._len <= n:
            self._step()

    def _step(self) -> None:
        sc = self.scenario
        n = self._len - 1
        g = sc.gamma(n)
        try:
            nxt = resolvent(sc.objective, g, self._pts[n])
        except Exception as exc:  # noqa: BLE001 - reported with the step index
            raise EngineError(n, exc) from exc
        if self._len == self._pts.shape[0]:
            self._pts = np.concatenate([self._pts, np.empty_like(self._pts)])
        self._pts[self._len] = nxt
        self._len += 1
        self.values.append(evaluate(sc.objective, nxt))
        self._gamma_sum += g
        if sc.minimizer is not None:
            self.monitors.append(monitor_step(sc, n, self))


def _p_displacement(traj: Trajectory, g: float) -> float:
    cached = traj._p_disp.get(g)
    if cached is None:
        p = traj.scenario.minimizer
        cached = float(np.linalg.norm(p - resolvent(traj.scenario.objective, g, p)))
        traj._p_disp[g] = cached
    return cached


def monitor_step(sc: Scenario, n: int, traj: Trajectory) -> Optional[MonitorRecord]:
    """Residuals of the per-step inequalities at step ``n`` (needs ``x_{n+1}``).

    Returns None when the scenario has no known minimizer.
    """
    p = sc.minimizer
    if p is None:
        return None
    if len(traj) < n + 2:
        traj.extend_to(n + 1)
    x0, xn, xn1 = traj._pts[0], traj._pts[n], traj._pts[n + 1]
    g = sc.gamma(n)
    fmin = sc.objective.known_min_value
    f_next = traj.values[n + 1] - fmin
    dn, dn1 = float(np.linalg.norm(xn - p)), float(np.linalg.norm(xn1 - p))
    step = float(np.linalg.norm(xn - xn1))
    sq = dn * dn - dn1 * dn1 - step * step
    if len(traj.monitors) == n and n + 1 == len(traj) - 1:
        gsum = traj._gamma_sum
    else:
        gsum = math.fsum(sc.gamma(i) for i in range(n + 1))
    d0 = float(np.linalg.norm(x0 - p))
    fv = traj.values
    descent = math.inf if math.isinf(fv[n]) else fv[n] - fv[n + 1]
    return MonitorRecord(
        n=n,
        fejer_step=dn + _p_displacement(traj, g) - dn1,
        bacak=sq - 2 * g * f_next,
        squared_step=sq,
        value_rate=d0 * d0 / (2 * gsum) - f_next,
        descent=descent,
    )


def run(sc: Scenario, steps: int) -> Trajectory:
    """Iterate ``x_{n+1} = J_{gamma_n f} x_n`` for ``steps`` steps."""
    steps = as_nat(steps)
    if steps > MAX_STEPS:
        raise ValueError(f"at most {MAX_STEPS} steps per run")
    traj = Trajectory(sc)
    traj.extend_to(steps)
    return traj


def max_displacement(sc: Scenario, y, k: int) -> float:
    """``max_{i <= k} d(y, J_{gamma_i f} y)``."""
    y = np.asarray(y, dtype=np.float64)
    seen: set[float] = set()
    worst = 0.0
    for i in range(as_nat(k) + 1):
        g = sc.gamma(i)
        if g in seen:
            continue
        seen.add(g)
        worst = max(worst, float(np.linalg.norm(y - resolvent(sc.objective, g, y))))
    return worst


def af_membership(sc: Scenario, y, k: int, tol: float = AF_TOL) -> bool:
    """Is ``y`` a k-approximate minimizer, i.e. displaced by at most 1/(k+1) by every J_{gamma_i f}, i <= k?"""
    k = as_nat(k)
    bound = 1.0 / (k + 1) + tol
    y = np.asarray(y, dtype=np.float64)
    seen: set[float] = set()
    for i in range(k + 1):
        g = sc.gamma(i)
        if g in seen:
            continue
        seen.add(g)
        if float(np.linalg.norm(y - resolvent(sc.objective, g, y))) > bound:
            return False
    return True


# -- export ------------------------------------------------------------------

_RESIDUALS = ("fejer_step", "bacak", "squared_step", "value_rate", "descent")


def _rows(traj: Trajectory):
    mons = {m.n: m for m in traj.monitors}
    for n in range(len(traj)):
        m = mons.get(n)
        yield n, traj._pts[n].tolist(), traj.values[n], m


def write_csv(traj: Trajectory, fh) -> None:
    d = traj.scenario.space.dimension
    w = csv.writer(fh)
    w.writerow(["step", *[f"x{i}" for i in range(d)], "f", *_RESIDUALS])
    for n, coords, fval, m in _rows(traj):
        res = [repr(getattr(m, r)) for r in _RESIDUALS] if m else [""] * len(_RESIDUALS)
        w.writerow([n, *[repr(c) for c in coords], repr(fval), *res])


def to_json(traj: Trajectory) -> dict:
    sc = traj.scenario
    return {
        "scenario": sc.name,
        "seed": sc.seed,
        "steps": len(traj) - 1,
        "points": traj.points.tolist(),
        "values": [v if math.isfinite(v) else "inf" for v in traj.values],
        "monitors": [
            {k: (v if not isinstance(v, float) or math.isfinite(v) else "inf") for k, v in asdict(m).items()}
            for m in traj.monitors
        ],
    }


def write_json(traj: Trajectory, fh) -> None:
    json.dump(to_json(traj), fh, indent=1)
