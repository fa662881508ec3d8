"""Metastability witnesses and their comparison against Psi / Omega."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .engine import Scenario, Trajectory, max_displacement
from .moduli import ModuliError, omega_at_least, omega_depth, omega_rate, psi_at_least, psi_depth, psi_rate
from .rates import RateError, RateFn, add, as_nat, nat_str, const, mul, rate, table, var

SEARCH_CAP = 10**5
DEFAULT_SEARCH_CAP = 10**4
WINDOW_TOL = 1e-9

#: Full Psi/Omega values are printed only while every iterate fits in this many bits.
REPORT_BITS = 4096

_PAIR_BLOCK = 2048


@dataclass(frozen=True)
class CounterexampleFn:
    """A catalog choice of the function ``g`` in the metastability statement."""

    name: str
    fn: RateFn

    def __call__(self, n: int) -> int:
        return self.fn(n)

    @classmethod
    def constant(cls, c: int) -> "CounterexampleFn":
        return cls(f"constant({c})", rate(const(as_nat(c))))

    @classmethod
    def identity_plus(cls, c: int) -> "CounterexampleFn":
        return cls(f"identity_plus({c})", rate(add(var(), as_nat(c))))

    @classmethod
    def doubling(cls) -> "CounterexampleFn":
        return cls("doubling", rate(add(mul(2, var()), 1)))

    @classmethod
    def table(cls, values) -> "CounterexampleFn":
        """Table made nondecreasing by running max, constant past its end."""
        vals, top = [], 0
        for v in values:
            top = max(top, as_nat(v))
            vals.append(top)
        return cls(f"table({list(values)})", rate(table(vals)))

    @classmethod
    def from_json(cls, node: dict) -> "CounterexampleFn":
        kind = node.get("kind")
        if kind == "constant":
            return cls.constant(node["c"])
        if kind == "identity_plus":
            return cls.identity_plus(node["c"])
        if kind == "doubling":
            return cls.doubling()
        if kind == "table":
            return cls.table(node["values"])
        if kind == "rate":
            return cls(node.get("name", "custom"), RateFn.from_json(node["expr"]))
        raise ValueError(f"unknown counterexample function kind {kind!r}")


def default_catalog() -> list[CounterexampleFn]:
    return [
        CounterexampleFn.constant(3),
        CounterexampleFn.identity_plus(5),
        CounterexampleFn.doubling(),
        CounterexampleFn.table([2, 7, 1, 12, 4, 20]),
    ]


@dataclass
class TrialReport:
    scenario: str
    rate: str
    k: int
    g: str
    witness_N: Optional[int]
    bound: Optional[str]
    bound_lower: Optional[str]
    bound_iterations: Optional[int]
    bound_depth: Optional[str]
    holds: bool
    window_checks: int
    wall_time: float
    warnings: list = field(default_factory=list)
    diagnostic: str = ""

    def to_json(self) -> dict:
        return asdict(self)

    def key(self) -> tuple:
        return (self.scenario, self.rate, self.k, self.g)


def _window_ok(pts: np.ndarray, eps: float) -> bool:
    """All pairwise distances of ``pts`` are at most ``eps``."""
    if len(pts) <= 1:
        return True
    # cheap necessary test first: everything close to the first point
    if np.max(np.linalg.norm(pts - pts[0], axis=1)) > eps:
        return False
    eps2 = eps * eps
    for i in range(0, len(pts), _PAIR_BLOCK):
        blk = pts[i : i + _PAIR_BLOCK]
        d2 = np.sum((blk[:, None, :] - pts[None, i:, :]) ** 2, axis=-1)
        if np.max(d2) > eps2:
            return False
    return True


def _search(
    traj: Trajectory,
    k: int,
    g: CounterexampleFn,
    search_cap: int,
    extra: Optional[Callable[[int, int], bool]] = None,
) -> tuple[Optional[int], int]:
    k = as_nat(k)
    search_cap = as_nat(search_cap)
    if search_cap > SEARCH_CAP:
        raise ValueError(f"search cap may not exceed {SEARCH_CAP}")
    eps = 1.0 / (k + 1) + WINDOW_TOL
    checks = 0
    for N in range(search_cap + 1):
        end = N + g(N)
        traj.extend_to(end)
        checks += 1
        if _window_ok(traj.points[N : end + 1], eps) and (extra is None or extra(N, end)):
            return N, checks
    return None, checks


def find_metastability_witness(
    sc: Scenario, k: int, g: CounterexampleFn, search_cap: int = DEFAULT_SEARCH_CAP, traj: Optional[Trajectory] = None
) -> Optional[int]:
    """Smallest ``N <= search_cap`` whose window ``[N, N+g(N)]`` has diameter ``<= 1/(k+1)``."""
    traj = Trajectory(sc) if traj is None else traj
    return _search(traj, k, g, search_cap)[0]


def _omega_predicate(sc: Scenario, traj: Trajectory, k: int) -> Callable[[int, int], bool]:
    eps = 1.0 / (k + 1) + WINDOW_TOL
    cache: dict[int, float] = {}

    def ok(N: int, end: int) -> bool:
        for i in range(N, end + 1):
            if i not in cache:
                cache[i] = max_displacement(sc, traj.points[i], k)
            if cache[i] > eps:
                return False
        return True

    return ok


def find_omega_witness(
    sc: Scenario, k: int, g: CounterexampleFn, search_cap: int = DEFAULT_SEARCH_CAP, traj: Optional[Trajectory] = None
) -> Optional[int]:
    """Like :func:`find_metastability_witness`, also requiring ``x_i`` in ``AF_k``-style proximity for the window."""
    traj = Trajectory(sc) if traj is None else traj
    return _search(traj, k, g, search_cap, _omega_predicate(sc, traj, k))[0]


def _full_value(fn, ctx, k, g) -> Optional[int]:
    try:
        return fn(ctx, k, g, force=True, max_bits=REPORT_BITS)
    except RateError:
        return None


def _certify(sc: Scenario, k: int, g: CounterexampleFn, which: str, search_cap: int) -> TrialReport:
    t0 = time.perf_counter()
    k = as_nat(k)
    ctx = sc.context()
    traj = Trajectory(sc)
    extra = _omega_predicate(sc, traj, k) if which == "omega" else None
    report = TrialReport(
        scenario=sc.name, rate=which, k=k, g=g.name, witness_N=None, bound=None, bound_lower=None,
        bound_iterations=None, bound_depth=None, holds=False, window_checks=0, wall_time=0.0,
        warnings=list(sc.warnings),
    )
    try:
        witness, checks = _search(traj, k, g, search_cap, extra)
    except Exception as exc:  # noqa: BLE001 - surfaced in the report
        report.diagnostic = f"trajectory failure: {exc}"
        report.wall_time = time.perf_counter() - t0
        return report
    report.witness_N, report.window_checks = witness, checks
    at_least = psi_at_least if which == "psi" else omega_at_least
    depth_fn = psi_depth if which == "psi" else omega_depth
    full_fn = psi_rate if which == "psi" else omega_rate
    try:
        report.bound_depth = nat_str(depth_fn(ctx, k))
        full = _full_value(full_fn, ctx, k, g.fn)
        if full is not None:
            report.bound = report.bound_lower = nat_str(full)
            report.bound_iterations = int(report.bound_depth)
        if witness is None:
            report.diagnostic = f"no witness with N <= {search_cap}"
        elif full is not None:
            report.holds = witness <= full
        else:
            lb = at_least(ctx, k, g.fn, witness)
            report.bound_lower = nat_str(lb.value)
            report.bound_iterations = lb.iterations
            report.holds = lb.value >= witness
    except (RateError, ModuliError) as exc:
        report.diagnostic = f"bound evaluation failed: {exc}"
        report.holds = False
    if witness is not None and not report.holds and not report.diagnostic:
        report.diagnostic = f"witness {witness} exceeds the bound"
    report.wall_time = time.perf_counter() - t0
    return report


def certify_psi(sc: Scenario, k: int, g: CounterexampleFn, search_cap: int = DEFAULT_SEARCH_CAP) -> TrialReport:
    """Find the least metastability witness and compare it with ``Psi(k, g)``."""
    return _certify(sc, k, g, "psi", search_cap)


def certify_omega(sc: Scenario, k: int, g: CounterexampleFn, search_cap: int = DEFAULT_SEARCH_CAP) -> TrialReport:
    """Same as :func:`certify_psi` for the combined window/approximate-minimizer condition and ``Omega``."""
    return _certify(sc, k, g, "omega", search_cap)


def run_grid(
    scenarios: Iterable[Scenario],
    psi_ks: Iterable[int],
    omega_ks: Iterable[int],
    catalog: Optional[list[CounterexampleFn]] = None,
    search_cap: int = DEFAULT_SEARCH_CAP,
    workers: int = 1,
) -> list[TrialReport]:
    """All (scenario, k, g) trials; results sorted by trial key."""
    catalog = default_catalog() if catalog is None else catalog
    jobs = []
    for sc in scenarios:
        for g in catalog:
            jobs += [(certify_psi, sc, k, g) for k in psi_ks]
            jobs += [(certify_omega, sc, k, g) for k in omega_ks]
    if workers <= 1:
        reports = [fn(sc, k, g, search_cap) for fn, sc, k, g in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda job: job[0](job[1], job[2], job[3], search_cap), jobs))
    return sorted(reports, key=TrialReport.key)
