"""The ten acceptance criteria, each with its tolerance and runtime budget.

Every test records a one-line PASS/FAIL summary, printed at the end of the run.
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS, catalog_objectives, random_scenario
from proxmeta.engine import Trajectory, af_membership, run
from proxmeta.moduli import (
    BoundContext, approx_point_modulus, beta_rate, closedness_moduli, delta_liminf, fejer_modulus, omega_rate,
    psi_rate,
)
from proxmeta.objective import evaluate, prox_certificate, resolvent
from proxmeta.rates import const, rate
from proxmeta.schedule import WeightSchedule
from proxmeta.verify import default_catalog, run_grid
from test_moduli import run_differential

GAMMAS = (0.1, 1.0, 10.0)


class Criterion:
    """Times a block and records its verdict; a failing check re-raises after recording."""

    def __init__(self, num, budget):
        self.num, self.budget, self.detail = num, budget, ""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        in_time = elapsed < self.budget
        ok = exc_type is None and in_time
        why = self.detail if exc_type is None else f"{exc_type.__name__}: {exc}".splitlines()[0]
        ACCEPTANCE_RESULTS[self.num] = (ok, f"{why} [{elapsed:.2f}s / {self.budget}s]")
        if exc_type is None:
            assert in_time, f"criterion {self.num} took {elapsed:.1f}s, budget {self.budget}s"
        return False


def test_resolvent_correctness():
    rng = np.random.default_rng(1)
    with Criterion(1, 30) as c:
        worst = 0.0
        for i in range(10**4):
            if i % 50 == 0:
                objs = catalog_objectives(int(rng.integers(1, 4)), rng)
            f = objs[i % 5]
            g = GAMMAS[i % 3]
            x, y = rng.uniform(-5, 5, (2, f.dimension))
            jx, jy = resolvent(f, g, x), resolvent(f, g, y)
            assert prox_certificate(f, g, x, jx, samples=16, seed=i), (f.kind, g, x)
            worst = max(worst, np.linalg.norm(jx - jy) - np.linalg.norm(x - y))
        assert worst <= 1e-10
        c.detail = f"10^4 resolvents certified, max expansion {worst:.1e}"


def test_fixed_points_are_minimizers():
    rng = np.random.default_rng(2)
    with Criterion(2, 5) as c:
        hits = 0
        for d in (1, 2, 3):
            for _ in range(4):
                for f in catalog_objectives(d, rng):
                    p = f.known_minimizer
                    for g in GAMMAS:
                        assert np.linalg.norm(resolvent(f, g, p) - p) <= 1e-9
                    for scale in (1.0, 1e-3, 1e-6, 1e-10, 0.0):
                        for _ in range(5):
                            x = p + rng.normal(scale=scale, size=d)
                            if np.linalg.norm(x - resolvent(f, 1.0, x)) <= 1e-9:
                                hits += 1
                                assert evaluate(f, x) <= f.known_min_value + 1e-6
        assert hits > 0
        c.detail = f"minimizers fixed; {hits} sampled fixed points are minimizers"


def test_per_step_inequalities():
    rng = np.random.default_rng(3)
    with Criterion(3, 60) as c:
        worst = np.inf
        for idx in range(20):
            traj = run(random_scenario(rng, idx), 200)
            assert len(traj.monitors) == 200
            for m in traj.monitors:
                assert m.ok(), m
                worst = min(worst, m.fejer_step, m.bacak, m.squared_step, m.value_rate)
        c.detail = f"20 x 200 steps, min residual {worst:.1e}"


def test_liminf_modulus(suite):
    with Criterion(4, 60) as c:
        cases = 0
        for sc in suite:
            traj = Trajectory(sc)
            for k in range(11):
                for L in (0, 10, 50):
                    hi = delta_liminf(sc.b, k, L)
                    traj.extend_to(hi + 1)
                    steps = np.linalg.norm(np.diff(traj.points[L : hi + 2], axis=0), axis=1)
                    assert np.any(steps <= 1 / (k + 1) + 1e-10), (sc.name, k, L)
                    cases += 1
        c.detail = f"{cases} (scenario, k, L) cases"


def test_value_rate(suite):
    with Criterion(5, 60) as c:
        checked = skipped = 0
        for sc in suite:
            fmin = sc.objective.known_min_value
            traj = Trajectory(sc)
            for k in range(11):
                beta = beta_rate(sc.b, sc.schedule.theta, k)
                if beta > 10**5:
                    skipped += 1
                    continue
                upto = beta + 500
                traj.extend_to(upto)
                gaps = np.asarray(traj.values[beta : upto + 1]) - fmin
                assert np.all(gaps <= 1 / (k + 1) + 1e-9), (sc.name, k)
                checked += 1
        assert checked >= 10
        c.detail = f"{checked} (scenario, k) cases, {skipped} skipped with beta > 10^5"


def test_approximate_minimizer_modulus(suite):
    with Criterion(6, 120) as c:
        largest = 0
        for sc in suite:
            ctx = sc.context()
            traj = Trajectory(sc)
            for k in range(9):
                phi = approx_point_modulus(ctx, k)
                N = 0
                while not af_membership(sc, traj.point(N), k):
                    N += 1
                    assert N <= min(phi, 10**5), (sc.name, k)
                assert N <= phi
                largest = max(largest, N)
        c.detail = f"90 cases, largest N {largest}"


def _near(rng, p, radius):
    u = rng.normal(size=p.shape)
    return p + u / np.linalg.norm(u) * radius * rng.uniform() ** (1 / p.size)


def test_uniform_fejer_and_closedness(suite):
    rng = np.random.default_rng(7)
    with Criterion(7, 60) as c:
        fejer = closed = 0
        trajs = {sc.name: run(sc, 40) for sc in suite}
        while fejer < 10**3:
            sc = suite[int(rng.integers(len(suite)))]
            n, m, r = (int(v) for v in rng.integers(0, [21, 21, 11]))
            level = fejer_modulus(n, m, r)
            q = _near(rng, sc.minimizer, 1.5 / (level + 1))
            if not af_membership(sc, q, level):
                continue
            pts = trajs[sc.name].points
            dn = np.linalg.norm(pts[n] - q)
            assert np.all(np.linalg.norm(pts[n : n + m + 1] - q, axis=1) < dn + 1 / (r + 1) + 1e-9)
            fejer += 1
        while closed < 10**3:
            sc = suite[int(rng.integers(len(suite)))]
            k = int(rng.integers(0, 11))
            dF, wF = closedness_moduli(k)
            q = _near(rng, sc.minimizer, 1.5 / (dF + 1))
            if not af_membership(sc, q, dF):
                continue
            p = _near(rng, q, 1 / (wF + 1))
            assert af_membership(sc, p, k, tol=1e-9)
            closed += 1
        c.detail = f"{fejer} Fejer samples, {closed} closedness samples, zero violations"


def test_metastability_grid(suite):
    with Criterion(8, 300) as c:
        reports = run_grid(suite, range(6), range(4), default_catalog())
        failed = [r for r in reports if not r.holds]
        assert not failed, failed[0].to_json()
        worst = max(r.witness_N for r in reports)
        c.detail = f"{len(reports)} trials hold, largest witness {worst}"


def test_differential_oracle():
    with Criterion(9, 10) as c:
        assert run_differential(2016, 200) == 200
        c.detail = "200 random inputs agree exactly"


def test_hand_values():
    with Criterion(10, 1) as c:
        ws = WeightSchedule.constant(1)
        ctx = BoundContext(1, ws.theta, ws.bigM, rate(const(1)))
        g0 = rate(const(0))
        psi, omega = psi_rate(ctx, 0, g0), omega_rate(ctx, 0, g0)
        assert (psi, omega) == (2, 8)
        c.detail = f"Psi = {psi}, Omega = {omega}"
