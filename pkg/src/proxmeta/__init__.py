"""Proximal point algorithm on geodesic spaces with exact metastability rates."""

from .engine import Scenario, Trajectory, af_membership, monitor_step, run
from .geometry import SpaceInstance, ball_total_boundedness_modulus, combine, distance
from .moduli import (
    BoundContext,
    approx_point_modulus,
    beta_rate,
    chi_g_sup,
    chi_tilde_sup,
    closedness_moduli,
    delta_liminf,
    fejer_modulus,
    omega_rate,
    psi_rate,
)
from .objective import Objective, evaluate, prox_certificate, resolvent
from .rates import RateFn, max_prefix
from .schedule import WeightSchedule, default_theta, gamma
from .verify import CounterexampleFn, TrialReport, certify_omega, certify_psi, find_metastability_witness

__version__ = "0.1.0"
