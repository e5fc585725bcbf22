"""Shared fixtures: calibrated dynamics and solved benchmark surfaces."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from jdexec.coefficients import effective_dynamics_direct
from jdexec.hjb import ProblemConfig, build_grid, solve_surface

BASE_PROBLEM = {
    "s0": 30.97,
    "horizon": 1.0,
    "alpha": 0.01,
    "kappa": 1e-4,
    "phi": 1e-5,
    "spread": 0.01,
    "target_inventory": 1.0,
}
SIGMA = 0.1041
SIGMA_BAR = 0.01598
VARSIGMA = 0.1323
N_STEPS = 390
M_STEPS = 1000
ACQ_BAND = {"s_min": 29.0, "s_max": 31.1}
LIQ_BAND = {"s_min": 30.8, "s_max": 33.0}


@pytest.fixture(scope="session")
def zero_dynamics():
    return effective_dynamics_direct(0.0, 0.0, 0.0)


@pytest.fixture(scope="session")
def calibrated_dynamics():
    return effective_dynamics_direct(SIGMA, SIGMA_BAR, VARSIGMA)


def make_config(kind: str, dynamics, **overrides) -> ProblemConfig:
    band = ACQ_BAND if kind == "acquisition" else LIQ_BAND
    params = {**BASE_PROBLEM, **band, **overrides}
    return ProblemConfig(kind=kind, dynamics=dynamics, **params)


def stationary_up_weight(p: float, p_prime: float) -> float:
    """Independent oracle: left null vector of (P - I) for the sign chain."""
    transition = np.array([[p, 1.0 - p], [1.0 - p_prime, p_prime]])
    a = np.vstack([transition.T - np.eye(2), np.ones(2)])
    b = np.array([0.0, 0.0, 1.0])
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return float(pi[0])


def integrate_h_ode(times, alpha, kappa, phi):
    """Independent oracle for h' = h^2/kappa + phi backward from h(T) = alpha."""
    horizon = times[-1]
    sol = solve_ivp(
        lambda u, h: -(h * h / kappa + phi),
        (0.0, horizon),
        [alpha],
        t_eval=horizon - times[::-1],
        rtol=1e-12,
        atol=1e-14,
        method="DOP853",
    )
    assert sol.success
    return sol.y[0][::-1]


@pytest.fixture(scope="session")
def acq_config(calibrated_dynamics):
    return make_config("acquisition", calibrated_dynamics)


@pytest.fixture(scope="session")
def liq_config(calibrated_dynamics):
    return make_config("liquidation", calibrated_dynamics)


def solve_full(config):
    grid = build_grid(config, N_STEPS, M_STEPS)
    return solve_surface(config, grid)


@pytest.fixture(scope="session")
def acq_surface(acq_config):
    return solve_full(acq_config)


@pytest.fixture(scope="session")
def liq_surface(liq_config):
    return solve_full(liq_config)


@pytest.fixture(scope="session")
def acq_surface_varsigma0():
    dyn = effective_dynamics_direct(SIGMA, SIGMA_BAR, 0.0)
    return solve_full(make_config("acquisition", dyn))


@pytest.fixture(scope="session")
def acq_surface_varsigma_high():
    dyn = effective_dynamics_direct(SIGMA, SIGMA_BAR, 2.0 * VARSIGMA)
    return solve_full(make_config("acquisition", dyn))


def riccati_h(times: np.ndarray, alpha: float, kappa: float, horizon: float) -> np.ndarray:
    """Closed form of h' = h^2/kappa with h(T) = alpha (phi = 0)."""
    return 1.0 / (1.0 / alpha + (horizon - times) / kappa)
