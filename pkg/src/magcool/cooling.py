"""Cooling observables: rates, occupancy, dynamics and Q-factor thresholds.

The weak-coupling route samples the force PSD at +-1 (trap-frequency
units) and feeds the closed occupancy formula
n_c = (gamma_c nbar_c + Gamma_+) / (gamma_c + Gamma_- - Gamma_+).
The Lyapunov route solves the full 6-mode covariance and serves as the
independent oracle for that approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_continuous_lyapunov

from .errors import BracketError, ConvergenceError, DomainError, RunawayError
from .io import params_hash
from .model import Mechanism, SystemParams
from .spectra import mcm_rates, psd_general
from .steady import assert_stable, build_drift, stability_report


@dataclass(frozen=True)
class CoolingReport:
    """Rates, net rate and steady occupancy for one parameter point."""

    mechanism: str
    Gamma_minus: float
    Gamma_plus: float
    Gamma_net: float
    n_c: float
    stable: bool
    params_hash: str

    def __post_init__(self):
        if self.Gamma_net != self.Gamma_minus - self.Gamma_plus:
            raise DomainError("Gamma_net must equal Gamma_minus - Gamma_plus exactly")


@dataclass(frozen=True)
class OccupancyTrajectory:
    """CM occupancy versus time; times carried in both units."""

    times_seconds: np.ndarray
    times_wc: np.ndarray
    occupancies: np.ndarray
    method: str
    n_infinity: float | None = None


@dataclass(frozen=True)
class ThresholdResult:
    """Quality factor at which the steady occupancy crosses unity."""

    q_threshold: float
    bracket: tuple
    iterations: int
    achieved: float


def rates(params: SystemParams, magnon_weighting: str = "separated") -> tuple[float, float]:
    """Cooling and heating rates (Gamma_-, Gamma_+) at the trap frequency.

    MCM uses the closed Lorentzian pair; CMI samples the general engine at
    +-1.  Both refuse on an unstable CM-excluded drift.
    """
    assert_stable(build_drift(params, include_cm=False))
    if params.mechanism is Mechanism.MCM:
        return mcm_rates(params, 1.0)
    gamma_minus = psd_general(params, +1.0, magnon_weighting)
    gamma_plus = psd_general(params, -1.0, magnon_weighting)
    return gamma_minus, gamma_plus


def steady_occupancy(params: SystemParams, gamma_minus: float, gamma_plus: float) -> float:
    """Weak-coupling steady occupancy; raises RunawayError without a steady state."""
    net = gamma_minus - gamma_plus
    denom = params.gamma_c + net
    if denom <= 0.0:
        raise RunawayError(
            "no steady occupancy: gamma_c + Gamma_net = "
            f"{denom:.6g} <= 0 (gamma_c={params.gamma_c:.6g}, Gamma_net={net:.6g})"
        )
    return (params.gamma_c * params.nbar_c + gamma_plus) / denom


def invert_bath_occupancy(params: SystemParams, n_c: float, gamma_minus: float, gamma_plus: float) -> float:
    """Solve the occupancy formula for nbar_c given its output (round-trip check)."""
    return (n_c * (params.gamma_c + gamma_minus - gamma_plus) - gamma_plus) / params.gamma_c


def cooling_report(params: SystemParams, magnon_weighting: str = "separated") -> CoolingReport:
    gm, gp = rates(params, magnon_weighting)
    n_c = steady_occupancy(params, gm, gp)
    full = stability_report(build_drift(params, include_cm=True))
    return CoolingReport(
        params.mechanism.value, gm, gp, gm - gp, n_c, full.stable, params_hash(params.snapshot())
    )


def _times_pair(params, times, time_unit):
    times = np.asarray(times, dtype=float)
    if time_unit == "s":
        return times, times * params.omega_c
    if time_unit in ("wc", "dimensionless"):
        return times / params.omega_c, times
    raise DomainError(f"time_unit must be 's' or 'wc', got {time_unit!r}")


def occupancy_dynamics(
    params: SystemParams,
    n_0: float,
    times,
    time_unit: str = "s",
    method: str = "rate_equation",
) -> OccupancyTrajectory:
    """CM occupancy along a time grid.

    The rate-equation method is the closed-form exponential relaxation
    n(t) = n_inf + (n_0 - n_inf) exp(-(gamma_c + Gamma_net) t) whose fixed
    point is the steady occupancy; the lyapunov method integrates the full
    covariance flow from a thermal CM state at n_0.
    """
    if n_0 < 0.0:
        raise DomainError(f"initial occupancy must be nonnegative, got {n_0}")
    t_s, t_wc = _times_pair(params, times, time_unit)
    if method == "rate_equation":
        gm, gp = rates(params)
        n_inf = steady_occupancy(params, gm, gp)
        decay = params.gamma_c + gm - gp
        occ = n_inf + (n_0 - n_inf) * np.exp(-decay * t_wc)
        return OccupancyTrajectory(t_s, t_wc, occ, method, n_inf)
    if method == "lyapunov":
        v0 = initial_covariance(params, n_0)
        return lyapunov_dynamics(params, v0, times, time_unit)
    raise DomainError(f"method must be 'rate_equation' or 'lyapunov', got {method!r}")


def crossing_time_seconds(params: SystemParams, n_0: float, level: float = 1.0) -> float | None:
    """First time the rate-equation occupancy reaches ``level``; None if never."""
    gm, gp = rates(params)
    n_inf = steady_occupancy(params, gm, gp)
    if n_0 <= level:
        return 0.0
    if n_inf >= level:
        return None
    decay = params.gamma_c + gm - gp
    t_wc = math.log((n_0 - n_inf) / (level - n_inf)) / decay
    return t_wc / params.omega_c


def symplectic_form(n_modes: int) -> np.ndarray:
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def physicality_margin(v: np.ndarray) -> float:
    """Smallest eigenvalue of V + i Omega/2; nonnegative for a physical state."""
    n_modes = v.shape[0] // 2
    herm = v + 0.5j * symplectic_form(n_modes)
    return float(np.linalg.eigvalsh(herm).min())


def initial_covariance(
    params: SystemParams, n_c0: float, n_a0: float = 0.0, n_m0: float = 0.0
) -> np.ndarray:
    """Uncorrelated thermal covariance with the CM mode at occupancy n_c0."""
    diag = [n_a0 + 0.5, n_a0 + 0.5, n_m0 + 0.5, n_m0 + 0.5, n_c0 + 0.5, n_c0 + 0.5]
    return np.diag(diag)


def lyapunov_steady(params: SystemParams) -> tuple[np.ndarray, float]:
    """Steady 6-mode quadrature covariance and the exact CM occupancy.

    Solves A V + V A^T + D = 0 with the diffusion assembled from the same
    input correlation table as the spectra; n_c = (V_xx + V_pp - 1)/2 for
    the CM block.
    """
    model = build_drift(params, include_cm=True)
    assert_stable(model)
    a = model.quadrature_drift()
    d = model.quadrature_diffusion()
    v = solve_continuous_lyapunov(a, -d)
    v = 0.5 * (v + v.T)
    n_c = 0.5 * (v[4, 4] + v[5, 5] - 1.0)
    return v, float(n_c)


def lyapunov_dynamics(
    params: SystemParams, v_0: np.ndarray, times, time_unit: str = "s"
) -> OccupancyTrajectory:
    """Integrate dV/dt = A V + V A^T + D and extract n_c(t).

    Uses an adaptive explicit scheme (DOP853) at 1e-10 relative tolerance.
    """
    model = build_drift(params, include_cm=True)
    assert_stable(model)
    a = model.quadrature_drift()
    d = model.quadrature_diffusion()
    v_0 = np.asarray(v_0, dtype=float)
    if v_0.shape != (6, 6):
        raise DomainError(f"initial covariance must be 6x6, got {v_0.shape}")
    if physicality_margin(v_0) < -1e-8:
        raise DomainError("initial covariance violates the uncertainty bound")

    t_s, t_wc = _times_pair(params, times, time_unit)
    scale = max(1.0, float(np.max(np.abs(v_0))))

    def flow(_t, y):
        v = y.reshape(6, 6)
        dv = a @ v + v @ a.T + d
        return dv.ravel()

    t_span = (0.0, float(t_wc[-1]))
    sol = solve_ivp(
        flow,
        t_span,
        v_0.ravel(),
        t_eval=t_wc,
        method="DOP853",
        rtol=1e-10,
        atol=1e-10 * scale,
    )
    if not sol.success:
        raise ConvergenceError(f"covariance integrator failed: {sol.message}")
    occ = 0.5 * (sol.y[4 * 6 + 4, :] + sol.y[5 * 6 + 5, :] - 1.0)
    return OccupancyTrajectory(t_s, t_wc, occ, "lyapunov")


def qc_threshold(
    params: SystemParams,
    bracket: tuple = (2.0, 13.0),
    tol_decades: float = 1e-3,
    magnon_weighting: str = "separated",
) -> ThresholdResult:
    """Bisect log10(Q_c) for the ground-state boundary n_c = 1.

    The rates are independent of Q_c (the CM mode is excluded from the
    spectrum), so they are computed once and only the occupancy formula is
    re-evaluated per bisection step.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise DomainError(f"bracket must satisfy lo < hi, got {bracket}")
    gm, gp = rates(params, magnon_weighting)

    def occupancy_at(qlog):
        return steady_occupancy(params.replace(Q_c=10.0**qlog), gm, gp)

    n_lo, n_hi = occupancy_at(lo), occupancy_at(hi)
    if not (n_lo > 1.0 > n_hi):
        raise BracketError(
            "threshold bracket endpoints lie on the same side of n_c = 1: "
            f"n_c(Q=1e{lo:g}) = {n_lo:.6g}, n_c(Q=1e{hi:g}) = {n_hi:.6g}"
        )
    iterations = 0
    while hi - lo > tol_decades:
        mid = 0.5 * (lo + hi)
        if occupancy_at(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    q_log = 0.5 * (lo + hi)
    achieved = abs(occupancy_at(q_log) - 1.0)
    return ThresholdResult(10.0**q_log, (float(bracket[0]), float(bracket[1])), iterations, achieved)
