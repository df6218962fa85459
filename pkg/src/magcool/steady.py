"""Classical steady states, the linearized drift model and stability.

The fluctuation dynamics is written over the ladder basis
(da, da+, dm, dm+[, dc, dc+]) with all rates in trap-frequency units.  The
same drift model feeds the frequency-domain spectra and the Lyapunov
covariance solver, which works in the quadrature basis
x = (o + o+)/sqrt(2), p = -i(o - o+)/sqrt(2).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    InstabilityError,
    MultistabilityWarning,
    ParametricThresholdError,
)
from .model import Mechanism, SystemParams


@dataclass(frozen=True)
class SteadyState:
    """Converged steady amplitudes with the max-norm equation residual."""

    a0: complex
    m0: complex
    c0: complex
    residual: float
    iterations: int
    multistable: bool = False


@dataclass(frozen=True)
class StabilityReport:
    eigenvalue_real_parts: tuple
    stable: bool
    margin: float


@dataclass(frozen=True)
class DriftModel:
    """Linear fluctuation model: drift, noise map and input correlations.

    ``drift`` is the complex ladder-basis matrix, ``noise_map`` the diagonal
    matrix of sqrt(gamma) prefactors, and ``input_correlations`` the table
    C with <xi_i(w) xi_j(w')> = 2*pi*delta(w+w') C_ij.
    """

    dimension: int
    drift: np.ndarray
    noise_map: np.ndarray
    input_correlations: np.ndarray

    def quadrature_drift(self) -> np.ndarray:
        """Real drift matrix over (x_a, p_a, x_m, p_m[, x_c, p_c])."""
        s = _quad_transform(self.dimension // 2)
        a_quad = s @ self.drift @ np.linalg.inv(s)
        return a_quad.real

    def quadrature_diffusion(self) -> np.ndarray:
        """Real symmetric diffusion matrix for the quadrature covariance flow."""
        c_sym = 0.5 * (self.input_correlations + self.input_correlations.T)
        s = _quad_transform(self.dimension // 2)
        d = s @ self.noise_map @ c_sym @ self.noise_map @ s.T
        return d.real


def _quad_transform(n_modes: int) -> np.ndarray:
    block = np.array([[1.0, 1.0], [-1.0j, 1.0j]]) / math.sqrt(2.0)
    s = np.zeros((2 * n_modes, 2 * n_modes), dtype=complex)
    for k in range(n_modes):
        s[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = block
    return s


def correlation_table(params: SystemParams, dimension: int, lumped: bool = False) -> np.ndarray:
    """Input-noise correlation coefficients over the ladder noise basis.

    The cavity channel carries squeezed-vacuum statistics (n_s, n_s + 1 and
    the anomalous m_s e^{-2i phi_s} pair), the magnon channel is thermal.
    With ``lumped=True`` the magnon weights (nbar_m + 1, nbar_m) are replaced
    by the single-factor convention (2 nbar_m + 1, 0) used for rate totals.
    """
    c = np.zeros((dimension, dimension), dtype=complex)
    n_s, m_s = params.n_s, params.m_s
    c[0, 1] = n_s + 1.0
    c[1, 0] = n_s
    c[0, 0] = m_s * cmath.exp(-2.0j * params.phi_s)
    c[1, 1] = m_s * cmath.exp(+2.0j * params.phi_s)
    if lumped:
        c[2, 3] = 2.0 * params.nbar_m + 1.0
        c[3, 2] = 0.0
    else:
        c[2, 3] = params.nbar_m + 1.0
        c[3, 2] = params.nbar_m
    if dimension == 6:
        c[4, 5] = params.nbar_c + 1.0
        c[5, 4] = params.nbar_c
    return c


def build_drift(params: SystemParams, include_cm: bool) -> DriftModel:
    """Assemble the 4x4 (CM excluded) or 6x6 linearized drift model."""
    n = 6 if include_cm else 4
    a = np.zeros((n, n), dtype=complex)
    p = params
    a[0, 0] = -(p.gamma_a / 2.0 + 1.0j * p.Delta_a)
    a[0, 1] = -2.0j * p.eps_a
    a[0, 2] = -1.0j * p.J_am
    a[1, 0] = +2.0j * p.eps_a.conjugate()
    a[1, 1] = -(p.gamma_a / 2.0 - 1.0j * p.Delta_a)
    a[1, 3] = +1.0j * p.J_am
    a[2, 0] = -1.0j * p.J_am
    a[2, 2] = -(p.gamma_m / 2.0 + 1.0j * p.Delta_m)
    a[3, 1] = +1.0j * p.J_am
    a[3, 3] = -(p.gamma_m / 2.0 - 1.0j * p.Delta_m)
    if include_cm:
        a[0, 4] = a[0, 5] = -1.0j * p.J_ac
        a[1, 4] = a[1, 5] = +1.0j * p.J_ac
        a[2, 4] = a[2, 5] = -1.0j * p.J_mc
        a[3, 4] = a[3, 5] = +1.0j * p.J_mc
        a[4, 4] = -(p.gamma_c / 2.0 + 1.0j)
        a[5, 5] = -(p.gamma_c / 2.0 - 1.0j)
        a[4, 0] = a[4, 1] = -1.0j * p.J_ac
        a[4, 2] = a[4, 3] = -1.0j * p.J_mc
        a[5, 0] = a[5, 1] = +1.0j * p.J_ac
        a[5, 2] = a[5, 3] = +1.0j * p.J_mc

    rates = [p.gamma_a, p.gamma_a, p.gamma_m, p.gamma_m]
    if include_cm:
        rates += [p.gamma_c, p.gamma_c]
    noise = np.diag(np.sqrt(rates))
    return DriftModel(n, a, noise, correlation_table(p, n))


def stability_report(model: DriftModel) -> StabilityReport:
    """Eigenvalue verdict: stable iff every drift eigenvalue has Re < 0."""
    re = np.sort(np.linalg.eigvals(model.drift).real)
    stable = bool(re.max() < 0.0)
    margin = float(np.min(np.abs(re)))
    return StabilityReport(tuple(float(x) for x in re), stable, margin)


def assert_stable(model: DriftModel) -> StabilityReport:
    """Return the stability report, raising if the drift is unstable."""
    report = stability_report(model)
    if not report.stable:
        worst = max(report.eigenvalue_real_parts)
        raise InstabilityError(
            f"drift model of dimension {model.dimension} is unstable: "
            f"max Re(eigenvalue) = {worst:.6g} >= 0"
        )
    return report


def check_parametric_threshold(params: SystemParams) -> float:
    """Margin |gamma_a/2 + i Delta_a| - 2|eps_a|; raises at or beyond threshold."""
    margin = abs(complex(params.gamma_a / 2.0, params.Delta_a)) - 2.0 * abs(params.eps_a)
    if margin <= 0.0:
        raise ParametricThresholdError(
            "intracavity pump at or beyond the parametric-oscillation threshold: "
            f"2|eps_a| = {2.0 * abs(params.eps_a):.6g} >= |gamma_a/2 + i Delta_a| = "
            f"{abs(complex(params.gamma_a / 2.0, params.Delta_a)):.6g} "
            f"(gamma_a={params.gamma_a}, Delta_a={params.Delta_a}, eps_a={params.eps_a})"
        )
    return margin


def solve_mcm(params: SystemParams, omega_drive: float) -> SteadyState:
    """Steady cavity amplitude under dominant cavity drive; m0 = c0 = 0.

    Solves (gamma_a/2 + i Delta_a) a0 + 2i eps_a a0* = Omega_a exactly via
    the adjoined-conjugate 2x2 real system.
    """
    check_parametric_threshold(params)
    ga2, da = params.gamma_a / 2.0, params.Delta_a
    er, ei = params.eps_a.real, params.eps_a.imag
    mat = np.array([[ga2 - 2.0 * ei, -da + 2.0 * er], [da + 2.0 * er, ga2 + 2.0 * ei]])
    rhs = np.array([float(omega_drive), 0.0])
    sol = np.linalg.solve(mat, rhs)
    # one refinement step keeps the residual at machine level for large drives
    sol += np.linalg.solve(mat, rhs - mat @ sol)
    a0 = complex(sol[0], sol[1])
    residual = abs((ga2 + 1.0j * da) * a0 + 2.0j * params.eps_a * a0.conjugate() - omega_drive)
    return SteadyState(a0, 0.0j, 0.0j, float(residual), 1)


def _cmi_residual(z: np.ndarray, params: SystemParams, omega_drive, eps_m, g_amc) -> np.ndarray:
    a0 = complex(z[0], z[1])
    m0 = complex(z[2], z[3])
    c0 = complex(z[4], z[5])
    dpa = -(params.gamma_a / 2.0 + 1.0j * params.Delta_a)
    dpm = -(params.gamma_m / 2.0 + 1.0j * params.Delta_m)
    wpc = -(params.gamma_c / 2.0 + 1.0j)
    r1 = dpa * a0 + omega_drive - 2.0j * params.eps_a * a0.conjugate() - 2.0j * g_amc * c0.real * m0
    r2 = dpm * m0 + eps_m - 2.0j * g_amc * c0.real * a0
    r3 = wpc * c0 - 1.0j * g_amc * (a0 * m0.conjugate() + a0.conjugate() * m0)
    return np.array([r1.real, r1.imag, r2.real, r2.imag, r3.real, r3.imag])


def _newton_cmi(z0, params, omega_drive, eps_m, g_amc, tol, max_iter=200):
    z = np.asarray(z0, dtype=float).copy()
    res = _cmi_residual(z, params, omega_drive, eps_m, g_amc)
    norm = np.max(np.abs(res))
    for it in range(1, max_iter + 1):
        if norm < tol:
            return z, norm, it - 1
        jac = np.empty((6, 6))
        for j in range(6):
            h = 1e-8 * max(1.0, abs(z[j]))
            zp = z.copy()
            zp[j] += h
            jac[:, j] = (_cmi_residual(zp, params, omega_drive, eps_m, g_amc) - res) / h
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        for _ in range(40):
            trial = z + lam * step
            tres = _cmi_residual(trial, params, omega_drive, eps_m, g_amc)
            tnorm = np.max(np.abs(tres))
            if tnorm < norm:
                z, res, norm = trial, tres, tnorm
                break
            lam *= 0.5
        else:
            break
    return z, norm, max_iter


def solve_cmi(
    params: SystemParams, omega_drive: float, eps_m: float, g_amc: float
) -> SteadyState:
    """Newton solution of the coupled three-mode steady-state equations.

    Starts from the decoupled solution plus 8 perturbed guesses; if several
    distinct roots converge, flags multistability and returns the root with
    the smallest |c0|.
    """
    check_parametric_threshold(params)
    scale = max(1.0, abs(omega_drive), abs(eps_m))
    tol = 1e-12 * scale

    decoupled = solve_mcm(params, omega_drive).a0
    m0 = eps_m / complex(params.gamma_m / 2.0, params.Delta_m)
    base = np.array([decoupled.real, decoupled.imag, m0.real, m0.imag, 0.0, 0.0])

    rng = np.random.default_rng(1234)
    guesses = [base]
    spread = 0.1 * max(1.0, np.max(np.abs(base)))
    for _ in range(8):
        guesses.append(base + spread * rng.standard_normal(6))

    roots = []
    total_iters = 0
    best_fail = (math.inf, 0)
    for g in guesses:
        z, norm, iters = _newton_cmi(g, params, omega_drive, eps_m, g_amc, tol)
        total_iters += iters
        if norm < tol:
            if not any(np.max(np.abs(z - r)) <= 1e-6 for r in roots):
                roots.append(z)
        elif norm < best_fail[0]:
            best_fail = (norm, iters)

    if not roots:
        raise ConvergenceError(
            f"steady-state Newton iteration did not converge in 200 iterations; "
            f"final residual {best_fail[0]:.3g} (tolerance {tol:.3g})"
        )
    multistable = len(roots) > 1
    if multistable:
        warnings.warn(
            f"{len(roots)} distinct steady states found; returning smallest |c0|",
            MultistabilityWarning,
            stacklevel=2,
        )
    roots.sort(key=lambda z: abs(complex(z[4], z[5])))
    z = roots[0]
    norm = float(np.max(np.abs(_cmi_residual(z, params, omega_drive, eps_m, g_amc))))
    return SteadyState(
        complex(z[0], z[1]),
        complex(z[2], z[3]),
        complex(z[4], z[5]),
        norm,
        total_iters,
        multistable,
    )


def effective_couplings(steady: SteadyState, g_amc: float) -> tuple[float, float, float]:
    """Effective bilinear couplings from steady amplitudes.

    J_ac = G_amc |m0| (cavity-CM), J_mc = G_amc |a0| (magnon-CM) and
    J_am = 2 G_amc Re[c0] (cavity-magnon), in the units of G_amc.
    """
    j_ac = g_amc * abs(steady.m0)
    j_mc = g_amc * abs(steady.a0)
    j_am = 2.0 * g_amc * steady.c0.real
    return j_ac, j_mc, j_am
