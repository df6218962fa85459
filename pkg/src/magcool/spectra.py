"""Quantum-noise spectra of the force on the center-of-mass mode.

The anti-Stokes/Stokes rates are samples of the force power spectral
density S_F(w) = Int dt e^{iwt} <F(t)F(0)> taken at w = +-1 (trap-frequency
units).  Single-channel (MCM) spectra use the closed Lorentzian form; the
dual-channel (CMI) spectrum comes from the frequency-domain linear-response
engine: the CM-excluded 4-mode system driven by squeezed-cavity and
thermal-magnon inputs.  A compiled kernel carries the hot per-frequency
solves when available, with a numpy fallback selected at import.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass

import numpy as np

from . import _engine_py
from .errors import DomainError, SingularityError
from .io import params_hash
from .model import Mechanism, SystemParams
from .steady import assert_stable, build_drift

DEFAULT_GRID = (-3.0, 3.0, 2001)

_FORCED = os.environ.get("MAGCOOL_ENGINE", "auto").lower()
if _FORCED in ("auto", "compiled", "cython"):
    try:
        from . import _kernel as _compiled
    except ImportError:
        if _FORCED != "auto":
            raise
        _compiled = None
else:
    _compiled = None

_ENGINE = _compiled if _compiled is not None else _engine_py


def engine_name() -> str:
    """Which backend evaluates the PSD: 'compiled' or 'python'."""
    return "compiled" if _ENGINE is not _engine_py else "python"


def available_engines() -> dict:
    """Backend name -> psd_points callable, for benchmarks and cross-checks."""
    engines = {"python": _engine_py.psd_points}
    if _compiled is not None:
        engines["compiled"] = _compiled.psd_points
    return engines


@dataclass(frozen=True)
class Susceptibilities:
    """Response functions of the dressed fluctuation system.

    1/D_o(w) = gamma_o/2 - i(w - Delta_o) for each bare mode, D(w) the
    magnon-dressed cavity response and S0(w) the parametric denominator.
    """

    Delta_a: float
    Delta_m: float
    gamma_a: float
    gamma_m: float
    gamma_c: float
    J_am: float
    eps_a: complex

    @classmethod
    def from_params(cls, p: SystemParams) -> "Susceptibilities":
        return cls(p.Delta_a, p.Delta_m, p.gamma_a, p.gamma_m, p.gamma_c, p.J_am, p.eps_a)

    def D_a(self, w):
        return 1.0 / (self.gamma_a / 2.0 - 1.0j * (w - self.Delta_a))

    def D_m(self, w):
        return 1.0 / (self.gamma_m / 2.0 - 1.0j * (w - self.Delta_m))

    def D_c(self, w):
        return 1.0 / (self.gamma_c / 2.0 - 1.0j * (w - 1.0))

    def D(self, w):
        return 1.0 / (1.0 / self.D_a(w) + self.J_am**2 * self.D_m(w))

    def S0(self, w):
        return 1.0 - 4.0 * abs(self.eps_a) ** 2 * self.D(w) * np.conj(self.D(-w))


@dataclass(frozen=True)
class SpectrumResult:
    """Sampled force PSD over a frequency grid (both in trap-frequency units)."""

    frequencies: np.ndarray
    values: np.ndarray
    mechanism: str
    params_hash: str

    def __post_init__(self):
        freq = np.asarray(self.frequencies, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if freq.ndim != 1 or freq.shape != vals.shape:
            raise DomainError("frequencies and values must be 1-d arrays of equal length")
        if not np.all(np.diff(freq) > 0.0):
            raise DomainError("spectrum frequencies must be strictly increasing")
        floor = -1e-12 * max(vals.max(initial=0.0), 0.0)
        if vals.min(initial=0.0) < floor:
            raise DomainError(
                f"PSD nonnegativity violated: min {vals.min():.3g} < {floor:.3g}"
            )
        object.__setattr__(self, "frequencies", freq)
        object.__setattr__(self, "values", vals)


def mcm_rates(params: SystemParams, omega: float = 1.0) -> tuple[float, float]:
    """Single-channel cooling/heating rates at +-omega (closed Lorentzian form)."""
    j2g = params.J_mc**2 * params.gamma_m
    half = (params.gamma_m / 2.0) ** 2
    cooling = j2g / ((omega - params.Delta_m) ** 2 + half)
    heating = j2g / ((omega + params.Delta_m) ** 2 + half)
    return cooling, heating


def mcm_spectrum(params: SystemParams, omega) -> np.ndarray:
    """Single-channel force PSD on a frequency array (vacuum magnon input)."""
    omega = np.asarray(omega, dtype=float)
    j2g = params.J_mc**2 * params.gamma_m
    return j2g / ((omega - params.Delta_m) ** 2 + (params.gamma_m / 2.0) ** 2)


def _engine_args(params: SystemParams, magnon_weighting: str):
    if magnon_weighting == "separated":
        mag_nn, mag_anti = params.nbar_m + 1.0, params.nbar_m
    elif magnon_weighting == "lumped":
        mag_nn, mag_anti = 2.0 * params.nbar_m + 1.0, 0.0
    else:
        raise DomainError(
            f"magnon_weighting must be 'separated' or 'lumped', got {magnon_weighting!r}"
        )
    cav_anom = params.m_s * cmath.exp(-2.0j * params.phi_s)
    return (
        params.Delta_a,
        params.Delta_m,
        params.gamma_a,
        params.gamma_m,
        params.J_ac,
        params.J_mc,
        params.J_am,
        params.eps_a,
        params.n_s + 1.0,
        params.n_s,
        cav_anom,
        mag_nn,
        mag_anti,
    )


def psd_general(
    params: SystemParams, omega: float, magnon_weighting: str = "separated"
) -> float:
    """General-engine force PSD at a single frequency.

    Refuses on an unstable CM-excluded drift; raises SingularityError if the
    response matrix is numerically singular at the requested frequency.
    """
    assert_stable(build_drift(params, include_cm=False))
    return _psd_unchecked(params, omega, magnon_weighting)


def _psd_unchecked(params, omega, magnon_weighting="separated"):
    args = _engine_args(params, magnon_weighting)
    try:
        values = _ENGINE.psd_points(np.atleast_1d(float(omega)), *args)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise SingularityError(f"singular response at omega={omega}: {exc}") from exc
    value = float(values[0])
    if not math.isfinite(value):
        raise SingularityError(f"non-finite force PSD at omega={omega}")
    return value


def psd_grid(
    params: SystemParams,
    omega_min: float = DEFAULT_GRID[0],
    omega_max: float = DEFAULT_GRID[1],
    n_points: int = DEFAULT_GRID[2],
    magnon_weighting: str = "separated",
) -> SpectrumResult:
    """Uniform-grid spectrum; MCM uses the closed form, CMI the engine."""
    if n_points < 2:
        raise DomainError(f"n_points must be >= 2, got {n_points}")
    if not omega_min < omega_max:
        raise DomainError(f"need omega_min < omega_max, got [{omega_min}, {omega_max}]")
    grid = np.linspace(omega_min, omega_max, int(n_points))
    if params.mechanism is Mechanism.MCM:
        values = mcm_spectrum(params, grid)
    else:
        assert_stable(build_drift(params, include_cm=False))
        args = _engine_args(params, magnon_weighting)
        try:
            values = np.asarray(_ENGINE.psd_points(grid, *args), dtype=float)
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            raise SingularityError(f"singular response on grid: {exc}") from exc
        if not np.all(np.isfinite(values)):
            raise SingularityError("non-finite force PSD on grid")
    return SpectrumResult(grid, values, params.mechanism.value, params_hash(params.snapshot()))


def force_response(params: SystemParams, omega) -> np.ndarray:
    """Force response row t(w) over (a_in, a_in+, m_in, m_in+); shape (n, 4)."""
    return _engine_py.force_response(
        np.atleast_1d(np.asarray(omega, dtype=float)),
        params.Delta_a,
        params.Delta_m,
        params.gamma_a,
        params.gamma_m,
        params.J_ac,
        params.J_mc,
        params.J_am,
        params.eps_a,
    )


@dataclass(frozen=True)
class ChannelInterference:
    """One dissipation channel's path decomposition at a fixed frequency.

    Amplitudes are the Bogoliubov-whitened noise-to-force amplitudes of the
    cavity-CM (ccm) and magnon-CM (mcm) force paths; the PSD entries are the
    channel's contribution with only that path's force coupling active.
    """

    ccm_amplitude: complex
    mcm_amplitude: complex
    ccm_only_psd: float
    mcm_only_psd: float
    combined_psd: float

    @property
    def magnitude_ratio(self) -> float:
        """|ccm| / |mcm|; inf when the mcm path is absent."""
        if abs(self.mcm_amplitude) == 0.0:
            return math.inf
        return abs(self.ccm_amplitude) / abs(self.mcm_amplitude)

    @property
    def phase_difference(self) -> float:
        """arg(ccm) - arg(mcm), wrapped to (-pi, pi]."""
        diff = cmath.phase(self.ccm_amplitude) - cmath.phase(self.mcm_amplitude)
        return math.remainder(diff, 2.0 * math.pi)


@dataclass(frozen=True)
class InterferenceDiagnostic:
    omega: float
    cavity: ChannelInterference
    magnon: ChannelInterference
    total_psd: float


def interference_diagnostic(params: SystemParams, omega: float) -> InterferenceDiagnostic:
    """Split the force PSD at ``omega`` into channel and path contributions.

    Obtained by selectively zeroing the force couplings J_mc (ccm path) and
    J_ac (mcm path) in the force vector while keeping the dynamics fixed;
    for a pure squeezed cavity input the channel PSD is an exact squared
    amplitude, so path amplitudes carry meaningful relative phases.
    """
    assert_stable(build_drift(params, include_cm=False))
    t = force_response(params, omega)[0]
    t_ccm = force_response(params.replace(J_mc=0.0), omega)[0]
    t_mcm = t - t_ccm

    ch, sh = math.cosh(params.r_s), math.sinh(params.r_s)
    rot = cmath.exp(2.0j * params.phi_s)

    def cavity_amp(tv):
        return tv[0] * ch + tv[1] * rot * sh

    def magnon_norm_amp(tv):
        return math.sqrt(params.nbar_m + 1.0) * tv[2]

    def magnon_psd(tv):
        return (params.nbar_m + 1.0) * abs(tv[2]) ** 2 + params.nbar_m * abs(tv[3]) ** 2

    cavity = ChannelInterference(
        cavity_amp(t_ccm),
        cavity_amp(t_mcm),
        abs(cavity_amp(t_ccm)) ** 2,
        abs(cavity_amp(t_mcm)) ** 2,
        abs(cavity_amp(t)) ** 2,
    )
    magnon = ChannelInterference(
        magnon_norm_amp(t_ccm),
        magnon_norm_amp(t_mcm),
        magnon_psd(t_ccm),
        magnon_psd(t_mcm),
        magnon_psd(t),
    )
    return InterferenceDiagnostic(
        float(omega), cavity, magnon, cavity.combined_psd + magnon.combined_psd
    )


@dataclass(frozen=True)
class CmiAmplitudes:
    """Printed closed-form scattering amplitudes of the cavity channel.

    The magnon-channel amplitudes depend on auxiliary response functions
    whose closed forms are not available here; they are flagged unavailable
    and the general engine's channel decomposition substitutes for them.
    """

    T_a_SFa: complex
    T_m_SFa: complex
    T_a_SFm_available: bool = False
    T_m_SFm_available: bool = False


def cmi_amplitudes(params: SystemParams, omega: float) -> CmiAmplitudes:
    """Closed-form cavity-channel scattering amplitudes at ``omega``."""
    sus = Susceptibilities.from_params(params)
    s0 = sus.S0(omega)
    if abs(s0) < 1e-12:
        raise SingularityError(
            f"parametric denominator S0 vanishes at omega={omega}: |S0|={abs(s0):.3g}"
        )
    d_nu = sus.D(omega)
    d_opp = sus.D(-omega)
    eps = params.eps_a
    sh_rot = math.sinh(params.r_s) * cmath.exp(-2.0j * params.phi_s)
    ch = math.cosh(params.r_s)
    t_a = (params.J_ac / s0) * (
        (d_nu + 2.0j * eps.conjugate() * abs(d_opp) ** 2) * sh_rot
        + (d_nu - 2.0j * eps * abs(d_nu) ** 2) * ch
    )
    t_m = (params.J_ac / s0) * (
        -math.sqrt(params.gamma_m)
        * 1.0j
        * params.J_am
        * sus.D_m(omega)
        * (np.conj(d_nu) + 2.0j * eps * abs(d_nu) ** 2)
    )
    return CmiAmplitudes(complex(t_a), complex(t_m))
