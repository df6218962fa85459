"""Physical constants, device geometry and the normalized parameter set.

All dynamical quantities used by the rest of the package live in
``SystemParams`` and are expressed in units of the trap frequency
``omega_c``; SI values are converted exactly once, at this module's
boundary.  Every type here is immutable and safe to share across workers.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

from scipy import constants as _si

from .errors import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    """Material and fundamental constants for a levitated YIG sphere.

    gyromagnetic_ratio is in rad/s/T (2*pi*28 GHz/T), spin_density in 1/m^3,
    mass_density in kg/m^3; hbar and k_B default to CODATA values.
    """

    gyromagnetic_ratio: float = TWO_PI * 28.0e9
    vacuum_permeability: float = _si.mu_0
    spin_density: float = 4.22e27
    ground_spin: float = 2.5
    mass_density: float = 5170.0
    reduced_planck: float = _si.hbar
    boltzmann: float = _si.k

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value > 0.0:
                raise DomainError(f"constant {name} must be positive, got {value}")


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class DeviceGeometry:
    """Sphere and cavity geometry plus trap and drive settings (SI units)."""

    sphere_diameter: float
    cavity_mode_volume: float
    wave_number: float
    equilibrium_position: float
    trap_frequency: float
    bias_field: float = 0.0
    drive_power: float = 0.0

    def __post_init__(self):
        if not self.sphere_diameter > 0.0:
            raise DomainError(f"sphere_diameter must be positive, got {self.sphere_diameter}")
        if not self.cavity_mode_volume > 0.0:
            raise DomainError(f"cavity_mode_volume must be positive, got {self.cavity_mode_volume}")
        if not self.trap_frequency > 0.0:
            raise DomainError(f"trap_frequency must be positive, got {self.trap_frequency}")
        if self.wave_number < 0.0:
            raise DomainError(f"wave_number must be nonnegative, got {self.wave_number}")
        if self.drive_power < 0.0:
            raise DomainError(f"drive_power must be nonnegative, got {self.drive_power}")
        if self.bias_field < 0.0:
            raise DomainError(f"bias_field must be nonnegative, got {self.bias_field}")
        # single-Kittel-mode validity needs d << 2*pi/k
        if self.sphere_diameter * self.wave_number >= 0.1:
            warnings.warn(
                "sphere_diameter * wave_number = "
                f"{self.sphere_diameter * self.wave_number:.3g} >= 0.1; the "
                "uniform-field (single Kittel mode) approximation is marginal",
                stacklevel=2,
            )

    @property
    def volume(self) -> float:
        return math.pi * self.sphere_diameter**3 / 6.0


class Mechanism(str, enum.Enum):
    """Which cooling channel layout the fluctuation dynamics uses."""

    MCM = "MCM"
    CMI = "CMI"


@dataclass(frozen=True)
class SystemParams:
    """Normalized parameter set: the single source of truth for a run.

    ``omega_c`` is the SI trap frequency in rad/s and is used only to convert
    times and frequencies to seconds; every other rate, detuning and coupling
    is dimensionless, in units of omega_c.
    """

    omega_c: float
    Delta_a: float
    Delta_m: float
    gamma_a: float
    gamma_m: float
    gamma_c: float
    nbar_m: float
    nbar_c: float
    J_ac: float
    J_mc: float
    J_am: float
    eps_a: complex = 0.0 + 0.0j
    r_s: float = 0.0
    phi_s: float = 0.0
    mechanism: Mechanism = Mechanism.CMI

    def __post_init__(self):
        if not self.omega_c > 0.0:
            raise DomainError(f"omega_c must be positive, got {self.omega_c}")
        for name in ("gamma_a", "gamma_m", "gamma_c"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("nbar_m", "nbar_c", "r_s", "J_ac", "J_mc", "J_am"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be nonnegative, got {getattr(self, name)}")
        object.__setattr__(self, "eps_a", complex(self.eps_a))
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        if self.mechanism is Mechanism.MCM and (self.J_ac != 0.0 or self.J_am != 0.0):
            raise DomainError(
                "mechanism MCM requires J_ac = J_am = 0 in the fluctuation dynamics, "
                f"got J_ac={self.J_ac}, J_am={self.J_am}"
            )

    # squeezed-vacuum statistics of the injected field
    @property
    def n_s(self) -> float:
        return math.sinh(self.r_s) ** 2

    @property
    def m_s(self) -> float:
        return math.sinh(self.r_s) * math.cosh(self.r_s)

    @property
    def Q_c(self) -> float:
        return 1.0 / self.gamma_c

    def replace(self, **kwargs) -> "SystemParams":
        """Return a copy with the given fields replaced.

        Accepts the pseudo-keys ``Q_c`` (sets gamma_c = 1/Q_c) and ``Delta``
        (sets Delta_a = Delta_m simultaneously), which the sweep machinery
        uses as first-class axes.
        """
        kwargs = dict(kwargs)
        if "Q_c" in kwargs:
            q = kwargs.pop("Q_c")
            if not q > 0.0:
                raise DomainError(f"Q_c must be positive, got {q}")
            kwargs["gamma_c"] = 1.0 / q
        if "Delta" in kwargs:
            delta = kwargs.pop("Delta")
            kwargs.setdefault("Delta_a", delta)
            kwargs.setdefault("Delta_m", delta)
        return replace(self, **kwargs)

    def as_mcm(self) -> "SystemParams":
        """Single-channel variant: drops the cavity-CM and cavity-magnon couplings."""
        return replace(self, mechanism=Mechanism.MCM, J_ac=0.0, J_am=0.0)

    def snapshot(self) -> dict:
        """JSON-serializable record of every field (complex split re/im)."""
        return {
            "omega_c": self.omega_c,
            "Delta_a": self.Delta_a,
            "Delta_m": self.Delta_m,
            "gamma_a": self.gamma_a,
            "gamma_m": self.gamma_m,
            "gamma_c": self.gamma_c,
            "nbar_m": self.nbar_m,
            "nbar_c": self.nbar_c,
            "J_ac": self.J_ac,
            "J_mc": self.J_mc,
            "J_am": self.J_am,
            "eps_a_re": self.eps_a.real,
            "eps_a_im": self.eps_a.imag,
            "r_s": self.r_s,
            "phi_s": self.phi_s,
            "mechanism": self.mechanism.value,
        }


SWEEPABLE_KEYS = (
    "Delta_a",
    "Delta_m",
    "Delta",
    "gamma_a",
    "gamma_m",
    "gamma_c",
    "Q_c",
    "nbar_m",
    "nbar_c",
    "J_ac",
    "J_mc",
    "J_am",
    "r_s",
    "phi_s",
)


def intracavity_squeezing(lam: float, theta: float) -> complex:
    """Complex pump amplitude from its (magnitude, phase) form eps_a = i*lam*e^{i*theta}/2."""
    if lam < 0.0:
        raise DomainError(f"squeezing pump magnitude must be nonnegative, got {lam}")
    return 0.5j * lam * complex(math.cos(theta), math.sin(theta))


def zero_point_motion(constants: PhysicalConstants, geom: DeviceGeometry) -> float:
    """Zero-point amplitude of the center-of-mass mode in the trap (meters)."""
    mass = constants.mass_density * geom.volume
    return math.sqrt(constants.reduced_planck / (2.0 * mass * geom.trap_frequency))


def derive_couplings(
    constants: PhysicalConstants, geom: DeviceGeometry, omega_a: float
) -> tuple[float, float, float]:
    """Microscopic coupling rates from geometry (all SI, rad/s and meters).

    Returns (g_am, g_amc, x_zpm): the magnon-photon rate
    g_am = (gamma/2) sqrt(hbar omega_a mu0 / V_a) sqrt(2 rho_s V s), the
    magnon-photon-CM rate g_amc = g_am * k * x_zpm, and the zero-point
    motion.  g_amc is independent of the sphere volume; this cancellation
    is asserted by recomputing at doubled diameter.
    """
    if not omega_a > 0.0:
        raise DomainError(f"omega_a must be positive, got {omega_a}")

    def _g_am(g: DeviceGeometry) -> float:
        spins = 2.0 * constants.spin_density * g.volume * constants.ground_spin
        field_scale = math.sqrt(
            constants.reduced_planck * omega_a * constants.vacuum_permeability / g.cavity_mode_volume
        )
        return 0.5 * constants.gyromagnetic_ratio * field_scale * math.sqrt(spins)

    g_am = _g_am(geom)
    x_zpm = zero_point_motion(constants, geom)
    g_amc = g_am * geom.wave_number * x_zpm

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # the doubled probe may trip the d*k guard
        doubled = replace(geom, sphere_diameter=2.0 * geom.sphere_diameter)
    g_amc_doubled = _g_am(doubled) * geom.wave_number * zero_point_motion(constants, doubled)
    if g_amc != 0.0 and abs(g_amc_doubled - g_amc) > 1e-12 * abs(g_amc):
        raise AssertionError("g_amc volume cancellation violated")

    return g_am, g_amc, x_zpm


def drive_amplitudes(
    geom: DeviceGeometry,
    gamma_a: float,
    omega_d: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> tuple[float, float]:
    """Cavity and magnon drive amplitudes (rad/s), real and nonnegative.

    Omega_a = sqrt(2 gamma_a P_d / (hbar omega_d)) and
    eps_m = gamma sqrt(5 N / 4) B_0 with N = rho_s V the total spin number.
    Phases are fixed to zero by convention; only magnitudes enter the
    reported quantities.
    """
    if geom.drive_power < 0.0:
        raise DomainError(f"drive power must be nonnegative, got {geom.drive_power}")
    if not omega_d > 0.0:
        raise DomainError(f"omega_d must be positive, got {omega_d}")
    if not gamma_a > 0.0:
        raise DomainError(f"gamma_a must be positive, got {gamma_a}")
    omega_drive = math.sqrt(
        2.0 * gamma_a * geom.drive_power / (constants.reduced_planck * omega_d)
    )
    n_spins = constants.spin_density * geom.volume
    eps_m = constants.gyromagnetic_ratio * math.sqrt(1.25 * n_spins) * geom.bias_field
    return omega_drive, eps_m


def thermal_occupancy(
    omega: float, temperature: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Bose-Einstein occupancy 1/(exp(hbar*omega/kB*T) - 1); returns 0 at T = 0."""
    if not omega > 0.0:
        raise DomainError(f"omega must be positive, got {omega}")
    if temperature < 0.0:
        raise DomainError(f"temperature must be nonnegative, got {temperature}")
    if temperature == 0.0:
        return 0.0
    x = constants.reduced_planck * omega / (constants.boltzmann * temperature)
    return 1.0 / math.expm1(x)
