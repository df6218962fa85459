"""Run configuration: TOML schema, overrides and the physical-entry pipeline.

Two entry modes exist.  ``direct`` takes every rate, detuning and coupling in
trap-frequency units, exactly as the benchmark figure captions list them.
``physical`` derives the couplings and drive amplitudes from sphere/cavity
geometry and solves the classical steady state to obtain the effective
couplings.  Angles (phi_s, theta) are given in degrees in config files and
converted to radians here.
"""

from __future__ import annotations

import math
import warnings

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DomainError
from .model import (
    DeviceGeometry,
    Mechanism,
    PhysicalConstants,
    SystemParams,
    derive_couplings,
    drive_amplitudes,
    intracavity_squeezing,
)
from .steady import SteadyState, effective_couplings, solve_cmi

COMMAND_SECTIONS = (
    "spectrum",
    "rates",
    "occupancy",
    "dynamics",
    "threshold",
    "sweep",
    "optimize",
    "fig",
    "steady",
)

_PARAM_DEFAULTS = {
    "Delta_a": 1.0,
    "Delta_m": 1.0,
    "nbar_m": 0.0,
    "nbar_c": 0.0,
    "J_ac": 0.0,
    "J_mc": 0.0,
    "J_am": 0.0,
    "r_s": 0.0,
    "phi_s": 0.0,
}

_GEOMETRY_KEYS = (
    "sphere_diameter",
    "cavity_mode_volume",
    "wave_number",
    "kx0",
    "omega_a_hz",
    "bias_field",
    "drive_power",
)


@dataclass(frozen=True)
class PhysicalDerivation:
    """Record of the geometry-to-couplings pipeline for the run record."""

    g_am: float
    g_amc: float
    x_zpm: float
    omega_drive: float
    eps_m: float
    g_amc_normalized: float
    steady: SteadyState

    def snapshot(self) -> dict:
        return {
            "g_am_rad_per_s": self.g_am,
            "g_amc_rad_per_s": self.g_amc,
            "x_zpm_m": self.x_zpm,
            "omega_drive_over_wc": self.omega_drive,
            "eps_m_over_wc": self.eps_m,
            "G_amc_over_wc": self.g_amc_normalized,
            "a0_re": self.steady.a0.real,
            "a0_im": self.steady.a0.imag,
            "m0_re": self.steady.m0.real,
            "m0_im": self.steady.m0.imag,
            "c0_re": self.steady.c0.real,
            "c0_im": self.steady.c0.imag,
            "residual": self.steady.residual,
        }


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: SystemParams | None
    command: str | None
    payload: dict
    derivation: PhysicalDerivation | None = None


def _parse_eps(raw) -> complex:
    if isinstance(raw, (int, float)):
        return complex(raw)
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return complex(float(raw[0]), float(raw[1]))
    if isinstance(raw, dict):
        keys = set(raw)
        if keys == {"Lambda", "theta"}:
            return intracavity_squeezing(float(raw["Lambda"]), math.radians(float(raw["theta"])))
        raise ConfigError(f"eps_a table must have keys Lambda and theta, got {sorted(keys)}")
    raise ConfigError(f"eps_a must be a number, an [re, im] pair or a Lambda/theta table, got {raw!r}")


def params_from_table(table: dict, mechanism: str = "CMI") -> SystemParams:
    """SystemParams from a ``[params]`` table (degrees and Hz converted here)."""
    table = dict(table)
    omega_c_hz = table.pop("omega_c_hz", 50e3)
    required = ("gamma_a", "gamma_m")
    missing = [k for k in required if k not in table]
    if missing:
        raise ConfigError(f"missing required params keys: {missing}")
    if "gamma_c" in table and "Q_c" in table:
        raise ConfigError("give exactly one of gamma_c or Q_c, not both")
    if "Q_c" in table:
        q = float(table.pop("Q_c"))
        if not q > 0.0:
            raise ConfigError(f"Q_c must be positive, got {q}")
        table["gamma_c"] = 1.0 / q
    if "gamma_c" not in table:
        raise ConfigError("missing required params key: gamma_c (or Q_c)")

    eps = _parse_eps(table.pop("eps_a", 0.0))
    phi_deg = float(table.pop("phi_s", math.degrees(_PARAM_DEFAULTS["phi_s"])))
    kwargs = {k: _PARAM_DEFAULTS[k] for k in _PARAM_DEFAULTS if k != "phi_s"}
    for key, value in table.items():
        if key in ("Delta_a", "Delta_m", "gamma_a", "gamma_m", "gamma_c", "nbar_m", "nbar_c", "J_ac", "J_mc", "J_am", "r_s"):
            kwargs[key] = float(value)
        else:
            raise ConfigError(f"unknown params key {key!r}")
    try:
        return SystemParams(
            omega_c=2.0 * math.pi * float(omega_c_hz),
            eps_a=eps,
            phi_s=math.radians(phi_deg),
            mechanism=Mechanism(mechanism),
            **kwargs,
        )
    except (DomainError, ValueError) as exc:
        raise ConfigError(f"invalid params: {exc}") from exc


def _constants_from(table: dict) -> PhysicalConstants:
    known = {
        "gyromagnetic_ratio",
        "vacuum_permeability",
        "spin_density",
        "ground_spin",
        "mass_density",
        "reduced_planck",
        "boltzmann",
    }
    unknown = set(table) - known
    if unknown:
        raise ConfigError(f"unknown constants keys {sorted(unknown)}")
    return PhysicalConstants(**{k: float(v) for k, v in table.items()})


def derive_physical(cfg: dict, params: SystemParams) -> tuple[SystemParams, PhysicalDerivation]:
    """Geometry -> couplings -> steady state -> effective J's.

    The steady solve runs in trap-frequency units with the drive amplitudes
    and G_amc normalized by omega_c; the returned params carry the resulting
    effective couplings.
    """
    phys = dict(cfg)
    missing = [k for k in ("sphere_diameter", "cavity_mode_volume", "wave_number", "omega_a_hz") if k not in phys]
    if missing:
        raise ConfigError(f"physical mode requires keys {missing}")
    constants = _constants_from(phys.pop("constants", {}))
    kx0 = float(phys.pop("kx0", math.pi / 2.0))
    omega_a = 2.0 * math.pi * float(phys.pop("omega_a_hz"))
    wave_number = float(phys.pop("wave_number"))
    geom = DeviceGeometry(
        sphere_diameter=float(phys.pop("sphere_diameter")),
        cavity_mode_volume=float(phys.pop("cavity_mode_volume")),
        wave_number=wave_number,
        equilibrium_position=kx0 / wave_number if wave_number else 0.0,
        trap_frequency=params.omega_c,
        bias_field=float(phys.pop("bias_field", 0.0)),
        drive_power=float(phys.pop("drive_power", 0.0)),
    )
    if phys:
        raise ConfigError(f"unknown physical keys {sorted(phys)}")

    g_am, g_amc, x_zpm = derive_couplings(constants, geom, omega_a)
    if abs(math.cos(kx0)) > 1e-3:
        warnings.warn(
            f"sphere sits off the field antinode (|cos kx0| = {abs(math.cos(kx0)):.3g}); "
            "the bare magnon-photon coupling is not suppressed and the "
            "linearized model drops it",
            stacklevel=2,
        )
    omega_d = omega_a - params.Delta_a * params.omega_c
    omega_drive_si, eps_m_si = drive_amplitudes(
        geom, params.gamma_a * params.omega_c, omega_d, constants
    )
    omega_drive = omega_drive_si / params.omega_c
    eps_m = eps_m_si / params.omega_c
    g_norm = -g_amc * math.sin(kx0) / params.omega_c

    steady = solve_cmi(params, omega_drive, eps_m, g_norm)
    j_ac, j_mc, j_am = effective_couplings(steady, g_norm)
    # flipping the sign of (J_ac, J_mc) together is a CM-mode redefinition, so
    # a negative G_amc is absorbed by the magnitudes; only the J_am sign is
    # physical, and dropping it matters only when J_am is non-negligible
    if j_am < -1e-3 * max(abs(j_ac), abs(j_mc), 1e-30):
        warnings.warn(
            f"derived cavity-magnon coupling is negative (J_am = {j_am:.3g}); "
            "the normalized parameters use its magnitude, which changes the "
            "interference; the signed amplitudes stay in the run record",
            stacklevel=2,
        )
    derived = params.replace(J_ac=abs(j_ac), J_mc=abs(j_mc), J_am=abs(j_am))
    record = PhysicalDerivation(g_am, g_amc, x_zpm, omega_drive, eps_m, g_norm, steady)
    return derived, record


def load_config(path, overrides=(), require_params: bool = True) -> RunConfig:
    """Parse a TOML run configuration and apply ``--set`` overrides."""
    raw = tomllib.loads(Path(path).read_text(encoding="utf-8")) if path else {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, text = item.split("=", 1)
        value = _parse_literal(text)
        target = raw
        parts = key.strip().split(".")
        if len(parts) == 1 and parts[0] not in ("mode", "mechanism"):
            parts = ["params", parts[0]]
        for part in parts[:-1]:
            target = target.setdefault(part, {})
        target[parts[-1]] = value
        # an override of one damping alias supersedes the other
        if parts[-2:] == ["params", "Q_c"]:
            target.pop("gamma_c", None)
        elif parts[-2:] == ["params", "gamma_c"]:
            target.pop("Q_c", None)
    return build_config(raw, require_params)


def _parse_literal(text: str):
    text = text.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    if text.startswith("["):
        items = text.strip("[]").split(",")
        return [float(i) for i in items if i.strip()]
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def build_config(raw: dict, require_params: bool = True) -> RunConfig:
    mode = raw.get("mode", "direct")
    if mode not in ("direct", "physical"):
        raise ConfigError(f"mode must be 'direct' or 'physical', got {mode!r}")
    mechanism = raw.get("mechanism", "CMI")
    if mechanism not in ("MCM", "CMI"):
        raise ConfigError(f"mechanism must be 'MCM' or 'CMI', got {mechanism!r}")

    commands = [name for name in COMMAND_SECTIONS if name in raw]
    if len(commands) > 1:
        raise ConfigError(f"config must carry at most one command payload, found {commands}")
    command = commands[0] if commands else None
    payload = dict(raw.get(command, {})) if command else {}

    if not require_params and "params" not in raw and mode == "direct":
        return RunConfig(mode, None, command, payload, None)
    params = params_from_table(raw.get("params", {}), mechanism)
    derivation = None
    if mode == "physical":
        if "physical" not in raw:
            raise ConfigError("physical mode requires a [physical] section")
        params, derivation = derive_physical(raw["physical"], params)
    elif "physical" in raw:
        raise ConfigError("direct mode forbids the [physical] geometry section")
    return RunConfig(mode, params, command, payload, derivation)
