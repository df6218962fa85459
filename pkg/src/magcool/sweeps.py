"""Parameter sweeps and derivative-free interference optimization."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize as _opt

from .cooling import qc_threshold, rates, steady_occupancy
from .errors import (
    BracketError,
    DomainError,
    InstabilityError,
    RunawayError,
    SingularityError,
)
from .model import SWEEPABLE_KEYS, SystemParams
from .spectra import psd_general, psd_grid
from .steady import build_drift, stability_report

SCALAR_OBSERVABLES = ("Gamma_minus", "Gamma_plus", "Gamma_net", "n_c", "threshold")
ALL_OBSERVABLES = SCALAR_OBSERVABLES + ("S_F",)


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter, its values, the base point and the observables."""

    key: str
    values: tuple
    base: SystemParams
    observables: tuple = ("Gamma_minus", "Gamma_plus", "Gamma_net", "n_c")
    grid: tuple = (-3.0, 3.0, 2001)
    threshold_bracket: tuple = (2.0, 13.0)

    def __post_init__(self):
        if self.key not in SWEEPABLE_KEYS:
            raise DomainError(f"unknown sweep key {self.key!r}; valid keys: {SWEEPABLE_KEYS}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise DomainError("sweep values must be nonempty")
        if any(b < a for a, b in zip(values, values[1:])):
            raise DomainError("sweep values must be sorted ascending")
        object.__setattr__(self, "values", values)
        obs = tuple(self.observables)
        unknown = [o for o in obs if o not in ALL_OBSERVABLES]
        if unknown:
            raise DomainError(f"unknown observables {unknown}; valid: {ALL_OBSERVABLES}")
        object.__setattr__(self, "observables", obs)

    @classmethod
    def from_range(
        cls, key, lo, hi, n, scale="linear", base=None, observables=None, **kwargs
    ) -> "SweepSpec":
        if n < 1:
            raise DomainError(f"sweep needs at least one point, got n={n}")
        if scale == "linear":
            values = np.linspace(lo, hi, int(n))
        elif scale == "log":
            if not 0.0 < lo < hi:
                raise DomainError(f"log sweep needs 0 < lo < hi, got [{lo}, {hi}]")
            values = np.logspace(math.log10(lo), math.log10(hi), int(n))
        else:
            raise DomainError(f"scale must be 'linear' or 'log', got {scale!r}")
        if observables is None:
            return cls(key, tuple(values), base, **kwargs)
        return cls(key, tuple(values), base, tuple(observables), **kwargs)


@dataclass(frozen=True)
class SweepRow:
    value: float
    stable: bool
    stable_full: bool
    observables: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepTable:
    spec: SweepSpec
    rows: tuple


def evaluate_point(base: SystemParams, key: str, value: float, observables, spec: SweepSpec | None = None) -> SweepRow:
    """One sweep row: stability flags plus whichever observables are defined.

    Unstable fluctuation dynamics yields a flagged row with no observables;
    a runaway occupancy leaves only n_c (and threshold) unset.
    """
    params = base.replace(**{key: value})
    stable = stability_report(build_drift(params, include_cm=False)).stable
    stable_full = stability_report(build_drift(params, include_cm=True)).stable
    out = {}
    if stable:
        wants_rates = any(
            o in observables for o in ("Gamma_minus", "Gamma_plus", "Gamma_net", "n_c", "threshold")
        )
        if wants_rates:
            gm, gp = rates(params)
            if "Gamma_minus" in observables:
                out["Gamma_minus"] = gm
            if "Gamma_plus" in observables:
                out["Gamma_plus"] = gp
            if "Gamma_net" in observables:
                out["Gamma_net"] = gm - gp
            if "n_c" in observables:
                try:
                    out["n_c"] = steady_occupancy(params, gm, gp)
                except RunawayError:
                    pass
            if "threshold" in observables:
                bracket = spec.threshold_bracket if spec is not None else (2.0, 13.0)
                try:
                    out["threshold"] = qc_threshold(params, bracket).q_threshold
                except (BracketError, RunawayError):
                    pass
        if "S_F" in observables:
            grid = spec.grid if spec is not None else (-3.0, 3.0, 2001)
            out["S_F"] = psd_grid(params, *grid)
    return SweepRow(float(value), stable, stable_full, out)


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepTable:
    """Evaluate every swept value; output order always follows spec.values."""
    work = [(spec.base, spec.key, v, spec.observables, spec) for v in spec.values]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda args: evaluate_point(*args), work))
    else:
        rows = [evaluate_point(*args) for args in work]
    return SweepTable(spec, tuple(rows))


_OPT_BOUNDS = {"r_s": (0.0, 3.0), "phi_s": (0.0, 2.0 * math.pi), "J_ac": (0.0, 1.0), "J_mc": (0.0, 1.0), "J_am": (0.0, 1.0)}
FREE_PARAMETERS = ("r_s", "phi_s", "eps_a", "J_ac", "J_mc", "J_am")
OBJECTIVES = ("n_c", "rate_ratio", "stokes_psd")


@dataclass(frozen=True)
class OptimizationResult:
    optimal: SystemParams
    optimal_values: dict
    objective: str
    objective_value: float
    trace: tuple
    converged: bool
    evaluations: int


def _objective_fn(objective: str):
    if objective == "n_c":

        def fn(params):
            gm, gp = rates(params)
            return steady_occupancy(params, gm, gp)

    elif objective == "rate_ratio":

        def fn(params):
            gm, gp = rates(params)
            if gm <= 0.0:
                return math.inf
            return gp / gm

    elif objective == "stokes_psd":

        def fn(params):
            return abs(psd_general(params, -1.0))

    else:
        raise DomainError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
    return fn


def optimize_interference(
    base: SystemParams,
    free,
    objective: str = "n_c",
    max_evaluations: int = 2000,
    grid_points: int = 7,
) -> OptimizationResult:
    """Tune squeezing/drive settings for maximal interference-enhanced cooling.

    Two stages: a coarse grid over the free parameters (grid_points per
    dimension) followed by Nelder-Mead refinement from the best candidate.
    Unstable or bound-violating candidates score +inf, so the optimum always
    satisfies the stability gate; the base point itself is always a
    candidate, so the result is never worse than the start.
    """
    free = tuple(free)
    unknown = [f for f in free if f not in FREE_PARAMETERS]
    if unknown:
        raise DomainError(f"unknown free parameters {unknown}; valid: {FREE_PARAMETERS}")
    fn = _objective_fn(objective)
    eps_bound = 0.95 * abs(complex(base.gamma_a / 2.0, base.Delta_a)) / 2.0

    names = []
    bounds = []
    for f in free:
        if f == "eps_a":
            names += ["eps_a_re", "eps_a_im"]
            bounds += [(-eps_bound, eps_bound), (-eps_bound, eps_bound)]
        else:
            names.append(f)
            bounds.append(_OPT_BOUNDS[f])

    def to_params(x):
        kwargs = {}
        it = iter(range(len(names)))
        for i in it:
            name = names[i]
            if name == "eps_a_re":
                kwargs["eps_a"] = complex(x[i], x[i + 1])
                next(it)
            else:
                kwargs[name] = float(x[i])
        return base.replace(**kwargs)

    count = [0]
    trace = []

    def score(x):
        count[0] += 1
        for xi, (lo, hi) in zip(x, bounds):
            if not lo <= xi <= hi:
                return math.inf
        try:
            params = to_params(x)
            if abs(params.eps_a) > eps_bound + 1e-15:
                return math.inf
            value = fn(params)
        except (InstabilityError, RunawayError, SingularityError, DomainError):
            return math.inf
        trace.append((count[0], float(value)))
        return value

    x_base = []
    for name in names:
        if name == "eps_a_re":
            x_base.append(base.eps_a.real)
        elif name == "eps_a_im":
            x_base.append(base.eps_a.imag)
        else:
            x_base.append(getattr(base, name))
    x_base = np.asarray(x_base, dtype=float)

    base_score = score(x_base) if names else fn(base)
    if not names:
        return OptimizationResult(base, {}, objective, float(base_score), (), True, 1)

    best_x, best = x_base, base_score
    axes = [np.linspace(lo, hi, grid_points) for lo, hi in bounds]
    for point in itertools.product(*axes):
        value = score(np.asarray(point))
        if value < best:
            best_x, best = np.asarray(point), value
    if not math.isfinite(best):
        raise InstabilityError(
            "interference optimization is infeasible: every coarse-grid candidate "
            "(and the base point) is unstable or undefined"
        )

    result = _opt.minimize(
        score,
        best_x,
        method="Nelder-Mead",
        options={
            "fatol": 1e-8,
            "xatol": 1e-8,
            "maxfev": max(1, max_evaluations - count[0]),
        },
    )
    if math.isfinite(result.fun) and result.fun < best:
        best_x, best = result.x, float(result.fun)

    optimal = to_params(best_x)
    values = dict(zip(names, (float(v) for v in best_x)))
    converged = bool(result.success) and best <= base_score
    return OptimizationResult(optimal, values, objective, float(best), tuple(trace), converged, count[0])
