"""Benchmark figure presets and dataset bundles.

Each bundle reproduces one figure of the reference benchmark set: per-panel
CSV files plus a manifest recording the preset values, their sources, axis
metadata and stability flags.  The bath occupancy nbar_c is not part of the
quoted presets; it is the fitted anchor 1.87e5 obtained by inverting the
occupancy formula against the quoted steady occupancies of both mechanisms,
and is marked as such in every manifest.
"""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np

from .cooling import occupancy_dynamics, qc_threshold
from .errors import BracketError, DomainError, RunawayError
from .io import params_hash, write_csv, write_json
from .model import Mechanism, SystemParams
from .spectra import psd_grid
from .sweeps import SweepSpec, run_sweep

OMEGA_C_SI = 2.0 * math.pi * 50e3
NBAR_C_ANCHOR = 1.87e5

FIG2_CMI = SystemParams(
    omega_c=OMEGA_C_SI,
    Delta_a=1.0,
    Delta_m=1.0,
    gamma_a=8.0 / 3.0,
    gamma_m=2.0,
    gamma_c=1e-7,
    nbar_m=0.31,
    nbar_c=NBAR_C_ANCHOR,
    J_ac=0.09,
    J_mc=0.05,
    J_am=0.03,
    eps_a=0.575 - 0.142j,
    r_s=2.0,
    phi_s=math.radians(94.0),
    mechanism=Mechanism.CMI,
)
FIG2_MCM = FIG2_CMI.as_mcm()

# optimal detunings for the cooling-dynamics panel
_D4A = math.sqrt((8.0 / 3.0) ** 2 + 4.0) / 2.0
_D4M = math.sqrt(2.0**2 + 4.0) / 2.0
FIG4A_CMI = FIG2_CMI.replace(Delta_a=_D4A, Delta_m=_D4M, J_ac=0.3, J_mc=0.025)
FIG4A_MCM = FIG4A_CMI.as_mcm()

FIG5A = FIG2_CMI.replace(r_s=2.6, J_mc=0.09, J_am=0.05)
FIG5B = FIG2_CMI.replace(r_s=2.6, J_ac=0.2, J_am=0.05)
FIG5C = FIG2_CMI.replace(r_s=2.6, J_ac=0.2, J_mc=0.09)
FIG6_BASE = FIG2_CMI.replace(r_s=2.6, gamma_c=1e-5)

FIGURE_IDS = ("fig2", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig6a", "fig6b", "fig6c")

_SOURCES = {
    "nbar_c": "fitted anchor: occupancy formula inverted against both quoted steady occupancies",
    "omega_c": "benchmark preset (trap frequency 2*pi*50 kHz)",
    "default": "benchmark preset",
}


def _spectrum_file(params, name):
    result = psd_grid(params, -3.0, 3.0, 2001)
    rows = list(zip(result.frequencies.tolist(), result.values.tolist()))
    return name, ["omega_over_wc", "S_F"], rows


def _sweep_series(base, key, values, observable, name):
    spec = SweepSpec(key, tuple(values), base, (observable,))
    table = run_sweep(spec)
    rows = [
        (row.value, row.observables[observable])
        for row in table.rows
        if observable in row.observables
    ]
    flagged = [row.value for row in table.rows if not row.stable]
    missing = [
        row.value for row in table.rows if row.stable and observable not in row.observables
    ]
    return (name, [key, observable], rows), flagged, missing


def _trajectory_file(params, n_0, name, t_grid):
    traj = occupancy_dynamics(params, n_0, t_grid, time_unit="s", method="rate_equation")
    rows = list(zip(traj.times_seconds.tolist(), traj.occupancies.tolist()))
    return name, ["t_seconds", "n_c"], rows


def _panel(xlabel, ylabel, series, xscale="linear", yscale="linear", guide_level=None):
    return {
        "xlabel": xlabel,
        "ylabel": ylabel,
        "xscale": xscale,
        "yscale": yscale,
        "guide_level": guide_level,
        "series": series,
    }


def _series_entry(label, csv_name, columns):
    return {"label": label, "csv": csv_name, "columns": list(columns)}


def _build_fig2():
    files, panels, notes = [], {}, []
    delta_grid = np.linspace(-3.0, 3.0, 601)

    for tag, base in (("mcm", FIG2_MCM), ("cmi", FIG2_CMI)):
        spec_panel = "a" if tag == "mcm" else "d"
        rate_panel = "b" if tag == "mcm" else "e"
        occ_panel = "c" if tag == "mcm" else "f"

        red = _spectrum_file(base.replace(Delta=1.0), f"fig2{spec_panel}_{tag}_red.csv")
        blue = _spectrum_file(base.replace(Delta=-1.0), f"fig2{spec_panel}_{tag}_blue.csv")
        files += [red, blue]
        panels[spec_panel] = _panel(
            "omega/omega_c",
            "S_F",
            [
                _series_entry(f"{tag.upper()} red sideband", red[0], red[1]),
                _series_entry(f"{tag.upper()} blue sideband", blue[0], blue[1]),
            ],
        )

        net, flagged, _ = _sweep_series(
            base, "Delta", delta_grid, "Gamma_net", f"fig2{rate_panel}_{tag}_gamma_net.csv"
        )
        files.append(net)
        if flagged:
            notes.append(f"fig2{rate_panel}: unstable at Delta in {flagged}")
        panels[rate_panel] = _panel(
            "Delta/omega_c",
            "Gamma_net",
            [_series_entry(f"{tag.upper()} net rate", net[0], net[1])],
        )

        occ, flagged, missing = _sweep_series(
            base, "Delta", delta_grid, "n_c", f"fig2{occ_panel}_{tag}_nc.csv"
        )
        files.append(occ)
        if missing:
            notes.append(
                f"fig2{occ_panel}: no steady occupancy (runaway) for {len(missing)} blue-side detunings"
            )
        panels[occ_panel] = _panel(
            "Delta/omega_c",
            "n_c",
            [_series_entry(f"{tag.upper()} occupancy", occ[0], occ[1])],
            yscale="log",
            guide_level=1.0,
        )
    return panels, files, notes


def _build_fig3():
    files, panels, notes = [], {}, []
    ga_grid = np.logspace(-1.0, 1.0, 121)
    gm_grid = np.logspace(-2.0, 1.0, 121)

    cmi_a, flagged, _ = _sweep_series(FIG2_CMI, "gamma_a", ga_grid, "n_c", "fig3a_cmi_nc.csv")
    files.append(cmi_a)
    if flagged:
        notes.append(
            f"fig3a: {len(flagged)} gamma_a points below the parametric-stability edge are flagged"
        )
    panels["a"] = _panel(
        "gamma_a/omega_c",
        "n_c",
        [_series_entry("CMI", cmi_a[0], cmi_a[1])],
        xscale="log",
        yscale="log",
        guide_level=1.0,
    )

    mcm_b, _, _ = _sweep_series(FIG2_MCM, "gamma_m", gm_grid, "n_c", "fig3b_mcm_nc.csv")
    cmi_b, _, _ = _sweep_series(FIG2_CMI, "gamma_m", gm_grid, "n_c", "fig3b_cmi_nc.csv")
    files += [mcm_b, cmi_b]
    panels["b"] = _panel(
        "gamma_m/omega_c",
        "n_c",
        [
            _series_entry("MCM", mcm_b[0], mcm_b[1]),
            _series_entry("CMI", cmi_b[0], cmi_b[1]),
        ],
        xscale="log",
        yscale="log",
        guide_level=1.0,
    )
    return panels, files, notes


def _build_fig4a():
    files, notes = [], []
    t_grid = np.logspace(-6.0, 0.0, 241)
    series = []
    for tag, base in (("mcm", FIG4A_MCM), ("cmi", FIG4A_CMI)):
        for q_label, q in (("5e7", 5e7), ("1e11", 1e11)):
            params = base.replace(Q_c=q)
            name = f"fig4a_{tag}_q{q_label}.csv"
            files.append(_trajectory_file(params, params.nbar_c, name, t_grid))
            series.append(_series_entry(f"{tag.upper()} Q_c={q_label}", name, ["t_seconds", "n_c"]))
    panels = {
        "a": _panel("t (s)", "n_c", series, xscale="log", yscale="log", guide_level=1.0)
    }
    return panels, files, notes


def _keep_series(files, series, notes, curve, label, context):
    """Register a curve unless it is empty (runaway/unstable everywhere)."""
    name, header, rows = curve
    if not rows:
        notes.append(f"{context}/{label}: dropped, no steady occupancy anywhere on the grid")
        return
    files.append(curve)
    series.append(_series_entry(label, name, header))


def _qc_family(base_list, q_grid, fig_name):
    """n_c vs Q_c curves plus a threshold table for a family of presets."""
    files, series, notes = [], [], []
    threshold_rows = []
    for label, params in base_list:
        name = f"{fig_name}_{label}_nc.csv"
        curve, flagged, _ = _sweep_series(params, "Q_c", q_grid, "n_c", name)
        _keep_series(files, series, notes, curve, label, fig_name)
        if flagged:
            notes.append(f"{fig_name}/{label}: unstable at Q_c in {flagged}")
        try:
            threshold_rows.append((label, qc_threshold(params).q_threshold))
        except (BracketError, RunawayError) as exc:
            notes.append(f"{fig_name}/{label}: no ground-state threshold in bracket ({exc})")
    if threshold_rows:
        files.append((f"{fig_name}_thresholds.csv", ["series", "Q_threshold"], threshold_rows))
    return files, series, notes


def _build_fig4b():
    q_grid = np.logspace(3.0, 12.0, 181)
    family = [("mcm", FIG2_MCM)] + [
        (f"cmi_rs{r:.1f}", FIG2_CMI.replace(r_s=r)) for r in (1.6, 2.0, 2.6)
    ]
    files, series, notes = _qc_family(family, q_grid, "fig4b")
    panels = {
        "b": _panel("Q_c", "n_c", series, xscale="log", yscale="log", guide_level=1.0)
    }
    return panels, files, notes


def _build_fig5(panel: str):
    q_grid = np.logspace(3.0, 12.0, 181)
    if panel == "a":
        base, key, values = FIG5A, "J_ac", (0.01, 0.03, 0.06, 0.09, 0.2)
    elif panel == "b":
        base, key, values = FIG5B, "J_mc", (0.01, 0.05, 0.1)
    else:
        base, key, values = FIG5C, "J_am", (0.01, 0.05, 0.1)
    family = [(f"{key}{v:g}", base.replace(**{key: v})) for v in values]
    files, series, notes = _qc_family(family, q_grid, f"fig5{panel}")
    panels = {
        panel: _panel("Q_c", "n_c", series, xscale="log", yscale="log", guide_level=1.0)
    }
    return panels, files, notes


def _build_fig6(panel: str):
    files, notes = [], []
    series = []
    if panel == "a":
        grid = np.logspace(-3.0, 1.0, 181)
        mcm, _, _ = _sweep_series(FIG6_BASE.as_mcm(), "J_mc", grid, "n_c", "fig6a_mcm_nc.csv")
        cmi, _, _ = _sweep_series(FIG6_BASE, "J_mc", grid, "n_c", "fig6a_cmi_nc.csv")
        _keep_series(files, series, notes, mcm, "MCM", "fig6a")
        _keep_series(files, series, notes, cmi, "CMI", "fig6a")
        panels = {
            "a": _panel("J_mc/omega_c", "n_c", series, xscale="log", yscale="log", guide_level=1.0)
        }
    elif panel == "b":
        grid = np.linspace(0.0, 0.1, 101)
        cmi, _, _ = _sweep_series(FIG6_BASE.replace(J_mc=0.05), "J_am", grid, "n_c", "fig6b_cmi_nc.csv")
        _keep_series(files, series, notes, cmi, "CMI", "fig6b")
        panels = {
            "b": _panel("J_am/omega_c", "n_c", series, yscale="log", guide_level=1.0)
        }
    else:
        grid = np.logspace(-2.0, 0.0, 121)
        cmi, _, _ = _sweep_series(
            FIG6_BASE.replace(J_mc=0.05, J_am=0.03), "J_ac", grid, "n_c", "fig6c_cmi_nc.csv"
        )
        _keep_series(files, series, notes, cmi, "CMI", "fig6c")
        panels = {
            "c": _panel("J_ac/omega_c", "n_c", series, xscale="log", yscale="log", guide_level=1.0)
        }
    return panels, files, notes


_BUILDERS = {
    "fig2": _build_fig2,
    "fig3": _build_fig3,
    "fig4a": _build_fig4a,
    "fig4b": _build_fig4b,
    "fig5a": lambda: _build_fig5("a"),
    "fig5b": lambda: _build_fig5("b"),
    "fig5c": lambda: _build_fig5("c"),
    "fig6a": lambda: _build_fig6("a"),
    "fig6b": lambda: _build_fig6("b"),
    "fig6c": lambda: _build_fig6("c"),
}

_PRESET_OF = {
    "fig2": FIG2_CMI,
    "fig3": FIG2_CMI,
    "fig4a": FIG4A_CMI,
    "fig4b": FIG2_CMI,
    "fig5a": FIG5A,
    "fig5b": FIG5B,
    "fig5c": FIG5C,
    "fig6a": FIG6_BASE,
    "fig6b": FIG6_BASE,
    "fig6c": FIG6_BASE,
}


def _preset_config_text(params: SystemParams) -> str:
    """Replicate a preset as a loadable run configuration (angles in degrees)."""
    lines = [
        'mode = "direct"',
        f'mechanism = "{params.mechanism.value}"',
        "",
        "[params]",
        f"omega_c_hz = {params.omega_c / (2.0 * math.pi)!r}",
    ]
    for key in ("Delta_a", "Delta_m", "gamma_a", "gamma_m", "gamma_c",
                "nbar_m", "nbar_c", "J_ac", "J_mc", "J_am", "r_s"):
        lines.append(f"{key} = {getattr(params, key)!r}")
    lines.append(f"phi_s = {math.degrees(params.phi_s)!r}")
    lines.append(f"eps_a = [{params.eps_a.real!r}, {params.eps_a.imag!r}]")
    return "\n".join(lines) + "\n"


def reproduce_figure(fig_id: str, outdir) -> dict:
    """Write one figure bundle (CSV datasets plus manifest); returns the manifest."""
    if fig_id not in _BUILDERS:
        raise DomainError(f"unknown figure id {fig_id!r}; valid ids: {FIGURE_IDS}")
    panels, files, notes = _BUILDERS[fig_id]()
    outdir = Path(outdir)
    for name, header, rows in files:
        write_csv(outdir / name, header, rows)
    preset = _PRESET_OF[fig_id].snapshot()
    sources = {key: _SOURCES.get(key, _SOURCES["default"]) for key in preset}
    manifest = {
        "figure": fig_id,
        "params_hash": params_hash(preset),
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "preset": preset,
        "sources": sources,
        "notes": notes,
        "panels": panels,
    }
    write_json(outdir / "manifest.json", manifest)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.toml").write_text(
        _preset_config_text(_PRESET_OF[fig_id]), encoding="utf-8", newline="\n"
    )
    return manifest
