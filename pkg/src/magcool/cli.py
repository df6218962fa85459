"""Command-line front end: subcommand dispatch, run records, data export.

Exit codes: 0 success, 1 domain/config error, 2 instability or runaway,
3 convergence failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import cooling, figures, spectra, sweeps
from .config import RunConfig, load_config
from .errors import ConfigError, MagcoolError
from .io import fmt17, params_hash, run_directory, write_csv, write_json
from .model import Mechanism
from .steady import build_drift, solve_cmi, solve_mcm, stability_report

_FORMATS = ("csv", "json", "both")


def _common_options(parser, suppress: bool):
    # attached to the root parser with real defaults and to every subparser
    # with SUPPRESS defaults, so the flags work on either side of the command
    d = (lambda _v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=d(None), help="TOML run configuration")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=d([]),
        metavar="KEY=VALUE",
        help="override a config key (bare keys address [params])",
    )
    parser.add_argument("--out", default=d("runs"), help="output directory root")
    parser.add_argument("--format", choices=_FORMATS, default=d("both"))
    parser.add_argument(
        "--threads",
        type=int,
        default=d(int(os.environ.get("MAGCOOL_THREADS", "1"))),
        help="worker threads for sweeps (env MAGCOOL_THREADS)",
    )


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magcool",
        description="Sideband-cooling simulator for a levitated micromagnet in a "
        "hybrid cavity-magnomechanical system",
    )
    _common_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _common_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=argparse.ArgumentParser)

    p = sub.add_parser("spectrum", parents=[common], help="force PSD over a frequency grid")
    p.add_argument("--omega-min", type=float, default=None)
    p.add_argument("--omega-max", type=float, default=None)
    p.add_argument("--n-points", type=int, default=None)
    p.add_argument("--weighting", choices=("separated", "lumped"), default=None)

    sub.add_parser("rates", parents=[common], help="cooling/heating rates and occupancy report")
    sub.add_parser("occupancy", parents=[common], help="steady occupancy at the configured point")

    p = sub.add_parser("dynamics", parents=[common], help="occupancy relaxation n_c(t)")
    p.add_argument("--n0", type=float, default=None, help="initial occupancy (default nbar_c)")
    p.add_argument("--t-min", type=float, default=None, help="first time (s)")
    p.add_argument("--t-max", type=float, default=None, help="last time (s)")
    p.add_argument("--n-times", type=int, default=None)
    p.add_argument("--t-scale", choices=("log", "linear"), default=None)
    p.add_argument("--method", choices=("rate_equation", "lyapunov"), default=None)

    p = sub.add_parser("threshold", parents=[common], help="quality-factor threshold for n_c = 1")
    p.add_argument("--bracket", type=float, nargs=2, default=None, metavar=("LO", "HI"),
                   help="log10 Q_c bracket")

    p = sub.add_parser("sweep", parents=[common], help="sweep one parameter")
    p.add_argument("--key", default=None)
    p.add_argument("--values", default=None, help="comma-separated explicit values")
    p.add_argument("--min", dest="vmin", type=float, default=None)
    p.add_argument("--max", dest="vmax", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--scale", choices=("linear", "log"), default=None)
    p.add_argument("--observables", default=None, help="comma-separated observable names")

    p = sub.add_parser("optimize", parents=[common], help="tune squeezing/couplings for cooling")
    p.add_argument("--free", default=None, help="comma-separated free parameters")
    p.add_argument("--objective", choices=sweeps.OBJECTIVES, default=None)

    p = sub.add_parser("fig", parents=[common], help="write a benchmark figure bundle")
    p.add_argument("fig_id", choices=figures.FIGURE_IDS)

    p = sub.add_parser("steady", parents=[common], help="classical steady state and stability")
    p.add_argument("--omega-drive", type=float, default=None, help="cavity drive (omega_c units)")
    p.add_argument("--eps-m", type=float, default=None, help="magnon drive (omega_c units)")
    p.add_argument("--g-amc", type=float, default=None, help="three-mode coupling (omega_c units)")

    sub.add_parser("validate", parents=[common], help="run the cross-module oracle suite")
    return parser


def _payload(cfg: RunConfig, command: str, args: argparse.Namespace, keys: dict) -> dict:
    if cfg.command is not None and cfg.command != command:
        raise ConfigError(
            f"config carries a [{cfg.command}] payload but the {command!r} command was invoked; "
            "exactly one command payload per invocation"
        )
    payload = dict(cfg.payload)
    for name, default in keys.items():
        flag = getattr(args, name, None)
        if flag is not None:
            payload[name] = flag
        payload.setdefault(name, default)
    return payload


def _emit(outdir, name, fmt, header=None, rows=None, record=None):
    written = []
    if rows is not None and fmt in ("csv", "both"):
        written.append(write_csv(outdir / f"{name}.csv", header, rows))
    if record is not None and fmt in ("json", "both"):
        written.append(write_json(outdir / f"{name}.json", record))
    return written


def _report_record(report: cooling.CoolingReport) -> dict:
    return {
        "mechanism": report.mechanism,
        "Gamma_minus": report.Gamma_minus,
        "Gamma_plus": report.Gamma_plus,
        "Gamma_net": report.Gamma_net,
        "n_c": report.n_c,
        "stable": report.stable,
        "params_hash": report.params_hash,
    }


def _cmd_spectrum(cfg, args, outdir, fmt):
    payload = _payload(cfg, "spectrum", args, {
        "omega_min": -3.0, "omega_max": 3.0, "n_points": 2001, "weighting": "separated",
    })
    result = spectra.psd_grid(
        cfg.params,
        float(payload["omega_min"]),
        float(payload["omega_max"]),
        int(payload["n_points"]),
        payload["weighting"],
    )
    rows = list(zip(result.frequencies.tolist(), result.values.tolist()))
    record = {
        "mechanism": result.mechanism,
        "params": cfg.params.snapshot(),
        "params_hash": result.params_hash,
        "payload": payload,
    }
    _emit(outdir, "spectrum", fmt, ["omega_over_wc", "S_F"], rows, record)
    print(f"spectrum: {len(rows)} points, S_F(+1) ~ {spectra.psd_general(cfg.params, 1.0):.6g}"
          if cfg.params.mechanism is Mechanism.CMI
          else f"spectrum: {len(rows)} points (MCM closed form)")
    print(f"wrote {outdir}")
    return 0


def _cmd_rates(cfg, args, outdir, fmt):
    _payload(cfg, "rates", args, {})
    report = cooling.cooling_report(cfg.params)
    record = _report_record(report) | {"params": cfg.params.snapshot()}
    header = list(_report_record(report))
    _emit(outdir, "rates", fmt, header, [list(_report_record(report).values())], record)
    print(
        f"Gamma_minus = {report.Gamma_minus:.6g}, Gamma_plus = {report.Gamma_plus:.6g}, "
        f"Gamma_net = {report.Gamma_net:.6g} (omega_c units); n_c = {report.n_c:.6g}"
    )
    return 0


def _cmd_occupancy(cfg, args, outdir, fmt):
    _payload(cfg, "occupancy", args, {})
    gm, gp = cooling.rates(cfg.params)
    n_c = cooling.steady_occupancy(cfg.params, gm, gp)
    record = {"n_c": n_c, "Gamma_minus": gm, "Gamma_plus": gp, "params": cfg.params.snapshot()}
    _emit(outdir, "occupancy", fmt, ["n_c"], [[n_c]], record)
    print(f"n_c = {n_c:.6g}")
    return 0


def _cmd_dynamics(cfg, args, outdir, fmt):
    payload = _payload(cfg, "dynamics", args, {
        "n0": cfg.params.nbar_c, "t_min": 1e-6, "t_max": 1.0, "n_times": 241,
        "t_scale": "log", "method": "rate_equation",
    })
    if payload["t_scale"] == "log":
        times = np.logspace(
            math.log10(float(payload["t_min"])), math.log10(float(payload["t_max"])),
            int(payload["n_times"]),
        )
    else:
        times = np.linspace(float(payload["t_min"]), float(payload["t_max"]), int(payload["n_times"]))
    traj = cooling.occupancy_dynamics(
        cfg.params, float(payload["n0"]), times, "s", payload["method"]
    )
    rows = list(zip(traj.times_seconds.tolist(), traj.times_wc.tolist(), traj.occupancies.tolist()))
    record = {
        "method": traj.method,
        "n_infinity": traj.n_infinity,
        "params": cfg.params.snapshot(),
        "payload": payload,
    }
    _emit(outdir, "dynamics", fmt, ["t_seconds", "omega_c_t", "n_c"], rows, record)
    cross = cooling.crossing_time_seconds(cfg.params, float(payload["n0"]))
    print(f"n_c(t_max) = {traj.occupancies[-1]:.6g}; ground-state crossing: "
          + (f"{cross:.3e} s" if cross is not None else "never"))
    return 0


def _cmd_threshold(cfg, args, outdir, fmt):
    payload = _payload(cfg, "threshold", args, {"bracket": [2.0, 13.0]})
    result = cooling.qc_threshold(cfg.params, tuple(payload["bracket"]))
    record = {
        "Q_threshold": result.q_threshold,
        "bracket_log10": list(result.bracket),
        "iterations": result.iterations,
        "achieved": result.achieved,
        "params": cfg.params.snapshot(),
    }
    _emit(outdir, "threshold", fmt, ["Q_threshold"], [[result.q_threshold]], record)
    print(f"Q_c threshold (n_c = 1): {result.q_threshold:.4g}")
    return 0


def _cmd_sweep(cfg, args, outdir, fmt, threads):
    payload = _payload(cfg, "sweep", args, {
        "key": None, "values": None, "vmin": None, "vmax": None, "n": None,
        "scale": "linear", "observables": "Gamma_minus,Gamma_plus,Gamma_net,n_c",
    })
    if not payload["key"]:
        raise ConfigError("sweep requires a key (--key or [sweep] key)")
    observables = payload["observables"]
    if isinstance(observables, str):
        observables = tuple(s.strip() for s in observables.split(",") if s.strip())
    if payload["values"] is not None:
        values = payload["values"]
        if isinstance(values, str):
            values = [float(v) for v in values.split(",") if v.strip()]
        spec = sweeps.SweepSpec(payload["key"], tuple(values), cfg.params, observables)
    else:
        if payload["vmin"] is None or payload["vmax"] is None or payload["n"] is None:
            raise ConfigError("sweep requires either values or (min, max, n)")
        spec = sweeps.SweepSpec.from_range(
            payload["key"], float(payload["vmin"]), float(payload["vmax"]),
            int(payload["n"]), payload["scale"], cfg.params, observables,
        )
    table = sweeps.run_sweep(spec, threads)
    manifest = {
        "key": spec.key,
        "observables": list(spec.observables),
        "params": cfg.params.snapshot(),
        "params_hash": params_hash(cfg.params.snapshot()),
        "stability": [
            {"value": r.value, "stable": r.stable, "stable_full": r.stable_full}
            for r in table.rows
        ],
    }
    for obs in spec.observables:
        if obs == "S_F":
            rows = []
            for r in table.rows:
                if "S_F" in r.observables:
                    res = r.observables["S_F"]
                    rows += [
                        (r.value, w, s)
                        for w, s in zip(res.frequencies.tolist(), res.values.tolist())
                    ]
            write_csv(outdir / "sweep_S_F.csv", [spec.key, "omega_over_wc", "S_F"], rows)
        else:
            rows = [
                (r.value, r.observables[obs]) for r in table.rows if obs in r.observables
            ]
            write_csv(outdir / f"sweep_{obs}.csv", [spec.key, obs], rows)
    if fmt in ("json", "both"):
        write_json(outdir / "manifest.json", manifest)
    evaluated = sum(1 for r in table.rows if r.observables)
    print(f"sweep over {spec.key}: {len(table.rows)} points, {evaluated} with observables")
    print(f"wrote {outdir}")
    return 0


def _cmd_optimize(cfg, args, outdir, fmt):
    payload = _payload(cfg, "optimize", args, {"free": "r_s,phi_s", "objective": "n_c"})
    free = payload["free"]
    if isinstance(free, str):
        free = tuple(s.strip() for s in free.split(",") if s.strip())
    result = sweeps.optimize_interference(cfg.params, free, payload["objective"])
    record = {
        "objective": result.objective,
        "objective_value": result.objective_value,
        "optimal_values": result.optimal_values,
        "converged": result.converged,
        "evaluations": result.evaluations,
        "optimal_params": result.optimal.snapshot(),
        "base_params": cfg.params.snapshot(),
    }
    _emit(outdir, "optimize", fmt, record=record)
    print(f"optimized {result.objective}: {result.objective_value:.6g} "
          f"({result.evaluations} evaluations, converged={result.converged})")
    for name, value in result.optimal_values.items():
        print(f"  {name} = {value:.6g}")
    return 0


def _cmd_fig(cfg, args, outdir_root):
    bundle_dir = outdir_root / args.fig_id
    manifest = figures.reproduce_figure(args.fig_id, bundle_dir)
    print(f"wrote {args.fig_id} bundle ({len(manifest['panels'])} panels) to {bundle_dir}")
    return 0


def _cmd_steady(cfg, args, outdir, fmt):
    payload = _payload(cfg, "steady", args, {"omega_drive": None, "eps_m": None, "g_amc": None})
    if cfg.derivation is not None:
        derived = cfg.derivation
        steady = derived.steady
        record = {"physical": derived.snapshot()}
    else:
        if payload["omega_drive"] is None:
            raise ConfigError(
                "steady in direct mode requires --omega-drive (and optionally --eps-m, --g-amc)"
            )
        omega_drive = float(payload["omega_drive"])
        if cfg.params.mechanism is Mechanism.MCM:
            steady = solve_mcm(cfg.params, omega_drive)
        else:
            steady = solve_cmi(
                cfg.params,
                omega_drive,
                float(payload["eps_m"] or 0.0),
                float(payload["g_amc"] or 0.0),
            )
        record = {}
    report = stability_report(build_drift(cfg.params, include_cm=True))
    record.update(
        {
            "a0_re": fmt17(steady.a0.real),
            "a0_im": fmt17(steady.a0.imag),
            "m0_re": fmt17(steady.m0.real),
            "m0_im": fmt17(steady.m0.imag),
            "c0_re": fmt17(steady.c0.real),
            "c0_im": fmt17(steady.c0.imag),
            "residual": fmt17(steady.residual),
            "iterations": steady.iterations,
            "multistable": steady.multistable,
            "stable": report.stable,
            "stability_margin": fmt17(report.margin),
            "eigenvalue_real_parts": [fmt17(x) for x in report.eigenvalue_real_parts],
            "params": cfg.params.snapshot(),
        }
    )
    _emit(outdir, "steady", fmt, record=record)
    print(f"a0 = {steady.a0:.6g}, m0 = {steady.m0:.6g}, c0 = {steady.c0:.6g} "
          f"(residual {steady.residual:.2e}, stable={report.stable})")
    return 0


def _cmd_validate(cfg, args, outdir, fmt):
    from .validate import run_validation

    results = run_validation(cfg.params)
    width = max(len(name) for name, _, _ in results)
    failed = 0
    for name, ok, detail in results:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
        failed += 0 if ok else 1
    record = [{"check": n, "passed": ok, "detail": d} for n, ok, d in results]
    _emit(outdir, "validate", fmt, record={"results": record})
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        needs_params = args.command not in ("fig", "validate")
        cfg = load_config(args.config, args.overrides, require_params=needs_params)
        if args.command == "fig":
            from pathlib import Path

            return _cmd_fig(cfg, args, Path(args.out))
        snapshot = cfg.params.snapshot() if cfg.params is not None else {}
        outdir = run_directory(args.out, snapshot | {"command": args.command})
        handlers = {
            "spectrum": lambda: _cmd_spectrum(cfg, args, outdir, args.format),
            "rates": lambda: _cmd_rates(cfg, args, outdir, args.format),
            "occupancy": lambda: _cmd_occupancy(cfg, args, outdir, args.format),
            "dynamics": lambda: _cmd_dynamics(cfg, args, outdir, args.format),
            "threshold": lambda: _cmd_threshold(cfg, args, outdir, args.format),
            "sweep": lambda: _cmd_sweep(cfg, args, outdir, args.format, max(1, args.threads)),
            "optimize": lambda: _cmd_optimize(cfg, args, outdir, args.format),
            "steady": lambda: _cmd_steady(cfg, args, outdir, args.format),
            "validate": lambda: _cmd_validate(cfg, args, outdir, args.format),
        }
        return handlers[args.command]()
    except MagcoolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
