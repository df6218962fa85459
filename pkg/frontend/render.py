#!/usr/bin/env python3
"""Render publication-style panels from a magcool figure bundle.

Reads only the bundle directory written by ``magcool fig <id>`` (manifest
plus per-panel CSV datasets) and draws one image per panel.  No numerical
computation happens here; axis scales, labels and the ground-state guide
line all come from the manifest.

Usage: render.py <bundle_dir> <fig_id> [--format png|svg] [--dpi N]
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class BundleError(Exception):
    """The bundle is missing files or carries unusable data."""


@dataclass(frozen=True)
class Series:
    label: str
    csv: Path
    columns: list
    x: list
    y: list


@dataclass(frozen=True)
class Panel:
    panel_id: str
    xlabel: str
    ylabel: str
    xscale: str
    yscale: str
    guide_level: float | None
    series: list


@dataclass(frozen=True)
class FigureBundle:
    figure: str
    manifest_path: Path
    panels: list


def _read_csv(path: Path, expected_columns) -> tuple[list, list]:
    lines = [ln for ln in path.read_text(encoding="utf-8").split("\n") if ln]
    header = lines[0].split(",")
    if header != list(expected_columns):
        raise BundleError(
            f"{path.name}: header {header} does not match declared columns {expected_columns}"
        )
    xs, ys = [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        xs.append(float(cells[0]))
        ys.append(float(cells[-1]))
    if not xs:
        raise BundleError(f"{path.name}: no data rows")
    return xs, ys


def load_bundle(bundle_dir, fig_id: str) -> FigureBundle:
    """Parse and fully validate a bundle before any rendering starts."""
    bundle_dir = Path(bundle_dir)
    manifest_path = bundle_dir / "manifest.json"
    if not manifest_path.exists():
        raise BundleError(f"no manifest.json in {bundle_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("figure") != fig_id:
        raise BundleError(
            f"bundle at {bundle_dir} holds {manifest.get('figure')!r}, not {fig_id!r}"
        )

    missing = []
    for panel in manifest["panels"].values():
        for series in panel["series"]:
            if not (bundle_dir / series["csv"]).exists():
                missing.append(series["csv"])
    if missing:
        raise BundleError(f"bundle is missing expected CSV files: {missing}")

    panels = []
    for panel_id, spec in sorted(manifest["panels"].items()):
        series = []
        for entry in spec["series"]:
            csv_path = bundle_dir / entry["csv"]
            xs, ys = _read_csv(csv_path, entry["columns"])
            series.append(Series(entry["label"], csv_path, list(entry["columns"]), xs, ys))
        panels.append(
            Panel(
                panel_id,
                spec.get("xlabel", ""),
                spec.get("ylabel", ""),
                spec.get("xscale", "linear"),
                spec.get("yscale", "linear"),
                spec.get("guide_level"),
                series,
            )
        )
    return FigureBundle(fig_id, manifest_path, panels)


def render(bundle_dir, fig_id: str, image_format: str = "png", dpi: int = 150) -> list:
    """Draw one image per panel into the bundle directory; returns the paths.

    The bundle is validated up front, so a broken series never leaves a
    partial image behind.  Repeated renders overwrite the same files.
    """
    bundle = load_bundle(bundle_dir, fig_id)
    out_paths = []
    for panel in bundle.panels:
        fig, ax = plt.subplots(figsize=(4.4, 3.3))
        for series in panel.series:
            line, = ax.plot(series.x, series.y, lw=1.4, label=series.label)
            if len(line.get_xdata()) != len(series.x):
                raise BundleError(f"{series.csv.name}: plotted point count mismatch")
        if panel.guide_level is not None:
            ax.axhline(panel.guide_level, color="0.4", lw=0.8, ls="--")
        ax.set_xscale(panel.xscale)
        ax.set_yscale(panel.yscale)
        ax.set_xlabel(panel.xlabel)
        ax.set_ylabel(panel.ylabel)
        ax.set_title(f"{bundle.figure} ({panel.panel_id})")
        if len(panel.series) > 1:
            ax.legend(fontsize=7)
        fig.tight_layout()
        path = Path(bundle_dir) / f"{bundle.figure}_{panel.panel_id}.{image_format}"
        fig.savefig(path, dpi=dpi)
        plt.close(fig)
        out_paths.append(path)
    return out_paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("bundle_dir")
    parser.add_argument("fig_id")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        paths = render(args.bundle_dir, args.fig_id, args.format, args.dpi)
    except BundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
