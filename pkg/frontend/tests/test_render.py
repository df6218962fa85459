"""Renderer tests: bundles come from the magcool CLI, the external interface."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from render import BundleError, load_bundle, main, render  # noqa: E402

FIGURE_IDS = ("fig2", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig6a", "fig6b", "fig6c")


@pytest.fixture(scope="session")
def bundles(tmp_path_factory):
    root = tmp_path_factory.mktemp("bundles")
    for fig_id in FIGURE_IDS:
        subprocess.run(
            [sys.executable, "-m", "magcool.cli", "fig", fig_id, "--out", str(root)],
            check=True,
            capture_output=True,
        )
    return root


def _csv_row_count(path):
    return len([ln for ln in path.read_text().split("\n") if ln]) - 1


@pytest.mark.parametrize("fig_id", FIGURE_IDS)
def test_render_every_bundle(bundles, fig_id):
    bundle_dir = bundles / fig_id
    images = render(bundle_dir, fig_id)
    manifest = json.loads((bundle_dir / "manifest.json").read_text())
    assert len(images) == len(manifest["panels"])
    for image in images:
        assert image.exists() and image.stat().st_size > 0


def test_series_point_counts_match_csv_rows(bundles):
    bundle_dir = bundles / "fig2"
    bundle = load_bundle(bundle_dir, "fig2")
    for panel in bundle.panels:
        for series in panel.series:
            assert len(series.x) == _csv_row_count(series.csv)


def test_fig2_has_six_panels(bundles):
    bundle = load_bundle(bundles / "fig2", "fig2")
    assert [p.panel_id for p in bundle.panels] == ["a", "b", "c", "d", "e", "f"]


def test_fig4b_curves_and_guide(bundles):
    bundle = load_bundle(bundles / "fig4b", "fig4b")
    (panel,) = bundle.panels
    assert len(panel.series) == 4
    assert panel.guide_level == 1.0
    assert panel.xscale == "log"


def test_missing_csv_lists_expected_names(bundles, tmp_path):
    import shutil

    broken = tmp_path / "fig6b"
    shutil.copytree(bundles / "fig6b", broken)
    for stale in list(broken.glob("*.png")) + list(broken.glob("*.svg")):
        stale.unlink()
    victim = next(broken.glob("*.csv"))
    victim.unlink()
    with pytest.raises(BundleError, match=victim.name):
        render(broken, "fig6b")
    assert not list(broken.glob("*.png"))


def test_empty_csv_rejected_without_partial_image(bundles, tmp_path):
    import shutil

    broken = tmp_path / "fig3"
    shutil.copytree(bundles / "fig3", broken)
    for stale in list(broken.glob("*.png")) + list(broken.glob("*.svg")):
        stale.unlink()
    victim = sorted(broken.glob("fig3b_*.csv"))[0]
    header = victim.read_text().split("\n")[0]
    victim.write_text(header + "\n")
    with pytest.raises(BundleError, match="no data rows"):
        render(broken, "fig3")
    assert not list(broken.glob("*.png"))


def test_wrong_figure_id_rejected(bundles):
    with pytest.raises(BundleError, match="fig2"):
        render(bundles / "fig2", "fig3")


def test_rendering_is_idempotent(bundles, tmp_path):
    import shutil

    work = tmp_path / "fig6c"
    shutil.copytree(bundles / "fig6c", work)
    first = render(work, "fig6c")
    csv_bytes = {p: p.read_bytes() for p in work.glob("*.csv")}
    second = render(work, "fig6c")
    assert [p.name for p in first] == [p.name for p in second]
    for path, blob in csv_bytes.items():
        assert path.read_bytes() == blob  # rendering is read-only over the data


def test_cli_entry_point(bundles, capsys):
    code = main([str(bundles / "fig6b"), "fig6b", "--format", "svg"])
    assert code == 0
    out = capsys.readouterr().out
    assert "fig6b_b.svg" in out
    code = main([str(bundles / "fig6b"), "wrong-id"])
    assert code == 1
