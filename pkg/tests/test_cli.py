import json
import math

import pytest

from magcool.cli import main
from magcool.config import build_config, load_config, params_from_table
from magcool.errors import ConfigError
from magcool.io import read_csv
from magcool.model import Mechanism

FIG2_TOML = """
mode = "direct"
mechanism = "CMI"

[params]
gamma_a = 2.6666666666666665
gamma_m = 2.0
gamma_c = 1e-7
nbar_m = 0.31
nbar_c = 1.87e5
J_ac = 0.09
J_mc = 0.05
J_am = 0.03
r_s = 2.0
phi_s = 94.0
eps_a = [0.575, -0.142]
"""

MCM_TOML = """
mode = "direct"
mechanism = "MCM"

[params]
gamma_a = 2.6666666666666665
gamma_m = 2.0
gamma_c = 1e-7
nbar_m = 0.31
nbar_c = 1.87e5
J_mc = 0.05
"""


@pytest.fixture
def fig2_config(tmp_path):
    path = tmp_path / "fig2.toml"
    path.write_text(FIG2_TOML)
    return path


@pytest.fixture
def mcm_config(tmp_path):
    path = tmp_path / "mcm.toml"
    path.write_text(MCM_TOML)
    return path


class TestConfigParsing:
    def test_direct_mode_params(self, fig2_config):
        cfg = load_config(fig2_config)
        p = cfg.params
        assert p.mechanism is Mechanism.CMI
        assert p.phi_s == pytest.approx(math.radians(94.0))
        assert p.eps_a == 0.575 - 0.142j
        assert p.omega_c == pytest.approx(2 * math.pi * 50e3)

    def test_eps_a_magnitude_phase_form(self):
        table = dict(gamma_a=1.0, gamma_m=1.0, gamma_c=1e-6,
                     eps_a={"Lambda": 2.0, "theta": 0.0})
        p = params_from_table(table)
        assert p.eps_a == pytest.approx(1.0j)

    def test_q_c_alias(self):
        p = params_from_table(dict(gamma_a=1.0, gamma_m=1.0, Q_c=1e7))
        assert p.gamma_c == pytest.approx(1e-7)
        with pytest.raises(ConfigError, match="exactly one"):
            params_from_table(dict(gamma_a=1.0, gamma_m=1.0, Q_c=1e7, gamma_c=1e-7))

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown params key"):
            params_from_table(dict(gamma_a=1.0, gamma_m=1.0, gamma_c=1e-6, banana=1.0))

    def test_missing_required_keys(self):
        with pytest.raises(ConfigError, match="gamma_m"):
            params_from_table(dict(gamma_a=1.0, gamma_c=1e-6))

    def test_overrides_reach_params(self, fig2_config):
        cfg = load_config(fig2_config, ["r_s=2.6", "params.J_ac=0.2"])
        assert cfg.params.r_s == 2.6
        assert cfg.params.J_ac == 0.2

    def test_direct_mode_forbids_geometry(self):
        raw = {"mode": "direct", "params": {"gamma_a": 1.0, "gamma_m": 1.0, "gamma_c": 1e-6},
               "physical": {"sphere_diameter": 1e-4}}
        with pytest.raises(ConfigError, match="forbids"):
            build_config(raw)

    def test_physical_mode_requires_geometry(self):
        raw = {"mode": "physical", "params": {"gamma_a": 1.0, "gamma_m": 1.0, "gamma_c": 1e-6}}
        with pytest.raises(ConfigError, match="physical"):
            build_config(raw)

    def test_at_most_one_command_payload(self):
        raw = {
            "params": {"gamma_a": 1.0, "gamma_m": 1.0, "gamma_c": 1e-6},
            "spectrum": {"n_points": 11},
            "sweep": {"key": "Delta"},
        }
        with pytest.raises(ConfigError, match="one command payload"):
            build_config(raw)

    def test_payload_command_mismatch_detected(self, tmp_path, capsys):
        path = tmp_path / "cfg.toml"
        path.write_text(FIG2_TOML + "\n[sweep]\nkey = 'Delta'\n")
        code = main(["--config", str(path), "--out", str(tmp_path / "o"), "rates"])
        assert code == 1
        assert "payload" in capsys.readouterr().err


class TestPhysicalMode:
    def test_pipeline_produces_effective_couplings(self, tmp_path):
        path = tmp_path / "phys.toml"
        path.write_text(
            """
mode = "physical"
mechanism = "CMI"

[params]
gamma_a = 2.6666666666666665
gamma_m = 2.0
gamma_c = 1e-7
nbar_m = 0.31
nbar_c = 1.87e5
r_s = 2.0
phi_s = 94.0
eps_a = [0.575, -0.142]

[physical]
sphere_diameter = 250e-6
cavity_mode_volume = 1e-9
wave_number = 200.0
omega_a_hz = 5e9
bias_field = 1e-10
drive_power = 1e-15
"""
        )
        cfg = load_config(path)
        assert cfg.derivation is not None
        d = cfg.derivation
        # effective couplings follow from the steady amplitudes
        g = d.g_amc_normalized
        assert cfg.params.J_mc == pytest.approx(abs(g * abs(d.steady.a0)), rel=1e-12)
        assert cfg.params.J_ac == pytest.approx(abs(g * abs(d.steady.m0)), rel=1e-12)
        assert d.steady.residual < 1e-9

    def test_off_antinode_warns(self, tmp_path):
        path = tmp_path / "phys.toml"
        path.write_text(
            """
mode = "physical"

[params]
gamma_a = 2.0
gamma_m = 2.0
gamma_c = 1e-7

[physical]
sphere_diameter = 100e-6
cavity_mode_volume = 1e-9
wave_number = 200.0
kx0 = 0.7
omega_a_hz = 5e9
"""
        )
        with pytest.warns(UserWarning, match="antinode"):
            load_config(path)


class TestCliCommands:
    def test_rates_exit_zero(self, fig2_config, tmp_path, capsys):
        code = main(["--config", str(fig2_config), "--out", str(tmp_path / "o"), "rates"])
        assert code == 0
        out = capsys.readouterr().out
        assert "Gamma_net" in out

    def test_config_error_exit_one(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text("[params]\ngamma_a = 1.0\n")
        code = main(["--config", str(path), "rates"])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_threshold_blue_sideband_exit_two(self, mcm_config, tmp_path, capsys):
        code = main([
            "--config", str(mcm_config), "--out", str(tmp_path / "o"),
            "--set", "Delta_a=-1", "--set", "Delta_m=-1", "threshold",
        ])
        assert code == 2
        assert "no steady occupancy" in capsys.readouterr().err

    def test_instability_exit_two(self, fig2_config, tmp_path, capsys):
        code = main([
            "--config", str(fig2_config), "--out", str(tmp_path / "o"),
            "--set", "gamma_a=0.5", "rates",
        ])
        assert code == 2

    def test_spectrum_writes_csv_with_header(self, fig2_config, tmp_path):
        out = tmp_path / "o"
        code = main(["--config", str(fig2_config), "--out", str(out),
                     "spectrum", "--n-points", "21"])
        assert code == 0
        csvs = list(out.glob("*/spectrum.csv"))
        assert len(csvs) == 1
        header, rows = read_csv(csvs[0])
        assert header == ["omega_over_wc", "S_F"]
        assert len(rows) == 21

    def test_sweep_deterministic_across_runs(self, mcm_config, tmp_path):
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            code = main([
                "--config", str(mcm_config), "--out", str(out),
                "sweep", "--key", "Delta", "--min", "0.5", "--max", "2.0",
                "--n", "7", "--observables", "Gamma_net,n_c",
            ])
            assert code == 0
            outs.append(sorted(out.glob("*/sweep_Gamma_net.csv"))[0].read_bytes())
        assert outs[0] == outs[1]

    def test_sweep_requires_key(self, mcm_config, tmp_path):
        code = main(["--config", str(mcm_config), "--out", str(tmp_path / "o"), "sweep"])
        assert code == 1

    def test_command_does_not_mutate_config(self, fig2_config, tmp_path):
        before = fig2_config.read_bytes()
        main(["--config", str(fig2_config), "--out", str(tmp_path / "o"), "occupancy"])
        assert fig2_config.read_bytes() == before

    def test_dynamics_runs(self, mcm_config, tmp_path, capsys):
        code = main([
            "--config", str(mcm_config), "--out", str(tmp_path / "o"),
            "--set", "Q_c=1e11", "dynamics", "--n-times", "31",
        ])
        assert code == 0
        assert "crossing" in capsys.readouterr().out

    def test_steady_direct_mode(self, fig2_config, tmp_path, capsys):
        code = main([
            "--config", str(fig2_config), "--out", str(tmp_path / "o"),
            "steady", "--omega-drive", "10.0", "--eps-m", "12.0", "--g-amc", "0.01",
        ])
        assert code == 0
        assert "a0" in capsys.readouterr().out

    def test_steady_requires_drive_in_direct_mode(self, fig2_config, tmp_path):
        code = main(["--config", str(fig2_config), "--out", str(tmp_path / "o"), "steady"])
        assert code == 1

    def test_fig_round_trip_byte_identical(self, tmp_path):
        for sub in ("x", "y"):
            assert main(["fig", "fig6b", "--out", str(tmp_path / sub)]) == 0
        a = (tmp_path / "x" / "fig6b" / "fig6b_cmi_nc.csv").read_bytes()
        b = (tmp_path / "y" / "fig6b" / "fig6b_cmi_nc.csv").read_bytes()
        assert a == b

    def test_validate_passes(self, fig2_config, tmp_path, capsys):
        code = main(["--config", str(fig2_config), "--out", str(tmp_path / "o"), "validate"])
        assert code == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_exit_code_table(self):
        from magcool.errors import (
            ConfigError,
            ConvergenceError,
            DomainError,
            InstabilityError,
            ParametricThresholdError,
            RunawayError,
        )

        assert ConfigError("x").exit_code == 1
        assert DomainError("x").exit_code == 1
        assert InstabilityError("x").exit_code == 2
        assert ParametricThresholdError("x").exit_code == 2
        assert RunawayError("x").exit_code == 2
        assert ConvergenceError("x").exit_code == 3

    def test_optimize_writes_record(self, fig2_config, tmp_path):
        out = tmp_path / "o"
        code = main([
            "--config", str(fig2_config), "--out", str(out),
            "optimize", "--free", "phi_s", "--objective", "stokes_psd",
        ])
        assert code == 0
        record = json.loads(sorted(out.glob("*/optimize.json"))[0].read_text())
        assert record["converged"] is True
        assert abs(math.degrees(record["optimal_values"]["phi_s"]) - 94.0) < 10.0
