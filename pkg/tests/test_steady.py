import cmath
import math

import numpy as np
import pytest

from magcool.errors import InstabilityError, MultistabilityWarning, ParametricThresholdError
from magcool.model import SystemParams
from magcool.steady import (
    SteadyState,
    _cmi_residual,
    _newton_cmi,
    assert_stable,
    build_drift,
    effective_couplings,
    solve_cmi,
    solve_mcm,
    stability_report,
)

WC = 2.0 * math.pi * 50e3


def params(**overrides):
    base = dict(
        omega_c=WC,
        Delta_a=1.0,
        Delta_m=1.0,
        gamma_a=8.0 / 3.0,
        gamma_m=2.0,
        gamma_c=1e-7,
        nbar_m=0.31,
        nbar_c=1.87e5,
        J_ac=0.09,
        J_mc=0.05,
        J_am=0.03,
        eps_a=0.575 - 0.142j,
        r_s=2.0,
        phi_s=math.radians(94.0),
    )
    base.update(overrides)
    return SystemParams(**base)


def random_params(rng, with_squeezing=True):
    gamma_a = rng.uniform(0.5, 5.0)
    delta_a = rng.uniform(-2.0, 2.0)
    # keep below the parametric threshold
    eps_mag = 0.4 * abs(complex(gamma_a / 2.0, delta_a)) if with_squeezing else 0.0
    eps = eps_mag * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    return params(
        Delta_a=delta_a,
        Delta_m=rng.uniform(-2.0, 2.0),
        gamma_a=gamma_a,
        gamma_m=rng.uniform(0.5, 5.0),
        J_ac=rng.uniform(0.0, 0.3),
        J_mc=rng.uniform(0.0, 0.3),
        J_am=rng.uniform(0.0, 0.1),
        eps_a=eps,
        r_s=rng.uniform(0.0, 2.5),
        phi_s=rng.uniform(0.0, 2 * math.pi),
    )


class TestSolveMcm:
    def test_decoupled_lorentzian(self):
        p = params(eps_a=0.0, Delta_a=0.0)
        st = solve_mcm(p, 3.0)
        assert st.a0 == pytest.approx(2.0 * 3.0 / p.gamma_a, rel=1e-14)
        assert st.m0 == 0.0 and st.c0 == 0.0

    def test_zero_drive(self):
        assert solve_mcm(params(), 0.0).a0 == 0.0

    def test_residual_below_tolerance(self):
        st = solve_mcm(params(), 83.0)
        assert st.residual < 1e-12 * max(1.0, 83.0)

    def test_parametric_threshold_error_names_parameters(self):
        p = params(eps_a=2.0 + 0.0j)  # 2|eps| = 4 > |4/3 + i| = 1.667
        with pytest.raises(ParametricThresholdError, match="gamma_a"):
            solve_mcm(p, 1.0)

    def test_drive_scaled_to_hit_target_coupling(self):
        # pick the drive so that |a0| = J_mc / G_amc reproduces J_mc = 0.05
        p = params()
        g_amc = 1e-3
        probe = solve_mcm(p, 1.0)
        scale = (0.05 / g_amc) / abs(probe.a0)
        st = solve_mcm(p, scale)
        j_ac, j_mc, j_am = effective_couplings(st, g_amc)
        assert j_mc == pytest.approx(0.05, rel=1e-12)
        assert j_ac == 0.0 and j_am == 0.0


class TestSolveCmi:
    def test_decoupled_limit(self):
        p = params()
        st = solve_cmi(p, 2.0, 3.0, 0.0)
        expected_a0 = solve_mcm(p, 2.0).a0
        expected_m0 = 3.0 / complex(p.gamma_m / 2.0, p.Delta_m)
        assert st.a0 == pytest.approx(expected_a0, rel=1e-10)
        assert st.m0 == pytest.approx(expected_m0, rel=1e-10)
        assert st.c0 == pytest.approx(0.0, abs=1e-12)

    def test_zero_drives_zero_amplitudes(self):
        st = solve_cmi(params(), 0.0, 0.0, 1e-3)
        assert abs(st.a0) < 1e-12 and abs(st.m0) < 1e-12 and abs(st.c0) < 1e-12

    def test_substitution_self_consistency(self, rng):
        # converged amplitudes must satisfy the steady-state equations
        for _ in range(10):
            p = random_params(rng)
            st = solve_cmi(p, rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0), 1e-3)
            z = np.array([st.a0.real, st.a0.imag, st.m0.real, st.m0.imag, st.c0.real, st.c0.imag])
            res = np.max(np.abs(_cmi_residual(z, p, 0.0, 0.0, 1e-3)))
            # residual of the homogeneous part must cancel the drives
            assert st.residual < 1e-10 * max(1.0, 50.0)
            assert math.isfinite(res)

    def test_rerun_from_converged_point_is_fixed(self):
        p = params()
        st = solve_cmi(p, 10.0, 12.0, 1e-2)
        z = np.array([st.a0.real, st.a0.imag, st.m0.real, st.m0.imag, st.c0.real, st.c0.imag])
        z2, norm, iters = _newton_cmi(z, p, 10.0, 12.0, 1e-2, 1e-12 * 12.0)
        assert np.max(np.abs(z2 - z)) < 1e-12 * max(1.0, np.max(np.abs(z)))
        assert iters == 0

    def test_continuity_in_drives(self):
        p = params()
        st = solve_cmi(p, 10.0, 12.0, 1e-2)
        st2 = solve_cmi(p, 10.0 * (1 + 1e-6), 12.0 * (1 + 1e-6), 1e-2)
        for x, y in ((st.a0, st2.a0), (st.m0, st2.m0)):
            assert abs(y - x) / max(abs(x), 1e-30) < 1e-4


class TestEffectiveCouplings:
    def test_zero_magnon_amplitude(self):
        st = SteadyState(1.0 + 1.0j, 0.0j, 0.5 + 0.5j, 0.0, 1)
        j_ac, _, _ = effective_couplings(st, 1e-3)
        assert j_ac == 0.0

    def test_imaginary_c0_kills_beamsplitter(self):
        st = SteadyState(1.0, 1.0, 0.7j, 0.0, 1)
        _, _, j_am = effective_couplings(st, 1e-3)
        assert j_am == 0.0

    def test_paper_scale_coupling(self):
        st = SteadyState(50.0 + 0.0j, 0.0j, 0.0j, 0.0, 1)
        _, j_mc, _ = effective_couplings(st, 1e-3)
        assert j_mc == pytest.approx(0.05, rel=1e-15)

    def test_global_phase_invariance(self, rng):
        a0 = complex(rng.normal(), rng.normal())
        m0 = complex(rng.normal(), rng.normal())
        c0 = complex(rng.normal(), rng.normal())
        base = effective_couplings(SteadyState(a0, m0, c0, 0.0, 1), 2e-3)
        rot = cmath.exp(1j * 0.77)
        rotated = effective_couplings(SteadyState(a0 * rot, m0 * rot, c0, 0.0, 1), 2e-3)
        assert rotated == pytest.approx(base, rel=1e-12)


class TestBuildDrift:
    def test_decoupled_diagonal(self):
        p = params(J_ac=0.0, J_mc=0.0, J_am=0.0, eps_a=0.0)
        a = build_drift(p, include_cm=False).drift
        off = a - np.diag(np.diag(a))
        assert np.max(np.abs(off)) == 0.0
        assert a[0, 0] == -(p.gamma_a / 2 + 1j * p.Delta_a)
        assert a[2, 2] == -(p.gamma_m / 2 + 1j * p.Delta_m)

    def test_mcm_block_diagonal(self):
        a = build_drift(params().as_mcm(), include_cm=False).drift
        assert np.max(np.abs(a[:2, 2:])) == 0.0
        assert np.max(np.abs(a[2:, :2])) == 0.0

    def test_conjugation_symmetry_exact(self, rng):
        for _ in range(20):
            p = random_params(rng)
            for include_cm in (False, True):
                a = build_drift(p, include_cm).drift
                n = a.shape[0]
                swap = np.arange(n).reshape(-1, 2)[:, ::-1].ravel()
                assert np.array_equal(a, np.conj(a[swap][:, swap]))

    def test_fig2_cmi_six_mode_stable(self, fig2_cmi):
        model = build_drift(fig2_cmi, include_cm=True)
        report = assert_stable(model)
        assert report.stable
        assert max(report.eigenvalue_real_parts) < 0.0

    def test_noise_map_entries(self):
        p = params()
        model = build_drift(p, include_cm=True)
        expected = np.sqrt([p.gamma_a, p.gamma_a, p.gamma_m, p.gamma_m, p.gamma_c, p.gamma_c])
        assert np.allclose(np.diag(model.noise_map), expected, rtol=1e-15)

    def test_correlation_table_squeezed_entries(self):
        p = params()
        c = build_drift(p, include_cm=True).input_correlations
        assert c[0, 1] == pytest.approx(p.n_s + 1.0)
        assert c[1, 0] == pytest.approx(p.n_s)
        assert c[0, 0] == pytest.approx(p.m_s * cmath.exp(-2j * p.phi_s))
        assert c[1, 1] == pytest.approx(np.conj(c[0, 0]))
        assert c[2, 3] == pytest.approx(p.nbar_m + 1.0)
        assert c[4, 5] == pytest.approx(p.nbar_c + 1.0)
        # m_s = sqrt(n_s (n_s + 1)) for a pure squeezed input
        assert abs(c[0, 0]) == pytest.approx(math.sqrt(p.n_s * (p.n_s + 1.0)), rel=1e-12)


class TestStability:
    def test_decoupled_margin_is_half_smallest_rate(self):
        p = params(J_ac=0.0, J_mc=0.0, J_am=0.0, eps_a=0.0, gamma_m=0.8)
        report = assert_stable(build_drift(p, include_cm=False))
        assert report.margin == pytest.approx(0.4, rel=1e-12)
        assert report.stable

    def test_parametric_instability_detected(self):
        p = params(J_ac=0.0, J_mc=0.0, J_am=0.0, Delta_a=0.0, gamma_a=1.0, eps_a=0.3 + 0.0j)
        # 2|eps| = 0.6 > gamma_a/2 = 0.5
        report = stability_report(build_drift(p, include_cm=False))
        assert not report.stable
        with pytest.raises(InstabilityError, match="unstable"):
            assert_stable(build_drift(p, include_cm=False))

    def test_fig2_parameters_stable(self, fig2_cmi, fig2_mcm):
        for p in (fig2_cmi, fig2_mcm):
            assert stability_report(build_drift(p, include_cm=False)).stable


def test_benign_point_not_flagged_multistable():
    st = solve_cmi(params(), 10.0, 12.0, 1e-2)
    assert not st.multistable


def test_multistability_selection_and_warning(monkeypatch):
    # when distinct roots converge, the solver warns and keeps smallest |c0|
    import magcool.steady as steady_mod

    roots = [
        np.array([1.0, 0.0, 0.0, 0.0, 0.5, 0.0]),
        np.array([1.0, 0.0, 0.0, 0.0, 0.1, 0.0]),
    ] * 5
    calls = iter(roots)

    def fake_newton(z0, p, omega_drive, eps_m, g_amc, tol, max_iter=200):
        return next(calls), 0.0, 1

    monkeypatch.setattr(steady_mod, "_newton_cmi", fake_newton)
    with pytest.warns(MultistabilityWarning):
        st = steady_mod.solve_cmi(params(), 1.0, 1.0, 1e-3)
    assert st.multistable
    assert abs(st.c0) == pytest.approx(0.1, rel=1e-12)
