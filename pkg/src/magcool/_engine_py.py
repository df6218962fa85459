"""Pure-numpy force-noise engine: reference implementation and fallback.

Computes the linear response of the force quadrature
F = -[J_ac (da + da+) + J_mc (dm + dm+)] of the CM-excluded 4-mode
fluctuation system and contracts it against the input correlation table.
The compiled kernel in ``_kernel`` implements the identical contract.
"""

from __future__ import annotations

import numpy as np


def _drift4(delta_a, delta_m, gamma_a, gamma_m, j_am, eps_a):
    a = np.zeros((4, 4), dtype=complex)
    a[0, 0] = -(gamma_a / 2.0 + 1.0j * delta_a)
    a[0, 1] = -2.0j * eps_a
    a[0, 2] = -1.0j * j_am
    a[1, 0] = +2.0j * np.conj(eps_a)
    a[1, 1] = -(gamma_a / 2.0 - 1.0j * delta_a)
    a[1, 3] = +1.0j * j_am
    a[2, 0] = -1.0j * j_am
    a[2, 2] = -(gamma_m / 2.0 + 1.0j * delta_m)
    a[3, 1] = +1.0j * j_am
    a[3, 3] = -(gamma_m / 2.0 - 1.0j * delta_m)
    return a


def force_response(
    omega,
    delta_a,
    delta_m,
    gamma_a,
    gamma_m,
    j_ac,
    j_mc,
    j_am,
    eps_a,
):
    """Row vector t(w) with F(w) = sum_j t_j(w) xi_j(w), for an array of w.

    Returns an array of shape (len(omega), 4) over the noise basis
    (a_in, a_in+, m_in, m_in+).
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    a = _drift4(delta_a, delta_m, gamma_a, gamma_m, j_am, eps_a)
    f = -np.array([j_ac, j_ac, j_mc, j_mc], dtype=complex)
    diag_n = np.sqrt([gamma_a, gamma_a, gamma_m, gamma_m])

    m = -1.0j * omega[:, None, None] * np.eye(4) - a[None, :, :]
    # t = f M^{-1} N  <=>  solve M^T y = f, then t = y * diag(N)
    rhs = np.broadcast_to(f[:, None], (len(omega), 4, 1))
    y = np.linalg.solve(np.transpose(m, (0, 2, 1)), rhs)[..., 0]
    return y * diag_n[None, :]


def psd_points(
    omega,
    delta_a,
    delta_m,
    gamma_a,
    gamma_m,
    j_ac,
    j_mc,
    j_am,
    eps_a,
    cav_nn,
    cav_anti,
    cav_anom,
    mag_nn,
    mag_anti,
):
    """Force PSD S_F at each frequency of ``omega`` (trap-frequency units).

    The correlation weights are the nonzero entries of the input table:
    cav_nn = <a_in a_in+>, cav_anti = <a_in+ a_in>, cav_anom = <a_in a_in>
    (its conjugate pairs automatically) and the magnon thermal pair.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    n = len(omega)
    both = np.concatenate([omega, -omega])
    t = force_response(both, delta_a, delta_m, gamma_a, gamma_m, j_ac, j_mc, j_am, eps_a)
    tp, tm = t[:n], t[n:]
    s = (
        cav_nn * tp[:, 0] * tm[:, 1]
        + cav_anti * tp[:, 1] * tm[:, 0]
        + cav_anom * tp[:, 0] * tm[:, 0]
        + np.conj(cav_anom) * tp[:, 1] * tm[:, 1]
        + mag_nn * tp[:, 2] * tm[:, 3]
        + mag_anti * tp[:, 3] * tm[:, 2]
    )
    return s.real
