"""Euler-Maruyama phase-domain loop kernels.

These per-step recursions are the hot spots of every Monte-Carlo experiment;
they are jitted via _accel.maybe_jit with a pure-Python fallback
(PACESIM_NO_NUMBA=1). Inputs are pre-rotated complex noise streams so the
deterministic equilibrium of every loop is zero phase error.

Status codes: 0 = ok, 1 = integrator blow-up (|phase| > PHASE_BLOWUP_RAD).
"""

import numpy as np

from ._accel import maybe_jit

PHASE_BLOWUP_RAD = 1.0e6


def _pll_loop_py(noise_rot, dt, gain, epsilon, d_omega, amp, theta0, linear):
    n = noise_rot.shape[0]
    theta = np.empty(n)
    t = theta0
    z = 0.0
    for i in range(n):
        theta[i] = t
        if abs(t) > PHASE_BLOWUP_RAD:
            return theta, 1
        if linear:
            drive = -amp * t
        else:
            drive = -amp * np.sin(t)
        u = drive + (noise_rot[i] * np.exp(-1j * t)).real
        t = t + dt * (gain * (u + z) - d_omega)
        z = z + dt * epsilon * u
    return theta, 0


def _arrayed_loop_py(noise_rot, dt, sec_gains, amps, prim_gain, epsilon_p,
                     d_omega, z0):
    n_ant, n = noise_rot.shape
    theta = np.empty(n)
    phi = np.zeros((n_ant, n))
    phi_state = np.zeros(n_ant)
    t = 0.0
    z = z0
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(n):
        theta[i] = t
        if abs(t) > PHASE_BLOWUP_RAD:
            return theta, phi, 1
        v = 0.0
        for m in range(n_ant):
            phi[m, i] = phi_state[m]
            rot = np.exp(-1j * (phi_state[m] + t))
            u = ((-1j * amps[m] + noise_rot[m, i]) * rot).real
            v += u / sec_gains[m]
            phi_state[m] = phi_state[m] + dt * sec_gains[m] * inv_sqrt2 * u
        t = t + dt * (prim_gain * inv_sqrt2 * (v + z) - d_omega)
        z = z + dt * epsilon_p * v
    return theta, phi, 0


pll_loop = maybe_jit(_pll_loop_py)
arrayed_loop = maybe_jit(_arrayed_loop_py)
