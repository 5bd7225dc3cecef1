"""Weighted carrier arraying: multi-antenna reference recovery.

Secondary first-order loops at a subset of antennas de-rotate the per-antenna
phases; their weighted sum drives a type-2 primary loop running at the
combined SNR. Gains adapt per antenna (|A_m| G_m = mu) and the primary obeys
G_p * (combined amplitude)^2 / mu = gp_rule.

Initial conditions: phases start at zero (the pre-rotation convention makes
that the equilibrium) and the primary integrator starts at its frequency-lock
value, i.e. the simulation covers phase tracking, not frequency pull-in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ._kernels import arrayed_loop
from .errors import ConfigError, SimulationDiagnosticError
from .pll import lock_phase_for


@dataclass(frozen=True)
class ArrayingConfig:
    antenna_set: tuple            # antenna indices feeding secondary loops
    mu: float                     # common |A_m| * G_m of the secondaries (1/s)
    gp_rule: float                # G_p * (combined amplitude)^2 / mu (1/s)
    epsilon_p: float              # primary loop-filter zero (1/s)
    f_if: float                   # secondary free-running frequency (Hz)
    f_offset_p: float             # residual primary frequency offset (Hz)
    dt: float
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "antenna_set", tuple(self.antenna_set))
        if len(self.antenna_set) < 1:
            raise ConfigError("antenna_set must not be empty")
        if len(set(self.antenna_set)) != len(self.antenna_set):
            raise ConfigError("antenna_set indices must be distinct")
        if self.mu <= 0 or self.gp_rule <= 0 or self.epsilon_p <= 0:
            raise ConfigError("mu, gp_rule and epsilon_p must be positive")
        if self.dt <= 0 or self.duration <= 0:
            raise ConfigError("dt and duration must be positive")

    @property
    def n_steps(self) -> int:
        return int(np.ceil(self.duration / self.dt))


@dataclass(frozen=True)
class ArrayedTrace:
    theta: np.ndarray          # primary phase (rad)
    phi: np.ndarray            # secondary phases, one row per antenna
    dt: float
    config: ArrayingConfig
    lock_phase: float = 0.0    # arbitrary constant folds into theta

    def times(self) -> np.ndarray:
        return np.arange(self.theta.shape[0]) * self.dt


def rss_amplitude(amplitudes: np.ndarray) -> float:
    """Root-sum-square of the per-antenna reference amplitudes."""
    a = np.asarray(amplitudes)
    if a.size == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def simulate_arrayed_pll(config: ArrayingConfig, amplitudes: np.ndarray,
                         noises: np.ndarray) -> ArrayedTrace:
    """Integrate the arrayed recovery circuit.

    amplitudes holds the complex reference amplitude at each antenna of
    antenna_set (same order); noises is the (n_antennas, n_steps) complex
    stream matrix, one sample per step per antenna.
    """
    amps = np.abs(np.asarray(amplitudes, dtype=complex))
    n_ant = len(config.antenna_set)
    if amps.shape != (n_ant,):
        raise ConfigError("amplitudes must match antenna_set length")
    if np.any(amps <= 0):
        raise ConfigError("every arrayed antenna needs a nonzero amplitude")
    n = config.n_steps
    if noises.shape[0] != n_ant or noises.shape[1] < n:
        raise ConfigError("noises must be (n_antennas, >= n_steps)")
    rss2 = float(np.sum(amps ** 2))
    prim_gain = config.gp_rule * config.mu / rss2
    sec_gains = config.mu / amps
    locks = np.array([lock_phase_for(a) for a in np.asarray(amplitudes)])
    rotated = np.ascontiguousarray(noises[:, :n]
                                   * np.exp(-1j * locks)[:, None])
    z0 = np.sqrt(2.0) * 2 * np.pi * config.f_offset_p / prim_gain
    theta, phi, status = arrayed_loop(rotated, config.dt, sec_gains, amps,
                                      prim_gain, config.epsilon_p,
                                      2 * np.pi * config.f_offset_p, z0)
    if status != 0:
        raise SimulationDiagnosticError("arrayed loop integration blew up "
                                        "(|theta| exceeded 1e6 rad)")
    return ArrayedTrace(theta=theta, phi=phi, dt=config.dt, config=config)


def arrayed_linear_psd(config: ArrayingConfig, rss_amp: float, n0: float,
                       f_grid: np.ndarray,
                       band: tuple | None = None) -> np.ndarray:
    """Locked-state PSD of the primary phase fluctuation (rad^2/Hz)."""
    f = np.asarray(f_grid, dtype=float)
    s = 1j * 2 * np.pi * f
    rss2 = rss_amp ** 2
    prim_gain = config.gp_rule * config.mu / rss2
    num = n0 * (rss_amp * prim_gain) ** 2 / 2 \
        * np.abs(s + config.epsilon_p) ** 2
    den = np.abs(s * config.mu * (np.sqrt(2) * s + config.mu)
                 + (s + config.epsilon_p) * rss2 * prim_gain) ** 2
    psd = num / den
    if band is not None:
        psd = np.where((f >= band[0]) & (f <= band[1]), psd, 0.0)
    return psd


def arrayed_linear_variance(config: ArrayingConfig, rss_amp: float,
                            n0: float,
                            band: tuple | None = None) -> tuple:
    """(variance, bound) of the locked-state primary phase fluctuation.

    With band given, a third element holds the band-limited quadrature of
    the PSD, which never exceeds the bound.
    """
    if rss_amp <= 0:
        raise ConfigError("combined amplitude must be positive")
    rss2 = rss_amp ** 2
    gpm = config.gp_rule / rss2  # = G_p / mu
    var = ((rss2 * gpm + np.sqrt(2) * config.epsilon_p) * gpm * n0) \
        / (4 * np.sqrt(2) * (config.mu + rss2 * gpm))
    bound = ((rss2 * gpm / np.sqrt(2) + config.epsilon_p) * n0) / (4 * rss2)
    if band is None:
        return float(var), float(bound)
    band_var, _ = quad(
        lambda f: float(arrayed_linear_psd(config, rss_amp, n0,
                                           np.array([f]))[0]),
        band[0], band[1], limit=400)
    return float(var), float(bound), float(band_var)


def arrayed_trace_to_csv(trace: ArrayedTrace, path) -> None:
    """Debug CSV export: t_seconds, theta_rad, phi_<antenna>..."""
    cols = ["t_seconds", "theta_rad"] + [
        f"phi_{m}_rad" for m in trace.config.antenna_set]
    times = trace.times()
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for i, t in enumerate(times):
            vals = [f"{t:.12g}", f"{trace.theta[i]:.12g}"]
            vals += [f"{trace.phi[m, i]:.12g}"
                     for m in range(trace.phi.shape[0])]
            fh.write(",".join(vals) + "\n")
