"""Single carrier-recovery loop: nonlinear simulation and locked-state theory.

The loop is a type-2 analog recovery circuit (mixer, active low-pass filter
1 + epsilon/s realized as one integrator state, adaptive gain, VCO) driven by
a noisy reference tone. Simulation runs at phase-domain baseband: the input
is pre-rotated so the deterministic equilibrium is zero phase error and the
drive reduces to -|A| sin(theta) plus rotated channel noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ._kernels import pll_loop
from .errors import ConfigError, SimulationDiagnosticError


@dataclass(frozen=True)
class PllConfig:
    epsilon: float            # loop-filter zero (1/s)
    loop_gain_product: float  # G * |A| held constant by the gain control (1/s)
    f_offset: float           # reference minus VCO free-running frequency (Hz)
    dt: float                 # integration step (s)
    duration: float           # simulated time (s)
    theta0: float = 0.0       # initial phase (rad)

    def __post_init__(self):
        if self.dt <= 0 or self.duration <= 0:
            raise ConfigError("dt and duration must be positive")
        if self.loop_gain_product <= 0 or self.epsilon <= 0:
            raise ConfigError("loop_gain_product and epsilon must be positive")
        if self.dt * self.loop_gain_product >= 0.1:
            raise ConfigError("dt * loop_gain_product must stay below 0.1 "
                              "for a stable explicit step")

    @property
    def n_steps(self) -> int:
        return int(np.ceil(self.duration / self.dt))


@dataclass(frozen=True)
class PllTrace:
    theta: np.ndarray
    dt: float
    lock_phase: float              # constant input rotation (rad)
    config: PllConfig
    lock_time: float | None = None

    def times(self) -> np.ndarray:
        return np.arange(self.theta.shape[0]) * self.dt


@dataclass(frozen=True)
class LinearPllStats:
    variance: float
    variance_bound: float
    pole_a: complex
    pole_b: complex
    band_variance: float | None = None
    psd_freqs: np.ndarray | None = None
    psd: np.ndarray | None = None


def synth_baseband_noise(n0: float, dt: float, n_samples: int,
                         seed) -> np.ndarray:
    """I.i.d. circularly-symmetric complex Gaussian, variance n0/dt per sample.

    White at the simulation rate, i.e. flat PSD n0 over +-1/(2 dt); seed may
    be anything numpy's default_rng accepts (int, tuple, SeedSequence, ...).
    """
    if n_samples == 0:
        return np.zeros(0, dtype=complex)
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    scale = np.sqrt(n0 / (2 * dt))
    return scale * (rng.standard_normal(n_samples)
                    + 1j * rng.standard_normal(n_samples))


def lock_phase_for(amplitude: complex) -> float:
    """Input rotation placing the loop equilibrium at zero phase error."""
    return float(np.pi / 2 + np.angle(amplitude))


def simulate_pll(config: PllConfig, amplitude: complex,
                 noise: np.ndarray, linear: bool = False) -> PllTrace:
    """Integrate the recovery loop against one complex noise stream.

    noise must cover the whole duration (one sample per step, held constant
    across the step). linear=True replaces sin(theta) by theta, giving the
    linearized loop used for closed-form cross-checks.
    """
    amp = abs(amplitude)
    if amp <= 0:
        raise ConfigError("input amplitude must be nonzero")
    n = config.n_steps
    if noise.shape[0] < n:
        raise ConfigError(f"noise stream too short: {noise.shape[0]} < {n}")
    lock = lock_phase_for(amplitude)
    rotated = np.ascontiguousarray(noise[:n] * np.exp(-1j * lock))
    gain = config.loop_gain_product / amp
    theta, status = pll_loop(rotated, config.dt, gain, config.epsilon,
                             2 * np.pi * config.f_offset, amp,
                             config.theta0, linear)
    if status != 0:
        raise SimulationDiagnosticError("PLL integration blew up "
                                        "(|theta| exceeded 1e6 rad)")
    return PllTrace(theta=theta, dt=config.dt, lock_phase=lock, config=config)


def acquisition_time(config: PllConfig, a1_mag: float) -> float:
    """No-noise phase-lock acquisition time estimate (s)."""
    if a1_mag <= 0:
        raise ConfigError("amplitude must be positive")
    ratio = 2 * np.pi * config.f_offset / config.loop_gain_product
    return ratio ** 2 / config.epsilon


def _poles(loop_gain_product: float, epsilon: float) -> tuple[complex, complex]:
    ga = loop_gain_product
    disc = np.sqrt(complex(ga * ga - 4 * ga * epsilon))
    return (ga + disc) / 2, (ga - disc) / 2


def linear_psd(config: PllConfig, a1_mag: float, n0: float,
               f_grid: np.ndarray, band: tuple | None = None) -> np.ndarray:
    """Locked-state phase-noise PSD on f_grid (rad^2/Hz).

    band=(f_lo, f_hi) restricts the input noise PSD to that interval
    (zero outside); band=None models flat noise at every frequency.
    """
    f = np.asarray(f_grid, dtype=float)
    gain = config.loop_gain_product / a1_mag
    w2 = (2 * np.pi * f) ** 2
    num = gain ** 2 * (w2 + config.epsilon ** 2)
    den = 2 * np.abs(-w2 + gain * (1j * 2 * np.pi * f + config.epsilon)
                     * a1_mag) ** 2
    psd = num * n0 / den
    if band is not None:
        psd = np.where((f >= band[0]) & (f <= band[1]), psd, 0.0)
    return psd


def linear_autocorr(config: PllConfig, a1_mag: float, n0: float,
                    tau) -> np.ndarray | float:
    """Locked-state phase autocorrelation (rad^2), flat-noise closed form.

    Valid in both the real-pole and complex-conjugate-pole regimes; the
    imaginary residue cancels and the real part is returned.
    """
    tau_arr = np.abs(np.asarray(tau, dtype=float))
    gain = config.loop_gain_product / a1_mag
    a, b = _poles(config.loop_gain_product, config.epsilon)
    e2 = config.epsilon ** 2
    val = (gain ** 2 * n0 / 4) * (
        (a * a - e2) / (a * (a * a - b * b)) * np.exp(-a * tau_arr)
        + (b * b - e2) / (b * (b * b - a * a)) * np.exp(-b * tau_arr))
    out = val.real
    return float(out) if np.isscalar(tau) else out


def linear_variance(config: PllConfig, a1_mag: float, n0: float,
                    band: tuple | None = None,
                    f_grid: np.ndarray | None = None) -> LinearPllStats:
    """Locked-state phase variance, its bound, and optional PSD tabulation.

    variance is the flat-noise closed form (autocorrelation at lag zero) and
    coincides with variance_bound; band_variance integrates the band-limited
    PSD over the given noise band and never exceeds the bound.
    """
    if a1_mag <= 0:
        raise ConfigError("no lock possible with zero input amplitude")
    var = float(linear_autocorr(config, a1_mag, n0, 0.0))
    bound = n0 * (config.loop_gain_product + config.epsilon) / (4 * a1_mag ** 2)
    a, b = _poles(config.loop_gain_product, config.epsilon)
    band_var = None
    if band is not None:
        band_var, _ = quad(
            lambda f: float(linear_psd(config, a1_mag, n0, np.array([f]))[0]),
            band[0], band[1], limit=400)
    psd_vals = None
    if f_grid is not None:
        psd_vals = linear_psd(config, a1_mag, n0, f_grid, band=band)
    return LinearPllStats(variance=var, variance_bound=bound,
                          pole_a=a, pole_b=b, band_variance=band_var,
                          psd_freqs=None if f_grid is None
                          else np.asarray(f_grid, dtype=float),
                          psd=psd_vals)


def detect_lock(trace: PllTrace, window: float,
                slope_tol: float) -> float | None:
    """Earliest time from which the loop stays locked, or None.

    Locked means the windowed mean of dtheta/dt stays below slope_tol and the
    remaining phase excursion stays inside one full cycle.
    """
    theta = trace.theta
    dt = trace.dt
    if window >= trace.config.duration:
        raise ConfigError("lock-detection window must be below the duration")
    w = max(1, int(round(window / dt)))
    slope = np.diff(theta) / dt
    if slope.size < w:
        return None
    kernel = np.ones(w) / w
    smoothed = np.abs(np.convolve(slope, kernel, mode="valid"))
    # suffix conditions: every later windowed slope under tol, and the tail
    # phase range under 2*pi
    ok_slope = np.flip(np.maximum.accumulate(np.flip(smoothed))) < slope_tol
    tail_max = np.flip(np.maximum.accumulate(np.flip(theta)))
    tail_min = np.flip(np.minimum.accumulate(np.flip(theta)))
    ok_range = (tail_max - tail_min) < 2 * np.pi
    n = min(ok_slope.size, ok_range.size)
    good = ok_slope[:n] & ok_range[:n]
    idx = np.argmax(good)
    if not good[idx]:
        return None
    return float(idx * dt)


def trace_to_csv(trace: PllTrace, path) -> None:
    """Debug CSV export: t_seconds, theta_rad."""
    times = trace.times()
    with open(path, "w", newline="") as fh:
        fh.write("t_seconds,theta_rad\n")
        for t, th in zip(times, trace.theta):
            fh.write(f"{t:.12g},{th:.12g}\n")


def ref_snr_to_n0(snr_db: float, a1_mag: float, t_s: float) -> float:
    """Noise PSD for a given reference-tone input SNR |A|^2 t_s / n0."""
    return a1_mag ** 2 * t_s / 10 ** (snr_db / 10)
