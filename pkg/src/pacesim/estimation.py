"""Analog estimation of the per-antenna reference amplitude and phase.

The recovered carrier de-rotates each antenna's received reference symbol and
a bank of integrate-and-hold circuits averages the result over the last d2
reference symbols, producing the complex combining weights for the data
phase. Two routes are provided: full numerical integration against a
simulated recovery trace, and the closed-form Gaussian model whose signal
term shrinks by exp(-Var/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arraying import ArrayedTrace
from .channel import ChannelSnapshot, SystemParams, beam_channel
from .errors import ConfigError
from .pll import PllTrace, lock_phase_for


@dataclass(frozen=True)
class PaceEstimate:
    weights: np.ndarray       # complex combining vector, one entry per antenna
    mode: str                 # "simulated" | "analytic"
    phase_var: float          # phase-noise variance used (analytic mode)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if not np.all(np.isfinite(w)):
            raise ConfigError("estimate weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def hold_window(params: SystemParams, dt: float,
                d1: int | None = None, d2: int | None = None) -> tuple:
    """Sample index range [i1, i2) of the estimation window.

    The window spans [d1*t_cs - t_cp, d*t_cs - t_cp] on the trace time grid.
    """
    d1 = params.d1 if d1 is None else d1
    d2 = params.d2 if d2 is None else d2
    t1 = d1 * params.t_cs - params.t_cp
    t2 = (d1 + d2) * params.t_cs - params.t_cp
    return int(round(t1 / dt)), int(round(t2 / dt))


def _window_phase(trace, params, d1, d2):
    i1, i2 = hold_window(params, trace.dt, d1, d2)
    if trace.theta.shape[0] < i2:
        raise ConfigError("trace does not cover the estimation window")
    return trace.theta[i1:i2], i1, i2


def integrate_and_hold(snap: ChannelSnapshot, params: SystemParams,
                       trace: PllTrace | ArrayedTrace,
                       antenna_noise: dict | None = None,
                       rng: np.random.Generator | None = None,
                       d1: int | None = None,
                       d2: int | None = None) -> PaceEstimate:
    """Numerically integrate the estimation bank against a recovery trace.

    antenna_noise maps antenna index -> complex per-step stream (the same
    streams that drove the recovery loops, so their correlation with the
    trace phase is preserved). Antennas without a stream get an
    integrated-noise equivalent draw from rng, which is distribution-exact
    because white Gaussian noise independent of the trace phase stays white
    under the de-rotation.
    """
    d1 = params.d1 if d1 is None else d1
    d2 = params.d2 if d2 is None else d2
    theta_win, i1, i2 = _window_phase(trace, params, d1, d2)
    n_win = i2 - i1
    m_rx = snap.rx_geom.m
    antenna_noise = antenna_noise or {}
    if len(antenna_noise) < m_rx and rng is None:
        raise ConfigError("rng required for antennas without a noise stream")

    h0 = beam_channel(snap, params, np.array([0.0]), "design")[0]
    rotation = np.exp(-1j * (trace.lock_phase + theta_win))
    signal_factor = rotation.mean()
    t_cs = params.t_cs
    # mean over the window times the nominal window length t2 - t1 = d2*t_cs
    signal = np.sqrt(params.e_r / t_cs) * h0 * signal_factor * t_cs

    noise_term = np.empty(m_rx, dtype=complex)
    eq_scale = t_cs * np.sqrt(params.n0 / (trace.dt * n_win))
    for m in range(m_rx):
        stream = antenna_noise.get(m)
        if stream is not None:
            if stream.shape[0] < i2:
                raise ConfigError("antenna noise stream too short")
            noise_term[m] = (stream[i1:i2] * rotation).mean() * t_cs
        else:
            noise_term[m] = eq_scale / np.sqrt(2) * complex(
                rng.standard_normal(), rng.standard_normal())
    # the 1/d2 prefactor and the window length d2*t_cs cancel; both terms
    # above already carry the resulting single t_cs factor
    return PaceEstimate(weights=signal + noise_term,
                        mode="simulated", phase_var=float("nan"))


def analytic_estimate(snap: ChannelSnapshot, params: SystemParams,
                      phase_var: float, seed) -> PaceEstimate:
    """Closed-form Gaussian model of the estimation output.

    Signal term sqrt(t_cs * e_r) * H(0) t * exp(-j lock_phase) shrunk by
    exp(-phase_var/2), plus i.i.d. CN(0, n0/d2) noise scaled by sqrt(t_cs).
    """
    if phase_var < 0:
        raise ConfigError("phase_var must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    h0 = beam_channel(snap, params, np.array([0.0]), "design")[0]
    lock = lock_phase_for(h0[0]) if h0[0] != 0 else 0.0
    m_rx = snap.rx_geom.m
    noise = np.sqrt(params.n0 / (2 * params.d2)) * (
        rng.standard_normal(m_rx) + 1j * rng.standard_normal(m_rx))
    weights = np.sqrt(params.t_cs) * (
        np.sqrt(params.e_r) * h0 * np.exp(-1j * lock)
        * np.exp(-phase_var / 2) + noise)
    return PaceEstimate(weights=weights, mode="analytic",
                        phase_var=float(phase_var))


def phase_coherence(trace: PllTrace | ArrayedTrace, params: SystemParams,
                    d1: int | None = None, d2: int | None = None) -> float:
    """|window mean of exp(-j theta)| over the estimation window, in [0, 1].

    The scalar accuracy diagnostic: 1 for a frozen phase, exp(-Var/2) for a
    locked loop with small Gaussian phase noise, collapsing to ~0 once the
    loop slips cycles inside the window.
    """
    theta_win, _, _ = _window_phase(trace, params, d1, d2)
    return float(np.abs(np.mean(np.exp(-1j * theta_win))))
