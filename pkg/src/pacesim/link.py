"""Data-phase link evaluation: demodulation, SNR, spectral efficiency,
closed-form bounds, water-filling and baseline beamformers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSnapshot, SystemParams, beam_channel, fading_coupling
from .errors import ConfigError


@dataclass(frozen=True)
class LinkMetrics:
    gamma: np.ndarray       # per-subcarrier effective SNR (linear)
    ise: float              # bits/s/Hz
    scheme: str

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if np.any(g < 0):
            raise ConfigError("effective SNRs must be non-negative")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)


@dataclass(frozen=True)
class PowerAllocation:
    e_d: np.ndarray
    water_level: float

    def __post_init__(self):
        e = np.asarray(self.e_d, dtype=float)
        e.setflags(write=False)
        object.__setattr__(self, "e_d", e)


def demod_noise_var(params: SystemParams) -> float:
    """Per-antenna variance of the demodulated noise vector."""
    return params.n0 * params.t_cs / params.t_s


def demod_output(weights: np.ndarray, snap: ChannelSnapshot,
                 params: SystemParams, x: complex, k: int,
                 noise_draw: np.ndarray) -> complex:
    """Demodulated symbol on subcarrier k for data symbol x.

    noise_draw is the length-m_rx demodulated noise vector, i.i.d.
    CN(0, n0 * t_cs / t_s) per antenna when drawn from the channel model.
    """
    if not (-params.k1 <= k <= params.k2):
        raise ConfigError(f"subcarrier {k} outside [-{params.k1}, {params.k2}]")
    h_t = beam_channel(snap, params, np.array([k / params.t_s]), "data")[0]
    w = np.asarray(weights, dtype=complex)
    scale = 1.0 / np.sqrt(params.t_cs)
    return complex(scale * (np.vdot(w, h_t) * x + np.vdot(w, noise_draw)))


def effective_snr(weights: np.ndarray, snap: ChannelSnapshot,
                  params: SystemParams) -> np.ndarray:
    """Per-subcarrier post-combining SNR of a fixed combining vector."""
    w = np.asarray(weights, dtype=complex)
    norm2 = float(np.real(np.vdot(w, w)))
    if norm2 == 0:
        raise ConfigError("combining vector must be nonzero")
    h_t = beam_channel(snap, params, params.subcarrier_freqs(), "data")
    sig = np.abs(h_t @ w.conj()) ** 2
    return sig * params.e_d / (norm2 * demod_noise_var(params))


def ise(gamma: np.ndarray) -> float:
    """Subcarrier-averaged log2(1 + SNR); cyclic-prefix overhead excluded."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ConfigError("effective SNRs must be non-negative")
    return float(np.mean(np.log2(1.0 + g)))


def link_metrics(weights: np.ndarray, snap: ChannelSnapshot,
                 params: SystemParams, scheme: str) -> LinkMetrics:
    gamma = effective_snr(weights, snap, params)
    return LinkMetrics(gamma=gamma, ise=ise(gamma), scheme=scheme)


def snr_lower_bound(snap: ChannelSnapshot, params: SystemParams,
                    phase_var: float, k=None) -> np.ndarray | float:
    """Mean effective SNR lower bound for orthogonal RX path responses.

    Valid at high SNR, averaged over the estimation noise; k may be a
    scalar subcarrier index, an index array, or None for the whole grid.
    """
    scalar = np.isscalar(k) and k is not None
    if k is None:
        idx = np.arange(-params.k1, params.k2 + 1)
    else:
        idx = np.atleast_1d(np.asarray(k, dtype=int))
    e_d = params.e_d[idx + params.k1]
    f_k = idx / params.t_s
    m_rx = snap.rx_geom.m
    b00 = fading_coupling(snap, 0.0, 0.0).real
    bk = np.array([fading_coupling(snap, params.f_c, f) for f in f_k])
    shrink = np.exp(-phase_var)
    dnv = demod_noise_var(params)
    num = m_rx * params.e_r * shrink * np.abs(bk) ** 2 * e_d
    den = (b00 * (params.n0 / params.d2) * e_d
           + b00 * dnv * params.e_r * shrink
           + params.n0 * dnv / params.d2)
    out = num / den
    return float(out[0]) if scalar else out


def ise_lower_bound(snap: ChannelSnapshot, params: SystemParams,
                    phase_var: float) -> float:
    """Mean spectral-efficiency lower bound (orthogonal path responses)."""
    return ise(snr_lower_bound(snap, params, phase_var))


def waterfill(channel_gains: np.ndarray, budget: float) -> PowerAllocation:
    """Water-filling: maximize sum log(1 + g_k e_k) s.t. sum e_k = budget.

    KKT form e_k = max(0, w - 1/g_k) with the exact water level found by
    activating channels in gain order.
    """
    g = np.asarray(channel_gains, dtype=float)
    if np.any(g < 0):
        raise ConfigError("channel gains must be non-negative")
    if budget <= 0:
        raise ConfigError("budget must be positive")
    pos = g > 0
    if not np.any(pos):
        raise ConfigError("at least one channel gain must be positive")
    inv = np.full(g.shape, np.inf)
    inv[pos] = 1.0 / g[pos]
    order = np.argsort(inv)
    inv_sorted = inv[order]
    n_pos = int(pos.sum())
    # with j active channels, w_j = (budget + sum of their 1/g) / j;
    # j is feasible while w_j exceeds the next channel's 1/g
    csum = np.cumsum(inv_sorted[:n_pos])
    j = n_pos
    for cand in range(1, n_pos + 1):
        w = (budget + csum[cand - 1]) / cand
        if cand == n_pos or w <= inv_sorted[cand]:
            j = cand
            break
    w = (budget + csum[j - 1]) / j
    e = np.zeros(g.shape)
    active = order[:j]
    e[active] = w - inv[active]
    return PowerAllocation(e_d=e, water_level=float(w))


def spatial_correlation(snap: ChannelSnapshot,
                        params: SystemParams) -> np.ndarray:
    """RX spatial correlation of the beamformed design-phase channel."""
    h_t = beam_channel(snap, params, params.subcarrier_freqs(), "design")
    return np.einsum("km,kn->mn", h_t, h_t.conj()) / params.k


def principal_eigenvector(h: np.ndarray, tol: float = 1e-10,
                          max_iter: int = 10_000) -> tuple:
    """Dominant eigenvector of a Hermitian PSD matrix via power iteration.

    Returns (unit vector, degenerate). degenerate is True when the relative
    residual did not reach tol within max_iter (e.g. tied top eigenvalues);
    the vector still attains the maximal Rayleigh quotient. The first
    non-negligible entry is rotated to be real positive.
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    degenerate = True
    lam = 0.0
    for _ in range(max_iter):
        hv = h @ v
        lam = float(np.real(np.vdot(v, hv)))
        nrm = np.linalg.norm(hv)
        if nrm == 0:
            degenerate = True
            break
        residual = np.linalg.norm(hv - lam * v)
        v = hv / nrm
        if residual <= tol * max(abs(lam), 1e-300):
            degenerate = False
            break
    idx = int(np.argmax(np.abs(v) > 1e-12 * np.abs(v).max()))
    rot = v[idx] / abs(v[idx])
    v = v * rot.conj()
    return v, degenerate


def statistical_beamformer(snap: ChannelSnapshot,
                           params: SystemParams) -> np.ndarray:
    """Dominant eigenvector of the RX spatial correlation matrix."""
    v, _ = principal_eigenvector(spatial_correlation(snap, params))
    return v


def perfect_mrc_snr(snap: ChannelSnapshot, params: SystemParams) -> np.ndarray:
    """Per-subcarrier SNR of ideal per-subcarrier MRC (upper baseline)."""
    h_t = beam_channel(snap, params, params.subcarrier_freqs(), "data")
    return np.sum(np.abs(h_t) ** 2, axis=1) * params.e_d / demod_noise_var(params)


def ce_overhead(pilots_per_beam: int, n_beams: int, t_cs: float,
                t_acsi: float) -> float:
    """Fraction of the coherence time spent on estimation pilots."""
    if t_acsi <= 0:
        raise ConfigError("t_acsi must be positive")
    frac = pilots_per_beam * n_beams * t_cs / t_acsi
    return float(min(1.0, max(0.0, frac)))
