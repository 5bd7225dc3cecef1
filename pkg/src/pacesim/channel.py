"""OFDM system parameters, planar-array geometry and multipath channels.

Conventions: subcarriers are indexed k in [-k1, k2] with f_k = k / t_s;
elevation angles are measured from the array zenith so ele = pi/2 is
broadside-horizontal; all channel types are frozen after construction and
their ndarray fields are marked read-only so snapshots can be shared across
workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299792458.0


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemParams:
    """OFDM timing/frequency grid, energy budget and reference-symbol split.

    e_d is the per-subcarrier data energy sequence (length k); by default
    the total budget e_cs is spread flat. n0 is the one-sided noise PSD of
    the baseband channel noise over the signal band.
    """

    k1: int
    k2: int
    t_s: float
    t_cp: float
    f_c: float
    e_cs: float
    e_r: float
    n0: float
    d1: int
    d2: int
    e_d: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0 or self.k1 + self.k2 + 1 < 1:
            raise ConfigError("subcarrier bounds must be non-negative")
        if self.t_s <= 0 or self.t_cp < 0:
            raise ConfigError("symbol and cyclic-prefix durations must be positive")
        if self.d1 < 1 or self.d2 < 1:
            raise ConfigError("d1 and d2 must each be at least 1")
        if self.e_r < 0 or self.e_cs < 0 or self.n0 < 0:
            raise ConfigError("energies and noise PSD must be non-negative")
        if self.e_r > self.e_cs * (1 + 1e-12):
            raise ConfigError("reference energy exceeds the symbol budget e_cs")
        cycles = self.f_c * self.t_cs
        if abs(cycles - round(cycles)) > 1e-6:
            raise ConfigError("f_c must be an integer multiple of 1/t_cs")
        e_d = self.e_d
        if e_d is None:
            e_d = np.full(self.k, self.e_cs / self.k)
        e_d = np.asarray(e_d, dtype=float)
        if e_d.shape != (self.k,):
            raise ConfigError(f"e_d must have length k={self.k}")
        if np.any(e_d < 0):
            raise ConfigError("e_d entries must be non-negative")
        if e_d.sum() > self.e_cs * (1 + 1e-9):
            raise ConfigError("sum of e_d exceeds the symbol budget e_cs")
        object.__setattr__(self, "e_d", _freeze(e_d))

    @property
    def k(self) -> int:
        return self.k1 + self.k2 + 1

    @property
    def t_cs(self) -> float:
        return self.t_s + self.t_cp

    @property
    def d(self) -> int:
        return self.d1 + self.d2

    def subcarrier_freqs(self) -> np.ndarray:
        """f_k = k/t_s for k = -k1 .. k2."""
        return np.arange(-self.k1, self.k2 + 1) / self.t_s

    def with_e_d(self, e_d: np.ndarray) -> "SystemParams":
        return SystemParams(self.k1, self.k2, self.t_s, self.t_cp, self.f_c,
                            self.e_cs, self.e_r, self.n0, self.d1, self.d2,
                            e_d=np.asarray(e_d, dtype=float))

    def with_n0(self, n0: float) -> "SystemParams":
        return SystemParams(self.k1, self.k2, self.t_s, self.t_cp, self.f_c,
                            self.e_cs, self.e_r, n0, self.d1, self.d2,
                            e_d=self.e_d)


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array: m_h x m_v elements, spacings in metres."""

    m_h: int
    m_v: int
    delta_h: float
    delta_v: float
    wavelength: float

    def __post_init__(self):
        if self.m_h < 1 or self.m_v < 1:
            raise ConfigError("element counts must be at least 1")
        if self.delta_h <= 0 or self.delta_v <= 0 or self.wavelength <= 0:
            raise ConfigError("spacings and wavelength must be positive")

    @property
    def m(self) -> int:
        return self.m_h * self.m_v

    @classmethod
    def half_wavelength(cls, m_h: int, m_v: int,
                        wavelength: float = 1.0) -> "ArrayGeometry":
        return cls(m_h, m_v, wavelength / 2, wavelength / 2, wavelength)


@dataclass(frozen=True)
class Mpc:
    """One multipath component: complex amplitude, delays and angles."""

    alpha: complex
    tau_design: float
    tau_data: float
    rx_azi: float
    rx_ele: float
    tx_azi: float
    tx_ele: float

    def __post_init__(self):
        if self.tau_design < 0 or self.tau_data < 0:
            raise ConfigError("MPC delays must be non-negative")


@dataclass(frozen=True)
class ChannelSnapshot:
    """A set of MPCs plus array geometries and the TX beamforming vector."""

    mpcs: tuple
    rx_geom: ArrayGeometry
    tx_geom: ArrayGeometry
    tx_beam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mpcs", tuple(self.mpcs))
        if len(self.mpcs) < 1:
            raise ConfigError("snapshot needs at least one MPC")
        beam = np.asarray(self.tx_beam, dtype=complex)
        if beam.shape != (self.tx_geom.m,):
            raise ConfigError("tx_beam length must equal the TX element count")
        if abs(np.linalg.norm(beam) - 1.0) > 1e-9:
            raise ConfigError("tx_beam must be unit norm")
        object.__setattr__(self, "tx_beam", _freeze(beam))

    @property
    def n_paths(self) -> int:
        return len(self.mpcs)

    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.mpcs])

    def delays(self, phase: str) -> np.ndarray:
        if phase == "design":
            return np.array([p.tau_design for p in self.mpcs])
        if phase == "data":
            return np.array([p.tau_data for p in self.mpcs])
        raise ConfigError(f"unknown channel phase {phase!r}")

    def rx_responses(self) -> np.ndarray:
        """(n_paths, m_rx) stack of RX array response vectors."""
        return np.stack([array_response(self.rx_geom, p.rx_azi, p.rx_ele)
                         for p in self.mpcs])

    def tx_gains(self) -> np.ndarray:
        """Per-path TX beamforming gain a_tx(l)^H t."""
        atx = np.stack([array_response(self.tx_geom, p.tx_azi, p.tx_ele)
                        for p in self.mpcs])
        return atx.conj() @ self.tx_beam


def array_response(geom: ArrayGeometry, azi: float, ele: float) -> np.ndarray:
    """Planar-array phasor signature of a plane wave from (azi, ele).

    Kronecker product of the horizontal progression (driven by
    sin(azi)*sin(ele)) and the vertical progression (driven by cos(ele));
    every entry has unit magnitude and the first entry is exactly 1.
    """
    kh = 2 * np.pi * geom.delta_h * np.sin(azi) * np.sin(ele) / geom.wavelength
    kv = 2 * np.pi * geom.delta_v * np.cos(ele) / geom.wavelength
    horiz = np.exp(1j * kh * np.arange(geom.m_h))
    vert = np.exp(1j * kv * np.arange(geom.m_v))
    return np.kron(horiz, vert)


def freq_channel_matrix(snap: ChannelSnapshot, params: SystemParams,
                        f_k: float, phase: str = "design") -> np.ndarray:
    """Frequency-domain channel matrix at subcarrier offset f_k (m_rx x m_tx).

    The delay phasor runs at params.f_c + f_k; phase selects the design- or
    data-phase delay set.
    """
    taus = snap.delays(phase)
    arx = snap.rx_responses()
    atx = np.stack([array_response(snap.tx_geom, p.tx_azi, p.tx_ele)
                    for p in snap.mpcs])
    phasors = snap.alphas() * np.exp(-1j * 2 * np.pi * (params.f_c + f_k) * taus)
    return np.einsum("l,lm,ln->mn", phasors, arx, atx.conj())


def beam_channel(snap: ChannelSnapshot, params: SystemParams,
                 freqs: np.ndarray, phase: str) -> np.ndarray:
    """H(f) t stacked over freqs: shape (len(freqs), m_rx).

    Factored per-path evaluation; equal to freq_channel_matrix(...) @ tx_beam
    at every frequency but O(L*(K + M)) instead of O(L*K*M*M_tx).
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    taus = snap.delays(phase)
    eff = snap.alphas() * snap.tx_gains()
    phasors = np.exp(-1j * 2 * np.pi * np.outer(params.f_c + freqs, taus))
    return (phasors * eff) @ snap.rx_responses()


def ref_tone_amplitudes(snap: ChannelSnapshot,
                        params: SystemParams) -> np.ndarray:
    """Complex reference-tone amplitude at each RX antenna.

    Equals sqrt(e_r / t_cs) * (design-phase channel at the reference
    frequency applied to the TX beam).
    """
    h0 = beam_channel(snap, params, np.array([0.0]), "design")[0]
    return np.sqrt(params.e_r / params.t_cs) * h0


def fading_coupling(snap: ChannelSnapshot, drift_freq: float,
                    offset_freq: float) -> complex:
    """Frequency-coupling sum quantifying imperfect MRC across subcarriers.

    drift_freq couples to the design-to-data delay drift, offset_freq to the
    absolute data-phase delay. At (0, 0) this is the total beamformed path
    power, a positive real.
    """
    tau_d = snap.delays("design")
    tau = snap.delays("data")
    w = np.abs(snap.alphas() * snap.tx_gains()) ** 2
    phase = 2 * np.pi * (drift_freq * (tau_d - tau) - offset_freq * tau)
    return complex(np.sum(w * np.exp(1j * phase)))


def check_orthogonality(snap: ChannelSnapshot) -> float:
    """Max normalized cross-correlation |a_rx(l)^H a_rx(i)| / m_rx, l != i."""
    if snap.n_paths < 2:
        raise ConfigError("orthogonality check needs at least 2 MPCs")
    arx = snap.rx_responses()
    gram = np.abs(arx.conj() @ arx.T) / snap.rx_geom.m
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


def apply_mobility(snap: ChannelSnapshot, distance: float,
                   motion_azi: float) -> ChannelSnapshot:
    """Shift data-phase delays for a receiver displacement of `distance`.

    Plane-wave path-length change projected on each arrival direction;
    negative results clamp to zero. Amplitudes and angles are untouched.
    """
    new = []
    for p in snap.mpcs:
        shift = (distance / SPEED_OF_LIGHT) * np.sin(p.rx_ele) \
            * np.cos(motion_azi - p.rx_azi)
        tau = max(0.0, p.tau_design - shift)
        new.append(Mpc(p.alpha, p.tau_design, tau, p.rx_azi, p.rx_ele,
                       p.tx_azi, p.tx_ele))
    return ChannelSnapshot(tuple(new), snap.rx_geom, snap.tx_geom,
                           snap.tx_beam)


# ---------------------------------------------------------------------------
# built-in deterministic fixture
# ---------------------------------------------------------------------------

SPARSE_TX_AZI = (0.0, np.pi / 5, -np.pi / 4)
SPARSE_TX_ELE = (np.pi / 2, 0.4 * np.pi, 0.55 * np.pi)


def sparse_three_path_snapshot(f_c: float = 30e9) -> ChannelSnapshot:
    """Deterministic sparse 3-MPC scenario (16x4 RX, 32x8 TX, lambda/2).

    Design delays {0, 20, 40} ns with data delays shifted {30, 25, 25} ps;
    arrival angles azi {0, pi/6, -pi/6}, ele {0.45pi, pi/2, pi/2}. The TX
    beam aligns with the strongest path and the amplitudes are scaled so
    the normalized beamformed path powers are {0.6, 0.3, 0.1} and the total
    beamformed power is exactly 1.
    """
    rx = ArrayGeometry.half_wavelength(16, 4)
    tx = ArrayGeometry.half_wavelength(32, 8)
    rx_azi = (0.0, np.pi / 6, -np.pi / 6)
    rx_ele = (0.45 * np.pi, np.pi / 2, np.pi / 2)
    tau_design = (0.0, 20e-9, 40e-9)
    drift = (30e-12, 25e-12, 25e-12)
    targets = np.array([np.sqrt(0.6), -np.sqrt(0.3), np.sqrt(0.1)])

    atx = np.stack([array_response(tx, SPARSE_TX_AZI[i], SPARSE_TX_ELE[i])
                    for i in range(3)])
    beam = atx[0] / np.sqrt(tx.m)
    alphas = targets / (atx.conj() @ beam)
    mpcs = tuple(
        Mpc(alphas[i], tau_design[i], tau_design[i] + drift[i],
            rx_azi[i], rx_ele[i], SPARSE_TX_AZI[i], SPARSE_TX_ELE[i])
        for i in range(3))
    return ChannelSnapshot(mpcs, rx, tx, beam)


# ---------------------------------------------------------------------------
# stochastic cluster/ray generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterParams:
    """Knobs of the simplified cluster/ray channel generator.

    Only the intra-cluster spreads (1 ns delay, pi/50 angles) and the
    sub-path count (10) are pinned by the modelled scenario; the remaining
    constants are documented defaults.
    """

    n_subpaths: int = 10
    max_delay: float = 100e-9          # all delays must fit inside the CP
    delay_scale: float = 30e-9         # mean of the exponential cluster delays
    power_decay: float = 30e-9         # e-folding delay of cluster power
    shadow_std_db: float = 3.0         # per-cluster log-normal shadowing
    intra_delay_spread: float = 1e-9   # exponential sub-path delay offsets
    intra_angle_spread: float = np.pi / 50  # gaussian, all 4 angle dims
    azi_low: float = -np.pi
    azi_high: float = np.pi
    ele_low: float = np.pi / 4
    ele_high: float = 3 * np.pi / 4


def stochastic_channel(n_clusters: int, seed,
                       cluster_params: ClusterParams | None = None,
                       rx_geom: ArrayGeometry | None = None,
                       tx_geom: ArrayGeometry | None = None) -> ChannelSnapshot:
    """Draw a cluster/ray channel with n_clusters x n_subpaths MPCs.

    Cluster delays follow an exponential profile inside [0, max_delay) with
    exponentially decaying, shadowed powers and uniform angles; sub-paths
    are equal-power with i.i.d. uniform phases and small delay/angle offsets.
    Total power is normalized to 1 and the TX beam aligns with the nominal
    departure direction of the strongest cluster. Same seed, same snapshot.
    """
    if n_clusters < 1:
        raise ConfigError("n_clusters must be at least 1")
    cp = cluster_params or ClusterParams()
    rx_geom = rx_geom or ArrayGeometry.half_wavelength(16, 4)
    tx_geom = tx_geom or ArrayGeometry.half_wavelength(32, 8)
    rng = np.random.default_rng(seed)
    ns = cp.n_subpaths

    for _ in range(1000):
        delays = np.sort(rng.exponential(cp.delay_scale, n_clusters))
        delays = delays - delays[0]
        offsets = rng.exponential(cp.intra_delay_spread, (n_clusters, ns)) \
            if cp.intra_delay_spread > 0 else np.zeros((n_clusters, ns))
        if (delays[:, None] + offsets).max() < cp.max_delay:
            break
    else:
        raise ConfigError("could not fit cluster delays inside max_delay")

    shadow = rng.normal(0.0, cp.shadow_std_db, n_clusters)
    powers = np.exp(-delays / cp.power_decay) * 10.0 ** (shadow / 10.0)

    rx_azi = rng.uniform(cp.azi_low, cp.azi_high, n_clusters)
    rx_ele = rng.uniform(cp.ele_low, cp.ele_high, n_clusters)
    tx_azi = rng.uniform(cp.azi_low, cp.azi_high, n_clusters)
    tx_ele = rng.uniform(cp.ele_low, cp.ele_high, n_clusters)
    ang_off = rng.normal(0.0, cp.intra_angle_spread, (4, n_clusters, ns)) \
        if cp.intra_angle_spread > 0 else np.zeros((4, n_clusters, ns))
    phases = rng.uniform(0.0, 2 * np.pi, (n_clusters, ns))

    amps = np.sqrt(powers[:, None] / ns) * np.exp(1j * phases)
    amps = amps / np.linalg.norm(amps)

    strongest = int(np.argmax(powers))
    beam = array_response(tx_geom, tx_azi[strongest], tx_ele[strongest])
    beam = beam / np.linalg.norm(beam)

    mpcs = []
    for c in range(n_clusters):
        for s in range(ns):
            tau = delays[c] + offsets[c, s]
            mpcs.append(Mpc(
                amps[c, s], tau, tau,
                rx_azi[c] + ang_off[0, c, s], rx_ele[c] + ang_off[1, c, s],
                tx_azi[c] + ang_off[2, c, s], tx_ele[c] + ang_off[3, c, s]))
    return ChannelSnapshot(tuple(mpcs), rx_geom, tx_geom, beam)


def cluster_powers(snap: ChannelSnapshot, n_subpaths: int) -> np.ndarray:
    """Per-cluster power (sum over its sub-paths) of a generated snapshot."""
    a = np.abs(snap.alphas()) ** 2
    return a.reshape(-1, n_subpaths).sum(axis=1)


# ---------------------------------------------------------------------------
# JSON serialization of channel fixtures
# ---------------------------------------------------------------------------

def _c2j(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def snapshot_to_json(snap: ChannelSnapshot) -> str:
    doc = {
        "rx_geom": vars(snap.rx_geom).copy(),
        "tx_geom": vars(snap.tx_geom).copy(),
        "tx_beam": [_c2j(z) for z in snap.tx_beam],
        "mpcs": [{
            "alpha": _c2j(p.alpha),
            "tau_design": p.tau_design,
            "tau_data": p.tau_data,
            "rx_azi": p.rx_azi, "rx_ele": p.rx_ele,
            "tx_azi": p.tx_azi, "tx_ele": p.tx_ele,
        } for p in snap.mpcs],
    }
    return json.dumps(doc, indent=1)


def snapshot_from_json(text: str) -> ChannelSnapshot:
    doc = json.loads(text)
    rx = ArrayGeometry(**doc["rx_geom"])
    tx = ArrayGeometry(**doc["tx_geom"])
    beam = np.array([complex(re, im) for re, im in doc["tx_beam"]])
    mpcs = tuple(
        Mpc(complex(*m["alpha"]), m["tau_design"], m["tau_data"],
            m["rx_azi"], m["rx_ele"], m["tx_azi"], m["tx_ele"])
        for m in doc["mpcs"])
    return ChannelSnapshot(mpcs, rx, tx, beam)
