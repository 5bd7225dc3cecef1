"""Experiment orchestration: reproduces the headline Monte-Carlo studies.

Every experiment resolves an ExperimentConfig (per-experiment defaults plus
overrides), fans trials out over deterministic RNG streams derived from
(master_seed, stream tag, trial, antenna), and reduces rows in
grid/scheme/trial order, so a fixed config yields byte-identical CSV output.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import arraying as ar
from . import channel as ch
from . import estimation as est
from . import link
from . import pll
from .errors import ConfigError

EXPERIMENTS = ("fig3", "ise_vs_snr", "ise_vs_l", "pll_trace", "overhead")
RECOVERIES = ("one_pll", "arrayed")
MODES = ("nonlinear", "analytic")

# disjoint per-purpose RNG stream tags
_TAG = {"fig3": 101, "ise_vs_snr": 102, "ise_vs_l": 103, "pll_trace": 104,
        "mobility": 105, "channel": 106, "draws": 107}


def stream(master_seed: int, tag: str, *key: int) -> np.random.Generator:
    """Deterministic, order-independent RNG stream for one trial/antenna."""
    return np.random.default_rng(
        np.random.SeedSequence((int(master_seed), _TAG[tag]) + tuple(
            int(k) for k in key)))


@dataclass
class ExperimentConfig:
    experiment: str
    scenario: str = "sparse_fixture"        # sparse_fixture | stochastic
    recovery: str = "one_pll"               # one_pll | arrayed
    mode: str = "nonlinear"                 # nonlinear | analytic
    snr_db_grid: tuple = tuple(np.arange(0.0, 30.1, 2.5))
    l_grid: tuple = (1, 2, 4, 8, 16)
    trials: int = 500
    n_noise_draws: int = 50                 # per-channel draws (ise_vs_l)
    master_seed: int = 1
    power_allocation: str = "flat"          # flat | waterfill (ise_vs_snr)
    trace_snr_db: float | None = None       # pll_trace only; None = noiseless
    n_beams_grid: tuple = (167,)
    t_acsi: float = 10e-3
    pace_pilots: int = 6
    sparse_ruler_pilots: int = 21
    exhaustive_pilots: int = 64
    system: dict = field(default_factory=dict)
    pll_overrides: dict = field(default_factory=dict)
    arraying_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.recovery == "analytic_var":
            # accepted alias: analytic statistics of the arrayed recovery
            self.recovery = "arrayed"
            self.mode = "analytic"
        if self.recovery not in RECOVERIES:
            raise ConfigError(f"unknown recovery {self.recovery!r}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.scenario not in ("sparse_fixture", "stochastic"):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.n_noise_draws < 1:
            raise ConfigError("n_noise_draws must be at least 1")
        self.snr_db_grid = tuple(float(s) for s in self.snr_db_grid)
        self.l_grid = tuple(int(v) for v in self.l_grid)
        self.n_beams_grid = tuple(int(v) for v in self.n_beams_grid)
        if not self.snr_db_grid or not self.l_grid or not self.n_beams_grid:
            raise ConfigError("grids must not be empty")
        if any(v < 1 for v in self.l_grid):
            raise ConfigError("l_grid entries must be at least 1")
        if self.power_allocation not in ("flat", "waterfill"):
            raise ConfigError(
                f"unknown power allocation {self.power_allocation!r}")
        if self.experiment in ("fig3", "ise_vs_snr", "ise_vs_l",
                               "pll_trace") and "n0" in self.system:
            raise ConfigError("n0 is derived from the SNR axis; "
                              "it cannot be overridden here")
        for label, doc, cls in (
                ("system", self.system, ch.SystemParams),
                ("pll_overrides", self.pll_overrides, pll.PllConfig),
                ("arraying_overrides", self.arraying_overrides,
                 ar.ArrayingConfig)):
            allowed = {f.name for f in dataclasses.fields(cls)}
            bad = set(doc) - allowed
            if bad:
                raise ConfigError(f"unknown {label} keys: {sorted(bad)}")


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    """Per-experiment defaults, overridable by keyword or config-file keys."""
    defaults: dict = {"experiment": experiment}
    if experiment == "fig3":
        defaults.update(recovery="one_pll", mode="nonlinear", trials=500,
                        snr_db_grid=tuple(np.arange(0.0, 30.1, 2.5)))
    elif experiment == "ise_vs_snr":
        defaults.update(scenario="sparse_fixture", mode="nonlinear",
                        trials=300,
                        snr_db_grid=tuple(np.arange(-10.0, 30.1, 2.5)))
    elif experiment == "ise_vs_l":
        defaults.update(scenario="stochastic", recovery="arrayed",
                        mode="analytic", trials=200, n_noise_draws=50)
    elif experiment == "pll_trace":
        defaults.update(recovery="one_pll")
    elif experiment == "overhead":
        pass
    else:
        raise ConfigError(f"unknown experiment {experiment!r}")
    defaults.update(overrides)
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(defaults) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**defaults)


@dataclass
class ResultRow:
    experiment: str
    scheme: str
    x_value: float
    ise_mean: float | None
    ise_std: float | None
    gamma_mean: float | None
    aux_variance: float | None
    aux_mean_factor: float | None
    aux_analytic: float | None
    overhead_fraction: float | None
    trials: int
    seed: int


RESULT_FIELDS = [f.name for f in dataclasses.fields(ResultRow)]


# ---------------------------------------------------------------------------
# fixture builders (modelled scenario defaults)
# ---------------------------------------------------------------------------

def default_system_params(n0: float = 1.0, **overrides) -> ch.SystemParams:
    """1024-subcarrier grid, 1 us symbols, 30 GHz carrier, 6-symbol design
    phase split 4+2, reference energy 20x the per-subcarrier data energy."""
    base = dict(k1=512, k2=511, t_s=1e-6, t_cp=0.1e-6, f_c=30e9,
                e_cs=1024.0, e_r=20.0, n0=n0, d1=4, d2=2)
    base.update(overrides)
    return ch.SystemParams(**base)


def default_pll_config(params: ch.SystemParams, **overrides) -> pll.PllConfig:
    """Reference loop constants: gain product pi*5e6, zero 4/t_s, 5 MHz
    offset, one step per noise sample, runs the whole design phase."""
    base = dict(epsilon=4 / params.t_s,
                loop_gain_product=np.pi * 5e6,
                f_offset=5e6,
                dt=params.t_s / params.k,
                duration=params.d * params.t_cs - params.t_cp)
    base.update(overrides)
    return pll.PllConfig(**base)


def default_arraying_config(params: ch.SystemParams,
                            **overrides) -> ar.ArrayingConfig:
    """Arrayed recovery at antennas (0, 4, 14) [zero-based], secondary gain
    product 2*pi/t_s, primary rule pi*5e6, zero 4/t_s, 1 GHz IF."""
    base = dict(antenna_set=(0, 4, 14),
                mu=2 * np.pi / params.t_s,
                gp_rule=np.pi * 5e6,
                epsilon_p=4 / params.t_s,
                f_if=1e9,
                f_offset_p=5e6,
                dt=params.t_s / params.k,
                duration=params.d * params.t_cs - params.t_cp)
    base.update(overrides)
    return ar.ArrayingConfig(**base)


def fig3_reference_amplitudes(n_antennas: int = 15) -> np.ndarray:
    """Accuracy-experiment amplitudes placed at the arrayed antenna indices.

    Antenna 0 carries 1, antenna 4 carries 0.7 e^{j pi/3}, antenna 14
    carries 0.5 e^{-j pi/3}; every other antenna is 0 (unused).
    """
    full = np.zeros(n_antennas, dtype=complex)
    full[0] = 1.0
    full[4] = 0.7 * np.exp(1j * np.pi / 3)
    full[14] = 0.5 * np.exp(-1j * np.pi / 3)
    return full


def recovery_phase_variance(cfg: ExperimentConfig, params: ch.SystemParams,
                            amplitudes: np.ndarray, recovery: str) -> float:
    """Closed-form locked-state phase variance of the selected recovery.

    amplitudes is the full per-antenna amplitude vector; the arrayed branch
    picks out its antenna subset.
    """
    if recovery == "one_pll":
        a1 = abs(amplitudes[0])
        if a1 == 0:
            return float("inf")
        pcfg = default_pll_config(params, **cfg.pll_overrides)
        return pll.linear_variance(pcfg, a1, params.n0).variance
    acfg = default_arraying_config(params, **cfg.arraying_overrides)
    rss = ar.rss_amplitude(np.asarray(amplitudes)[list(acfg.antenna_set)])
    if rss == 0:
        return float("inf")
    return ar.arrayed_linear_variance(acfg, rss, params.n0)[0]


def _simulate_recovery_trace(cfg: ExperimentConfig, params: ch.SystemParams,
                             amplitudes: np.ndarray, recovery: str,
                             snr_idx: int, trial: int):
    """One recovery-circuit run.

    amplitudes is the full per-antenna vector; returns (trace, streams)
    where streams maps antenna index -> the noise stream that drove it.
    """
    if recovery == "one_pll":
        pcfg = default_pll_config(params, **cfg.pll_overrides)
        rng = stream(cfg.master_seed, cfg.experiment, snr_idx, trial, 0)
        noise = pll.synth_baseband_noise(params.n0, pcfg.dt, pcfg.n_steps, rng)
        trace = pll.simulate_pll(pcfg, amplitudes[0], noise)
        return trace, {0: noise}
    acfg = default_arraying_config(params, **cfg.arraying_overrides)
    streams = {}
    rows = np.empty((len(acfg.antenna_set), acfg.n_steps), dtype=complex)
    for i, m in enumerate(acfg.antenna_set):
        rng = stream(cfg.master_seed, cfg.experiment, snr_idx, trial, m)
        rows[i] = pll.synth_baseband_noise(params.n0, acfg.dt,
                                           acfg.n_steps, rng)
        streams[m] = rows[i]
    sub = np.asarray(amplitudes)[list(acfg.antenna_set)]
    trace = ar.simulate_arrayed_pll(acfg, sub, rows)
    return trace, streams


# ---------------------------------------------------------------------------
# experiment: recovery-accuracy curves (mean coherence factor vs SNR)
# ---------------------------------------------------------------------------

def run_fig3(cfg: ExperimentConfig) -> list:
    """Mean and spread of the hold-window coherence factor vs input SNR."""
    amps = fig3_reference_amplitudes()
    t_s = default_system_params(n0=1.0, **cfg.system).t_s
    rows = []
    for snr_idx, snr_db in enumerate(cfg.snr_db_grid):
        n0 = pll.ref_snr_to_n0(snr_db, abs(amps[0]), t_s)
        params = default_system_params(n0=n0, **cfg.system)
        var = recovery_phase_variance(cfg, params, amps, cfg.recovery)
        analytic = float(np.exp(-var / 2))
        factors = np.empty(cfg.trials)
        for t in range(cfg.trials):
            trace, _ = _simulate_recovery_trace(cfg, params, amps,
                                                cfg.recovery, snr_idx, t)
            factors[t] = est.phase_coherence(trace, params)
        rows.append(ResultRow(
            experiment=cfg.experiment, scheme=cfg.recovery,
            x_value=float(snr_db),
            ise_mean=None, ise_std=None, gamma_mean=None,
            aux_variance=float(np.mean((factors - analytic) ** 2)),
            aux_mean_factor=float(factors.mean()),
            aux_analytic=analytic,
            overhead_fraction=None,
            trials=cfg.trials, seed=cfg.master_seed))
    return rows


# ---------------------------------------------------------------------------
# experiment: spectral efficiency vs SNR on the sparse fixture
# ---------------------------------------------------------------------------

def _gamma_batch(ht_data: np.ndarray, weights: np.ndarray,
                 e_d: np.ndarray, noise_var: float) -> np.ndarray:
    """(n_draws, K) effective SNRs for a batch of combining vectors."""
    sig = np.abs(weights.conj() @ ht_data.T) ** 2
    norms = np.sum(np.abs(weights) ** 2, axis=1)
    return sig * e_d / (norms[:, None] * noise_var)


def _ise_rows(gammas: np.ndarray) -> np.ndarray:
    return np.mean(np.log2(1.0 + gammas), axis=1)


def run_ise_vs_snr(cfg: ExperimentConfig) -> list:
    """PACE (both recoveries) vs statistical and ideal-MRC baselines."""
    if cfg.scenario != "sparse_fixture":
        raise ConfigError("ise_vs_snr runs on the sparse fixture")
    params0 = default_system_params(**cfg.system)
    snap = ch.sparse_three_path_snapshot(f_c=params0.f_c)
    b00 = ch.fading_coupling(snap, 0.0, 0.0).real
    ht_data = ch.beam_channel(snap, params0, params0.subcarrier_freqs(),
                              "data")
    h0_design = ch.beam_channel(snap, params0, np.array([0.0]), "design")[0]
    v_stat = link.statistical_beamformer(snap, params0)
    rows = []
    for snr_idx, snr_db in enumerate(cfg.snr_db_grid):
        n0 = b00 * params0.e_cs / (params0.k * 10 ** (snr_db / 10))
        params = params0.with_n0(n0)
        noise_var = link.demod_noise_var(params)
        amps = ch.ref_tone_amplitudes(snap, params)
        unit = params.with_e_d(np.ones(params.k))

        def alloc_for(unit_gains):
            # per-subcarrier energies: flat budget split, or water-filling
            # on the scheme's nominal (noise-free) per-unit-energy gains
            if cfg.power_allocation == "flat":
                return params
            return params.with_e_d(
                link.waterfill(unit_gains, params.e_cs).e_d)

        for recovery in RECOVERIES:
            var = recovery_phase_variance(cfg, params, amps, recovery)
            params_s = alloc_for(link.effective_snr(h0_design, snap, unit))
            weights = np.empty((cfg.trials, snap.rx_geom.m), dtype=complex)
            for t in range(cfg.trials):
                if cfg.mode == "nonlinear":
                    trace, streams = _simulate_recovery_trace(
                        cfg, params_s, amps, recovery, snr_idx, t)
                    rng_eq = stream(cfg.master_seed, "draws", snr_idx, t,
                                    1 if recovery == "arrayed" else 0)
                    estimate = est.integrate_and_hold(
                        snap, params_s, trace, streams, rng_eq)
                else:
                    rng = stream(cfg.master_seed, "draws", snr_idx, t,
                                 3 if recovery == "arrayed" else 2)
                    estimate = est.analytic_estimate(snap, params_s, var,
                                                     rng)
                weights[t] = estimate.weights
            gammas = _gamma_batch(ht_data, weights, params_s.e_d, noise_var)
            ises = _ise_rows(gammas)
            rows.append(ResultRow(
                experiment=cfg.experiment, scheme=f"pace_{recovery}",
                x_value=float(snr_db),
                ise_mean=float(ises.mean()),
                ise_std=float(ises.std(ddof=1)) if cfg.trials > 1 else 0.0,
                gamma_mean=float(gammas.mean()),
                aux_variance=float(var),
                aux_mean_factor=None,
                aux_analytic=float(link.ise_lower_bound(snap, params_s,
                                                        var)),
                overhead_fraction=None,
                trials=cfg.trials, seed=cfg.master_seed))
        for scheme, vec in (("statistical", v_stat), ("perfect_mrc", None)):
            if vec is None:
                params_s = alloc_for(link.perfect_mrc_snr(snap, unit))
                gamma = link.perfect_mrc_snr(snap, params_s)
            else:
                params_s = alloc_for(link.effective_snr(vec, snap, unit))
                gamma = link.effective_snr(vec, snap, params_s)
            rows.append(ResultRow(
                experiment=cfg.experiment, scheme=scheme,
                x_value=float(snr_db),
                ise_mean=float(link.ise(gamma)),
                ise_std=0.0,
                gamma_mean=float(gamma.mean()),
                aux_variance=None, aux_mean_factor=None, aux_analytic=None,
                overhead_fraction=None,
                trials=cfg.trials, seed=cfg.master_seed))
    return rows


# ---------------------------------------------------------------------------
# experiment: spectral efficiency vs number of MPCs (stochastic channels)
# ---------------------------------------------------------------------------

def run_ise_vs_l(cfg: ExperimentConfig) -> list:
    """PACE (analytic recovery statistics) vs statistical beamforming as the
    number of resolvable paths grows, at fixed 0 dB per-antenna SNR.

    The stochastic scenario uses a single-element TX: the fixed per-antenna
    SNR folds any TX beamforming gain into the axis anyway, and a narrow
    TX beam locked to one cluster would suppress the others ~100x, hiding
    the multi-path frequency selectivity this study measures.
    """
    if cfg.scenario != "stochastic":
        raise ConfigError("ise_vs_l runs on the stochastic scenario")
    if cfg.mode != "analytic":
        raise ConfigError("ise_vs_l uses the analytic recovery model")
    params0 = default_system_params(**cfg.system)
    cp = ch.ClusterParams(max_delay=params0.t_cp)
    tx_omni = ch.ArrayGeometry.half_wavelength(1, 1)
    rows = []
    for l_value in cfg.l_grid:
        pace_means = np.empty(cfg.trials)
        stat_means = np.empty(cfg.trials)
        pace_gamma_sum = 0.0
        stat_gamma_sum = 0.0
        var_sum = 0.0
        for c in range(cfg.trials):
            snap = ch.stochastic_channel(
                l_value,
                np.random.SeedSequence(
                    (cfg.master_seed, _TAG["channel"], l_value, c)),
                cluster_params=cp, tx_geom=tx_omni)
            rng_c = stream(cfg.master_seed, "mobility", l_value, c)
            snap = ch.apply_mobility(snap, 0.02, rng_c.uniform(-np.pi, np.pi))
            b00 = ch.fading_coupling(snap, 0.0, 0.0).real
            params = params0.with_n0(b00 * params0.e_cs / params0.k)
            amps = ch.ref_tone_amplitudes(snap, params)
            var = recovery_phase_variance(cfg, params, amps, cfg.recovery)
            var_sum += var if np.isfinite(var) else 0.0
            ht_data = ch.beam_channel(snap, params,
                                      params.subcarrier_freqs(), "data")
            noise_var = link.demod_noise_var(params)
            rng_d = stream(cfg.master_seed, "draws", l_value, c)
            weights = np.empty((cfg.n_noise_draws, snap.rx_geom.m),
                               dtype=complex)
            for d in range(cfg.n_noise_draws):
                weights[d] = est.analytic_estimate(snap, params, var,
                                                   rng_d).weights
            gammas = _gamma_batch(ht_data, weights, params.e_d, noise_var)
            pace_means[c] = float(_ise_rows(gammas).mean())
            pace_gamma_sum += float(gammas.mean())
            v_stat = link.statistical_beamformer(snap, params)
            g_stat = _gamma_batch(ht_data, v_stat[None, :], params.e_d,
                                  noise_var)[0]
            stat_means[c] = float(np.mean(np.log2(1 + g_stat)))
            stat_gamma_sum += float(g_stat.mean())
        for scheme, means, gsum in (
                (f"pace_{cfg.recovery}", pace_means, pace_gamma_sum),
                ("statistical", stat_means, stat_gamma_sum)):
            rows.append(ResultRow(
                experiment=cfg.experiment, scheme=scheme,
                x_value=float(l_value),
                ise_mean=float(means.mean()),
                ise_std=float(means.std(ddof=1)) if cfg.trials > 1 else 0.0,
                gamma_mean=gsum / cfg.trials,
                aux_variance=(var_sum / cfg.trials
                              if scheme.startswith("pace") else None),
                aux_mean_factor=None, aux_analytic=None,
                overhead_fraction=None,
                trials=cfg.trials, seed=cfg.master_seed))
    return rows


# ---------------------------------------------------------------------------
# experiment: single recovery trace dump
# ---------------------------------------------------------------------------

def run_pll_trace(cfg: ExperimentConfig, out_path) -> int:
    """Dump one recovery trace to CSV; returns the number of sample rows."""
    amps = fig3_reference_amplitudes()
    t_s = default_system_params(n0=1.0, **cfg.system).t_s
    n0 = 0.0 if cfg.trace_snr_db is None else \
        pll.ref_snr_to_n0(cfg.trace_snr_db, abs(amps[0]), t_s)
    params = default_system_params(n0=n0, **cfg.system)
    trace, _ = _simulate_recovery_trace(cfg, params, amps, cfg.recovery, 0, 0)
    if cfg.recovery == "one_pll":
        pll.trace_to_csv(trace, out_path)
    else:
        ar.arrayed_trace_to_csv(trace, out_path)
    return trace.theta.shape[0]


# ---------------------------------------------------------------------------
# experiment: estimation-overhead comparison
# ---------------------------------------------------------------------------

def run_overhead(cfg: ExperimentConfig) -> list:
    params = default_system_params(**cfg.system)
    schemes = (("pace", cfg.pace_pilots),
               ("sparse_ruler", cfg.sparse_ruler_pilots),
               ("exhaustive", cfg.exhaustive_pilots))
    rows = []
    for n_beams in cfg.n_beams_grid:
        for scheme, pilots in schemes:
            frac = link.ce_overhead(pilots, n_beams, params.t_cs, cfg.t_acsi)
            rows.append(ResultRow(
                experiment=cfg.experiment, scheme=scheme,
                x_value=float(n_beams),
                ise_mean=None, ise_std=None, gamma_mean=None,
                aux_variance=None, aux_mean_factor=None, aux_analytic=None,
                overhead_fraction=frac,
                trials=1, seed=cfg.master_seed))
    return rows


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_rows(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(RESULT_FIELDS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(getattr(row, f))
                              for f in RESULT_FIELDS) + "\n")


def write_sidecar(cfg: ExperimentConfig, path) -> None:
    """JSON echo of the fully resolved configuration."""
    doc = dataclasses.asdict(cfg)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg: ExperimentConfig, out_dir) -> list:
    """Run one experiment and write <experiment>.csv plus config sidecar."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{cfg.experiment}.csv")
    if cfg.experiment == "fig3":
        rows = run_fig3(cfg)
        write_rows(rows, csv_path)
    elif cfg.experiment == "ise_vs_snr":
        rows = run_ise_vs_snr(cfg)
        write_rows(rows, csv_path)
    elif cfg.experiment == "ise_vs_l":
        rows = run_ise_vs_l(cfg)
        write_rows(rows, csv_path)
    elif cfg.experiment == "overhead":
        rows = run_overhead(cfg)
        write_rows(rows, csv_path)
    else:  # pll_trace
        run_pll_trace(cfg, csv_path)
        rows = []
    write_sidecar(cfg, os.path.join(out_dir, f"{cfg.experiment}_config.json"))
    return rows
