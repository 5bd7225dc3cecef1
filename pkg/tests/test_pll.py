import numpy as np
import pytest

from pacesim import (ConfigError, PllConfig, SimulationDiagnosticError,
                     acquisition_time, detect_lock, linear_autocorr,
                     linear_psd, linear_variance, simulate_pll,
                     synth_baseband_noise)
from pacesim.estimation import hold_window
from pacesim.pll import ref_snr_to_n0, trace_to_csv


def _band(params):
    return (-params.k1 / params.t_s, params.k2 / params.t_s)


# ---------------------------------------------------------------------------
# noise synthesis
# ---------------------------------------------------------------------------

def test_noise_zero_psd_is_zero():
    assert np.all(synth_baseband_noise(0.0, 1e-9, 100, 1) == 0)


def test_noise_variance_matches_psd_over_rate():
    n0, dt = 3.7e-8, 0.9766e-9
    w = synth_baseband_noise(n0, dt, 1_000_000, 1234)
    assert np.var(w) == pytest.approx(n0 / dt, rel=0.01)
    # circular symmetry: quadratures carry half the power each
    assert np.var(w.real) == pytest.approx(n0 / (2 * dt), rel=0.02)


def test_noise_deterministic_and_empty():
    a = synth_baseband_noise(1e-8, 1e-9, 64, 77)
    b = synth_baseband_noise(1e-8, 1e-9, 64, 77)
    np.testing.assert_array_equal(a, b)
    assert synth_baseband_noise(1e-8, 1e-9, 0, 1).shape == (0,)


# ---------------------------------------------------------------------------
# nonlinear loop
# ---------------------------------------------------------------------------

def test_equilibrium_stays_at_zero(pll_config):
    cfg = PllConfig(epsilon=pll_config.epsilon,
                    loop_gain_product=pll_config.loop_gain_product,
                    f_offset=0.0, dt=pll_config.dt, duration=1e-5)
    noise = np.zeros(cfg.n_steps, dtype=complex)
    trace = simulate_pll(cfg, 1.0, noise)
    assert np.max(np.abs(trace.theta[:10_000])) < 1e-9


def test_no_noise_table_constants_lock_within_3us(pll_config):
    noise = np.zeros(pll_config.n_steps, dtype=complex)
    trace = simulate_pll(pll_config, 1.0, noise)
    slope = np.abs(np.diff(trace.theta)) / pll_config.dt
    i3 = int(3e-6 / pll_config.dt)
    assert slope[i3] < 0.01 * 2 * np.pi * pll_config.f_offset
    # settles onto a multiple of the full cycle
    assert trace.theta[-1] == pytest.approx(
        2 * np.pi * round(trace.theta[-1] / (2 * np.pi)), abs=1e-3)
    # consistent with the acquisition-time estimate (1 us)
    assert acquisition_time(pll_config, 1.0) <= 3e-6


def test_complex_amplitude_equilibrium(pll_config):
    # the lock-phase pre-rotation makes any input phase an equilibrium
    cfg = PllConfig(pll_config.epsilon, pll_config.loop_gain_product, 0.0,
                    pll_config.dt, 2e-6)
    noise = np.zeros(cfg.n_steps, dtype=complex)
    trace = simulate_pll(cfg, 0.7 * np.exp(1j * 2.1), noise)
    assert np.max(np.abs(trace.theta)) < 1e-9


def test_simulate_rejects_zero_amplitude(pll_config):
    with pytest.raises(ConfigError):
        simulate_pll(pll_config, 0.0, np.zeros(pll_config.n_steps, complex))


def test_simulate_rejects_short_noise(pll_config):
    with pytest.raises(ConfigError):
        simulate_pll(pll_config, 1.0, np.zeros(10, dtype=complex))


def test_instability_diagnostic():
    cfg = PllConfig(epsilon=4e6, loop_gain_product=np.pi * 5e6,
                    f_offset=5e10, dt=1e-9, duration=6e-6)
    with pytest.raises(SimulationDiagnosticError):
        simulate_pll(cfg, 1.0, np.zeros(cfg.n_steps, dtype=complex))


def test_trace_deterministic(pll_config):
    n0 = 2e-8
    a = simulate_pll(pll_config, 1.0,
                     synth_baseband_noise(n0, pll_config.dt,
                                          pll_config.n_steps, 5))
    b = simulate_pll(pll_config, 1.0,
                     synth_baseband_noise(n0, pll_config.dt,
                                          pll_config.n_steps, 5))
    np.testing.assert_array_equal(a.theta, b.theta)


# ---------------------------------------------------------------------------
# acquisition time
# ---------------------------------------------------------------------------

def test_acquisition_zero_offset(pll_config):
    cfg = PllConfig(pll_config.epsilon, pll_config.loop_gain_product, 0.0,
                    pll_config.dt, 1e-6)
    assert acquisition_time(cfg, 1.0) == 0.0


def test_acquisition_table_constants_is_one_symbol(pll_config, params):
    # (1/epsilon) * (2 pi f_off / gain product)^2 evaluated independently
    expected = (1 / 4e6) * (2 * np.pi * 5e6 / (np.pi * 5e6)) ** 2
    assert expected == pytest.approx(1e-6, rel=1e-12)
    assert acquisition_time(pll_config, 1.0) == pytest.approx(params.t_s,
                                                              rel=1e-12)


def test_acquisition_quadratic_in_offset(pll_config):
    double = PllConfig(pll_config.epsilon, pll_config.loop_gain_product,
                       2 * pll_config.f_offset, pll_config.dt,
                       pll_config.duration)
    assert acquisition_time(double, 1.0) == pytest.approx(
        4 * acquisition_time(pll_config, 1.0), rel=1e-12)


# ---------------------------------------------------------------------------
# locked-state closed forms
# ---------------------------------------------------------------------------

def test_psd_zero_noise(pll_config):
    f = np.linspace(-5e8, 5e8, 11)
    assert np.all(linear_psd(pll_config, 1.0, 0.0, f) == 0)


def test_psd_dc_value(pll_config):
    n0, a1 = 3e-8, 0.8
    val = linear_psd(pll_config, a1, n0, np.array([0.0]))[0]
    assert val == pytest.approx(n0 / (2 * a1 ** 2), rel=1e-12)


def test_psd_band_quadrature_matches_band_variance(pll_config, params):
    # oracle: dense trapezoid of an independently coded transfer function
    n0, a1 = 2.03e-8, 1.0
    band = _band(params)
    stats = linear_variance(pll_config, a1, n0, band=band)
    g = pll_config.loop_gain_product / a1
    f = np.linspace(band[0], band[1], 400_001)
    w2 = (2 * np.pi * f) ** 2
    oracle_psd = g ** 2 * (w2 + pll_config.epsilon ** 2) * n0 / (
        2 * np.abs(-w2 + g * (1j * 2 * np.pi * f + pll_config.epsilon)
                   * a1) ** 2)
    oracle = np.trapezoid(oracle_psd, f)
    assert stats.band_variance == pytest.approx(oracle, rel=0.005)
    assert stats.band_variance <= stats.variance_bound + 1e-12


def test_autocorr_zero_lag_identity(pll_config):
    rng = np.random.default_rng(3)
    for _ in range(200):
        eps = rng.uniform(1e5, 1e8)
        ga = rng.uniform(1e5, 1e8)
        n0 = rng.uniform(1e-10, 1e-6)
        a1 = rng.uniform(0.05, 5.0)
        cfg = PllConfig(epsilon=eps, loop_gain_product=ga, f_offset=0.0,
                        dt=0.01 / ga, duration=1e-6)
        r0 = linear_autocorr(cfg, a1, n0, 0.0)
        assert r0 == pytest.approx(n0 * (ga + eps) / (4 * a1 ** 2),
                                   rel=1e-9)


def test_autocorr_even_and_decaying(pll_config):
    n0 = 1e-8
    taus = np.array([1e-8, 5e-8, 2e-7])
    pos = linear_autocorr(pll_config, 1.0, n0, taus)
    neg = linear_autocorr(pll_config, 1.0, n0, -taus)
    np.testing.assert_allclose(pos, neg, rtol=1e-12)
    far = linear_autocorr(pll_config, 1.0, n0,
                          100.0 / pll_config.loop_gain_product)
    assert abs(far) < 1e-12 * linear_autocorr(pll_config, 1.0, n0, 0.0)


def test_variance_reference_point(pll_config):
    # independent arithmetic: N0 (G|A1| + eps) / (4 |A1|^2) at the reference
    # constants gives ~0.10 rad^2
    n0 = 2.03e-8
    expected = n0 * (np.pi * 5e6 + 4e6) / 4.0
    assert expected == pytest.approx(0.100, rel=0.01)
    stats = linear_variance(pll_config, 1.0, n0)
    assert stats.variance == pytest.approx(expected, rel=1e-12)
    assert stats.variance <= stats.variance_bound + 1e-12


def test_variance_zero_noise_and_scaling(pll_config):
    assert linear_variance(pll_config, 1.0, 0.0).variance == 0.0
    v1 = linear_variance(pll_config, 1.0, 1e-8).variance
    v3 = linear_variance(pll_config, 1.0, 3e-8).variance
    assert v3 == pytest.approx(3 * v1, rel=1e-12)


def test_variance_rejects_zero_amplitude(pll_config):
    with pytest.raises(ConfigError):
        linear_variance(pll_config, 0.0, 1e-8)


def test_poles_complex_regime_at_reference_constants(pll_config):
    stats = linear_variance(pll_config, 1.0, 1e-8)
    # reference constants sit in the complex-conjugate pole regime
    assert abs(stats.pole_a.imag) > 0
    assert stats.pole_a == pytest.approx(np.conj(stats.pole_b), rel=1e-12)
    assert (stats.pole_a + stats.pole_b).real == pytest.approx(
        pll_config.loop_gain_product, rel=1e-12)
    assert (stats.pole_a * stats.pole_b).real == pytest.approx(
        pll_config.loop_gain_product * pll_config.epsilon, rel=1e-12)


# ---------------------------------------------------------------------------
# Monte-Carlo agreement (smoke versions; acceptance runs the full sizes)
# ---------------------------------------------------------------------------

def test_linear_sim_variance_matches_closed_form(pll_config, params):
    n0 = 2.03e-8
    expected = linear_variance(pll_config, 1.0, n0).variance
    i1, i2 = hold_window(params, pll_config.dt)
    samples = []
    for t in range(150):
        noise = synth_baseband_noise(n0, pll_config.dt, pll_config.n_steps,
                                     (42, t))
        trace = simulate_pll(pll_config, 1.0, noise, linear=True)
        samples.append(trace.theta[i1:i2])
    pooled = np.concatenate(samples)
    assert pooled.var() == pytest.approx(expected, rel=0.08)


def test_nonlinear_locked_variance_near_linear_theory(pll_config, params):
    n0 = ref_snr_to_n0(20.0, 1.0, params.t_s)   # Var ~ 0.05
    expected = linear_variance(pll_config, 1.0, n0).variance
    i1, i2 = hold_window(params, pll_config.dt)
    samples = []
    for t in range(500):
        noise = synth_baseband_noise(n0, pll_config.dt, pll_config.n_steps,
                                     (43, t))
        trace = simulate_pll(pll_config, 1.0, noise)
        seg = trace.theta[i1:i2]
        samples.append(seg - seg.mean())
    pooled = np.concatenate(samples)
    assert pooled.var() == pytest.approx(expected, rel=0.10)


# ---------------------------------------------------------------------------
# lock detection and export
# ---------------------------------------------------------------------------

def _manual_trace(theta, pll_config):
    from pacesim.pll import PllTrace
    cfg = PllConfig(pll_config.epsilon, pll_config.loop_gain_product,
                    pll_config.f_offset, pll_config.dt,
                    len(theta) * pll_config.dt)
    return PllTrace(theta=np.asarray(theta, float), dt=pll_config.dt,
                    lock_phase=0.0, config=cfg)


def test_detect_lock_zero_trace(pll_config):
    trace = _manual_trace(np.zeros(2000), pll_config)
    assert detect_lock(trace, 0.2e-6, 1e4) == 0.0


def test_detect_lock_ramp_never_locks(pll_config):
    ramp = np.arange(2000) * pll_config.dt * 2 * np.pi * 5e6
    trace = _manual_trace(ramp, pll_config)
    assert detect_lock(trace, 0.2e-6, 0.01 * 2 * np.pi * 5e6) is None


def test_detect_lock_reference_trace_within_3us(pll_config):
    noise = np.zeros(pll_config.n_steps, dtype=complex)
    trace = simulate_pll(pll_config, 1.0, noise)
    t_lock = detect_lock(trace, 0.2e-6, 0.01 * 2 * np.pi * pll_config.f_offset)
    assert t_lock is not None
    assert t_lock <= 3e-6


def test_kernel_paths_agree(pll_config):
    # jitted and pure-Python kernels produce the same trajectory
    from pacesim._kernels import _pll_loop_py, pll_loop
    noise = synth_baseband_noise(2e-8, pll_config.dt, 2000, 3)
    args = (noise, pll_config.dt, pll_config.loop_gain_product, 4e6,
            2 * np.pi * 5e6, 1.0, 0.0, False)
    fast, s1 = pll_loop(*args)
    pure, s2 = _pll_loop_py(*args)
    assert s1 == s2 == 0
    np.testing.assert_allclose(fast, pure, rtol=0, atol=1e-12)


def test_trace_csv_export(tmp_path, pll_config):
    cfg = PllConfig(pll_config.epsilon, pll_config.loop_gain_product, 0.0,
                    pll_config.dt, 1e-7)
    trace = simulate_pll(cfg, 1.0, np.zeros(cfg.n_steps, dtype=complex))
    out = tmp_path / "trace.csv"
    trace_to_csv(trace, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t_seconds,theta_rad"
    assert len(lines) - 1 == cfg.n_steps
