"""Link-level simulator for reference-tone aided analog beamforming.

Periodic analog channel estimation: a transmitted reference tone is
recovered by one or several phase-locked loops, integrate-and-hold circuits
estimate its per-antenna amplitude/phase, and the resulting combining vector
beamforms wide-band OFDM data. The package simulates the nonlinear recovery
loops, evaluates their closed-form locked-state statistics, and reproduces
the headline link-level experiments.
"""

from .arraying import (ArrayedTrace, ArrayingConfig, arrayed_linear_psd,
                       arrayed_linear_variance, rss_amplitude,
                       simulate_arrayed_pll)
from .channel import (ArrayGeometry, ChannelSnapshot, ClusterParams, Mpc,
                      SystemParams, apply_mobility, array_response,
                      beam_channel, check_orthogonality, fading_coupling,
                      freq_channel_matrix, ref_tone_amplitudes,
                      snapshot_from_json, snapshot_to_json,
                      sparse_three_path_snapshot, stochastic_channel)
from .errors import ConfigError, SimulationDiagnosticError
from .estimation import (PaceEstimate, analytic_estimate, integrate_and_hold,
                         phase_coherence)
from .link import (LinkMetrics, PowerAllocation, ce_overhead, demod_output,
                   effective_snr, ise, ise_lower_bound, perfect_mrc_snr,
                   principal_eigenvector, snr_lower_bound,
                   spatial_correlation, statistical_beamformer, waterfill)
from .pll import (LinearPllStats, PllConfig, PllTrace, acquisition_time,
                  detect_lock, linear_autocorr, linear_psd, linear_variance,
                  simulate_pll, synth_baseband_noise)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
