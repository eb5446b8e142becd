"""adx-lab: distortion / bitrate / sampling-rate tradeoffs for Gaussian
stationary sources, with Monte Carlo and brute-force cross-validation."""

__version__ = "0.1.0"

from .bands import BandSet
from .errors import AdxError, AllocationError, ConvergenceError, InputError
from .pcm import (CQ_FIXED_OPTIMAL, CQ_UNIFORM_ENTROPY, PcmPoint,
                  pcm_distortion, pcm_optimal_rate)
from .quantize import (GridDensity, QuantizerSpec, entropy_rate, lloyd,
                       quantize_sequence, standard_normal, uniform_quantizer,
                       uniform_step_for_entropy)
from .sampling import (AdxPoint, FilterSpec, SamplerConfig, adx_lower_bound,
                       aliased_spectrum, allocate_branches, allpass,
                       best_single_branch_support, critical_rate, d_si,
                       is_aliasing_free, lpf, mmse_lower_bound, mmse_si,
                       optimal_support, ou_critical_rate_closed_form,
                       verify_achievability)
from .simulate import (EmpiricalEstimate, EmpiricalPcmPoint, PathEnsemble,
                       empirical_mmse_config, empirical_mmse_si,
                       grid_autocovariance, load_ensemble, run_pcm_pipeline,
                       save_ensemble, synthesize)
from .spectra import (Psd, flat_psd, integrate_band, load_piecewise, make_psd,
                      multimodal_psd, ou_psd, piecewise_psd,
                      spectral_occupancy, superlevel_set, total_variance,
                      triangular_psd)
from .waterfill import (WaterLevelSolution, discrete_waterfill, kkt_residual,
                        rate_for_distortion, shannon_drf, waterfill_spectrum,
                        weighted_drf)

__all__ = [
    "AdxError", "AdxPoint", "AllocationError", "BandSet", "ConvergenceError",
    "CQ_FIXED_OPTIMAL", "CQ_UNIFORM_ENTROPY", "EmpiricalEstimate",
    "EmpiricalPcmPoint", "FilterSpec", "GridDensity", "InputError",
    "PathEnsemble", "PcmPoint", "Psd", "QuantizerSpec", "SamplerConfig",
    "WaterLevelSolution", "adx_lower_bound", "aliased_spectrum",
    "allocate_branches", "allpass", "best_single_branch_support",
    "critical_rate", "d_si", "discrete_waterfill", "empirical_mmse_config",
    "empirical_mmse_si",
    "entropy_rate", "flat_psd", "grid_autocovariance", "integrate_band",
    "is_aliasing_free", "kkt_residual", "lloyd", "load_ensemble",
    "load_piecewise", "lpf", "make_psd", "mmse_lower_bound", "mmse_si",
    "multimodal_psd", "optimal_support", "ou_critical_rate_closed_form",
    "ou_psd", "pcm_distortion", "pcm_optimal_rate", "piecewise_psd",
    "quantize_sequence", "rate_for_distortion", "run_pcm_pipeline",
    "save_ensemble", "shannon_drf", "spectral_occupancy", "standard_normal",
    "superlevel_set", "synthesize", "total_variance", "triangular_psd",
    "uniform_quantizer", "uniform_step_for_entropy", "verify_achievability",
    "waterfill_spectrum", "weighted_drf",
]
