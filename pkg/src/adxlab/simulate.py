"""Monte Carlo oracle: Gaussian path synthesis and end-to-end PCM runs.

Paths are synthesized in the frequency domain with independent complex
Gaussian coefficients of variance S(f_k) * df, which makes them exactly
stationary and exactly bandlimited on the simulation grid.  The pipeline and
estimator routines then operate circularly, so the only modeling gap between
simulation and the analytic formulas is the quantizer itself.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .bands import BandSet
from .errors import InputError
from .sampling import FilterSpec, _alias_order
from .spectra import Psd, integrate_band

# Odd 64-bit constant for deriving per-trial child seeds:
# child = master XOR (trial * SEED_SPLIT). Stable across versions.
SEED_SPLIT = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

_MAGIC = b"ADXLENS1"
_HEADER = struct.Struct("<8sIQQddQ")


def child_seed(master_seed: int, trial: int) -> int:
    return (master_seed ^ (trial * SEED_SPLIT)) & _MASK64


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    dense_grid_rate: float
    duration: float
    trials: int
    master_seed: int
    paths: np.ndarray = field(repr=False)

    @property
    def samples(self) -> int:
        return self.paths.shape[1]


@dataclass(frozen=True)
class EmpiricalEstimate:
    value: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class EmpiricalPcmPoint:
    f_s: float
    rate: float
    bits_per_sample: float
    total: float
    stderr: float
    d_smp: float
    d_qnt: float
    trials: int
    quantizer_mode: str
    quantizer_step: float | None


def synthesize(psd: Psd, duration: float, dense_grid_rate: float,
               trials: int, master_seed: int) -> PathEnsemble:
    """Stationary Gaussian paths whose grid spectrum equals the PSD.

    ``duration * dense_grid_rate`` must be a power of two; bandlimited
    spectra require a dense rate of at least four times their Nyquist rate.
    """
    n_float = duration * dense_grid_rate
    n = int(round(n_float))
    if abs(n_float - n) > 1e-9 or n < 2 or n & (n - 1):
        raise InputError("duration * dense_grid_rate must be a power of two")
    if psd.f_nyq is not None and dense_grid_rate < 4.0 * psd.f_nyq - 1e-12:
        raise InputError(
            f"dense grid rate {dense_grid_rate} below 4 x Nyquist "
            f"({4.0 * psd.f_nyq}) for a bandlimited spectrum")
    if trials < 1:
        raise InputError("need at least one trial")

    df = 1.0 / duration
    freqs = np.fft.rfftfreq(n, d=1.0 / dense_grid_rate)
    spec_var = psd.at(freqs) * df
    amp = np.sqrt(spec_var)
    half = n // 2

    paths = np.empty((trials, n))
    for trial in range(trials):
        rng = np.random.default_rng(child_seed(master_seed, trial))
        g = rng.standard_normal(half + 1)
        g_im = rng.standard_normal(half + 1)
        coeff = np.empty(half + 1, dtype=complex)
        coeff[0] = amp[0] * g[0]
        coeff[half] = amp[half] * g[half]
        coeff[1:half] = amp[1:half] * (g[1:half] + 1j * g_im[1:half]) / math.sqrt(2.0)
        paths[trial] = np.fft.irfft(coeff * n, n)
    return PathEnsemble(dense_grid_rate=dense_grid_rate, duration=duration,
                        trials=trials, master_seed=master_seed, paths=paths)


def grid_autocovariance(psd: Psd, duration: float, dense_grid_rate: float,
                        lags) -> np.ndarray:
    """Exact ensemble autocovariance of synthesized paths at integer lags."""
    n = int(round(duration * dense_grid_rate))
    df = 1.0 / duration
    freqs = np.fft.rfftfreq(n, d=1.0 / dense_grid_rate)
    var = psd.at(freqs) * df
    out = []
    for lag in np.atleast_1d(lags):
        phase = np.cos(2.0 * np.pi * freqs * lag / dense_grid_rate)
        # interior bins represent +-f pairs
        w = np.full_like(var, 2.0)
        w[0] = 1.0
        if n % 2 == 0:
            w[-1] = 1.0
        out.append(float(np.sum(w * var * phase)))
    return np.asarray(out)


def _decimation_step(ensemble: PathEnsemble, f_s: float) -> int:
    ratio = ensemble.dense_grid_rate / f_s
    step = int(round(ratio))
    if step < 1 or abs(ratio - step) > 1e-9 or ensemble.samples % step:
        raise InputError(
            f"sampling rate {f_s} must integer-divide the dense rate "
            f"{ensemble.dense_grid_rate} (and the path length)")
    return step


def _band_std(psd: Psd, half_width: float) -> float:
    hw = min(half_width, psd.f_max)
    return math.sqrt(max(integrate_band(psd, BandSet.interval(-hw, hw)), 0.0))


def run_pcm_pipeline(ensemble: PathEnsemble, psd: Psd, f_s: float, rate: float,
                     quantizer_mode: str = "entropy") -> EmpiricalPcmPoint:
    """Full PCM chain per path: LPF, decimate, quantize, sinc-reconstruct.

    Quantizer modes:
      * ``"entropy"`` - uniform mid-tread quantizer with the high-resolution
        step matching an expected code length of R/f_s bits per sample
        (entropy-coded operation; pairs with c_Q = pi e / 6).
      * ``"fixed"``   - 2^ceil(R/f_s) levels spanning +-4 signal std
        (fixed-length labels; effective c_Q = 16/3 at high resolution).
      * ``"none"``    - quantizer disabled (infinite resolution).
    """
    if quantizer_mode not in ("entropy", "fixed", "none"):
        raise InputError("quantizer_mode must be 'entropy', 'fixed' or 'none'")
    step = _decimation_step(ensemble, f_s)
    bits_per_sample = rate / f_s
    if quantizer_mode != "none" and bits_per_sample < 1.0:
        raise InputError("need at least one bit per sample (R/f_s >= 1)")

    n = ensemble.samples
    f_nyq = psd.f_nyq if psd.f_nyq is not None else float("inf")
    cutoff = min(f_s, f_nyq) / 2.0
    freqs = np.fft.rfftfreq(n, d=1.0 / ensemble.dense_grid_rate)
    pre_mask = freqs < cutoff
    rec_mask = freqs < cutoff          # reconstruction LPF(f_r), same cutoff

    spec = np.fft.rfft(ensemble.paths, axis=1) * pre_mask
    filtered = np.fft.irfft(spec, n, axis=1)
    y = filtered[:, ::step]

    sigma_y = _band_std(psd, cutoff)
    qstep = None
    if quantizer_mode == "entropy":
        qstep = math.sqrt(2.0 * math.pi * math.e) * sigma_y * 2.0 ** (-bits_per_sample)
        yq = np.round(y / qstep) * qstep
    elif quantizer_mode == "fixed":
        k = 2 ** math.ceil(bits_per_sample)
        qstep = 8.0 * sigma_y / k
        idx = np.clip(np.floor(y / qstep) + k // 2, 0, k - 1)
        yq = (idx - k // 2 + 0.5) * qstep
    else:
        yq = y

    def reconstruct(samples):
        dec_spec = np.fft.rfft(samples, axis=1)
        dense = np.zeros((ensemble.trials, n // 2 + 1), dtype=complex)
        keep = min(dec_spec.shape[1], dense.shape[1])
        dense[:, :keep] = step * dec_spec[:, :keep]
        dense *= rec_mask
        return np.fft.irfft(dense, n, axis=1)

    score = slice(n // 4, 3 * n // 4)
    err_q = reconstruct(yq)[:, score] - ensemble.paths[:, score]
    err_0 = reconstruct(y)[:, score] - ensemble.paths[:, score]
    per_trial = np.mean(err_q ** 2, axis=1)
    per_trial_smp = np.mean(err_0 ** 2, axis=1)

    total = float(np.mean(per_trial))
    stderr = float(np.std(per_trial, ddof=1) / math.sqrt(ensemble.trials)) \
        if ensemble.trials > 1 else 0.0
    d_smp = float(np.mean(per_trial_smp))
    return EmpiricalPcmPoint(
        f_s=f_s, rate=rate, bits_per_sample=bits_per_sample, total=total,
        stderr=stderr, d_smp=d_smp, d_qnt=total - d_smp,
        trials=ensemble.trials, quantizer_mode=quantizer_mode,
        quantizer_step=qstep)


def empirical_mmse_si(ensemble: PathEnsemble, psd: Psd, filt: FilterSpec,
                      f_s: float) -> EmpiricalEstimate:
    """Estimate each path from its filtered uniform samples and score the MSE.

    The estimator applies the alias-summed interpolation response
    W(f) = S|H|^2 / sum_k (S|H|^2)(f - k f_s) to the sample train, which is
    the least-squares interpolator for the synthesized spectra.
    """
    if filt.support is not None and not filt.support.is_symmetric():
        raise InputError("empirical estimation needs a symmetric (real) filter")
    step = _decimation_step(ensemble, f_s)
    n = ensemble.samples

    freqs_full = np.fft.fftfreq(n, d=1.0 / ensemble.dense_grid_rate)
    h_pow = filt.power(freqs_full)
    if not np.any(h_pow > 0):
        raise InputError("degenerate filter: zero everywhere")
    num = psd.at(freqs_full) * h_pow
    n_alias = _alias_order(psd, f_s, filt, None)
    den = np.zeros_like(num)
    for j in range(-n_alias, n_alias + 1):
        g = freqs_full - j * f_s
        den += psd.at(g) * filt.power(g)
    w = np.divide(num, den, out=np.zeros_like(num), where=den > 0)

    half_pow = filt.power(np.fft.rfftfreq(n, d=1.0 / ensemble.dense_grid_rate))
    filtered = np.fft.irfft(np.fft.rfft(ensemble.paths, axis=1) * half_pow,
                            n, axis=1)
    train = np.zeros_like(ensemble.paths)
    train[:, ::step] = filtered[:, ::step]
    estimate = np.fft.ifft(np.fft.fft(train, axis=1) * w * step, axis=1).real

    score = slice(n // 4, 3 * n // 4)
    per_trial = np.mean((estimate[:, score] - ensemble.paths[:, score]) ** 2, axis=1)
    stderr = float(np.std(per_trial, ddof=1) / math.sqrt(ensemble.trials)) \
        if ensemble.trials > 1 else 0.0
    return EmpiricalEstimate(value=float(np.mean(per_trial)), stderr=stderr,
                             trials=ensemble.trials)


def empirical_mmse_config(ensemble: PathEnsemble, psd: Psd,
                          config) -> EmpiricalEstimate:
    """Joint estimation error of a filter-bank sampler.

    Branch passbands may be one-sided (complex branch signals); each branch
    train is interpolated with its own alias-summed response and the branch
    estimates are summed, which is optimal when the passbands are disjoint.
    """
    n = ensemble.samples
    freqs_full = np.fft.fftfreq(n, d=1.0 / ensemble.dense_grid_rate)
    estimate_spec = np.zeros((ensemble.trials, n), dtype=complex)
    branch_rate = config.per_branch_rate
    ratio = ensemble.dense_grid_rate / branch_rate
    step = int(round(ratio))
    if abs(ratio - step) > 1e-9 or n % step:
        raise InputError("per-branch rate must integer-divide the dense rate")

    full_fft = np.fft.fft(ensemble.paths, axis=1)
    n_alias = None
    for br in config.branches:
        mask = br.power(freqs_full)
        if n_alias is None:
            n_alias = _alias_order(psd, branch_rate, br, None)
        num = psd.at(freqs_full) * mask
        den = np.zeros_like(num)
        for j in range(-n_alias, n_alias + 1):
            g = freqs_full - j * branch_rate
            den += psd.at(g) * br.power(g)
        w = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        filtered = np.fft.ifft(full_fft * mask, axis=1)
        train = np.zeros_like(filtered)
        train[:, ::step] = filtered[:, ::step]
        estimate_spec += np.fft.fft(train, axis=1) * w * step

    estimate = np.fft.ifft(estimate_spec, axis=1).real
    score = slice(n // 4, 3 * n // 4)
    per_trial = np.mean((estimate[:, score] - ensemble.paths[:, score]) ** 2, axis=1)
    stderr = float(np.std(per_trial, ddof=1) / math.sqrt(ensemble.trials)) \
        if ensemble.trials > 1 else 0.0
    return EmpiricalEstimate(value=float(np.mean(per_trial)), stderr=stderr,
                             trials=ensemble.trials)


def save_ensemble(ensemble: PathEnsemble, path) -> None:
    """Binary export: fixed header (magic, version, shape, rates, seed) + raw float64."""
    header = _HEADER.pack(_MAGIC, 1, ensemble.trials, ensemble.samples,
                          ensemble.dense_grid_rate, ensemble.duration,
                          ensemble.master_seed & _MASK64)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(ensemble.paths, dtype=np.float64).tobytes())


def load_ensemble(path) -> PathEnsemble:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        magic, version, trials, samples, rate, duration, seed = _HEADER.unpack(raw)
        if magic != _MAGIC or version != 1:
            raise InputError("not an adx-lab ensemble file")
        data = np.frombuffer(fh.read(), dtype=np.float64)
    if data.size != trials * samples:
        raise InputError("truncated ensemble file")
    return PathEnsemble(dense_grid_rate=rate, duration=duration, trials=trials,
                        master_seed=seed,
                        paths=data.reshape(trials, samples).copy())
