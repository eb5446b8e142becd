"""Theoretical PCM distortion under the white quantization-noise model.

PCM distortion splits into the spectrum blocked by the anti-aliasing filter
and the in-band share of the quantization noise, whose per-sample variance
scales as c_Q * var(Y) * 2^(-2 R / f_s).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .bands import BandSet
from .errors import InputError
from .spectra import Psd, integrate_band, total_variance

#: High-resolution constant of an entropy-coded uniform quantizer.
CQ_UNIFORM_ENTROPY = math.pi * math.e / 6.0
#: High-resolution constant of an optimal fixed-length quantizer.
CQ_FIXED_OPTIMAL = math.sqrt(3.0) * math.pi / 2.0


@dataclass(frozen=True)
class PcmPoint:
    f_s: float
    rate: float
    bits_per_sample: float
    d_smp: float
    d_qnt: float
    total: float


def _band_power(psd: Psd, half_width: float) -> float:
    hw = min(half_width, psd.f_max)
    return integrate_band(psd, BandSet.interval(-hw, hw))


def _warn_if_multimodal(psd: Psd) -> None:
    if not psd.is_unimodal:
        warnings.warn(
            "PSD is not unimodal: the low-pass pre-filter behind the PCM "
            "model may be far from the best choice for this spectrum",
            stacklevel=3)


def pcm_distortion(psd: Psd, f_s: float, rate: float,
                   c_q: float = CQ_UNIFORM_ENTROPY) -> PcmPoint:
    """PCM distortion at sampling rate f_s and bitrate `rate`.

    d_smp is the energy blocked by the LPF(f_s/2) pre-filter; d_qnt is the
    in-band quantization noise c_q * (min(f_s, f_nyq)/f_s) * varY * 2^(-2R/f_s)
    with varY the power passed by the pre-filter.
    """
    if f_s <= 0:
        raise InputError("sampling rate must be positive")
    if rate < 0:
        raise InputError("rate must be nonnegative")
    if c_q <= 0:
        raise InputError("c_q must be positive")
    _warn_if_multimodal(psd)

    sigma2 = total_variance(psd)
    var_y = _band_power(psd, f_s / 2)
    d_smp = max(0.0, sigma2 - var_y)
    f_nyq = psd.f_nyq if psd.f_nyq is not None else float("inf")
    in_band = min(f_s, f_nyq) / f_s
    d_qnt = c_q * in_band * var_y * 2.0 ** (-2.0 * rate / f_s)
    return PcmPoint(f_s=f_s, rate=rate, bits_per_sample=rate / f_s,
                    d_smp=d_smp, d_qnt=d_qnt, total=d_smp + d_qnt)


def pcm_optimal_rate(psd: Psd, rate: float,
                     c_q: float = CQ_UNIFORM_ENTROPY,
                     f_cap: float | None = None,
                     grid_points: int = 500) -> tuple[float, PcmPoint]:
    """Sampling rate minimizing PCM distortion at fixed bitrate `rate`.

    A dense grid scan locates the best cell (the objective need not be
    unimodal); golden-section then refines inside it.  For spectra without a
    Nyquist rate the search is capped at ``f_cap`` (default 4 * f0 * rate)
    and hitting the cap raises a warning.
    """
    if rate <= 0:
        raise InputError("rate must be positive")
    if psd.f_nyq is not None:
        f_hi = psd.f_nyq
        capped = False
    else:
        f_hi = f_cap if f_cap is not None else 4.0 * psd.params["f0"] * rate
        capped = True
    _warn_if_multimodal(psd)

    objective = lambda fs: pcm_distortion(psd, fs, rate, c_q).total
    grid = np.linspace(f_hi / grid_points, f_hi, grid_points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        vals = [objective(fs) for fs in grid]
    i = int(np.argmin(vals))

    if i == len(grid) - 1:
        f_star = f_hi
        if capped:
            warnings.warn(
                f"PCM optimum hit the search cap f_cap={f_hi}; "
                "increase f_cap to explore higher sampling rates", stacklevel=2)
    elif i == 0 or not (vals[i] < vals[i - 1] and vals[i] < vals[i + 1]):
        f_star = float(grid[i])
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = minimize_scalar(objective,
                                  bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                  method="golden",
                                  options={"xtol": 1e-10})
        f_star = float(res.x)
        if objective(f_star) > vals[i]:
            f_star = float(grid[i])
    return f_star, pcm_distortion(psd, f_star, rate, c_q)
