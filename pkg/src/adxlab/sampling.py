"""Sub-Nyquist sampling: aliased spectra, estimation MMSE, distortion bounds.

A shift-invariant sampler is a pre-sampling filter followed by pointwise
uniform sampling at rate ``f_s``.  This module computes the post-sampling
information spectrum, the estimation MMSE, the distortion of the sampled
system at a bitrate, the fundamental lower bound over all filter choices,
the critical sampling rate at which the bound meets the source's
distortion-rate function, and filter-bank allocations that attain the bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .bands import BandSet
from .errors import AllocationError, ConvergenceError, InputError
from .spectra import (Psd, integrate_band, sample_piece, sampled_grid,
                      spectral_occupancy, split_pieces, superlevel_set,
                      total_variance)
from .waterfill import RATE_TOL, shannon_drf, waterfill_spectrum

LN2 = math.log(2.0)


@dataclass(frozen=True)
class FilterSpec:
    """Pre-sampling filter: a passband plus an optional magnitude profile.

    ``support=None`` means all-pass.  Only the passband matters for the
    optimality results; magnitude defaults to 1 on the support.
    """

    support: BandSet | None = None
    magnitude: Callable[[np.ndarray], np.ndarray] | None = None

    def power(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        gain = np.ones_like(f) if self.support is None else self.support.indicator(f)
        if self.magnitude is not None:
            gain = gain * np.asarray(self.magnitude(f), dtype=float) ** 2
        return gain

    @property
    def edges(self) -> tuple[float, ...]:
        if self.support is None:
            return ()
        return tuple(e for iv in self.support.intervals for e in iv)


def lpf(cutoff: float) -> FilterSpec:
    """Ideal low-pass filter passing |f| < cutoff."""
    if cutoff <= 0:
        raise InputError("LPF cutoff must be positive")
    return FilterSpec(support=BandSet.interval(-cutoff, cutoff))


def allpass() -> FilterSpec:
    return FilterSpec(support=None)


@dataclass(frozen=True)
class SamplerConfig:
    """Filter bank sampler: L branches, each sampling at f_s / L."""

    branches: tuple[FilterSpec, ...]
    f_s: float
    rate_divisor: int

    @property
    def per_branch_rate(self) -> float:
        return self.f_s / self.rate_divisor

    @property
    def union_support(self) -> BandSet:
        out = BandSet.empty()
        for br in self.branches:
            if br.support is None:
                raise InputError("branch filters must have finite supports")
            out = out.union(br.support)
        return out


@dataclass(frozen=True)
class AdxPoint:
    """One point of the distortion surface, split into its two error sources."""

    f_s: float
    rate: float
    mmse_part: float
    lossy_part: float
    total: float
    theta: float | None = None
    support: BandSet | None = None
    branches_used: int | None = None


# ---------------------------------------------------------------------------
# Aliased information spectrum and SI-sampler distortion
# ---------------------------------------------------------------------------

def _alias_order(psd: Psd, f_s: float, filt: FilterSpec,
                 noise_psd: Psd | None) -> int:
    reach = psd.f_max
    if noise_psd is not None:
        reach = max(reach, noise_psd.f_max)
    if filt.support is not None and not filt.support.is_empty:
        reach = max(reach, abs(filt.support.lo), abs(filt.support.hi))
    return int(math.ceil((reach + f_s / 2) / f_s)) + 1


def _stilde(psd: Psd, filt: FilterSpec, f_s: float,
            noise_psd: Psd | None):
    """Callable for the post-sampling information density on the baseband,
    plus the baseband breakpoints of all folded alias pieces."""
    n_alias = _alias_order(psd, f_s, filt, noise_psd)
    shifts = [n * f_s for n in range(-n_alias, n_alias + 1)]

    def fn(f):
        f = np.asarray(f, dtype=float)
        num = np.zeros_like(f)
        den = np.zeros_like(f)
        for sh in shifts:
            g = f - sh
            sx = psd.at(g) * filt.power(g)
            num += psd.at(g) * sx
            den += sx
            if noise_psd is not None:
                den += noise_psd.at(g) * filt.power(g)
        return np.divide(num, den, out=np.zeros_like(num), where=den > 0)

    base = set(psd.breakpoints) | set(filt.edges)
    if noise_psd is not None:
        base |= set(noise_psd.breakpoints)
    half = f_s / 2
    breaks = sorted({b + sh for b in base for sh in shifts
                     if -half < b + sh < half})
    return fn, tuple(breaks)


def _baseband_step(psd: Psd, f_s: float) -> float:
    return min(psd.grid_step, f_s / 2048)


def aliased_spectrum(psd: Psd, filt: FilterSpec, f_s: float, f: float,
                     noise_psd: Psd | None = None) -> float:
    """Information spectrum of the sampled process at baseband frequency f."""
    if f_s <= 0:
        raise InputError("sampling rate must be positive")
    if abs(f) > f_s / 2:
        raise InputError(f"|f|={abs(f)} outside baseband +-{f_s / 2}")
    fn, _ = _stilde(psd, filt, f_s, noise_psd)
    return float(fn(np.array([f]))[0])


def mmse_si(psd: Psd, filt: FilterSpec, f_s: float,
            noise_psd: Psd | None = None) -> float:
    """MMSE of the best estimator of the source from the sampler output."""
    if f_s <= 0:
        raise InputError("sampling rate must be positive")
    fn, breaks = _stilde(psd, filt, f_s, noise_psd)
    bb = BandSet.interval(-f_s / 2, f_s / 2)
    grid = sampled_grid(fn, bb, breaks, _baseband_step(psd, f_s))
    captured = sum(np.trapezoid(y, x) for x, y in grid)
    return max(0.0, total_variance(psd) - float(captured))


def d_si(psd: Psd, filt: FilterSpec, f_s: float, rate: float,
         noise_psd: Psd | None = None, rate_tol: float = RATE_TOL) -> AdxPoint:
    """Distortion of the SI sampler at bitrate `rate`: MMSE plus the
    water-filled compression of the post-sampling spectrum."""
    if f_s <= 0:
        raise InputError("sampling rate must be positive")
    if rate < 0:
        raise InputError("rate must be nonnegative")
    fn, breaks = _stilde(psd, filt, f_s, noise_psd)
    bb = BandSet.interval(-f_s / 2, f_s / 2)
    step = _baseband_step(psd, f_s)
    grid = sampled_grid(fn, bb, breaks, step)
    captured = sum(np.trapezoid(y, x) for x, y in grid)
    mmse = max(0.0, total_variance(psd) - float(captured))
    theta, _, lossy = waterfill_spectrum(fn, bb, breaks, step, rate, rate_tol)
    return AdxPoint(f_s=f_s, rate=rate, mmse_part=mmse, lossy_part=lossy,
                    total=mmse + lossy, theta=theta)


# ---------------------------------------------------------------------------
# Aliasing-free supports and the optimal-filter lower bound
# ---------------------------------------------------------------------------

def is_aliasing_free(support: BandSet, rate: float) -> bool:
    """True iff all nonzero integer shifts of `support` by `rate` avoid it."""
    if rate <= 0:
        raise InputError("rate must be positive")
    if support.is_empty:
        return True
    if support.measure > rate + 1e-12:
        return False
    span = support.hi - support.lo
    for k in range(1, int(math.ceil(span / rate)) + 2):
        if support.shift(k * rate).overlap_measure(support) > 1e-12:
            return False
    return True


def _superlevel_measure(grid, tau: float) -> float:
    """Measure of {y >= tau} for the piecewise-linear interpolant of `grid`."""
    m = 0.0
    for x, y in grid:
        h = np.diff(x)
        y0, y1 = y[:-1], y[1:]
        a0, a1 = y0 >= tau, y1 >= tau
        both = a0 & a1
        cross = a0 ^ a1
        m += float(np.sum(h[both]))
        if np.any(cross):
            ya, yb = y0[cross], y1[cross]
            t = (ya - tau) / (ya - yb)
            frac = np.where(ya >= tau, t, 1.0 - t)
            m += float(np.sum(h[cross] * frac))
    return m


def optimal_support(psd: Psd, f_s: float) -> BandSet:
    """Energy-maximal frequency set of measure min(f_s, occupancy).

    A superlevel set of the PSD; plateaus (flat spectra) are tie-broken by
    keeping the symmetric subset closest to the origin.
    """
    if f_s <= 0:
        raise InputError("sampling rate must be positive")
    occupied = psd.support.intersect(psd.domain)
    if f_s >= occupied.measure - 1e-12:
        return occupied

    grid = sampled_grid(psd.at, occupied, psd.breakpoints, psd.grid_step)
    peak = max(float(y.max()) for _, y in grid)
    lo, hi = 0.0, peak * (1.0 + 1e-9)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _superlevel_measure(grid, mid) > f_s:
            lo = mid
        else:
            hi = mid
    base = superlevel_set(psd, hi)
    deficit = f_s - base.measure
    if deficit <= 1e-9 * max(1.0, f_s):
        return base
    plateau = superlevel_set(psd, lo).difference(base)
    return base.union(plateau.symmetric_core(deficit))


def mmse_lower_bound(psd: Psd, f_s: float) -> float:
    """Least possible estimation MMSE over all rate-f_s linear samplers."""
    return max(0.0, total_variance(psd) - integrate_band(psd, optimal_support(psd, f_s)))


def adx_lower_bound(psd: Psd, f_s: float, rate: float,
                    rate_tol: float = RATE_TOL) -> AdxPoint:
    """Fundamental distortion floor at sampling rate f_s and bitrate `rate`."""
    if f_s <= 0:
        raise InputError("sampling rate must be positive")
    if rate < 0:
        raise InputError("rate must be nonnegative")
    sup = optimal_support(psd, f_s)
    mmse = max(0.0, total_variance(psd) - integrate_band(psd, sup))
    theta, _, lossy = waterfill_spectrum(
        psd.at, sup, psd.breakpoints, psd.grid_step, rate, rate_tol)
    return AdxPoint(f_s=f_s, rate=rate, mmse_part=mmse, lossy_part=lossy,
                    total=mmse + lossy, theta=theta, support=sup)


def critical_rate(psd: Psd, rate: float) -> float:
    """Measure of the spectrum preserved by water-filling at `rate`.

    The smallest sampling rate at which the sampled-system bound meets the
    distortion-rate function of the source.
    """
    return shannon_drf(psd, rate).active_set.measure


def ou_critical_rate_closed_form(f0: float, rate: float) -> float:
    """Critical sampling rate of the Lorentzian (Gauss-Markov) spectrum.

    Root of ``rate * ln 2 = f_R - (2 f0 / pi) * arctan(pi f_R / (2 f0))``,
    the closed form of the preserved-band measure for this spectrum (the
    bracketed term is the tail-corrected rate integral of the water-filling
    solution).  Serves as an independent oracle for :func:`critical_rate`.
    """
    if f0 <= 0:
        raise InputError("f0 must be positive")
    if rate < 0:
        raise InputError("rate must be nonnegative")
    if rate == 0.0:
        return 0.0

    def g(fr):
        return (fr - (2.0 * f0 / np.pi) * math.atan(np.pi * fr / (2.0 * f0))) / LN2 - rate

    hi = rate * LN2 * 10.0 + 10.0 * f0
    return float(brentq(g, 0.0, hi, xtol=1e-13, rtol=8.9e-16))


# ---------------------------------------------------------------------------
# Multi-branch allocation and achievability
# ---------------------------------------------------------------------------

def _split_at_rate(support: BandSet, rate: float) -> list[BandSet]:
    """Cut intervals longer than `rate` at multiples of `rate` from their left edge."""
    pieces = []
    for lo, hi in support.intervals:
        n_cuts = int(math.floor((hi - lo) / rate))
        cuts = [lo + k * rate for k in range(1, n_cuts + 1) if lo + k * rate < hi - 1e-15]
        for a, b in zip([lo] + cuts, cuts + [hi]):
            pieces.append(BandSet.interval(a, b))
    return pieces


def allocate_branches(psd: Psd, f_s: float, l_max: int) -> SamplerConfig:
    """Partition the optimal support into aliasing-free branch passbands.

    Tries L = 1, 2, ... branches; for each L the support pieces (split to at
    most f_s/L width) are assigned greedily in descending energy order to the
    first branch that stays aliasing-free at rate f_s/L.
    """
    if f_s <= 0:
        raise InputError("sampling rate must be positive")
    if l_max < 1:
        raise InputError("l_max must be at least 1")
    target = optimal_support(psd, f_s)
    if target.is_empty:
        raise InputError("optimal support is empty; nothing to allocate")

    residual = target.measure
    for l_branches in range(1, l_max + 1):
        branch_rate = f_s / l_branches
        pieces = _split_at_rate(target, branch_rate)
        pieces.sort(key=lambda p: -integrate_band(psd, p))
        branches: list[BandSet] = []
        unassigned = 0.0
        for piece in pieces:
            placed = False
            for i, br in enumerate(branches):
                cand = br.union(piece)
                if is_aliasing_free(cand, branch_rate):
                    branches[i] = cand
                    placed = True
                    break
            if not placed:
                if len(branches) < l_branches and is_aliasing_free(piece, branch_rate):
                    branches.append(piece)
                else:
                    unassigned += piece.measure
        if unassigned <= 1e-12:
            return SamplerConfig(
                branches=tuple(FilterSpec(support=b) for b in branches),
                f_s=f_s, rate_divisor=l_branches)
        residual = unassigned
    raise AllocationError(
        f"could not cover the optimal support with up to {l_max} branches "
        f"(residual measure {residual:.3e} at L={l_max})",
        smallest_failing_l=l_max, residual_measure=residual)


def verify_achievability(psd: Psd, config: SamplerConfig, rate: float,
                         rate_tol: float = RATE_TOL) -> AdxPoint:
    """Distortion attained by a filter bank whose branches are aliasing-free.

    With every branch free of aliasing, the bank loses exactly the energy
    outside the union of its passbands, so the distortion is a water-fill of
    the spectrum restricted to that union.  When the union matches the
    optimal support this must reproduce the lower bound; that identity is
    checked and a failure raises.
    """
    branch_rate = config.per_branch_rate
    for i, br in enumerate(config.branches):
        if br.support is None or not is_aliasing_free(br.support, branch_rate):
            raise InputError(f"branch {i} is not aliasing-free at rate {branch_rate}")
    union = config.union_support
    mmse = max(0.0, total_variance(psd) - integrate_band(psd, union))
    theta, _, lossy = waterfill_spectrum(
        psd.at, union, psd.breakpoints, psd.grid_step, rate, rate_tol)
    point = AdxPoint(f_s=config.f_s, rate=rate, mmse_part=mmse,
                     lossy_part=lossy, total=mmse + lossy, theta=theta,
                     support=union, branches_used=len(config.branches))

    fstar = optimal_support(psd, config.f_s)
    if union.difference(fstar).measure < 1e-9 and fstar.difference(union).measure < 1e-9:
        bound = adx_lower_bound(psd, config.f_s, rate, rate_tol)
        sigma2 = total_variance(psd)
        if abs(point.total - bound.total) > 1e-6 * sigma2 + 1e-9:
            raise ConvergenceError(
                f"achievability mismatch: bank total {point.total} vs "
                f"bound {bound.total}")
    return point


def best_single_branch_support(psd: Psd, f_s: float) -> BandSet:
    """Greedy energy-maximal aliasing-free support for a single SI branch."""
    target = optimal_support(psd, f_s)
    chosen = BandSet.empty()
    pieces = _split_at_rate(target, f_s)
    pieces.sort(key=lambda p: -integrate_band(psd, p))
    for piece in pieces:
        cand = chosen.union(piece)
        if is_aliasing_free(cand, f_s):
            chosen = cand
    return chosen
