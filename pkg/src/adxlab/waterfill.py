"""Reverse water-filling solvers.

The continuous solver treats the sampled spectrum as its piecewise-linear
interpolant and evaluates both water-filling integrals in closed form on
every segment, so flat and triangular spectra are handled exactly and the
rate residual is the only solve error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bands import BandSet
from .errors import ConvergenceError, InputError
from .spectra import Psd, sampled_grid, superlevel_set, total_variance

LN2 = math.log(2.0)
RATE_TOL = 1e-9
MAX_BISECT = 200


@dataclass(frozen=True)
class WaterLevelSolution:
    """Water level with its achieved rate/distortion and the preserved set."""

    theta: float
    rate: float
    distortion: float
    active_set: BandSet | None = None            # continuous problems
    active_indices: tuple[int, ...] = ()         # discrete problems
    component_rates: tuple[float, ...] = ()
    degenerate: bool = False
    saturated: bool = False


# ---------------------------------------------------------------------------
# Discrete water-filling (exact, sort-based)
# ---------------------------------------------------------------------------

def discrete_waterfill(variances: Sequence[float], total_rate: float) -> WaterLevelSolution:
    """Allocate `total_rate` bits over independent Gaussian components.

    Solves sum_i (1/2) log2+ (s_i / theta) = R exactly by scanning active-set
    sizes in descending variance order; distortion is sum_i min(s_i, theta).
    """
    s = np.asarray(variances, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise InputError("need a one-dimensional, non-empty variance list")
    if np.any(s < 0):
        raise InputError("variances must be nonnegative")
    if total_rate < 0:
        raise InputError("total rate must be nonnegative")

    m = s.size
    if total_rate == 0.0:
        return WaterLevelSolution(
            theta=float(s.max()), rate=0.0, distortion=float(s.sum()),
            component_rates=(0.0,) * m)
    if not np.any(s > 0):
        return WaterLevelSolution(theta=0.0, rate=float(total_rate),
                                  distortion=0.0, degenerate=True,
                                  component_rates=(0.0,) * m)

    order = np.argsort(-s)
    sorted_s = s[order]
    n_pos = int(np.count_nonzero(sorted_s > 0))
    log_s = np.log2(sorted_s[:n_pos])
    prefix = np.cumsum(log_s)
    log_theta = (prefix[-1] - 2.0 * total_rate) / n_pos
    for k in range(1, n_pos + 1):
        # water level that spends the whole budget on the top-k components
        cand = (prefix[k - 1] - 2.0 * total_rate) / k
        below_next = k == n_pos or cand >= log_s[k] - 1e-12
        if cand <= log_s[k - 1] and below_next:
            log_theta = cand
            break

    # rates in the log domain so extreme budgets cannot underflow theta
    with np.errstate(divide="ignore"):
        rates = 0.5 * np.maximum(np.where(s > 0, np.log2(np.maximum(s, 1e-300)), -np.inf)
                                 - log_theta, 0.0)
    theta = 2.0 ** log_theta
    active = tuple(int(i) for i in np.nonzero(rates > 0)[0])
    return WaterLevelSolution(
        theta=float(theta),
        rate=float(rates.sum()),
        distortion=float(np.minimum(s, theta).sum()),
        component_rates=tuple(float(r) for r in rates),
        active_indices=active,
    )


def kkt_residual(solution: WaterLevelSolution, variances: Sequence[float]) -> float:
    """Max violation of the allocation optimality conditions.

    Active components must satisfy s_i 2^(-2 R_i) = theta; inactive ones
    s_i <= theta.
    """
    s = np.asarray(variances, dtype=float)
    rates = np.asarray(solution.component_rates, dtype=float)
    worst = 0.0
    for i in range(s.size):
        if rates[i] > 0:
            worst = max(worst, abs(s[i] * 2.0 ** (-2.0 * rates[i]) - solution.theta))
        else:
            worst = max(worst, max(0.0, s[i] - solution.theta))
    return worst


# ---------------------------------------------------------------------------
# Continuous water-filling on a sampled spectrum
# ---------------------------------------------------------------------------

def _geometric_mid(lo: float, hi: float) -> float:
    # log-space midpoint; lo * hi can underflow for subnormal water levels
    return math.exp(0.5 * (math.log(lo) + math.log(hi)))


def _segment_log_integral(a, b, length, theta):
    """Integral of log2(y/theta) over a linear ramp a->b of given length.

    Logs are taken separately and subtracted so that water levels near the
    underflow limit cannot overflow the ratio y/theta.
    """
    flat = np.abs(b - a) <= 1e-12 * np.maximum(a, b)
    log_theta = math.log(theta)
    log_a = np.log(np.maximum(a, 1e-320)) - log_theta
    log_b = np.log(np.maximum(b, 1e-320)) - log_theta
    log_mid = np.log(np.maximum(0.5 * (a + b), 1e-320)) - log_theta
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (length / ((b - a) * LN2)) * (b * log_b - b - a * log_a + a)
    return np.where(flat, length * log_mid / LN2, exact)


def _clipped_integrals(grid, theta: float) -> tuple[float, float]:
    """(integral of log2+(y/theta), integral of min(y, theta)) over the grid.

    Both integrals are evaluated in closed form on the piecewise-linear
    interpolant of each sampled piece, including segments that cross the
    water level.
    """
    log_total = 0.0
    min_total = 0.0
    for x, y in grid:
        x0, x1 = x[:-1], x[1:]
        y0, y1 = y[:-1], y[1:]
        h = x1 - x0
        above0 = y0 >= theta
        above1 = y1 >= theta

        both_above = above0 & above1
        both_below = ~above0 & ~above1
        crossing = ~(both_above | both_below)

        # min(y, theta): theta where above, trapezoid where below
        min_total += float(np.sum(h[both_above]) * theta)
        min_total += float(np.sum(0.5 * h[both_below] * (y0 + y1)[both_below]))

        if np.any(both_above):
            log_total += float(np.sum(_segment_log_integral(
                y0[both_above], y1[both_above], h[both_above], theta)))

        if np.any(crossing):
            ya, yb, hh = y0[crossing], y1[crossing], h[crossing]
            t = (ya - theta) / (ya - yb)        # crossing fraction from x0
            down = ya >= theta                  # ramp falls through theta
            len_above = np.where(down, hh * t, hh * (1.0 - t))
            len_below = hh - len_above
            y_below = np.where(down, yb, ya)
            log_total += float(np.sum(_segment_log_integral(
                np.full_like(ya, theta), np.where(down, ya, yb),
                len_above, theta)))
            min_total += float(np.sum(len_above * theta
                                      + 0.5 * len_below * (theta + y_below)))
    return log_total, min_total


def waterfill_spectrum(density: Callable[[np.ndarray], np.ndarray],
                       domain: BandSet,
                       breakpoints: Sequence[float],
                       step: float,
                       rate: float,
                       rate_tol: float = RATE_TOL) -> tuple[float, float, float]:
    """Solve the water level for a spectral density restricted to `domain`.

    Returns ``(theta, achieved_rate, distortion)``.  The rate constraint is
    R(theta) = (1/2) * integral of log2+(density/theta) over the domain.
    """
    grid = sampled_grid(density, domain, breakpoints, step)
    peak = max((float(y.max()) for _, y in grid), default=0.0)
    if peak <= 0.0:
        return 0.0, 0.0, 0.0

    def rate_at(theta):
        return 0.5 * _clipped_integrals(grid, theta)[0]

    if rate <= 0.0:
        _, dist = _clipped_integrals(grid, peak)
        return peak, 0.0, dist

    lo = peak
    for _ in range(4200):
        lo *= 0.5
        if lo <= 0.0:
            raise ConvergenceError(
                "water level underflowed; the requested rate is beyond "
                "representable distortions")
        if rate_at(lo) >= rate:
            break
    else:
        raise InputError("rate target unreachable for this spectrum")

    hi = peak
    theta = lo
    for _ in range(MAX_BISECT):
        theta = _geometric_mid(lo, hi)
        r = rate_at(theta)
        if abs(r - rate) <= rate_tol:
            break
        if r > rate:
            lo = theta
        else:
            hi = theta
    log_int, dist = _clipped_integrals(grid, theta)
    return theta, 0.5 * log_int, dist


# ---------------------------------------------------------------------------
# Public operations on PSDs
# ---------------------------------------------------------------------------

def shannon_drf(psd: Psd, rate: float, rate_tol: float = RATE_TOL) -> WaterLevelSolution:
    """Distortion-rate point of a Gaussian stationary source at `rate` bits/time."""
    if rate < 0:
        raise InputError("rate must be nonnegative")
    domain = psd.support.intersect(psd.domain)
    if rate == 0.0:
        return WaterLevelSolution(
            theta=psd.peak, rate=0.0, distortion=total_variance(psd),
            active_set=BandSet.empty())
    theta, r, dist = waterfill_spectrum(
        psd.at, domain, psd.breakpoints, psd.grid_step, rate, rate_tol)
    return WaterLevelSolution(
        theta=theta, rate=r, distortion=dist,
        active_set=superlevel_set(psd, theta))


def rate_for_distortion(psd: Psd, d_target: float,
                        tol: float = 1e-12) -> WaterLevelSolution:
    """Inverse of :func:`shannon_drf`: minimal bitrate reaching `d_target`."""
    if d_target <= 0:
        raise InputError("target distortion must be positive")
    sigma2 = total_variance(psd)
    domain = psd.support.intersect(psd.domain)
    grid = sampled_grid(psd.at, domain, psd.breakpoints, psd.grid_step)
    peak = max(float(y.max()) for _, y in grid)
    if d_target >= sigma2:
        return WaterLevelSolution(theta=peak, rate=0.0, distortion=sigma2,
                                  active_set=BandSet.empty(), saturated=True)

    lo, hi = peak * 1e-18, peak
    for _ in range(MAX_BISECT):
        theta = _geometric_mid(lo, hi)
        _, dist = _clipped_integrals(grid, theta)
        if abs(dist - d_target) <= tol * max(1.0, sigma2):
            break
        if dist < d_target:
            lo = theta
        else:
            hi = theta
    log_int, dist = _clipped_integrals(grid, theta)
    return WaterLevelSolution(
        theta=theta, rate=0.5 * log_int, distortion=dist,
        active_set=superlevel_set(psd, theta))


def weighted_drf(psd: Psd, weight: Callable[[np.ndarray], np.ndarray],
                 rate: float,
                 weight_breakpoints: Sequence[float] = (),
                 report: str = "weighted",
                 rate_tol: float = RATE_TOL) -> WaterLevelSolution:
    """Water-fill the importance-weighted spectrum weight(f) * S(f).

    `report` selects the distortion units: "weighted" (default) integrates
    min(W S, theta); "unweighted" maps the per-frequency error back through
    the weight, charging full source power wherever the weight is zero.
    """
    if report not in ("weighted", "unweighted"):
        raise InputError("report must be 'weighted' or 'unweighted'")

    def product(f):
        w = np.asarray(weight(f), dtype=float)
        if np.any(w < 0):
            raise InputError("weight must be nonnegative")
        return w * psd.at(f)

    breaks = tuple(sorted(set(psd.breakpoints) | set(weight_breakpoints)))
    domain = psd.support.intersect(psd.domain)
    if rate < 0:
        raise InputError("rate must be nonnegative")

    grid = sampled_grid(product, domain, breaks, psd.grid_step)
    peak = max((float(y.max()) for _, y in grid), default=0.0)
    if peak <= 0.0:
        return WaterLevelSolution(theta=0.0, rate=0.0, distortion=0.0,
                                  active_set=BandSet.empty(), degenerate=True)

    theta, r, dist = waterfill_spectrum(
        product, domain, breaks, psd.grid_step, rate, rate_tol)

    if report == "unweighted":
        dist = 0.0
        for x, y in sampled_grid(product, domain, breaks, psd.grid_step):
            s_vals = psd.at(x)
            w_vals = np.divide(y, s_vals, out=np.zeros_like(y),
                               where=s_vals > 0)
            err = np.where(w_vals > 0,
                           np.minimum(s_vals, theta / np.maximum(w_vals, 1e-300)),
                           s_vals)
            dist += float(np.trapezoid(err, x))

    active = _superlevel_of_callable(product, domain, breaks, psd.grid_step, theta)
    return WaterLevelSolution(theta=theta, rate=r, distortion=dist,
                              active_set=active)


def _superlevel_of_callable(fn, domain, breakpoints, step, tau) -> BandSet:
    """Superlevel set of an arbitrary sampled density (shared grid rules)."""
    from .spectra import sample_piece, split_pieces, _refine_crossing

    intervals = []
    for lo, hi in split_pieces(domain, breakpoints):
        x, y = sample_piece(fn, lo, hi, step)
        mask = y >= tau
        if not mask.any():
            continue
        start = lo if mask[0] else None
        for i in range(len(x) - 1):
            if mask[i] == mask[i + 1]:
                continue
            xc = _refine_crossing(fn, tau, x[i], x[i + 1], y[i], y[i + 1])
            if mask[i]:
                intervals.append((start, xc))
                start = None
            else:
                start = xc
        if start is not None:
            intervals.append((start, hi))
    return BandSet(tuple(intervals))
