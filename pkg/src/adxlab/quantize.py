"""Scalar quantizer design and analysis.

Densities are tabulated on a fixed working grid and treated as piecewise
linear, so cell masses and moments have closed forms: the K-means (Lloyd)
iteration, uniform quantizers, entropies and MSEs all reduce to exact
bookkeeping on that interpolant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InputError

WORK_RANGE = (-8.0, 8.0)       # +-8 sigma for unit-variance inputs
GRID_POINTS = 1 << 16
_NORMALIZATION_TOL = 1e-6


def standard_normal(x):
    return np.exp(-0.5 * np.asarray(x, dtype=float) ** 2) / math.sqrt(2.0 * math.pi)


class GridDensity:
    """Probability density sampled on a uniform grid, integrated piecewise linearly."""

    def __init__(self, pdf: Callable[[np.ndarray], np.ndarray],
                 work_range: tuple[float, float] = WORK_RANGE,
                 n: int = GRID_POINTS):
        lo, hi = work_range
        if hi <= lo:
            raise InputError("working range must be increasing")
        self.x = np.linspace(lo, hi, n)
        self.y = np.asarray(pdf(self.x), dtype=float)
        if np.any(self.y < 0):
            raise InputError("density must be nonnegative")
        self._seg_prefix = [np.concatenate(([0.0], np.cumsum(m)))
                            for m in self._segment_moments(self.x, self.y)]
        total = self._seg_prefix[0][-1]
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise InputError(
                f"density integrates to {total:.8f} on the working range "
                f"(expected 1 within {_NORMALIZATION_TOL:g})")

    @staticmethod
    def _segment_moments(x, y):
        """(mass, first, second) moment of the linear interpolant per segment."""
        x0, y0 = x[:-1], y[:-1]
        h = np.diff(x)
        s = np.diff(y) / h
        m0 = y0 * h + 0.5 * s * h ** 2
        inner1 = 0.5 * y0 * h ** 2 + s * h ** 3 / 3.0
        inner2 = y0 * h ** 3 / 3.0 + 0.25 * s * h ** 4
        m1 = x0 * m0 + inner1
        m2 = x0 ** 2 * m0 + 2.0 * x0 * inner1 + inner2
        return m0, m1, m2

    def moments_upto(self, b) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cumulative (mass, first, second) moments from the range start to b."""
        b = np.clip(np.asarray(b, dtype=float), self.x[0], self.x[-1])
        idx = np.clip(np.searchsorted(self.x, b, side="right") - 1, 0, len(self.x) - 2)
        x0 = self.x[idx]
        y0 = self.y[idx]
        h_full = self.x[idx + 1] - x0
        s = (self.y[idx + 1] - y0) / h_full
        h = b - x0
        m0 = y0 * h + 0.5 * s * h ** 2
        inner1 = 0.5 * y0 * h ** 2 + s * h ** 3 / 3.0
        inner2 = y0 * h ** 3 / 3.0 + 0.25 * s * h ** 4
        m1 = x0 * m0 + inner1
        m2 = x0 ** 2 * m0 + 2.0 * x0 * inner1 + inner2
        return (self._seg_prefix[0][idx] + m0,
                self._seg_prefix[1][idx] + m1,
                self._seg_prefix[2][idx] + m2)

    def cell_moments(self, boundaries) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-cell moments for cells delimited by the inner `boundaries`."""
        edges = np.concatenate(([self.x[0]], np.asarray(boundaries, float), [self.x[-1]]))
        p0, p1, p2 = self.moments_upto(edges)
        return np.diff(p0), np.diff(p1), np.diff(p2)

    @property
    def mean(self) -> float:
        return float(self._seg_prefix[1][-1] / self._seg_prefix[0][-1])

    @property
    def second_moment(self) -> float:
        return float(self._seg_prefix[2][-1] / self._seg_prefix[0][-1])


def _as_grid_density(input_density, work_range, n) -> GridDensity:
    if isinstance(input_density, GridDensity):
        return input_density
    return GridDensity(input_density, work_range, n)


@dataclass(frozen=True)
class QuantizerSpec:
    """Reconstruction levels with their decision boundaries and statistics."""

    levels: tuple[float, ...]
    boundaries: tuple[float, ...]
    probabilities: tuple[float, ...] | None = None
    codeword_lengths: tuple[int, ...] | None = None
    mse: float | None = None
    converged: bool = True
    iterations: int = 0

    def __post_init__(self):
        lv = np.asarray(self.levels)
        if lv.size == 0:
            raise InputError("quantizer needs at least one level")
        if np.any(np.diff(lv) <= 0):
            raise InputError("levels must be strictly increasing")
        bd = np.asarray(self.boundaries)
        if bd.size != lv.size - 1:
            raise InputError("need exactly K-1 decision boundaries")
        if bd.size and (np.any(bd[:-1] >= bd[1:]) or np.any(bd <= lv[:-1]) or np.any(bd >= lv[1:])):
            raise InputError("boundaries must interleave the levels")
        if self.probabilities is not None:
            total = float(np.sum(self.probabilities))
            if abs(total - 1.0) > 1e-9:
                raise InputError(f"probabilities sum to {total}, expected 1")


def _mse_for(dens: GridDensity, levels: np.ndarray) -> float:
    bounds = 0.5 * (levels[1:] + levels[:-1])
    p, m1, m2 = dens.cell_moments(bounds)
    return float(np.sum(m2 - 2.0 * levels * m1 + levels ** 2 * p))


def uniform_quantizer(step: float, K: int, input_density,
                      work_range: tuple[float, float] = WORK_RANGE,
                      grid_points: int = GRID_POINTS) -> QuantizerSpec:
    """K equally spaced levels centered on zero with the given step."""
    if step <= 0:
        raise InputError("step must be positive")
    if K < 1:
        raise InputError("need at least one level")
    dens = _as_grid_density(input_density, work_range, grid_points)
    levels = (np.arange(K) - (K - 1) / 2.0) * step
    bounds = 0.5 * (levels[1:] + levels[:-1])
    p, m1, m2 = dens.cell_moments(bounds)
    mse = float(np.sum(m2 - 2.0 * levels * m1 + levels ** 2 * p))
    return QuantizerSpec(levels=tuple(levels), boundaries=tuple(bounds),
                         probabilities=tuple(p / np.sum(p)), mse=mse)


def lloyd(input_density, K: int, tol: float = 1e-10, max_iter: int = 20000,
          work_range: tuple[float, float] = WORK_RANGE,
          grid_points: int = GRID_POINTS) -> QuantizerSpec:
    """Fixed point of alternating centroid / midpoint updates (K-means).

    Initialized at the quantiles of the cube-root-companded density, which
    starts close to the high-resolution optimum.  MSE decrease is checked on
    every iteration.  If the level movement never drops below `tol` the best
    iterate is returned with ``converged=False``.
    """
    if K < 1:
        raise InputError("need at least one level")
    dens = _as_grid_density(input_density, work_range, grid_points)
    if K == 1:
        mean = dens.mean
        mse = dens.second_moment - mean ** 2
        return QuantizerSpec(levels=(mean,), boundaries=(),
                             probabilities=(1.0,), mse=mse)

    comp = np.concatenate(([0.0], np.cumsum(
        0.5 * (dens.y[1:] ** (1 / 3) + dens.y[:-1] ** (1 / 3)) * np.diff(dens.x))))
    targets = (np.arange(K) + 0.5) / K * comp[-1]
    levels = np.interp(targets, comp, dens.x)
    levels = np.unique(levels)
    if levels.size < K:   # degenerate companding; fall back to a linear spread
        levels = np.linspace(dens.x[0] / 2, dens.x[-1] / 2, K)

    prev_mse = _mse_for(dens, levels)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        bounds = 0.5 * (levels[1:] + levels[:-1])
        p, m1, _ = dens.cell_moments(bounds)
        new_levels = np.where(p > 0, m1 / np.where(p > 0, p, 1.0), levels)
        move = float(np.max(np.abs(new_levels - levels)))
        levels = new_levels
        mse = _mse_for(dens, levels)
        if mse > prev_mse + 1e-14 + 1e-10 * prev_mse:
            raise AssertionError(
                f"Lloyd MSE increased at iteration {it}: {prev_mse} -> {mse}")
        prev_mse = mse
        if move < tol:
            converged = True
            break

    bounds = 0.5 * (levels[1:] + levels[:-1])
    p, _, _ = dens.cell_moments(bounds)
    return QuantizerSpec(levels=tuple(levels), boundaries=tuple(bounds),
                         probabilities=tuple(p / np.sum(p)), mse=prev_mse,
                         converged=converged, iterations=it)


def entropy_rate(spec: QuantizerSpec, input_density=None,
                 work_range: tuple[float, float] = WORK_RANGE,
                 grid_points: int = GRID_POINTS) -> float:
    """Shannon entropy of the quantizer output in bits per sample."""
    if spec.probabilities is not None:
        p = np.asarray(spec.probabilities)
    elif input_density is not None:
        dens = _as_grid_density(input_density, work_range, grid_points)
        p, _, _ = dens.cell_moments(np.asarray(spec.boundaries))
        p = p / np.sum(p)
    else:
        raise InputError("need probabilities or an input density")
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def uniform_step_for_entropy(input_density, target_bits: float,
                             work_range: tuple[float, float] = WORK_RANGE,
                             grid_points: int = GRID_POINTS) -> float:
    """Step of the zero-centered uniform quantizer whose output entropy is
    `target_bits` on the given density."""
    dens = _as_grid_density(input_density, work_range, grid_points)
    span = dens.x[-1] - dens.x[0]

    def entropy_of(step):
        k = int(math.ceil(span / step)) | 1   # odd level count covers the range
        return entropy_rate(uniform_quantizer(step, k, dens)) - target_bits

    lo = span / 2.0 ** (target_bits + 6)
    return float(brentq(entropy_of, lo, span, xtol=1e-12))


def quantize_sequence(spec: QuantizerSpec, samples) -> tuple[np.ndarray, np.ndarray]:
    """Map samples to nearest levels; midway ties go to the lower level,
    values beyond the outer boundaries saturate."""
    samples = np.asarray(samples, dtype=float)
    idx = np.searchsorted(np.asarray(spec.boundaries), samples, side="left")
    levels = np.asarray(spec.levels)
    return idx, levels[idx]
