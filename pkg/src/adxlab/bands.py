"""Finite unions of disjoint frequency intervals.

A :class:`BandSet` is the common currency for filter supports, preserved
spectrum sets and integration domains.  Intervals are half-open ``[lo, hi)``
so that touching bands neither overlap nor leave gaps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

# Overlaps thinner than this are treated as empty (guards float noise in
# shifted/intersected interval endpoints).
_THIN = 1e-12


def _normalize(intervals) -> tuple[tuple[float, float], ...]:
    ivs = [(float(lo), float(hi)) for lo, hi in intervals if hi - lo > _THIN]
    ivs.sort()
    merged: list[list[float]] = []
    for lo, hi in ivs:
        if merged and lo <= merged[-1][1] + _THIN:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


@dataclass(frozen=True)
class BandSet:
    """Sorted union of disjoint half-open frequency intervals."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize(self.intervals))

    @classmethod
    def empty(cls) -> "BandSet":
        return cls(())

    @classmethod
    def interval(cls, lo: float, hi: float) -> "BandSet":
        if hi < lo:
            raise InputError(f"interval with hi < lo: ({lo}, {hi})")
        return cls(((lo, hi),))

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def lo(self) -> float:
        return self.intervals[0][0]

    @property
    def hi(self) -> float:
        return self.intervals[-1][1]

    def indicator(self, f) -> np.ndarray:
        """1.0 inside the set, 0.0 outside, evaluated elementwise."""
        f = np.asarray(f, dtype=float)
        if not self.intervals:
            return np.zeros_like(f)
        edges = np.array([e for iv in self.intervals for e in iv])
        idx = np.searchsorted(edges, f, side="right")
        return (idx % 2 == 1).astype(float)

    def shift(self, delta: float) -> "BandSet":
        return BandSet(tuple((lo + delta, hi + delta) for lo, hi in self.intervals))

    def mirror(self) -> "BandSet":
        return BandSet(tuple((-hi, -lo) for lo, hi in self.intervals))

    def union(self, other: "BandSet") -> "BandSet":
        return BandSet(self.intervals + other.intervals)

    def intersect(self, other: "BandSet") -> "BandSet":
        out = []
        for alo, ahi in self.intervals:
            for blo, bhi in other.intervals:
                lo, hi = max(alo, blo), min(ahi, bhi)
                if hi - lo > _THIN:
                    out.append((lo, hi))
        return BandSet(tuple(out))

    def difference(self, other: "BandSet") -> "BandSet":
        out = []
        for lo, hi in self.intervals:
            cuts = [(max(lo, blo), min(hi, bhi)) for blo, bhi in other.intervals]
            cuts = [(a, b) for a, b in cuts if b - a > _THIN]
            pos = lo
            for a, b in sorted(cuts):
                if a - pos > _THIN:
                    out.append((pos, a))
                pos = max(pos, b)
            if hi - pos > _THIN:
                out.append((pos, hi))
        return BandSet(tuple(out))

    def clip(self, lo: float, hi: float) -> "BandSet":
        return self.intersect(BandSet.interval(lo, hi))

    def overlap_measure(self, other: "BandSet") -> float:
        return self.intersect(other).measure

    def is_symmetric(self, tol: float = 1e-9) -> bool:
        mirr = self.mirror()
        return (
            self.difference(mirr).measure <= tol
            and mirr.difference(self).measure <= tol
        )

    def symmetric_core(self, target_measure: float) -> "BandSet":
        """Symmetric subset of total measure `target_measure`, closest to f = 0.

        Grows the window ``[-x, x]`` outward from the origin until the
        intersection with this set reaches the target.  Assumes the set is
        symmetric; used to break ties between energy-equal candidate supports.
        """
        if target_measure <= _THIN:
            return BandSet.empty()
        if target_measure >= self.measure - _THIN:
            return self
        span = max(abs(self.lo), abs(self.hi))
        lo_x, hi_x = 0.0, span
        for _ in range(200):
            mid = 0.5 * (lo_x + hi_x)
            m = self.clip(-mid, mid).measure
            if m < target_measure:
                lo_x = mid
            else:
                hi_x = mid
        return self.clip(-hi_x, hi_x)
