"""Power spectral densities and spectral integrals.

Every PSD is an analytic, symmetric, nonnegative density together with grid
metadata (truncation frequency ``f_max``, resolution ``grid_step``) and a
list of *breakpoints*: frequencies where the density may jump or kink.  All
integrals split the domain at breakpoints and apply the trapezoid rule inside
each smooth piece, which makes them exact for flat and piecewise-linear
spectra and O(step^2) for smooth ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .bands import BandSet
from .errors import InputError

# Relative inward nudge applied to piece endpoints before evaluating the
# density, so that one-sided limits are used at jumps.
_EDGE_NUDGE = 1e-9


@dataclass(frozen=True)
class Psd:
    """Symmetric power spectral density with evaluation and grid metadata."""

    kind: str
    params: dict
    density: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    breakpoints: tuple[float, ...]
    f_max: float
    grid_step: float
    support: BandSet
    f_nyq: float | None          # None when the spectrum is not bandlimited
    is_unimodal: bool
    tail_mass: float = 0.0       # analytic variance beyond +-f_max

    def __post_init__(self):
        if self.f_max <= 0 or self.grid_step <= 0:
            raise InputError("f_max and grid_step must be positive")

    def at(self, f) -> np.ndarray:
        """Density evaluated elementwise (symmetric by construction)."""
        return self.density(np.asarray(f, dtype=float))

    @property
    def domain(self) -> BandSet:
        return BandSet.interval(-self.f_max, self.f_max)

    @property
    def peak(self) -> float:
        grid = _scout_nodes(self, self.domain)
        return max(float(y.max()) for _, y in grid) if grid else 0.0


# ---------------------------------------------------------------------------
# Factories
# ---------------------------------------------------------------------------

def flat_psd(W: float, f_max: float | None = None,
             grid_step: float | None = None) -> Psd:
    """Unit-variance flat spectrum 1/(2W) on (-W, W)."""
    if W <= 0:
        raise InputError("flat PSD needs W > 0")
    level = 1.0 / (2.0 * W)

    def density(f):
        return np.where(np.abs(f) < W, level, 0.0)

    f_nyq = 2.0 * W
    return Psd(
        kind="flat", params={"W": W}, density=density,
        breakpoints=(-W, W),
        f_max=f_max if f_max is not None else W,
        grid_step=grid_step if grid_step is not None else f_nyq / 2048,
        support=BandSet.interval(-W, W), f_nyq=f_nyq, is_unimodal=True,
    )


def triangular_psd(W: float, f_max: float | None = None,
                   grid_step: float | None = None) -> Psd:
    """Unit-variance triangular spectrum peaking at f = 0, support (-W, W)."""
    if W <= 0:
        raise InputError("triangular PSD needs W > 0")
    peak = 1.0 / W

    def density(f):
        return np.maximum(peak * (1.0 - np.abs(f) / W), 0.0)

    f_nyq = 2.0 * W
    return Psd(
        kind="triangular", params={"W": W}, density=density,
        breakpoints=(-W, 0.0, W),
        f_max=f_max if f_max is not None else W,
        grid_step=grid_step if grid_step is not None else f_nyq / 2048,
        support=BandSet.interval(-W, W), f_nyq=f_nyq, is_unimodal=True,
    )


def multimodal_psd(lobes: Sequence[tuple[float, float]] = ((0.35, 0.1),),
                   weights: Sequence[float] | None = None,
                   f_max: float | None = None,
                   grid_step: float | None = None) -> Psd:
    """Unit-variance sum of mirrored raised-cosine lobe pairs.

    Each ``(center, width)`` pair places one raised-cosine lobe at +center and
    its mirror image at -center.  Weights (default: equal) give the fraction
    of total power carried by each pair.
    """
    lobes = [(float(c), float(w)) for c, w in lobes]
    if not lobes:
        raise InputError("multimodal PSD needs at least one lobe")
    for c, w in lobes:
        if w <= 0 or c < 0:
            raise InputError("lobe centers must be >= 0 and widths > 0")
    if weights is None:
        weights = [1.0 / len(lobes)] * len(lobes)
    weights = [float(v) for v in weights]
    if len(weights) != len(lobes) or any(v < 0 for v in weights):
        raise InputError("need one nonnegative weight per lobe pair")
    total = sum(weights)
    if total <= 0:
        raise InputError("weights must not all be zero")
    weights = [v / total for v in weights]

    def density(f):
        f = np.asarray(f, dtype=float)
        out = np.zeros_like(f)
        for (c, w), wt in zip(lobes, weights):
            for ctr in ((c, -c) if c > 0 else (c,)):
                u = f - ctr
                inside = np.abs(u) < w / 2
                lobe = 0.5 * (1.0 + np.cos(2.0 * np.pi * u / w))
                # each raised cosine integrates to w/2; pair carries weight wt
                n_copies = 2 if c > 0 else 1
                out += np.where(inside, wt / (n_copies * w / 2) * lobe, 0.0)
        return out

    edges = sorted({e for c, w in lobes for e in
                    (c - w / 2, c + w / 2, -c - w / 2, -c + w / 2)} | {0.0})
    sup = BandSet(tuple((c - w / 2, c + w / 2) for c, w in lobes)
                  + tuple((-c - w / 2, -c + w / 2) for c, w in lobes if c > 0))
    hi = max(abs(e) for e in edges)
    f_nyq = 2.0 * hi
    return Psd(
        kind="multimodal", params={"lobes": tuple(lobes), "weights": tuple(weights)},
        density=density, breakpoints=tuple(edges),
        f_max=f_max if f_max is not None else hi,
        grid_step=grid_step if grid_step is not None else f_nyq / 2048,
        support=sup, f_nyq=f_nyq,
        is_unimodal=(len(lobes) == 1 and lobes[0][0] == 0.0),
    )


def ou_psd(f0: float, f_max: float | None = None,
           grid_step: float | None = None, tail_tol: float = 2e-3) -> Psd:
    """Unit-variance Lorentzian spectrum (1/f0) / ((pi f / f0)^2 + 1).

    The spectrum of the Gauss-Markov process; not bandlimited, so integrals
    are truncated at ``f_max`` and the analytic tail mass is recorded.
    """
    if f0 <= 0:
        raise InputError("ou PSD needs f0 > 0")
    fm = f_max if f_max is not None else 200.0 * f0
    tail = 1.0 - (2.0 / np.pi) * math.atan(np.pi * fm / f0)
    if tail > tail_tol:
        raise InputError(
            f"f_max={fm} leaves tail mass {tail:.3e} > tolerance {tail_tol:.1e}")

    def density(f):
        return (1.0 / f0) / ((np.pi * f / f0) ** 2 + 1.0)

    return Psd(
        kind="ou", params={"f0": f0}, density=density,
        breakpoints=(0.0,),
        f_max=fm,
        grid_step=grid_step if grid_step is not None else 1e-3 * f0,
        support=BandSet.interval(-fm, fm), f_nyq=None, is_unimodal=True,
        tail_mass=tail,
    )


def piecewise_psd(points: Sequence[tuple[float, float]],
                  f_max: float | None = None,
                  grid_step: float | None = None) -> Psd:
    """PSD from (frequency, density) samples for f >= 0, mirrored to f < 0.

    Density is linearly interpolated between samples and zero beyond the
    last one.  Frequencies must be strictly increasing; densities >= 0.
    """
    pts = [(float(f), float(d)) for f, d in points]
    if len(pts) < 2:
        raise InputError("piecewise PSD needs at least two samples")
    freqs = np.array([f for f, _ in pts])
    dens = np.array([d for _, d in pts])
    if freqs[0] < 0:
        raise InputError("piecewise samples must have f >= 0 (mirrored internally)")
    if np.any(np.diff(freqs) <= 0):
        raise InputError("piecewise frequencies must be strictly increasing")
    if np.any(dens < 0):
        raise InputError("piecewise densities must be nonnegative")

    def density(f):
        return np.interp(np.abs(np.asarray(f, dtype=float)), freqs, dens,
                         left=dens[0], right=0.0)

    hi = float(freqs[-1])
    # support: segments where the interpolant is positive somewhere
    segs = [(freqs[i], freqs[i + 1]) for i in range(len(freqs) - 1)
            if dens[i] > 0 or dens[i + 1] > 0]
    sup = BandSet(tuple(segs) + tuple((-b, -a) for a, b in segs))
    edges = sorted({+f for f in freqs} | {-f for f in freqs})
    vals_abs = dens
    mono = bool(np.all(np.diff(vals_abs) <= 1e-12))
    return Psd(
        kind="piecewise", params={"points": tuple(pts)}, density=density,
        breakpoints=tuple(edges),
        f_max=f_max if f_max is not None else hi,
        grid_step=grid_step if grid_step is not None else max(hi / 2048, 1e-9),
        support=sup, f_nyq=2.0 * hi, is_unimodal=mono,
    )


def load_piecewise(path, f_max=None, grid_step=None) -> Psd:
    """Read the `psd-piecewise v1` text format: header, then `<f> <density>` lines."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != "psd-piecewise v1":
        raise InputError("expected header line 'psd-piecewise v1'")
    pts = []
    for ln in lines[1:]:
        cols = ln.split()
        if len(cols) != 2:
            raise InputError(f"malformed sample line: {ln!r}")
        pts.append((float(cols[0]), float(cols[1])))
    return piecewise_psd(pts, f_max=f_max, grid_step=grid_step)


_FACTORIES = {
    "flat": lambda p, **kw: flat_psd(p["W"], **kw),
    "triangular": lambda p, **kw: triangular_psd(p["W"], **kw),
    "multimodal": lambda p, **kw: multimodal_psd(
        p.get("lobes", ((p.get("center", 0.35), p.get("width", 0.1)),)),
        p.get("weights"), **kw),
    "ou": lambda p, **kw: ou_psd(p["f0"], **kw),
    "piecewise": lambda p, **kw: (
        load_piecewise(p["file"], **kw) if "file" in p
        else piecewise_psd(p["points"], **kw)),
}


def make_psd(kind: str, params: dict, f_max: float | None = None,
             grid_step: float | None = None) -> Psd:
    """Build a PSD of the given kind; see the individual factories."""
    try:
        factory = _FACTORIES[kind]
    except KeyError:
        raise InputError(f"unknown PSD kind {kind!r}; "
                         f"choose from {sorted(_FACTORIES)}") from None
    return factory(params, f_max=f_max, grid_step=grid_step)


# ---------------------------------------------------------------------------
# Piecewise sampling / integration engine
# ---------------------------------------------------------------------------

def split_pieces(bands: BandSet, breakpoints: Sequence[float]) -> list[tuple[float, float]]:
    """Cut every interval of `bands` at the breakpoints lying inside it."""
    pieces = []
    for lo, hi in bands.intervals:
        cuts = [b for b in breakpoints if lo < b < hi]
        for a, b in zip([lo] + cuts, cuts + [hi]):
            if b - a > 1e-15:
                pieces.append((a, b))
    return pieces


def sample_piece(fn, lo: float, hi: float, step: float,
                 min_nodes: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and values on [lo, hi]; endpoint values are one-sided limits."""
    n = max(min_nodes - 1, int(math.ceil((hi - lo) / step)))
    x = np.linspace(lo, hi, n + 1)
    xe = x.copy()
    nudge = _EDGE_NUDGE * (hi - lo)
    xe[0] += nudge
    xe[-1] -= nudge
    return x, np.asarray(fn(xe), dtype=float)


def sampled_grid(fn, bands: BandSet, breakpoints: Sequence[float],
                 step: float) -> list[tuple[np.ndarray, np.ndarray]]:
    return [sample_piece(fn, lo, hi, step)
            for lo, hi in split_pieces(bands, breakpoints)]


def integrate_sampled(grid) -> float:
    return float(sum(np.trapezoid(y, x) for x, y in grid))


def _scout_nodes(psd: Psd, bands: BandSet):
    return sampled_grid(psd.at, bands, psd.breakpoints, psd.grid_step)


# ---------------------------------------------------------------------------
# Public spectral integrals
# ---------------------------------------------------------------------------

def total_variance(psd: Psd) -> float:
    """Trapezoid integral of the density over [-f_max, f_max]."""
    return integrate_sampled(_scout_nodes(psd, psd.domain))


def integrate_band(psd: Psd, bands: BandSet) -> float:
    """Spectral power inside `bands`; additive over disjoint sets."""
    if bands.is_empty:
        return 0.0
    if bands.lo < -psd.f_max - 1e-12 or bands.hi > psd.f_max + 1e-12:
        raise InputError(
            f"band [{bands.lo}, {bands.hi}] outside grid range +-{psd.f_max}")
    return integrate_sampled(_scout_nodes(psd, bands))


def superlevel_set(psd: Psd, tau: float) -> BandSet:
    """Grid-resolved {f : S(f) >= tau} with root-refined interval endpoints."""
    if tau < 0:
        raise InputError("superlevel threshold must be >= 0")
    if tau == 0.0:
        return psd.domain
    intervals = []
    for lo, hi in split_pieces(psd.domain, psd.breakpoints):
        x, y = sample_piece(psd.at, lo, hi, psd.grid_step)
        mask = y >= tau
        if not mask.any():
            continue
        start = lo if mask[0] else None
        for i in range(len(x) - 1):
            if mask[i] == mask[i + 1]:
                continue
            xc = _refine_crossing(psd.at, tau, x[i], x[i + 1], y[i], y[i + 1])
            if mask[i]:          # leaving the set
                intervals.append((start, xc))
                start = None
            else:                # entering the set
                start = xc
        if start is not None:
            intervals.append((start, hi))
    return BandSet(tuple(intervals))


def _refine_crossing(fn, tau, x0, x1, y0, y1) -> float:
    """Root of fn - tau inside [x0, x1] bracketed by node values y0, y1."""
    g0, g1 = y0 - tau, y1 - tau
    if g0 == 0.0:
        return float(x0)
    if g1 == 0.0:
        return float(x1)
    f = lambda t: float(fn(np.array([t]))[0]) - tau
    a, b = float(x0), float(x1)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        # node values disagree with point evaluation (jump inside the cell);
        # fall back to linear interpolation between node values
        return float(x0 + (tau - y0) / (y1 - y0) * (x1 - x0))
    return float(brentq(f, a, b, xtol=1e-14, rtol=8.9e-16))


def spectral_occupancy(psd: Psd) -> float:
    """Lebesgue measure of the support, truncated to [-f_max, f_max]."""
    return psd.support.intersect(psd.domain).measure
