"""Distortion versus sampling rate at a fixed bit budget.

For a triangular spectrum, compares three samplers against the fundamental
bound: a matched low-pass pre-filter, no pre-filter at all (aliasing
allowed), and the bound itself.  The curves flatten at the distortion-rate
function once the sampling rate passes the critical rate, well below the
Nyquist rate.
"""
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import adxlab as ax

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

tri = ax.triangular_psd(0.5)
rate = 1.0
drf = ax.shannon_drf(tri, rate).distortion
f_r = ax.critical_rate(tri, rate)

fs_grid = np.linspace(0.08, 1.3, 40)
lpf_total = [ax.d_si(tri, ax.lpf(fs / 2), fs, rate).total for fs in fs_grid]
raw_total = [ax.d_si(tri, ax.allpass(), fs, rate).total for fs in fs_grid]
bound = [ax.adx_lower_bound(tri, fs, rate).total for fs in fs_grid]

fig, axis = plt.subplots(figsize=(6.5, 4))
axis.plot(fs_grid, raw_total, label="no pre-filter (aliasing)", color="tab:gray")
axis.plot(fs_grid, lpf_total, label="low-pass pre-filter", color="tab:blue")
axis.plot(fs_grid, bound, "--", label="fundamental bound", color="tab:red")
axis.axhline(drf, color="k", lw=0.8, ls=":", label="distortion-rate function")
axis.axvline(f_r, color="k", lw=0.8, ls="-.")
axis.annotate(f"critical rate $f_R$ = {f_r:.3f}", (f_r, drf),
              textcoords="offset points", xytext=(8, 14))
axis.axvline(1.0, color="tab:green", lw=0.8, ls="-.")
axis.annotate("Nyquist", (1.0, max(raw_total) * 0.85),
              textcoords="offset points", xytext=(4, 0), color="tab:green")
axis.set_xlabel("sampling rate $f_s$ [Hz]")
axis.set_ylabel("distortion")
axis.set_title(f"Triangular spectrum, R = {rate} bit/s")
axis.legend()
fig.tight_layout()
fig.savefig(OUT / "sampling_tradeoff.png", dpi=120)
print(f"wrote {OUT / 'sampling_tradeoff.png'}; "
      f"DRF={drf:.4f}, f_R={f_r:.4f} (Nyquist rate is 1.0)")
