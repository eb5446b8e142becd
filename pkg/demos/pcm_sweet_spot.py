"""Where PCM should sample: the sampling/quantization error balance.

PCM splits its error into spectrum lost to the anti-aliasing filter (shrinks
with f_s) and in-band quantization noise (grows as each sample gets fewer
bits).  For a flat spectrum the balance lands exactly at the Nyquist rate;
any non-uniform energy distribution pushes the optimum below it.
"""
import pathlib
import warnings

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import adxlab as ax

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

rate = 1.0
fig, axes = plt.subplots(1, 2, figsize=(9.5, 4), sharey=True)
for axis, (name, psd) in zip(axes, [("flat", ax.flat_psd(0.5)),
                                    ("triangular", ax.triangular_psd(0.5))]):
    fs_grid = np.linspace(0.05, 1.6, 60)
    pts = [ax.pcm_distortion(psd, fs, rate) for fs in fs_grid]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        f_star, best = ax.pcm_optimal_rate(psd, rate)
    bound = [ax.adx_lower_bound(psd, fs, rate).total for fs in fs_grid]

    axis.plot(fs_grid, [p.total for p in pts], label="PCM total")
    axis.plot(fs_grid, [p.d_smp for p in pts], ":", label="sampling part")
    axis.plot(fs_grid, [p.d_qnt for p in pts], ":", label="quantization part")
    axis.plot(fs_grid, bound, "--", color="tab:red", label="fundamental bound")
    axis.plot([f_star], [best.total], "k*", ms=12,
              label=f"optimum $f_s$={f_star:.3f}")
    axis.axvline(1.0, color="0.6", lw=0.8)
    axis.set_title(f"{name} spectrum")
    axis.set_xlabel("sampling rate $f_s$ [Hz]")
    axis.legend(fontsize=8)
axes[0].set_ylabel("distortion")
fig.suptitle(f"PCM distortion at R = {rate} bit/s (Nyquist rate = 1.0)")
fig.tight_layout()
fig.savefig(OUT / "pcm_sweet_spot.png", dpi=120)
print(f"wrote {OUT / 'pcm_sweet_spot.png'}")
