"""Monte Carlo cross-validation of the analytic formulas.

Synthesizes stationary Gaussian paths from the flat spectrum, runs the
physical PCM chain (filter, sample, quantize, interpolate) and the optimal
linear estimator, and compares time-averaged squared errors against the
closed-form predictions with their standard errors.
"""
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import adxlab as ax

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

flat = ax.flat_psd(0.5)
ens = ax.synthesize(flat, duration=256.0, dense_grid_rate=4.0,
                    trials=300, master_seed=42)
print(f"{ens.trials} paths of {ens.samples} samples, "
      f"ensemble variance {ens.paths.var():.4f}")

# estimation error versus sampling rate, no bit budget
fs_grid = [0.25, 0.5, 1.0, 2.0]
emp, err, ana = [], [], []
for fs in fs_grid:
    est = ax.empirical_mmse_si(ens, flat, ax.allpass(), fs)
    emp.append(est.value)
    err.append(3 * est.stderr)
    ana.append(ax.mmse_si(flat, ax.allpass(), fs))

fig, (left, right) = plt.subplots(1, 2, figsize=(9.5, 4))
left.errorbar(fs_grid, emp, yerr=err, fmt="o", capsize=4,
              label="simulated (3 std err)")
left.plot(fs_grid, ana, "x--", label="analytic")
left.set_xlabel("sampling rate $f_s$ [Hz]")
left.set_ylabel("estimation MSE")
left.set_title("Estimator error without a bit budget")
left.legend()

# PCM chain at the Nyquist rate versus bits per sample
bits = [2, 4, 6, 8]
emp_q, err_q, ana_q = [], [], []
for b in bits:
    run = ax.run_pcm_pipeline(ens, flat, 1.0, float(b), quantizer_mode="entropy")
    emp_q.append(run.total)
    err_q.append(3 * run.stderr)
    ana_q.append(ax.pcm_distortion(flat, 1.0, float(b)).total)

right.errorbar(bits, emp_q, yerr=err_q, fmt="o", capsize=4,
               label="simulated (3 std err)")
right.plot(bits, ana_q, "x--", label="white-noise model")
right.set_yscale("log")
right.set_xlabel("bits per sample")
right.set_ylabel("PCM distortion")
right.set_title("PCM chain at the Nyquist rate")
right.legend()

fig.tight_layout()
fig.savefig(OUT / "monte_carlo_checks.png", dpi=120)
print(f"wrote {OUT / 'monte_carlo_checks.png'}")
for b, e, a in zip(bits, emp_q, ana_q):
    print(f"  {b} bits/sample: simulated {e:.3e}  model {a:.3e}")
