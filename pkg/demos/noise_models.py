"""What the two impulsive noise models look like.

Prints the moments of the Gaussian-mixture wireless noise and the
per-region power of the cyclostationary PLC noise, then shows how the
noise power seen by each OFDM symbol follows the mains half-cycle.
"""

import numpy as np

from hybridlink.noise import CycloNoise, CycloParams, GmParams, gm_sample
from hybridlink.ofdm import OfdmConfig

rng = np.random.default_rng(0)

gp = GmParams()
x = gm_sample(10 ** 6, gp, rng)
r = x.real
print("Gaussian mixture: weights", gp.weights, "variances", gp.variances)
print(f"  power {np.mean(np.abs(x) ** 2):.3f} (model {gp.mean_variance:.3f})")
print(f"  kurtosis of the real part {np.mean(r ** 4) / np.mean(r ** 2) ** 2:.1f} (Gaussian: 3)")

cfg = OfdmConfig()
model = CycloNoise(CycloParams(sample_rate=cfg.sample_rate), phase=0)
p = model.params
print(f"\nCyclostationary: period {p.period_samples} samples "
      f"({p.period_samples / cfg.sample_rate * 1e3:.2f} ms)")
for reg, frac in zip(p.regions, p.time_fractions):
    print(f"  region from {reg.start:.2f} of the period: power x{reg.power:g}, "
          f"{frac:.0%} of the time")
print(f"  time-average power {p.mean_power:.1f}")

# noise power per OFDM symbol over two half-cycles
n_sym = 2 * p.period_samples // cfg.symbol_len
draw = model.sample((n_sym * cfg.symbol_len,), rng)
starts = np.arange(n_sym) * cfg.symbol_len + cfg.cp_len
labels = model.window_region(draw, starts, cfg)
power = [np.mean(np.abs(draw.samples[s:s + cfg.fft_size]) ** 2) for s in starts]
print("\n symbol  region  power")
for i, (lab, pw) in enumerate(zip(labels, power)):
    print(f"{i:7d} {lab:7d} {pw:7.1f}  " + "#" * int(round(np.log10(pw * 10) * 10)))
