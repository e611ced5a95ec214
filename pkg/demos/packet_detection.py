"""Two-stage packet detection on a synthetic wireless capture.

Builds a capture with three packets at different carrier offsets in
white noise, runs the detector over it and compares what it found with
the ground truth. Also writes the capture as interleaved float32 I/Q so
the same search can be repeated with ``hybridlink detect capture.iq``.
"""

from pathlib import Path

import numpy as np

from hybridlink.core import complex_normal
from hybridlink.ofdm import OfdmConfig
from hybridlink.sync import PreambleSpec, SyncThresholds, apply_cfo, band_limit, detect_all, gen_preamble

cfg = OfdmConfig()
spec = PreambleSpec()
th = SyncThresholds()
rng = np.random.default_rng(3)

pre = gen_preamble(spec, cfg)
signal_power = np.mean(np.abs(pre[:cfg.fft_size]) ** 2)
snr_db = 3.0

truth = [(700, 120.0), (5200, -640.0), (9800, 1562.5 + 300.0)]   # start, CFO in Hz
x = np.zeros(13000, dtype=complex)
for start, cfo in truth:
    seg = apply_cfo(pre, cfo, cfg.sample_rate, start)
    x[start:start + pre.size] += seg
x += complex_normal(rng, x.shape, signal_power / 10 ** (snr_db / 10))

# keep only the occupied band plus room for the largest integer offset
found = detect_all(band_limit(x, cfg, th.int_cfo_range + 1), spec, cfg, th)

print(f"SNR {snr_db} dB, subcarrier spacing {cfg.subcarrier_spacing:g} Hz")
print(" true start  found   true CFO   est. CFO   int bins  metric")
for (start, cfo), r in zip(truth, found):
    print(f"{start:10d} {r.start_index:7d} {cfo:10.1f} {r.cfo_hz:10.1f} {r.int_cfo_bins:9d} "
          f"{r.metric_peak:7.3f}")
if len(found) != len(truth):
    print(f"found {len(found)} packets, expected {len(truth)}")

iq = np.empty(2 * x.size, dtype=np.float32)
iq[0::2], iq[1::2] = x.real, x.imag
iq.tofile(Path(__file__).resolve().parent / "capture.iq")
