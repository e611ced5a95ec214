"""BER curves of the hybrid link and the Eb/N0 gains at BER 1e-4.

Runs the coherent and differential scenarios in demos/scenarios, writes
one CSV per scenario next to this script and prints the gain of every
combining scheme over the PLC-only receiver. Takes a few minutes on one
core; pass a worker count to spread the trials over processes.

    python3 demos/reproduce_gains.py [workers]
"""

import sys
import time
from pathlib import Path

from hybridlink.config import load_scenario
from hybridlink.simulator import report, run_sweep, write_csv

HERE = Path(__file__).resolve().parent
workers = int(sys.argv[1]) if len(sys.argv) > 1 else 1

for name in ("coherent", "differential"):
    sc = load_scenario(HERE / "scenarios" / f"{name}.ini")
    t0 = time.time()
    points = run_sweep(sc, workers=workers)
    out = HERE / f"{name}_ber.csv"
    write_csv(points, out)
    print(f"\n{name}: {len(points)} points in {time.time() - t0:.0f} s -> {out.name}")

    # one line per curve, BER at each Eb/N0
    curves = {}
    for p in points:
        curves.setdefault(p.scheme, []).append(p)
    print("  Eb/N0  " + " ".join(f"{x:>8g}" for x in sc.sweep))
    for scheme, pts in curves.items():
        print(f"  {scheme:<7}" + " ".join(f"{p.ber:8.1e}" for p in pts))

    baseline = [p for p in points if p.scheme == "plc_only"]
    others = [p for p in points if p.scheme != "plc_only"]
    for row in report(others, baseline, 1e-4):
        print("  " + str(row))
