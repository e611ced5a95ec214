"""Command-line entry point: ``hybridlink ber|gain|detect|plot``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace

import numpy as np

from .errors import HybridLinkError

log = logging.getLogger("hybridlink")


def _cmd_ber(args) -> int:
    from .config import load_scenario
    from .simulator import run_sweep, write_csv

    sc = load_scenario(args.config)
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)

    def progress(ebno, acc):
        log.info("Eb/N0 %g dB: %s", ebno,
                 ", ".join(f"{s} {e}/{b}" for s, (e, b) in acc.items()))

    points = run_sweep(sc, workers=args.workers, progress=progress)
    write_csv(points, args.out)
    return 0


def _cmd_gain(args) -> int:
    from .simulator import read_csv, report

    rows = report(read_csv(args.curve), read_csv(args.baseline), args.target_ber)
    if not rows:
        print("no curves to compare", file=sys.stderr)
        return 1
    for row in rows:
        print(row)
    return 0


def _cmd_detect(args) -> int:
    from .ofdm import OfdmConfig
    from .sync import PreambleSpec, SyncThresholds, band_limit, detect_all

    raw = np.fromfile(args.input, dtype=np.float32)
    if raw.size % 2:
        print(f"{args.input}: odd number of float32 values, expected I/Q pairs",
              file=sys.stderr)
        return 1
    x = raw[0::2].astype(np.float64) + 1j * raw[1::2]
    cfg = OfdmConfig(sample_rate=args.sample_rate)
    th = replace(SyncThresholds(), delayed=args.delayed_threshold, cross=args.cross_threshold)
    if args.band_limit:
        x = band_limit(x, cfg, th.int_cfo_range + 1)
    found = detect_all(x, PreambleSpec(args.n_syncp), cfg, th, link=args.link)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["start", "cfo_hz", "metric"])
        for r in found:
            w.writerow([r.start_index, f"{r.cfo_hz:.3f}", f"{r.metric_peak:.4f}"])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_plot(args) -> int:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("plotting needs matplotlib (pip install 'artifact[plot]')", file=sys.stderr)
        return 1
    from .simulator import read_csv

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for path in args.csv:
        curves = {}
        for p in read_csv(path):
            if p.bit_errors:
                curves.setdefault(p.scheme, []).append((p.ebno_db, p.ber))
        for scheme, pts in curves.items():
            pts.sort()
            label = scheme if len(args.csv) == 1 else f"{scheme} ({path})"
            ax.semilogy(*zip(*pts), marker="o", label=label)
    ax.set_xlabel("PLC Eb/N0 [dB]")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hybridlink",
                                description="Hybrid PLC/wireless OFDM link simulator")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("ber", help="run a BER sweep and write a CSV")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--seed", type=int)
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=_cmd_ber)

    g = sub.add_parser("gain", help="Eb/N0 gain between BER curves at a target BER")
    g.add_argument("--target-ber", type=float, default=1e-4)
    g.add_argument("--curve", required=True)
    g.add_argument("--baseline", required=True)
    g.set_defaults(func=_cmd_gain)

    d = sub.add_parser("detect", help="find preambles in interleaved float32 I/Q")
    d.add_argument("input")
    d.add_argument("--out")
    d.add_argument("--sample-rate", type=float, default=400_000.0)
    d.add_argument("--n-syncp", type=int, default=8, choices=(8, 12))
    d.add_argument("--link", choices=("wireless", "plc"), default="wireless")
    d.add_argument("--delayed-threshold", type=float, default=0.5)
    d.add_argument("--cross-threshold", type=float, default=0.6)
    d.add_argument("--no-band-limit", dest="band_limit", action="store_false")
    d.set_defaults(func=_cmd_detect)

    pl = sub.add_parser("plot", help="BER-vs-Eb/N0 figure from one or more CSVs")
    pl.add_argument("csv", nargs="+")
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=_cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return args.func(args)
    except HybridLinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
