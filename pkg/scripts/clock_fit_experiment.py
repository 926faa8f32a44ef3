#!/usr/bin/env python3
"""Clock-model recovery under increasing timestamp jitter.

Simulates correspondences between two clocks related by a fixed offset
and skew, adds Gaussian jitter to the target stamps, and prints how far
the fitted model lands from the truth at each jitter level.
"""

import argparse

import numpy as np

from rigkit.clocks import fit_clock_model


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--span-s", type=float, default=100.0)
    ap.add_argument("--offset-ms", type=float, default=5.0)
    ap.add_argument("--skew-ppm", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--robust", action="store_true", help="use the IRLS fit")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    step = int(args.span_s * 1e9 / (args.samples - 1))
    src = (np.arange(args.samples) * step).astype(np.int64)
    skew_m1 = args.skew_ppm * 1e-6
    offset = int(args.offset_ms * 1e6)
    clean = src + np.rint(skew_m1 * src + offset).astype(np.int64)

    print(f"truth: offset {offset} ns, skew 1 + {skew_m1:.3e}")
    print(f"{'jitter':>10s}{'offset err [ns]':>18s}{'skew err':>14s}{'rms resid [ns]':>16s}")
    for jitter_ns in (0, 100, 1_000, 10_000, 100_000, 1_000_000):
        tgt = clean + np.rint(rng.normal(0.0, jitter_ns, src.size)).astype(np.int64)
        model = fit_clock_model(list(zip(src, tgt)), robust=args.robust)
        print(
            f"{jitter_ns / 1e3:>8.1f}us"
            f"{model.offset_ns - offset:>18.1f}"
            f"{model.skew - (1.0 + skew_m1):>14.2e}"
            f"{model.rms_residual_ns:>16.1f}"
        )


if __name__ == "__main__":
    main()
