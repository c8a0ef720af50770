"""Squeeze, rotate for time tau, anti-squeeze: residual squeezing versus omega*tau."""
import argparse
import csv
import math
from pathlib import Path

import numpy as np

from unexciting.squeeze import protocol_final_state, residual_squeeze


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", default="0.5,1,2")
    ap.add_argument("--points", type=int, default=181)
    ap.add_argument("--out-dir", default=".")
    args = ap.parse_args()
    rs = [float(x) for x in args.r.split(",")]
    angles = np.linspace(0.0, 2 * math.pi, args.points)
    out = Path(args.out_dir) / "squeeze_return.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_tau", *[f"r={r:g}" for r in rs]])
        for a in angles:
            w.writerow([a, *[residual_squeeze(protocol_final_state(r, 1.0, a)) for r in rs]])
    for n in (1, 2, 5):
        worst = max(residual_squeeze(protocol_final_state(r, 1.0, 2 * math.pi * n)) for r in rs)
        print(f"omega tau = 2 pi x {n}: worst residual {worst:.1e}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
