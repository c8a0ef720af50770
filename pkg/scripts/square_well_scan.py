"""Transmission through a square well and through wells with sech^2 flanks.

The flat-well part scans T(E) and locates the T = 1 resonances.  The flanked
part solves the width condition for the first few n and checks the resulting
wells are transparent.
"""
import argparse
import csv
import math
from pathlib import Path

from unexciting.profiles import dualize, make_sech2, make_square_well
from unexciting.scattering import SymmetricWellSpec, resonance_scan, symmetric_well_width, transfer_matrix_rt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=float, default=3.0)
    ap.add_argument("--half-width", type=float, default=math.pi / 2)
    ap.add_argument("--emax", type=float, default=20.0)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--energy", type=float, default=0.5, help="energy for the flanked wells")
    ap.add_argument("--out-dir", default=".")
    args = ap.parse_args()

    well = make_square_well(args.depth, args.half_width)
    scan = resonance_scan(well, (0.05, args.emax), args.points)
    print("resonances:", ", ".join(f"{E:.8f}" for E in scan.energies))
    out = Path(args.out_dir) / "square_well.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["E", "T"])
        for i in range(args.points):
            E = 0.05 + (args.emax - 0.05) * i / (args.points - 1)
            w.writerow([E, transfer_matrix_rt(well, E).T])

    flank = dualize(make_sech2(1.0, 1.5, 1.0, center=-6.0), 1.0)
    spec = SymmetricWellSpec(flank, args.depth, args.energy)
    for n in range(1, 5):
        a = symmetric_well_width(spec, n)
        T = transfer_matrix_rt(spec.with_a(a).potential(), args.energy).T
        print(f"flanked well n={n}: half-width {a:.10f}, T = {T:.12f}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
