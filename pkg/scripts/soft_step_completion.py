"""Excite an oscillator with a soft tanh step, then undo it.

Prints |beta|^2 for stage I alone, for symmetric completions at the first few
extrema of rho, for a midpoint control and for a general completion to a new
frequency.  Writes the table to completion.csv in --out-dir.
"""
import argparse
import csv
from pathlib import Path

from unexciting.ermakov import (build_general_completion, build_symmetric_completion, find_extrema, fit_asymptotic,
                                hermite_continuation, reflect_about, solve_ermakov)
from unexciting.modes import bogoliubov
from unexciting.profiles import make_tanh_step


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lo", type=float, default=1.0, help="initial omega^2")
    ap.add_argument("--hi", type=float, default=4.0, help="stage-I final omega^2")
    ap.add_argument("--width", type=float, default=0.5)
    ap.add_argument("--extrema", type=int, default=4)
    ap.add_argument("--target-omega", type=float, default=3.0)
    ap.add_argument("--out-dir", default=".")
    args = ap.parse_args()

    stage = make_tanh_step(args.lo, args.hi, 0.0, args.width)
    sol = solve_ermakov(stage)
    fit = fit_asymptotic(sol, stage)
    rows = [("stage I only", "", bogoliubov(stage).occupation)]
    print(f"stage I: |beta|^2 = {rows[0][2]:.6e}, delta = {fit.delta:.6f}")
    for n in range(args.extrema):
        plan = build_symmetric_completion(stage, n)
        rows.append((f"symmetric, extremum {n}", plan.tn, bogoliubov(plan.profile).occupation))
    ext = find_extrema(sol, (stage.t_plus, sol.t_end), stage.omega_out)
    mid = 0.5 * (ext[0].t + ext[1].t)
    rows.append(("symmetric, midpoint control", mid, bogoliubov(reflect_about(stage, mid)).occupation))

    t1 = stage.t_plus
    head = solve_ermakov(stage, t_end=t1 + 1e-9 * max(1.0, abs(t1)))
    cont = hermite_continuation(head, stage.omega_out_sq, t1, 6.283185307179586 / stage.omega_out,
                                args.target_omega)
    plan = build_general_completion(stage, cont, args.target_omega)
    rows.append((f"general, omega -> {args.target_omega:g}", t1, bogoliubov(plan.profile).occupation))

    out = Path(args.out_dir) / "completion.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["case", "junction_time", "beta_sq"])
        w.writerows(rows)
    for name, t, b in rows:
        print(f"{name:32s} {t if t == '' else f'{t:10.6f}':>10}  {b:.3e}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
