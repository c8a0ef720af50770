"""Command-line front end.

Exit codes: 0 success, 2 malformed input, 3 numerical failure (Wronskian,
normalization, convergence or a verification tolerance that was missed).

Every subcommand writes a JSON report ``<subcommand>.json`` into
``--out-dir``; some also write CSV tables.  The report is echoed on stdout
as JSON or, with ``--format csv``, as ``key,value`` rows.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np
from numpy.polynomial import Polynomial

from . import __version__
from .errors import InputError, NumericalError
from .ermakov import (PolyRho, bump_rho, build_general_completion, build_symmetric_completion,
                      find_extrema, fit_asymptotic, hermite_continuation, inverse_engineer,
                      ramp_for_omegas, smoothstep_rho, solve_ermakov)
from .kaymoses import KayMosesSpec, km_frequency, verify_unexciting
from .modes import BogoliubovPair, StepPolicy, extract_bogoliubov, integrate_mode
from .profiles import (FrequencyProfile, PotentialProfile, Segment, dualize, load_profile, make_constant,
                       profile_from_dict, save_profile)
from .scattering import DEFAULT_SLABS, duality_check, resonance_scan, transfer_matrix_rt, write_scan_csv
from .squeeze import (protocol_final_state, residual_squeeze, squeeze_from_bogoliubov,
                      squeezed_amplitudes)


# -- output helpers ---------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=1, sort_keys=True) + "\n"


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for k in sorted(d):
        v = d[k]
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_flatten(v, key + "."))
        elif isinstance(v, list):
            rows.append((key, ";".join(_fmt(x) for x in v)))
        else:
            rows.append((key, _fmt(v)))
    return rows


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    if isinstance(x, list):
        return ":".join(_fmt(v) for v in x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{float(v):.17g}" if isinstance(v, (float, np.floating)) else v for v in row])


class _Ctx:
    def __init__(self, args):
        if not (args.tol > 0 and args.rtol > 0):
            raise InputError("tolerances must be positive")
        self.tol = args.tol
        self.fmt = args.format
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.policy = StepPolicy(rtol=args.rtol, atol=args.rtol * 1e-2)
        self.slabs = DEFAULT_SLABS

    def tolerances(self) -> dict:
        return {"verify_tol": self.tol, "ode_rtol": self.policy.rtol, "ode_atol": self.policy.atol,
                "wronskian_tol": self.policy.wronskian_tol, "slab_tol": self.slabs.tol}

    def emit(self, name: str, report: dict) -> None:
        report = dict(report, tolerances=self.tolerances(), command=name)
        text = _dumps(report)
        (self.out_dir / f"{name}.json").write_text(text)
        if self.fmt == "json":
            sys.stdout.write(text)
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            w.writerows(_flatten(_jsonable(report)))
            sys.stdout.write(buf.getvalue())


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _frequency_profile(path) -> FrequencyProfile:
    prof = load_profile(path)
    if not isinstance(prof, FrequencyProfile):
        raise InputError(f"{path} holds a potential, a frequency profile was expected")
    return prof


def _bogoliubov_summary(prof: FrequencyProfile, policy: StepPolicy):
    sol = integrate_mode(prof, policy)
    pair = extract_bogoliubov(sol, prof)
    return sol, pair, {"alpha": pair.alpha, "beta": pair.beta, "occupation": pair.occupation,
                       "persistence": pair.persistence, "squeeze_r": pair.squeeze_r,
                       "norm_defect": pair.norm_defect, "wronskian_drift": sol.wronskian_drift}


# -- subcommands --------------------------------------------------------------

def cmd_analyze(args, ctx: _Ctx) -> int:
    prof = _frequency_profile(args.profile)
    sol, pair, report = _bogoliubov_summary(prof, ctx.policy)
    esol = solve_ermakov(prof, policy=ctx.policy)
    fit = fit_asymptotic(esol, prof)
    extrema = [] if fit.degenerate else find_extrema(esol, (prof.t_plus, esol.t_end), prof.omega_out)
    report.update(delta=fit.delta, phi=fit.phi, degenerate=fit.degenerate,
                  extrema=[{"t": e.t, "kind": e.kind, "rho_sq": e.rho_sq} for e in extrema],
                  omega_in=prof.omega_in, omega_out=prof.omega_out, t_minus=prof.t_minus, t_plus=prof.t_plus,
                  flags=sorted(prof.flags), profile=str(args.profile))
    if not args.no_series:
        sol.to_csv(ctx.out_dir / "mode.csv")
        _write_csv(ctx.out_dir / "rho.csv", ["t", "rho", "rhodot"], zip(esol.grid, esol.rho, esol.rhodot))
    ctx.emit("analyze", report)
    return 0


def _rho_ref_from_spec(spec: dict):
    """Reference rho and window from a small JSON description."""
    kind = spec.get("kind")
    try:
        if kind == "omega_ramp":
            r = ramp_for_omegas(float(spec["omega_minus"]), float(spec["omega_plus"]), float(spec["tau"]),
                                float(spec.get("t0", 0.0)), int(spec.get("order", 5)))
        elif kind == "smoothstep":
            r = smoothstep_rho(float(spec["rho0"]), float(spec["rho1"]), float(spec.get("t0", 0.0)),
                               float(spec["tau"]), int(spec.get("order", 5)))
        elif kind == "bump":
            r = bump_rho(float(spec["rho0"]), float(spec["height"]), float(spec.get("t0", 0.0)), float(spec["tau"]))
        elif kind == "poly":
            r = PolyRho(float(spec.get("t0", 0.0)), float(spec["tau"]), Polynomial(spec["coefficients"]))
        elif kind == "constant":
            t0, tau = float(spec.get("t0", 0.0)), float(spec.get("tau", 1.0))
            r = PolyRho(t0, tau, Polynomial([float(spec["rho"])]))
        elif kind == "expr":
            a, b = (float(x) for x in spec["window"])
            return Segment(a, b, "expr", {"expr": spec["expr"]}), (a, b)
        else:
            raise InputError(f"unknown rho_ref kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise InputError(f"rho_ref spec is missing or mistypes a field: {exc}") from None
    return r, (r.t0, r.t1)


def cmd_design(args, ctx: _Ctx) -> int:
    try:
        spec = json.loads(Path(args.spec).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read rho_ref spec {args.spec}: {exc}") from None
    if not isinstance(spec, dict):
        raise InputError("rho_ref spec must be a JSON object")
    rho_ref, window = _rho_ref_from_spec(spec)
    prof = inverse_engineer(rho_ref, window)
    if spec.get("kind") == "constant":
        prof = make_constant(prof.omega_in_sq, *window)
    _, pair, report = _bogoliubov_summary(prof, ctx.policy)
    if "rough_junction" in prof.flags:
        _warn("rho_ref has non-vanishing rho' or rho'' at a window edge; omega^2 jumps there")
    if pair.occupation >= ctx.tol:
        _warn(f"designed profile is not unexciting: |beta|^2 = {pair.occupation:.3e}")
    out = Path(args.out) if args.out else ctx.out_dir / "design_profile.json"
    save_profile(prof, out, {"verification": {"occupation": pair.occupation}})
    profile_from_dict(json.loads(out.read_text()))
    report.update(window=list(window), flags=sorted(prof.flags), omega_in_sq=prof.omega_in_sq,
                  omega_out_sq=prof.omega_out_sq, unexciting=pair.occupation < ctx.tol, output=str(out))
    ctx.emit("design", report)
    return 0


def cmd_complete(args, ctx: _Ctx) -> int:
    prof = _frequency_profile(args.profile)
    out = Path(args.out) if args.out else ctx.out_dir / "complete_profile.json"
    if args.target_omega is None:
        plan = build_symmetric_completion(prof, args.extremum, ctx.policy)
        if plan.tn is None:
            print("notice: stage I is already unexciting; profile passed through unchanged", file=sys.stderr)
    else:
        w_pp = float(args.target_omega)
        if not w_pp > 0:
            raise InputError("--target-omega must be positive")
        t1 = prof.t_plus
        tau2 = args.tau2 if args.tau2 else 2 * math.pi / prof.omega_out
        esol = solve_ermakov(prof, policy=ctx.policy, t_end=t1 + 1e-9 * max(1.0, abs(t1)))
        cont = hermite_continuation(esol, prof.omega_out_sq, t1, tau2, w_pp)
        if min(cont(np.linspace(t1, t1 + tau2, 2001))) <= 0:
            raise InputError(f"continuation over tau2 = {tau2:g} crosses rho = 0; try a shorter --tau2")
        plan = build_general_completion(prof, cont, w_pp, ctx.policy)
    _, pair, report = _bogoliubov_summary(plan.profile, ctx.policy)
    if pair.occupation >= ctx.tol:
        raise NumericalError(f"completed profile leaves |beta|^2 = {pair.occupation:.3e}")
    save_profile(plan.profile, out, plan.metadata())
    report.update(plan.metadata(), delta_after=plan.delta_after, output=str(out),
                  omega_out_sq=plan.profile.omega_out_sq, passed_through=plan.tn is None and plan.symmetric)
    ctx.emit("complete", report)
    return 0


def _parse_scan(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise InputError(f"--scan expects Emin:Emax:N, got {text!r}") from None
    if not (hi > lo and n >= 2):
        raise InputError("--scan needs Emax > Emin and N >= 2")
    return lo, hi, n


def cmd_scatter(args, ctx: _Ctx) -> int:
    prof = load_profile(args.potential)

    def potential_at(E):
        return dualize(prof, E) if isinstance(prof, FrequencyProfile) else prof

    if args.energy is not None:
        energies = [float(args.energy)]
    else:
        lo, hi, n = _parse_scan(args.scan)
        energies = list(np.linspace(lo, hi, n))
    results = [transfer_matrix_rt(potential_at(E), E, ctx.slabs) for E in energies]
    write_scan_csv(results, ctx.out_dir / "scatter.csv")
    report = {"potential": str(args.potential), "count": len(results),
              "max_unitarity_defect": max(r.unitarity_defect for r in results),
              "results": [{"E": r.E, "R": r.R, "T": r.T, "r": r.r_amp, "t": r.t_amp} for r in results]}
    if args.resonances and args.scan and isinstance(prof, PotentialProfile):
        lo, hi, n = _parse_scan(args.scan)
        scan = resonance_scan(prof, (lo, hi), n, ctx.slabs)
        report["resonances"] = {"energies": scan.energies, "transparent_everywhere": scan.all_pass}
    ctx.emit("scatter", report)
    return 0


def _parse_kappas(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InputError(f"--kappas expects comma-separated numbers, got {text!r}") from None


def cmd_synth(args, ctx: _Ctx) -> int:
    spec = KayMosesSpec(_parse_kappas(args.kappas), args.omega0_sq)
    prof = km_frequency(spec, center=args.center)
    out = Path(args.out) if args.out else ctx.out_dir / "synth_profile.json"
    save_profile(prof, out, {"kay_moses": {"kappas": list(spec.kappas), "omega0_sq": spec.omega0_sq,
                                          "centered": bool(args.center)}}, sample_dt=args.dt)
    back = profile_from_dict(json.loads(out.read_text()))
    ts = np.arange(prof.t_minus, prof.t_plus + 0.5 * args.dt, args.dt)
    _write_csv(ctx.out_dir / "synth_omega_sq.csv", ["t", "omega_sq"], zip(ts, prof(ts)))
    report = {"kappas": list(spec.kappas), "omega0_sq": spec.omega0_sq, "t_minus": prof.t_minus,
              "t_plus": prof.t_plus, "peak_omega_sq": float(np.max(prof(ts))), "output": str(out),
              "readback_max_error": float(np.max(np.abs(back(ts) - prof(ts))))}
    if args.verify:
        ks = [float(x) for x in args.verify.split(",")]
        rep = verify_unexciting(spec, ks, ctx.policy, ctx.slabs)
        report["verify"] = {"omega0": ks, "beta_sq": list(rep.beta_sq), "R": list(rep.R),
                            "unexciting": rep.max_beta_sq < ctx.tol and rep.max_R < ctx.tol}
    ctx.emit("synth", report)
    return 0


def cmd_squeeze(args, ctx: _Ctx) -> int:
    st = protocol_final_state(args.r, args.omega, args.tau)
    report = {"r": args.r, "omega": args.omega, "tau": args.tau, "rotation_angle": args.omega * args.tau,
              "covariance": st.cov, "det": st.det, "residual_squeeze": residual_squeeze(st)}
    if args.n_max is not None:
        pair = BogoliubovPair(complex(math.cosh(args.r)), complex(math.sinh(args.r)))
        amps = squeezed_amplitudes(pair, args.n_max)
        _write_csv(ctx.out_dir / "fock_amplitudes.csv", ["n", "fock_index", "re", "im", "abs_sq"],
                   [(n, 2 * n, a.real, a.imag, abs(a) ** 2) for n, a in enumerate(amps)])
        report["fock"] = {"n_max": args.n_max, "norm": math.fsum(abs(amps) ** 2),
                          "mean_occupation": math.fsum(2 * np.arange(amps.size) * abs(amps) ** 2),
                          "theta": squeeze_from_bogoliubov(pair).theta}
    ctx.emit("squeeze", report)
    return 0


def cmd_verify_duality(args, ctx: _Ctx) -> int:
    rows, ok = [], True
    for path in args.profiles:
        prof = _frequency_profile(path)
        rep = duality_check(prof, ctx.policy, ctx.slabs)
        passed = rep.relative <= ctx.tol and abs(rep.R + rep.T - 1) <= 1e-8
        ok &= passed
        rows.append({"profile": str(path), "E": rep.E, "beta_sq": rep.beta_sq, "R_over_T": rep.R_over_T,
                     "relative": rep.relative, "R": rep.R, "T": rep.T, "pass": passed})
    ctx.emit("verify-duality", {"checks": rows, "all_pass": ok})
    if not ok:
        print("error: duality discrepancy above --tol", file=sys.stderr)
        return 3
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unexciting", description="Design and verify unexciting frequency protocols.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--tol", type=float, default=1e-6, help="verification tolerance (occupation, duality)")
    p.add_argument("--rtol", type=float, default=1e-12, help="ODE relative tolerance")
    p.add_argument("--out-dir", default=".", help="directory for reports and tables")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="Bogoliubov coefficients and Ermakov fit of a profile")
    a.add_argument("profile")
    a.add_argument("--no-series", action="store_true", help="skip the time-series CSVs")
    a.set_defaults(func=cmd_analyze)

    d = sub.add_parser("design", help="inverse-engineer omega^2 from a reference rho")
    d.add_argument("spec", help="JSON rho_ref description")
    d.add_argument("--out")
    d.set_defaults(func=cmd_design)

    c = sub.add_parser("complete", help="append a stage that undoes the excitation")
    c.add_argument("profile")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--extremum", type=int, default=0, help="0-based extremum index (symmetric completion)")
    g.add_argument("--target-omega", type=float, help="final frequency (general completion)")
    c.add_argument("--tau2", type=float, help="stage-II duration for --target-omega (default 2 pi/omega_out)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_complete)

    s = sub.add_parser("scatter", help="reflection and transmission by transfer matrices")
    s.add_argument("--potential", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--energy", type=float)
    g.add_argument("--scan", help="Emin:Emax:N")
    s.add_argument("--resonances", action="store_true", help="locate T = 1 peaks in the scan")
    s.set_defaults(func=cmd_scatter)

    k = sub.add_parser("synth", help="reflectionless profile from Kay-Moses parameters")
    k.add_argument("--kappas", required=True, help="comma-separated, decreasing")
    k.add_argument("--omega0-sq", type=float, default=1.0)
    k.add_argument("--center", action="store_true", help="move the peak to t = 0")
    k.add_argument("--dt", type=float, default=5e-3, help="sample spacing of the written profile")
    k.add_argument("--verify", help="comma-separated omega0 values to check")
    k.add_argument("--out")
    k.set_defaults(func=cmd_synth)

    q = sub.add_parser("squeeze", help="squeeze, rotate, anti-squeeze")
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--omega", type=float, required=True)
    q.add_argument("--tau", type=float, required=True)
    q.add_argument("--n-max", type=int, help="also write Fock amplitudes of the squeezed vacuum")
    q.set_defaults(func=cmd_squeeze)

    v = sub.add_parser("verify-duality", help="compare |beta|^2 with R/T")
    v.add_argument("profiles", nargs="+")
    v.set_defaults(func=cmd_verify_duality)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, _Ctx(args))
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
