"""Ermakov function rho'' + omega^2 rho - rho^-3 = 0: solving, fitting, inverse design.

On a constant plateau w0 every solution has the form

    rho^2 = (cosh d - sinh d sin(2 w0 t + phi)) / w0

and ``d = 0`` (rho^2 = 1/w0) means the oscillator sits in the instantaneous
ground state.  Constant segments are propagated exactly through the linear
mode q = rho exp(i Theta)/sqrt(2), so extremum locations on plateaus are
limited only by root-finding precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import InputError, NumericalError
from .modes import DEFAULT_POLICY, StepPolicy, _pieces, constant_propagator
from .profiles import FrequencyProfile, Segment, closure_segment, constant_segment, make_piecewise

RHO_FLOOR = 1e-8


# -- solving ----------------------------------------------------------------

def _constant_flow(omega_sq, a, rho0, rhodot0):
    q0 = rho0 / math.sqrt(2)
    qd0 = (rhodot0 + 1j / rho0) / math.sqrt(2)

    def ev(t):
        c, sw, ws = constant_propagator(omega_sq, np.asarray(t, dtype=float) - a)
        q = c * q0 + sw * qd0
        qd = -ws * q0 + c * qd0
        aq = np.abs(q)
        return math.sqrt(2) * aq, math.sqrt(2) * np.real(np.conj(q) * qd) / aq

    return ev


def _ode_flow(seg: Segment, a, b, rho0, rhodot0, policy: StepPolicy, floor: float):
    f = seg.func

    def rhs(t, y):
        return [y[1], -float(f(t)) * y[0] + y[0] ** -3]

    def too_small(t, y):
        return y[0] - floor

    too_small.terminal = True
    too_small.direction = -1
    sol = solve_ivp(rhs, (a, b), [rho0, rhodot0], method="DOP853", rtol=policy.rtol,
                    atol=policy.atol, max_step=policy.max_step, dense_output=True,
                    events=too_small)
    if sol.status == 1:
        raise NumericalError(f"rho fell below {floor:g} at t={sol.t_events[0][0]:.6g}")
    if not sol.success:
        raise NumericalError(f"Ermakov integration failed on [{a}, {b}]: {sol.message}")

    def ev(t):
        y = sol.sol(np.asarray(t, dtype=float))
        return y[0], y[1]

    return sol.t, ev


@dataclass(frozen=True, eq=False)
class ErmakovSolution:
    grid: np.ndarray
    rho: np.ndarray
    rhodot: np.ndarray
    pieces: tuple = field(repr=False)
    fit: "AsymptoticFit | None" = None

    def __call__(self, t):
        """(rho, rhodot) at arbitrary times inside the grid, via dense output."""
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        r, rd = np.empty(tt.shape), np.empty(tt.shape)
        starts = np.array([p[0] for p in self.pieces])
        idx = np.clip(np.searchsorted(starts, tt, side="right") - 1, 0, len(self.pieces) - 1)
        for i, (_, _, ev) in enumerate(self.pieces):
            m = idx == i
            if m.any():
                r[m], rd[m] = ev(tt[m])
        if np.ndim(t) == 0:
            return float(r[0]), float(rd[0])
        return r, rd

    @property
    def t_end(self) -> float:
        return float(self.grid[-1])

    def with_fit(self, fit: "AsymptoticFit") -> "ErmakovSolution":
        return ErmakovSolution(self.grid, self.rho, self.rhodot, self.pieces, fit)

    def residual(self, profile: FrequencyProfile, ts) -> np.ndarray:
        """|rho'' + omega^2 rho - rho^-3| by central differences of the dense output."""
        ts = np.asarray(ts, dtype=float)
        h = 1e-4
        _, rd_p = self(ts + h)
        _, rd_m = self(ts - h)
        r, _ = self(ts)
        return np.abs((rd_p - rd_m) / (2 * h) + profile(ts) * r - r ** -3)


def solve_ermakov(profile: FrequencyProfile, rho0: float | None = None, rhodot0: float = 0.0,
                  policy: StepPolicy = DEFAULT_POLICY, t_start: float | None = None,
                  t_end: float | None = None, floor: float = RHO_FLOOR) -> ErmakovSolution:
    """Integrate the Ermakov equation; defaults to the adiabatic in-vacuum start.

    ``t_end`` defaults to two periods of rho^2 past the out-plateau edge.
    """
    if rho0 is None:
        rho0 = profile.omega_in ** -0.5
    if not rho0 > 0:
        raise InputError("rho0 must be positive")
    margin = policy.margin if policy.margin is not None else math.pi / profile.omega_in
    if t_start is None:
        t_start = profile.t_minus - margin
    if t_end is None:
        t_end = profile.t_plus + 2 * math.pi / profile.omega_out
    r, rd = float(rho0), float(rhodot0)
    grids, rhos, rds, pieces = [np.array([t_start])], [np.array([r])], [np.array([rd])], []
    for a, b, piece in _pieces(profile, t_start, t_end):
        if isinstance(piece, Segment) and not piece.is_constant:
            ts, ev = _ode_flow(piece, a, b, r, rd, policy, floor)
        else:
            w2 = piece.value if isinstance(piece, Segment) else piece
            ev = _constant_flow(w2, a, r, rd)
            scale = math.sqrt(abs(w2)) if w2 else 1.0
            n = int(min(20000, max(2, math.ceil((b - a) * scale / math.pi * policy.samples_per_period))))
            ts = np.linspace(a, b, n + 1)
        rr, rrd = ev(ts)
        if np.min(rr) < floor:
            raise NumericalError(f"rho fell below {floor:g} on [{a}, {b}]")
        pieces.append((a, b, ev))
        grids.append(ts[1:])
        rhos.append(np.asarray(rr)[1:])
        rds.append(np.asarray(rrd)[1:])
        r, rd = float(rr[-1]), float(rrd[-1])
    return ErmakovSolution(np.concatenate(grids), np.concatenate(rhos), np.concatenate(rds), tuple(pieces))


def exact_plateau_rho(omega0: float, delta: float, phi: float):
    """Closed-form (rho, rhodot) of the plateau family as functions of t."""

    def rho_sq(t):
        return (math.cosh(delta) - math.sinh(delta) * np.sin(2 * omega0 * np.asarray(t) + phi)) / omega0

    def ev(t):
        r = np.sqrt(rho_sq(t))
        rd = -math.sinh(delta) * np.cos(2 * omega0 * np.asarray(t) + phi) / r
        return r, rd

    return ev


# -- extrema and fitting ----------------------------------------------------

@dataclass(frozen=True)
class Extremum:
    t: float
    kind: str  # "max" or "min"
    rho_sq: float


def _is_flat(sol: ErmakovSolution, a: float, b: float, rtol: float = 1e-12) -> bool:
    ts = np.linspace(a, b, 257)
    r, _ = sol(ts)
    r2 = r * r
    return float(np.ptp(r2)) <= rtol * float(np.mean(r2))


def find_extrema(sol: ErmakovSolution, window: tuple[float, float], omega: float | None = None,
                 xtol: float = 1e-12) -> list[Extremum]:
    """Roots of rhodot inside ``window``, refined on the dense output.

    ``omega`` sets the scan resolution (defaults to a fine fixed grid).
    Raises ``InputError`` if rho is flat there, i.e. already unexcited.
    """
    a, b = max(window[0], float(sol.grid[0])), min(window[1], sol.t_end)
    if not b > a:
        raise InputError("window does not overlap the solution")
    if _is_flat(sol, a, b):
        raise InputError("rho is constant on the window: already unexcited, no extrema")
    step = (math.pi / omega) / 24 if omega else (b - a) / 2000
    n = max(16, int(math.ceil((b - a) / step)))
    ts = np.linspace(a, b, n + 1)
    _, rd = sol(ts)
    out = []
    drd = lambda t: sol(t)[1]
    for i in range(n):
        lo, hi = rd[i], rd[i + 1]
        if lo == 0.0:
            root = ts[i]
        elif lo * hi < 0:
            root = brentq(drd, ts[i], ts[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
        else:
            continue
        kind = "max" if (lo > 0 or (lo == 0 and hi < 0)) else "min"
        r, _ = sol(root)
        if out and abs(out[-1].t - root) < 10 * xtol:
            continue
        out.append(Extremum(float(root), kind, r * r))
    return out


@dataclass(frozen=True)
class AsymptoticFit:
    delta: float
    phi: float
    omega0: float
    degenerate: bool = False
    residual: float = 0.0

    def rho_sq(self, t):
        return (math.cosh(self.delta) - math.sinh(self.delta) * np.sin(2 * self.omega0 * np.asarray(t) + self.phi)) / self.omega0


def fit_asymptotic(sol: ErmakovSolution, profile: FrequencyProfile, fit_tol: float = 1e-6) -> AsymptoticFit:
    """Read (delta, phi) off the extrema of rho^2 on the out-plateau.

    max rho^2 = e^delta / w0 and min rho^2 = e^-delta / w0; phi puts the first
    maximum at sin(2 w0 t + phi) = -1.
    """
    w0 = profile.omega_out
    a, b = profile.t_plus, sol.t_end
    if b - a < 2 * math.pi / w0 * (1 - 1e-9):
        raise InputError(f"out-plateau window {b - a:.4g} shorter than two rho^2 periods")
    if _is_flat(sol, a, b):
        return AsymptoticFit(0.0, 0.0, w0, degenerate=True)
    ext = find_extrema(sol, (a, b), w0)
    maxima = [e for e in ext if e.kind == "max"]
    minima = [e for e in ext if e.kind == "min"]
    if not maxima or not minima:
        raise InputError("plateau window holds no full oscillation")
    hi = float(np.mean([e.rho_sq for e in maxima]))
    lo = float(np.mean([e.rho_sq for e in minima]))
    delta = 0.5 * math.log(hi / lo)
    phi = (1.5 * math.pi - 2 * w0 * maxima[0].t) % (2 * math.pi)
    fit = AsymptoticFit(delta, phi, w0)
    ts = np.linspace(a, b, 400)
    r, _ = sol(ts)
    resid = float(np.max(np.abs(r * r - fit.rho_sq(ts))) * w0)
    if resid > fit_tol * max(1.0, math.cosh(delta)):
        raise NumericalError(f"plateau fit residual {resid:.3e} above {fit_tol:.1e}")
    return AsymptoticFit(delta, phi, w0, residual=resid)


# -- reference functions ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class PolyRho:
    """rho(t) = P((t - t0)/tau) on the window, held constant outside it."""

    t0: float
    tau: float
    poly: Polynomial

    def __post_init__(self):
        if not self.tau > 0:
            raise InputError("tau must be positive")

    @property
    def t1(self) -> float:
        return self.t0 + self.tau

    def _x(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.t0) / self.tau, 0.0, 1.0)

    def __call__(self, t):
        return self.poly(self._x(t))

    def d1(self, t):
        inside = (np.asarray(t) >= self.t0) & (np.asarray(t) <= self.t1)
        return np.where(inside, self.poly.deriv(1)(self._x(t)) / self.tau, 0.0)

    def d2(self, t):
        inside = (np.asarray(t) >= self.t0) & (np.asarray(t) <= self.t1)
        return np.where(inside, self.poly.deriv(2)(self._x(t)) / self.tau ** 2, 0.0)

    def omega_sq_expr(self) -> str:
        """numpy expression in ``t`` for rho^-4 - rho''/rho on the window."""
        x = f"((t - {self.t0!r}) / {self.tau!r})"

        def horner(p: Polynomial) -> str:
            c = [float(v) for v in p.coef]
            s = f"{c[-1]!r}"
            for v in reversed(c[:-1]):
                s = f"({v!r} + {x} * {s})"
            return s

        r, r2 = horner(self.poly), horner(self.poly.deriv(2))
        return f"{r} ** -4 - {r2} / ({self.tau!r} ** 2 * {r})"


_SMOOTHSTEP = {
    3: [0, 0, 3, -2],
    5: [0, 0, 0, 10, -15, 6],
    7: [0, 0, 0, 0, 35, -84, 70, -20],
}


def smoothstep_rho(rho0: float, rho1: float, t0: float, tau: float, order: int = 5) -> PolyRho:
    """Smoothstep ramp rho0 -> rho1; order 5 gives C^2 junctions, 7 gives C^3."""
    s = Polynomial(_SMOOTHSTEP[order])
    return PolyRho(t0, tau, rho0 + (rho1 - rho0) * s)


def ramp_for_omegas(omega_minus: float, omega_plus: float, tau: float, t0: float = 0.0,
                    order: int = 5) -> PolyRho:
    """Reference rho taking the ground-state width 1/sqrt(w-) to 1/sqrt(w+)."""
    return smoothstep_rho(omega_minus ** -0.5, omega_plus ** -0.5, t0, tau, order)


def bump_rho(rho0: float, height: float, t0: float, tau: float) -> PolyRho:
    """rho0 + height * 64 x^3 (1-x)^3: returns to rho0 with C^2 junctions."""
    x3 = Polynomial([0, 0, 0, 1])
    return PolyRho(t0, tau, rho0 + height * 64 * x3 * Polynomial([1, -1]) ** 3)


def hermite_rho(t0: float, tau: float, start: tuple[float, float, float],
                end: tuple[float, float, float]) -> PolyRho:
    """Quintic matching (rho, rho', rho'') at both ends of the window."""
    rows, rhs = [], []
    for x, vals in ((0.0, start), (1.0, end)):
        for order, v in enumerate(vals):
            row = [0.0] * 6
            for j in range(order, 6):
                row[j] = math.perm(j, order) * x ** (j - order)
            rows.append(row)
            rhs.append(v * tau ** order)
    coef = np.linalg.solve(np.array(rows), np.array(rhs))
    return PolyRho(t0, tau, Polynomial(coef))


def _second_derivative(f: Callable, t, h: float):
    """Central difference with one Richardson step (O(h^4))."""
    d = lambda hh: (f(t + hh) - 2 * f(t) + f(t - hh)) / hh ** 2
    return (4 * d(h / 2) - d(h)) / 3


def _first_derivative(f: Callable, t, h: float):
    d = lambda hh: (f(t + hh) - f(t - hh)) / (2 * hh)
    return (4 * d(h / 2) - d(h)) / 3


def inverse_engineer(rho_ref: Callable, window: tuple[float, float], junction_tol: float = 1e-8,
                     fd_step: float | None = None) -> FrequencyProfile:
    """Frequency whose Ermakov solution is ``rho_ref``: omega^2 = rho^-4 - rho''/rho.

    Analytic ``d2`` (and ``d1``) on ``rho_ref`` are used when present;
    otherwise derivatives come from Richardson-extrapolated central
    differences with step ``1e-3 * tau``.  Junctions where rho' or rho'' does
    not vanish are flagged ``rough_junction``; interior omega^2 <= 0 is flagged
    ``nonpositive_interior``.
    """
    a, b = float(window[0]), float(window[1])
    tau = b - a
    if not tau > 0:
        raise InputError("window must have positive length")
    h = fd_step if fd_step is not None else 1e-3 * tau
    d2 = getattr(rho_ref, "d2", None) or (lambda t: _second_derivative(rho_ref, np.asarray(t, float), h))
    d1 = getattr(rho_ref, "d1", None) or (lambda t: _first_derivative(rho_ref, np.asarray(t, float), h))
    probe = np.linspace(a, b, 2001)
    if np.min(rho_ref(probe)) <= 0:
        raise InputError("rho_ref must stay positive on the window")

    def omega_sq(t):
        r = np.asarray(rho_ref(t), dtype=float)
        return r ** -4 - np.asarray(d2(t), dtype=float) / r

    if hasattr(rho_ref, "omega_sq_expr") and getattr(rho_ref, "t0", None) == a and getattr(rho_ref, "t1", None) == b:
        seg = Segment(a, b, "expr", {"expr": rho_ref.omega_sq_expr()}, omega_sq)
    else:
        seg = closure_segment(a, b, omega_sq)
    r_a, r_b = float(rho_ref(a)), float(rho_ref(b))
    eps = np.finfo(float).eps
    inner_a, inner_b = a + 64 * eps * max(1, abs(a)), b - 64 * eps * max(1, abs(b))
    rough = max(abs(float(d1(inner_a))), abs(float(d1(inner_b))),
                abs(float(d2(inner_a))), abs(float(d2(inner_b)))) > junction_tol
    profile = make_piecewise([seg], r_a ** -4, r_b ** -4)
    if rough:
        profile = FrequencyProfile(profile.segments, profile.omega_in_sq, profile.omega_out_sq,
                                   profile.flags | {"rough_junction"})
    return profile


# -- completions ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CompletionPlan:
    """Five-piece protocol: w-, stage I, w+, stage II, w++."""

    t1: float
    tau2: float
    omega_II: tuple
    symmetric: bool
    profile: FrequencyProfile
    tn: float | None = None
    delta_after: float = 0.0

    def metadata(self) -> dict:
        return {"completion": {"t1": self.t1, "tau2": self.tau2, "tn": self.tn,
                               "symmetric": self.symmetric}}


def reflect_about(profile_I: FrequencyProfile, tn: float) -> FrequencyProfile:
    """Stage I, plateau up to the mirror image, then stage I reversed about ``tn``."""
    if tn < profile_I.t_plus:
        raise InputError("reflection time must lie on the out-plateau of stage I")
    segs = list(profile_I.segments)
    t1 = 2 * tn - profile_I.t_plus
    if t1 > profile_I.t_plus:
        segs.append(constant_segment(profile_I.t_plus, t1, profile_I.omega_out_sq))
    segs.extend(s.reflected(tn) for s in reversed(profile_I.segments))
    return make_piecewise(segs, profile_I.omega_in_sq, profile_I.omega_in_sq)


def _verify(profile: FrequencyProfile, policy: StepPolicy, delta_tol: float) -> float:
    fit = fit_asymptotic(solve_ermakov(profile, policy=policy), profile)
    if fit.delta > delta_tol:
        raise NumericalError(f"completion left delta = {fit.delta:.3e} (> {delta_tol:.1e})")
    return fit.delta


def build_symmetric_completion(profile_I: FrequencyProfile, extremum_index: int,
                               policy: StepPolicy = DEFAULT_POLICY, delta_tol: float = 1e-4) -> CompletionPlan:
    """Undo stage I by its time reverse about the ``extremum_index``-th (0-based) extremum."""
    if extremum_index < 0:
        raise InputError("extremum_index must be >= 0")
    w = profile_I.omega_out
    span = (extremum_index + 2) * math.pi / (2 * w) + math.pi / w
    sol = solve_ermakov(profile_I, policy=policy, t_end=profile_I.t_plus + span)
    window = (profile_I.t_plus, sol.t_end)
    if _is_flat(sol, *window):
        return CompletionPlan(profile_I.t_plus, 0.0, (), True, profile_I, None, 0.0)
    ext = find_extrema(sol, window, w)
    if extremum_index >= len(ext):
        raise InputError(f"extremum_index {extremum_index} out of range ({len(ext)} found)")
    tn = ext[extremum_index].t
    full = reflect_about(profile_I, tn)
    n_I = len(profile_I.segments)
    stage_II = full.segments[-n_I:]
    delta = _verify(full, policy, delta_tol)
    return CompletionPlan(stage_II[0].t0, stage_II[-1].t1 - stage_II[0].t0, stage_II, True, full, tn, delta)


def hermite_continuation(sol: ErmakovSolution, omega_plus_sq: float, t1: float, tau2: float,
                         omega_pp: float) -> PolyRho:
    """Quintic rho from the state at ``t1`` to the ground-state width of ``omega_pp``.

    rho'' at t1 is taken from the plateau equation, which keeps omega^2
    continuous there.
    """
    r, rd = sol(t1)
    rdd = -omega_plus_sq * r + r ** -3
    return hermite_rho(t1, tau2, (r, rd, rdd), (omega_pp ** -0.5, 0.0, 0.0))


def build_general_completion(profile_I: FrequencyProfile, rho_continuation: PolyRho, omega_pp: float,
                             policy: StepPolicy = DEFAULT_POLICY, match_tol: float = 1e-8,
                             delta_tol: float = 1e-4) -> CompletionPlan:
    """Stage II from the inverse-engineered continuation of rho to 1/sqrt(omega_pp)."""
    t1, tau2 = float(rho_continuation.t0), float(rho_continuation.tau)
    if t1 < profile_I.t_plus:
        raise InputError("continuation must start on the out-plateau of stage I")
    sol = solve_ermakov(profile_I, policy=policy, t_end=t1 + 1e-9 * max(1.0, abs(t1)))
    r, rd = sol(t1)
    mismatch = max(abs(r - float(rho_continuation(t1))), abs(rd - float(rho_continuation.d1(t1))))
    if mismatch > match_tol:
        raise InputError(f"continuation does not match rho, rho' at t1 (mismatch {mismatch:.3e})")
    t2 = t1 + tau2
    if abs(float(rho_continuation(t2)) - omega_pp ** -0.5) > match_tol or abs(float(rho_continuation.d1(t2 - 1e-12))) > match_tol:
        raise InputError("continuation must end at rho = omega_pp^-1/2 with zero slope")
    stage = inverse_engineer(rho_continuation, (t1, t2))
    segs = list(profile_I.segments)
    if t1 > profile_I.t_plus:
        segs.append(constant_segment(profile_I.t_plus, t1, profile_I.omega_out_sq))
    segs.extend(stage.segments)
    full = make_piecewise(segs, profile_I.omega_in_sq, omega_pp ** 2)
    delta = _verify(full, policy, delta_tol)
    symmetric = False
    return CompletionPlan(t1, tau2, stage.segments, symmetric, full, None, delta)
