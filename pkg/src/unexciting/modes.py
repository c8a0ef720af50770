"""Mode functions of q'' + omega^2(t) q = 0 and their Bogoliubov coefficients.

Normalization: the in-mode starts as ``exp(-i w_in t) / sqrt(2 w_in)`` and
the Wronskian ``q conj(qdot) - conj(q) qdot`` equals ``+i`` for it.  The
residual of that identity is tracked on every accepted step.

Non-constant segments go through scipy's DOP853 (embedded 8(5,3) pair with
dense output); constant segments, plateaus included, are propagated in
closed form.  Integration is restarted at every segment edge, so sudden
junctions are never smoothed over.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NormalizationError, NumericalError, WronskianError
from .profiles import FrequencyProfile, Segment


@dataclass(frozen=True)
class StepPolicy:
    """Integrator controls shared by the mode and Ermakov solvers."""

    rtol: float = 1e-12
    atol: float = 1e-14
    max_step: float = np.inf
    wronskian_tol: float = 1e-9
    margin: float | None = None
    samples_per_period: int = 32

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.wronskian_tol > 0):
            raise ValueError("tolerances must be positive")

    def with_rtol(self, rtol: float) -> "StepPolicy":
        return StepPolicy(rtol, self.atol, self.max_step, self.wronskian_tol, self.margin,
                          self.samples_per_period)


DEFAULT_POLICY = StepPolicy()


def constant_propagator(omega_sq: float, s):
    """Entries (c, s_over_w, w_s) of the exact flow over elapsed time ``s``.

    q(t0+s) = c q0 + s_over_w qdot0,  qdot(t0+s) = -w_s q0 + c qdot0.
    """
    s = np.asarray(s, dtype=float)
    if omega_sq > 0:
        w = math.sqrt(omega_sq)
        return np.cos(w * s), np.sin(w * s) / w, w * np.sin(w * s)
    if omega_sq < 0:
        k = math.sqrt(-omega_sq)
        return np.cosh(k * s), np.sinh(k * s) / k, -k * np.sinh(k * s)
    return np.ones_like(s), s.copy(), np.zeros_like(s)


def _constant_piece(omega_sq, a, b, q0, qd0, per_period):
    scale = math.sqrt(abs(omega_sq)) if omega_sq else 1.0
    n = int(min(20000, max(2, math.ceil((b - a) * scale / (2 * math.pi) * per_period))))
    ts = np.linspace(a, b, n + 1)
    c, sw, ws = constant_propagator(omega_sq, ts - a)
    return ts, c * q0 + sw * qd0, -ws * q0 + c * qd0


def _ode_piece(seg: Segment, a, b, q0, qd0, policy: StepPolicy, dense: bool = False):
    f = seg.func

    def rhs(t, y):
        return np.array([y[1], -float(f(t)) * y[0]])

    sol = solve_ivp(rhs, (a, b), np.array([q0, qd0], dtype=complex), method="DOP853",
                    rtol=policy.rtol, atol=policy.atol, max_step=policy.max_step,
                    dense_output=dense)
    if not sol.success:
        raise NumericalError(f"integration failed on [{a}, {b}]: {sol.message}")
    return sol


def _pieces(profile: FrequencyProfile, t_start: float, t_end: float):
    edges = profile.boundaries
    cuts = [t_start] + [float(e) for e in edges if t_start < e < t_end] + [t_end]
    for a, b in zip(cuts, cuts[1:]):
        if b > a:
            yield a, b, profile.piece_at(0.5 * (a + b))


def propagate(profile: FrequencyProfile, t_start: float, t_end: float, q0: complex, qdot0: complex,
              policy: StepPolicy = DEFAULT_POLICY):
    """Integrate the mode equation from ``t_start`` to ``t_end``.

    Returns ``(grid, q, qdot)`` sampled at every accepted step (and on a
    fine uniform grid inside constant pieces).
    """
    if not t_end > t_start:
        raise ValueError("t_end must exceed t_start")
    ts, qs, qds = [np.array([t_start])], [np.array([q0], complex)], [np.array([qdot0], complex)]
    q, qd = complex(q0), complex(qdot0)
    for a, b, piece in _pieces(profile, t_start, t_end):
        if isinstance(piece, Segment) and not piece.is_constant:
            sol = _ode_piece(piece, a, b, q, qd, policy)
            t_, q_, qd_ = sol.t, sol.y[0], sol.y[1]
        else:
            w2 = piece if not isinstance(piece, Segment) else piece.value
            t_, q_, qd_ = _constant_piece(w2, a, b, q, qd, policy.samples_per_period)
        ts.append(t_[1:])
        qs.append(q_[1:])
        qds.append(qd_[1:])
        q, qd = complex(q_[-1]), complex(qd_[-1])
        if not (np.isfinite(q) and np.isfinite(qd)):
            raise NumericalError(f"non-finite mode values at t={b}")
    return np.concatenate(ts), np.concatenate(qs), np.concatenate(qds)


def wronskian(q, qdot):
    """q conj(qdot) - conj(q) qdot; equals +i for a normalized positive-frequency mode."""
    return q * np.conj(qdot) - np.conj(q) * qdot


@dataclass(frozen=True, eq=False)
class ModeSolution:
    grid: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    wronskian_residual: np.ndarray
    wronskian_drift: float

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re_q", "im_q", "re_qdot", "im_qdot", "wronskian_residual"])
            for row in zip(self.grid, self.q.real, self.q.imag, self.qdot.real, self.qdot.imag,
                           self.wronskian_residual):
                w.writerow([f"{x:.17g}" for x in row])


def in_mode(omega: float, t):
    """Positive-frequency plane wave exp(-i w t)/sqrt(2w) and its derivative."""
    q = np.exp(-1j * omega * np.asarray(t, dtype=float)) / math.sqrt(2 * omega)
    return q, -1j * omega * q


def integrate_mode(profile: FrequencyProfile, policy: StepPolicy = DEFAULT_POLICY,
                   t_start: float | None = None, t_end: float | None = None) -> ModeSolution:
    """Evolve the in-mode across the whole profile.

    Raises ``WronskianError`` when the Wronskian residual exceeds
    ``policy.wronskian_tol`` anywhere on the grid.
    """
    margin = policy.margin
    if margin is None:
        margin = 2 * math.pi / min(profile.omega_in, profile.omega_out)
    if t_start is None:
        t_start = profile.t_minus - margin
    if t_end is None:
        t_end = profile.t_plus + margin
    q0, qd0 = in_mode(profile.omega_in, t_start)
    grid, q, qd = propagate(profile, t_start, t_end, complex(q0), complex(qd0), policy)
    resid = np.abs(wronskian(q, qd) - 1j)
    drift = float(resid.max())
    if not math.isfinite(drift) or drift > policy.wronskian_tol:
        raise WronskianError(f"Wronskian drift {drift:.3e} exceeds {policy.wronskian_tol:.1e}")
    return ModeSolution(grid, q, qd, resid, drift)


@dataclass(frozen=True)
class BogoliubovPair:
    """In/out coefficients, q_in = alpha u_out + beta conj(u_out) past the profile.

    The phase of ``beta`` refers to plane waves with a global time origin,
    ``u_out = exp(-i w_out t)/sqrt(2 w_out)``.
    """

    alpha: complex
    beta: complex

    @property
    def occupation(self) -> float:
        return abs(self.beta) ** 2

    @property
    def persistence(self) -> float:
        """|<0_out|0_in>|^2 = 1/|alpha|."""
        return 1.0 / abs(self.alpha)

    @property
    def squeeze_r(self) -> float:
        return math.asinh(abs(self.beta))

    @cached_property
    def norm_defect(self) -> float:
        return abs(self.alpha) ** 2 - abs(self.beta) ** 2 - 1.0


def extract_bogoliubov(sol: ModeSolution, profile: FrequencyProfile, tol: float = 1e-8) -> BogoliubovPair:
    """Match the final grid point to alpha u + beta conj(u) on the out-plateau."""
    T = float(sol.grid[-1])
    if T < profile.t_plus:
        raise ValueError(f"solution ends at {T}, before the out-plateau at {profile.t_plus}")
    u, ud = in_mode(profile.omega_out, T)
    m = np.array([[u, np.conj(u)], [ud, np.conj(ud)]], dtype=complex)
    alpha, beta = np.linalg.solve(m, np.array([sol.q[-1], sol.qdot[-1]]))
    pair = BogoliubovPair(complex(alpha), complex(beta))
    if not abs(pair.norm_defect) <= tol:
        raise NormalizationError(f"|alpha|^2 - |beta|^2 - 1 = {pair.norm_defect:.3e}")
    return pair


def bogoliubov(profile: FrequencyProfile, policy: StepPolicy = DEFAULT_POLICY) -> BogoliubovPair:
    """integrate_mode followed by extract_bogoliubov."""
    return extract_bogoliubov(integrate_mode(profile, policy), profile)


def sudden_jump_oracle(omega0: float, omega1: float) -> BogoliubovPair:
    """Closed-form coefficients for an instantaneous jump w0 -> w1 at t = 0.

    Continuity of q and qdot at the jump; no integration involved.
    """
    if not (omega0 > 0 and omega1 > 0):
        raise ValueError("frequencies must be positive")
    d = 2 * math.sqrt(omega0 * omega1)
    return BogoliubovPair(complex((omega1 + omega0) / d), complex((omega1 - omega0) / d))
