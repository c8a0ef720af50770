"""1-D stationary scattering, -psi'' + V psi = E psi, by transfer matrices.

The potential is replaced by piecewise-constant slabs (midpoint values,
slab edges aligned with every segment edge so steps are resolved exactly)
and the exact 2x2 (psi, psi') propagators of the slabs are multiplied.  The
slab approximation is a symmetric one-step scheme, so amplitudes have an
even error expansion in the slab width; two successive halvings are
combined by Richardson extrapolation.  None of this touches the ODE
integrator used for mode functions, which is what makes the duality check
an independent comparison.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, InputError, NumericalError
from .modes import DEFAULT_POLICY, StepPolicy, bogoliubov, propagate
from .profiles import (FrequencyProfile, PotentialProfile, closure_segment, constant_segment, dualize)


@dataclass(frozen=True)
class ScatteringResult:
    r_amp: complex
    t_amp: complex
    R: float
    T: float
    E: float
    k: float
    k_out: float
    slabs: int = 0

    @property
    def unitarity_defect(self) -> float:
        return self.R + self.T - 1.0


@dataclass(frozen=True)
class SlabPolicy:
    """Slab refinement controls.

    ``density`` is the initial number of slabs per radian of local phase
    (plus a floor per unit length); refinement doubles it until R and T move
    by less than ``tol``.
    """

    density: float = 4.0
    tol: float = 1e-10
    max_slabs: int = 2 ** 22
    min_per_segment: int = 8

    def refined(self, factor: float) -> "SlabPolicy":
        return SlabPolicy(self.density * factor, self.tol, self.max_slabs, self.min_per_segment)


DEFAULT_SLABS = SlabPolicy()


def _slab_propagators(k2: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Exact (psi, psi') maps across slabs with constant E - V = k2 and width h."""
    m = np.empty((k2.size, 2, 2))
    pos, neg, zero = k2 > 0, k2 < 0, k2 == 0
    k = np.sqrt(np.abs(k2))
    kh = k * h
    if pos.any():
        c, s = np.cos(kh[pos]), np.sin(kh[pos])
        m[pos] = np.stack([np.stack([c, s / k[pos]], -1), np.stack([-k[pos] * s, c], -1)], -2)
    if neg.any():
        c, s = np.cosh(kh[neg]), np.sinh(kh[neg])
        m[neg] = np.stack([np.stack([c, s / k[neg]], -1), np.stack([k[neg] * s, c], -1)], -2)
    if zero.any():
        one = np.ones(zero.sum())
        m[zero] = np.stack([np.stack([one, h[zero]], -1), np.stack([0 * one, one], -1)], -2)
    return m


def _ordered_product(mats: np.ndarray) -> tuple[np.ndarray, float]:
    """M_n ... M_2 M_1 by pairwise reduction, rescaled at each level.

    Returns (M / s, log s).
    """
    logs = np.zeros(mats.shape[0])
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            mats = np.concatenate([mats, np.eye(2)[None]])
            logs = np.append(logs, 0.0)
        mats = mats[1::2] @ mats[0::2]
        logs = logs[1::2] + logs[0::2]
        s = np.abs(mats).max(axis=(1, 2))
        mats = mats / s[:, None, None]
        logs = logs + np.log(s)
    return mats[0], float(logs[0])


def _slab_grid(potential: PotentialProfile, E: float, density: float, min_per_segment: int):
    xs, vs = [], []
    for seg in potential.segments:
        if seg.is_constant:
            xs.append(np.array([seg.t0, seg.t1]))
            vs.append(np.array([seg.value]))
            continue
        probe = np.linspace(seg.t0, seg.t1, 65)
        kmax = math.sqrt(float(np.max(np.abs(E - seg(probe)))) + 1.0)
        n = max(min_per_segment, int(math.ceil((seg.t1 - seg.t0) * kmax * density)))
        edges = np.linspace(seg.t0, seg.t1, n + 1)
        xs.append(edges)
        vs.append(seg(0.5 * (edges[1:] + edges[:-1])))
    widths = np.concatenate([np.diff(x) for x in xs])
    return widths, np.concatenate(vs)


def _amplitudes(potential: PotentialProfile, E: float, kl: float, kr: float, density: float,
                min_per_segment: int):
    h, v = _slab_grid(potential, E, density, min_per_segment)
    m, logs = _ordered_product(_slab_propagators(E - v, h))
    xl, xr = potential.x_minus, potential.x_plus
    # back-propagate the pure transmitted wave t=1 from the right edge
    er = np.exp(1j * kr * xr)
    right = np.array([er, 1j * kr * er])
    adj = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
    left = adj @ right  # equals exp(-logs) * true left state
    el = np.exp(1j * kl * xl)
    a = (left[0] + left[1] / (1j * kl)) / (2 * el)
    b = (left[0] - left[1] / (1j * kl)) * el / 2
    r = b / a
    with np.errstate(over="ignore", under="ignore"):
        t = np.exp(-logs) / a
    return complex(r), complex(t), h.size


def transfer_matrix_rt(potential: PotentialProfile, E: float, slab_width: SlabPolicy = DEFAULT_SLABS) -> ScatteringResult:
    """Reflection and transmission for a wave incident from the left.

    psi -> exp(ikx) + r exp(-ikx) on the left, t exp(ik'x) on the right.
    """
    E = float(E)
    if not (E > potential.v_left and E > potential.v_right):
        raise InputError(f"energy {E} is not above both asymptotes ({potential.v_left}, {potential.v_right})")
    kl, kr = math.sqrt(E - potential.v_left), math.sqrt(E - potential.v_right)
    pol = slab_width
    all_const = all(s.is_constant for s in potential.segments)
    prev = None
    history = []
    density = pol.density
    while True:
        r, t, n = _amplitudes(potential, E, kl, kr, density, pol.min_per_segment)
        if all_const:
            est = (r, t)
            break
        history.append((r, t))
        if len(history) >= 2:
            (r0, t0), (r1, t1) = history[-2], history[-1]
            est = ((4 * r1 - r0) / 3, (4 * t1 - t0) / 3)
            if prev is not None:
                dR = abs(abs(est[0]) ** 2 - abs(prev[0]) ** 2)
                dT = abs(abs(est[1]) ** 2 - abs(prev[1]) ** 2) * kr / kl
                if max(dR, dT) < pol.tol:
                    break
            prev = est
        if 2 * n > pol.max_slabs:
            raise ConvergenceError(f"R, T not converged to {pol.tol:g} within {pol.max_slabs} slabs")
        density *= 2
    r, t = est
    if not (np.isfinite(r) and np.isfinite(t)):
        raise NumericalError("non-finite scattering amplitudes")
    return ScatteringResult(r, t, abs(r) ** 2, abs(t) ** 2 * kr / kl, E, kl, kr, n)


def write_scan_csv(results: list[ScatteringResult], path: str | Path | None = None, stream=None) -> None:
    fh = open(path, "w", newline="") if path is not None else stream
    try:
        w = csv.writer(fh)
        w.writerow(["E", "R", "T", "r_re", "r_im", "t_re", "t_im"])
        for res in results:
            w.writerow([f"{x:.17g}" for x in (res.E, res.R, res.T, res.r_amp.real, res.r_amp.imag,
                                               res.t_amp.real, res.t_amp.imag)])
    finally:
        if path is not None:
            fh.close()


# -- resonances -------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceScan:
    energies: list
    all_pass: bool
    E: np.ndarray
    T: np.ndarray


def golden_max(f, a: float, b: float, xtol: float = 1e-10, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal ``f`` on [a, b]."""
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < xtol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def resonance_scan(potential: PotentialProfile, E_range: tuple[float, float], count: int,
                   slab_width: SlabPolicy = DEFAULT_SLABS, threshold: float = 1e-6) -> ResonanceScan:
    """Energies in ``E_range`` where T has a local maximum reaching 1 - threshold."""
    Es = np.linspace(E_range[0], E_range[1], count)
    T = np.array([transfer_matrix_rt(potential, E, slab_width).T for E in Es])
    if np.all(T >= 1 - threshold):
        return ResonanceScan([], True, Es, T)
    Tf = lambda E: transfer_matrix_rt(potential, E, slab_width).T
    found = []
    for i in range(count):
        left = T[i - 1] if i > 0 else -np.inf
        right = T[i + 1] if i + 1 < count else -np.inf
        if T[i] >= left and T[i] >= right:
            a, b = Es[max(i - 1, 0)], Es[min(i + 1, count - 1)]
            e, t = golden_max(Tf, a, b, xtol=1e-9 * max(1.0, abs(Es[i])))
            if t >= 1 - threshold and not any(abs(e - f) < 1e-6 for f in found):
                found.append(float(e))
    return ResonanceScan(found, False, Es, T)


# -- symmetric well with flanks ---------------------------------------------

@dataclass(frozen=True, eq=False)
class SymmetricWellSpec:
    """U(x) for x <= -a, -V0 on [-a, a], U(-x) for x >= a."""

    U: PotentialProfile
    V0: float
    E: float
    a: float | None = None

    def __post_init__(self):
        if not self.E > 0:
            raise InputError("energy must be positive")
        if self.U.v_left != 0.0:
            raise InputError("flank must vanish at -infinity")
        if self.a is not None and not self.a > 0:
            raise InputError("half-width must be positive")

    @property
    def gamma(self) -> float:
        return math.sqrt(self.E + self.V0)

    @property
    def k(self) -> float:
        return math.sqrt(self.E)

    def with_a(self, a: float) -> "SymmetricWellSpec":
        return SymmetricWellSpec(self.U, self.V0, self.E, a)

    def potential(self, pad: float = 1.0) -> PotentialProfile:
        a = self._need_a()
        flank = self.U
        lo = min(flank.x_minus, -a - pad)
        left = closure_segment(lo, -a, flank.__call__)
        right = closure_segment(a, -lo, lambda x: flank(-np.asarray(x, dtype=float)))
        return PotentialProfile((left, constant_segment(-a, a, -self.V0), right))

    def _need_a(self) -> float:
        if self.a is None:
            raise InputError("half-width a is not set")
        return self.a


def flank_solution(spec: SymmetricWellSpec, x: float, policy: StepPolicy = DEFAULT_POLICY) -> tuple[complex, complex]:
    """phi(x), phi'(x) for the flank solution with phi -> exp(ikx) at -infinity.

    Solved with the mode integrator on omega^2(t) = E - U(t): the in-mode
    there is exp(-ikt)/sqrt(2k), whose conjugate times sqrt(2k) is phi.
    """
    U = spec.U
    start = min(U.x_minus, x) - 1.0
    prof = dualize(PotentialProfile(U.segments, U.v_left, U.v_right), spec.E)
    k = spec.k
    q0 = np.exp(-1j * k * start) / math.sqrt(2 * k)
    _, q, qd = propagate(prof, start, x, q0, -1j * k * q0, policy)
    s = math.sqrt(2 * k)
    return complex(np.conj(q[-1]) * s), complex(np.conj(qd[-1]) * s)


def f_of_gamma(spec: SymmetricWellSpec, policy: StepPolicy = DEFAULT_POLICY) -> complex:
    a = spec._need_a()
    p, dp = flank_solution(spec, -a, policy)
    g = spec.gamma
    return abs(dp) ** 2 - g * g * abs(p) ** 2 - 2j * g * (dp * np.conj(p)).real


def zeta_of_gamma(spec: SymmetricWellSpec, policy: StepPolicy = DEFAULT_POLICY) -> float:
    """Phase with exp(i zeta) = f / conj(f), on the branch where zeta -> 0 as f -> negative real.

    For a flat flank f = k^2 - gamma^2 < 0 and zeta = 0.
    """
    f = f_of_gamma(spec, policy)
    if abs(f) < 1e-12:
        raise NumericalError("|f(gamma)| vanishes: phase undefined")
    return float(2 * np.angle(-f))


def zeta_sweep(spec: SymmetricWellSpec, energies, policy: StepPolicy = DEFAULT_POLICY) -> np.ndarray:
    """zeta over an energy sweep, unwrapped continuously from the highest energy down."""
    Es = np.asarray(energies, dtype=float)
    order = np.argsort(Es)[::-1]
    z = np.array([zeta_of_gamma(SymmetricWellSpec(spec.U, spec.V0, E, spec.a), policy) for E in Es[order]])
    z = np.unwrap(z)
    out = np.empty_like(z)
    out[order] = z
    return out


def symmetric_well_width(spec: SymmetricWellSpec, n: int, tol: float = 1e-10, max_iter: int = 100,
                         policy: StepPolicy = DEFAULT_POLICY) -> float:
    """Half-width a solving gamma a = n pi/2 + zeta(gamma; a)/4.

    Fixed-point iteration on F(a) = (n pi/2 + zeta(a)/4)/gamma with Aitken
    (Steffensen) acceleration, which also converges where F is not a
    contraction.  zeta is kept on the branch continuous with its previous
    value so that the root stays tied to ``n``.
    """
    if n < 1:
        raise InputError("n must be a positive integer")
    g = spec.gamma
    last = [None]

    def F(a):
        z = zeta_of_gamma(spec.with_a(a), policy)
        if last[0] is not None:
            z += 2 * math.pi * round((last[0] - z) / (2 * math.pi))
        last[0] = z
        return (n * math.pi / 2 + z / 4) / g

    a = n * math.pi / (2 * g)
    for _ in range(max_iter):
        a1 = F(a)
        if abs(a1 - a) < tol:
            return a1
        a2 = F(a1)
        den = a2 - 2 * a1 + a
        a_new = a - (a1 - a) ** 2 / den if den != 0 else a2
        if not a_new > 0:
            a_new = a2
        if abs(a_new - a) < tol:
            return a_new
        a = a_new
    raise ConvergenceError(f"width iteration did not converge in {max_iter} steps")


# -- duality ----------------------------------------------------------------

@dataclass(frozen=True)
class DualityReport:
    beta_sq: float
    R_over_T: float
    discrepancy: float
    relative: float
    R: float
    T: float
    E: float


def duality_check(profile: FrequencyProfile, policy: StepPolicy = DEFAULT_POLICY,
                  slab_width: SlabPolicy = DEFAULT_SLABS) -> DualityReport:
    """|beta|^2 from the mode integrator against R/T from transfer matrices."""
    if profile.omega_in_sq != profile.omega_out_sq:
        raise InputError("duality check needs equal in/out plateaus")
    E = profile.omega_in_sq
    pair = bogoliubov(profile, policy)
    res = transfer_matrix_rt(dualize(profile, E), E, slab_width)
    rt = res.R / res.T
    diff = abs(pair.occupation - rt)
    rel = diff / rt if rt > 0 else (0.0 if diff == 0 else math.inf)
    return DualityReport(pair.occupation, rt, diff, rel, res.R, res.T, E)
