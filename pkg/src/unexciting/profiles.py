"""Frequency profiles omega^2(t) and their dual scattering potentials V(x).

A profile is a contiguous tiling of ``[start, end)`` by segments plus two
exact plateau values used outside that window.  Evaluating left of the
window returns the left plateau bit-for-bit, and likewise on the right;
all the Bogoliubov matching downstream relies on that.

Segment kinds mirror the JSON protocol format:

``constant``  ``{"value"}``
``tanh``      ``{"lo", "hi", "center", "width"}``   lo -> hi step
``sech2``     ``{"base", "amplitude", "kappa", "center"}``
``samples``   ``{"dt", "values"}``                   cubic spline on t0 + i*dt
``expr``      ``{"expr", "shift", "scale"}``          numpy expression in ``t``

A fifth in-memory kind, ``closure``, wraps an arbitrary vectorized callable;
it is written out as ``samples`` when serialized.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .errors import InputError

PLATEAU_RTOL = 1e-12
KINDS = ("constant", "tanh", "sech2", "samples", "expr", "closure")

_EXPR_NAMESPACE = {
    "__builtins__": {},
    "np": np,
    "pi": np.pi,
    "e": np.e,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "tanh": np.tanh,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "arctan": np.arctan,
    "where": np.where,
}


def sech2(x):
    """Overflow-free sech^2."""
    x = np.abs(np.asarray(x, dtype=float))
    e = np.exp(-2.0 * x)
    return 4.0 * e / (1.0 + e) ** 2


def _float_out(t, values):
    if np.ndim(t) == 0:
        return float(values)
    return values


def _build_func(kind: str, t0: float, t1: float, params: dict) -> Callable:
    if kind == "constant":
        v = float(params["value"])
        return lambda t: np.full(np.shape(t), v) if np.ndim(t) else v
    if kind == "tanh":
        lo, hi = float(params["lo"]), float(params["hi"])
        c, w = float(params.get("center", 0.0)), float(params.get("width", 1.0))
        if w == 0:
            raise InputError("tanh segment needs a non-zero width")
        return lambda t: lo + 0.5 * (hi - lo) * (1.0 + np.tanh((np.asarray(t, float) - c) / w))
    if kind == "sech2":
        base, amp = float(params.get("base", 0.0)), float(params["amplitude"])
        kappa, c = float(params.get("kappa", 1.0)), float(params.get("center", 0.0))
        if kappa <= 0:
            raise InputError("sech2 segment needs kappa > 0")
        return lambda t: base + amp * sech2(kappa * (np.asarray(t, float) - c))
    if kind == "samples":
        dt = float(params["dt"])
        values = np.asarray(params["values"], dtype=float)
        if dt <= 0 or values.ndim != 1 or values.size < 4:
            raise InputError("samples segment needs dt > 0 and at least 4 values")
        grid = t0 + dt * np.arange(values.size)
        if abs(grid[-1] - t1) > 1e-9 * max(1.0, abs(t1), dt * values.size):
            raise InputError(
                f"samples grid ends at {grid[-1]!r}, segment ends at {t1!r}")
        grid[-1] = t1
        spline = CubicSpline(grid, values)
        return lambda t: spline(t)
    if kind == "expr":
        src = str(params["expr"])
        shift = float(params.get("shift", 0.0))
        scale = float(params.get("scale", 1.0))
        try:
            code = compile(src, "<expr>", "eval")
        except SyntaxError as exc:
            raise InputError(f"bad expression {src!r}: {exc}") from None

        def f(t):
            tt = shift + scale * np.asarray(t, dtype=float)
            out = eval(code, _EXPR_NAMESPACE, {"t": tt})
            return np.broadcast_to(np.asarray(out, dtype=float), np.shape(tt)) + 0.0

        return f
    if kind == "closure":
        raise InputError("closure segments must be given a callable")
    raise InputError(f"unknown segment kind {kind!r}")


@dataclass(frozen=True, eq=False)
class Segment:
    """Half-open interval ``[t0, t1)`` carrying one evaluation rule."""

    t0: float
    t1: float
    kind: str
    params: dict = field(default_factory=dict)
    func: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown segment kind {self.kind!r}")
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)) or not self.t0 < self.t1:
            raise InputError(f"segment needs finite t0 < t1, got [{self.t0}, {self.t1})")
        if self.func is None:
            object.__setattr__(self, "func", _build_func(self.kind, self.t0, self.t1, self.params))

    def __call__(self, t):
        return _float_out(t, self.func(np.asarray(t, dtype=float)))

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def value(self) -> float:
        if not self.is_constant:
            raise AttributeError("only constant segments have a single value")
        return float(self.params["value"])

    def affine(self, a: float, b: float) -> "Segment":
        """Segment evaluating ``a + b * self(t)``."""
        p = dict(self.params)
        if self.kind == "constant":
            p["value"] = a + b * float(p["value"])
        elif self.kind == "tanh":
            p["lo"], p["hi"] = a + b * float(p["lo"]), a + b * float(p["hi"])
        elif self.kind == "sech2":
            p["base"] = a + b * float(p.get("base", 0.0))
            p["amplitude"] = b * float(p["amplitude"])
        elif self.kind == "samples":
            p["values"] = (a + b * np.asarray(p["values"], dtype=float)).tolist()
        elif self.kind == "expr":
            p["expr"] = f"{a!r} + {b!r} * ({p['expr']})"
        f = self.func
        return Segment(self.t0, self.t1, self.kind, p, lambda t: a + b * f(t))

    def reflected(self, center: float) -> "Segment":
        """Segment evaluating ``self(2*center - t)`` on the mirrored interval."""
        p = dict(self.params)
        if self.kind == "tanh":
            p["center"] = 2 * center - float(p.get("center", 0.0))
            p["width"] = -float(p.get("width", 1.0))
        elif self.kind == "sech2":
            p["center"] = 2 * center - float(p.get("center", 0.0))
        elif self.kind == "samples":
            p["values"] = list(reversed(list(p["values"])))
        elif self.kind == "expr":
            shift, scale = float(p.get("shift", 0.0)), float(p.get("scale", 1.0))
            p["shift"], p["scale"] = shift + 2 * center * scale, -scale
        f = self.func
        return Segment(2 * center - self.t1, 2 * center - self.t0, self.kind, p,
                       lambda t: f(2 * center - np.asarray(t, dtype=float)))

    def to_dict(self, sample_dt: float = 5e-3) -> dict:
        if self.kind != "closure":
            p = {k: (np.asarray(v).tolist() if isinstance(v, np.ndarray) else v)
                 for k, v in self.params.items()}
            return {"t0": self.t0, "t1": self.t1, "kind": self.kind, "params": p}
        n = max(8, int(math.ceil((self.t1 - self.t0) / sample_dt)))
        grid = np.linspace(self.t0, self.t1, n + 1)
        return {
            "t0": self.t0,
            "t1": self.t1,
            "kind": "samples",
            "params": {"dt": (self.t1 - self.t0) / n,
                       "values": np.asarray(self.func(grid), dtype=float).tolist()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Segment":
        try:
            return cls(float(d["t0"]), float(d["t1"]), str(d["kind"]), dict(d.get("params", {})))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed segment {d!r}: {exc}") from None


def constant_segment(t0: float, t1: float, value: float) -> Segment:
    return Segment(t0, t1, "constant", {"value": float(value)})


def closure_segment(t0: float, t1: float, func: Callable) -> Segment:
    return Segment(t0, t1, "closure", {}, func)


class _Piecewise:
    """Shared machinery; subclasses name the plateaus."""

    segments: tuple
    _left: float
    _right: float

    def _check_tiling(self):
        segs = self.segments
        if not segs:
            raise InputError("a profile needs at least one segment")
        for a, b in zip(segs, segs[1:]):
            gap = b.t0 - a.t1
            if abs(gap) > 1e-12 * max(1.0, abs(a.t1)):
                kind = "overlapping" if gap < 0 else "gapped"
                raise InputError(f"{kind} segments at t={a.t1!r} / {b.t0!r}")
        edges = np.array([s.t0 for s in segs] + [segs[-1].t1])
        object.__setattr__(self, "_edges", edges)

    @property
    def start(self) -> float:
        return self.segments[0].t0

    @property
    def end(self) -> float:
        return self.segments[-1].t1

    @property
    def boundaries(self) -> np.ndarray:
        """All segment edges, including the window ends."""
        return self._edges.copy()

    def __call__(self, t):
        tt = np.asarray(t, dtype=float)
        flat = np.atleast_1d(tt)
        out = np.empty(flat.shape)
        idx = np.searchsorted(self._edges, flat, side="right") - 1
        out[idx < 0] = self._left
        out[idx >= len(self.segments)] = self._right
        for i, seg in enumerate(self.segments):
            m = idx == i
            if m.any():
                out[m] = seg.func(flat[m])
        return float(out[0]) if tt.ndim == 0 else out.reshape(tt.shape)

    def piece_at(self, t: float) -> Segment | float:
        """Segment active at ``t`` or the plateau value outside the window."""
        i = int(np.searchsorted(self._edges, t, side="right")) - 1
        if i < 0:
            return self._left
        if i >= len(self.segments):
            return self._right
        return self.segments[i]

    def junction_jumps(self) -> list[tuple[float, float]]:
        """(edge, |jump|) for every edge, window ends included."""
        vals_l = [self._left] + [float(s.func(np.array([s.t1]))[0]) for s in self.segments]
        vals_r = [float(s.func(np.array([s.t0]))[0]) for s in self.segments] + [self._right]
        return [(float(e), abs(r - l)) for e, l, r in zip(self._edges, vals_l, vals_r)]

    def sudden_junctions(self, tol: float = 1e-9) -> list[float]:
        return [e for e, j in self.junction_jumps() if j > tol * max(1.0, abs(self._left), abs(self._right))]

    def sample(self, n_per_segment: int = 400) -> tuple[np.ndarray, np.ndarray]:
        ts = np.concatenate([np.linspace(s.t0, s.t1, n_per_segment, endpoint=False) for s in self.segments]
                            + [[self.end]])
        return ts, self(ts)

    def _min_interior(self) -> float:
        return float(np.min(self.sample(2000)[1]))

    def _mapped(self, seg_map: Callable[[Segment], Segment], left: float, right: float, **kw):
        return type(self)(tuple(seg_map(s) for s in self.segments), left, right, **kw)


@dataclass(frozen=True, eq=False)
class FrequencyProfile(_Piecewise):
    """Squared frequency omega^2(t) with exact plateaus outside ``[t_minus, t_plus]``."""

    segments: tuple
    omega_in_sq: float
    omega_out_sq: float
    flags: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "omega_in_sq", float(self.omega_in_sq))
        object.__setattr__(self, "omega_out_sq", float(self.omega_out_sq))
        if not (self.omega_in_sq > 0 and self.omega_out_sq > 0):
            raise InputError(
                f"asymptotic plateaus must be positive, got {self.omega_in_sq}, {self.omega_out_sq}")
        self._check_tiling()
        flags = set(self.flags)
        if self._min_interior() <= 0:
            flags.add("nonpositive_interior")
        object.__setattr__(self, "flags", frozenset(flags))

    _left = property(lambda self: self.omega_in_sq)
    _right = property(lambda self: self.omega_out_sq)
    t_minus = property(lambda self: self.start)
    t_plus = property(lambda self: self.end)

    @property
    def omega_in(self) -> float:
        return math.sqrt(self.omega_in_sq)

    @property
    def omega_out(self) -> float:
        return math.sqrt(self.omega_out_sq)

    def reversed(self, center: float = 0.0) -> "FrequencyProfile":
        """Time reversal t -> 2*center - t."""
        segs = tuple(s.reflected(center) for s in reversed(self.segments))
        return FrequencyProfile(segs, self.omega_out_sq, self.omega_in_sq, self.flags)

    def shifted(self, d_omega_sq: float) -> "FrequencyProfile":
        """omega^2 -> omega^2 + d_omega_sq everywhere."""
        return FrequencyProfile(tuple(s.affine(d_omega_sq, 1.0) for s in self.segments),
                                self.omega_in_sq + d_omega_sq, self.omega_out_sq + d_omega_sq)


@dataclass(frozen=True, eq=False)
class PotentialProfile(_Piecewise):
    """Potential V(x), constant outside ``[x_minus, x_plus]``."""

    segments: tuple
    v_left: float = 0.0
    v_right: float = 0.0
    energy_hint: float | None = None
    source: FrequencyProfile | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "v_left", float(self.v_left))
        object.__setattr__(self, "v_right", float(self.v_right))
        self._check_tiling()

    _left = property(lambda self: self.v_left)
    _right = property(lambda self: self.v_right)
    x_minus = property(lambda self: self.start)
    x_plus = property(lambda self: self.end)

    def mirrored(self) -> "PotentialProfile":
        """V(x) -> V(-x)."""
        segs = tuple(s.reflected(0.0) for s in reversed(self.segments))
        return PotentialProfile(segs, self.v_right, self.v_left)


# -- construction -----------------------------------------------------------

def make_piecewise(segments: Sequence[Segment], omega_in_sq: float | None = None,
                   omega_out_sq: float | None = None) -> FrequencyProfile:
    """Assemble ordered segments into a profile.

    Plateau values default to the first segment's value at its left edge and
    the last segment's value at its right edge.  Sudden junctions are kept as
    segment boundaries.
    """
    segs = list(segments)
    if not segs:
        raise InputError("no segments given")
    for a, b in zip(segs, segs[1:]):
        if b.t0 < a.t1 - 1e-12 * max(1.0, abs(a.t1)):
            raise InputError(f"segments overlap or are unordered near t={a.t1!r}")
    if omega_in_sq is None:
        omega_in_sq = float(segs[0].func(np.array([segs[0].t0]))[0])
    if omega_out_sq is None:
        omega_out_sq = float(segs[-1].func(np.array([segs[-1].t1]))[0])
    return FrequencyProfile(tuple(segs), omega_in_sq, omega_out_sq)


def make_constant(omega_sq: float, t0: float = -1.0, t1: float = 1.0) -> FrequencyProfile:
    return make_piecewise([constant_segment(t0, t1, omega_sq)])


def make_step(omega0_sq: float, omega1_sq: float, t_jump: float = 0.0, pad: float = 1.0) -> FrequencyProfile:
    """Instantaneous jump omega0^2 -> omega1^2 at ``t_jump``."""
    return make_piecewise([constant_segment(t_jump - pad, t_jump, omega0_sq),
                           constant_segment(t_jump, t_jump + pad, omega1_sq)])


def _cutoff(asym: float, rtol: float) -> float:
    return rtol * max(1.0, abs(asym))


def make_tanh_step(lo: float, hi: float, center: float = 0.0, width: float = 1.0,
                   rtol: float = PLATEAU_RTOL) -> FrequencyProfile:
    """Smooth step omega^2: lo -> hi, truncated where the tail is below the cutoff."""
    if lo == hi:
        return make_constant(lo, center - abs(width), center + abs(width))
    # |dev| <= |hi-lo| e^{-2|x|/w} on either side
    tol = min(_cutoff(lo, rtol), _cutoff(hi, rtol))
    half = 0.5 * abs(width) * math.log(abs(hi - lo) / tol) + abs(width)
    seg = Segment(center - half, center + half, "tanh",
                  {"lo": lo, "hi": hi, "center": center, "width": width})
    return make_piecewise([seg], lo, hi)


def make_sech2(omega0_sq: float, amplitude: float, kappa: float, center: float = 0.0,
               cutoff: float | None = None) -> FrequencyProfile:
    """omega^2(t) = omega0_sq + amplitude * sech^2(kappa (t - center))."""
    if not omega0_sq > 0:
        raise InputError("omega0_sq must be positive")
    if not kappa > 0:
        raise InputError("kappa must be positive")
    if amplitude == 0:
        return make_constant(omega0_sq, center - 1.0 / kappa, center + 1.0 / kappa)
    tol = cutoff if cutoff is not None else PLATEAU_RTOL * abs(amplitude)
    tol = max(min(tol, _cutoff(omega0_sq, PLATEAU_RTOL)), np.finfo(float).tiny)
    # sech^2 x < 4 e^{-2x}
    half = max(0.5 * math.log(4.0 * abs(amplitude) / tol) / kappa, 1.0 / kappa)
    seg = Segment(center - half, center + half, "sech2",
                  {"base": omega0_sq, "amplitude": amplitude, "kappa": kappa, "center": center})
    return make_piecewise([seg], omega0_sq, omega0_sq)


def _asymptote(f: Callable, direction: int, scale: float, rtol: float) -> float:
    far = direction * scale * np.array([2.0 ** 15, 2.0 ** 16])
    v = np.asarray(f(far), dtype=float)
    if not np.all(np.isfinite(v)) or abs(v[1] - v[0]) > _cutoff(v[1], rtol):
        raise InputError(f"function is not asymptotically constant as t -> {'+' if direction > 0 else '-'}inf")
    return float(v[1])


def _plateau_edge(f: Callable, value: float, direction: int, scale: float, rtol: float) -> float:
    """Smallest |t| past which |f - value| stays below the cutoff (tail assumed monotone)."""
    tol = _cutoff(value, rtol)
    ts = scale * 2.0 ** np.arange(-6, 17)
    dev = np.abs(np.asarray(f(direction * ts), dtype=float) - value)
    bad = np.nonzero(~(dev < tol))[0]
    if bad.size == 0:
        return float(ts[0])
    if bad[-1] == ts.size - 1:
        raise InputError("function does not settle onto its plateau within the search range")
    lo, hi = ts[bad[-1]], ts[bad[-1] + 1]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if abs(float(f(np.array([direction * mid]))[0]) - value) < tol:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return float(hi)


def from_function(f: Callable, *, left: float | None = None, right: float | None = None,
                  t_minus: float | None = None, t_plus: float | None = None,
                  scale: float = 1.0, rtol: float = PLATEAU_RTOL) -> FrequencyProfile:
    """Wrap a vectorized omega^2(t) closure, detecting its plateaus.

    Known asymptotes may be passed as ``left``/``right``; otherwise they are
    read off far out (and must agree between t = 2^15 and 2^16 times ``scale``).
    """
    left = _asymptote(f, -1, scale, rtol) if left is None else float(left)
    right = _asymptote(f, +1, scale, rtol) if right is None else float(right)
    a = -_plateau_edge(f, left, -1, scale, rtol) if t_minus is None else float(t_minus)
    b = _plateau_edge(f, right, +1, scale, rtol) if t_plus is None else float(t_plus)
    if not a < b:
        a, b = min(a, b) - scale, max(a, b) + scale
    return make_piecewise([closure_segment(a, b, f)], left, right)


def _check_path_positive(profile: FrequencyProfile, what: str) -> FrequencyProfile:
    """Reject profiles whose omega^2 reaches zero, including isolated touch points."""
    ts, vals = profile.sample(4000)
    i = int(np.argmin(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    vmin = float(vals[i])
    if hi > lo:
        res = minimize_scalar(lambda t: float(profile(t)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * max(1.0, abs(lo), abs(hi))})
        vmin = min(vmin, float(res.fun))
    floor = PLATEAU_RTOL * max(1.0, profile.omega_in_sq, profile.omega_out_sq)
    if "nonpositive_interior" in profile.flags or vmin <= floor:
        raise InputError(f"{what}: omega^2 <= 0 somewhere on the path (min {vmin:.3e})")
    return profile


def make_cosmology(k: float, m: float, scale_factor: Callable, **kw) -> FrequencyProfile:
    """Conformally coupled massive scalar in FRW: omega^2 = k^2 + m^2 a(t)^2."""
    if m == 0:
        return make_constant(k * k)
    f = lambda t: k * k + m * m * np.asarray(scale_factor(t), dtype=float) ** 2
    return _check_path_positive(from_function(f, **kw), "cosmology")


def make_scalar_qed(k_par: float, k_perp: float, m: float, A_par: Callable, **kw) -> FrequencyProfile:
    """Scalar QED in a homogeneous electric field: omega^2 = (k_par - A(t))^2 + k_perp^2 + m^2."""
    f = lambda t: (k_par - np.asarray(A_par(t), dtype=float)) ** 2 + k_perp ** 2 + m * m
    return _check_path_positive(from_function(f, **kw), "scalar QED")


def make_yukawa(k: float, m: float, lam: float, sigma: Callable, **kw) -> FrequencyProfile:
    """Yukawa-coupled scalar: omega^2 = k^2 + m^2 + lam sigma(t)^2."""
    if lam == 0:
        return make_constant(k * k + m * m)
    f = lambda t: k * k + m * m + lam * np.asarray(sigma(t), dtype=float) ** 2
    return _check_path_positive(from_function(f, **kw), "Yukawa")


def desitter_coefficients(l: int, d: int, m: float) -> tuple[float, float]:
    """(sech^2 prefactor, constant part) of the global de Sitter mode frequency."""
    if l < 0 or int(l) != l:
        raise InputError("l must be a non-negative integer")
    if d < 3 or int(d) != d:
        raise InputError("d must be an integer >= 3")
    amp = (2 * l + d - 3) / 2 * ((2 * l + d - 1) / 2)
    const = m * m - (d - 1) ** 2 / 4
    return amp, const


def make_desitter(l: int, d: int, m: float) -> FrequencyProfile:
    """Mode u_l in d-dimensional global de Sitter (conformal time, unit radius)."""
    amp, const = desitter_coefficients(l, d, m)
    if not const > 0:
        raise InputError(f"m^2 - (d-1)^2/4 = {const} <= 0: no oscillatory asymptotics")
    return make_sech2(const, amp, 1.0)


def perturb_amplitude(profile: FrequencyProfile, factor: float) -> FrequencyProfile:
    """Scale the deviation from the in-plateau: omega^2 -> w_in^2 + factor (omega^2 - w_in^2)."""
    ref = profile.omega_in_sq
    segs = tuple(s.affine(ref * (1.0 - factor), factor) for s in profile.segments)
    out = ref + factor * (profile.omega_out_sq - ref)
    return FrequencyProfile(segs, ref, out)


# -- duality ----------------------------------------------------------------

def dualize(profile, E: float):
    """Swap omega^2(t) <-> V(x) = E - omega^2(t) at energy ``E``.

    Works in both directions.  Re-dualizing a dual at the same energy hands
    back the original object, so the round trip is exact.
    """
    E = float(E)
    if isinstance(profile, PotentialProfile):
        if profile.source is not None and profile.energy_hint == E:
            return profile.source
        segs = tuple(s.affine(E, -1.0) for s in profile.segments)
        return FrequencyProfile(segs, E - profile.v_left, E - profile.v_right)
    if isinstance(profile, FrequencyProfile):
        segs = tuple(s.affine(E, -1.0) for s in profile.segments)
        return PotentialProfile(segs, E - profile.omega_in_sq, E - profile.omega_out_sq,
                                energy_hint=E, source=profile)
    raise TypeError(f"cannot dualize {type(profile).__name__}")


def make_square_well(depth: float, half_width: float, center: float = 0.0, pad: float = 1.0) -> PotentialProfile:
    """V = -depth on [center - half_width, center + half_width), zero elsewhere."""
    a, b = center - half_width, center + half_width
    return PotentialProfile((constant_segment(a - pad, a, 0.0),
                             constant_segment(a, b, -depth),
                             constant_segment(b, b + pad, 0.0)))


# -- JSON -------------------------------------------------------------------

def profile_to_dict(profile, sample_dt: float = 5e-3) -> dict:
    segs = [s.to_dict(sample_dt) for s in profile.segments]
    if isinstance(profile, FrequencyProfile):
        return {"segments": segs, "omega_in_sq": profile.omega_in_sq, "omega_out_sq": profile.omega_out_sq}
    d = {"segments": segs, "v_left": profile.v_left, "v_right": profile.v_right}
    if profile.energy_hint is not None:
        d["energy"] = profile.energy_hint
    return d


def profile_from_dict(d: dict):
    """Frequency profile if the dict has omega plateaus, potential if it has v_left/v_right."""
    if not isinstance(d, dict) or not isinstance(d.get("segments"), list):
        raise InputError("profile JSON needs a 'segments' list")
    segs = [Segment.from_dict(s) for s in d["segments"]]
    try:
        if "omega_in_sq" in d or "omega_out_sq" in d:
            return make_piecewise(segs, d.get("omega_in_sq"), d.get("omega_out_sq"))
        return PotentialProfile(tuple(segs), float(d.get("v_left", 0.0)), float(d.get("v_right", 0.0)),
                                energy_hint=d.get("energy"))
    except (TypeError, KeyError) as exc:
        raise InputError(f"malformed profile: {exc}") from None


def load_profile(path: str | Path):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read profile {path}: {exc}") from None
    return profile_from_dict(data)


def save_profile(profile, path: str | Path, extra: dict | None = None, sample_dt: float = 5e-3) -> None:
    d = profile_to_dict(profile, sample_dt)
    if extra:
        d.update(extra)
    Path(path).write_text(json.dumps(d, indent=1, sort_keys=False) + "\n")
