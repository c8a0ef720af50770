"""Gaussian phase-space picture of squeeze, free rotation and anti-squeeze.

Quadratures (q, p) with hbar = 1; the vacuum covariance is I/2.  Every
operation here is a symplectic similarity ``cov -> M cov M^T``, so pure
states stay pure (det cov = 1/4).

Squeeze angle convention: theta = 0 squeezes q, i.e. M = diag(e^-r, e^r);
general theta conjugates this by a rotation through theta/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import InputError, NumericalError
from .modes import BogoliubovPair

PURITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GaussianState:
    cov: np.ndarray
    mean: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float).reshape(2, 2)
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise InputError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        if np.linalg.det(cov) < 0.25 * (1 - PURITY_TOL):
            raise InputError("covariance violates the uncertainty bound det >= 1/4")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", np.array(self.mean, dtype=float).reshape(2))

    @classmethod
    def vacuum(cls) -> "GaussianState":
        return cls(0.5 * np.eye(2))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.cov))

    def transformed(self, m: np.ndarray) -> "GaussianState":
        return GaussianState(m @ self.cov @ m.T, m @ self.mean)


@dataclass(frozen=True)
class SqueezeParams:
    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise InputError("squeeze parameter r must be finite and >= 0")


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def squeeze_matrix(p: SqueezeParams) -> np.ndarray:
    rot = rotation_matrix(0.5 * p.theta)
    return rot @ np.diag([math.exp(-p.r), math.exp(p.r)]) @ rot.T


def apply_squeeze(state: GaussianState, p: SqueezeParams) -> GaussianState:
    return state.transformed(squeeze_matrix(p))


def apply_rotation(state: GaussianState, angle: float) -> GaussianState:
    """Free evolution over omega*tau = ``angle`` (phase-space rotation)."""
    return state.transformed(rotation_matrix(angle))


def protocol_final_state(r: float, omega: float, tau: float) -> GaussianState:
    """Vacuum, squeezed by r, rotated by omega*tau, then un-squeezed."""
    if not omega > 0:
        raise InputError("omega must be positive")
    if not tau >= 0:
        raise InputError("tau must be >= 0")
    p = SqueezeParams(r)
    m = np.linalg.inv(squeeze_matrix(p)) @ rotation_matrix(omega * tau) @ squeeze_matrix(p)
    return GaussianState.vacuum().transformed(m)


def residual_squeeze(state: GaussianState, tol: float = PURITY_TOL) -> float:
    """Squeeze parameter of a pure state: a quarter of log(lambda_max/lambda_min).

    A state squeezed by r from the vacuum has eigenvalues e^{-+2r}/2, so the
    quarter-log returns r itself.  Zero exactly for the vacuum.
    """
    if abs(state.det - 0.25) > tol:
        raise InputError(f"state is not pure (det cov = {state.det:.12g})")
    lo, hi = np.linalg.eigvalsh(state.cov)
    return max(0.0, 0.25 * math.log(hi / lo))


def squeeze_from_bogoliubov(pair: BogoliubovPair) -> SqueezeParams:
    """r = asinh|beta|, theta = arg(conj(beta)/alpha) (0 when beta = 0)."""
    theta = float(np.angle(np.conj(pair.beta) / pair.alpha)) + 0.0 if pair.beta != 0 else 0.0
    return SqueezeParams(math.asinh(abs(pair.beta)), theta)


def squeezed_amplitudes(pair: BogoliubovPair, n_max: int) -> np.ndarray:
    """Amplitudes on |2n> for n = 0..n_max of the out-squeezed in-vacuum.

    a_n = c0 x^n sqrt((2n)!)/(2^n n!) with x = -conj(beta)/alpha and
    c0 = (1 - |x|^2)^(1/4) real and positive.  Moduli are evaluated in
    log space so large n_max does not overflow.
    """
    if n_max < 0:
        raise InputError("n_max must be >= 0")
    x = -np.conj(pair.beta) / pair.alpha
    ax = abs(x)
    if not ax < 1:
        raise InputError("|beta/alpha| must be < 1")
    n = np.arange(n_max + 1)
    out = np.zeros(n_max + 1, dtype=complex)
    if ax == 0:
        out[0] = 1.0
        return out
    log_mod = (0.25 * math.log1p(-ax * ax) + n * math.log(ax)
               + 0.5 * gammaln(2 * n + 1) - n * math.log(2) - gammaln(n + 1))
    out[:] = np.exp(log_mod) * np.exp(1j * n * np.angle(x))
    if not np.all(np.isfinite(out)):
        raise NumericalError("non-finite squeezed amplitude")
    return out
