import cmath
import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unexciting.errors import NormalizationError, WronskianError
from unexciting.modes import (DEFAULT_POLICY, BogoliubovPair, StepPolicy, bogoliubov, constant_propagator,
                              extract_bogoliubov, in_mode, integrate_mode, propagate, sudden_jump_oracle, wronskian)
from unexciting.profiles import make_constant, make_piecewise, make_sech2, make_step, make_tanh_step, constant_segment


def sech2_occupation(amplitude, omega0, kappa=1.0):
    """Closed form |beta|^2 for omega^2 = omega0^2 + A sech^2(kappa t)."""
    k = omega0 / kappa
    return abs(cmath.cos(math.pi * cmath.sqrt(amplitude / kappa ** 2 + 0.25))) ** 2 / math.sinh(math.pi * k) ** 2


def test_constant_profile_is_plane_wave():
    p = make_constant(1.0, -10.0, 10.0)
    sol = integrate_mode(p)
    exact, _ = in_mode(1.0, sol.grid)
    assert np.max(np.abs(sol.q - exact)) < 1e-9


def test_constant_profile_coefficients():
    pair = bogoliubov(make_constant(2.5))
    assert abs(abs(pair.alpha) - 1) < 1e-12 and abs(pair.beta) < 1e-9


def test_constant_propagator_composes():
    c1, s1, w1 = constant_propagator(2.0, 0.3)
    c2, s2, w2 = constant_propagator(2.0, 0.4)
    c, s, w = constant_propagator(2.0, 0.7)
    m = np.array([[c2, s2], [-w2, c2]]) @ np.array([[c1, s1], [-w1, c1]])
    assert np.allclose(m, [[c, s], [-w, c]], atol=1e-15)


@pytest.mark.parametrize("w2", [-1.5, 0.0])
def test_constant_propagator_nonpositive(w2):
    c, s, w = constant_propagator(w2, 0.8)
    assert c * c + s * w == pytest.approx(1.0, abs=1e-14)


class TestSuddenJump:
    def test_frozen_value(self):
        pair = bogoliubov(make_step(1.0, 16.0))
        assert pair.occupation == pytest.approx(0.5625000000000002, abs=1e-12)

    def test_matches_oracle(self):
        pair = bogoliubov(make_step(1.0, 16.0))
        assert abs(pair.occupation - sudden_jump_oracle(1.0, 4.0).occupation) < 1e-8

    def test_oracle_symmetric(self):
        assert sudden_jump_oracle(4.0, 1.0).occupation == pytest.approx(9 / 16, rel=1e-15)
        assert sudden_jump_oracle(2.0, 2.0).beta == 0

    def test_continuity_across_jump(self):
        sol = integrate_mode(make_step(1.0, 16.0))
        i = np.searchsorted(sol.grid, 0.0)
        assert sol.grid[i] == 0.0
        q0, qd0 = in_mode(1.0, 0.0)
        assert abs(sol.q[i] - q0) < 1e-12 and abs(sol.qdot[i] - qd0) < 1e-12

    def test_phases_match_oracle_at_zero(self):
        pair = bogoliubov(make_step(1.0, 16.0))
        ref = sudden_jump_oracle(1.0, 4.0)
        assert abs(pair.alpha - ref.alpha) < 1e-9 and abs(pair.beta - ref.beta) < 1e-9

    @given(st.floats(0.2, 5.0), st.floats(0.2, 5.0))
    def test_random_jumps(self, w0, w1):
        pair = bogoliubov(make_step(w0 * w0, w1 * w1, pad=0.5))
        assert abs(pair.occupation - sudden_jump_oracle(w0, w1).occupation) < 1e-8


class TestSech2:
    def test_frozen_value(self):
        pair = bogoliubov(make_sech2(1.0, 3.0, 1.0))
        assert pair.occupation == pytest.approx(0.004969340333581763, rel=1e-8)

    @pytest.mark.parametrize("A,w0", [(3.0, 1.0), (-0.5, 0.7), (1.0, 1.5)])
    def test_closed_form(self, A, w0):
        pair = bogoliubov(make_sech2(w0 * w0, A, 1.0))
        assert pair.occupation == pytest.approx(sech2_occupation(A, w0), rel=1e-7)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_poschl_teller_no_beats(self, n):
        sol = integrate_mode(make_sech2(1.0, n * (n + 1), 1.0))
        tail = np.abs(sol.q[sol.grid > 16.0])
        assert np.max(np.abs(tail - 1 / math.sqrt(2))) < 1e-8


def test_wronskian_conserved_on_soft_step():
    sol = integrate_mode(make_tanh_step(1.0, 4.0, 0.0, 0.5))
    assert sol.wronskian_drift < 1e-9
    assert np.allclose(wronskian(sol.q, sol.qdot), 1j, atol=1e-9)


def test_loose_tolerance_trips_wronskian_guard():
    with pytest.raises(WronskianError):
        integrate_mode(make_tanh_step(1.0, 4.0, 0.0, 0.5), StepPolicy(rtol=1e-3, atol=1e-3, wronskian_tol=1e-12))


def test_normalization_guard():
    sol = integrate_mode(make_constant(1.0))
    broken = type(sol)(sol.grid, 2 * sol.q, 2 * sol.qdot, sol.wronskian_residual, sol.wronskian_drift)
    with pytest.raises(NormalizationError):
        extract_bogoliubov(broken, make_constant(1.0))


def test_refinement_convergence():
    p = make_tanh_step(1.0, 4.0, 0.0, 0.5)
    b1 = bogoliubov(p, StepPolicy(rtol=1e-9, atol=1e-11)).occupation
    b2 = bogoliubov(p, StepPolicy(rtol=1e-10, atol=1e-12)).occupation
    b3 = bogoliubov(p, DEFAULT_POLICY).occupation
    assert abs(b2 - b1) < 1e-9 and abs(b3 - b2) < 1e-10


@given(st.floats(0.3, 6.0), st.floats(0.3, 6.0), st.floats(0.2, 2.0))
def test_time_reversal_invariance(lo, hi, width):
    p = make_tanh_step(lo, hi, 0.0, width)
    assert abs(bogoliubov(p).occupation - bogoliubov(p.reversed()).occupation) < 1e-8


def test_nonpositive_interior_is_integrated():
    segs = [constant_segment(-1, 0, 1.0), constant_segment(0, 0.5, -1.0), constant_segment(0.5, 1.5, 1.0)]
    pair = bogoliubov(make_piecewise(segs))
    assert abs(pair.norm_defect) < 1e-10 and pair.occupation > 0


def test_derived_fields():
    pair = BogoliubovPair(complex(1.25), complex(0.75))
    assert pair.persistence == pytest.approx(0.8)
    assert math.sinh(pair.squeeze_r) ** 2 == pytest.approx(pair.occupation, rel=1e-15)
    assert pair.norm_defect == 0.0


def test_propagate_rejects_reversed_interval():
    with pytest.raises(ValueError):
        propagate(make_constant(1.0), 1.0, 0.0, 1, 0)


def test_csv_export(tmp_path):
    sol = integrate_mode(make_step(1.0, 4.0))
    sol.to_csv(tmp_path / "m.csv")
    with open(tmp_path / "m.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "re_q", "im_q", "re_qdot", "im_qdot", "wronskian_residual"]
    assert len(rows) == sol.grid.size + 1
    assert float(rows[1][1]) == sol.q[0].real
