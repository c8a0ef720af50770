import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unexciting.errors import InputError
from unexciting.modes import bogoliubov
from unexciting.profiles import (PotentialProfile, constant_segment, dualize, make_constant, make_sech2,
                                 make_square_well, make_tanh_step)
from unexciting.scattering import (DEFAULT_SLABS, SymmetricWellSpec, duality_check, golden_max, resonance_scan,
                                   symmetric_well_width, transfer_matrix_rt, write_scan_csv, zeta_of_gamma,
                                   zeta_sweep)

FREE = PotentialProfile((constant_segment(-1.0, 1.0, 0.0),))
SQUARE = make_square_well(3.0, math.pi / 2)
SECH_FLANK = dualize(make_sech2(1.0, 1.5, 1.0, center=-6.0), 1.0)


def square_well_T(V0, a, E):
    """Textbook transmission through a well of depth V0 and full width 2a."""
    return 1.0 / (1.0 + (V0 ** 2 * math.sin(2 * math.sqrt(E + V0) * a) ** 2) / (4 * E * (E + V0)))


class TestTransferMatrix:
    def test_free_space(self):
        res = transfer_matrix_rt(FREE, 2.0)
        assert res.T == pytest.approx(1.0, abs=1e-15) and res.R < 1e-30
        assert abs(res.t_amp - 1.0) < 1e-14

    @pytest.mark.parametrize("E", [0.3, 1.7, 5.0, 11.0])
    def test_square_well_closed_form(self, E):
        assert transfer_matrix_rt(SQUARE, E).T == pytest.approx(square_well_T(3.0, math.pi / 2, E), abs=1e-13)

    @pytest.mark.parametrize("E", [1.0, 6.0, 13.0])
    def test_square_well_resonances(self, E):
        assert transfer_matrix_rt(SQUARE, E).T >= 1 - 1e-12

    @pytest.mark.parametrize("E", [0.2, 1.0, 4.0])
    def test_poschl_teller_reflectionless(self, E):
        v = dualize(make_sech2(1.0, 2.0, 1.0), 1.0)
        assert transfer_matrix_rt(v, E).R < 1e-12

    def test_step_uses_two_wavenumbers(self):
        v = PotentialProfile((constant_segment(-1.0, 1.0, 0.0),), 0.0, 1.0)
        res = transfer_matrix_rt(v, 2.0)
        k1, k2 = math.sqrt(2.0), 1.0
        assert res.R == pytest.approx(((k1 - k2) / (k1 + k2)) ** 2, rel=1e-12)
        assert res.R + res.T == pytest.approx(1.0, abs=1e-14)

    def test_below_asymptote_rejected(self):
        v = PotentialProfile((constant_segment(-1.0, 1.0, 0.0),), 0.0, 3.0)
        with pytest.raises(InputError):
            transfer_matrix_rt(v, 2.0)

    def test_tall_barrier_does_not_overflow(self):
        v = PotentialProfile((constant_segment(-20.0, 20.0, 50.0),))
        res = transfer_matrix_rt(v, 1.0)
        assert 0 <= res.T < 1e-100 and res.R == pytest.approx(1.0)

    @given(st.floats(0.05, 20.0), st.floats(-3.0, 3.0), st.floats(0.3, 3.0))
    def test_unitarity(self, E, amp, kappa):
        v = dualize(make_sech2(1.0, amp, kappa), 1.0)
        res = transfer_matrix_rt(v, E)
        assert abs(res.unitarity_defect) < 1e-8

    def test_mirror_symmetry_of_T(self):
        v = dualize(make_tanh_step(1.0, 3.0, 0.0, 0.4), 3.0)
        a, b = transfer_matrix_rt(v, 3.5), transfer_matrix_rt(v.mirrored(), 3.5)
        assert a.T == pytest.approx(b.T, rel=1e-9)

    def test_scan_csv_columns(self):
        buf = io.StringIO()
        write_scan_csv([transfer_matrix_rt(SQUARE, 1.0)], stream=buf)
        header, row = buf.getvalue().strip().splitlines()
        assert header == "E,R,T,r_re,r_im,t_re,t_im"
        assert len(row.split(",")) == 7


class TestResonances:
    def test_square_well_scan(self):
        scan = resonance_scan(SQUARE, (0.5, 14.0), 60)
        assert not scan.all_pass
        assert np.allclose(scan.energies, [1.0, 6.0, 13.0], atol=1e-6)

    def test_refined_consistency(self):
        scan = resonance_scan(SQUARE, (0.5, 14.0), 60)
        fine = DEFAULT_SLABS.refined(4)
        assert all(transfer_matrix_rt(SQUARE, E, fine).T >= 1 - 1e-6 for E in scan.energies)

    def test_free_space_all_pass(self):
        assert resonance_scan(FREE, (0.5, 5.0), 12).all_pass

    def test_poschl_teller_all_pass(self):
        v = dualize(make_sech2(1.0, 6.0, 1.0), 1.0)
        assert resonance_scan(v, (0.1, 5.0), 15).all_pass

    def test_golden_max(self):
        x, fx = golden_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, xtol=1e-12)
        assert x == pytest.approx(0.3, abs=1e-9) and fx <= 0


class TestSymmetricWell:
    def test_flat_flank_zeta_zero(self):
        spec = SymmetricWellSpec(FREE, 3.0, 1.0, a=1.0)
        assert zeta_of_gamma(spec) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("n,a", [(2, math.pi / 2), (4, math.pi)])
    def test_flat_flank_width(self, n, a):
        assert symmetric_well_width(SymmetricWellSpec(FREE, 3.0, 1.0), n) == pytest.approx(a, abs=1e-12)

    @pytest.mark.parametrize("E,n", [(6.0, 3), (13.0, 4)])
    def test_flat_flank_reproduces_square_well(self, E, n):
        assert symmetric_well_width(SymmetricWellSpec(FREE, 3.0, E), n) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_sech_flank_shifts_width(self):
        spec = SymmetricWellSpec(SECH_FLANK, 3.0, 0.5)
        a = symmetric_well_width(spec, 2)
        z = zeta_of_gamma(spec.with_a(a))
        assert abs(z) > 1e-3
        assert a == pytest.approx((math.pi + z / 4) / spec.gamma, abs=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_sech_flank_transmits(self, n):
        spec = SymmetricWellSpec(SECH_FLANK, 3.0, 0.5)
        a = symmetric_well_width(spec, n)
        assert transfer_matrix_rt(spec.with_a(a).potential(), 0.5).T >= 1 - 1e-6

    def test_potential_assembly(self):
        spec = SymmetricWellSpec(SECH_FLANK, 3.0, 0.5, a=1.2)
        v = spec.potential()
        xs = np.array([-4.0, -2.0, 2.0, 4.0])
        assert np.allclose(v(xs), np.concatenate([SECH_FLANK(xs[:2]), SECH_FLANK(-xs[2:])]), atol=1e-15)
        assert v(0.3) == -3.0

    def test_zeta_vanishes_at_high_energy(self):
        spec = SymmetricWellSpec(SECH_FLANK, 3.0, 1.0, a=1.0)
        z = zeta_sweep(spec, [50.0, 200.0, 800.0])
        assert abs(z[-1]) < abs(z[0]) and abs(z[-1]) < 1e-2

    def test_requires_width(self):
        with pytest.raises(InputError):
            zeta_of_gamma(SymmetricWellSpec(FREE, 3.0, 1.0))

    def test_flank_must_vanish_left(self):
        with pytest.raises(InputError):
            SymmetricWellSpec(PotentialProfile((constant_segment(0, 1, 0.0),), 1.0, 0.0), 3.0, 1.0)


class TestDuality:
    def test_constant(self):
        rep = duality_check(make_constant(1.0))
        assert rep.beta_sq < 1e-25 and rep.R < 1e-25

    @pytest.mark.parametrize("A,w2", [(3.0, 0.5), (3.0, 1.0), (3.0, 2.0), (-0.5, 1.0)])
    def test_sech_bump(self, A, w2):
        rep = duality_check(make_sech2(w2, A, 1.0))
        assert rep.relative < 1e-6
        assert abs(rep.R + rep.T - 1) < 1e-8

    def test_frozen_sech_bump(self):
        assert duality_check(make_sech2(1.0, 3.0, 1.0)).R_over_T == pytest.approx(0.004969340333581763, rel=1e-7)

    def test_alpha_is_inverse_transmission(self):
        p = make_sech2(1.0, 3.0, 1.0)
        rep = duality_check(p)
        assert abs(bogoliubov(p).alpha) ** 2 == pytest.approx(1 / rep.T, rel=1e-9)

    def test_unequal_plateaus_rejected(self):
        with pytest.raises(InputError):
            duality_check(make_tanh_step(1.0, 2.0))
