"""Parameter validation and the derived refinement ladders."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from branchlam.params import ParamError, make_params


class TestAdmissibility:
    def test_defaults_build(self):
        p = make_params(0.4, 1.0 / 8, 1.0 / 64)
        assert p.j0 >= 1

    @pytest.mark.parametrize("theta", [0.2, 0.25, 0.5, 0.7])
    def test_theta_rejected(self, theta):
        with pytest.raises(ParamError, match="theta"):
            make_params(theta, 1.0 / 8, 1.0 / 64)

    def test_r_too_large(self):
        with pytest.raises(ParamError, match="r must"):
            make_params(0.4, 0.5, 0.01)

    def test_r_not_dyadic(self):
        with pytest.raises(ParamError, match="power of two"):
            make_params(0.4, 1.0 / 6, 0.01)

    def test_r2_range(self):
        with pytest.raises(ParamError, match="r2"):
            make_params(0.4, 1.0 / 8, 1.0 / 8)
        with pytest.raises(ParamError, match="r2"):
            make_params(0.4, 1.0 / 8, 0.0)


class TestLadders:
    def test_stopping_index(self):
        # direct ladder enumeration: L_3 = 0.015625 < H_3 = 0.0192 while
        # L_4 = 0.0078125 > H_4 = 0.00768
        p = make_params(0.4, 1.0 / 8, 1.0 / 64)
        assert p.j0 == 3

    def test_ladder_values(self):
        p = make_params(0.4, 1.0 / 8, 1.0 / 64)
        assert p.Ls[0] == 0.125
        assert abs(p.Ys[1] - 0.3) < 1e-15
        assert abs(p.Hs[0] - 0.3) < 1e-15
        for j in range(p.j0 + 1):
            assert p.Ls[j] == p.r / 2**j
            assert abs(p.Ys[j] - 0.5 * (1 - 0.4**j)) < 1e-15
            assert abs(p.Hs[j] - 0.5 * 0.4**j * 0.6) < 1e-15

    def test_strictly_decreasing(self):
        p = make_params(0.4, 1.0 / 8, 1.0 / 64)
        assert np.all(np.diff(p.Ls) < 0)
        assert np.all(np.diff(p.Hs) < 0)
        for j in range(p.j0 + 1):
            lad = p.ladder(j)
            assert np.all(lad.ells > 0)
            assert np.all(np.diff(lad.ells) < 0)
            if lad.i0 >= 0:
                assert np.all(lad.hs > 0)

    def test_strip_heights_match_ladder(self):
        p = make_params(0.4, 1.0 / 8, 1.0 / 64)
        for j in range(p.j0 + 1):
            assert abs((p.Ys[j + 1] - p.Ys[j]) - p.Hs[j]) < 1e-15

    def test_snapping_integrality(self):
        p = make_params(0.4, 1.0 / 8, 1.0 / 64)
        for j in range(p.j0 + 1):
            lad = p.ladder(j)
            ratio = 2**j * p.Hs[j] / lad.r2_snapped
            assert abs(ratio - round(ratio)) < 1e-9
            assert lad.r2_snapped <= p.r2 + 1e-15
            assert abs(lad.ell0 * lad.n_slices - p.Hs[j]) < 1e-15

    def test_second_order_ladder_formulas(self):
        p = make_params(0.4, 1.0 / 8, 1.0 / 256)
        for j in range(p.j0 + 1):
            lad = p.ladder(j)
            L = p.Ls[j]
            for i in range(lad.i0 + 1):
                assert abs(lad.ells[i] - lad.r2_snapped / (2**j * 2**i)) < 1e-18
                assert abs(lad.ys[i] - (L / 8) * (2 - 0.4**i)) < 1e-15
                assert abs(lad.hs[i] - (L / 8) * 0.6 * 0.4**i) < 1e-15
                sig = lad.ells[i] / (3 * lad.hs[i]) + 1 / np.sqrt(3)
                assert abs(lad.sigmas[i] - sig) < 1e-12
            # stopping rule: widths no longer fit below the heights
            if lad.i0 >= 0:
                assert lad.ells[lad.i0] <= lad.hs[lad.i0]
            nxt = lad.ells[lad.i0] / 2 if lad.i0 >= 0 else lad.ell0
            h_next = (L / 8) * 0.6 * 0.4 ** (lad.i0 + 1)
            assert nxt > h_next

    def test_corner_ladders(self):
        p = make_params(0.4, 1.0 / 8, 1.0 / 256)
        lad = p.ladder(0)
        ca = lad.corner_a
        assert abs(ca.q - (1 - 4 * np.sqrt(3) * lad.ell0 / p.Ls[0])) < 1e-14
        for m in range(max(ca.m0 + 1, 2)):
            assert abs(ca.rho(m) - ca.rho0 * ca.q**m) < 1e-18
            assert abs(ca.w(m) - (p.Ls[0] / 4) * ca.q ** (m + 1)) < 1e-15
        cb = lad.corner_b
        assert abs(cb.q - (1 - lad.ell0 / p.Hs[0])) < 1e-14

    def test_copies_counts(self):
        p = make_params(0.4, 1.0 / 8, 1.0 / 64)
        for j in range(p.j0 + 2):
            assert p.copies(j) == 2**j * 8

    def test_caps(self):
        p = make_params(0.4, 1.0 / 8, 1.0 / 64, max_level1=0, max_level2=-1)
        assert p.j_last == 0
        assert len(p.second) == 1
        assert p.ladder(0).i0 == -1
