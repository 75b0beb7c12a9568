"""Exact algebra of wells, twin normals and construction gradients."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import branchlam.wells as W

TOL = 1e-12


def frob(m):
    return float(np.linalg.norm(m))


class TestWells:
    def test_well_values(self):
        e1, e2, e3 = W.wells()
        assert_allclose(e1, np.diag([-2.0, 1.0, 1.0]))
        assert_allclose(e2, np.diag([1.0, -2.0, 1.0]))
        assert_allclose(e3, np.diag([1.0, 1.0, -2.0]))

    def test_trace_free(self):
        for e in W.wells():
            assert abs(np.trace(e)) == 0.0

    def test_wells_sum_to_zero(self):
        assert frob(sum(W.wells())) == 0.0


class TestNormals:
    def test_values(self):
        nt = W.normal_table()
        s2 = np.sqrt(2.0)
        assert_allclose(nt.normal(1, 2), np.array([1, 1, 0]) / s2)
        assert_allclose(nt.normal(3, 2), np.array([0, -1, 1]) / s2)
        assert_allclose(nt.normal(2, 1), np.array([-1, 1, 0]) / s2)

    def test_unit_and_twin_orthogonality(self):
        nt = W.normal_table()
        for (i, j), b in nt.entries.items():
            assert abs(np.linalg.norm(b) - 1.0) < TOL
        assert abs(nt.normal(1, 2) @ nt.normal(2, 1)) < TOL

    def test_sets(self):
        nt = W.normal_table()
        b1 = nt.variant_set(1)
        assert len(b1) == 4
        stack = np.array(b1)
        for b in (W.B12, W.B21, W.B13, W.B31):
            assert np.min(np.max(np.abs(stack - b), axis=1)) < TOL


class TestTwinIdentity:
    @pytest.mark.parametrize("i,j", [(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)])
    def test_all_pairs(self, i, j):
        lhs, rhs = W.twin_identity(i, j)
        assert frob(lhs - rhs) < TOL

    def test_explicit_12(self):
        lhs, rhs = W.twin_identity(1, 2)
        assert_allclose(lhs, np.diag([-3.0, 3.0, 0.0]), atol=TOL)
        # outer-product oracle computed independently
        oracle = 3.0 * (np.outer(W.B12, W.B21) + np.outer(W.B21, W.B12))
        assert_allclose(rhs, oracle, atol=TOL)

    def test_antisymmetry(self):
        _, rhs_12 = W.twin_identity(1, 2)
        _, rhs_21 = W.twin_identity(2, 1)
        assert frob(rhs_12 + rhs_21) < TOL

    def test_bad_indices(self):
        with pytest.raises(ValueError):
            W.twin_identity(1, 1)


class TestFrame:
    def test_orthonormal(self):
        fr = W.frame()
        m = fr.matrix
        assert frob(m @ m.T - np.eye(3)) < 1e-14

    def test_exact_axes(self):
        fr = W.frame()
        assert_allclose(fr.n, np.array([-2, 1, 1]) / np.sqrt(6))
        assert_allclose(fr.d, np.array([1, 1, 1]) / np.sqrt(3))
        assert_allclose(fr.b32, np.array([0, -1, 1]) / np.sqrt(2))

    def test_d_orthogonal_to_lamination_directions(self):
        fr = W.frame()
        for b in (W.B21, W.B13, W.B32):
            assert abs(fr.d @ b) < TOL

    def test_roundtrip(self):
        fr = W.frame()
        rng = np.random.default_rng(3)
        x = rng.normal(size=(10, 3))
        assert_allclose(fr.to_standard(fr.to_frame(x)), x, atol=1e-14)


class TestConstructionGradients:
    def test_paper_values(self):
        g = W.construction_gradients()
        assert_allclose(g.A1, np.array([[-2, 2, 0], [-2, 1, 1], [0, -1, 1]], float))
        assert_allclose(g.B3, np.array([[1, 0, -1], [0, 1, -1], [1, 1, -2]], float))

    def test_strains(self):
        g = W.construction_gradients()
        assert frob(W.sym(g.A1) - W.E1) < TOL
        assert frob(W.sym(g.A2) - W.E2) < TOL
        assert frob(W.sym(g.B1) - W.E1) < TOL
        assert frob(W.sym(g.B3) - W.E3) < TOL
        assert frob(W.sym(g.A) - W.EA) < TOL
        assert frob(W.sym(g.B) - W.EB) < TOL
        assert_allclose(W.sym(g.A), np.diag([0.0, -1.0, 1.0]), atol=TOL)

    def test_rank_one_relations(self):
        g = W.construction_gradients()
        assert frob(g.A1 - g.A2 - 6.0 * np.outer(W.B12, W.B21)) < TOL
        assert frob(g.B1 - g.B3 + 6.0 * np.outer(W.B31, W.B13)) < TOL
        assert frob(g.A - g.B - 4.0 * np.outer(W.B23, W.B32)) < TOL
        expected = np.array([[-3, 3, 0], [-3, 3, 0], [0, 0, 0]], float)
        assert_allclose(g.A1 - g.A2, expected, atol=TOL)

    def test_convex_mixes(self):
        g = W.construction_gradients()
        assert frob(g.A - (g.A1 + 2.0 * g.A2) / 3.0) < TOL
        assert frob(g.B - (g.B1 + 2.0 * g.B3) / 3.0) < TOL

    def test_d_annihilated(self):
        g = W.construction_gradients()
        d = W.D_AXIS
        for m in (g.A1, g.A2, g.A, g.B1, g.B3, g.B):
            assert np.max(np.abs(m @ d)) < TOL


class TestEdgeDatumGradients:
    def test_values(self):
        C, C2, C3 = W.edge_datum_gradients()
        assert_allclose(C, np.diag([1.0, -0.5, -0.5]))
        assert frob(W.sym(C2) - W.E2) < TOL
        assert frob(W.sym(C3) - W.E3) < TOL
        assert_allclose(W.sym(C2), np.diag([1.0, -2.0, 1.0]), atol=TOL)
        assert_allclose(W.sym(C2) - W.sym(C3), np.diag([0.0, -3.0, 3.0]), atol=TOL)

    def test_mix_recovers_datum(self):
        C, C2, C3 = W.edge_datum_gradients()
        assert frob(0.5 * (W.sym(C2) + W.sym(C3)) - C) < TOL


class TestClassify:
    def test_austenite_is_second_order(self):
        res = W.classify(np.zeros((3, 3)))
        assert res.tag == "second_order"
        assert_allclose(res.lam, np.full(3, 1.0 / 3.0), atol=1e-14)

    def test_edge_midpoint_first_order(self):
        res = W.classify(0.5 * (W.E2 + W.E3))
        assert res.tag == "first_order"

    def test_wells(self):
        for k, e in enumerate(W.wells(), start=1):
            res = W.classify(e)
            assert res.tag == "well" and res.well == k

    def test_outside(self):
        assert W.classify(np.diag([3.0, -1.0, -2.0])).tag == "outside"
        assert W.classify(np.diag([1.0, 1.0, 1.0])).tag == "outside"
        m = np.zeros((3, 3))
        m[0, 1] = m[1, 0] = 0.5
        assert W.classify(m).tag == "outside"

    def test_permutation_invariance(self):
        rng = np.random.default_rng(11)
        es = list(W.wells())
        for _ in range(50):
            lam = rng.dirichlet(np.ones(3))
            F = sum(l * e for l, e in zip(lam, es))
            tag0 = W.classify(F).tag
            perm = rng.permutation(3)
            Fp = sum(lam[p] * es[k] for k, p in enumerate(perm))
            assert W.classify(Fp).tag == tag0

    def test_componentwise_edge_vanishing(self):
        # on the open (i, j) edge the component where both wells agree
        # matches the datum exactly; in the interior no component does
        F = 0.25 * W.E2 + 0.75 * W.E3
        gaps = [min(abs(e[k, k] - F[k, k]) for e in W.wells()) for k in range(3)]
        assert min(gaps) < 1e-15
        F0 = np.zeros((3, 3))
        gaps0 = [min(abs(e[k, k] - F0[k, k]) for e in W.wells()) for k in range(3)]
        assert min(gaps0) > 0.9
