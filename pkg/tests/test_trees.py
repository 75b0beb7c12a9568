"""Continuity and tiling of the generic branching tree machinery."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import branchlam.wells as W
from branchlam.polygons import SegmentSet, point_in_convex, poly_area
from branchlam.trees import (A_INNER, A_OUTER, B_INNER, B_OUTER, LAM_INNER,
                             LAM_OUTER, branch_cells, branch_zone,
                             cutoff_cells, double_tree, sawtooth_value,
                             trunk_cells)


def profile_at(cells, s, t):
    for pc in cells:
        if point_in_convex(pc.poly, (s, t), 1e-12):
            return pc.alpha * s + pc.beta * t + pc.gamma
    return None


def total_area(cells):
    return sum(abs(poly_area(pc.poly)) for pc in cells)


def check_pairwise_continuity(cells, rng, n=400):
    """Sample straddling points near random interior locations."""
    worst = 0.0
    all_pts = np.concatenate([pc.poly for pc in cells])
    lo = all_pts.min(axis=0)
    hi = all_pts.max(axis=0)
    for _ in range(n):
        p = lo + rng.random(2) * (hi - lo)
        vals = [pc.alpha * p[0] + pc.beta * p[1] + pc.gamma
                for pc in cells if point_in_convex(pc.poly, p, 1e-12)]
        if len(vals) > 1:
            worst = max(worst, max(vals) - min(vals))
    return worst


class TestBranchCells:
    @pytest.mark.parametrize("a,b,lam", [(A_INNER, B_INNER, LAM_INNER),
                                         (A_OUTER, B_OUTER, LAM_OUTER)])
    @pytest.mark.parametrize("flip", [1.0, -1.0])
    def test_tiles_and_continuous(self, a, b, lam, flip):
        ell, t0, h = 0.3, 0.1, 0.07 * flip
        cells = branch_cells(0.05, ell, t0, t0 + h, a, b, lam, level=0)
        assert len(cells) == 4
        assert abs(total_area(cells) - ell * abs(h)) < 1e-14
        rng = np.random.default_rng(5)
        assert check_pairwise_continuity(cells, rng) < 1e-10

    def test_base_and_split_profiles(self):
        a, b, lam = A_INNER, B_INNER, LAM_INNER
        ell, t0, t1 = 0.2, 0.0, 0.1
        cells = branch_cells(0.0, ell, t0, t1, a, b, lam, level=0)
        for s in np.linspace(1e-9, ell - 1e-9, 23):
            v = profile_at(cells, s, t0 + 1e-12)
            assert v is not None
            assert abs(v - sawtooth_value(a, b, lam, ell, s)) < 1e-10
            v = profile_at(cells, s, t1 - 1e-12)
            assert abs(v - sawtooth_value(a, b, lam, ell / 2, s % (ell / 2))) < 1e-10

    def test_lateral_edges_vanish(self):
        cells = branch_cells(0.0, 0.2, 0.0, 0.1, A_INNER, B_INNER, LAM_INNER, 0)
        for t in np.linspace(0.001, 0.099, 7):
            assert abs(profile_at(cells, 1e-13, t)) < 1e-11
            assert abs(profile_at(cells, 0.2 - 1e-13, t)) < 1e-9


class TestCutoffCells:
    @pytest.mark.parametrize("t_zero", [0.25, -0.05])
    def test_tiles_continuous_and_vanishes(self, t_zero):
        a, b, lam = A_INNER, B_INNER, LAM_INNER
        ell, t_saw = 0.12, 0.1
        cells = cutoff_cells(0.0, ell, t_saw, t_zero, a, b, lam, 0)
        assert abs(total_area(cells) - ell * abs(t_zero - t_saw)) < 1e-15
        rng = np.random.default_rng(7)
        assert check_pairwise_continuity(cells, rng) < 1e-10
        for s in np.linspace(1e-9, ell - 1e-9, 17):
            v_saw = profile_at(cells, s, t_saw + 1e-12 * np.sign(t_zero - t_saw))
            assert abs(v_saw - sawtooth_value(a, b, lam, ell, s)) < 1e-9
            v_zero = profile_at(cells, s, t_zero - 1e-12 * np.sign(t_zero - t_saw))
            assert abs(v_zero) < 1e-9


class TestBranchZone:
    def test_outer_ladder_matches_parameters(self):
        # first-order zone over the half domain: generations at Y_j of
        # height H_j, widths L_j
        theta, r = 0.4, 1.0 / 8
        cells = branch_zone(0.0, r, 0.0, 0.5, theta, A_OUTER, B_OUTER,
                            LAM_OUTER, strict=True)
        levels = sorted({pc.level for pc in cells})
        js = [j for j in levels]
        assert js[0] == 0 and js[-1] == 4  # j0 = 3 plus the cut-off level
        assert abs(total_area(cells) - r * 0.5) < 1e-13

    def test_zone_continuity_and_edges(self):
        theta = 0.4
        cells = branch_zone(0.0, 0.01, 0.1, 0.15, theta, A_INNER, B_INNER,
                            LAM_INNER)
        rng = np.random.default_rng(13)
        assert check_pairwise_continuity(cells, rng, 800) < 1e-10
        assert abs(total_area(cells) - 0.01 * 0.05) < 1e-15
        for s in np.linspace(1e-9, 0.01 - 1e-9, 11):
            assert abs(profile_at(cells, s, 0.15 - 1e-12)) < 1e-8

    def test_downward_zone(self):
        cells = branch_zone(0.0, 0.01, 0.15, 0.1, 0.4, A_INNER, B_INNER,
                            LAM_INNER)
        assert abs(total_area(cells) - 0.01 * 0.05) < 1e-15
        for s in np.linspace(1e-9, 0.01 - 1e-9, 11):
            assert abs(profile_at(cells, s, 0.1 + 1e-12)) < 1e-8


class TestDoubleTree:
    def test_covers_and_vanishes_both_ends(self):
        cells = double_tree(0.0, 0.008, 0.0, 0.03125, 0.4)
        assert abs(total_area(cells) - 0.008 * 0.03125) < 1e-15
        rng = np.random.default_rng(17)
        assert check_pairwise_continuity(cells, rng, 800) < 1e-10
        for s in np.linspace(1e-9, 0.008 - 1e-9, 9):
            assert abs(profile_at(cells, s, 1e-12)) < 1e-9
            assert abs(profile_at(cells, s, 0.03125 - 1e-12)) < 1e-9
        for t in np.linspace(0.001, 0.031, 11):
            assert abs(profile_at(cells, 1e-13, t)) < 1e-10
            assert abs(profile_at(cells, 0.008 - 1e-13, t)) < 1e-8
