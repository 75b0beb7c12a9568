"""Generic branched-laminate trees on two-dimensional slabs.

Every displacement field of the constructions has, per region, the form

    u(x) = u_aux(x) + phi(s, t) * e_osc

with an affine background ``u_aux``, a fixed oscillation direction
``e_osc`` and a continuous, piecewise-affine scalar profile ``phi`` in
sheared slab coordinates ``(s, t)``.  ``s`` counts across the laminate
(interfaces are s = const lines), ``t`` is the refinement direction.  The
profile is a sawtooth of period ``ell`` whose period halves generation by
generation; each halving happens inside a four-cell branch unit whose
pieces stay rank-one compatible because ``phi`` is continuous.

A :class:`Chart` fixes the frame<->slab transformation, the oscillation
vector and the two wells of the pair; the tree emitters below produce
profile cells that the chart materializes into world cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polygons import chord, clip_band, clip_halfplane, ensure_ccw, poly_area
from .wells import outer

SQ3 = np.sqrt(3.0)

# Slopes of the inner (second-level) sawtooth: volume fraction 1/3 of the
# rising well, peak continuity forces the 2:1 slope ratio.
A_INNER, B_INNER, LAM_INNER = 2.0 * SQ3, SQ3, 1.0 / 3.0
# Outer laminate: equal fractions, slopes +-2.
A_OUTER, B_OUTER, LAM_OUTER = 2.0, 2.0, 0.5

# A band is treed only when its slab is at least this tall relative to the
# laminate width; below that the leftover path (affine background with the
# majority phase) is cheaper and keeps gradients bounded.
TREE_MIN_ASPECT = 0.25
# Slices narrower than this fraction of the base width become leftovers.
MIN_SLICE_FRAC = 0.02
MAX_GENERATIONS = 40


@dataclass
class ProfileCell:
    """Polygon in slab coordinates with an affine profile alpha*s+beta*t+gamma."""

    poly: np.ndarray
    alpha: float
    beta: float
    gamma: float
    up: bool       # carries the up-well of the pair
    role: str      # band | shear | trunk | cutoff | leftover
    level: int = 0

    def __post_init__(self):
        self.poly = ensure_ccw(np.asarray(self.poly, float))


@dataclass
class Chart:
    """Affine slab chart plus the displacement data of one region."""

    st_to_frame_mat: np.ndarray  # 2x2, columns are d(frame)/ds, d(frame)/dt
    st_origin: np.ndarray        # frame point of (s, t) = (0, 0)
    grad_s: np.ndarray           # spatial gradient of s(x), standard coords
    grad_t: np.ndarray
    e_osc: np.ndarray
    g_aux: np.ndarray
    c_aux: np.ndarray
    phase_up: int
    phase_down: int
    a: float                     # rising slope of the sawtooth
    b: float                     # falling slope
    lam: float                   # volume fraction of the up well

    def to_frame(self, poly_st: np.ndarray) -> np.ndarray:
        return np.asarray(poly_st, float) @ self.st_to_frame_mat.T + self.st_origin

    _inv: np.ndarray | None = None

    def inv_mat(self) -> np.ndarray:
        if self._inv is None:
            self._inv = np.linalg.inv(self.st_to_frame_mat)
        return self._inv

    def to_st(self, poly_fr: np.ndarray) -> np.ndarray:
        return (np.asarray(poly_fr, float) - self.st_origin) @ self.inv_mat().T

    def materialize(self, pc: ProfileCell, j: int, side: int, region: str):
        from .microstructure import Cell  # local import to avoid a cycle

        poly = ensure_ccw(self.to_frame(pc.poly))
        G = self.g_aux + outer(self.e_osc,
                               pc.alpha * self.grad_s + pc.beta * self.grad_t)
        # slab coordinates are affine in x: (s, t)(x) = K z(x) - K origin,
        # so the anchor offset enters the constant part of the profile
        off = self.inv_mat() @ self.st_origin
        gamma = pc.gamma - pc.alpha * off[0] - pc.beta * off[1]
        c = self.c_aux + gamma * self.e_osc
        phase = self.phase_up if pc.up else self.phase_down
        return Cell(poly=poly, G=G, c=c, phase=phase, j=j, side=side,
                    region=region, role=pc.role, level=pc.level)


def sawtooth_value(a: float, b: float, lam: float, ell: float, s: float) -> float:
    s = s % ell if ell > 0 else 0.0
    return a * s if s <= lam * ell else b * (ell - s)


# --- Elementary emitters (slab-local coordinates) --------------------------

def trunk_cells(s0, ell, t0, t1, a, b, lam, level=0) -> list[ProfileCell]:
    """Straight laminate band: one sawtooth period, constant in t."""
    sm = s0 + lam * ell
    se = s0 + ell
    return [
        ProfileCell(np.array([[s0, t0], [sm, t0], [sm, t1], [s0, t1]]),
                    a, 0.0, -a * s0, True, "trunk", level),
        ProfileCell(np.array([[sm, t0], [se, t0], [se, t1], [sm, t1]]),
                    -b, 0.0, b * se, False, "trunk", level),
    ]


def branch_cells(s0, ell, t_base, t_split, a, b, lam, level) -> list[ProfileCell]:
    """Four-cell unit halving the sawtooth period from t_base to t_split.

    Works for either refinement direction (t_split above or below t_base).
    """
    h = t_split - t_base  # signed
    w2 = 0.5 * (1.0 - lam) * ell
    s1 = s0 + 0.5 * lam * ell
    s2 = s0 + lam * ell
    se = s0 + ell
    beta = -(a + b) * w2 / h
    gamma3 = (a + b) * w2 * t_base / h - a * s0
    cells = [
        ProfileCell(np.array([[s0, t_base], [s1, t_base], [s1, t_split], [s0, t_split]]),
                    a, 0.0, -a * s0, True, "band", level),
        ProfileCell(np.array([[s1, t_base], [s1 + w2, t_split], [s1, t_split]]),
                    -b, 0.0, b * (s0 + 0.5 * ell), False, "band", level),
        ProfileCell(np.array([[s1, t_base], [s2, t_base], [s2 + w2, t_split], [s1 + w2, t_split]]),
                    a, beta, gamma3, True, "shear", level),
        ProfileCell(np.array([[s2, t_base], [se, t_base], [se, t_split], [s2 + w2, t_split]]),
                    -b, 0.0, b * se, False, "band", level),
    ]
    return cells


def cutoff_cells(s0, ell, t_saw, t_zero, a, b, lam, level) -> list[ProfileCell]:
    """Interpolate one sawtooth period at t_saw linearly to zero at t_zero.

    Emits four triangles (affine interpolants of the bilinear ramp) so the
    field stays exactly continuous with both neighbours.
    """
    h = t_zero - t_saw
    cells = []
    for up, sa, sb, p, q in (
        (True, s0, s0 + lam * ell, a, -a * s0),
        (False, s0 + lam * ell, s0 + ell, -b, b * (s0 + ell)),
    ):
        fa = p * sa + q
        fb = p * sb + q
        tri1 = np.array([[sa, t_saw], [sb, t_saw], [sb, t_zero]])
        tri2 = np.array([[sa, t_saw], [sb, t_zero], [sa, t_zero]])
        cells.append(ProfileCell(tri1, p, -fb / h, q + fb * t_saw / h,
                                 up, "cutoff", level))
        cells.append(ProfileCell(tri2, 0.0, -fa / h, fa * t_zero / h,
                                 up, "cutoff", level))
    return cells


def branch_zone(s0, ell0, t_in, t_out, theta, a, b, lam,
                strict=False, i_cap=None, start_level=0) -> list[ProfileCell]:
    """Self-similar refinement of one slab from t_in towards t_out.

    Generation i occupies ``[y_i, y_{i+1}]`` with ``y_i = t_in +
    kappa (1 - theta^i)``, ``kappa = t_out - t_in`` (signed); widths halve
    per generation and a linear cut-off meets the affine background exactly
    at t_out.  Returns the last built generation alongside the cells.
    """
    kappa = t_out - t_in
    cells: list[ProfileCell] = []
    i = 0
    while i < MAX_GENERATIONS:
        ell_i = ell0 / 2**i
        h_i = abs(kappa) * (1.0 - theta) * theta**i
        ok = ell_i < h_i if strict else ell_i <= h_i
        if not ok or (i_cap is not None and i > i_cap):
            break
        y_a = t_in + kappa * (1.0 - theta**i)
        y_b = t_in + kappa * (1.0 - theta ** (i + 1))
        for p in range(2**i):
            cells.extend(branch_cells(s0 + p * ell_i, ell_i, y_a, y_b,
                                      a, b, lam, level=start_level + i))
        i += 1
    i0 = i - 1
    ell_c = ell0 / 2 ** (i0 + 1)
    y_c = t_in + kappa * (1.0 - theta ** (i0 + 1))
    for p in range(2 ** (i0 + 1)):
        cells.extend(cutoff_cells(s0 + p * ell_c, ell_c, y_c, t_out,
                                  a, b, lam, level=start_level + i0 + 1))
    return cells


def double_tree(s0, ell0, t_lo, t_hi, theta, i_cap=None) -> list[ProfileCell]:
    """Inner-pair tree refining towards both slab ends, trunk in the middle.

    The upper half follows the canonical refinement ladder (zone of height
    half the slab); the lower half mirrors it at half scale so the profile
    meets the affine background at both horizontal edges.
    """
    a, b, lam = A_INNER, B_INNER, LAM_INNER
    kappa = 0.5 * (t_hi - t_lo)
    mid = t_lo + kappa
    cells = branch_zone(s0, ell0, mid, t_hi, theta, a, b, lam, i_cap=i_cap)
    cells += trunk_cells(s0, ell0, t_lo + 0.5 * kappa, mid, a, b, lam)
    cells += branch_zone(s0, ell0, t_lo + 0.5 * kappa, t_lo, theta, a, b, lam,
                         i_cap=i_cap)
    return cells


# --- Region filler ---------------------------------------------------------

def _chord_span(poly_st: np.ndarray, s: float) -> tuple[float, float]:
    c = chord(poly_st, s)
    if c is None:
        return 0.0, 0.0
    return c


def _fan_triangulate(poly: np.ndarray) -> list[np.ndarray]:
    if len(poly) <= 4:
        return [poly]
    return [np.array([poly[0], poly[i], poly[i + 1]])
            for i in range(1, len(poly) - 1)]


def _leftover(piece: np.ndarray, out: list[ProfileCell]) -> None:
    if len(piece) >= 3 and abs(poly_area(piece)) > 1e-24:
        for tri in _fan_triangulate(np.asarray(piece, float)):
            if abs(poly_area(tri)) > 1e-24:
                out.append(ProfileCell(tri, 0.0, 0.0, 0.0, False, "leftover", 0))


def _march(poly_st, s_start, s_end, ell0, theta, i_cap, out) -> None:
    """Slice ``poly_st`` from s_start towards s_end into treed bands.

    Band widths stay at ``ell0`` while the local slab height allows it and
    shrink proportionally to the height inside corner wedges, reproducing
    the geometric corner ladders; pieces outside the inscribed rectangle
    of each band keep the affine background.
    """
    sgn = 1.0 if s_end >= s_start else -1.0
    lo0, hi0 = _chord_span(poly_st, s_start + sgn * 1e-12 * max(ell0, 1e-9))
    h_start = max(hi0 - lo0, 1e-300)
    ratio = min(1.0, ell0 / h_start)
    s_pos = s_start
    guard = 0
    while sgn * (s_end - s_pos) > 1e-13 * ell0 and guard < 100000:
        guard += 1
        remaining = sgn * (s_end - s_pos)
        lo_a, hi_a = _chord_span(poly_st, s_pos + sgn * 1e-9 * ell0)
        h_here = hi_a - lo_a
        width = min(ell0, remaining, max(ratio * h_here, MIN_SLICE_FRAC * ell0))
        if h_here <= 1e-13 or width <= MIN_SLICE_FRAC * ell0 * (1 + 1e-9) and h_here < TREE_MIN_ASPECT * width:
            band = clip_band(poly_st, 0, *sorted((s_pos, s_end)))
            _leftover(band, out)
            return
        s_next = s_pos + sgn * width
        band = clip_band(poly_st, 0, *sorted((s_pos, s_next)))
        if len(band) < 3:
            s_pos = s_next
            continue
        lo_b, hi_b = _chord_span(poly_st, s_next - sgn * 1e-9 * ell0)
        rect_lo = max(lo_a, lo_b)
        rect_hi = min(hi_a, hi_b)
        s_lo, s_hi = sorted((s_pos, s_next))
        if rect_hi - rect_lo >= TREE_MIN_ASPECT * width:
            out.extend(double_tree(s_lo, s_hi - s_lo, rect_lo, rect_hi,
                                   theta, i_cap))
            _leftover(clip_halfplane(band, 0.0, 1.0, rect_lo), out)
            _leftover(clip_halfplane(band, 0.0, -1.0, -rect_hi), out)
        else:
            _leftover(band, out)
        s_pos = s_next


def fill_region(chart: Chart, poly_frame, ell0: float, theta: float,
                i_cap: int | None = None) -> list[ProfileCell]:
    """Cover a convex region with side-by-side trees plus leftovers.

    The march starts at the tallest chord of the region and proceeds both
    ways, so corner wedges at either end receive geometrically shrinking
    slices.
    """
    poly_st = ensure_ccw(chart.to_st(np.asarray(poly_frame, float)))
    svals = np.unique(poly_st[:, 0])
    cand = np.concatenate([svals, 0.5 * (svals[1:] + svals[:-1])])
    heights = [(_chord_span(poly_st, s)[1] - _chord_span(poly_st, s)[0])
               for s in cand]
    s_star = float(cand[int(np.argmax(heights))])
    out: list[ProfileCell] = []
    _march(poly_st, s_star, float(svals[-1]), ell0, theta, i_cap, out)
    _march(poly_st, s_star, float(svals[0]), ell0, theta, i_cap, out)
    return out
