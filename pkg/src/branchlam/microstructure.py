"""Piecewise-affine branched microstructures on the unit frame cell.

The domain is the unit cube in the frame coordinates (z1, z2, z3) along
(n, b32, d).  All constructions are constant in d (except for the full
Dirichlet cut-off variant, which ramps the field near z3 = +-1/2), so
cells are prisms over convex polygons in (z1, z2).

Generation j occupies the slabs Y_j <= |z1| <= Y_{j+1}; one reference cell
of z2-extent L_j is stored per generation and side, and the remaining
2^j / r - 1 copies are exact translates along b32.  Displacements of a
translated copy pick up the offset -k L_j G b32 of their affine map.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import wells as W
from .params import BranchParams, make_params
from .polygons import (SegmentSet, ensure_ccw, point_in_convex, poly_area,
                       poly_centroid, poly_first_moment)
from .trees import (A_OUTER, B_OUTER, LAM_OUTER, Chart, ProfileCell,
                    branch_cells, cutoff_cells, fill_region)

SQ3 = math.sqrt(3.0)

KIND_AUX = "first_order_aux"
KIND_FULL = "full_second_order"
KIND_DIRICHLET = "full_dirichlet_cutoff"
KIND_EDGE = "first_order_dirichlet"

_FRAME = W.frame()


@dataclass
class Cell:
    """Convex prism cell: polygon in (z1, z2), affine displacement, phase."""

    poly: np.ndarray
    G: np.ndarray
    c: np.ndarray
    phase: int
    j: int
    side: int
    region: str
    role: str
    level: int

    @property
    def area(self) -> float:
        return abs(poly_area(self.poly))


class Patch:
    """Reference cell of one generation plus its translation bookkeeping."""

    def __init__(self, j: int, side: int, z1_lo: float, z1_hi: float,
                 period: float, k_lo: int, k_count: int, cells: list[Cell]):
        self.j = j
        self.side = side
        self.z1_lo = z1_lo
        self.z1_hi = z1_hi
        self.period = period
        self.k_lo = k_lo
        self.k_count = k_count
        self.cells = cells
        self._grid = None
        self._boundary = None

    # -- point location ---------------------------------------------------

    def _build_grid(self):
        n = max(4, int(math.sqrt(len(self.cells))))
        gx = np.linspace(self.z1_lo, self.z1_hi, n + 1)
        gy = np.linspace(0.0, self.period, n + 1)
        buckets = [[] for _ in range(n * n)]
        for idx, cell in enumerate(self.cells):
            x0, y0 = cell.poly.min(axis=0)
            x1, y1 = cell.poly.max(axis=0)
            i0 = max(0, np.searchsorted(gx, x0, "right") - 1)
            i1 = min(n - 1, max(0, np.searchsorted(gx, x1, "left") - 1))
            j0 = max(0, np.searchsorted(gy, y0, "right") - 1)
            j1 = min(n - 1, max(0, np.searchsorted(gy, y1, "left") - 1))
            for bi in range(i0, i1 + 1):
                for bj in range(j0, j1 + 1):
                    buckets[bi * n + bj].append(idx)
        self._grid = (n, gx, gy, buckets)

    def locate(self, z1: float, z2_local: float) -> int | None:
        """Index of the lowest-index cell containing the point."""
        if self._grid is None:
            self._build_grid()
        n, gx, gy, buckets = self._grid
        bi = min(n - 1, max(0, int(np.searchsorted(gx, z1, "right") - 1)))
        bj = min(n - 1, max(0, int(np.searchsorted(gy, z2_local, "right") - 1)))
        p = (z1, z2_local)
        for tol in (1e-12, 1e-9):
            best = None
            for idx in buckets[bi * n + bj]:
                if point_in_convex(self.cells[idx].poly, p, tol):
                    best = idx
                    break
            if best is not None:
                return best
        for tol in (1e-12, 1e-9):
            for idx, cell in enumerate(self.cells):
                if point_in_convex(cell.poly, p, tol):
                    return idx
        return None

    # -- boundary edges -----------------------------------------------------

    def boundary_edges(self, which: str, tol: float = 1e-11):
        """Cell edges lying on one of the four patch boundary lines."""
        if self._boundary is None:
            lines = {
                "left": (0, self.z1_lo), "right": (0, self.z1_hi),
                "bottom": (1, 0.0), "top": (1, self.period),
            }
            edges = {k: [] for k in lines}
            for idx, cell in enumerate(self.cells):
                m = len(cell.poly)
                for i in range(m):
                    p, q = cell.poly[i], cell.poly[(i + 1) % m]
                    for name, (ax, val) in lines.items():
                        if abs(p[ax] - val) <= tol and abs(q[ax] - val) <= tol:
                            edges[name].append((p.copy(), q.copy(), idx))
            self._boundary = edges
        return self._boundary[which]

    def area(self) -> float:
        return float(sum(c.area for c in self.cells))


@dataclass
class ValidationCheck:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class ValidationReport:
    checks: list[ValidationCheck] = field(default_factory=list)

    def add(self, name, value, threshold, smaller: bool = True):
        ok = value < threshold if smaller else value > threshold
        self.checks.append(ValidationCheck(name, float(value), float(threshold), bool(ok)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {c.name: {"value": c.value, "threshold": c.threshold,
                         "passed": c.passed} for c in self.checks}


class Microstructure:
    """Immutable set of prismatic cells tiling the unit frame cell."""

    def __init__(self, kind: str, params: BranchParams, patches: list[Patch],
                 phases_allowed: tuple[int, ...], ramp_width: float = 0.0):
        self.kind = kind
        self.params = params
        self.patches = patches
        self.phases_allowed = phases_allowed
        self.ramp_width = ramp_width  # for the full Dirichlet cut-off kind
        self._ylad = self._build_ladder()

    def _build_ladder(self):
        by_key = {}
        bounds = []
        for p in self.patches:
            by_key[(p.j, p.side)] = p
            if p.side > 0:
                bounds.append((p.j, p.z1_lo, p.z1_hi))
        bounds.sort(key=lambda t: t[1])
        return by_key, bounds

    # -- evaluation ---------------------------------------------------------

    def _find_patch(self, z1: float) -> Patch | None:
        by_key, bounds = self._ylad
        a = abs(z1)
        side = 1 if z1 >= 0 else -1
        for j, lo, hi in bounds:
            if lo - 1e-15 <= a <= hi + 1e-15:
                return by_key.get((j, side))
        return None

    def locate(self, x) -> tuple[Cell, int, Patch] | None:
        """Containing (cell, copy index, patch) of a standard-coords point."""
        z = _FRAME.to_frame(np.asarray(x, float))
        z1, z2 = float(z[0]), float(z[1])
        if abs(z1) > 0.5 + 1e-12 or abs(z2) > 0.5 + 1e-12:
            return None
        patch = self._find_patch(np.clip(z1, -0.5, 0.5))
        if patch is None:
            return None
        k = math.floor(z2 / patch.period)
        k = min(max(k, patch.k_lo), patch.k_lo + patch.k_count - 1)
        z2l = z2 - k * patch.period
        idx = patch.locate(z1, z2l)
        if idx is None:
            return None
        return patch.cells[idx], k, patch

    def ramp(self, z3: float) -> tuple[float, float]:
        """Cut-off factor and its z3-derivative (Dirichlet kind only)."""
        r = self.ramp_width
        if r <= 0.0:
            return 1.0, 0.0
        a = abs(z3)
        if a <= 0.5 - r:
            return 1.0, 0.0
        return max(0.0, (0.5 - a) / r), -math.copysign(1.0 / r, z3)

    def evaluate(self, x, background: np.ndarray | None = None):
        """Displacement and phase strain at a point (zero outside the cell)."""
        x = np.asarray(x, float)
        hit = self.locate(x)
        if hit is None:
            chi = background if background is not None else np.zeros((3, 3))
            return np.zeros(3), chi
        cell, k, patch = hit
        u = cell.G @ x + cell.c - (k * patch.period) * (cell.G @ W.B32)
        if self.kind == KIND_DIRICHLET:
            z3 = float(x @ W.D_AXIS)
            u = u * self.ramp(z3)[0]
        return u, W.phase_tensor(cell.phase)

    def world_displacement(self, cell: Cell, patch: Patch, k: int, x) -> np.ndarray:
        return cell.G @ x + cell.c - (k * patch.period) * (cell.G @ W.B32)

    def iter_world_cells(self):
        """Yield (cell, z2_offset, world_c) over every translated instance."""
        for patch in self.patches:
            for k in range(patch.k_lo, patch.k_lo + patch.k_count):
                off = k * patch.period
                for cell in patch.cells:
                    yield cell, off, cell.c - off * (cell.G @ W.B32)

    @property
    def n_cells(self) -> int:
        return sum(p.k_count * len(p.cells) for p in self.patches)

    @property
    def n_reference_cells(self) -> int:
        return sum(len(p.cells) for p in self.patches)

    # -- interface enumeration ----------------------------------------------

    def interface_sets(self):
        """Yield (SegmentSet, multiplicity) covering every interior interface.

        Payloads are (cell, extra_offset_vec3) so displacement and phase
        jumps can be evaluated exactly on either side; translated instances
        are represented once with the appropriate multiplicity.
        """
        by_key = {}
        for p in self.patches:
            by_key[(p.j, p.side)] = p

        def payload(cell, patch, k):
            return (cell, -(k * patch.period) * (cell.G @ W.B32), k * patch.period)

        # interior of each reference patch
        for p in self.patches:
            ss = SegmentSet()
            for cell in p.cells:
                ss.add_polygon(cell.poly, payload(cell, p, 0))
            yield ss, p.k_count
        # neighbouring copies within a generation (shared line z2 = period)
        for p in self.patches:
            if p.k_count < 2:
                continue
            ss = SegmentSet()
            for pt, q, idx in p.boundary_edges("top"):
                c = p.cells[idx]
                ss.add(pt, q, poly_centroid(c.poly), payload(c, p, 0))
            for pt, q, idx in p.boundary_edges("bottom"):
                c = p.cells[idx]
                shift = np.array([0.0, p.period])
                ss.add(pt + shift, q + shift,
                       poly_centroid(c.poly) + shift, payload(c, p, 1))
            yield ss, p.k_count - 1
        # consecutive generations (shared line |z1| = Y_{j+1})
        for side in (1, -1):
            js = sorted(j for (j, s) in by_key if s == side)
            for j in js[:-1]:
                pa, pb = by_key[(j, side)], by_key[(j + 1, side)]
                ss = SegmentSet()
                outer_a = "right" if side > 0 else "left"
                outer_b = "left" if side > 0 else "right"
                for pt, q, idx in pa.boundary_edges(outer_a):
                    c = pa.cells[idx]
                    ss.add(pt, q, poly_centroid(c.poly), payload(c, pa, 0))
                for k in (0, 1):
                    shift = np.array([0.0, k * pb.period])
                    for pt, q, idx in pb.boundary_edges(outer_b):
                        c = pb.cells[idx]
                        ss.add(pt + shift, q + shift,
                               poly_centroid(c.poly) + shift, payload(c, pb, k))
                yield ss, pa.k_count
        # seam z1 = 0 between the two sides
        if (0, 1) in by_key and (0, -1) in by_key:
            pa, pb = by_key[(0, 1)], by_key[(0, -1)]
            ss = SegmentSet()
            for pt, q, idx in pa.boundary_edges("left"):
                c = pa.cells[idx]
                ss.add(pt, q, poly_centroid(c.poly), payload(c, pa, 0))
            for pt, q, idx in pb.boundary_edges("right"):
                c = pb.cells[idx]
                ss.add(pt, q, poly_centroid(c.poly), payload(c, pb, 0))
            yield ss, pa.k_count

    # -- validation -----------------------------------------------------------

    def validate(self, n_boundary: int = 200, samples_per_edge: int = 5) -> ValidationReport:
        rep = ValidationReport()
        # tiling
        total = sum(p.area() * p.k_count for p in self.patches)
        rep.add("tiling_residual_area", abs(total - 1.0), 1e-10)
        # displacement jumps and rank-one compatibility across interfaces
        max_jump = 0.0
        max_sv2 = 0.0
        for ss, mult in self.interface_sets():
            if mult <= 0:
                continue
            for pay_a, pay_b, p0, p1, length in ss.interfaces():
                cell_a, off_a, _ = pay_a
                cell_b, off_b, _ = pay_b
                for lam in np.linspace(0.05, 0.95, samples_per_edge):
                    zp = p0 + lam * (p1 - p0)
                    xs = _FRAME.to_standard(np.array([zp[0], zp[1], 0.0]))
                    ua = cell_a.G @ xs + cell_a.c + off_a
                    ub = cell_b.G @ xs + cell_b.c + off_b
                    max_jump = max(max_jump, float(np.max(np.abs(ua - ub))))
                dG = cell_a.G - cell_b.G
                if np.max(np.abs(dG)) > 1e-12:
                    sv = np.linalg.svd(dG, compute_uv=False)
                    max_sv2 = max(max_sv2, float(sv[1]))
                    e_dir = _FRAME.to_standard(
                        np.array([p1[0] - p0[0], p1[1] - p0[1], 0.0]))
                    e_dir = e_dir / np.linalg.norm(e_dir)
                    max_sv2 = max(max_sv2, float(np.max(np.abs(dG @ e_dir))),
                                  float(np.max(np.abs(dG @ W.D_AXIS))))
        rep.add("max_interface_jump", max_jump, 1e-8)
        rep.add("max_rank_one_defect", max_sv2, 1e-8)
        # gradient bounds
        gmax = 0.0
        dmax = 0.0
        for p in self.patches:
            for cell in p.cells:
                gmax = max(gmax, float(np.linalg.norm(cell.G)))
                dmax = max(dmax, float(np.max(np.abs(cell.G @ W.D_AXIS))))
        rep.add("max_gradient_norm", gmax, 30.0)
        rep.add("max_gradient_dot_d", dmax, 1e-12)
        # phases
        ok = all(cell.phase in self.phases_allowed
                 for p in self.patches for cell in p.cells)
        rep.add("phases_in_allowed_set", 0.0 if ok else 1.0, 0.5)
        # boundary condition u = 0 on the four lateral faces
        bmax = 0.0
        npt = max(4, n_boundary // 4)
        ts = np.linspace(-0.5, 0.5, npt)
        for face in range(4):
            for i, t in enumerate(ts):
                z3 = -0.45 + 0.9 * (i / max(1, npt - 1))
                if face == 0:
                    z = (0.5, t, z3)
                elif face == 1:
                    z = (-0.5, t, z3)
                elif face == 2:
                    z = (t, 0.5, z3)
                else:
                    z = (t, -0.5, z3)
                xs = _FRAME.to_standard(np.array(z))
                u, _ = self.evaluate(xs)
                bmax = max(bmax, float(np.max(np.abs(u))))
        rep.add("max_boundary_displacement", bmax, 1e-10)
        return rep

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self, include_instances: bool = True) -> dict:
        head = {
            "kind": self.kind,
            "theta": self.params.theta,
            "r": self.params.r,
            "r2": self.params.r2,
            "j0": self.params.j0,
        }
        cells = []
        phase_name = {W.PHASE_E1: 1, W.PHASE_E2: 2, W.PHASE_E3: 3,
                      W.PHASE_EA: "A", W.PHASE_EB: "B"}
        if include_instances:
            it = ((c, off, wc) for c, off, wc in self.iter_world_cells())
        else:
            it = ((c, 0.0, c.c) for p in self.patches for c in p.cells)
        for cell, off, world_c in it:
            poly = cell.poly + np.array([0.0, off])
            cells.append({
                "vertices": [[float(v[0]), float(v[1])] for v in poly],
                "gradient": [float(v) for v in cell.G.reshape(-1)],
                "offset": [float(v) for v in world_c],
                "phase": phase_name[cell.phase],
                "tags": {"j": cell.j, "i": cell.level, "region": cell.region},
            })
        head["cells"] = cells
        return head

    def save_json(self, path: str, include_instances: bool = True) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(include_instances), fh)


# --- charts and regions -----------------------------------------------------

def _chart_first_order(side: int) -> Chart:
    mat = np.array([[0.0, float(side)], [1.0, 0.0]])
    return Chart(
        st_to_frame_mat=mat, st_origin=np.zeros(2),
        grad_s=W.B32.copy(), grad_t=side * W.N_AXIS,
        e_osc=W.B23.copy(), g_aux=np.zeros((3, 3)), c_aux=np.zeros(3),
        phase_up=W.PHASE_EA, phase_down=W.PHASE_EB,
        a=A_OUTER, b=B_OUTER, lam=LAM_OUTER,
    )


def _chart_pair_a(anchor_z1: float, g_aux, c_aux) -> Chart:
    mat = np.array([[1.0, 1.0 / SQ3], [0.0, 1.0]])
    origin = np.array([anchor_z1, 0.0])
    return Chart(
        st_to_frame_mat=mat, st_origin=origin,
        grad_s=W.N_AXIS - W.B32 / SQ3, grad_t=W.B32.copy(),
        e_osc=W.B12.copy(), g_aux=np.asarray(g_aux, float),
        c_aux=np.asarray(c_aux, float),
        phase_up=W.PHASE_E1, phase_down=W.PHASE_E2,
        a=2.0 * SQ3, b=SQ3, lam=1.0 / 3.0,
    )


def _chart_pair_b(anchor_z1: float, anchor_z2: float, g_aux, c_aux) -> Chart:
    mat = np.array([[1.0, -1.0 / SQ3], [0.0, 1.0]])
    origin = np.array([anchor_z1 + anchor_z2 / SQ3, 0.0])
    return Chart(
        st_to_frame_mat=mat, st_origin=origin,
        grad_s=W.N_AXIS + W.B32 / SQ3, grad_t=W.B32.copy(),
        e_osc=W.B31.copy(), g_aux=np.asarray(g_aux, float),
        c_aux=np.asarray(c_aux, float),
        phase_up=W.PHASE_E1, phase_down=W.PHASE_E3,
        a=2.0 * SQ3, b=SQ3, lam=1.0 / 3.0,
    )


def _strip(params: BranchParams, j: int, side: int) -> tuple[float, float]:
    if side > 0:
        return params.Ys[j], params.Ys[j + 1]
    return -params.Ys[j + 1], -params.Ys[j]


def _regions(params: BranchParams, j: int, side: int) -> dict[str, np.ndarray]:
    L = params.Ls[j]
    x_lo, x_hi = _strip(params, j, side)
    if side > 0:
        r2v = [(x_lo, L / 4), (x_hi, L / 4), (x_hi, L / 2)]
        r4v = [(x_lo, L / 2), (x_hi, 3 * L / 4), (x_hi, L), (x_lo, L)]
    else:
        r2v = [(x_lo, L / 4), (x_hi, L / 4), (x_lo, L / 2)]
        r4v = [(x_lo, 3 * L / 4), (x_hi, L / 2), (x_hi, L), (x_lo, L)]
    return {
        "omega1": np.array([(x_lo, 0.0), (x_hi, 0.0), (x_hi, L / 4), (x_lo, L / 4)]),
        "omega2": ensure_ccw(np.array(r2v, float)),
        "omega4": ensure_ccw(np.array(r4v, float)),
    }


def shear_transport(cells: list[Cell], params: BranchParams, j: int,
                    side: int) -> list[Cell]:
    """Map the omega1 filling onto omega3 by the unimodular shear.

    Polygons slide in z2 proportionally to the depth into the strip;
    gradients G pick up -(L/4H) (G - B) b32 (x) n (sign mirrored on the
    negative side) and offsets shift so the trace on the boundary is again
    the coarse background field.
    """
    L, H = params.Ls[j], params.Hs[j]
    Yj = params.Ys[j]
    slope = L / (4.0 * H)
    tau0 = (L / 4.0) * (1.0 - Yj / H)
    out = []
    for cell in cells:
        poly = cell.poly.copy()
        depth = side * poly[:, 0] - Yj
        poly[:, 1] = poly[:, 1] + slope * depth + L / 4.0
        gb = (cell.G - W.B) @ W.B32
        G = cell.G - side * slope * np.outer(gb, W.N_AXIS)
        c = cell.c + L * W.B23 - tau0 * gb
        out.append(Cell(poly=ensure_ccw(poly), G=G, c=c, phase=cell.phase,
                        j=j, side=side, region="omega3", role=cell.role,
                        level=cell.level))
    return out


# --- builders ---------------------------------------------------------------

def _layer_patch(params: BranchParams, side: int, phase_up: int,
                 phase_down: int) -> Patch:
    """Boundary cut-off layer: tent profile ramped to zero at |z1| = 1/2."""
    jl = params.j_last
    L = params.Ls[jl + 1]
    chart = _chart_first_order(side)
    chart.phase_up, chart.phase_down = phase_up, phase_down
    pcs = cutoff_cells(0.0, L, params.Ys[jl + 1], 0.5,
                       A_OUTER, B_OUTER, LAM_OUTER, level=jl + 1)
    cells = [chart.materialize(pc, jl + 1, side, "cutoff_layer") for pc in pcs]
    z1_lo, z1_hi = (params.Ys[jl + 1], 0.5) if side > 0 else (-0.5, -params.Ys[jl + 1])
    k = round(2 ** (jl + 1) / params.r)
    return Patch(jl + 1, side, z1_lo, z1_hi, L, -k // 2, k, cells)


def first_order_laminate(params: BranchParams) -> Microstructure:
    """Two-state branched laminate refining towards |z1| = 1/2.

    Phases are the auxiliary mixed strains; the field vanishes on the
    lateral boundary and is constant in d.
    """
    patches = []
    for side in (1, -1):
        chart = _chart_first_order(side)
        for j in range(params.j_last + 1):
            L, H = params.Ls[j], params.Hs[j]
            pcs = branch_cells(0.0, L, params.Ys[j], params.Ys[j + 1],
                               A_OUTER, B_OUTER, LAM_OUTER, level=j)
            region_of = {0: "omega1", 1: "omega2", 2: "omega3", 3: "omega4"}
            cells = [chart.materialize(pc, j, side, region_of[i])
                     for i, pc in enumerate(pcs)]
            z1_lo, z1_hi = _strip(params, j, side)
            k = params.copies(j)
            patches.append(Patch(j, side, z1_lo, z1_hi, L, -k // 2, k, cells))
        patches.append(_layer_patch(params, side, W.PHASE_EA, W.PHASE_EB))
    return Microstructure(KIND_AUX, params, patches,
                          phases_allowed=(W.PHASE_EA, W.PHASE_EB))


def subdivide_second_order_a(params: BranchParams, j: int,
                             side: int = 1) -> list[Cell]:
    """Fine two-well splitting of the rectangular region omega1."""
    lad = params.ladder(j)
    i_cap = (max(lad.i0, 0) + 4 if params.max_level2 is None
             else params.max_level2)
    x_lo, _ = _strip(params, j, side)
    chart = _chart_pair_a(x_lo, W.A, np.zeros(3))
    poly = _regions(params, j, side)["omega1"]
    pcs = fill_region(chart, poly, lad.ell0, params.theta, i_cap)
    return [chart.materialize(pc, j, side, "omega1") for pc in pcs]


def subdivide_second_order_b(params: BranchParams, j: int, side: int = 1,
                             region: str = "omega2") -> list[Cell]:
    """Fine two-well splitting of the triangular (omega2) or trapezoidal
    (omega4) region, sliced along the complementary twin direction."""
    lad = params.ladder(j)
    i_cap = (max(lad.i0, 0) + 4 if params.max_level2 is None
             else params.max_level2)
    L = params.Ls[j]
    x_lo, x_hi = _strip(params, j, side)
    poly = _regions(params, j, side)[region]
    c_aux = (L if region == "omega2" else 2.0 * L) * W.B23
    anchor = (x_hi, L / 4.0) if region == "omega2" else (x_lo, L)
    chart = _chart_pair_b(anchor[0], anchor[1], W.B, c_aux)
    pcs = fill_region(chart, poly, lad.ell0, params.theta, i_cap)
    return [chart.materialize(pc, j, side, region) for pc in pcs]


def assemble_full(params: BranchParams) -> Microstructure:
    """Both lamination levels assembled over the whole domain."""
    patches = []
    for side in (1, -1):
        for j in range(params.j_last + 1):
            cells_1 = subdivide_second_order_a(params, j, side)
            cells = list(cells_1)
            cells += shear_transport(cells_1, params, j, side)
            cells += subdivide_second_order_b(params, j, side, "omega2")
            cells += subdivide_second_order_b(params, j, side, "omega4")
            z1_lo, z1_hi = _strip(params, j, side)
            k = params.copies(j)
            patches.append(Patch(j, side, z1_lo, z1_hi, params.Ls[j],
                                 -k // 2, k, cells))
        patches.append(_layer_patch(params, side, W.PHASE_E2, W.PHASE_E3))
    return Microstructure(KIND_FULL, params, patches,
                          phases_allowed=(W.PHASE_E1, W.PHASE_E2, W.PHASE_E3))


def build_full_dirichlet(params: BranchParams) -> Microstructure:
    """Assembled construction ramped to zero near the z3 faces.

    The piecewise-linear ramp of width r makes u vanish on the whole
    boundary at the price of an O(r) energy contribution in the two slabs.
    """
    ms = assemble_full(params)
    return Microstructure(KIND_DIRICHLET, params, ms.patches,
                          phases_allowed=ms.phases_allowed,
                          ramp_width=params.r)


class EdgeDatumField:
    """Simple construction for the edge-midpoint affine datum.

    Wraps the two-state branched laminate: the displacement is
    ``1.5 * u_aux(max(|z1|, |z3|), z2) + C x`` with the auxiliary phases
    mapped to the second and third wells.  Full Dirichlet data ``u = F x``
    with ``F = C`` on the whole boundary.
    """

    kind = KIND_EDGE

    def __init__(self, params: BranchParams):
        self.params = params
        self.aux = first_order_laminate(params)
        self.C, self.C2, self.C3 = W.edge_datum_gradients()
        self.F = self.C.copy()

    def _locate2d(self, m: float, z2: float):
        xs = _FRAME.to_standard(np.array([m, z2, 0.0]))
        return self.aux.locate(xs)

    def evaluate(self, x):
        """Displacement and phase strain at a standard-coordinates point."""
        x = np.asarray(x, float)
        z = _FRAME.to_frame(x)
        z1, z2, z3 = float(z[0]), float(z[1]), float(z[2])
        m = max(abs(z1), abs(z3))
        if m > 0.5 + 1e-12 or abs(z2) > 0.5 + 1e-12:
            return self.F @ x, self.F.copy()
        hit = self._locate2d(min(m, 0.5), z2)
        if hit is None:
            return self.F @ x, self.F.copy()
        cell, k, patch = hit
        x2d = _FRAME.to_standard(np.array([m, z2, 0.0]))
        u2d = self.aux.world_displacement(cell, patch, k, x2d)
        u = 1.5 * u2d + self.C @ x
        chi = W.E2 if cell.phase == W.PHASE_EA else W.E3
        return u, chi.copy()

    def gradient(self, x):
        """Exact displacement gradient away from interfaces."""
        x = np.asarray(x, float)
        z = _FRAME.to_frame(x)
        z1, z2, z3 = float(z[0]), float(z[1]), float(z[2])
        m = max(abs(z1), abs(z3))
        hit = self._locate2d(min(m, 0.5), z2)
        if hit is None or m > 0.5 or abs(z2) > 0.5:
            return self.F.copy(), self.F.copy()
        cell, _, _ = hit
        if abs(z1) >= abs(z3):
            grad_m = math.copysign(1.0, z1) * W.N_AXIS
        else:
            grad_m = math.copysign(1.0, z3) * W.D_AXIS
        dm = cell.G @ W.N_AXIS      # d(u2d)/dm in the 2d chart
        ds = cell.G @ W.B32
        G = 1.5 * (np.outer(dm, grad_m) + np.outer(ds, W.B32)) + self.C
        chi = W.E2 if cell.phase == W.PHASE_EA else W.E3
        return G, chi.copy()


def build_edge_datum(params: BranchParams) -> EdgeDatumField:
    return EdgeDatumField(params)


def build(kind: str, params: BranchParams):
    if kind == KIND_AUX:
        return first_order_laminate(params)
    if kind == KIND_FULL:
        return assemble_full(params)
    if kind == KIND_DIRICHLET:
        return build_full_dirichlet(params)
    if kind == KIND_EDGE:
        return build_edge_datum(params)
    raise ValueError(f"unknown kind {kind!r}")
