"""Stress-free wells, lamination normals and construction gradients.

The three tetragonal variants are represented by trace-free diagonal
strain matrices.  Pairs of wells are symmetrized rank-one connected
through the twin relation, with unit normals ``b_ij``.  This module also
carries the affine gradients used by the branched-laminate constructions,
the orthonormal frame aligned with the outer lamination, and the
classification of an affine datum by its lamination order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQ2 = np.sqrt(2.0)
SQ3 = np.sqrt(3.0)
SQ6 = np.sqrt(6.0)

# The three martensite wells (trace-free diagonal strains).
E1 = np.diag([-2.0, 1.0, 1.0])
E2 = np.diag([1.0, -2.0, 1.0])
E3 = np.diag([1.0, 1.0, -2.0])

# Auxiliary strains mixed from the wells: the outer laminate alternates
# between these two before the finer splitting is inserted.
EA = (E1 + 2.0 * E2) / 3.0  # diag(0, -1, 1)
EB = (E1 + 2.0 * E3) / 3.0  # diag(0, 1, -1)

# Phase identifiers used through the geometry code.
PHASE_E1, PHASE_E2, PHASE_E3 = 1, 2, 3
PHASE_EA, PHASE_EB = 4, 5

_PHASE_TENSOR = {
    PHASE_E1: E1,
    PHASE_E2: E2,
    PHASE_E3: E3,
    PHASE_EA: EA,
    PHASE_EB: EB,
}


def wells() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The stress-free strain matrices of the three variants."""
    return E1.copy(), E2.copy(), E3.copy()


def phase_tensor(phase: int) -> np.ndarray:
    """Strain matrix carried by a phase identifier."""
    return _PHASE_TENSOR[phase]


def sym(m: np.ndarray) -> np.ndarray:
    """Symmetric part of a square matrix."""
    return 0.5 * (m + m.T)


def outer(a, b) -> np.ndarray:
    return np.outer(np.asarray(a, float), np.asarray(b, float))


# --- Lamination normals -------------------------------------------------

B12 = np.array([1.0, 1.0, 0.0]) / SQ2
B21 = np.array([-1.0, 1.0, 0.0]) / SQ2
B31 = np.array([1.0, 0.0, 1.0]) / SQ2
B13 = np.array([1.0, 0.0, -1.0]) / SQ2
B23 = np.array([0.0, 1.0, 1.0]) / SQ2
B32 = np.array([0.0, -1.0, 1.0]) / SQ2

_NORMALS = {
    (1, 2): B12, (2, 1): B21,
    (3, 1): B31, (1, 3): B13,
    (2, 3): B23, (3, 2): B32,
}


@dataclass(frozen=True)
class NormalTable:
    """All six twin normals with the derived pair and per-variant sets."""

    entries: dict

    def normal(self, i: int, j: int) -> np.ndarray:
        return self.entries[(i, j)]

    def pair_set(self, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        """B_ij: both normals connecting wells i and j."""
        return self.entries[(i, j)], self.entries[(j, i)]

    def variant_set(self, i: int) -> list[np.ndarray]:
        """B_i: the four normals of laminates involving well i."""
        others = [k for k in (1, 2, 3) if k != i]
        out = []
        for j in others:
            out.append(self.entries[(i, j)])
            out.append(self.entries[(j, i)])
        return out


def normal_table() -> NormalTable:
    return NormalTable(entries={k: v.copy() for k, v in _NORMALS.items()})


def levi_civita(i: int, j: int, k: int) -> int:
    if {i, j, k} != {1, 2, 3}:
        return 0
    return 1 if (i, j, k) in ((1, 2, 3), (2, 3, 1), (3, 1, 2)) else -1


def twin_identity(i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the twin relation between wells i and j.

    Returns ``(lhs, rhs)`` with ``lhs = e_i - e_j`` and
    ``rhs = 3 eps_ijk (b_ij (x) b_ji + b_ji (x) b_ij)``; the caller asserts
    their equality.
    """
    if i == j or i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError(f"twin_identity needs distinct indices in 1..3, got ({i}, {j})")
    ws = {1: E1, 2: E2, 3: E3}
    lhs = ws[i] - ws[j]
    k = ({1, 2, 3} - {i, j}).pop()
    bij, bji = _NORMALS[(i, j)], _NORMALS[(j, i)]
    rhs = 3.0 * levi_civita(i, j, k) * (outer(bij, bji) + outer(bji, bij))
    return lhs, rhs


# --- Frame ---------------------------------------------------------------

N_AXIS = np.array([-2.0, 1.0, 1.0]) / SQ6
D_AXIS = np.array([1.0, 1.0, 1.0]) / SQ3


@dataclass(frozen=True)
class Frame:
    """Orthonormal frame (n, b32, d) of the construction domain.

    ``d`` is orthogonal to every lamination direction used by the
    constructions, so all displacement fields are constant along it.
    """

    n: np.ndarray
    b32: np.ndarray
    d: np.ndarray

    def to_frame(self, x) -> np.ndarray:
        """Coordinates (z1, z2, z3) of standard-coordinate points x."""
        x = np.asarray(x, float)
        return np.stack([x @ self.n, x @ self.b32, x @ self.d], axis=-1)

    def to_standard(self, z) -> np.ndarray:
        z = np.asarray(z, float)
        return (z[..., :1] * self.n + z[..., 1:2] * self.b32
                + z[..., 2:3] * self.d)

    @property
    def matrix(self) -> np.ndarray:
        """Rows n, b32, d; maps standard to frame coordinates."""
        return np.stack([self.n, self.b32, self.d])


def frame() -> Frame:
    return Frame(n=N_AXIS.copy(), b32=B32.copy(), d=D_AXIS.copy())


# --- Construction gradients ----------------------------------------------

A1 = np.array([[-2.0, 2.0, 0.0], [-2.0, 1.0, 1.0], [0.0, -1.0, 1.0]])
A2 = np.array([[1.0, -1.0, 0.0], [1.0, -2.0, 1.0], [0.0, -1.0, 1.0]])
A = np.array([[0.0, 0.0, 0.0], [0.0, -1.0, 1.0], [0.0, -1.0, 1.0]])
B1 = np.array([[-2.0, 0.0, 2.0], [0.0, 1.0, -1.0], [-2.0, 1.0, 1.0]])
B3 = np.array([[1.0, 0.0, -1.0], [0.0, 1.0, -1.0], [1.0, 1.0, -2.0]])
B = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, 1.0, -1.0]])


@dataclass(frozen=True)
class GradientSet:
    """Gradients realizing the wells in the two-level construction."""

    A1: np.ndarray
    A2: np.ndarray
    A: np.ndarray
    B1: np.ndarray
    B3: np.ndarray
    B: np.ndarray


def construction_gradients() -> GradientSet:
    return GradientSet(A1=A1.copy(), A2=A2.copy(), A=A.copy(),
                       B1=B1.copy(), B3=B3.copy(), B=B.copy())


C_MID = np.diag([1.0, -0.5, -0.5])
C2 = 1.5 * A + C_MID
C3 = 1.5 * B + C_MID


def edge_datum_gradients() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients for the simple construction with edge-midpoint datum.

    Returns ``(C, C2, C3)`` where ``C`` is the affine datum averaging the
    second and third wells and ``e(C2), e(C3)`` recover those wells.
    """
    return C_MID.copy(), C2.copy(), C3.copy()


# --- Classification by lamination order ----------------------------------

_WELL_TOL = 1e-12
_BARY_TOL = 1e-10


@dataclass(frozen=True)
class LaminationClass:
    """Classification of a symmetric matrix against the lamination hull."""

    tag: str  # 'well' | 'first_order' | 'second_order' | 'outside'
    lam: np.ndarray | None = None  # barycentric weights w.r.t. the wells
    well: int | None = None  # 1-based index when tag == 'well'


def classify(F) -> LaminationClass:
    """Locate F relative to the convex hull of the wells.

    Diagonal trace-free matrices admit barycentric weights
    ``lam_i = (1 - F_ii) / 3``; any other (or out-of-hull) input is
    'outside'.  Vertices report 'well', open edges 'first_order', the
    open interior 'second_order'.
    """
    F = np.asarray(F, float)
    if F.shape != (3, 3):
        raise ValueError("classify expects a 3x3 matrix")
    for k, w in enumerate((E1, E2, E3), start=1):
        if np.max(np.abs(F - w)) <= _WELL_TOL:
            return LaminationClass(tag="well", lam=np.eye(3)[k - 1], well=k)
    off = F - np.diag(np.diag(F))
    if np.max(np.abs(off)) > _BARY_TOL or abs(np.trace(F)) > _BARY_TOL:
        return LaminationClass(tag="outside")
    lam = (1.0 - np.diag(F)) / 3.0
    if np.min(lam) < -_BARY_TOL:
        return LaminationClass(tag="outside")
    n_zero = int(np.sum(lam <= _BARY_TOL))
    if n_zero == 0:
        return LaminationClass(tag="second_order", lam=lam)
    if n_zero == 1:
        return LaminationClass(tag="first_order", lam=lam)
    # Two vanishing weights would be a vertex; caught above unless the
    # input sits within the barycentric tolerance of one.
    return LaminationClass(tag="well", lam=lam, well=int(np.argmax(lam)) + 1)
