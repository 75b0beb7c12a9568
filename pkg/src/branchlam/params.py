"""Construction parameters and the derived self-similar ladders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SQ3 = math.sqrt(3.0)

# Hard cap on refinement depth; generous for every admissible parameter
# choice but prevents runaway cell counts on degenerate input.
MAX_LADDER = 60


class ParamError(ValueError):
    """Inadmissible construction parameters; message names the constraint."""


@dataclass(frozen=True)
class CornerLadder:
    """Geometric slice ladder filling a wedge-shaped corner.

    Slice widths ``rho_m = rho0 * q**m`` and heights ``w_m = w0 * q**(m+1)``
    with ``q = 1 - g*rho0/w0`` for a corner whose height shrinks at rate
    ``g`` per unit of slicing coordinate.  ``m0`` is the last emitted slice
    (-1 when the wedge is too small to slice).
    """

    rho0: float
    w0: float
    g: float
    q: float
    m0: int

    def rho(self, m: int) -> float:
        return self.rho0 * self.q**m

    def w(self, m: int) -> float:
        return self.w0 * self.q ** (m + 1)


def corner_ladder(rho0: float, w0: float, g: float, stop_width: float) -> CornerLadder:
    q = 1.0 - g * rho0 / w0
    if q <= 0.0 or rho0 <= 0.0:
        return CornerLadder(rho0=rho0, w0=w0, g=g, q=max(q, 0.0), m0=-1)
    # march while the remaining height stays above the stop width
    m0 = -1
    w = w0 * q
    while w > stop_width and m0 + 1 < MAX_LADDER:
        m0 += 1
        w *= q
    return CornerLadder(rho0=rho0, w0=w0, g=g, q=q, m0=m0)


@dataclass(frozen=True)
class SecondOrderLadder:
    """Per-generation ladders of the inner branched laminate."""

    ell0: float          # width of one full slice (trunk scale)
    n_slices: int        # H_j / ell0, an exact integer by snapping
    r2_snapped: float    # per-generation adjusted fine length
    ys: np.ndarray       # refinement ladder y_i (upper half of the slab)
    hs: np.ndarray       # generation heights h_i
    ells: np.ndarray     # laminate widths ell_i
    sigmas: np.ndarray   # slope coefficients of the shear band
    i0: int              # last branching generation (-1: none)
    corner_a: CornerLadder  # wedge ladder for the rectangle corners
    corner_b: CornerLadder  # wedge ladder for the triangle/trapezoid fills


@dataclass(frozen=True)
class BranchParams:
    """All parameters of the two-level branched construction.

    ``theta`` is the geometric refinement ratio, ``r`` the coarse laminate
    length (a power of 1/2 so every generation tiles the unit cell exactly),
    ``r2`` the fine laminate length and ``eps`` the surface-energy weight
    the parameters were chosen for.  Derived ladders follow the standard
    self-similar ansatz; ``j0`` is the last outer branching generation.
    """

    theta: float
    r: float
    r2: float
    eps: float
    j0: int
    Ls: np.ndarray
    Ys: np.ndarray
    Hs: np.ndarray
    second: tuple[SecondOrderLadder, ...]
    max_level1: int | None = None  # cap on outer generations (None: ladder)
    max_level2: int | None = None  # cap on inner generations (None: ladder)

    def L(self, j: int) -> float:
        return self.r / 2.0**j

    def Y(self, j: int) -> float:
        return 0.5 * (1.0 - self.theta**j)

    def H(self, j: int) -> float:
        return 0.5 * self.theta**j * (1.0 - self.theta)

    @property
    def j_last(self) -> int:
        """Last built outer generation after the optional cap."""
        if self.max_level1 is None:
            return self.j0
        return min(self.j0, self.max_level1)

    def copies(self, j: int) -> int:
        """Number of translated unit cells of generation j per half."""
        return round(2**j / self.r)

    def ladder(self, j: int) -> SecondOrderLadder:
        return self.second[j]

    def describe(self) -> dict:
        return {
            "theta": self.theta,
            "r": self.r,
            "r2": self.r2,
            "eps": self.eps,
            "j0": self.j0,
        }


def _is_power_of_half(r: float) -> bool:
    if r <= 0:
        return False
    inv = 1.0 / r
    return abs(inv - round(inv)) < 1e-9 and (round(inv) & (round(inv) - 1)) == 0


def _second_order_ladder(theta: float, r: float, r2: float, j: int,
                         i_cap: int | None) -> SecondOrderLadder:
    L = r / 2.0**j
    H = 0.5 * theta**j * (1.0 - theta)
    # snap r2 per generation so an integer number of slices spans H_j
    n_slices = max(1, math.ceil(2**j * H / r2))
    r2j = 2**j * H / n_slices
    ell0 = r2j / 2**j

    ells = [ell0]
    ys = [L / 8.0]
    hs = []
    i = 0
    while i < MAX_LADDER:
        h_i = (L / 8.0) * (1.0 - theta) * theta**i
        if ells[i] > h_i:
            break
        hs.append(h_i)
        ys.append((L / 8.0) * (2.0 - theta ** (i + 1)))
        ells.append(ells[i] / 2.0)
        i += 1
    i0 = i - 1
    if i_cap is not None and i0 > i_cap:
        i0 = i_cap
        ells = ells[: i0 + 2]
        ys = ys[: i0 + 2]
        hs = hs[: i0 + 1]
    if i0 >= 0:
        sigmas = np.array([ells[i] / (3.0 * hs[i]) + 1.0 / SQ3
                           for i in range(i0 + 1)])
    else:
        sigmas = np.zeros(0)

    corner_a = corner_ladder(rho0=ell0, w0=L / 4.0, g=SQ3, stop_width=SQ3 * ell0)
    w_b = (L / 4.0) * SQ3 / (SQ3 + L / (4.0 * H))
    corner_b = corner_ladder(rho0=ell0, w0=w_b, g=w_b / H, stop_width=L / 4.0 * (w_b / H))
    return SecondOrderLadder(
        ell0=ell0, n_slices=n_slices, r2_snapped=r2j,
        ys=np.array(ys), hs=np.array(hs), ells=np.array(ells),
        sigmas=sigmas, i0=i0, corner_a=corner_a, corner_b=corner_b,
    )


def make_params(theta: float, r: float, r2: float, eps: float = 0.0,
                max_level1: int | None = None,
                max_level2: int | None = None) -> BranchParams:
    """Validate parameters and populate every derived ladder.

    Raises :class:`ParamError` naming the violated constraint for any
    inadmissible input.
    """
    if not (0.25 < theta < 0.5):
        raise ParamError(f"theta must lie in (1/4, 1/2), got {theta}")
    if not (0.0 < r < 0.5 * (1.0 - theta)):
        raise ParamError(
            f"r must lie in (0, (1-theta)/2) = (0, {0.5 * (1 - theta)}), got {r}")
    if not _is_power_of_half(r):
        raise ParamError(f"1/r must be a power of two so generations tile, got r={r}")
    if not (0.0 < r2 < 0.5 * r):
        raise ParamError(f"r2 must lie in (0, r/2), got r2={r2} with r={r}")
    if eps < 0.0:
        raise ParamError(f"eps must be nonnegative, got {eps}")

    Ls, Ys, Hs = [r], [0.0], [0.5 * (1.0 - theta)]
    j = 0
    while j < MAX_LADDER:
        L_next = r / 2.0 ** (j + 1)
        H_next = 0.5 * theta ** (j + 1) * (1.0 - theta)
        if not (Ls[j] < Hs[j]):
            break
        Ls.append(L_next)
        Ys.append(0.5 * (1.0 - theta ** (j + 1)))
        Hs.append(H_next)
        j += 1
    j0 = j - 1
    if j0 < 0:
        raise ParamError(
            f"no branching generation fits: L_0={r} >= H_0={0.5 * (1 - theta)}")
    if max_level1 is not None:
        j0_built = min(j0, max_level1)
    else:
        j0_built = j0
    # rows 0..j0_built+1 exist; the last row is the boundary cut-off layer

    second = tuple(
        _second_order_ladder(theta, r, r2, j, max_level2)
        for j in range(j0_built + 1)
    )
    return BranchParams(
        theta=theta, r=r, r2=r2, eps=eps, j0=j0,
        Ls=np.array(Ls[: j0_built + 2]),
        Ys=np.array(Ys[: j0_built + 2]),
        Hs=np.array(Hs[: j0_built + 2]),
        second=second,
        max_level1=max_level1, max_level2=max_level2,
    )
