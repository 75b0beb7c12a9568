"""Fourier-side diagnostics of the sampled, zero-extended phase fields.

The diagonal of chi - F, extended by zero outside the unit cell, is
sampled on a periodic box of side 2 aligned with the construction frame.
Everything downstream works on discrete spectra: the elastic multiplier
form, conical multipliers, smoothed cone projections, localization
residuals, the direction decomposition and the trilinear quantity with
its cone-localized and vanishing variants.

Wave vectors are rotated from frame to standard coordinates before any
multiplier is evaluated, since the cone axes live in standard
coordinates while the grid is frame-aligned.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import wells as W
from .energy import PER_OMEGA, _check_resolution
from .microstructure import KIND_AUX, KIND_FULL, Microstructure, _FRAME
from .polygons import poly_area, poly_centroid

SIDE = 2.0  # periodic box side; the unit cell sits centered with padding
DK = math.pi  # reciprocal lattice spacing of the box

AXES = {
    "b12": W.B12, "b21": W.B21, "b13": W.B13,
    "b31": W.B31, "b23": W.B23, "b32": W.B32,
}
# membership of lamination-normal sets per variant
VARIANT_AXES = {
    1: ("b12", "b21", "b13", "b31"),
    2: ("b12", "b21", "b23", "b32"),
    3: ("b13", "b31", "b23", "b32"),
}
# signs the direction components carry inside each diagonal state
DECOMP_SIGNS = {
    1: {"b12": 1, "b21": 1, "b13": -1, "b31": -1},
    2: {"b12": -1, "b21": -1, "b23": 1, "b32": 1},
    3: {"b13": 1, "b31": 1, "b23": -1, "b32": -1},
}


@dataclass(frozen=True)
class ConeSpec:
    """Truncated (optionally annular) cone around one lamination axis."""

    axis: np.ndarray
    mu: float
    mu2: float
    mu3: float = 0.0
    width: float = 0.25

    def __post_init__(self):
        if self.mu3 and not self.mu3 < self.mu2:
            raise ValueError("inner radius must stay below the outer radius")


class SpectralFields:
    """Sampled diagonal states and their discrete spectra."""

    def __init__(self, f2d: np.ndarray, F: np.ndarray, N: int, separable=True):
        self.N = N
        self.F = np.asarray(F, float)
        self.f2d = f2d  # (3, N, N) on the (z1, z2) cross-section
        h = SIDE / N
        self.h = h
        zs = -1.0 + h * (np.arange(N) + 0.5)
        self.w1d = (np.abs(zs) < 0.5).astype(float)
        self.spec2d = np.fft.fft2(f2d, axes=(1, 2))
        self.specw = np.fft.fft(self.w1d)
        self.ms = np.fft.fftfreq(N, d=1.0 / N)  # integer mode numbers
        self._proj_cache = {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def sample(cls, ms: Microstructure, F, N: int) -> "SpectralFields":
        if ms.kind not in (KIND_AUX, KIND_FULL):
            raise ValueError("sampling expects a d-constant cell tiling")
        F = np.asarray(F, float)
        if np.max(np.abs(F - np.diag(np.diag(F)))) > 1e-12 or abs(np.trace(F)) > 1e-12:
            raise ValueError("the affine datum must be diagonal and trace free")
        if N < 64 or N & (N - 1):
            raise ValueError("N must be a power of two >= 64")
        _check_resolution(ms.params, N)
        h = SIDE / N
        zs = -1.0 + h * (np.arange(N) + 0.5)
        f2d = np.zeros((3, N, N))
        Fd = np.diag(F)
        inside = np.abs(zs) < 0.5
        for i, z1 in enumerate(zs):
            if not inside[i]:
                continue
            for k, z2 in enumerate(zs):
                if not inside[k]:
                    continue
                hit = ms.locate(_FRAME.to_standard(np.array([z1, z2, 0.0])))
                if hit is None:
                    continue
                diag = np.diag(W.phase_tensor(hit[0].phase))
                f2d[:, i, k] = diag - Fd
        return cls(f2d, F, N)

    # -- plumbing -------------------------------------------------------------

    def mode_weight(self) -> float:
        """Spectral measure so that sum |spec|^2 * weight = int |f|^2 dx."""
        return (self.h ** 3 / SIDE ** 3) * self.h ** 3  # = h^6 / 8

    def k_std_slab(self, m3: int):
        """Standard-coordinate wave vectors of one z3-mode slab."""
        m1 = self.ms[:, None]
        m2 = self.ms[None, :]
        kx = DK * (m1 * W.N_AXIS[0] + m2 * W.B32[0] + m3 * W.D_AXIS[0])
        ky = DK * (m1 * W.N_AXIS[1] + m2 * W.B32[1] + m3 * W.D_AXIS[1])
        kz = DK * (m1 * W.N_AXIS[2] + m2 * W.B32[2] + m3 * W.D_AXIS[2])
        return kx, ky, kz

    def spec_slab(self, j: int, i3: int) -> np.ndarray:
        return self.spec2d[j] * self.specw[i3]

    def spec3d(self, j: int) -> np.ndarray:
        """Full separable 3-d spectrum (axes m1, m2, m3)."""
        return self.spec2d[j][:, :, None] * self.specw[None, None, :]

    def field3d(self, j: int) -> np.ndarray:
        return self.f2d[j][:, :, None] * self.w1d[None, None, :]

    def grid_l2_sq(self, j: int) -> float:
        return float(np.sum(self.field3d(j) ** 2)) * self.h ** 3

    def spectral_l2_sq(self, j: int) -> float:
        s2 = float(np.sum(np.abs(self.spec2d[j]) ** 2))
        w2 = float(np.sum(np.abs(self.specw) ** 2))
        return s2 * w2 * self.mode_weight()

    def l2_norm(self, j: int) -> float:
        return math.sqrt(self.grid_l2_sq(j))

    def trace_residual(self) -> float:
        return float(np.max(np.abs(self.f2d.sum(axis=0))))


# --- multiplier forms --------------------------------------------------------

def multiplier_form_M(sf: SpectralFields) -> tuple[float, float]:
    """Quadratic form of the elastic-energy Fourier multiplier.

    Returns (value, zero_mode_mass); the k = 0 term carries no multiplier
    and is reported separately.
    """
    weight = sf.mode_weight()
    total = 0.0
    zero_mass = 0.0
    for i3, m3 in enumerate(sf.ms):
        kx, ky, kz = sf.k_std_slab(m3)
        w1, w2, w3 = kx * kx, ky * ky, kz * kz
        S = w1 + w2 + w3
        y1 = sf.spec_slab(0, i3)
        y2 = sf.spec_slab(1, i3)
        y3 = sf.spec_slab(2, i3)
        a1 = np.abs(y1) ** 2
        a2 = np.abs(y2) ** 2
        a3 = np.abs(y3) ** 2
        lin = w1 * y1 + w2 * y2 + w3 * y3
        num = (((S - w1) ** 2 - w1 * w1) * a1
               + ((S - w2) ** 2 - w2 * w2) * a2
               + ((S - w3) ** 2 - w3 * w3) * a3
               + np.abs(lin) ** 2)
        if m3 == 0:
            zero_mass += float(a1[0, 0] + a2[0, 0] + a3[0, 0]) * weight
            num[0, 0] = 0.0
            S = S.copy()
            S[0, 0] = 1.0  # k = 0 dropped via num
        total += float(np.sum(num / S ** 4))
    return total * weight, zero_mass


def _conical_multipliers(kx, ky, kz):
    """m_j(k) = squared angular distance of k-hat to the +-B_j axes."""
    S = np.sqrt(kx * kx + ky * ky + kz * kz)
    S = np.where(S == 0.0, np.inf, S)
    dots = {}
    for name, b in AXES.items():
        dots[name] = np.abs(kx * b[0] + ky * b[1] + kz * b[2]) / S
    out = {}
    for j, names in VARIANT_AXES.items():
        best = None
        for name in names:
            d2 = 2.0 * (1.0 - np.minimum(dots[name], 1.0))
            best = d2 if best is None else np.minimum(best, d2)
        out[j] = best
    return out


def conical_form(sf: SpectralFields) -> float:
    """Sum over states of the conical-multiplier weighted spectral mass."""
    weight = sf.mode_weight()
    total = 0.0
    for i3, m3 in enumerate(sf.ms):
        kx, ky, kz = sf.k_std_slab(m3)
        mj = _conical_multipliers(kx, ky, kz)
        for j in (1, 2, 3):
            y = sf.spec_slab(j - 1, i3)
            m = mj[j]
            if m3 == 0:
                m = m.copy()
                m[0, 0] = 0.0
            total += float(np.sum(m * np.abs(y) ** 2))
    return total * weight


# --- smoothed cone projections -----------------------------------------------

def _raised_cosine(x, lo, hi):
    """1 below lo, 0 above hi, cosine transition in between."""
    out = np.ones_like(x)
    mask_hi = x >= hi
    mask_mid = (x > lo) & (x < hi)
    out[mask_hi] = 0.0
    if np.any(mask_mid):
        t = (x[mask_mid] - lo) / (hi - lo)
        out[mask_mid] = 0.5 * (1.0 + np.cos(math.pi * t))
    return out


def cone_symbol_slab(spec: ConeSpec, kx, ky, kz) -> np.ndarray:
    """Smoothed even indicator of the truncated cone on one k-slab."""
    b = spec.axis
    S = np.sqrt(kx * kx + ky * ky + kz * kz)
    Ssafe = np.where(S == 0.0, np.inf, S)
    c = np.abs(kx * b[0] + ky * b[1] + kz * b[2]) / Ssafe
    ang = np.sqrt(np.maximum(0.0, 1.0 - c * c))
    w = spec.width
    g = _raised_cosine(ang, spec.mu * (1 - w), spec.mu * (1 + w))
    g = g * _raised_cosine(S, spec.mu2 * (1 - w), spec.mu2 * (1 + w))
    if spec.mu3 > 0.0:
        g = g * (1.0 - _raised_cosine(S, spec.mu3 * (1 - w), spec.mu3 * (1 + w)))
    g[S == 0.0] = 0.0
    return g


def _symbol_3d(sf: SpectralFields, symbol_fn) -> np.ndarray:
    N = sf.N
    out = np.empty((N, N, N))
    for i3, m3 in enumerate(sf.ms):
        kx, ky, kz = sf.k_std_slab(m3)
        out[:, :, i3] = symbol_fn(kx, ky, kz)
    return out


def cone_project(sf: SpectralFields, j: int, spec: ConeSpec) -> np.ndarray:
    """Real-space field after multiplying the spectrum by the cone symbol."""
    sym = _symbol_3d(sf, lambda kx, ky, kz: cone_symbol_slab(spec, kx, ky, kz))
    out = np.fft.ifftn(sf.spec3d(j) * sym)
    return np.real(out)


def union_symbol_slab(j: int, mu: float, mu2: float, kx, ky, kz,
                      width: float = 0.25) -> np.ndarray:
    """Smoothed indicator of the union of the four B_j cones."""
    best = None
    for name in VARIANT_AXES[j]:
        spec = ConeSpec(axis=AXES[name], mu=mu, mu2=mu2, width=width)
        g = cone_symbol_slab(spec, kx, ky, kz)
        best = g if best is None else np.maximum(best, g)
    return best


def localization_residual(sf: SpectralFields, mu: float, mu2: float,
                          elastic: float, surface: float,
                          width: float = 0.25) -> tuple[float, float]:
    """L2 mass escaping the union-of-cones projectors and its budget.

    Returns (residual, budget) with budget = mu^-2 E_el +
    mu2^-1 (E_surf + Per(Omega)).
    """
    weight = sf.mode_weight()
    residual = 0.0
    for i3, m3 in enumerate(sf.ms):
        kx, ky, kz = sf.k_std_slab(m3)
        for j in (1, 2, 3):
            g = union_symbol_slab(j, mu, mu2, kx, ky, kz, width)
            y = sf.spec_slab(j - 1, i3)
            residual += float(np.sum(((1.0 - g) ** 2) * np.abs(y) ** 2))
    residual *= weight
    budget = elastic / mu**2 + (surface + PER_OMEGA) / mu2
    return residual, budget


def low_freq_mass(sf: SpectralFields, j: int, b, nu: float) -> float:
    """Fraction of spectral mass in the tube |k|^2 - (k.b)^2 <= nu^2."""
    b = np.asarray(b, float)
    weight = sf.mode_weight()
    num = 0.0
    den = 0.0
    for i3, m3 in enumerate(sf.ms):
        kx, ky, kz = sf.k_std_slab(m3)
        perp2 = kx * kx + ky * ky + kz * kz - (kx * b[0] + ky * b[1] + kz * b[2]) ** 2
        y2 = np.abs(sf.spec_slab(j, i3)) ** 2
        den += float(np.sum(y2))
        num += float(np.sum(np.where(perp2 <= nu * nu, y2, 0.0)))
    del weight
    return num / den if den > 0 else 0.0


# --- direction decomposition ---------------------------------------------------

BUMP_RADIUS = math.radians(25.0)
BUMP_PLATEAU = 0.5  # inner fraction of the bump that is identically one


def _bump_slab(axis, kx, ky, kz) -> np.ndarray:
    S = np.sqrt(kx * kx + ky * ky + kz * kz)
    Ssafe = np.where(S == 0.0, np.inf, S)
    c = np.clip(np.abs(kx * axis[0] + ky * axis[1] + kz * axis[2]) / Ssafe, 0, 1)
    ang = np.arccos(c)
    g = _raised_cosine(ang, BUMP_RADIUS * BUMP_PLATEAU, BUMP_RADIUS)
    g[S == 0.0] = 0.0
    return g


def partition_symbols_slab(kx, ky, kz) -> dict[str, np.ndarray]:
    """Partition of unity on the sphere: bumps at the six +-axes plus an
    equally distributed remainder."""
    bumps = {name: _bump_slab(b, kx, ky, kz) for name, b in AXES.items()}
    ssum = sum(bumps.values())
    rem = (1.0 - ssum) / 6.0
    return {name: g + rem for name, g in bumps.items()}


def decompose_directions(sf: SpectralFields) -> dict[str, np.ndarray]:
    """The six direction components f_b of the diagonal states.

    Each f_b couples the two states that laminate across b and is real
    (even symbols acting on real fields); the reconstruction identities
    of the three states hold on the grid to rounding.
    """
    N = sf.N
    parts = {}  # (j, name) -> spectrum
    for i3, m3 in enumerate(sf.ms):
        kx, ky, kz = sf.k_std_slab(m3)
        symbols = partition_symbols_slab(kx, ky, kz)
        for j in range(3):
            y = sf.spec_slab(j, i3)
            for name, g in symbols.items():
                key = (j, name)
                if key not in parts:
                    parts[key] = np.zeros((N, N, N), complex)
                parts[key][:, :, i3] = g * y
    combos = {
        "b12": ((0, "b12"), (1, "b31")),
        "b21": ((0, "b21"), (1, "b13")),
        "b23": ((1, "b23"), (2, "b12")),
        "b32": ((1, "b32"), (2, "b21")),
        "b31": ((2, "b31"), (0, "b23")),
        "b13": ((2, "b13"), (0, "b32")),
    }
    out = {}
    for name, ((ja, na), (jb, nb)) in combos.items():
        spec = parts[(ja, na)] - parts[(jb, nb)]
        out[name] = np.real(np.fft.ifftn(spec))
    return out


def reconstruction_residual(sf: SpectralFields, fb: dict[str, np.ndarray]) -> float:
    """Max-norm defect of the three reconstruction identities."""
    combos = {
        0: (("b12", 1), ("b21", 1), ("b13", -1), ("b31", -1)),
        1: (("b12", -1), ("b21", -1), ("b23", 1), ("b32", 1)),
        2: (("b13", 1), ("b31", 1), ("b23", -1), ("b32", -1)),
    }
    worst = 0.0
    for j, terms in combos.items():
        acc = sum(sign * fb[name] for name, sign in terms)
        worst = max(worst, float(np.max(np.abs(acc - sf.field3d(j)))))
    return worst


# --- trilinear quantity ----------------------------------------------------------

def trilinear(sf: SpectralFields) -> float:
    """Grid integral of the pointwise product of the three states."""
    prod2d = sf.f2d[0] * sf.f2d[1] * sf.f2d[2]
    z3_factor = float(np.sum(self_w := sf.w1d ** 3)) * sf.h
    return float(np.sum(prod2d)) * sf.h ** 2 * z3_factor


def trilinear_cells(obj, F) -> float:
    """Exact cell-sum variant of the trilinear integral."""
    from .microstructure import EdgeDatumField

    F = np.asarray(F, float)
    Fd = np.diag(F)
    if isinstance(obj, EdgeDatumField):
        total = 0.0
        for patch in obj.aux.patches:
            if patch.side < 0:
                continue
            for cell in patch.cells:
                chi = W.E2 if cell.phase == W.PHASE_EA else W.E3
                prod = float(np.prod(np.diag(chi) - Fd))
                c = poly_centroid(cell.poly)
                a = abs(poly_area(cell.poly))
                total += patch.k_count * 4.0 * (a * c[0]) * prod
        return total
    total = 0.0
    for patch in obj.patches:
        for cell in patch.cells:
            diag = np.diag(W.phase_tensor(cell.phase))
            total += patch.k_count * cell.area * float(np.prod(diag - Fd))
    return total


def tilde_B() -> list[tuple[str, str, str]]:
    """Ordered index triples with two entries sharing a pair set.

    Enumerated exhaustively over B_1 x B_2 x B_3; the complementary
    triples cancel pairwise in the direction decomposition.
    """
    pair = {
        (1, 2): {"b12", "b21"}, (1, 3): {"b13", "b31"}, (2, 3): {"b23", "b32"},
    }
    out = []
    for b1 in VARIANT_AXES[1]:
        for b2 in VARIANT_AXES[2]:
            for b3 in VARIANT_AXES[3]:
                if ((b1 in pair[(1, 2)] and b2 in pair[(1, 2)])
                        or (b1 in pair[(1, 3)] and b3 in pair[(1, 3)])
                        or (b2 in pair[(2, 3)] and b3 in pair[(2, 3)])):
                    out.append((b1, b2, b3))
    return out


def tilde_B_classes() -> list[tuple[tuple[int, int], str]]:
    """The twelve (shared pair set, third axis) classes of tilde-B."""
    classes = []
    for (i, j), third_names in (((1, 2), VARIANT_AXES[3]),
                                ((1, 3), VARIANT_AXES[2]),
                                ((2, 3), VARIANT_AXES[1])):
        for name in third_names:
            classes.append(((i, j), name))
    return classes


def _annular_projection(sf: SpectralFields, j: int, name: str, mu: float,
                        mu2: float, mu3: float, width: float) -> np.ndarray:
    key = (j, name, mu, mu2, mu3, width)
    if key not in sf._proj_cache:
        spec = ConeSpec(axis=AXES[name], mu=mu, mu2=mu2, mu3=mu3, width=width)
        sf._proj_cache[key] = cone_project(sf, j, spec)
    return sf._proj_cache[key]


def trilinear_localized(sf: SpectralFields, mu: float, mu2: float, mu3: float,
                        width: float = 0.25) -> dict:
    """Cone-localized triple products over the tilde-B index set.

    Returns the per-triple map, the raw trilinear value and the residual
    data |raw| - sum of localized magnitudes.
    """
    vals = {}
    for (b1, b2, b3) in tilde_B():
        p1 = _annular_projection(sf, 0, b1, mu, mu2, mu3, width)
        p2 = _annular_projection(sf, 1, b2, mu, mu2, mu3, width)
        p3 = _annular_projection(sf, 2, b3, mu, mu2, mu3, width)
        vals[(b1, b2, b3)] = float(np.sum(p1 * p2 * p3)) * sf.h ** 3
    raw = trilinear(sf)
    loc_sum = sum(abs(v) for v in vals.values())
    return {"triples": vals, "raw": raw, "localized_sum": loc_sum,
            "residual": abs(raw) - loc_sum}


def _triple_case(b1: str, b2: str, b3: str) -> str:
    v1, v2, v3 = AXES[b1], AXES[b2], AXES[b3]
    names = (b1, b2, b3)
    if len(set(names)) == 2:
        return "two_equal"
    det = float(np.linalg.det(np.stack([v1, v2, v3])))
    if abs(det) > 1e-9:
        return "basis"
    return "degenerate"


def vanishing_check(sf: SpectralFields, b1: str, b2: str, b3: str,
                    mu: float, mu2: float, M: float = 8.0,
                    width: float = 0.25) -> float:
    """Localized triple product with inner radius mu3 = M mu mu2.

    For triples forming a basis (or with exactly two equal entries) the
    continuum integral vanishes by support disjointness; the returned
    magnitude, normalized by the product of the field norms, measures the
    mollifier leakage on the grid.
    """
    case = _triple_case(b1, b2, b3)
    if case == "degenerate":
        raise ValueError(f"triple ({b1}, {b2}, {b3}) is neither a basis "
                         "nor has exactly two equal entries")
    if M <= 4.0:
        raise ValueError("the inner-radius factor must exceed 4")
    mu3 = M * mu * mu2
    if not mu3 < mu2:
        raise ValueError("mu3 = M mu mu2 must stay below mu2; reduce mu")
    # guard against circular aliasing of the triple convolution
    if 3.0 * mu2 * (1.0 + width) >= DK * sf.N:
        warnings.warn("outer cone radius too large for the grid; aliased "
                      "triples may pollute the vanishing check", stacklevel=2)
    p1 = _annular_projection(sf, 0, b1, mu, mu2, mu3, width)
    p2 = _annular_projection(sf, 1, b2, mu, mu2, mu3, width)
    p3 = _annular_projection(sf, 2, b3, mu, mu2, mu3, width)
    val = abs(float(np.sum(p1 * p2 * p3)) * sf.h ** 3)
    norm = sf.l2_norm(0) * sf.l2_norm(1) * sf.l2_norm(2)
    return val / norm if norm > 0 else 0.0


def cancelled_triples() -> list[tuple[tuple[str, str, str], tuple[str, str, str]]]:
    """The pairs of triples outside tilde-B whose contributions cancel."""
    pair12 = ("b12", "b21")
    pair23 = ("b23", "b32")
    pair13 = ("b13", "b31")
    pairs = []
    for b1 in pair12:
        for b2 in pair23:
            for b3 in pair13:
                pairs.append(((b1, b2, b3), (b3, b1, b2)))
    return pairs


def cancellation_residual(sf: SpectralFields, fb: dict[str, np.ndarray]) -> float:
    """Worst relative defect of the pairwise cancellations.

    Each product pairs with its cyclic relabeling carrying the opposite
    sign pattern, so the two grid integrals must sum to rounding noise.
    """
    h3 = sf.h ** 3
    worst = 0.0
    for (t1, t2) in cancelled_triples():
        v1 = _signed_product(sf, fb, t1)
        v2 = _signed_product(sf, fb, t2)
        denom = abs(v1) + abs(v2)
        if denom < 1e-300:
            continue
        worst = max(worst, abs(v1 + v2) / denom)
    del h3
    return worst


def _signed_product(sf: SpectralFields, fb: dict[str, np.ndarray],
                    triple: tuple[str, str, str]) -> float:
    sgn = 1.0
    for j, name in enumerate(triple):
        sgn *= DECOMP_SIGNS[j + 1][name]
    arr = fb[triple[0]] * fb[triple[1]] * fb[triple[2]]
    return sgn * float(np.sum(arr)) * sf.h ** 3
