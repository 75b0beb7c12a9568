"""Small exact-geometry helpers for convex polygonal cells.

All polygons are (m, 2) float arrays with counter-clockwise vertex order.
Cells produced by the constructions are convex with at most a handful of
vertices, so the routines here favour clarity over asymptotics.
"""

from __future__ import annotations

import numpy as np


def poly_area(poly) -> float:
    """Signed shoelace area (positive for ccw order)."""
    n = len(poly)
    acc = 0.0
    xp, yp = float(poly[n - 1][0]), float(poly[n - 1][1])
    for i in range(n):
        x, y = float(poly[i][0]), float(poly[i][1])
        acc += xp * y - x * yp
        xp, yp = x, y
    return 0.5 * acc


def ensure_ccw(poly: np.ndarray) -> np.ndarray:
    return poly if poly_area(poly) >= 0.0 else poly[::-1].copy()


def poly_centroid(poly) -> np.ndarray:
    """Centroid; exact shoelace moments."""
    n = len(poly)
    a = cx = cy = 0.0
    xp, yp = float(poly[n - 1][0]), float(poly[n - 1][1])
    for i in range(n):
        x, y = float(poly[i][0]), float(poly[i][1])
        cross = xp * y - x * yp
        a += cross
        cx += (xp + x) * cross
        cy += (yp + y) * cross
        xp, yp = x, y
    if abs(a) < 1e-300:
        return np.asarray(poly, float).mean(axis=0)
    return np.array([cx / (3.0 * a), cy / (3.0 * a)])


def poly_first_moment(poly: np.ndarray) -> tuple[float, float]:
    """(integral of x dA, integral of y dA) over the polygon."""
    c = poly_centroid(poly)
    a = abs(poly_area(poly))
    return a * c[0], a * c[1]


def clip_halfplane(poly: np.ndarray, a: float, b: float, c: float,
                   tol: float = 1e-14) -> np.ndarray:
    """Clip a convex polygon to the half-plane a*x + b*y <= c."""
    if len(poly) == 0:
        return poly
    vals = a * poly[:, 0] + b * poly[:, 1] - c
    if np.all(vals <= tol):
        return poly
    if np.all(vals >= -tol):
        return poly[:0]
    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        vp, vq = vals[i], vals[(i + 1) % m]
        if vp <= tol:
            out.append(p)
        if (vp < -tol and vq > tol) or (vp > tol and vq < -tol):
            s = vp / (vp - vq)
            out.append(p + s * (q - p))
    return _dedup(np.asarray(out))


def _dedup(poly: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    if len(poly) < 2:
        return poly
    scale = max(1.0, np.max(np.abs(poly)))
    keep = [0]
    for i in range(1, len(poly)):
        if np.max(np.abs(poly[i] - poly[keep[-1]])) > tol * scale:
            keep.append(i)
    if len(keep) > 1 and np.max(np.abs(poly[keep[-1]] - poly[keep[0]])) <= tol * scale:
        keep.pop()
    return poly[keep]


def clip_band(poly: np.ndarray, axis: int, lo: float, hi: float) -> np.ndarray:
    """Clip to lo <= coordinate[axis] <= hi."""
    a, b = (1.0, 0.0) if axis == 0 else (0.0, 1.0)
    out = clip_halfplane(poly, a, b, hi)
    out = clip_halfplane(out, -a, -b, -lo)
    return out


def chord(poly: np.ndarray, s: float, tol: float = 1e-13) -> tuple[float, float] | None:
    """Intersection of the vertical line x = s with a convex polygon.

    Returns the (t_lo, t_hi) interval of the chord, or None when the line
    misses the polygon.
    """
    ts = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        dp, dq = p[0] - s, q[0] - s
        if abs(dp) <= tol:
            ts.append(p[1])
        if (dp < -tol and dq > tol) or (dp > tol and dq < -tol):
            lam = dp / (dp - dq)
            ts.append(p[1] + lam * (q[1] - p[1]))
    if not ts:
        return None
    return min(ts), max(ts)


def point_in_convex(poly: np.ndarray, p, tol: float = 1e-12) -> bool:
    """Point membership with inclusive boundaries (ccw polygon).

    ``tol`` is a distance: points within ``tol`` outside an edge still
    count as inside, independently of the edge length.
    """
    m = len(poly)
    px, py = p
    for i in range(m):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % m]
        ex, ey = bx - ax, by - ay
        ln = np.hypot(ex, ey)
        if ln < 1e-300:
            continue
        if ex * (py - ay) - ey * (px - ax) < -tol * ln:
            return False
    return True


# --- Segment pairing along shared lines -----------------------------------

import math as _math


class SegmentSet:
    """Collection of oriented boundary segments for interface pairing.

    Each segment knows which side of its line the owning cell lies on, so
    overlapping segments with opposite sides form an interface.
    """

    def __init__(self):
        self.rows = []  # (phi, off, t1, t2, side, payload)

    def add(self, p, q, interior_point, payload) -> None:
        px, py = float(p[0]), float(p[1])
        qx, qy = float(q[0]), float(q[1])
        dx, dy = qx - px, qy - py
        ln = _math.hypot(dx, dy)
        if ln < 1e-15:
            return
        dx, dy = dx / ln, dy / ln
        if dx < 0 or (dx == 0 and dy < 0):
            dx, dy = -dx, -dy
        phi = _math.atan2(dy, dx)  # in (-pi/2, pi/2]
        off = -dy * px + dx * py
        t1 = dx * px + dy * py
        t2 = dx * qx + dy * qy
        if t1 > t2:
            t1, t2 = t2, t1
        cx, cy = float(interior_point[0]), float(interior_point[1])
        side = 1 if (-dy * cx + dx * cy) - off > 0 else -1
        self.rows.append((phi, off, t1, t2, side, payload))

    def add_polygon(self, poly: np.ndarray, payload) -> None:
        pts = [(float(v[0]), float(v[1])) for v in poly]
        m = len(pts)
        cx = sum(v[0] for v in pts) / m
        cy = sum(v[1] for v in pts) / m
        for i in range(m):
            self.add(pts[i], pts[(i + 1) % m], (cx, cy), payload)

    def interfaces(self, tol_angle: float = 1e-9, tol_off: float = 1e-10,
                   min_len: float = 1e-13):
        """Yield (payload_a, payload_b, p_start, p_end, length) overlaps.

        Segments are grouped by their carrying line (tolerance-merged) and
        opposite-side pairs are intersected with an interval sweep;
        hanging-node layouts produce one row per overlapping piece.
        """
        if not self.rows:
            return
        rows = sorted(self.rows, key=lambda r: (r[0], r[1]))
        n = len(rows)
        start = 0
        while start < n:
            stop = start + 1
            while (stop < n and abs(rows[stop][0] - rows[stop - 1][0]) < tol_angle
                   and abs(rows[stop][1] - rows[stop - 1][1]) < tol_off):
                stop += 1
            grp = rows[start:stop]
            start = stop
            plus = sorted((r for r in grp if r[4] > 0), key=lambda r: r[2])
            minus = sorted((r for r in grp if r[4] < 0), key=lambda r: r[2])
            if not plus or not minus:
                continue
            phi, off = grp[0][0], grp[0][1]
            d = np.array([np.cos(phi), np.sin(phi)])
            nrm = np.array([-d[1], d[0]])
            origin = off * nrm
            k0 = 0
            for ra in plus:
                while k0 < len(minus) and minus[k0][3] <= ra[2] + min_len:
                    k0 += 1
                k = k0
                while k < len(minus) and minus[k][2] < ra[3] - min_len:
                    rb = minus[k]
                    lo = max(ra[2], rb[2])
                    hi = min(ra[3], rb[3])
                    if hi - lo > min_len:
                        yield (ra[5], rb[5], origin + lo * d, origin + hi * d,
                               hi - lo)
                    k += 1
