"""Planar primitives: similarities, simple polygons, contacts and distances.

Points of the plane are plain Python ``complex`` numbers (``x + 1j*y``);
arrays of points are complex numpy arrays.  Two tolerances govern every
comparison: ``TOL_GEOM`` for coincidence/incidence of points and
``TOL_MARGIN`` for certification margins.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .errors import (DegenerateSource, GeometryError, InvalidPolygon,
                     NotContracting, NotIncident)

TOL_GEOM = 1e-9
TOL_MARGIN = 1e-7

PointLike = Union[complex, Sequence[float]]


def as_point(p: PointLike) -> complex:
    """Convert ``(x, y)`` pairs (or complex numbers) to a complex point."""
    if isinstance(p, (complex, float, int, np.number)):
        z = complex(p)
    else:
        x, y = p
        z = complex(float(x), float(y))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise GeometryError(f"non-finite point {p!r}")
    return z


def xy(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def normalize_angle(a: float) -> float:
    """Map an angle to the principal branch (-pi, pi]."""
    a = math.remainder(a, 2 * math.pi)
    if a <= -math.pi:
        a += 2 * math.pi
    return a


# ---------------------------------------------------------------------------
# Similarities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Similarity:
    """Orientation-preserving similarity ``z -> q e^{i alpha} (z - z0) + z0``.

    The triple ``(ratio, rotation, fixed)`` is the canonical representation;
    the affine coefficients ``a`` and ``b`` with ``S(z) = a z + b`` are
    derived from it.  The identity is ``Similarity(1.0, 0.0, 0j)``.
    """

    ratio: float
    rotation: float
    fixed: complex

    def __post_init__(self):
        if not (self.ratio > 0 and math.isfinite(self.ratio)):
            raise GeometryError(f"similarity ratio must be positive, got {self.ratio!r}")
        object.__setattr__(self, "rotation", normalize_angle(float(self.rotation)))
        object.__setattr__(self, "fixed", as_point(self.fixed))

    @classmethod
    def from_affine(cls, a: complex, b: complex, tol: float = TOL_GEOM) -> "Similarity":
        a = complex(a)
        b = complex(b)
        if abs(1 - a) <= 1e-15:
            if abs(b) > tol:
                raise GeometryError("translations have no fixed point")
            return cls(1.0, 0.0, 0j)
        return cls(abs(a), cmath.phase(a), b / (1 - a))

    @cached_property
    def a(self) -> complex:
        return self.ratio * cmath.exp(1j * self.rotation)

    @cached_property
    def b(self) -> complex:
        return self.fixed - self.a * self.fixed

    def __call__(self, z):
        return self.a * z + self.b

    def __matmul__(self, other: "Similarity") -> "Similarity":
        """Composition ``self @ other`` = ``self o other``."""
        return Similarity.from_affine(self.a * other.a, self.a * other.b + self.b)

    def inverse(self) -> "Similarity":
        ainv = 1 / self.a
        return Similarity.from_affine(ainv, -self.b * ainv)

    @property
    def is_contracting(self) -> bool:
        return self.ratio < 1

    def is_close(self, other: "Similarity", tol: float = TOL_GEOM) -> bool:
        return abs(self.a - other.a) <= tol and abs(self.b - other.b) <= tol


IDENTITY = Similarity(1.0, 0.0, 0j)


def similarity_from_two_points(src1: PointLike, src2: PointLike,
                               dst1: PointLike, dst2: PointLike,
                               tol: float = TOL_GEOM,
                               require_contraction: bool = True) -> Similarity:
    """The unique direct similarity with ``src1 -> dst1`` and ``src2 -> dst2``."""
    s1, s2, d1, d2 = map(as_point, (src1, src2, dst1, dst2))
    if abs(s2 - s1) <= tol:
        raise DegenerateSource(f"source points {s1} and {s2} coincide")
    a = (d2 - d1) / (s2 - s1)
    if require_contraction and abs(a) >= 1:
        raise NotContracting(f"ratio {abs(a)!r} >= 1")
    if abs(1 - a) <= 1e-15:
        return Similarity.from_affine(a, d1 - a * s1, tol=tol)
    return Similarity.from_affine(a, d1 - a * s1)


def compose_affine(a1, b1, a2, b2):
    """Affine coefficients of ``(a1, b1) o (a2, b2)``; works on arrays."""
    return a1 * a2, a1 * b2 + b1


# ---------------------------------------------------------------------------
# Segments
# ---------------------------------------------------------------------------

def _cross(u: complex, v: complex) -> float:
    return u.real * v.imag - u.imag * v.real


def point_segment_distance(p: complex, s0: complex, s1: complex) -> float:
    d = s1 - s0
    L2 = d.real * d.real + d.imag * d.imag
    if L2 == 0:
        return abs(p - s0)
    t = ((p - s0) * d.conjugate()).real / L2
    t = min(1.0, max(0.0, t))
    return abs(p - (s0 + t * d))


def _closest_on_segment(p: complex, s0: complex, s1: complex) -> complex:
    d = s1 - s0
    L2 = d.real * d.real + d.imag * d.imag
    if L2 == 0:
        return s0
    t = min(1.0, max(0.0, ((p - s0) * d.conjugate()).real / L2))
    return s0 + t * d


def segment_contact(p0: complex, p1: complex, q0: complex, q1: complex,
                    tol: float = TOL_GEOM):
    """Classify how two closed segments meet.

    Returns ``None`` (separated by more than ``tol``), ``("point", z)`` or
    ``("overlap", z0, z1)`` for collinear pieces sharing a stretch longer
    than ``tol``.
    """
    dp = p1 - p0
    dq = q1 - q0
    Lp = abs(dp)
    Lq = abs(dq)
    # collinear overlap
    if Lp > 0 and Lq > 0:
        h0 = abs(_cross(dp, q0 - p0)) / Lp
        h1 = abs(_cross(dp, q1 - p0)) / Lp
        if h0 <= tol and h1 <= tol:
            t0 = ((q0 - p0) * dp.conjugate()).real / (Lp * Lp)
            t1 = ((q1 - p0) * dp.conjugate()).real / (Lp * Lp)
            lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
            if (hi - lo) * Lp > tol:
                return ("overlap", p0 + lo * dp, p0 + hi * dp)
            if (hi - lo) * Lp >= -tol:
                t = 0.5 * (lo + hi)
                return ("point", p0 + min(1.0, max(0.0, t)) * dp)
            return None
    # proper crossing
    den = _cross(dp, dq)
    if den != 0:
        t = _cross(q0 - p0, dq) / den
        u = _cross(q0 - p0, dp) / den
        if 0 < t < 1 and 0 < u < 1:
            z = p0 + t * dp
            # only proper when far from all endpoints; otherwise fall through
            if min(abs(z - p0), abs(z - p1), abs(z - q0), abs(z - q1)) > tol:
                return ("point", z)
    # touching: nearest endpoint/segment pair
    cands = [
        (point_segment_distance(p0, q0, q1), p0, _closest_on_segment(p0, q0, q1)),
        (point_segment_distance(p1, q0, q1), p1, _closest_on_segment(p1, q0, q1)),
        (point_segment_distance(q0, p0, p1), q0, _closest_on_segment(q0, p0, p1)),
        (point_segment_distance(q1, p0, p1), q1, _closest_on_segment(q1, p0, p1)),
    ]
    d, a, b = min(cands, key=lambda c: c[0])
    if d <= tol:
        return ("point", 0.5 * (a + b))
    return None


def _segments_properly_cross(a0, a1, b0, b1, tol: float = 0.0) -> bool:
    """Strict crossing: each segment's endpoints lie more than ``tol`` on opposite sides."""
    la, lb = abs(a1 - a0), abs(b1 - b0)
    if la == 0 or lb == 0:
        return False
    o1 = _cross(a1 - a0, b0 - a0) / la
    o2 = _cross(a1 - a0, b1 - a0) / la
    o3 = _cross(b1 - b0, a0 - b0) / lb
    o4 = _cross(b1 - b0, a1 - b0) / lb
    return ((o1 < -tol and o2 > tol) or (o1 > tol and o2 < -tol)) and \
        ((o3 < -tol and o4 > tol) or (o3 > tol and o4 < -tol))


# ---------------------------------------------------------------------------
# Polygons
# ---------------------------------------------------------------------------

def signed_area(vertices: Sequence[complex]) -> float:
    s = 0.0
    n = len(vertices)
    for k in range(n):
        s += _cross(vertices[k], vertices[(k + 1) % n])
    return 0.5 * s


def _is_simple(vertices: Sequence[complex], tol: float) -> bool:
    n = len(vertices)
    edges = [(vertices[k], vertices[(k + 1) % n]) for k in range(n)]
    for i in range(n):
        if abs(edges[i][1] - edges[i][0]) <= tol:
            return False
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            c = segment_contact(*edges[i], *edges[j], tol=tol)
            if c is None:
                continue
            if not adjacent or c[0] == "overlap":
                return False
            shared = edges[i][1] if j == i + 1 else edges[i][0]
            if abs(c[1] - shared) > tol:
                return False
    return True


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with counterclockwise vertices."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidPolygon("a polygon needs at least 3 vertices")
        if not _is_simple(verts, TOL_GEOM):
            raise InvalidPolygon("polygon is not simple")
        if signed_area(verts) <= 0:
            raise InvalidPolygon("polygon vertices must be counterclockwise")

    @classmethod
    def unchecked(cls, vertices) -> "Polygon":
        """Build without validation (images of valid polygons under similarities)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "vertices", tuple(complex(v) for v in vertices))
        return obj

    @classmethod
    def from_points(cls, points) -> "Polygon":
        """Accept either orientation; reorders clockwise input."""
        verts = [as_point(p) for p in points]
        if signed_area(verts) < 0:
            verts = verts[::-1]
        return cls(tuple(verts))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=complex)

    def edges(self):
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    @cached_property
    def diameter(self) -> float:
        a = self.array
        return float(np.max(np.abs(a[:, None] - a[None, :])))

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @cached_property
    def centroid(self) -> complex:
        v = self.vertices
        n = len(v)
        A = signed_area(v)
        cx = cy = 0.0
        for k in range(n):
            p, q = v[k], v[(k + 1) % n]
            c = _cross(p, q)
            cx += (p.real + q.real) * c
            cy += (p.imag + q.imag) * c
        return complex(cx / (6 * A), cy / (6 * A))

    @cached_property
    def bbox(self) -> tuple:
        a = self.array
        return (a.real.min(), a.real.max(), a.imag.min(), a.imag.max())

    def image(self, s: Similarity) -> "Polygon":
        return Polygon.unchecked(s(self.array))

    def vertex_index(self, z: complex, tol: float = TOL_GEOM):
        d = np.abs(self.array - z)
        k = int(np.argmin(d))
        return k if d[k] <= tol else None

    def boundary_distance(self, z: complex) -> float:
        return min(point_segment_distance(z, a, b) for a, b in self.edges())

    def locate(self, z: complex, tol: float = TOL_GEOM) -> str:
        """Return ``"inside"``, ``"boundary"`` or ``"outside"``."""
        if self.boundary_distance(z) <= tol:
            return "boundary"
        return "inside" if _winding_inside(self.vertices, z) else "outside"

    def distance(self, z: complex) -> float:
        """Euclidean distance from ``z`` to the closed polygon region."""
        if _winding_inside(self.vertices, z):
            return 0.0
        return self.boundary_distance(z)


def _winding_inside(vertices, z: complex) -> bool:
    inside = False
    n = len(vertices)
    x, y = z.real, z.imag
    for k in range(n):
        a, b = vertices[k], vertices[(k + 1) % n]
        if (a.imag > y) != (b.imag > y):
            xc = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if xc > x:
                inside = not inside
    return inside


def points_in_polygon(vertices: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Vectorised even-odd test for many points against one polygon."""
    x = pts.real[:, None]
    y = pts.imag[:, None]
    a = vertices
    b = np.roll(vertices, -1)
    cond = (a.imag[None, :] > y) != (b.imag[None, :] > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = a.real[None, :] + (y - a.imag[None, :]) * (b.real - a.real)[None, :] / (b.imag - a.imag)[None, :]
    crossings = cond & (xc > x)
    return (np.count_nonzero(crossings, axis=1) % 2) == 1


def points_segments_distance(pts: np.ndarray, s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
    """Matrix of distances between points ``(k,)`` and segments ``(e,)``."""
    d = (s1 - s0)[None, :]
    L2 = (d * d.conjugate()).real
    rel = pts[:, None] - s0[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(L2 > 0, (rel * d.conjugate()).real / L2, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(rel - t * d)


def polygon_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Distance between two closed polygonal regions (0 when they meet)."""
    A1 = np.roll(A, -1)
    B1 = np.roll(B, -1)
    d = min(points_segments_distance(A, B, B1).min(),
            points_segments_distance(B, A, A1).min())
    if d == 0:
        return 0.0
    # proper crossings
    ea = (A1 - A)[:, None]
    eb = (B1 - B)[None, :]
    rel_b0 = B[None, :] - A[:, None]
    rel_b1 = B1[None, :] - A[:, None]
    o1 = (ea.conjugate() * rel_b0).imag
    o2 = (ea.conjugate() * rel_b1).imag
    rel_a0 = A[:, None] - B[None, :]
    rel_a1 = A1[:, None] - B[None, :]
    o3 = (eb.conjugate() * rel_a0).imag
    o4 = (eb.conjugate() * rel_a1).imag
    if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
        return 0.0
    if points_in_polygon(B, A[:1])[0] or points_in_polygon(A, B[:1])[0]:
        return 0.0
    return float(d)


def angle_at_vertex(poly: Polygon, v: int) -> float:
    """Interior angle of ``poly`` at vertex index ``v`` (in (0, 2*pi))."""
    n = poly.n
    if not 0 <= v < n:
        raise IndexError(v)
    z = poly.vertices[v]
    nxt = poly.vertices[(v + 1) % n]
    prv = poly.vertices[(v - 1) % n]
    ang = cmath.phase((prv - z) / (nxt - z))
    if ang <= 0:
        ang += 2 * math.pi
    return ang


def vertex_wedge(poly: Polygon, v: int) -> tuple[float, float]:
    """Direction interval ``(start, start + angle)`` covered by ``poly`` at vertex ``v``."""
    z = poly.vertices[v]
    nxt = poly.vertices[(v + 1) % poly.n]
    start = cmath.phase(nxt - z)
    return start, start + angle_at_vertex(poly, v)


# ---------------------------------------------------------------------------
# Contacts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disjoint:
    margin: float
    kind = "Disjoint"


@dataclass(frozen=True)
class SinglePoint:
    point: complex
    shared_vertex: bool
    kind = "SinglePoint"


@dataclass(frozen=True)
class Violation:
    description: str
    kind = "Violation"


ContactResult = Union[Disjoint, SinglePoint, Violation]


def cluster_points(points, tol: float = TOL_GEOM) -> list:
    """Greedy clustering of points closer than ``tol``; keeps first representative."""
    reps: list = []
    for p in points:
        if all(abs(p - r) > tol for r in reps):
            reps.append(p)
    return reps


def polygon_pair_contact(P1: Polygon, P2: Polygon, tol: float = TOL_GEOM) -> ContactResult:
    """Classify ``P1 & P2`` as disjoint, a single point, or a violation of D2.

    ``SinglePoint.shared_vertex`` tells whether the point is a vertex of
    both polygons; a single point lying inside an edge is reported as a
    ``SinglePoint`` with ``shared_vertex=False``.
    """
    bx1, by1 = P1.bbox, P2.bbox
    gap = max(bx1[0] - by1[1], by1[0] - bx1[1], bx1[2] - by1[3], by1[2] - bx1[3])
    if gap > tol:
        return Disjoint(polygon_distance(P1.array, P2.array))

    points = []
    for a0, a1 in P1.edges():
        for b0, b1 in P2.edges():
            c = segment_contact(a0, a1, b0, b1, tol)
            if c is None:
                continue
            if c[0] == "overlap":
                return Violation(f"shared segment from {c[1]} to {c[2]}")
            points.append(c[1])
    for v in P1.vertices:
        if P2.locate(v, tol) == "inside":
            return Violation(f"vertex {v} of the first polygon lies inside the second")
    for v in P2.vertices:
        if P1.locate(v, tol) == "inside":
            return Violation(f"vertex {v} of the second polygon lies inside the first")
    points = cluster_points(points, tol)
    if not points:
        return Disjoint(polygon_distance(P1.array, P2.array))
    if len(points) > 1:
        return Violation(f"{len(points)} contact points")
    p = points[0]
    k1 = P1.vertex_index(p, tol)
    k2 = P2.vertex_index(p, tol)
    if k1 is not None and k2 is not None:
        p = P1.vertices[k1]
        return SinglePoint(p, True)
    return SinglePoint(p, False)


def min_angle_between_incident_sides(polys: Sequence[Polygon], shared: complex,
                                     tol: float = TOL_GEOM) -> float:
    """Smallest angle between sides of distinct polygons meeting at ``shared``."""
    shared = as_point(shared)
    owners = []
    for poly in polys:
        k = poly.vertex_index(shared, tol)
        if k is not None:
            n = poly.n
            dirs = [poly.vertices[(k + 1) % n] - poly.vertices[k],
                    poly.vertices[(k - 1) % n] - poly.vertices[k]]
            owners.append(dirs)
    if len(owners) < 2:
        raise NotIncident(f"{shared} is a vertex of fewer than two polygons")
    best = math.pi
    for i in range(len(owners)):
        for j in range(i + 1, len(owners)):
            for u in owners[i]:
                for w in owners[j]:
                    best = min(best, abs(cmath.phase(w / u)))
    return best


# ---------------------------------------------------------------------------
# Point sets
# ---------------------------------------------------------------------------

def _as_xy(points) -> np.ndarray:
    z = np.asarray(points, dtype=complex).ravel()
    return np.column_stack([z.real, z.imag])


def directed_hausdorff(A, B) -> float:
    tree = cKDTree(_as_xy(B))
    d, _ = tree.query(_as_xy(A))
    return float(np.max(d))


def hausdorff_distance(A, B) -> float:
    """Hausdorff distance between two finite planar point sets."""
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def densify_polyline(points, step: float) -> np.ndarray:
    pts = np.asarray(points, dtype=complex)
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(math.ceil(abs(b - a) / step)))
        out.append(a + (b - a) * np.arange(1, k + 1) / k)
    return np.concatenate(out)


def polyline_hausdorff(L1, L2, step: float = 1e-3) -> float:
    """Hausdorff distance of two polylines, exact up to ``step / 2``."""
    return hausdorff_distance(densify_polyline(L1, step), densify_polyline(L2, step))


def convex_hull(points) -> np.ndarray:
    """Counterclockwise hull vertices of a complex point array."""
    xyp = _as_xy(points)
    hull = ConvexHull(xyp)
    idx = hull.vertices  # counterclockwise for 2-D input
    return xyp[idx, 0] + 1j * xyp[idx, 1]
