"""Deformations of contractible systems and the constants bounding them.

Lengths entering the constants (``rho0``, ``rho1``, ``rho2``, ``delta``,
``delta1``, ``delta2``) refer to the normalized system with ``diam P = 1``;
functions taking a ``delta`` expect it in that frame.  Use
:func:`normalized_delta` to convert a spec's displacement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .attractor import Address, dendrite_check, eval_address
from .cyclic import (check_parameter_matching, find_cyclic_vertices,
                     order_one_refinement, piece_vertex_points, subordinate_map)
from .errors import (AssumptionViolated, BoundViolated, HolderViolated,
                     InconsistentSpec, NotBijective, NotContractible,
                     PreconditionFailed, RouteMismatch, StripsOverlap)
from .geometry import (TOL_GEOM, TOL_MARGIN, Polygon, as_point, densify_polyline,
                       min_angle_between_incident_sides, normalize_angle,
                       points_in_polygon, points_segments_distance,
                       signed_area, similarity_from_two_points, vertex_wedge)
from .system import (CONTRACTIBLE, PolygonalSystem, _piece_inside, compose_word,
                     is_prefix, pairwise_contacts, piece_arrays, refine, validate)

PRINTED = "printed"
QMIN = "q_min"


# ---------------------------------------------------------------------------
# Deformation specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeformationSpec:
    """Vertex map ``f``: ``sources[k] -> targets[k]``; other points stay fixed."""

    sources: tuple
    targets: tuple

    @classmethod
    def from_pairs(cls, pairs, tol: float = TOL_GEOM) -> "DeformationSpec":
        src = [as_point(p) for p, _ in pairs]
        dst = [as_point(q) for _, q in pairs]
        for arr, what in ((src, "sources"), (dst, "targets")):
            if len(arr) > 1:
                xy = np.column_stack([np.real(arr), np.imag(arr)])
                if cKDTree(xy).query_pairs(tol):
                    raise NotBijective(f"two {what} coincide within {tol}")
        return cls(tuple(src), tuple(dst))

    @classmethod
    def identity(cls) -> "DeformationSpec":
        return cls((), ())

    @classmethod
    def from_json(cls, data: dict) -> "DeformationSpec":
        pairs = [(d["vertex"], d["to"]) for d in data.get("displacements", [])]
        return cls.from_pairs(pairs)

    def to_json(self) -> dict:
        return {"displacements": [{"vertex": [z.real, z.imag], "to": [w.real, w.imag]}
                                  for z, w in zip(self.sources, self.targets)]}

    @property
    def delta(self) -> float:
        """Maximal displacement ``max |f(x) - x|``."""
        return max((abs(w - z) for z, w in zip(self.sources, self.targets)), default=0.0)

    def __call__(self, z, tol: float = 1e-7) -> complex:
        z = complex(z)
        best, k = math.inf, -1
        for i, s in enumerate(self.sources):
            d = abs(s - z)
            if d < best:
                best, k = d, i
        if k >= 0 and best <= tol:
            return self.targets[k]
        return z

    def apply(self, pts) -> np.ndarray:
        return np.array([self(z) for z in np.asarray(pts, dtype=complex).ravel()])


def normalized_delta(base: PolygonalSystem, spec: DeformationSpec) -> float:
    return spec.delta / base.diameter


def build_deformed_system(base: PolygonalSystem, spec: DeformationSpec,
                          tol: float = TOL_GEOM) -> PolygonalSystem:
    """The system ``S'`` with ``f(S_k(x)) = S'_k(f(x))`` on all vertices.

    ``S'_k`` is fixed by two vertex pairs; all other vertices must agree.
    """
    V = base.base.array
    Vp = spec.apply(V)
    xy = np.column_stack([Vp.real, Vp.imag])
    if cKDTree(xy).query_pairs(tol):
        raise NotBijective("two vertices of P have the same image")
    Pp = Polygon(tuple(complex(z) for z in Vp))
    maps = []
    fixed_p = np.array_equal(Vp, V)
    for k, s in enumerate(base.maps):
        img = spec.apply(s(V))
        if fixed_p and np.array_equal(img, s(V)):
            maps.append(s)      # untouched piece keeps its map bit for bit
            continue
        sk = similarity_from_two_points(Vp[0], Vp[1], img[0], img[1])
        err = np.abs(sk(Vp) - img)
        worst = int(np.argmax(err))
        if err[worst] > tol:
            raise InconsistentSpec(k, worst, float(err[worst]))
        maps.append(sk)
    return PolygonalSystem(Pp, tuple(maps), base.labels)


@dataclass
class DeformationReport:
    a: bool
    b: bool
    c: bool
    bibj: bool
    delta: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.a and self.b and self.c and self.bibj


def validate_deformation(base: PolygonalSystem, spec: DeformationSpec,
                         deformed: Optional[PolygonalSystem] = None,
                         budget: Optional[float] = None, depth: int = 3,
                         tol: float = TOL_GEOM) -> DeformationReport:
    """Check (a) orientation and simplicity of ``P'``, (b) the budget, (c) and
    the vertex identities ``S'_i(f(A)) = S'_j(f(A'))`` up to ``depth``."""
    details = {}
    Vp = spec.apply(base.base.array)
    a = bool(signed_area(list(Vp)) > 0)
    if a:
        try:
            Polygon(tuple(complex(z) for z in Vp))
        except Exception as exc:  # noqa: BLE001 - any geometric failure breaks (a)
            a = False
            details["a"] = str(exc)
    else:
        details["a"] = "cyclic order of the vertices of P is not preserved"
    delta = spec.delta
    b = budget is None or delta < budget
    if not b:
        details["b"] = f"delta {delta!r} exceeds budget {budget!r}"
    c = bibj = False
    if deformed is None:
        try:
            deformed = build_deformed_system(base, spec, tol)
        except Exception as exc:  # noqa: BLE001
            details["c"] = str(exc)
    if deformed is not None:
        worst = 0.0
        for s, sp in zip(base.maps, deformed.maps):
            for A in base.base.vertices:
                worst = max(worst, abs(spec(s(A)) - sp(spec(A))))
        c = worst <= tol
        details["c_error"] = worst
        try:
            ConjugatingMap(base, deformed, depth, tol=max(tol, 1e-9))
            bibj = True
        except RouteMismatch as exc:
            details["bibj"] = str(exc)
    return DeformationReport(a, b, c, bibj, delta, details)


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometricConstants:
    rho0: float
    rho1: float
    rho2: float
    alpha0: float
    q_min: float
    q_max: float
    scale: float
    rho0_vertex: float
    rho0_disjoint: float
    depth: int

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in
                ("rho0", "rho1", "rho2", "alpha0", "q_min", "q_max", "scale",
                 "rho0_vertex", "rho0_disjoint", "depth")}


def _point_polygon_distances(B: complex, polys: np.ndarray) -> np.ndarray:
    """Distance from ``B`` to each polygon row of ``polys`` (0 inside)."""
    s0 = polys
    s1 = np.roll(polys, -1, axis=1)
    d = s1 - s0
    L2 = (d * d.conjugate()).real
    rel = B - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(L2 > 0, (rel * d.conjugate()).real / L2, 0.0)
    t = np.clip(t, 0.0, 1.0)
    dist = np.abs(rel - t * d).min(axis=1)
    # winding test: crossing count of a ray to the right
    y0, y1 = s0.imag, s1.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = s0.real + (B.imag - y0) * (s1.real - s0.real) / (y1 - y0)
    cross = ((y0 > B.imag) != (y1 > B.imag)) & (xc > B.real)
    inside = (cross.sum(axis=1) % 2) == 1
    return np.where(inside, 0.0, dist)


def branch_routes(system: PolygonalSystem, depth: int = 3, tol: float = TOL_GEOM) -> dict:
    """Routes ``(j_l, A_l)`` at every piece vertex with children ``j_l i_l``."""
    cyc = {c.vertex: c for c in find_cyclic_vertices(system, tol=tol)}
    sub = subordinate_map(system, depth, list(cyc.values()), tol)
    out = {}
    for B, routes in sub.items():
        out[B] = [(r.word, r.word + cyc[r.cyclic].witness) for r in routes]
    return out


def geometric_constants(base: PolygonalSystem, depth: int = 3, route_depth: int = 3,
                        tol: float = TOL_GEOM) -> GeometricConstants:
    """``rho0``, ``rho1``, ``rho2`` and ``alpha0`` of the normalized system.

    ``rho1`` is the distance from each vertex ``B`` to the level-``depth``
    pieces outside the branch pieces ``P_{j_l i_l}`` (a lower bound for the
    exact radius, which only grows with depth); ``rho2`` is the largest
    vertex distance of the pieces ``P_{j_l}`` from ``B``.
    """
    if validate(base, tol).classification != CONTRACTIBLE:
        raise NotContractible("constants are defined for contractible systems")
    N, scale = base.normalized()
    pieces = [p.array for p in N.pieces]
    # rho0 (i): vertices of P against pieces not containing them
    r_vertex = math.inf
    for A in N.base.vertices:
        for arr in pieces:
            d = _point_polygon_distances(A, arr[None, :])[0]
            if d > tol:
                r_vertex = min(r_vertex, d)
    # rho0 (ii): disjoint pieces
    from .geometry import polygon_distance
    contacts = pairwise_contacts(N.pieces, tol)
    r_disj = math.inf
    for i in range(N.m):
        for j in range(i + 1, N.m):
            if (i, j) not in contacts:
                r_disj = min(r_disj, polygon_distance(pieces[i], pieces[j]))
    rho0 = min(r_vertex, r_disj)
    # alpha0: shared vertices of level-1 pieces
    alpha0 = math.pi
    for c in contacts.values():
        alpha0 = min(alpha0, min_angle_between_incident_sides(N.pieces, c.point, tol))
    routes = branch_routes(N, route_depth, tol)
    longest = max(len(ji) for rs in routes.values() for _, ji in rs)
    n = max(depth, longest)
    arr = piece_arrays(N, n)
    from .system import words
    ws = words(N.m, n)
    rho1, rho2 = math.inf, 0.0
    for B, rs in routes.items():
        for j, _ in rs:
            Pj = compose_word(N.maps, j)(N.base.array)
            rho2 = max(rho2, float(np.abs(Pj - B).max()))
        keep = np.array([not any(is_prefix(ji, w) for _, ji in rs) for w in ws])
        d = _point_polygon_distances(B, arr[keep])
        rho1 = min(rho1, float(d.min()))
    if not (0 < rho1 < rho2):
        raise PreconditionFailed(f"rho1 = {rho1!r} and rho2 = {rho2!r} violate 0 < rho1 < rho2")
    return GeometricConstants(float(rho0), rho1, rho2, float(alpha0), N.q_min, N.q_max, scale,
                              float(r_vertex), float(r_disj), n)


@dataclass(frozen=True)
class DerivedConstants:
    delta: float
    C_alpha: float
    C_Delta: float
    C_K: float
    C_lambda: float
    delta1: float
    delta2: float
    beta: Optional[float]
    variant: str

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in
                ("delta", "C_alpha", "C_Delta", "C_K", "C_lambda", "delta1", "delta2",
                 "beta", "variant")}


def c_lambda(q_min: float, q_max: float, variant: str = PRINTED) -> float:
    q = q_max if variant == PRINTED else q_min
    return 2.1 * (1 + 1 / q) / (math.log(3 + q_max) - math.log(3 * q_max + 1))


def structural_constants(q_min: float, q_max: float, variant: str = PRINTED) -> dict:
    C_alpha = 2.1 * (1 + 1 / q_min)
    C_Delta = 14 + 2 * C_alpha
    C_K = 2 * C_Delta / (1 - q_max)
    return {"C_alpha": C_alpha, "C_Delta": C_Delta, "C_K": C_K,
            "C_lambda": c_lambda(q_min, q_max, variant)}


def holder_exponent(base: PolygonalSystem, deformed: PolygonalSystem) -> float:
    """``beta = min_k log q'_k / log q_k``."""
    return min(math.log(sp.ratio) / math.log(s.ratio) for s, sp in zip(base.maps, deformed.maps))


def derived_constants(base: PolygonalSystem, delta: float, variant: str = PRINTED,
                      deformed: Optional[PolygonalSystem] = None) -> DerivedConstants:
    """Plug-in constants for a ``delta``-deformation (normalized ``delta``)."""
    q_min, q_max = base.q_min, base.q_max
    if not delta < q_min / 8:
        raise AssumptionViolated("delta < q_min/8", f"(delta = {delta!r})")
    if not delta < (1 - q_max) / 8:
        raise AssumptionViolated("delta < (1-q_max)/8", f"(delta = {delta!r})")
    c = structural_constants(q_min, q_max, variant)
    delta1 = 8 * delta / (1 + 3 * q_max)
    delta2 = (c["C_K"] + 1) * delta
    beta = holder_exponent(base, deformed) if deformed is not None else None
    return DerivedConstants(delta, c["C_alpha"], c["C_Delta"], c["C_K"], c["C_lambda"],
                            delta1, delta2, beta, variant)


def refinement_factor(q_min: float) -> float:
    return 12 + 4.2 * (1 + 1 / q_min)


def delta_bounds(q_min, q_max, rho0, rho1, rho2, alpha0, C_K, C_lambda) -> list:
    """The six upper bounds for ``delta``, in order."""
    return [
        q_min / 8,
        (1 - q_max) / 8,
        rho0 / (2 * (C_K + 1)),
        rho1 / (4 * (C_K + 1)),
        (1 - rho2) / (4 * (C_K + 1)),
        alpha0 / (2.1 * (C_K + 1) / rho1 + C_lambda * math.log((1 + 3 * rho2) / (3 * rho1))),
    ]


@dataclass
class DeltaMaxReport:
    bounds: list
    binding: int            # 1-based index of the smallest bound
    delta_max: float        # normalized frame
    refinement: int = 1
    M: Optional[float] = None
    constants: Optional[GeometricConstants] = None
    variant: str = PRINTED

    @property
    def unrefined(self) -> float:
        return min(self.bounds)

    def to_json(self) -> dict:
        return {"bounds": self.bounds, "binding": self.binding, "delta_max": self.delta_max,
                "refinement": self.refinement, "M": self.M, "variant": self.variant,
                "constants": self.constants.to_json() if self.constants else None}


def delta_max(base: PolygonalSystem, variant: str = PRINTED, depth: int = 3) -> DeltaMaxReport:
    """Admissible deformation size from the six inequalities.

    Systems with cyclic vertices of higher order are refined first and the
    result is divided by ``M = 12 + 4.2 (1 + 1/q_min)``.
    """
    n = order_one_refinement(base)
    sys_n = refine(base, n) if n > 1 else base
    geo = geometric_constants(sys_n, depth=max(depth, n))
    c = structural_constants(geo.q_min, geo.q_max, variant)
    bounds = delta_bounds(geo.q_min, geo.q_max, geo.rho0, geo.rho1, geo.rho2, geo.alpha0,
                          c["C_K"], c["C_lambda"])
    k = int(np.argmin(bounds))
    dm = bounds[k]
    M = None
    if n > 1:
        M = refinement_factor(base.q_min)
        dm = dm / M
    return DeltaMaxReport(bounds, k + 1, dm, n, M, geo, variant)


# ---------------------------------------------------------------------------
# Perturbation bounds
# ---------------------------------------------------------------------------

@dataclass
class MapBounds:
    k: int
    q: float
    q_new: float
    d_alpha: float
    checks: dict        # name -> (value, bound)

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.checks.values())


def _holds(value, bound, delta):
    return value < bound if delta > 0 else value <= bound


def perturbation_bounds_check(base: PolygonalSystem, deformed: PolygonalSystem,
                              delta: float, strict: bool = True) -> list:
    """Ratio and angle bounds for every map (normalized ``delta``)."""
    C_alpha = 2.1 * (1 + 1 / base.q_min)
    out = []
    for k, (s, sp) in enumerate(zip(base.maps, deformed.maps)):
        q, qp = s.ratio, sp.ratio
        da = abs(normalize_angle(sp.rotation - s.rotation))
        dq = abs(qp - q)
        lo = (q - 2 * delta) / (1 + 2 * delta)
        hi = (q + 2 * delta) / (1 - 2 * delta)
        asin_bound = math.asin(min(1.0, 2 * delta)) + math.asin(min(1.0, 2 * delta / q))
        checks = {
            "q_lower": (lo, qp, lo <= qp),
            "q_upper": (qp, hi, qp <= hi),
            "alpha_asin": (da, asin_bound, da <= asin_bound),
            "dq": (dq, 2 * delta * (1 + q) / (1 - 2 * delta), _holds(dq, 2 * delta * (1 + q) / (1 - 2 * delta), delta)),
            "dq_6delta": (dq, 6 * delta, _holds(dq, 6 * delta, delta)),
            "dalpha": (da, C_alpha * delta, _holds(da, C_alpha * delta, delta)),
        }
        mb = MapBounds(k, q, qp, da, checks)
        if strict and not mb.passed:
            name = next(n for n, (_, _, ok) in checks.items() if not ok)
            v, bd, _ = checks[name]
            raise BoundViolated(k, name, v, bd)
        out.append(mb)
    return out


def map_displacement_check(base: PolygonalSystem, deformed: PolygonalSystem,
                           delta: float, grid: int = 50) -> tuple:
    """``max |S'_k(z) - S_k(z)| / diam`` on a grid of ``V_{delta1}(P)`` against ``C_Delta delta``."""
    d = derived_constants(base, delta)
    diam = base.diameter
    x0, x1, y0, y1 = base.base.bbox
    r = d.delta1 * diam
    xs = np.linspace(x0 - r, x1 + r, grid)
    ys = np.linspace(y0 - r, y1 + r, grid)
    Z = (xs[None, :] + 1j * ys[:, None]).ravel()
    P = base.base.array
    inside = points_in_polygon(P, Z)
    dist = points_segments_distance(Z, P, np.roll(P, -1)).min(axis=1)
    Z = Z[inside | (dist < r)]
    worst = 0.0
    for s, sp in zip(base.maps, deformed.maps):
        worst = max(worst, float(np.abs(sp(Z) - s(Z)).max()) / diam)
    return worst, d.C_Delta * delta, Z.size


def address_stability_check(base: PolygonalSystem, deformed: PolygonalSystem, delta: float,
                            rng: np.random.Generator, n: int = 200, max_len: int = 6) -> tuple:
    """``max |pi'(a) - pi(a)| / diam`` over random eventually periodic addresses."""
    C_K = structural_constants(base.q_min, base.q_max)["C_K"]
    worst = 0.0
    for _ in range(n):
        pre = tuple(int(x) for x in rng.integers(0, base.m, rng.integers(0, max_len + 1)))
        per = tuple(int(x) for x in rng.integers(0, base.m, rng.integers(1, 4)))
        a = Address(pre, per)
        z, _ = eval_address(base, a)
        zp, _ = eval_address(deformed, a)
        worst = max(worst, abs(zp - z) / base.diameter)
    return worst, C_K * delta


def refinement_displacement(base: PolygonalSystem, deformed: PolygonalSystem, n: int) -> float:
    """Largest vertex displacement between the level-``n`` pieces (normalized)."""
    return float(np.abs(piece_arrays(deformed, n) - piece_arrays(base, n)).max()) / base.diameter


@dataclass
class NeighborhoodVerdict:
    passed: bool
    delta1: float
    margins: list
    witness: Optional[tuple] = None


def invariant_neighborhood_check(base: PolygonalSystem, deformed: PolygonalSystem,
                                 delta: float, delta1: Optional[float] = None,
                                 tol_margin: float = 0.0) -> NeighborhoodVerdict:
    """Certify ``S'_k(U) inside U`` for ``U = V_{delta1}(P)``.

    Distance to ``P`` is 1-Lipschitz and maximal on the boundary of
    ``S'_k(P)``, so boundary samples at spacing ``h`` overestimate the excess
    by at most ``h/2``; pieces inside ``P`` have zero excess.
    """
    diam = base.diameter
    if delta1 is None:
        delta1 = derived_constants(base, delta).delta1
    r = delta1 * diam
    P = base.base
    margins = []
    for k, sp in enumerate(deformed.maps):
        piece = Polygon.unchecked(sp(P.array))
        if _piece_inside(piece, P, TOL_GEOM) is None:
            excess, where = 0.0, None
        else:
            h = max(r * (1 - sp.ratio) / 8, 1e-6 * diam)
            pts = densify_polyline(np.append(piece.array, piece.array[0]), h)
            inside = points_in_polygon(P.array, pts)
            dist = points_segments_distance(pts, P.array, np.roll(P.array, -1)).min(axis=1)
            dist = np.where(inside, 0.0, dist)
            i = int(np.argmax(dist))
            excess, where = float(dist[i]) + h / 2, complex(pts[i])
        margin = r - sp.ratio * r - excess
        margins.append(margin / diam)
        if margin < tol_margin * diam:
            return NeighborhoodVerdict(False, delta1, margins, (k, where))
    return NeighborhoodVerdict(True, delta1, margins)


# ---------------------------------------------------------------------------
# Log-strip certification
# ---------------------------------------------------------------------------

@dataclass
class StripResult:
    separated: bool
    margin: float
    pair: Optional[tuple] = None
    slabs: list = field(default_factory=list)

    @property
    def kind(self) -> str:
        return "Separated" if self.separated else "Fails"


def branch_wedges(base: PolygonalSystem, B: complex, routes=None, tol: float = 1e-7) -> list:
    """Angular sectors ``(theta-, theta+)`` of the branch pieces ``P_{j_l}`` at ``B``."""
    B = complex(B)
    if routes is None:
        allr = branch_routes(base)
        key = min(allr, key=lambda z: abs(z - B))
        if abs(key - B) > tol:
            raise PreconditionFailed(f"{B} is not a piece vertex")
        routes = allr[key]
    out = []
    for j, _ in routes:
        poly = Polygon.unchecked(compose_word(base.maps, j)(base.base.array))
        k = poly.vertex_index(B, tol)
        if k is None:
            raise PreconditionFailed(f"{B} is not a vertex of piece {j}")
        out.append((j, vertex_wedge(poly, k)))
    return out


def log_strip_check(base: PolygonalSystem, B: complex, lam: float,
                    geo: GeometricConstants, derived: DerivedConstants,
                    routes=None, strict: bool = False) -> StripResult:
    """Disjointness of the slanted half-strips of the branches at ``B``.

    In ``w = log(z - B)`` each branch lies in
    ``theta-_l - w0 - max(lam rho) <= phi - lam rho <= theta+_l + w0 - min(lam rho)``
    with ``w0 = 1.05 delta2 / rho1`` and ``rho`` over
    ``[log(rho1 - delta2), log(rho2 + delta2)]``.  The margin is the smaller
    of the least gap between cyclically consecutive slabs and
    ``alpha0 - (2.1 delta2/rho1 + |lam| log((rho2+delta2)/(rho1-delta2)))``.
    """
    d2 = derived.delta2
    r1, r2 = geo.rho1, geo.rho2

    def fail(pair, margin=-math.inf):
        if strict:
            raise StripsOverlap(f"branches {pair} overlap (margin {margin:.3g})")
        return StripResult(False, margin, pair)

    if not r1 - d2 > 0:
        return fail(None)
    if not 2 * d2 < geo.rho0:
        return fail(None)
    lo_r, hi_r = math.log(r1 - d2), math.log(r2 + d2)
    lam_vals = (lam * lo_r, lam * hi_r)
    w0 = 1.05 * d2 / r1
    wedges = branch_wedges(base, B, routes)
    slabs = []
    for j, (t0, t1) in wedges:
        slabs.append((t0 - w0 - max(lam_vals), t1 + w0 - min(lam_vals), j))
    slabs.sort(key=lambda s: s[0] % (2 * math.pi))
    lhs = 2.1 * d2 / r1 + abs(lam) * math.log((r2 + d2) / (r1 - d2))
    margin = geo.alpha0 - lhs
    pair = None
    if len(slabs) > 1:
        for l in range(len(slabs)):
            a, b = slabs[l], slabs[(l + 1) % len(slabs)]
            start_b = b[0] + 2 * math.pi * math.ceil((a[0] - b[0]) / (2 * math.pi))
            if start_b <= a[0]:
                start_b += 2 * math.pi
            gap = start_b - a[1]
            if gap < margin:
                margin, pair = gap, (a[2], b[2])
    if margin <= 0:
        return fail(pair, margin)
    return StripResult(True, margin, None, slabs)


def make_strip_certifier(base: PolygonalSystem, spec: DeformationSpec,
                         deformed: PolygonalSystem, variant: str = PRINTED,
                         geo: Optional[GeometricConstants] = None,
                         tol_lambda: float = 1e-6) -> Callable:
    """A callable ``B' -> routes or None`` for the intersection check.

    ``B'`` is a contact point of the deformed system; it must be the image of
    a base vertex ``B`` at which the parameters match and the strips separate.
    """
    geo = geo or geometric_constants(base)
    derived = derived_constants(base, normalized_delta(base, spec), variant)
    matching = check_parameter_matching(deformed, tol_lambda)
    allr = branch_routes(base)
    images = {B: spec(B) for B in allr}
    cache = {}

    def certify(Bp):
        key = complex(Bp)
        for k, v in cache.items():
            if abs(k - key) <= 1e-9:
                return v
        res = None
        B = min(images, key=lambda z: abs(images[z] - key)) if images else None
        if B is not None and abs(images[B] - key) <= 1e-7:
            entry = matching.at(key)
            if entry is not None and entry.matched:
                strip = log_strip_check(base, B, entry.lam, geo, derived, allr[B])
                if strip.separated:
                    res = [j for j, _ in allr[B]]
        cache[key] = res
        return res

    return certify


def certify_dendrite(base: PolygonalSystem, spec: DeformationSpec,
                     deformed: Optional[PolygonalSystem] = None, depth: int = 5,
                     variant: str = PRINTED):
    """``dendrite_check`` of a deformation, with strip certification at contacts.

    The deformed attractor is bounded by ``V_{delta1}(P)`` when that
    neighbourhood is certified invariant.
    """
    deformed = deformed or build_deformed_system(base, spec)
    delta = normalized_delta(base, spec)
    try:
        geo = geometric_constants(base)
        cert = make_strip_certifier(base, spec, deformed, variant, geo)
        nb = invariant_neighborhood_check(base, deformed, delta)
    except AssumptionViolated:
        return dendrite_check(deformed, depth)
    inflation = nb.delta1 * base.diameter if nb.passed else None
    return dendrite_check(deformed, depth, cert, inflation)


# ---------------------------------------------------------------------------
# The conjugating map
# ---------------------------------------------------------------------------

class ConjugatingMap:
    """``f_hat(S_i(A)) = S'_i(f(A))`` on the vertices of the level pieces.

    Construction checks that every vertex identity ``S_i(A) = S_j(A')`` with
    ``|i|, |j| <= depth`` gives the same image, raising ``RouteMismatch``.
    """

    def __init__(self, base: PolygonalSystem, deformed: PolygonalSystem, depth: int = 3,
                 tol: float = TOL_GEOM):
        self.base = base
        self.deformed = deformed
        self.depth = depth
        self.tol = tol
        pts, imgs = [], []
        for n in range(0, depth + 1):
            if n == 0:
                pts.append(base.base.array)
                imgs.append(deformed.base.array)
            else:
                pts.append(piece_arrays(base, n).ravel())
                imgs.append(piece_arrays(deformed, n).ravel())
        P = np.concatenate(pts)
        Q = np.concatenate(imgs)
        tree = cKDTree(np.column_stack([P.real, P.imag]))
        groups = tree.query_ball_point(np.column_stack([P.real, P.imag]), r=tol)
        rep = np.full(P.size, -1)
        keys, values = [], []
        self.max_spread = 0.0
        for i, grp in enumerate(groups):
            if rep[i] >= 0:
                continue
            grp = [g for g in grp if rep[g] < 0]
            rep[grp] = len(keys)
            vals = Q[grp]
            spread = float(np.abs(vals - vals[0]).max())
            self.max_spread = max(self.max_spread, spread)
            if spread > max(tol, 1e-9) * 10:
                raise RouteMismatch(complex(P[i]), len(grp), spread)
            keys.append(complex(P[i]))
            values.append(complex(vals[0]))
        self.points = np.array(keys)
        self.images = np.array(values)
        self._tree = cKDTree(np.column_stack([self.points.real, self.points.imag]))

    def __call__(self, z) -> complex:
        z = complex(z)
        d, i = self._tree.query([z.real, z.imag])
        if d > 10 * self.tol:
            raise KeyError(f"{z} is not a vertex up to level {self.depth}")
        return complex(self.images[i])

    def route(self, word, vertex: int) -> complex:
        """``S'_word(f(A_vertex))`` evaluated directly."""
        return complex(compose_word(self.deformed.maps, word)(self.deformed.base.vertices[vertex]))


def hatf_eval(base: PolygonalSystem, deformed: PolygonalSystem, route,
              tol: float = TOL_GEOM, depth: Optional[int] = None) -> complex:
    """``f_hat(S_i(A)) = S'_i(f(A))`` with every other route to the same point checked."""
    word, vertex = route
    word = tuple(word)
    z = compose_word(base.maps, word)(base.base.vertices[vertex])
    out = compose_word(deformed.maps, word)(deformed.base.vertices[vertex])
    n = len(word) if depth is None else depth
    for level in range(0, n + 1):
        if level == 0:
            P, Q = base.base.array, deformed.base.array
        else:
            P = piece_arrays(base, level).ravel()
            Q = piece_arrays(deformed, level).ravel()
        hit = np.abs(P - z) <= tol
        if np.any(hit):
            spread = float(np.abs(Q[hit] - out).max())
            if spread > 10 * tol:
                raise RouteMismatch(complex(z), int(hit.sum()), spread)
    return complex(out)


@dataclass
class HolderReport:
    passed: bool
    beta: float
    constant: float
    worst_ratio: float
    pairs: int
    witness: Optional[tuple] = None


def holder_check(base: PolygonalSystem, deformed: PolygonalSystem, samples: int = 1000,
                 rng: Optional[np.random.Generator] = None, depth: int = 3,
                 delta: Optional[float] = None, strict: bool = False) -> HolderReport:
    """``|z1' - z2'| <= 2|K'| / (rho0 sin(alpha0/2))^beta |z1 - z2|^beta`` on vertex pairs.

    Work happens in the normalized frame; ``|K'|`` is replaced by the
    diameter of the certified outer region ``V_{delta1}(P)``.
    """
    rng = rng or np.random.default_rng(0)
    geo = geometric_constants(base)
    diam = base.diameter
    beta = holder_exponent(base, deformed)
    if delta is None:
        delta = 0.0
    d1 = 8 * delta / (1 + 3 * base.q_max)
    K_out = 1.0 + 2 * d1
    C = 2 * K_out / (geo.rho0 * math.sin(geo.alpha0 / 2)) ** beta
    fh = ConjugatingMap(base, deformed, depth)
    P = fh.points / diam
    Q = fh.images / diam
    worst = 0.0
    witness = None
    n = len(P)
    i1 = rng.integers(0, n, samples)
    i2 = (i1 + rng.integers(1, n, samples)) % n     # distinct pairs
    for a, b in zip(i1, i2):
        lhs = abs(Q[a] - Q[b])
        rhs = C * abs(P[a] - P[b]) ** beta
        ratio = lhs / rhs
        if ratio > worst:
            worst, witness = float(ratio), (complex(P[a] * diam), complex(P[b] * diam))
    ok = bool(worst <= 1.0)
    if strict and not ok:
        raise HolderViolated(f"pair {witness} breaks the Hoelder bound ({worst:.3g})")
    return HolderReport(ok, beta, C, worst, samples, None if ok else witness)
