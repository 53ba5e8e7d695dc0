"""Polygonal systems of similarities, their validators and refinements.

Multiindices are tuples of 0-based map indices; ``(i, j)`` stands for the
composition ``S_i o S_j``.  Refinements enumerate words in lexicographic
order, which fixes every downstream identifier.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from .errors import D2Violated, InvalidSystem, NotContractible, SizeLimit
from .geometry import (TOL_GEOM, Disjoint, Polygon, Similarity, SinglePoint,
                       Violation, cluster_points, polygon_pair_contact,
                       _segments_properly_cross)

MAX_MAPS = 200_000

CONTRACTIBLE = "Contractible"
GENERALIZED = "Generalized"
INVALID = "Invalid"


# ---------------------------------------------------------------------------
# Multiindices
# ---------------------------------------------------------------------------

def is_prefix(i: tuple, j: tuple) -> bool:
    """``i`` is a prefix of ``j`` (written i ⊏ j)."""
    return len(i) <= len(j) and tuple(j[:len(i)]) == tuple(i)


def incomparable(i: tuple, j: tuple) -> bool:
    return not is_prefix(i, j) and not is_prefix(j, i)


def words(m: int, n: int):
    """All words of length ``n`` over ``range(m)`` in lexicographic order."""
    return list(itertools.product(range(m), repeat=n))


def compose_word(maps: Sequence[Similarity], word) -> Similarity:
    s = Similarity(1.0, 0.0, 0j)
    for k in word:
        s = s @ maps[k]
    return s


def word_coefficients(maps: Sequence[Similarity], n: int, cap: int = MAX_MAPS):
    """Affine coefficients ``(a, b)`` of ``S_w`` for all ``w`` in ``I^n`` (lexicographic)."""
    m = len(maps)
    if m ** n > cap:
        raise SizeLimit(f"{m}^{n} words exceed the cap of {cap}")
    a1 = np.array([s.a for s in maps])
    b1 = np.array([s.b for s in maps])
    a = np.ones(1, dtype=complex)
    b = np.zeros(1, dtype=complex)
    for _ in range(n):
        a, b = (a1[:, None] * a[None, :]).ravel(), (a1[:, None] * b[None, :] + b1[:, None]).ravel()
    return a, b


# ---------------------------------------------------------------------------
# The system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolygonalSystem:
    """Base polygon ``P`` together with contracting similarities ``S_1..S_m``.

    ``labels`` records the multiindex of each map when the system is a
    refinement of another one.
    """

    base: Polygon
    maps: tuple
    labels: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        maps = tuple(self.maps)
        object.__setattr__(self, "maps", maps)
        if len(maps) < 2:
            raise InvalidSystem("a polygonal system needs at least two maps")
        for k, s in enumerate(maps):
            if not s.is_contracting:
                raise InvalidSystem(f"map {k} is not contracting (ratio {s.ratio})")
        if self.labels is None:
            object.__setattr__(self, "labels", tuple((k,) for k in range(len(maps))))

    @property
    def m(self) -> int:
        return len(self.maps)

    @cached_property
    def pieces(self) -> tuple:
        return tuple(self.base.image(s) for s in self.maps)

    @property
    def q_min(self) -> float:
        return min(s.ratio for s in self.maps)

    @property
    def q_max(self) -> float:
        return max(s.ratio for s in self.maps)

    @property
    def diameter(self) -> float:
        return self.base.diameter

    def map_of(self, word) -> Similarity:
        return compose_word(self.maps, word)

    def normalized(self):
        """Rescaled copy with ``diam P = 1`` and the scale factor applied."""
        d = self.base.diameter
        base = Polygon.unchecked([v / d for v in self.base.vertices])
        maps = tuple(Similarity(s.ratio, s.rotation, s.fixed / d) for s in self.maps)
        return PolygonalSystem(base, maps, self.labels), 1.0 / d

    def scaled(self, factor: float) -> "PolygonalSystem":
        base = Polygon.unchecked([v * factor for v in self.base.vertices])
        maps = tuple(Similarity(s.ratio, s.rotation, s.fixed * factor) for s in self.maps)
        return PolygonalSystem(base, maps, self.labels)

    def piece_vertices(self) -> list:
        """Distinct vertices of all pieces, ordered by piece then vertex."""
        pts = [v for p in self.pieces for v in p.vertices]
        return cluster_points(pts, TOL_GEOM)

    @cached_property
    def classification(self) -> str:
        return validate(self).classification


def refine(system: PolygonalSystem, n: int, cap: int = MAX_MAPS) -> PolygonalSystem:
    """The n-th refinement: maps ``S_j`` for ``j`` in ``I^n``, lexicographic."""
    if n < 1:
        raise ValueError("refinement order must be >= 1")
    if n == 1:
        return system
    a, b = word_coefficients(system.maps, n, cap)
    maps = tuple(Similarity.from_affine(ak, bk) for ak, bk in zip(a, b))
    labels = tuple(tuple(w) for w in words(system.m, n))
    return PolygonalSystem(system.base, maps, labels)


def piece_arrays(system: PolygonalSystem, n: int, cap: int = MAX_MAPS) -> np.ndarray:
    """Vertices of all level-n pieces as an ``(m**n, n_P)`` complex array."""
    a, b = word_coefficients(system.maps, n, cap)
    return a[:, None] * system.base.array[None, :] + b[:, None]


# ---------------------------------------------------------------------------
# Pairwise contacts
# ---------------------------------------------------------------------------

def candidate_pairs(boxes: np.ndarray, tol: float):
    """Index pairs ``i < j`` whose bounding boxes are within ``tol``."""
    order = np.argsort(boxes[:, 0], kind="stable")
    xmin = boxes[order, 0]
    out = []
    for pos, i in enumerate(order):
        hi = np.searchsorted(xmin, boxes[i, 1] + tol, side="right")
        js = order[pos + 1:hi]
        if js.size == 0:
            continue
        ok = ((boxes[js, 2] <= boxes[i, 3] + tol) & (boxes[i, 2] <= boxes[js, 3] + tol)
              & (boxes[js, 0] <= boxes[i, 1] + tol))
        for j in js[ok]:
            out.append((min(i, j), max(i, j)))
    out.sort()
    return [(int(i), int(j)) for i, j in out]


def pairwise_contacts(polys: Sequence[Polygon], tol: float = TOL_GEOM) -> dict:
    """Non-disjoint contacts among ``polys`` keyed by sorted index pairs."""
    boxes = np.array([p.bbox for p in polys])
    out = {}
    for i, j in candidate_pairs(boxes, tol):
        c = polygon_pair_contact(polys[i], polys[j], tol)
        if not isinstance(c, Disjoint):
            out[(i, j)] = c
    return out


# ---------------------------------------------------------------------------
# Contact graph
# ---------------------------------------------------------------------------

@dataclass
class ContactGraph:
    """Bipartite incidence graph between pieces and contact points."""

    n_pieces: int
    points: list
    owners: list
    graph: nx.Graph

    def is_tree(self) -> bool:
        g = self.graph
        return nx.is_connected(g) and g.number_of_edges() == g.number_of_nodes() - 1

    def is_connected(self) -> bool:
        return nx.is_connected(self.graph)

    def cycle(self):
        """A cycle as a list of piece indices, or ``None``."""
        try:
            edges = nx.find_cycle(self.graph)
        except nx.NetworkXNoCycle:
            return None
        return [node[1] for node, _ in edges if node[0] == "piece"]

    def components(self):
        return [sorted(n[1] for n in c if n[0] == "piece")
                for c in nx.connected_components(self.graph)]

    def point_index(self, z: complex, tol: float = TOL_GEOM):
        for k, p in enumerate(self.points):
            if abs(p - z) <= tol:
                return k
        return None


def build_contact_graph(n_pieces: int, contacts: dict, tol: float = TOL_GEOM) -> ContactGraph:
    points: list = []
    owners: list = []
    for (i, j), c in sorted(contacts.items()):
        if not isinstance(c, SinglePoint):
            raise D2Violated((i, j), getattr(c, "description", c.kind))
        for k, p in enumerate(points):
            if abs(p - c.point) <= tol:
                break
        else:
            k = len(points)
            points.append(c.point)
            owners.append(set())
        owners[k].update((i, j))
    g = nx.Graph()
    g.add_nodes_from(("piece", i) for i in range(n_pieces))
    for k, own in enumerate(owners):
        g.add_node(("point", k))
        for i in sorted(own):
            g.add_edge(("piece", i), ("point", k))
    return ContactGraph(n_pieces, points, [sorted(o) for o in owners], g)


def contact_graph(system: PolygonalSystem, tol: float = TOL_GEOM) -> ContactGraph:
    """Piece/contact-point incidence graph; raises ``D2Violated`` on bad contacts."""
    return build_contact_graph(system.m, pairwise_contacts(system.pieces, tol), tol)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    passed: bool
    witness: Optional[str] = None

    def to_json(self):
        return {"pass": self.passed, "witness": self.witness}


@dataclass(frozen=True)
class ValidationReport:
    d1: Verdict
    d2: Verdict
    d3: Verdict
    d4: Verdict
    classification: str

    @property
    def reasons(self) -> list:
        return [f"{name}: {v.witness}" for name, v in
                zip(("D1", "D2", "D3", "D4"), (self.d1, self.d2, self.d3, self.d4))
                if not v.passed]


def _piece_inside(piece: Polygon, P: Polygon, tol: float):
    for v in piece.vertices:
        if P.locate(v, tol) == "outside":
            return f"vertex {v} outside P"
    for a0, a1 in piece.edges():
        for t in (0.25, 0.5, 0.75):
            if P.locate(a0 + t * (a1 - a0), tol) == "outside":
                return f"edge point {a0 + t * (a1 - a0)} outside P"
        for b0, b1 in P.edges():
            if _segments_properly_cross(a0, a1, b0, b1, tol):
                if min(abs(a0 - b0), abs(a0 - b1), abs(a1 - b0), abs(a1 - b1)) > tol:
                    return f"edge {a0}->{a1} crosses the boundary of P"
    return None


def check_d1(system: PolygonalSystem, tol: float = TOL_GEOM) -> Verdict:
    for k, piece in enumerate(system.pieces):
        bad = _piece_inside(piece, system.base, tol)
        if bad:
            return Verdict(False, f"piece {k}: {bad}")
    return Verdict(True)


def check_d2(system: PolygonalSystem, tol: float = TOL_GEOM, contacts: dict = None) -> Verdict:
    contacts = pairwise_contacts(system.pieces, tol) if contacts is None else contacts
    for (i, j), c in sorted(contacts.items()):
        if isinstance(c, Violation):
            return Verdict(False, f"pieces ({i}, {j}): {c.description}")
        if isinstance(c, SinglePoint) and not c.shared_vertex:
            return Verdict(False, f"pieces ({i}, {j}) touch at {c.point}, not a common vertex")
    return Verdict(True)


def check_d3(system: PolygonalSystem, tol: float = TOL_GEOM) -> Verdict:
    images = np.concatenate([p.array for p in system.pieces])
    for k, A in enumerate(system.base.vertices):
        close = images[np.abs(images - A) <= tol]
        groups = cluster_points(list(close), tol / 2)
        if not groups:
            return Verdict(False, f"vertex {k} at {A} is not an image vertex")
        if len(groups) > 1:
            return Verdict(False, f"vertex {k} at {A} matches {len(groups)} distinct image vertices")
    return Verdict(True)


def check_d4(system: PolygonalSystem, tol: float = TOL_GEOM, contacts: dict = None) -> Verdict:
    contacts = pairwise_contacts(system.pieces, tol) if contacts is None else contacts
    try:
        g = build_contact_graph(system.m, contacts, tol)
    except D2Violated as exc:
        return Verdict(False, f"contact graph undefined: {exc}")
    if not g.is_connected():
        return Verdict(False, f"contact graph disconnected: components {g.components()}")
    cyc = g.cycle()
    if cyc is not None:
        return Verdict(False, f"cycle through pieces {cyc}")
    return Verdict(True)


def validate(system: PolygonalSystem, tol: float = TOL_GEOM) -> ValidationReport:
    """Run D1-D4 and classify the system."""
    contacts = pairwise_contacts(system.pieces, tol)
    d1 = check_d1(system, tol)
    d2 = check_d2(system, tol, contacts)
    d3 = check_d3(system, tol)
    d4 = check_d4(system, tol, contacts)
    if d2.passed and d3.passed and d4.passed:
        cls = CONTRACTIBLE if d1.passed else GENERALIZED
    else:
        cls = INVALID
    return ValidationReport(d1, d2, d3, d4, cls)


@dataclass(frozen=True)
class OSCResult:
    passed: bool
    witness: Optional[tuple] = None
    description: str = ""


def osc_witness_check(system: PolygonalSystem, tol: float = TOL_GEOM,
                      strict: bool = True) -> OSCResult:
    """Check that the interior of ``P`` is an open-set-condition witness.

    With ``strict`` the system must be contractible; ``strict=False`` runs
    the witness check on any system and names an offending pair.
    """
    if strict and validate(system, tol).classification != CONTRACTIBLE:
        raise NotContractible("OSC witness check requires a contractible system")
    for (i, j), c in sorted(pairwise_contacts(system.pieces, tol).items()):
        if isinstance(c, Violation):
            return OSCResult(False, (i, j), c.description)
    for k, piece in enumerate(system.pieces):
        bad = _piece_inside(piece, system.base, tol)
        if bad:
            return OSCResult(False, (k,), bad)
    return OSCResult(True)
