"""Attractors: Hutchinson iteration, addresses, the intersection condition,
finite-depth dendrite certification, chains, arcs and the post-critical set.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

from .errors import (D2Violated, InfiniteSuspected, NotATree, NotAVertex,
                     NotCertified, NotConnected, PreconditionFailed, SizeLimit)
from .geometry import (TOL_GEOM, TOL_MARGIN, Polygon, SinglePoint, Violation,
                       convex_hull, polygon_distance)
from .system import (CONTRACTIBLE, MAX_MAPS, ContactGraph, PolygonalSystem,
                     build_contact_graph, compose_word, is_prefix,
                     pairwise_contacts, piece_arrays, validate, word_coefficients,
                     words)


# ---------------------------------------------------------------------------
# Hutchinson iteration and addresses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AttractorCloud:
    depth: int
    points: np.ndarray
    error_bound: float


def iterate(system: PolygonalSystem, seed, depth: int, cap: int = MAX_MAPS) -> AttractorCloud:
    """``T^depth(seed)`` as a point cloud, ordered by word then seed point."""
    seed = np.asarray(seed, dtype=complex).ravel()
    if seed.size == 0:
        raise ValueError("seed must be nonempty")
    if system.m ** depth * seed.size > cap * max(1, seed.size):
        raise SizeLimit(f"{system.m}^{depth} words exceed the cap of {cap}")
    a, b = word_coefficients(system.maps, depth, cap)
    pts = (a[:, None] * seed[None, :] + b[:, None]).ravel()
    return AttractorCloud(depth, pts, system.diameter * system.q_max ** depth)


@dataclass(frozen=True)
class Address:
    """Eventually periodic word ``preperiod . period period ...``.

    An empty period means a finite word evaluated by truncation.
    """

    preperiod: tuple = ()
    period: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(int(k) for k in self.preperiod))
        object.__setattr__(self, "period", tuple(int(k) for k in self.period))

    def canonical(self) -> "Address":
        """Shortest preperiod and primitive period describing the same word."""
        pre, per = list(self.preperiod), list(self.period)
        if per:
            n = len(per)
            for d in range(1, n + 1):
                if n % d == 0 and per == per[:d] * (n // d):
                    per = per[:d]
                    break
            while pre and pre[-1] == per[-1]:
                pre.pop()
                per = [per[-1]] + per[:-1]
        return Address(tuple(pre), tuple(per))

    def shift(self, k: int = 1) -> "Address":
        """The shift ``sigma^k``."""
        pre, per = self.preperiod, self.period
        for _ in range(k):
            if pre:
                pre = pre[1:]
            elif per:
                per = per[1:] + per[:1]
            else:
                break
        return Address(pre, per).canonical()

    def prefix(self, n: int) -> tuple:
        out = list(self.preperiod[:n])
        if self.period:
            while len(out) < n:
                out.extend(self.period)
        return tuple(out[:n])

    def prepend(self, word) -> "Address":
        return Address(tuple(word) + self.preperiod, self.period).canonical()

    def __str__(self):
        pre = "".join(map(str, self.preperiod))
        return f"{pre}({''.join(map(str, self.period))})" if self.period else pre


def eval_address(system: PolygonalSystem, addr: Address, depth_cap: int = 64):
    """The point ``pi(addr)`` and an error bound for it."""
    if addr.period:
        s = compose_word(system.maps, addr.period)
        z = s.fixed
        pre = addr.preperiod
        return complex(compose_word(system.maps, pre)(z)), 0.0
    pre = addr.preperiod[:depth_cap]
    z0 = system.maps[0].fixed
    z = compose_word(system.maps, pre)(z0)
    return complex(z), system.diameter * system.q_max ** len(pre)


# ---------------------------------------------------------------------------
# Piece graphs
# ---------------------------------------------------------------------------

@dataclass
class PieceGraph:
    """Contact structure of the level-``n`` pieces ``P_j``, ``j`` in ``I^n``."""

    level: int
    labels: list
    contacts: ContactGraph

    @property
    def is_tree(self) -> bool:
        return self.contacts.is_tree()


@lru_cache(maxsize=32)
def _level_polygons(system: PolygonalSystem, n: int):
    arr = piece_arrays(system, n)
    return [Polygon.unchecked(row) for row in arr]


@lru_cache(maxsize=32)
def level_graph(system: PolygonalSystem, n: int, tol: float = TOL_GEOM) -> PieceGraph:
    """Bipartite piece/contact-point graph at level ``n`` (raises ``D2Violated``)."""
    polys = _level_polygons(system, n)
    contacts = pairwise_contacts(polys, tol)
    g = build_contact_graph(len(polys), contacts, tol)
    return PieceGraph(n, [tuple(w) for w in words(system.m, n)], g)


def _word_index(word, m: int) -> int:
    k = 0
    for c in word:
        k = k * m + c
    return k


# ---------------------------------------------------------------------------
# The intersection condition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertifiedEqual:
    pair: tuple
    margin: float
    kind = "CertifiedEqual"


@dataclass(frozen=True)
class CertifiedViolation:
    pair: tuple
    witness: complex
    kind = "CertifiedViolation"


@dataclass(frozen=True)
class Undecided:
    pair: tuple
    gap: float
    kind = "Undecided"


def bounding_region(system: PolygonalSystem, inflation: Optional[float] = None):
    """A set ``H`` and radius ``r`` with ``K`` inside ``H`` inflated by ``r``.

    Returns ``(H, r, contractible)``.
    Contractible systems use ``P`` itself.  Otherwise ``H`` is the convex hull
    of the level-1 piece vertices and ``r`` the invariant radius
    ``max_k e_k / (1 - q_k)`` where ``e_k`` is how far ``S_k(H)`` leaves ``H``;
    ``inflation`` replaces that radius and keeps ``H = P`` (deformation
    context, where ``V_r(P)`` is known to be invariant).
    """
    if inflation is not None:
        return system.base.array, float(inflation), False
    if validate(system).classification == CONTRACTIBLE:
        return system.base.array, 0.0, True
    pts = np.concatenate([p.array for p in system.pieces] + [system.base.array])
    H = convex_hull(pts)
    Hp = Polygon.unchecked(H)
    r = 0.0
    for s in system.maps:
        img = s(H)
        e = max(Hp.distance(z) for z in img)
        r = max(r, e / (1 - s.ratio))
    return H, r, False


def _region_gap(system, H, r, u, v) -> float:
    su = compose_word(system.maps, u)
    sv = compose_word(system.maps, v)
    d = polygon_distance(su(H), sv(H))
    return d - (su.ratio + sv.ratio) * r


def _sample_points(system: PolygonalSystem, word, depth: int) -> np.ndarray:
    seeds = np.array([s.fixed for s in system.maps])
    a, b = word_coefficients(system.maps, depth)
    pts = (a[:, None] * seeds[None, :] + b[:, None]).ravel()
    return compose_word(system.maps, word)(pts)


def _coincidence(system, i, j, depth, exclude, tol):
    """A common sample point of ``K_i`` and ``K_j`` away from ``exclude``."""
    d = max(1, min(depth, int(math.log(4000) / math.log(system.m))))
    A = _sample_points(system, (i,), d)
    B = _sample_points(system, (j,), d)
    ta = cKDTree(np.column_stack([A.real, A.imag]))
    tb = cKDTree(np.column_stack([B.real, B.imag]))
    for ia, lst in enumerate(ta.query_ball_tree(tb, tol)):
        if lst:
            z = complex(A[ia])
            if all(abs(z - e) > TOL_MARGIN for e in exclude):
                return z
    return None


def check_intersection_condition(system: PolygonalSystem, depth: int = 4,
                                 strip_certifier: Optional[Callable] = None,
                                 inflation: Optional[float] = None,
                                 tol_geom: float = TOL_GEOM,
                                 tol_margin: float = TOL_MARGIN) -> list:
    """Verdicts on ``K_i & K_j = P_i & P_j`` for every pair ``i < j``.

    Disjoint pieces are certified once all subpiece regions up to ``depth``
    separate by more than ``tol_margin``.  For a pair meeting at one point
    ``B`` the subpieces converging to ``B`` are excluded from the search;
    with a contractible system they are certified directly, otherwise
    ``strip_certifier(B)`` must return the set of routes it certifies.
    """
    contacts = pairwise_contacts(system.pieces, tol_geom)
    for pair, c in sorted(contacts.items()):
        if isinstance(c, Violation):
            raise D2Violated(pair, c.description)
    H, r, contractible = bounding_region(system, inflation)
    out = []
    for i in range(system.m):
        for j in range(i + 1, system.m):
            c = contacts.get((i, j))
            if c is None:
                out.append(_certify_pair(system, (i, j), H, r, depth, None, tol_geom, tol_margin))
                continue
            B = c.point
            if contractible:
                out.append(CertifiedEqual((i, j), math.inf))
                continue
            routes = strip_certifier(B) if strip_certifier is not None else None
            out.append(_certify_pair(system, (i, j), H, r, depth, (B, routes),
                                     tol_geom, tol_margin))
    return out


def _certify_pair(system, pair, H, r, depth, shared, tol_geom, tol_margin):
    i, j = pair
    B, routes = shared if shared is not None else (None, None)
    left = [w for w in (routes or ()) if w[0] == i]
    right = [w for w in (routes or ()) if w[0] == j]

    def exempt(u, v):
        return (any(is_prefix(w, u) for w in left) and any(is_prefix(w, v) for w in right))

    queue = deque([((i,), (j,))])
    worst = math.inf
    pending = 0
    while queue:
        u, v = queue.popleft()
        if left and right and exempt(u, v):
            continue
        g = _region_gap(system, H, r, u, v)
        if g > tol_margin:
            worst = min(worst, g)
            continue
        if len(u) >= depth:
            pending += 1
            worst = min(worst, g)
            continue
        for a in range(system.m):
            for b in range(system.m):
                queue.append((u + (a,), v + (b,)))
    if pending == 0:
        return CertifiedEqual(pair, worst)
    z = _coincidence(system, i, j, depth, [B] if B is not None else [], tol_geom)
    if z is not None:
        return CertifiedViolation(pair, z)
    return Undecided(pair, worst)


# ---------------------------------------------------------------------------
# Dendrite check
# ---------------------------------------------------------------------------

@dataclass
class CertifiedDendrite:
    depth: int
    graphs: list = field(default_factory=list, repr=False)
    verdicts: list = field(default_factory=list, repr=False)
    kind = "CertifiedDendrite"


@dataclass
class Inconclusive:
    level: int
    reason: str
    graphs: list = field(default_factory=list, repr=False)
    verdicts: list = field(default_factory=list, repr=False)
    kind = "Inconclusive"


@dataclass
class RefutedTree:
    level: int
    witness: list
    graphs: list = field(default_factory=list, repr=False)
    lifts: bool = False
    kind = "RefutedTree"


def dendrite_check(system: PolygonalSystem, depth: int = 4,
                   strip_certifier: Optional[Callable] = None,
                   inflation: Optional[float] = None,
                   tol_geom: float = TOL_GEOM, tol_margin: float = TOL_MARGIN):
    """Certify at finite depth that the attractor is a dendrite.

    Every level graph up to ``depth`` must be a tree and every level-1 pair
    must satisfy the intersection condition.  A cycle at some level refutes
    the tree property of that approximation; ``lifts`` records whether all
    contacts on it were certified as well.
    """
    graphs = []
    for n in range(1, depth + 1):
        try:
            g = level_graph(system, n, tol_geom)
        except D2Violated as exc:
            return Inconclusive(n, f"level {n}: {exc}", graphs)
        except SizeLimit as exc:
            return Inconclusive(n, str(exc), graphs)
        graphs.append(g)
        cyc = g.contacts.cycle()
        if cyc is not None:
            witness = [g.labels[k] for k in cyc]
            return RefutedTree(n, witness, graphs)
        if not g.contacts.is_connected():
            return Inconclusive(n, f"level {n} graph is disconnected", graphs)
    try:
        verdicts = check_intersection_condition(system, depth, strip_certifier, inflation,
                                                tol_geom, tol_margin)
    except D2Violated as exc:
        return Inconclusive(1, str(exc), graphs)
    bad = [v for v in verdicts if not isinstance(v, CertifiedEqual)]
    if bad:
        v = bad[0]
        if isinstance(v, CertifiedViolation):
            reason = f"pieces {v.pair} share the point {v.witness} of K off the polygon contact"
        else:
            reason = f"pieces {v.pair} undecided (gap {v.gap:.3g}); raise depth"
        return Inconclusive(depth, reason, graphs, verdicts)
    return CertifiedDendrite(depth, graphs, verdicts)


# ---------------------------------------------------------------------------
# Chains and arcs
# ---------------------------------------------------------------------------

def _tree_path(g: nx.Graph, src, dst) -> list:
    """Path between two nodes of a tree via BFS parents."""
    parent = {src: None}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        if x == dst:
            break
        for y in sorted(g.neighbors(x)):
            if y not in parent:
                parent[y] = x
                queue.append(y)
    if dst not in parent:
        raise NotConnected(f"no path between {src} and {dst}")
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


def chain_between(system: PolygonalSystem, i: int, j: int, tol: float = TOL_GEOM) -> list:
    """The unique chain of level-1 pieces from ``i`` to ``j``."""
    g = level_graph(system, 1, tol).contacts
    if not g.is_connected():
        raise NotConnected(f"contact graph disconnected: {g.components()}")
    cyc = g.cycle()
    if cyc is not None:
        raise NotATree(cyc)
    path = _tree_path(g.graph, ("piece", i), ("piece", j))
    return [n[1] for n in path if n[0] == "piece"]


def _dedupe(points, tol):
    out = []
    for z in points:
        if not out or abs(z - out[-1]) > tol:
            out.append(z)
    return out


def _endpoint_node(g: PieceGraph, addr: Address, m: int, depth: int, z: complex, tol: float):
    k = g.contacts.point_index(z, tol)
    if k is not None:
        return ("point", k)
    return ("piece", _word_index(addr.prefix(depth), m))


def arc_nodes(system: PolygonalSystem, a: Address, b: Address, depth: int,
              tol: float = TOL_GEOM):
    """Node path of the level-``depth`` graph joining ``pi(a)`` and ``pi(b)``."""
    g = level_graph(system, depth, tol)
    if not g.is_tree:
        raise NotCertified(f"level {depth} graph is not a tree")
    x, _ = eval_address(system, a)
    y, _ = eval_address(system, b)
    src = _endpoint_node(g, a, system.m, depth, x, tol)
    dst = _endpoint_node(g, b, system.m, depth, y, tol)
    return g, x, y, _tree_path(g.contacts.graph, src, dst)


def approximate_arc(system: PolygonalSystem, a: Address, b: Address, depth: int,
                    tol: float = TOL_GEOM) -> list:
    """Polyline ``x, x_1, ..., x_l, y`` through the contact points of the chain."""
    g, x, y, path = arc_nodes(system, a, b, depth, tol)
    pts = [x] + [g.contacts.points[n[1]] for n in path if n[0] == "point"] + [y]
    return _dedupe(pts, tol)


def arc_chain(system: PolygonalSystem, a: Address, b: Address, depth: int,
              tol: float = TOL_GEOM) -> list:
    """Multiindices of the pieces along the arc at level ``depth``."""
    g, _, _, path = arc_nodes(system, a, b, depth, tol)
    return [g.labels[n[1]] for n in path if n[0] == "piece"]


# ---------------------------------------------------------------------------
# Ramification
# ---------------------------------------------------------------------------

def ramification_order(system: PolygonalSystem, v: complex, depth: int = 2,
                       tol: float = TOL_GEOM) -> int:
    """Number of branches of the level-``depth`` pieces at ``v``.

    Each piece having ``v`` as a vertex counts once; pieces in the same
    component of the graph with the node ``v`` removed count together.
    """
    v = complex(v)
    arr = piece_arrays(system, depth)
    owners = np.nonzero(np.any(np.abs(arr - v) <= tol, axis=1))[0]
    if owners.size == 0:
        raise NotAVertex(f"{v} is not a vertex of any level-{depth} piece")
    g = level_graph(system, depth, tol).contacts
    k = g.point_index(v, tol)
    if k is None:
        return int(owners.size)
    h = g.graph.copy()
    h.remove_node(("point", k))
    comp = {}
    for c, nodes in enumerate(nx.connected_components(h)):
        for node in nodes:
            comp[node] = c
    return len({comp[("piece", int(w))] for w in owners})


def incident_angles(system: PolygonalSystem, v: complex, depth: int = 2,
                    tol: float = TOL_GEOM) -> list:
    """Interior angles of the level-``depth`` pieces at ``v``."""
    from .geometry import angle_at_vertex
    out = []
    for poly in _level_polygons(system, depth):
        k = poly.vertex_index(complex(v), tol)
        if k is not None:
            out.append(angle_at_vertex(poly, k))
    if not out:
        raise NotAVertex(f"{v} is not a vertex of any level-{depth} piece")
    return out


# ---------------------------------------------------------------------------
# Post-critical set
# ---------------------------------------------------------------------------

@dataclass
class PostCriticalSet:
    critical: list          # (point, [addresses])
    addresses: list         # post-critical addresses (shifts k >= 1)
    finite: bool
    vertices: list          # pi of the post-critical addresses


def vertex_preimage_graph(system: PolygonalSystem, tol: float = TOL_GEOM) -> dict:
    """Edges ``A -> (k, A')`` whenever ``S_k(A') = A`` for vertices of ``P``."""
    V = system.base.vertices
    out = {a: [] for a in range(len(V))}
    for k, s in enumerate(system.maps):
        img = s(system.base.array)
        for a2, z in enumerate(img):
            for a, A in enumerate(V):
                if abs(z - A) <= tol:
                    out[a].append((k, a2))
    return out


def vertex_addresses(system: PolygonalSystem, depth_cap: int = 32,
                     tol: float = TOL_GEOM) -> dict:
    """All addresses of every vertex of ``P``; ``InfiniteSuspected`` otherwise.

    The addresses are the infinite paths of the preimage graph.  There are
    finitely many exactly when every vertex that lies on a cycle has a single
    outgoing edge.
    """
    G = vertex_preimage_graph(system, tol)
    dg = nx.DiGraph()
    dg.add_nodes_from(G)
    for a, lst in G.items():
        for k, a2 in lst:
            dg.add_edge(a, a2)
    for comp in nx.strongly_connected_components(dg):
        cyclic = len(comp) > 1 or any(a2 == a for a in comp for _, a2 in G[a])
        if cyclic and any(len(G[a]) != 1 for a in comp):
            raise InfiniteSuspected(f"vertices {sorted(comp)} carry infinitely many addresses")
    out = {}

    def walk(a, word, seen):
        if a in seen:
            start = seen[a]
            return [Address(tuple(word[:start]), tuple(word[start:])).canonical()]
        if len(word) > depth_cap:
            raise InfiniteSuspected(f"no closure within {depth_cap} symbols")
        if not G[a]:
            return []
        res = []
        for k, a2 in G[a]:
            s2 = dict(seen)
            s2[a] = len(word)
            res.extend(walk(a2, word + [k], s2))
        return res

    for a in G:
        out[a] = sorted(set(walk(a, [], {})), key=lambda x: (x.preperiod, x.period))
    return out


def postcritical_set(system: PolygonalSystem, depth_cap: int = 32,
                     tol: float = TOL_GEOM) -> PostCriticalSet:
    """Critical addresses of level-1 contacts and their shift closure."""
    contacts = pairwise_contacts(system.pieces, tol)
    vaddr = vertex_addresses(system, depth_cap, tol)
    critical = []
    pts = []
    for (i, j), c in sorted(contacts.items()):
        if not (isinstance(c, SinglePoint) and c.shared_vertex):
            raise PreconditionFailed(f"pieces ({i}, {j}) meet outside a shared vertex")
        if any(abs(c.point - p) <= tol for p in pts):
            continue
        pts.append(c.point)
        addrs = []
        for k in range(system.m):
            poly = system.pieces[k]
            idx = poly.vertex_index(c.point, tol)
            if idx is not None:
                addrs.extend(x.prepend((k,)) for x in vaddr[idx])
        critical.append((c.point, sorted(set(addrs), key=lambda x: (x.preperiod, x.period))))
    post = set()
    for _, addrs in critical:
        for x in addrs:
            y = x.shift()
            for _ in range(depth_cap + 1):
                if y in post:
                    break
                post.add(y)
                y = y.shift()
            else:
                raise InfiniteSuspected("shift orbit did not close")
    post = sorted(post, key=lambda x: (x.preperiod, x.period))
    verts = []
    for x in post:
        z, _ = eval_address(system, x)
        if all(abs(z - w) > tol for w in verts):
            verts.append(z)
    return PostCriticalSet(critical, post, True, verts)
