"""Cyclic vertices, parameters, subordinate vertices and parameter matching."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .attractor import Address, approximate_arc, arc_chain, dendrite_check
from .errors import (CapExceeded, NotCertified, PhiUndefined, SizeLimit,
                     Unsubordinated)
from .geometry import TOL_GEOM, cluster_points
from .system import MAX_MAPS, PolygonalSystem, compose_word, is_prefix, refine, word_coefficients, words

TOL_LAMBDA = 1e-6
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CyclicVertex:
    vertex: int
    point: complex
    witness: tuple
    ratio: float
    rotation: float

    @property
    def order(self) -> int:
        return len(self.witness)

    @property
    def lam(self) -> float:
        return (self.rotation) / math.log(self.ratio)


def find_cyclic_vertices(system: PolygonalSystem, max_order: int = 4,
                         tol: float = TOL_GEOM, cap: int = MAX_MAPS) -> list:
    """Vertices of ``P`` fixed by some ``S_i`` with ``|i| <= max_order``.

    The witness is the lexicographically first word of minimal length.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    V = system.base.array
    found = {}
    for n in range(1, max_order + 1):
        if system.m ** n > cap:
            break
        a, b = word_coefficients(system.maps, n, cap)
        hits = np.abs(a[:, None] * V[None, :] + b[:, None] - V[None, :]) <= tol
        ws = None
        for v in range(len(V)):
            if v in found:
                continue
            idx = np.nonzero(hits[:, v])[0]
            if idx.size:
                ws = ws or words(system.m, n)
                w = ws[int(idx[0])]
                s = compose_word(system.maps, w)
                found[v] = CyclicVertex(v, complex(V[v]), tuple(w), s.ratio, s.rotation)
    return [found[v] for v in sorted(found)]


def vertex_parameter(system: PolygonalSystem, cv: CyclicVertex, winding: int = 0) -> float:
    """``lambda = (alpha + 2 pi winding) / ln r`` of the witness map."""
    s = compose_word(system.maps, cv.witness)
    return (s.rotation + 2 * math.pi * winding) / math.log(s.ratio) + 0.0   # no signed zero


def _lambda_error(system: PolygonalSystem, cv: CyclicVertex, winding: int) -> float:
    s = compose_word(system.maps, cv.witness)
    lr = abs(math.log(s.ratio))
    lam = abs(s.rotation + 2 * math.pi * winding) / lr
    n = len(cv.witness)
    err_a = 8 * n * _EPS * (abs(s.rotation) + math.pi + 1)
    err_r = 8 * n * _EPS
    return err_a / lr + lam * err_r / lr


def order_one_refinement(system: PolygonalSystem, max_order: int = 4,
                         cap: int = MAX_MAPS, tol: float = TOL_GEOM) -> int:
    """Least ``n`` making every cyclic vertex of ``refine(system, n)`` order one.

    ``n`` is the lcm of the orders; the claim is verified on the refinement.
    """
    cvs = find_cyclic_vertices(system, max_order, tol, cap)
    n = 1
    for cv in cvs:
        n = math.lcm(n, cv.order)
    if n == 1:
        return 1
    if system.m ** n > cap:
        raise CapExceeded(f"refinement order {n} needs {system.m}^{n} maps (cap {cap})")
    ref = refine(system, n, cap)
    after = find_cyclic_vertices(ref, 1, tol, cap)
    if {c.vertex for c in after} != {c.vertex for c in cvs}:
        raise CapExceeded(f"refinement of order {n} did not make all cyclic vertices order one")
    return n


# ---------------------------------------------------------------------------
# Subordinate vertices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Route:
    """``S_route(A) = B`` for the cyclic vertex ``A``."""

    word: tuple
    cyclic: int   # vertex index of A in P
    point: complex


def piece_vertex_points(system: PolygonalSystem, tol: float = TOL_GEOM) -> list:
    return sorted(cluster_points(system.piece_vertices(), tol),
                  key=lambda z: (round(z.real, 9), round(z.imag, 9)))


def _reduced(word: tuple, witness: tuple) -> bool:
    n = len(witness)
    return not (len(word) > n and word[-n:] == witness)


def subordinate_map(system: PolygonalSystem, depth: int = 3,
                    cyclic: Optional[Sequence[CyclicVertex]] = None,
                    tol: float = TOL_GEOM, strict: bool = True) -> dict:
    """Routes ``(i, A)`` with ``S_i(A) = B`` for every piece vertex ``B``.

    Routes are nonempty words of length at most ``depth`` that do not end
    with a repetition of the witness of ``A``.  Keys are the piece vertices
    sorted by coordinates.  With ``strict`` an unreached vertex raises
    ``Unsubordinated``.
    """
    cyclic = find_cyclic_vertices(system) if cyclic is None else list(cyclic)
    targets = piece_vertex_points(system, tol)
    out = {B: [] for B in targets}
    T = np.array(targets)
    for n in range(1, depth + 1):
        a, b = word_coefficients(system.maps, n)
        ws = words(system.m, n)
        for cv in cyclic:
            img = a * cv.point + b
            d = np.abs(img[:, None] - T[None, :])
            for wi, ti in zip(*np.nonzero(d <= tol)):
                w = tuple(ws[int(wi)])
                if _reduced(w, cv.witness):
                    out[targets[int(ti)]].append(Route(w, cv.vertex, cv.point))
    if strict:
        for B, routes in out.items():
            if not routes:
                raise Unsubordinated(B)
    return out


# ---------------------------------------------------------------------------
# Parameter matching
# ---------------------------------------------------------------------------

@dataclass
class MatchEntry:
    point: complex
    routes: list        # (route word, cyclic vertex index, lambda)
    spread: float
    error: float
    matched: bool

    @property
    def lam(self) -> float:
        return float(np.mean([r[2] for r in self.routes]))


@dataclass
class MatchingReport:
    entries: list = field(default_factory=list)
    tol_lambda: float = TOL_LAMBDA

    @property
    def matched(self) -> bool:
        return all(e.matched for e in self.entries)

    @property
    def kind(self) -> str:
        return "Matched" if self.matched else "Mismatched"

    @property
    def spread(self) -> float:
        return max((e.spread for e in self.entries), default=0.0)

    def mismatched_pairs(self) -> list:
        return [e for e in self.entries if not e.matched]

    def at(self, B: complex, tol: float = 1e-7) -> Optional[MatchEntry]:
        for e in self.entries:
            if abs(e.point - B) <= tol:
                return e
        return None


def check_parameter_matching(system: PolygonalSystem, tol_lambda: float = TOL_LAMBDA,
                             depth: int = 3, windings: Optional[dict] = None,
                             tol: float = TOL_GEOM) -> MatchingReport:
    """Compare ``lambda_A`` over all routes reaching each shared vertex.

    ``windings`` maps a cyclic vertex index to its branch (default 0).
    A vertex is mismatched only if the spread exceeds ``tol_lambda`` and ten
    times the propagated rounding error.
    """
    windings = windings or {}
    cyclic = find_cyclic_vertices(system, tol=tol)
    by_index = {c.vertex: c for c in cyclic}
    sub = subordinate_map(system, depth, cyclic, tol, strict=True)
    report = MatchingReport(tol_lambda=tol_lambda)
    for B, routes in sub.items():
        if len({r.cyclic for r in routes}) < 2 and len(routes) < 2:
            continue
        vals = []
        err = 0.0
        for r in routes:
            cv = by_index[r.cyclic]
            w = windings.get(r.cyclic, 0)
            vals.append((r.word, r.cyclic, vertex_parameter(system, cv, w)))
            err = max(err, _lambda_error(system, cv, w))
        lams = [v[2] for v in vals]
        spread = max(lams) - min(lams)
        bad = spread > tol_lambda and spread > 10 * 2 * err
        report.entries.append(MatchEntry(B, vals, spread, err, not bad))
    return report


# ---------------------------------------------------------------------------
# Invariant arcs
# ---------------------------------------------------------------------------

def _exit_vertex(system, cv, k, depth, tol):
    """Index ``k'`` with ``S_j(A_k')`` the last point of the arc ``A -> A_k`` in ``K_j``."""
    j = cv.witness
    a = Address((), j)
    vaddr = _vertex_address(system, k, tol)
    chain = arc_chain(system, a, vaddr, depth, tol)
    poly = approximate_arc(system, a, vaddr, depth, tol)
    inside = 0
    while inside < len(chain) and is_prefix(j, chain[inside]):
        inside += 1
    if inside == len(chain):
        exit_pt = poly[-1]
    else:
        exit_pt = _contact_after(system, chain, inside, depth, tol)
    s = compose_word(system.maps, j)
    pre = s.inverse()(exit_pt)
    kk = system.base.vertex_index(pre, 1e-7)
    if kk is None:
        raise PhiUndefined(f"arc from vertex {cv.vertex} to {k} leaves K_j at {exit_pt}, "
                           "not an image of a vertex")
    return kk, poly


def _contact_after(system, chain, inside, depth, tol):
    from .attractor import level_graph, _word_index
    g = level_graph(system, depth, tol).contacts
    p = ("piece", _word_index(chain[inside - 1], system.m))
    q = ("piece", _word_index(chain[inside], system.m))
    common = set(g.graph.neighbors(p)) & set(g.graph.neighbors(q))
    return g.points[sorted(common)[0][1]]


def _vertex_address(system: PolygonalSystem, k: int, tol: float) -> Address:
    from .attractor import vertex_addresses
    return vertex_addresses(system, tol=tol)[k][0]


@dataclass
class InvariantArc:
    endpoint: int
    word: tuple
    polyline: list
    iterations: int


def invariant_arc(system: PolygonalSystem, cv: CyclicVertex, depth: int = 3,
                  tol: float = TOL_GEOM, certify: bool = True) -> InvariantArc:
    """An arc ``gamma_{AB}`` with ``S_i(gamma) inside gamma`` via the vertex map ``phi``."""
    if cv.order != 1:
        raise NotCertified("invariant arcs need an order-one cyclic vertex; refine first")
    if certify:
        verdict = dendrite_check(system, depth)
        if verdict.kind != "CertifiedDendrite":
            raise NotCertified(f"dendrite check at depth {depth}: {verdict.kind}")
    n = system.base.n
    others = [k for k in range(n) if k != cv.vertex]
    if not others:
        raise PhiUndefined("polygon has no other vertex")
    k = others[0]
    seen = {}
    cap = n * n
    for it in range(cap):
        if k in seen:
            start = seen[k]
            period = it - start
            poly = approximate_arc(system, Address((), cv.witness),
                                   _vertex_address(system, k, tol), depth, tol)
            return InvariantArc(k, tuple(cv.witness) * period, poly, it)
        seen[k] = it
        k, _ = _exit_vertex(system, cv, k, depth, tol)
        if k == cv.vertex:
            raise PhiUndefined("phi returned the cyclic vertex itself")
    raise CapExceeded(f"phi did not cycle within {cap} steps")
