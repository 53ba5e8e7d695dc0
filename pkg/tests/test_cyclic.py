import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polydendrite import fixtures
from polydendrite.attractor import Address, dendrite_check, eval_address
from polydendrite.cyclic import (CyclicVertex, check_parameter_matching, find_cyclic_vertices,
                                 invariant_arc, order_one_refinement, subordinate_map,
                                 vertex_parameter)
from polydendrite.errors import CapExceeded, NotCertified, Unsubordinated
from polydendrite.geometry import Similarity, densify_polyline, directed_hausdorff
from polydendrite.system import PolygonalSystem, refine

from conftest import close


def test_vicsek_cyclic(vicsek):
    cvs = find_cyclic_vertices(vicsek)
    assert [c.vertex for c in cvs] == [0, 1, 2, 3]
    assert [c.witness for c in cvs] == [(0,), (1,), (2,), (3,)]
    assert all(c.order == 1 for c in cvs)
    assert all(abs(c.point - fixtures.CENTER) > 0.1 for c in cvs)


def test_two_cycle_witnesses():
    s = fixtures.two_cycle()
    cvs = {c.vertex: c for c in find_cyclic_vertices(s)}
    assert cvs[0].witness == (0, 2) and cvs[2].witness == (2, 0)
    assert cvs[0].order == cvs[2].order == 2
    # minimality: no single map fixes either corner
    for c in (cvs[0], cvs[2]):
        assert all(abs(m(c.point) - c.point) > 1e-3 for m in s.maps)


def test_find_rejects_bad_order(vicsek):
    with pytest.raises(ValueError):
        find_cyclic_vertices(vicsek, 0)


@pytest.mark.parametrize("name", ["vicsek", "two_cycle", "orders_2_3"])
def test_witness_fixes_vertex(name):
    s = getattr(fixtures, name)()
    for c in find_cyclic_vertices(s):
        z, err = eval_address(s, Address((), c.witness))
        assert err == 0 and abs(z - c.point) <= 1e-9


@pytest.mark.parametrize("name, n", [("vicsek", 1), ("two_cycle", 2), ("orders_2_3", 6)])
def test_order_one_refinement(name, n):
    s = getattr(fixtures, name)()
    assert order_one_refinement(s) == n
    if n > 1:
        r = refine(s, n)
        before = {c.vertex for c in find_cyclic_vertices(s)}
        assert {c.vertex for c in find_cyclic_vertices(r, 1)} == before


def test_order_one_refinement_cap():
    with pytest.raises(CapExceeded):
        order_one_refinement(fixtures.orders_2_3(), cap=1000)


def test_vertex_parameter_examples(vicsek):
    cv = find_cyclic_vertices(vicsek)[0]
    assert vertex_parameter(vicsek, cv) == 0
    s = PolygonalSystem(vicsek.base, (Similarity(1 / 3, 0.05, 0j),) + vicsek.maps[1:])
    cv = find_cyclic_vertices(s)[0]
    assert vertex_parameter(s, cv) == pytest.approx(0.05 / math.log(1 / 3))
    assert vertex_parameter(s, cv) == pytest.approx(-0.0455, abs=1e-4)
    assert vertex_parameter(s, cv, 1) == pytest.approx((0.05 + 2 * math.pi) / math.log(1 / 3))


def test_subordinate_examples(vicsek):
    sub = subordinate_map(vicsek, 3)
    B = [k for k in sub if close(k, complex(1 / 3, 1 / 3))][0]
    assert {(r.word, r.cyclic) for r in sub[B]} == {((0,), 2), ((4,), 0)}
    A1 = [k for k in sub if close(k, 0)][0]
    assert {(r.word, r.cyclic) for r in sub[A1]} == {((0,), 0)}
    with pytest.raises(Unsubordinated):
        subordinate_map(vicsek, 0)


def test_subordinate_routes_hit_their_vertex(vicsek):
    for B, routes in subordinate_map(refine(vicsek, 2), 2).items():
        for r in routes:
            assert abs(refine(vicsek, 2).map_of(r.word)(r.point) - B) <= 1e-9


@pytest.mark.parametrize("name", ["vicsek", "two_cycle"])
def test_subordinate_total_at_depth(name):
    s = getattr(fixtures, name)()
    bound = 2 * order_one_refinement(s) * s.m
    depth = next(d for d in range(1, bound + 1)
                 if all(subordinate_map(s, d, strict=False).values()))
    assert depth <= bound


def test_matching_vicsek(vicsek):
    rep = check_parameter_matching(vicsek)
    assert rep.kind == "Matched" and rep.spread == 0
    assert all(lam == 0 for e in rep.entries for *_, lam in e.routes)


def test_matching_twisted(twisted):
    _, _, deformed = twisted
    rep = check_parameter_matching(deformed)
    assert rep.matched
    cv = find_cyclic_vertices(deformed)[0]
    s = deformed.maps[0]
    assert cv.lam == pytest.approx(s.rotation / math.log(s.ratio))
    for e in rep.entries:
        assert e.lam == pytest.approx(cv.lam, abs=1e-9)


@pytest.mark.parametrize("eps", [1e-4, 1e-3, 1e-2])
def test_matching_mismatched(eps):
    _, _, deformed = fixtures.mismatched_vicsek(eps)
    rep = check_parameter_matching(deformed)
    assert rep.kind == "Mismatched"
    e = rep.at(deformed.maps[0](deformed.base.vertices[2]))
    assert e is not None and not e.matched
    want = 2 * eps / math.log(3)
    assert e.spread == pytest.approx(want, rel=1e-6)


@given(st.floats(-0.3, 0.3))
def test_rotated_witness_parameter(alpha):
    base = fixtures.vicsek()
    s = PolygonalSystem(base.base, (Similarity(1 / 3, alpha, 0j),) + base.maps[1:])
    cv = find_cyclic_vertices(s)[0]
    assert cv.lam == pytest.approx(alpha / math.log(1 / 3), abs=1e-12)


@pytest.mark.parametrize("name", ["vicsek", "two_cycle"])
def test_certified_implies_matched(name):
    s = getattr(fixtures, name)()
    assert dendrite_check(s, 3).kind == "CertifiedDendrite"
    assert check_parameter_matching(s).matched


def _on_polyline(points, poly, tol):
    dense = densify_polyline(np.array(poly), 1e-3)
    return directed_hausdorff(np.array(points), dense) <= tol


def test_invariant_arc_vicsek(vicsek):
    cv = find_cyclic_vertices(vicsek)[0]
    arc = invariant_arc(vicsek, cv, depth=3)
    assert arc.endpoint == 2 and arc.word == (0,)
    s = vicsek.map_of(arc.word)
    ends = [arc.polyline[0], arc.polyline[-1]]
    assert _on_polyline([s(z) for z in ends], arc.polyline, 1e-3)


def test_invariant_arc_two_cycle():
    s = refine(fixtures.two_cycle(), 2)
    cv = find_cyclic_vertices(s, 1)[0]
    arc = invariant_arc(s, cv, depth=2)
    img = [s.map_of(arc.word)(z) for z in arc.polyline]
    tol = s.q_max ** 2 * s.diameter
    assert _on_polyline(img, arc.polyline, tol)


def test_invariant_arc_requires_order_one():
    s = fixtures.two_cycle()
    cv = find_cyclic_vertices(s)[0]
    with pytest.raises(NotCertified):
        invariant_arc(s, cv)
