import cmath
import math

import numpy as np
import pytest
import shapely.geometry as sg
from hypothesis import assume, given
from hypothesis import strategies as st

from polydendrite.errors import DegenerateSource, InvalidPolygon, NotContracting, NotIncident
from polydendrite.geometry import (TOL_GEOM, Disjoint, Polygon, Similarity, SinglePoint,
                                   Violation, angle_at_vertex, hausdorff_distance,
                                   min_angle_between_incident_sides, normalize_angle,
                                   polygon_pair_contact, signed_area,
                                   similarity_from_two_points)

from conftest import close, square

coord = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
points = st.builds(complex, coord, coord)
ratios = st.floats(0.05, 0.95)
angles = st.floats(-math.pi, math.pi)
sims = st.builds(Similarity, ratios, angles, points)


def shapely_poly(p):
    return sg.Polygon([(z.real, z.imag) for z in p.vertices])


# ---------------------------------------------------------------------------
# similarity_from_two_points
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("src, dst, q, alpha, fixed", [
    ((0, 1), (0, 0.5), 0.5, 0.0, 0),
    ((0, 1), (0, 0.5j), 0.5, math.pi / 2, 0),
    ((0, 1 + 1j), (0, (1 + 1j) / 3), 1 / 3, 0.0, 0),
])
def test_two_point_examples(src, dst, q, alpha, fixed):
    s = similarity_from_two_points(src[0], src[1], dst[0], dst[1])
    assert s.ratio == pytest.approx(q, abs=1e-12)
    assert s.rotation == pytest.approx(alpha, abs=1e-12)
    assert close(s.fixed, fixed)
    assert close(s(src[0]), dst[0]) and close(s(src[1]), dst[1])


def test_two_point_errors():
    with pytest.raises(DegenerateSource):
        similarity_from_two_points(1j, 1j, 0, 0.5)
    with pytest.raises(NotContracting):
        similarity_from_two_points(0, 1, 0, 2)
    assert not Similarity(1.0, 0.0, 0j).is_contracting


@given(points, points, ratios, angles, points)
def test_two_point_property(s1, s2, q, a, d1):
    assume(abs(s2 - s1) > 1e-3)
    d2 = d1 + q * cmath.exp(1j * a) * (s2 - s1)
    s = similarity_from_two_points(s1, s2, d1, d2)
    assert abs(s(s1) - d1) <= TOL_GEOM * 10
    assert abs(s(s2) - d2) <= TOL_GEOM * 10
    assert math.isclose(s.ratio, q, rel_tol=1e-9)
    assert -math.pi < s.rotation <= math.pi


@given(sims, sims, points)
def test_compose_and_inverse(S, T, z):
    ST = S @ T
    assert abs(ST(z) - S(T(z))) <= 1e-9
    assert math.isclose(ST.ratio, S.ratio * T.ratio, rel_tol=1e-9)
    inv = S.inverse()
    assert abs(S(inv(z)) - z) <= 1e-8 * max(1, 1 / S.ratio)


@given(sims)
def test_affine_and_fixed_forms_agree(S):
    assert abs(abs(S.a) - S.ratio) <= TOL_GEOM
    assert abs(S(S.fixed) - S.fixed) <= TOL_GEOM
    assert Similarity.from_affine(S.a, S.b).is_close(S, 1e-8)


@given(st.floats(-20, 20))
def test_normalize_angle_range(a):
    b = normalize_angle(a)
    assert -math.pi < b <= math.pi
    assert abs(cmath.exp(1j * a) - cmath.exp(1j * b)) < 1e-9


# ---------------------------------------------------------------------------
# Polygons and angles
# ---------------------------------------------------------------------------

L_SHAPE = Polygon((0j, 2 + 0j, 2 + 1j, 1 + 1j, 1 + 2j, 2j))


def _cross_angle(poly, k):
    # independent oracle: turning direction from the cross product
    n = poly.n
    a, b, c = poly.vertices[k - 1], poly.vertices[k], poly.vertices[(k + 1) % n]
    u, w = a - b, c - b
    inner = math.acos(max(-1, min(1, (u.real * w.real + u.imag * w.imag) / abs(u) / abs(w))))
    turn = (b - a).real * (c - b).imag - (b - a).imag * (c - b).real
    return inner if turn > 0 else 2 * math.pi - inner


def test_angles():
    for k in range(4):
        assert angle_at_vertex(square(0, 0, 1), k) == pytest.approx(math.pi / 2)
    tri = Polygon((0j, 1 + 0j, complex(0.5, math.sqrt(3) / 2)))
    for k in range(3):
        assert angle_at_vertex(tri, k) == pytest.approx(math.pi / 3)
    assert _cross_angle(L_SHAPE, 3) == pytest.approx(3 * math.pi / 2)
    assert angle_at_vertex(L_SHAPE, 3) == pytest.approx(_cross_angle(L_SHAPE, 3))
    for k in range(L_SHAPE.n):
        assert angle_at_vertex(L_SHAPE, k) == pytest.approx(_cross_angle(L_SHAPE, k))


@given(st.lists(st.floats(1.0, 1.9), min_size=3, max_size=12), st.floats(0, 2 * math.pi),
       st.floats(0.5, 3))
def test_angle_sum(weights, phase, r):
    # gap weights in [1, 1.9] keep every gap below pi, so the polygon is convex
    gaps = 2 * math.pi * np.array(weights) / sum(weights)
    thetas = phase + np.concatenate([[0.0], np.cumsum(gaps)[:-1]])
    poly = Polygon(tuple(r * cmath.exp(1j * t) for t in thetas))
    total = sum(angle_at_vertex(poly, k) for k in range(poly.n))
    assert abs(total - (poly.n - 2) * math.pi) <= poly.n * TOL_GEOM


def test_polygon_rejects_bad_input():
    with pytest.raises(InvalidPolygon):
        Polygon((0j, 1 + 0j))
    with pytest.raises(InvalidPolygon):
        Polygon((0j, 1 + 1j, 1 + 0j, 1j))      # bow tie
    with pytest.raises(InvalidPolygon):
        Polygon((0j, 1j, 1 + 1j, 1 + 0j))
    assert signed_area(Polygon.from_points((0j, 1j, 1 + 1j, 1 + 0j)).vertices) > 0


# ---------------------------------------------------------------------------
# Pairwise contacts
# ---------------------------------------------------------------------------

def _brute_distance(A, B):
    # oracle: min vertex-to-edge distances
    sa, sb = shapely_poly(A), shapely_poly(B)
    return sa.distance(sb)


def test_contact_examples():
    a, b = square(0, 0, 1 / 3), square(2 / 3, 0, 1 / 3)
    c = polygon_pair_contact(a, b)
    assert isinstance(c, Disjoint)
    assert c.margin == pytest.approx(1 / 3) == pytest.approx(_brute_distance(a, b))

    c = polygon_pair_contact(square(0, 0, 1 / 3), square(1 / 3, 1 / 3, 1 / 3))
    assert isinstance(c, SinglePoint) and c.shared_vertex
    assert close(c.point, complex(1 / 3, 1 / 3))
    inter = shapely_poly(square(0, 0, 1 / 3)).intersection(shapely_poly(square(1 / 3, 1 / 3, 1 / 3)))
    assert inter.geom_type == "Point"

    c = polygon_pair_contact(square(0, 0, 1), square(1, 0, 1))
    assert isinstance(c, Violation)


def test_contact_nonvertex_point():
    tri = Polygon((0j, 1 + 0j, 0.5 + 1j))
    c = polygon_pair_contact(square(0, -1, 1), Polygon((0.5 + 0j, 1.5 + 0j, 1 + 1j)))
    assert not isinstance(c, SinglePoint) or not c.shared_vertex
    c = polygon_pair_contact(tri, Polygon((0.5 - 1j, 0.7 - 1j, 0.5 + 0j)))
    assert isinstance(c, SinglePoint) and not c.shared_vertex


boxes = st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 3))


@given(boxes, boxes)
def test_contact_agrees_with_area_oracle(b1, b2):
    # integer corners keep the shapely oracle exact
    A, B = square(*b1), square(*b2)
    c = polygon_pair_contact(A, B)
    inter = shapely_poly(A).intersection(shapely_poly(B))
    if inter.is_empty:
        assert isinstance(c, Disjoint)
        assert c.margin == pytest.approx(_brute_distance(A, B), abs=1e-12)
    elif inter.geom_type == "Point":
        assert isinstance(c, SinglePoint)
        assert close(c.point, complex(inter.x, inter.y))
    else:
        assert isinstance(c, Violation)


@given(boxes, boxes, angles)
def test_contact_symmetric(b1, b2, a):
    rot = Similarity(0.5, a, 0j)
    A = square(b1[0] / 3, b1[1] / 3, b1[2] / 3).image(rot)
    B = square(b2[0] / 3, b2[1] / 3, b2[2] / 3).image(rot)
    c1, c2 = polygon_pair_contact(A, B), polygon_pair_contact(B, A)
    assert c1.kind == c2.kind
    if isinstance(c1, Disjoint):
        assert c1.margin == pytest.approx(c2.margin, abs=1e-12)
    if isinstance(c1, SinglePoint):
        assert close(c1.point, c2.point) and c1.shared_vertex == c2.shared_vertex


def _direction_oracle(polys, shared):
    dirs = []
    for k, p in enumerate(polys):
        for i, v in enumerate(p.vertices):
            if abs(v - shared) < 1e-9:
                n = p.n
                dirs += [(k, p.vertices[(i + 1) % n] - v), (k, p.vertices[i - 1] - v)]
    best = math.inf
    for k1, u in dirs:
        for k2, w in dirs:
            if k1 != k2:
                cosang = (u.real * w.real + u.imag * w.imag) / abs(u) / abs(w)
                best = min(best, math.acos(max(-1, min(1, cosang))))
    return best


def test_min_angle(vicsek):
    pieces = [vicsek.pieces[0], vicsek.pieces[4]]
    v = complex(1 / 3, 1 / 3)
    assert min_angle_between_incident_sides(pieces, v) == pytest.approx(math.pi / 2)
    assert _direction_oracle(pieces, v) == pytest.approx(math.pi / 2)

    a = square(-1, -1, 1)
    b = square(0, 0, 1).image(Similarity(1 - 1e-9, math.pi / 4, 0j))
    b = Polygon(tuple(z for z in b.vertices))
    got = min_angle_between_incident_sides([a, b], 0j)
    assert got == pytest.approx(_direction_oracle([a, b], 0j))
    assert got == pytest.approx(math.pi / 4)

    with pytest.raises(NotIncident):
        min_angle_between_incident_sides([square(0, 0, 1)], 0j)


def test_hausdorff():
    A = np.array([0, 1, 1j])
    B = np.array([0, 1, 1j, 0.5 + 0.5j])
    assert hausdorff_distance(A, B) == pytest.approx(math.sqrt(0.5))
    assert hausdorff_distance(A, A) == 0
