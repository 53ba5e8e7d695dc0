"""Reference systems and deformations used by the tests, demos and CLI.

Map numbering of the Vicsek-type systems: 0..3 are the corner maps fixing
(0,0), (1,0), (1,1), (0,1) in this order and 4 is the central map.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from .geometry import Polygon, Similarity, similarity_from_two_points
from .system import PolygonalSystem

UNIT_SQUARE = Polygon((0j, 1 + 0j, 1 + 1j, 1j))
CENTER = 0.5 + 0.5j


def vicsek(center_ratio: float = 1 / 3) -> PolygonalSystem:
    """Four corner homotheties and one central homothety on the unit square."""
    maps = [Similarity(1 / 3, 0.0, v) for v in UNIT_SQUARE.vertices]
    maps.append(Similarity(center_ratio, 0.0, CENTER))
    return PolygonalSystem(UNIT_SQUARE, tuple(maps))


def sierpinski() -> PolygonalSystem:
    tri = Polygon((0j, 1 + 0j, complex(0.5, math.sqrt(3) / 2)))
    return PolygonalSystem(tri, tuple(Similarity(0.5, 0.0, v) for v in tri.vertices))


def two_disjoint() -> PolygonalSystem:
    """Two corner pieces that do not touch (contact graph disconnected)."""
    return PolygonalSystem(UNIT_SQUARE, (Similarity(0.25, 0.0, 0j), Similarity(0.25, 0.0, 1 + 1j)))


def single_contact() -> PolygonalSystem:
    """Two half-size corner squares meeting at the centre."""
    return PolygonalSystem(UNIT_SQUARE, (Similarity(0.5, 0.0, 0j), Similarity(0.5, 0.0, 1 + 1j)))


def two_cycle() -> PolygonalSystem:
    """Vicsek layout whose maps 0 and 2 swap the corners (0,0) and (1,1).

    S_0(0) = 1+i and S_2(1+i) = 0, so both corners are cyclic of order 2.
    """
    s0 = Similarity.from_affine(-1 / 3, 1 + 1j)
    s2 = Similarity.from_affine(-1 / 3, (1 + 1j) / 3)
    v = vicsek()
    maps = list(v.maps)
    maps[0], maps[2] = s2, s0
    # map 0 keeps the piece at the origin corner, map 2 the piece at (1,1)
    return PolygonalSystem(UNIT_SQUARE, tuple(maps))


def orders_2_3() -> PolygonalSystem:
    """Pentagon whose vertices form a 2-cycle and a 3-cycle under the maps."""
    pent = Polygon(tuple(cmath.exp(2j * math.pi * k / 5) for k in range(5)))
    V = pent.vertices
    q = 0.2
    pairs = [(0, 1), (1, 0), (2, 3), (3, 4), (4, 2)]
    maps = tuple(Similarity.from_affine(q, V[d] - q * V[s]) for s, d in pairs)
    return PolygonalSystem(pent, maps)


def plus_star(arms: int = 4) -> PolygonalSystem:
    """Rhombi with a 60 degree apex at the origin rotated around it.

    Every map fixes the apex, so ``arms`` pieces meet at the origin only.
    """
    rh = Polygon((0j, cmath.exp(-1j * math.pi / 6), math.sqrt(3) + 0j, cmath.exp(1j * math.pi / 6)))
    maps = tuple(Similarity(0.25, 2 * math.pi * k / arms, 0j) for k in range(arms))
    return PolygonalSystem(rh, maps)


def angle_pair(angle: float = math.pi / 6) -> PolygonalSystem:
    """Two square pieces sharing (1/2, 1/2) whose nearest sides form ``angle``."""
    s1 = Similarity(0.5, 0.0, 0j)
    rot = 1.5 * math.pi + angle
    s2 = Similarity.from_affine(0.3 * cmath.exp(1j * rot), CENTER)
    return PolygonalSystem(UNIT_SQUARE, (s1, s2))


def segment_overlap() -> PolygonalSystem:
    """Disjoint pieces whose attractor parts share a line segment.

    The attractor is the unit interval; the chevron base polygon avoids it,
    so the pieces 0 and 2 are disjoint polygons while
    ``K_0 & K_2 = [1/8, 3/8]``.
    """
    chevron = Polygon((0j, complex(0.5, 0.1), 1 + 0j, complex(0.5, 0.5)))
    maps = (Similarity.from_affine(0.5, 0), Similarity.from_affine(0.5, 0.5),
            Similarity.from_affine(-0.25, 0.375))
    return PolygonalSystem(chevron, maps)


# ---------------------------------------------------------------------------
# Deformations
# ---------------------------------------------------------------------------

def _spec_from_maps(base: PolygonalSystem, vertex_images, new_maps):
    from .deformation import DeformationSpec
    pairs = list(zip(base.base.vertices, vertex_images))
    for s, s2 in zip(base.maps, new_maps):
        for A, A2 in zip(base.base.vertices, vertex_images):
            _add_pair(pairs, s(A), s2(A2))
    return DeformationSpec.from_pairs(pairs)


def _add_pair(pairs, z, w, tol=1e-9):
    """Append ``z -> w`` unless ``z`` is already a source (up to rounding)."""
    for z0, _ in pairs:
        if abs(z0 - z) <= tol:
            return
    pairs.append((z, w))


def vicsek_deformation(corner_images, center_map: Similarity):
    """Deformation of VICSEK determined by moved corners and a new central map.

    Each corner map fixes its moved corner and sends the opposite corner to
    the image of that corner under the new central map, which keeps every
    shared-vertex identity of the base system.
    """
    from .deformation import build_deformed_system
    base = vicsek()
    C = [complex(c) for c in corner_images]
    maps = []
    for k in range(4):
        opp = (k + 2) % 4
        maps.append(similarity_from_two_points(C[k], C[opp], C[k], center_map(C[k])))
    maps.append(center_map)
    spec = _spec_from_maps(base, C, maps)
    return base, spec, build_deformed_system(base, spec)


def twisted_vicsek(theta: float):
    """VICSEK whose central piece is turned by ``theta`` about the centre.

    Outer corners stay fixed; corner pieces track the moved inner vertices.
    The construction is symmetric under quarter turns, so all corner maps
    share ratio and rotation.
    """
    rot = Similarity(1.0, theta, CENTER)
    center = rot @ Similarity(1 / 3, 0.0, CENTER)
    return vicsek_deformation(UNIT_SQUARE.vertices, center)


def mismatched_vicsek(eps: float):
    """VICSEK with corner map 0 turned by ``eps`` and corner map 2 by ``-eps``.

    The central map and the remaining corner maps are solved so that all
    vertex identities survive; the parameters at the contact of pieces 0 and
    4 differ by ``2 eps / ln(1/3)``.
    """
    from .deformation import build_deformed_system
    base = vicsek()
    V = UNIT_SQUARE.vertices
    s0 = Similarity(1 / 3, eps, V[0])
    s2 = Similarity(1 / 3, -eps, V[2])
    center = similarity_from_two_points(V[0], V[2], s0(V[2]), s2(V[0]))
    s1 = similarity_from_two_points(V[1], V[3], V[1], center(V[1]))
    s3 = similarity_from_two_points(V[3], V[1], V[3], center(V[3]))
    maps = [s0, s1, s2, s3, center]
    spec = _spec_from_maps(base, V, maps)
    return base, spec, build_deformed_system(base, spec)


def random_vicsek_deformation(rng: np.random.Generator, scale: float):
    """Random deformation of VICSEK: corners and central map perturbed by ~scale."""
    V = UNIT_SQUARE.vertices
    C = [v + scale * complex(*rng.uniform(-1, 1, 2)) for v in V]
    center = Similarity(1 / 3 + scale * rng.uniform(-1, 1),
                        3 * scale * rng.uniform(-1, 1),
                        CENTER + 1.5 * scale * complex(*rng.uniform(-1, 1, 2)))
    return vicsek_deformation(C, center)


def global_rotation(base: PolygonalSystem, angle: float):
    """Every vertex turned by ``angle`` about the centroid of ``P``."""
    from .deformation import DeformationSpec, build_deformed_system
    g = Similarity(1.0, angle, base.base.centroid)
    pts = list(base.base.vertices) + [v for p in base.pieces for v in p.vertices]
    pairs = []
    for p in pts:
        _add_pair(pairs, p, g(p))
    spec = DeformationSpec.from_pairs(pairs)
    return spec, build_deformed_system(base, spec)
