#!/usr/bin/env python3
"""A walk through the Vicsek system.

Validates the polygonal system, certifies its attractor as a dendrite,
prints the geometric constants and the admissible deformation size, and
writes a picture of the level-2 pieces to ``vicsek.svg``.

    python3 demos/vicsek_tour.py [outdir]
"""
import sys
from pathlib import Path

from polydendrite import fixtures
from polydendrite.attractor import Address, approximate_arc, dendrite_check
from polydendrite.cyclic import find_cyclic_vertices, vertex_parameter
from polydendrite.deformation import delta_max, geometric_constants
from polydendrite.render import RenderOptions, render
from polydendrite.system import validate

outdir = Path(sys.argv[1] if len(sys.argv) > 1 else ".")

s = fixtures.vicsek()
rep = validate(s)
print(f"classification: {rep.classification}")

# the pieces meet only at the corners of the centre square
d = dendrite_check(s, depth=4)
print(f"dendrite check at depth 4: {d.kind}")
for g in d.graphs:
    print(f"  level {g.level}: {len(g.labels)} pieces, "
          f"{len(g.contacts.points)} contact points, tree={g.is_tree}")

# corners of P are fixed by the corner maps
for cv in find_cyclic_vertices(s):
    print(f"cyclic vertex {cv.vertex} at {cv.point:.4f}, witness {cv.witness}, "
          f"lambda {vertex_parameter(s, cv):.4f}")

geo = geometric_constants(s)
print(f"rho0={geo.rho0:.4f} rho1={geo.rho1:.4f} rho2={geo.rho2:.4f} alpha0={geo.alpha0:.4f}")
dm = delta_max(s)
print(f"delta_max = {dm.delta_max:.4e} (bound {dm.binding} binds)")

# the arc between opposite corners runs along the diagonal
arc = approximate_arc(s, Address((), (0,)), Address((), (2,)), 3)
print(f"corner-to-corner arc at depth 3 has {len(arc)} points")

path = outdir / "vicsek.svg"
path.write_text(render(s, RenderOptions(depth=2)))
print(f"wrote {path}")
