"""Polygonal self-similar systems whose attractors are dendrites.

Validation of contractible and generalized polygonal systems, finite-depth
dendrite certification, cyclic-vertex parameters and their matching
condition, small deformations with explicit bounds, and the conjugating
map between the undeformed and deformed attractors.
"""
from .attractor import (Address, CertifiedDendrite, Inconclusive, RefutedTree, approximate_arc,
                        chain_between, check_intersection_condition, dendrite_check,
                        eval_address, iterate, level_graph, postcritical_set,
                        ramification_order)
from .cyclic import (check_parameter_matching, find_cyclic_vertices, invariant_arc,
                     order_one_refinement, subordinate_map, vertex_parameter)
from .deformation import (ConjugatingMap, DeformationSpec, build_deformed_system,
                          certify_dendrite, delta_max, derived_constants, geometric_constants,
                          hatf_eval, holder_check, log_strip_check, perturbation_bounds_check,
                          validate_deformation)
from .geometry import TOL_GEOM, TOL_MARGIN, Polygon, Similarity, similarity_from_two_points
from .io import load_spec, load_system, save_system
from .render import RenderOptions, render
from .system import PolygonalSystem, contact_graph, refine, validate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
