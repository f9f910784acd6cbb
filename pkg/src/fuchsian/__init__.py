"""Convex Fuchsian polyhedra in hyperbolic 3-space.

Construction of orbit convex hulls over cocompact Fuchsian groups, induced
cone metrics, numerical infinitesimal-rigidity certificates, and the inverse
realization solver recovering the unique convex Fuchsian polyhedron inducing
a given hyperbolic cone metric with positive singular curvature.
"""

from . import (conemetric, deformlab, edgemap, fileio, groups, hyperboloid,
               polyhedra, realize)
from .conemetric import ConeMetricSurface, edge_vector, total_area
from .groups import (FuchsianGroup, ZVCPolygon, build_polygon, enumerate_orbit,
                     extend_to_h3, group_from_polygon, reference_zvc,
                     regular_group)
from .polyhedra import (FuchsianPolyhedron, PolyhedronParams, build,
                        check_convexity, export_obj, induced_metric,
                        triangulate)
from .realize import RealizationProblem, RealizationResult, default_initial, solve

__version__ = "0.1.0"
