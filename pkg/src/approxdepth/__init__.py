"""Approximate depth queries over arrangements of simple geometric objects."""

from .geometry import (DepthEstimate, DomainError, Halfplane, HyperplaneD, ParameterError,
                       ValidationError)
from .halfplane import PDStructure, build_pd, query_pd
from .halfspace import HalfspaceStructure, build_halfspace_structure, query_halfspace
from .maxdepth import MaxDepthResult, approx_max_depth, grid_centers
from .naive import NaiveTree, build_naive, max_depth_naive, query_naive
from .params import Params, choose_parameters, choose_parameters_d, choose_parameters_simplex3
from .scenes import Scene, generate_scene, read_scene, write_scene
from .simplices import Simplex3Structure, build_simplex3_structure, query_simplex3
from .triangles import TriangleStructure, build_triangle_structure, query_triangle

__all__ = [
    "DepthEstimate", "DomainError", "Halfplane", "HyperplaneD", "ParameterError",
    "ValidationError", "Params", "choose_parameters", "choose_parameters_d",
    "choose_parameters_simplex3", "PDStructure", "build_pd", "query_pd", "HalfspaceStructure",
    "build_halfspace_structure", "query_halfspace", "MaxDepthResult", "approx_max_depth",
    "grid_centers", "NaiveTree", "build_naive", "max_depth_naive", "query_naive", "Scene",
    "generate_scene", "read_scene", "write_scene", "Simplex3Structure",
    "build_simplex3_structure", "query_simplex3", "TriangleStructure",
    "build_triangle_structure", "query_triangle",
]
