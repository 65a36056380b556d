"""Necklace triangulations, their equilateral surfaces and discrete conformal flattenings."""

from .maps import (RootedTriangulation, ball, combinatorial_distance, from_faces,
                   rooted_isomorphic)
from .necklace import build_minus, build_plus, build_rooted, glue_word, glued_map
from .uniformize import flatten, layout

__version__ = "0.1.0"

__all__ = ["RootedTriangulation", "ball", "combinatorial_distance", "from_faces",
           "rooted_isomorphic", "build_minus", "build_plus", "build_rooted", "glue_word",
           "glued_map", "flatten", "layout"]
