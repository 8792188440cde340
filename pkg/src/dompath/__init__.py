"""Indoor dominant-path radio propagation via parametric shortest paths."""

from .floorplan import (Corner, Floorplan, FloorplanError, Point, RadioConstants,
                        ValidationError, Wall, deflection_angle, load_floorplan,
                        parse_floorplan, segment_penetration)
from .generators import generate_maze, generate_office
from .graph import G1, G2Explicit, build_g1, build_g2_explicit, intra_corner_loss
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Corner", "Floorplan", "FloorplanError", "G1", "G2Explicit", "Point",
    "RadioConstants", "ValidationError", "Wall", "build_g1", "build_g2_explicit",
    "deflection_angle", "generate_maze", "generate_office", "intra_corner_loss",
    "load_floorplan", "parse_floorplan", "segment_penetration",
]
