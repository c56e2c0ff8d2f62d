from .lattice import (
    EmitterArray,
    GeometryError,
    LatticeKind,
    LatticeSpec,
    Placement,
    build_lattice,
    default_offset,
    plaquette_polygon,
    primitive_vectors,
)
from .neighbors import NeighborStats, nearest_neighbor_stats
from .spacing import (
    equal_distance_spacing,
    lattice_spacing,
    nearest_site_distance,
    plaquette_distances_oblique,
    rescaled_spacing,
)
from .voronoi import VoronoiDiagram, voronoi_partition

__all__ = [
    "EmitterArray", "GeometryError", "LatticeKind", "LatticeSpec", "NeighborStats", "Placement",
    "VoronoiDiagram", "build_lattice", "default_offset", "equal_distance_spacing", "lattice_spacing",
    "nearest_neighbor_stats", "nearest_site_distance", "plaquette_distances_oblique",
    "plaquette_polygon", "primitive_vectors", "rescaled_spacing", "voronoi_partition",
]
