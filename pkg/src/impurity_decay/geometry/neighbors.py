from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import EmitterArray, GeometryError


@dataclass(frozen=True)
class NeighborStats:
    n_nearest: int
    n_distinct_distances: int
    d_min: float
    neighbor_indices: tuple[int, ...]
    distinct_distances: tuple[float, ...] = ()


def merge_distances(values, rel_tol: float = 1e-6) -> list[float]:
    """Collapse sorted values that agree within ``rel_tol`` relatively."""
    out: list[float] = []
    for v in np.sort(np.asarray(values, dtype=float)):
        if out and abs(v - out[-1]) <= rel_tol * max(abs(v), abs(out[-1])):
            continue
        out.append(float(v))
    return out


def nearest_neighbor_stats(array: EmitterArray, rel_tol: float = 1e-6) -> NeighborStats:
    """Count the impurity's nearest neighbours and their distinct pairwise distances."""
    if array.n_lattice == 0:
        raise GeometryError("lattice is empty")
    d = array.impurity_distances()
    d_min = float(d.min())
    idx = np.flatnonzero(d <= d_min * (1.0 + rel_tol))
    pts = array.lattice_positions[idx]
    iu = np.triu_indices(len(idx), k=1)
    pair = np.linalg.norm(pts[:, None] - pts[None], axis=-1)[iu]
    distinct = merge_distances(pair, rel_tol)
    return NeighborStats(len(idx), len(distinct), d_min, tuple(int(i) for i in idx), tuple(distinct))
