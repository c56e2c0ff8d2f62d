"""Distances and pair couplings inside one oblique plaquette as the angle varies."""
from __future__ import annotations

import numpy as np

from ..couplings import pair_coupling_circular
from ..geometry import plaquette_distances_oblique


def run_plaquette_couplings(theta_min: float, theta_max: float, n: int,
                            a_sq: float = 0.15) -> list[dict]:
    if not (0 < theta_min <= theta_max < np.pi):
        raise ValueError("theta range must lie inside (0, pi)")
    rows = []
    for theta in np.linspace(theta_min, theta_max, n):
        d = plaquette_distances_oblique(float(theta), a_sq)
        J, G = pair_coupling_circular(np.array(d))
        row = {"theta": float(theta)}
        for k in range(4):
            row[f"d{k + 1}"] = d[k]
            row[f"J{k + 1}"] = float(J[k])
            row[f"Gamma{k + 1}"] = float(G[k])
        rows.append(row)
    return rows
