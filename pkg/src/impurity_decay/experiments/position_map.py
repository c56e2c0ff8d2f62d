"""Detuning-optimised effective decay over impurity positions inside one plaquette."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from ..couplings import CoincidentEmittersError, assemble_system, impurity_coupling
from ..geometry import LatticeKind, LatticeSpec, Placement, build_lattice, voronoi_partition
from ..geometry.voronoi import VoronoiDiagram, _inside
from ..solver import eigen_sweep
from .common import parallel_map
from .config import ExperimentConfig

OPTIMUM_REL_TOL = 1e-3


@dataclass
class PositionMap:
    kind: str
    points: np.ndarray            # (n, n, 2) cartesian impurity positions
    gamma_min: np.ndarray         # (n, n), NaN where masked
    delta_opt: np.ndarray         # (n, n)
    optima: np.ndarray            # (m, 2)
    optimum_value: float
    voronoi: VoronoiDiagram
    cell_size: float
    centre: np.ndarray
    fractional: Optional[np.ndarray] = None
    cut: dict = field(default_factory=dict)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "gamma_min", "delta_opt"])
            for p, g, d in zip(self.points.reshape(-1, 2), self.gamma_min.ravel(), self.delta_opt.ravel()):
                w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(g)), repr(float(d))])

    def write_cut_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "x", "y", "gamma_min"])
            for s, p, g in zip(self.cut["s"], self.cut["points"], self.cut["gamma_min"]):
                w.writerow([repr(float(s)), repr(float(p[0])), repr(float(p[1])), repr(float(g))])

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "optimum_value": self.optimum_value,
            "optima": self.optima.tolist(),
            "centre": self.centre.tolist(),
            "cell_size": self.cell_size,
            "voronoi_vertices": self.voronoi.vertices.tolist(),
            "voronoi_edges": [e.tolist() for e in self.voronoi.edges],
            "cut_direction": self.cut.get("direction"),
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2)


def _grid(spec: LatticeSpec, plaquette: np.ndarray, grid_n: int):
    a1, a2 = spec.primitive_vectors()
    if spec.kind is LatticeKind.HONEYCOMB:
        lo, hi = plaquette.min(axis=0), plaquette.max(axis=0)
        xs, ys = np.linspace(lo[0], hi[0], grid_n), np.linspace(lo[1], hi[1], grid_n)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([X, Y], axis=-1)
        inside = _inside(pts.reshape(-1, 2), plaquette, tol=1e-12).reshape(grid_n, grid_n)
        cell = float(np.hypot(xs[1] - xs[0], ys[1] - ys[0]))
        return pts, None, inside, cell
    anchor = plaquette[0]
    u = np.linspace(0.0, 1.0, grid_n)
    U, V = np.meshgrid(u, u, indexing="ij")
    frac = np.stack([U, V], axis=-1)
    pts = anchor + U[..., None] * a1 + V[..., None] * a2
    inside = np.ones((grid_n, grid_n), dtype=bool)
    if spec.kind is LatticeKind.TRIANGULAR:
        inside = U + V <= 1 + 1e-12
    h = 1.0 / (grid_n - 1)
    cell = float(max(np.linalg.norm(a1 + a2), np.linalg.norm(a1 - a2)) * h)
    return pts, frac, inside, cell


def _line_through(point, direction, region, n):
    """n points of the chord of convex ``region`` through ``point`` along ``direction``."""
    direction = direction / np.linalg.norm(direction)
    t_lo, t_hi = -np.inf, np.inf
    for k in range(len(region)):
        p, q = region[k], region[(k + 1) % len(region)]
        e = q - p
        normal = np.array([e[1], -e[0]])          # outward for a ccw polygon
        denom = normal @ direction
        num = normal @ (p - point)
        if abs(denom) < 1e-15:
            continue
        t = num / denom
        if denom > 0:
            t_hi = min(t_hi, t)
        else:
            t_lo = max(t_lo, t)
    t = np.linspace(t_lo, t_hi, n)
    return t - t_lo, point + t[:, None] * direction


def run_position_map(spec: LatticeSpec, grid_n: int = 41,
                     config: ExperimentConfig = ExperimentConfig()) -> PositionMap:
    """Per-position minimum over detuning of Gamma_eff, with Voronoi overlay and a 1D cut."""
    if spec.placement is not Placement.INTERSTITIAL:
        raise ValueError("position maps are defined for interstitial placement")
    array = build_lattice(spec, gamma_I=config.gamma_I)
    base = assemble_system(array)
    base.eigen  # noqa: B018 - shared by every cell
    plaquette = array.plaquette
    pts, frac, inside, cell = _grid(spec, plaquette, grid_n)
    sweep = dict(delta_min=config.delta_min, delta_max=config.delta_max, n_points=config.n_points,
                 refine=config.refine, include_poles=config.include_poles,
                 resonance_factor=config.resonance_factor)

    def optimise(p):
        try:
            c = impurity_coupling(array, p)
        except CoincidentEmittersError:
            return np.nan, np.nan
        curve = eigen_sweep(base.with_coupling(c), **sweep)
        return curve.gamma_min / config.gamma_I, curve.delta_min

    flat = pts.reshape(-1, 2)
    mask = inside.ravel()
    results = parallel_map(lambda i: optimise(flat[i]) if mask[i] else (np.nan, np.nan),
                           range(len(flat)), config.threads)
    gmin = np.array([r[0] for r in results]).reshape(grid_n, grid_n)
    dopt = np.array([r[1] for r in results]).reshape(grid_n, grid_n)

    best = np.nanmin(gmin)
    near = np.nan_to_num(gmin, nan=np.inf) <= best * (1 + OPTIMUM_REL_TOL)
    labels, n_groups = ndimage.label(near, structure=np.ones((3, 3)))
    optima = []
    for k in range(1, n_groups + 1):
        idx = np.argwhere(labels == k)
        i, j = idx[np.argmin(gmin[labels == k])]
        optima.append(pts[i, j])
    optima = np.array(optima)

    centre = plaquette.mean(axis=0)
    radius = 2.0 * np.linalg.norm(plaquette - centre, axis=1).max()
    sites = array.lattice_positions[:, :2]
    sites = sites[np.linalg.norm(sites - centre, axis=1) <= radius]
    vor = voronoi_partition(sites, plaquette)

    cut = {}
    edge = vor.longest_edge()
    if edge is not None:
        i, j = np.unravel_index(np.nanargmin(gmin), gmin.shape)
        direction = edge[1] - edge[0]
        s, line = _line_through(pts[i, j], direction, vor.region, grid_n)
        values = [optimise(p)[0] for p in line]
        cut = {"s": s, "points": line, "gamma_min": np.array(values),
               "direction": (direction / np.linalg.norm(direction)).tolist()}

    return PositionMap(spec.kind.value, pts, gmin, dopt, optima, float(best), vor, cell, centre,
                       frac, cut)
