"""Voronoi partition of lattice sites, clipped to a convex region.

Two routes: exact half-plane intersection (default) and a brute-force
nearest-site classification on a grid with local vertex refinement.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .lattice import GeometryError


@dataclass(frozen=True, eq=False)
class VoronoiDiagram:
    edges: list[np.ndarray]      # each (2, 2): segment endpoints
    vertices: np.ndarray         # (V, 2)
    region: np.ndarray           # (K, 2) convex polygon, counter-clockwise
    edge_sites: list[tuple[int, int]]

    def longest_edge(self) -> np.ndarray | None:
        if not self.edges:
            return None
        return max(self.edges, key=lambda e: float(np.linalg.norm(e[1] - e[0])))


def _clip(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the part of ``poly`` with normal . x <= offset (Sutherland-Hodgman, one plane)."""
    if len(poly) == 0:
        return poly
    out = []
    vals = poly @ normal - offset
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        fp, fq = vals[k], vals[(k + 1) % n]
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return np.array(out) if out else np.empty((0, 2))


def _dedupe_ring(poly: np.ndarray, tol: float) -> np.ndarray:
    keep = []
    for p in poly:
        if keep and np.linalg.norm(p - keep[-1]) <= tol:
            continue
        keep.append(p)
    if len(keep) > 1 and np.linalg.norm(keep[0] - keep[-1]) <= tol:
        keep.pop()
    return np.array(keep)


def _dedupe_points(points, tol: float) -> np.ndarray:
    out: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > tol for q in out):
            out.append(np.asarray(p))
    return np.array(out).reshape(-1, 2)


def _validate(sites: np.ndarray, region: np.ndarray):
    if len(sites) < 3:
        raise GeometryError("Voronoi partition needs at least three sites")
    centred = sites - sites.mean(axis=0)
    if np.linalg.matrix_rank(centred, tol=1e-12 * np.abs(centred).max()) < 2:
        raise GeometryError("sites are collinear")
    if len(region) < 3:
        raise GeometryError("region must be a polygon with at least three corners")


def _ccw(poly: np.ndarray) -> np.ndarray:
    x, y = poly[:, 0], poly[:, 1]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    return poly if area > 0 else poly[::-1]


def equidistant_count(point, sites: np.ndarray, rel_tol: float = 1e-9) -> int:
    d = np.linalg.norm(sites - point, axis=1)
    return int(np.sum(d <= d.min() * (1 + rel_tol)))


def voronoi_partition(sites, region, grid_n: int = 2001, method: str = "halfplane") -> VoronoiDiagram:
    """Voronoi edges and vertices of ``sites`` inside the convex ``region``.

    Vertices are points equidistant from three or more nearest sites.
    ``grid_n`` is only used by ``method="grid"``.
    """
    sites = np.asarray(sites, dtype=float)[:, :2]
    region = _ccw(np.asarray(region, dtype=float)[:, :2])
    _validate(sites, region)
    if method == "halfplane":
        return _halfplane(sites, region)
    if method == "grid":
        return _grid(sites, region, grid_n)
    raise ValueError(f"unknown method {method!r}")


def _halfplane(sites, region) -> VoronoiDiagram:
    scale = np.abs(region).max() + np.abs(sites).max()
    tol = 1e-10 * scale
    edges, edge_sites, vertex_candidates = [], [], []
    for i, p in enumerate(sites):
        cell = region.copy()
        for j, q in enumerate(sites):
            if j == i:
                continue
            normal = q - p
            cell = _clip(cell, normal, normal @ (p + q) / 2)
            if len(cell) == 0:
                break
        cell = _dedupe_ring(cell, tol)
        if len(cell) < 3:
            continue
        for k in range(len(cell)):
            a, b = cell[k], cell[(k + 1) % len(cell)]
            vertex_candidates.append(a)
            mid = (a + b) / 2
            d = np.linalg.norm(sites - mid, axis=1)
            order = np.argsort(d)
            j = int(order[1]) if order[0] == i else int(order[0])
            if abs(d[j] - d[i]) <= 1e-9 * d[i] and i < j:
                edges.append(np.array([a, b]))
                edge_sites.append((i, j))
    vertices = [v for v in vertex_candidates if equidistant_count(v, sites) >= 3]
    return VoronoiDiagram(edges, _dedupe_points(vertices, 1e-8 * scale), region, edge_sites)


def _inside(points: np.ndarray, poly: np.ndarray, tol: float = 0.0) -> np.ndarray:
    mask = np.ones(len(points), dtype=bool)
    for k in range(len(poly)):
        e = poly[(k + 1) % len(poly)] - poly[k]
        w = points - poly[k]
        mask &= (e[0] * w[:, 1] - e[1] * w[:, 0]) >= -tol
    return mask


def _grid(sites, region, grid_n: int) -> VoronoiDiagram:
    lo, hi = region.min(axis=0), region.max(axis=0)
    xs = np.linspace(lo[0], hi[0], grid_n)
    ys = np.linspace(lo[1], hi[1], grid_n)
    h = max(xs[1] - xs[0], ys[1] - ys[0])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    pts = pts[_inside(pts, region, tol=1e-12)]
    # nearest three sites per grid point, in chunks
    idx3 = np.empty((len(pts), 3), dtype=int)
    d3 = np.empty((len(pts), 3))
    for start in range(0, len(pts), 100_000):
        chunk = pts[start:start + 100_000]
        d = np.linalg.norm(chunk[:, None, :] - sites[None], axis=-1)
        order = np.argsort(d, axis=1)[:, :3]
        idx3[start:start + len(chunk)] = order
        d3[start:start + len(chunk)] = np.take_along_axis(d, order, axis=1)
    cand = pts[(d3[:, 2] - d3[:, 0]) < 2.0 * h]

    def spread(x):
        d = np.sort(np.linalg.norm(sites - x, axis=1))
        return d[2] - d[0]

    vertices = []
    for group in _cluster(cand, 3.0 * h):
        start = group[np.argmin([spread(x) for x in group])]
        res = minimize(spread, start, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        if res.fun < 1e-7 * (np.abs(sites).max() + 1) and _inside(res.x[None], region, tol=1e-9)[0]:
            vertices.append(res.x)
    vertices = _dedupe_points(vertices, 2.0 * h)

    # edges: grid points with two (and only two) near-equidistant nearest sites
    edges, edge_sites = [], []
    on_edge = (d3[:, 1] - d3[:, 0]) < h
    pairs = np.sort(idx3[on_edge, :2], axis=1)
    for pair in {tuple(p) for p in pairs.tolist()}:
        sel = pts[on_edge][(pairs[:, 0] == pair[0]) & (pairs[:, 1] == pair[1])]
        if len(sel) < 3:
            continue
        p, q = sites[pair[0]], sites[pair[1]]
        direction = np.array([-(q - p)[1], (q - p)[0]])
        direction /= np.linalg.norm(direction)
        mid = (p + q) / 2
        t = (sel - mid) @ direction
        edges.append(np.array([mid + t.min() * direction, mid + t.max() * direction]))
        edge_sites.append(pair)
    return VoronoiDiagram(edges, vertices, region, edge_sites)


def _cluster(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage groups of points closer than ``radius``."""
    from scipy.sparse.csgraph import connected_components
    from scipy.spatial import cKDTree

    if len(points) == 0:
        return []
    tree = cKDTree(points)
    graph = tree.sparse_distance_matrix(tree, radius, output_type="coo_matrix")
    n, labels = connected_components(graph, directed=False)
    return [points[labels == k] for k in range(n)]
