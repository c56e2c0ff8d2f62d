"""Finite two-dimensional emitter arrays with an embedded impurity.

All lengths are in units of the lattice transition wavelength (lambda = 1),
all rates in units of the lattice single-atom decay rate gamma_L.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
COINCIDENCE_TOL = 1e-12


class GeometryError(ValueError):
    """Raised for lattice specifications that cannot be realized."""


class LatticeKind(str, enum.Enum):
    SQUARE = "square"
    TRIANGULAR = "triangular"
    OBLIQUE = "oblique"
    RECTANGULAR = "rectangular"
    HONEYCOMB = "honeycomb"


class Placement(str, enum.Enum):
    INTERSTITIAL = "interstitial"
    SUBSTITUTIONAL = "substitutional"


@dataclass(frozen=True)
class LatticeSpec:
    """Declarative description of a finite lattice plus impurity placement.

    ``impurity_offset`` holds fractional coordinates (u, v) along the two
    primitive vectors, measured from the anchor site of the reference
    plaquette. Parallelogram plaquettes use 0 <= u, v <= 1, the triangular
    plaquette is the "up" triangle u, v >= 0, u + v <= 1, and the honeycomb
    plaquette is the hexagon centred at (2/3, 2/3). ``None`` selects the
    plaquette centre.
    """

    kind: LatticeKind
    spacing: float
    theta: Optional[float] = None
    scale: Optional[float] = None
    n_atoms: int = 100
    placement: Placement = Placement.INTERSTITIAL
    impurity_offset: Optional[tuple[float, float]] = None
    shape: Optional[tuple[int, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", LatticeKind(self.kind))
        object.__setattr__(self, "placement", Placement(self.placement))
        if not self.spacing > 0:
            raise GeometryError(f"spacing must be positive, got {self.spacing}")
        if self.n_atoms < 4:
            raise GeometryError(f"n_atoms must be >= 4, got {self.n_atoms}")
        if self.kind is LatticeKind.OBLIQUE:
            if self.theta is None or not 0 < self.theta < math.pi:
                raise GeometryError(f"oblique lattice needs theta in (0, pi), got {self.theta}")
        if self.kind is LatticeKind.RECTANGULAR:
            if self.scale is None or not self.scale > 0:
                raise GeometryError(f"rectangular lattice needs scale > 0, got {self.scale}")
        if self.impurity_offset is not None:
            off = tuple(float(x) for x in self.impurity_offset)
            if len(off) != 2:
                raise GeometryError("impurity_offset must have two components")
            object.__setattr__(self, "impurity_offset", off)
            if not _offset_in_plaquette(self.kind, off):
                raise GeometryError(f"impurity_offset {off} lies outside the reference plaquette")
        if self.shape is not None:
            object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))

    def primitive_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        return primitive_vectors(self.kind, self.spacing, self.theta, self.scale)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "spacing": self.spacing,
            "theta": self.theta,
            "scale": self.scale,
            "n_atoms": self.n_atoms,
            "placement": self.placement.value,
            "impurity_offset": None if self.impurity_offset is None else list(self.impurity_offset),
            "shape": None if self.shape is None else list(self.shape),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeSpec":
        data = dict(data)
        for key in ("impurity_offset", "shape"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass(frozen=True, eq=False)
class EmitterArray:
    """Concrete positions of the lattice atoms and the impurity."""

    lattice_positions: np.ndarray
    impurity_position: np.ndarray
    gamma_L: float = 1.0
    gamma_I: float = 1.0
    omega: float = TWO_PI
    spec: Optional[LatticeSpec] = None
    plaquette: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.lattice_positions, dtype=float))
        if pos.shape[1] == 2:
            pos = np.column_stack([pos, np.zeros(len(pos))])
        imp = np.asarray(self.impurity_position, dtype=float).ravel()
        if imp.size == 2:
            imp = np.append(imp, 0.0)
        pos.setflags(write=False)
        imp.setflags(write=False)
        object.__setattr__(self, "lattice_positions", pos)
        object.__setattr__(self, "impurity_position", imp)
        if len(pos) == 0:
            raise GeometryError("lattice is empty")
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if dist.min() < COINCIDENCE_TOL:
            i, j = np.unravel_index(np.argmin(dist), dist.shape)
            raise GeometryError(f"lattice atoms {i} and {j} coincide")
        d_imp = np.linalg.norm(pos - imp, axis=1)
        if d_imp.min() < COINCIDENCE_TOL:
            raise GeometryError(f"impurity coincides with lattice atom {int(np.argmin(d_imp))}")

    @property
    def n_lattice(self) -> int:
        return len(self.lattice_positions)

    def impurity_distances(self) -> np.ndarray:
        return np.linalg.norm(self.lattice_positions - self.impurity_position, axis=1)

    def with_impurity(self, position: Sequence[float]) -> "EmitterArray":
        """Same lattice, impurity moved to ``position``."""
        return EmitterArray(
            self.lattice_positions, np.asarray(position, dtype=float), self.gamma_L,
            self.gamma_I, self.omega, self.spec, self.plaquette,
        )

    def translated(self, shift: Sequence[float]) -> "EmitterArray":
        shift = np.asarray(shift, dtype=float).ravel()
        if shift.size == 2:
            shift = np.append(shift, 0.0)
        plaq = None if self.plaquette is None else self.plaquette + shift[:2]
        return EmitterArray(
            self.lattice_positions + shift, self.impurity_position + shift, self.gamma_L,
            self.gamma_I, self.omega, self.spec, plaq,
        )

    def to_json_dict(self) -> dict:
        return {
            "spec": None if self.spec is None else self.spec.to_dict(),
            "positions": self.lattice_positions.tolist(),
            "impurity": self.impurity_position.tolist(),
            "gamma_L": self.gamma_L,
            "gamma_I": self.gamma_I,
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "z", "is_impurity"])
            for x, y, z in self.lattice_positions:
                writer.writerow([repr(x), repr(y), repr(z), 0])
            writer.writerow([*(repr(v) for v in self.impurity_position), 1])

    @classmethod
    def from_json_dict(cls, data: dict) -> "EmitterArray":
        spec = None if data.get("spec") is None else LatticeSpec.from_dict(data["spec"])
        return cls(
            np.asarray(data["positions"], dtype=float),
            np.asarray(data["impurity"], dtype=float),
            gamma_L=data.get("gamma_L", 1.0),
            gamma_I=data.get("gamma_I", 1.0),
            spec=spec,
        )


def primitive_vectors(kind, spacing: float, theta: Optional[float] = None,
                      scale: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Primitive vectors of the (underlying) Bravais lattice.

    For the honeycomb lattice ``spacing`` is the bond length, so the
    triangular Bravais vectors have length sqrt(3) * spacing.
    """
    kind = LatticeKind(kind)
    a = spacing
    if kind is LatticeKind.SQUARE:
        return np.array([a, 0.0]), np.array([0.0, a])
    if kind is LatticeKind.TRIANGULAR:
        return np.array([a, 0.0]), np.array([a / 2, math.sqrt(3) / 2 * a])
    if kind is LatticeKind.OBLIQUE:
        cot = math.cos(theta) / math.sin(theta)
        return np.array([a, 0.0]), np.array([cot * a, a])
    if kind is LatticeKind.RECTANGULAR:
        return np.array([a * scale, 0.0]), np.array([0.0, a])
    A = math.sqrt(3) * a
    return np.array([A, 0.0]), np.array([A / 2, 1.5 * a])


def _offset_in_plaquette(kind: LatticeKind, off: tuple[float, float], tol: float = 1e-12) -> bool:
    u, v = off
    if kind is LatticeKind.TRIANGULAR:
        return u >= -tol and v >= -tol and u + v <= 1 + tol
    if kind is LatticeKind.HONEYCOMB:
        # hexagon around (2/3, 2/3); test in units where the bond length is 1
        a1, a2 = primitive_vectors(kind, 1.0)
        p = (u - 2 / 3) * a1 + (v - 2 / 3) * a2
        return _point_in_convex(p, _hexagon(np.zeros(2), 1.0), tol)
    return -tol <= u <= 1 + tol and -tol <= v <= 1 + tol


def _hexagon(center: np.ndarray, bond: float) -> np.ndarray:
    """Vertices (counter-clockwise) of a honeycomb hexagon with pointy top."""
    ang = math.pi / 2 + np.arange(6) * math.pi / 3
    return center + bond * np.column_stack([np.cos(ang), np.sin(ang)])


def _point_in_convex(p: np.ndarray, poly: np.ndarray, tol: float = 1e-12) -> bool:
    scale = np.abs(poly).max() + 1.0
    for k in range(len(poly)):
        e = poly[(k + 1) % len(poly)] - poly[k]
        w = p - poly[k]
        if e[0] * w[1] - e[1] * w[0] < -tol * scale * np.linalg.norm(e):
            return False
    return True


def patch_shape(n_cells: int, max_aspect: float = 2.0) -> tuple[int, int]:
    """Most balanced factorisation ``n1 * n2 == n_cells`` with n1 <= n2."""
    best = None
    for n1 in range(1, int(math.isqrt(n_cells)) + 1):
        if n_cells % n1 == 0:
            n2 = n_cells // n1
            if n2 / n1 <= max_aspect:
                best = (n1, n2)
    if best is None:
        feasible = _nearest_feasible(n_cells, max_aspect)
        raise GeometryError(
            f"cannot arrange {n_cells} cells in a patch with aspect ratio <= {max_aspect}; "
            f"nearest feasible count is {feasible}"
        )
    return best


def _nearest_feasible(n: int, max_aspect: float) -> int:
    def ok(m):
        return any(m % k == 0 and (m // k) / k <= max_aspect for k in range(1, math.isqrt(m) + 1))
    for step in range(1, n):
        for m in (n - step, n + step):
            if m >= 1 and ok(m):
                return m
    return 1


def plaquette_polygon(kind, spacing, theta=None, scale=None, anchor=(0.0, 0.0)) -> np.ndarray:
    """Corner polygon (counter-clockwise) of the reference plaquette."""
    kind = LatticeKind(kind)
    a1, a2 = primitive_vectors(kind, spacing, theta, scale)
    r0 = np.asarray(anchor, dtype=float)
    if kind is LatticeKind.TRIANGULAR:
        return np.array([r0, r0 + a1, r0 + a2])
    if kind is LatticeKind.HONEYCOMB:
        return _hexagon(r0 + 2 * (a1 + a2) / 3, spacing)
    poly = np.array([r0, r0 + a1, r0 + a1 + a2, r0 + a2])
    if a1[0] * a2[1] - a1[1] * a2[0] < 0:
        poly = poly[::-1]
    return poly


def default_offset(kind) -> tuple[float, float]:
    kind = LatticeKind(kind)
    if kind is LatticeKind.TRIANGULAR:
        return (1 / 3, 1 / 3)
    if kind is LatticeKind.HONEYCOMB:
        return (2 / 3, 2 / 3)
    return (0.5, 0.5)


def _round_argmin(values: np.ndarray) -> int:
    # deterministic tie-breaking: lowest index among values equal to 1e-9 relative
    vmin = values.min()
    return int(np.flatnonzero(values <= vmin + 1e-9 * max(abs(vmin), 1e-300))[0])


def build_lattice(spec: LatticeSpec, gamma_L: float = 1.0, gamma_I: float = 1.0) -> EmitterArray:
    """Construct the finite array described by ``spec``.

    The patch is centred on the centroid of all lattice sites. Interstitial
    impurities sit in the plaquette nearest that centroid; substitutional
    impurities replace the site nearest it.
    """
    kind = spec.kind
    a1, a2 = spec.primitive_vectors()
    per_cell = 2 if kind is LatticeKind.HONEYCOMB else 1
    if spec.n_atoms % per_cell:
        raise GeometryError(
            f"honeycomb patches need an even atom count; nearest feasible is {spec.n_atoms + 1}"
        )
    n_cells = spec.n_atoms // per_cell
    if spec.shape is not None:
        n1, n2 = spec.shape
        if n1 * n2 != n_cells:
            raise GeometryError(f"shape {spec.shape} holds {n1 * n2 * per_cell} atoms, not {spec.n_atoms}")
    else:
        n1, n2 = patch_shape(n_cells)

    ii, jj = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    cells = ii.ravel()[:, None] * a1 + jj.ravel()[:, None] * a2
    if kind is LatticeKind.HONEYCOMB:
        basis_b = (a1 + a2) / 3
        sites = np.stack([cells, cells + basis_b], axis=1).reshape(-1, 2)
    else:
        sites = cells
    centroid = sites.mean(axis=0)
    sites = sites - centroid

    if spec.placement is Placement.SUBSTITUTIONAL:
        k = _round_argmin(np.linalg.norm(sites, axis=1))
        impurity = sites[k].copy()
        lattice = np.delete(sites, k, axis=0)
        anchor, plaq = None, None
        if spec.impurity_offset is not None:
            raise GeometryError("impurity_offset is only meaningful for interstitial placement")
    else:
        anchor = _central_anchor(kind, a1, a2, n1, n2) - centroid
        off = spec.impurity_offset if spec.impurity_offset is not None else default_offset(kind)
        impurity = anchor + off[0] * a1 + off[1] * a2
        lattice = sites
        plaq = plaquette_polygon(kind, spec.spacing, spec.theta, spec.scale, anchor)

    return EmitterArray(lattice, impurity, gamma_L=gamma_L, gamma_I=gamma_I, spec=spec, plaquette=plaq)


def _central_anchor(kind, a1, a2, n1, n2) -> np.ndarray:
    """Anchor site of the plaquette whose centroid is nearest the site centroid."""
    # every plaquette kind anchored at cell (i, j) has all corners in cells i..i+1, j..j+1
    if n1 < 2 or n2 < 2:
        raise GeometryError("patch too small to contain a complete plaquette")
    ii, jj = np.meshgrid(np.arange(n1 - 1), np.arange(n2 - 1), indexing="ij")
    anchors = ii.ravel()[:, None] * a1 + jj.ravel()[:, None] * a2
    site_centroid = ((n1 - 1) * a1 + (n2 - 1) * a2) / 2
    if kind is LatticeKind.HONEYCOMB:
        site_centroid = site_centroid + (a1 + a2) / 6
    centre_frac = {LatticeKind.TRIANGULAR: 1 / 3, LatticeKind.HONEYCOMB: 2 / 3}.get(kind, 1 / 2)
    centres = anchors + centre_frac * (a1 + a2)
    k = _round_argmin(np.linalg.norm(centres - site_centroid, axis=1))
    return anchors[k]
