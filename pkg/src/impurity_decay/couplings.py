"""Free-space dipole-dipole couplings and the single-excitation system matrices.

Natural units: lambda = 1, c = 1, hbar = 1, so omega = 2 pi; rates in gamma_L.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from .geometry.lattice import TWO_PI, EmitterArray

CIRCULAR_DIPOLE = np.array([1.0, 1.0j, 0.0]) / math.sqrt(2.0)
MIN_DISTANCE = 1e-9
# below this omega*r the decay-rate closed form loses digits to cancellation
_SERIES_CUTOFF = 1e-2


class CoincidentEmittersError(ValueError):
    def __init__(self, message: str, pair: Optional[tuple[int, int]] = None):
        super().__init__(message)
        self.pair = pair


class PairCoupling(NamedTuple):
    J: float | np.ndarray
    Gamma: float | np.ndarray


def green_tensor(r_vec, omega: float = TWO_PI) -> np.ndarray:
    """Vacuum dyadic Green's tensor of a point dipole (no contact term), 3x3 complex."""
    r_vec = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(r_vec))
    if r < MIN_DISTANCE:
        raise CoincidentEmittersError(f"|r| = {r:.3g} is below {MIN_DISTANCE:g}; emitters coincide")
    # Entries are assembled in extended precision (where the platform has it):
    # near zeros of J the isotropic and r-hat r-hat parts cancel to ~1e-3 of
    # their size, and double rounding here would dominate the contraction error.
    ld = np.longdouble
    rv = r_vec.astype(ld)
    rr = np.sqrt(np.sum(rv * rv))
    x = ld(omega) * rr
    c, s = np.cos(x), np.sin(x)
    iso_re, iso_im = c - s / x - c / x**2, s + c / x - s / x**2
    an_re, an_im = c - 3 * s / x - 3 * c / x**2, s + 3 * c / x - 3 * s / x**2
    rhat = rv / rr
    outer = np.outer(rhat, rhat)
    eye = np.eye(3, dtype=ld)
    scale = 4 * ld(math.pi) * rr
    re = (iso_re * eye - an_re * outer) / scale
    im = (iso_im * eye - an_im * outer) / scale
    return re.astype(float) + 1j * im.astype(float)


def pair_coupling_general(d_i, d_j, r_vec, gamma_i: float = 1.0, gamma_j: float = 1.0,
                          omega: float = TWO_PI) -> PairCoupling:
    """Coherent coupling J and collective decay Gamma from a full tensor contraction."""
    d_i = np.asarray(d_i, dtype=complex)
    d_j = np.asarray(d_j, dtype=complex)
    for d in (d_i, d_j):
        if abs(np.linalg.norm(d) - 1) > 1e-12:
            raise ValueError("dipole vectors must be normalised")
    G = green_tensor(r_vec, omega)
    pre = math.sqrt(gamma_i * gamma_j) / omega
    J = -3 * math.pi * pre * (d_i.conj() @ G.real @ d_j)
    Gamma = 6 * math.pi * pre * (d_i.conj() @ G.imag @ d_j)
    return PairCoupling(float(J.real), float(Gamma.real))


def pair_coupling_circular(r, gamma_i=1.0, gamma_j=1.0, omega: float = TWO_PI) -> PairCoupling:
    """Closed-form (J, Gamma) for circular dipoles in the plane; vectorised over ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise CoincidentEmittersError("distance must be positive")
    pre = np.sqrt(np.asarray(gamma_i) * np.asarray(gamma_j))
    x = omega * r
    sin, cos = np.sin(x), np.cos(x)
    J = -3 * pre / (8 * x) * (cos + sin / x + cos / x**2)
    # Gamma = (3/4) pre [sin x / x + (sin x - x cos x) / x^3]
    with np.errstate(invalid="ignore", divide="ignore"):
        tail = (sin - x * cos) / x**3
    x2 = x * x
    series = 1 / 3 - x2 / 30 + x2 * x2 / 840 - x2**3 / 45360
    tail = np.where(x < _SERIES_CUTOFF, series, tail)
    Gamma = 0.75 * pre * (np.sinc(x / math.pi) + tail)
    if J.ndim == 0:
        return PairCoupling(float(J), float(Gamma))
    return PairCoupling(J, Gamma)


@dataclass(frozen=True)
class EigenCache:
    """Eigendecomposition H_cpl = V diag(lam) V^-1 of the coupling block."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    condition: float
    _lu: tuple = field(repr=False)

    def weights(self, c_li: np.ndarray) -> np.ndarray:
        """Pole residues w_k = (V^T C)_k (V^-1 C)_k."""
        from scipy.linalg import lu_solve

        left = self.vectors.T @ c_li
        right = lu_solve(self._lu, c_li)
        return left * right


def eigendecompose(h_cpl: np.ndarray) -> EigenCache:
    from scipy.linalg import lu_factor

    lam, V = np.linalg.eig(h_cpl)
    cond = float(np.linalg.cond(V))
    return EigenCache(lam, V, cond, lu_factor(V))


@dataclass(frozen=True, eq=False)
class CouplingSystem:
    """Lattice coupling block H_cpl and impurity coupling vector C_LI.

    The lattice block at detuning delta is ``H_cpl - (delta + i gamma_L / 2) I``.
    """

    h_cpl: np.ndarray
    c_li: np.ndarray
    gamma_L: float = 1.0
    gamma_I: float = 1.0

    def __post_init__(self):
        for name in ("h_cpl", "c_li"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_lattice(self) -> int:
        return len(self.c_li)

    def lattice_block(self, delta: float) -> np.ndarray:
        return self.h_cpl - (delta + 0.5j * self.gamma_L) * np.eye(self.n_lattice)

    @cached_property
    def eigen(self) -> EigenCache:
        return eigendecompose(np.asarray(self.h_cpl))

    @cached_property
    def eigen_weights(self) -> np.ndarray:
        return self.eigen.weights(np.asarray(self.c_li))

    def with_coupling(self, c_li: np.ndarray, gamma_I: Optional[float] = None) -> "CouplingSystem":
        """New system sharing H_cpl (and its eigen cache, once computed)."""
        new = CouplingSystem(self.h_cpl, c_li, self.gamma_L,
                             self.gamma_I if gamma_I is None else gamma_I)
        if "eigen" in self.__dict__:
            new.__dict__["eigen"] = self.__dict__["eigen"]
        return new

    def decay_matrix(self) -> np.ndarray:
        """Real symmetric [Gamma_ij] with gamma_L on the diagonal."""
        G = -2.0 * np.asarray(self.h_cpl).imag
        return G + self.gamma_L * np.eye(self.n_lattice)

    def to_json_dict(self) -> dict:
        def pairs(a):
            a = np.asarray(a)
            return np.stack([a.real, a.imag], axis=-1).tolist()
        return {
            "gamma_L": self.gamma_L,
            "gamma_I": self.gamma_I,
            "h_cpl": pairs(self.h_cpl),
            "c_li": pairs(self.c_li),
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)


def impurity_coupling(array: EmitterArray, position=None, gamma_I: Optional[float] = None) -> np.ndarray:
    """C_LI for an impurity at ``position`` (default: the array's impurity)."""
    if position is None:
        pos = array.impurity_position
    else:
        pos = np.asarray(position, dtype=float).ravel()
        if pos.size == 2:
            pos = np.append(pos, 0.0)
    gI = array.gamma_I if gamma_I is None else gamma_I
    r = np.linalg.norm(array.lattice_positions - pos, axis=1)
    if r.min() < MIN_DISTANCE:
        k = int(np.argmin(r))
        raise CoincidentEmittersError(f"impurity coincides with lattice atom {k}", pair=(k, -1))
    J, G = pair_coupling_circular(r, gI, array.gamma_L, array.omega)
    return J - 0.5j * G


def collective_decay_matrix(array: EmitterArray) -> np.ndarray:
    """Real symmetric [Gamma_ij] over all emitters, impurity last."""
    pos = np.vstack([array.lattice_positions, array.impurity_position])
    rates = np.append(np.full(array.n_lattice, array.gamma_L), array.gamma_I)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    np.fill_diagonal(dist, 1.0)
    _, G = pair_coupling_circular(dist, rates[:, None], rates[None, :], array.omega)
    np.fill_diagonal(G, rates)
    return G


def assemble_system(array: EmitterArray) -> CouplingSystem:
    """Fill H_cpl and C_LI with circular-dipole couplings."""
    pos = array.lattice_positions
    n = len(pos)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    iu = np.triu_indices(n, k=1)
    if n > 1 and dist[iu].min() < MIN_DISTANCE:
        k = int(np.argmin(dist[iu]))
        pair = (int(iu[0][k]), int(iu[1][k]))
        raise CoincidentEmittersError(f"lattice atoms {pair} coincide", pair=pair)
    h = np.zeros((n, n), dtype=complex)
    if n > 1:
        J, G = pair_coupling_circular(dist[iu], array.gamma_L, array.gamma_L, array.omega)
        h[iu] = J - 0.5j * G
        h[(iu[1], iu[0])] = h[iu]
    return CouplingSystem(h, impurity_coupling(array), array.gamma_L, array.gamma_I)
