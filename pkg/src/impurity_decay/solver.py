"""Adiabatic elimination of the lattice: self-energy, effective decay, detuning sweeps."""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import LinAlgWarning, lapack, lu_factor, lu_solve

from .couplings import CouplingSystem

DEFAULT_WINDOW = (-5.0, 15.0)
DEFAULT_POINTS = 2001
RCOND_LIMIT = 1e-14
EIGEN_COND_LIMIT = 1e8
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class ResonanceError(ArithmeticError):
    """The lattice block is singular to working precision at this detuning."""

    def __init__(self, delta: float, rcond: float):
        super().__init__(f"lattice block singular at delta_LI={delta:.6g} (rcond={rcond:.3g})")
        self.delta = delta
        self.rcond = rcond


@dataclass(frozen=True)
class SelfEnergy:
    sigma: complex
    delta: float

    @property
    def shift(self) -> float:
        """Collective frequency shift Re(Sigma)."""
        return self.sigma.real


def self_energy(system: CouplingSystem, delta: float) -> SelfEnergy:
    """Sigma_I = -C^T H_L(delta)^-1 C by LU factorisation."""
    H = system.lattice_block(delta)
    with warnings.catch_warnings():
        # exact singularity is reported through rcond below
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(H, check_finite=False)
    anorm = np.abs(H).sum(axis=0).max()
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    if rcond < RCOND_LIMIT:
        raise ResonanceError(delta, rcond)
    x = lu_solve((lu, piv), np.asarray(system.c_li), check_finite=False)
    return SelfEnergy(complex(-(system.c_li @ x)), float(delta))


def effective_decay(gamma_I: float, sigma) -> float:
    """Gamma_eff = gamma_I - 2 Im(Sigma)."""
    if isinstance(sigma, SelfEnergy):
        sigma = sigma.sigma
    return gamma_I - 2.0 * np.imag(sigma)


def pole_self_energy(eigenvalues, weights, deltas, gamma_L: float = 1.0) -> np.ndarray:
    """Sigma(delta) = -sum_k w_k / (lam_k - delta - i gamma_L / 2), vectorised over ``deltas``."""
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    out = np.empty(len(deltas), dtype=complex)
    for start in range(0, len(deltas), 512):
        d = deltas[start:start + 512, None]
        out[start:start + 512] = -np.sum(weights / (eigenvalues - d - 0.5j * gamma_L), axis=1)
    return out


def golden_section_minimize(f: Callable[[float], float], a: float, b: float,
                            tol: float = 1e-4) -> tuple[float, float]:
    """Golden-section search for a minimum of ``f`` on [a, b] to interval width ``tol``."""
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def detect_band_edge(detunings, gamma_eff, gamma_I: float = 1.0,
                     resonance_factor: float = 10.0) -> float:
    """Largest detuning of a resonance peak (local maximum >= factor * gamma_I).

    Returns -inf when the samples contain no resonance.
    """
    d = np.asarray(detunings, dtype=float)
    g = np.asarray(gamma_eff, dtype=float)
    if len(d) < 3:
        raise ValueError("need at least three samples")
    inner = g[1:-1]
    peak = (inner > g[:-2]) & (inner >= g[2:]) & (inner >= resonance_factor * gamma_I)
    idx = np.flatnonzero(peak) + 1
    return float(d[idx].max()) if len(idx) else -math.inf


@dataclass
class SweepCurve:
    detunings: np.ndarray
    gamma_eff: np.ndarray
    delta_min: float
    gamma_min: float
    band_edge: float
    gamma_I: float = 1.0
    fallback_used: bool = False
    method: str = "direct"
    shift: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def d_be(self) -> Optional[float]:
        """Distance of the optimum above the band edge; None when no band edge was found."""
        if not math.isfinite(self.band_edge):
            return None
        return max(0.0, self.delta_min - self.band_edge)

    def summary(self) -> dict:
        return {
            "delta_min": self.delta_min,
            "gamma_min": self.gamma_min,
            "band_edge": self.band_edge if math.isfinite(self.band_edge) else None,
            "d_BE": self.d_be,
            "fallback_used": self.fallback_used,
            "method": self.method,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["delta_LI", "gamma_eff"])
            for d, g in zip(self.detunings, self.gamma_eff):
                w.writerow([repr(float(d)), repr(float(g))])

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2)


def detuning_grid(system: CouplingSystem, delta_min: float, delta_max: float, n_points: int,
                  include_poles: bool = True) -> np.ndarray:
    """Uniform grid, optionally augmented with the lattice resonance centres Re(lam_k).

    Subradiant resonances are far narrower than any practical grid step; sampling
    them at their centres is what makes the band edge visible.
    """
    if not delta_min < delta_max:
        raise ValueError("delta_min must be below delta_max")
    if n_points < 3:
        raise ValueError("need at least three grid points")
    grid = np.linspace(delta_min, delta_max, n_points)
    if include_poles and system.n_lattice:
        re = system.eigen.eigenvalues.real
        grid = np.union1d(grid, re[(re > delta_min) & (re < delta_max)])
    return grid


def _finish(system, deltas, values, evaluate, refine, resonance_factor, **extra) -> SweepCurve:
    finite = np.isfinite(values)
    if not finite.any():
        raise ResonanceError(float(deltas[0]), 0.0)
    k = int(np.nanargmin(np.where(finite, values, np.nan)))
    d_star, g_star = float(deltas[k]), float(values[k])
    if refine and 0 < k < len(deltas) - 1:
        d_ref, g_ref = golden_section_minimize(evaluate, deltas[k - 1], deltas[k + 1], tol=1e-4)
        if g_ref < g_star:
            d_star, g_star = float(d_ref), float(g_ref)
    edge = detect_band_edge(deltas[finite], values[finite], system.gamma_I, resonance_factor)
    return SweepCurve(deltas, values, d_star, g_star, edge, system.gamma_I, **extra)


def detuning_sweep(system: CouplingSystem, delta_min: float = DEFAULT_WINDOW[0],
                   delta_max: float = DEFAULT_WINDOW[1], n_points: int = DEFAULT_POINTS,
                   refine: bool = True, include_poles: bool = True,
                   resonance_factor: float = 10.0, detunings=None) -> SweepCurve:
    """Gamma_eff(delta) from one dense linear solve per detuning."""
    deltas = (np.asarray(detunings, dtype=float) if detunings is not None
              else detuning_grid(system, delta_min, delta_max, n_points, include_poles))
    values = np.empty(len(deltas))
    shifts = np.empty(len(deltas))
    for i, d in enumerate(deltas):
        try:
            s = self_energy(system, d)
        except ResonanceError:
            values[i] = shifts[i] = np.nan
            continue
        values[i] = effective_decay(system.gamma_I, s)
        shifts[i] = s.shift

    def evaluate(d):
        try:
            return effective_decay(system.gamma_I, self_energy(system, d))
        except ResonanceError:
            return math.inf

    return _finish(system, deltas, values, evaluate, refine, resonance_factor,
                   method="direct", shift=shifts)


def eigen_sweep(system: CouplingSystem, delta_min: float = DEFAULT_WINDOW[0],
                delta_max: float = DEFAULT_WINDOW[1], n_points: int = DEFAULT_POINTS,
                refine: bool = True, include_poles: bool = True,
                resonance_factor: float = 10.0, detunings=None,
                cond_limit: float = EIGEN_COND_LIMIT) -> SweepCurve:
    """Gamma_eff(delta) from the cached eigendecomposition of H_cpl.

    Falls back to :func:`detuning_sweep` when the eigenvector matrix is too
    ill-conditioned; the result then carries ``fallback_used=True``.
    """
    cache = system.eigen
    if not np.isfinite(cache.condition) or cache.condition > cond_limit:
        curve = detuning_sweep(system, delta_min, delta_max, n_points, refine, include_poles,
                               resonance_factor, detunings)
        curve.fallback_used = True
        return curve
    deltas = (np.asarray(detunings, dtype=float) if detunings is not None
              else detuning_grid(system, delta_min, delta_max, n_points, include_poles))
    lam, w = cache.eigenvalues, system.eigen_weights
    sigma = pole_self_energy(lam, w, deltas, system.gamma_L)
    values = system.gamma_I - 2.0 * sigma.imag

    def evaluate(d):
        return float(system.gamma_I - 2.0 * pole_self_energy(lam, w, [d], system.gamma_L)[0].imag)

    return _finish(system, deltas, values, evaluate, refine, resonance_factor,
                   method="eigen", shift=sigma.real)
