"""Single-excitation time evolution of impurity plus lattice.

The amplitudes obey i d/dt (b, c) = K (b, c) with
K = [[H_L(delta), C], [C^T, -i gamma_I / 2]], starting from c(0) = 1, b(0) = 0.
Integration is classical fixed-step RK4. Because the equations are linear and
autonomous, one RK4 step is a fixed matrix R(dt); ``stride`` steps between
recorded samples are applied as R(dt)**stride (binary powering), which gives
the same trajectory as stepping one step at a time.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .couplings import CouplingSystem

STEP_SAFETY = 0.05


class StepSizeError(ValueError):
    pass


class FitError(ValueError):
    pass


@dataclass
class Trajectory:
    times: np.ndarray
    impurity: np.ndarray
    population: np.ndarray
    lattice: Optional[np.ndarray] = None
    dt: float = math.nan

    @property
    def impurity_population(self) -> np.ndarray:
        return np.abs(self.impurity) ** 2

    def write_csv(self, path, include_lattice: bool = False) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            header = ["t", "re_c", "im_c", "P_total"]
            if include_lattice and self.lattice is not None:
                n = self.lattice.shape[1]
                header += [f"{p}_b{i}" for i in range(n) for p in ("re", "im")]
            w.writerow(header)
            for k, t in enumerate(self.times):
                row = [repr(float(t)), repr(float(self.impurity[k].real)),
                       repr(float(self.impurity[k].imag)), repr(float(self.population[k]))]
                if include_lattice and self.lattice is not None:
                    for b in self.lattice[k]:
                        row += [repr(float(b.real)), repr(float(b.imag))]
                w.writerow(row)


def generator(system: CouplingSystem, delta: float, gamma_I: Optional[float] = None) -> np.ndarray:
    """Full (N_L + 1) x (N_L + 1) single-excitation matrix K."""
    n = system.n_lattice
    c = np.asarray(system.c_li)
    gI = system.gamma_I if gamma_I is None else gamma_I
    if gI != system.gamma_I:
        # C_LI scales with sqrt(gamma_I)
        c = c * math.sqrt(gI / system.gamma_I)
    K = np.zeros((n + 1, n + 1), dtype=complex)
    K[:n, :n] = system.lattice_block(delta)
    K[:n, n] = c
    K[n, :n] = c
    K[n, n] = -0.5j * gI
    return K


def max_step(system: CouplingSystem, delta: float) -> float:
    lam = np.linalg.eigvals(system.lattice_block(delta)) if system.n_lattice else np.zeros(1)
    return STEP_SAFETY / max(float(np.abs(lam).max()), system.gamma_L)


def rk4_step_matrix(A: np.ndarray, dt: float) -> np.ndarray:
    """R with y(t + dt) = R y(t) for one classical RK4 step of y' = A y."""
    n = len(A)
    hA = dt * A
    R = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 5):
        term = term @ hA / k
        R = R + term
    return R


def integrate_amplitudes(system: CouplingSystem, delta: float, gamma_I: Optional[float] = None,
                         t_max: float = 10.0, dt: Optional[float] = None,
                         n_records: int = 2001, keep_lattice: bool = False) -> Trajectory:
    """RK4 evolution from an excited impurity; records ``n_records`` evenly spaced samples."""
    limit = max_step(system, delta)
    if dt is None:
        dt = limit
    if dt > limit * (1 + 1e-12):
        raise StepSizeError(f"dt={dt:.3g} exceeds the stability limit {limit:.3g}")
    n_steps = max(1, int(math.ceil(t_max / dt)))
    n_records = max(2, min(n_records, n_steps + 1))
    stride = max(1, n_steps // (n_records - 1))
    n_records = n_steps // stride + 1

    A = -1j * generator(system, delta, gamma_I)
    Q = np.linalg.matrix_power(rk4_step_matrix(A, dt), stride)
    n = system.n_lattice
    y = np.zeros(n + 1, dtype=complex)
    y[n] = 1.0
    states = np.empty((n_records, n + 1), dtype=complex)
    states[0] = y
    for k in range(1, n_records):
        y = Q @ y
        states[k] = y
    if not np.all(np.isfinite(states)):
        raise FloatingPointError("non-finite amplitudes")
    times = np.arange(n_records) * stride * dt
    pop = np.sum(np.abs(states) ** 2, axis=1)
    return Trajectory(times, states[:, n].copy(), pop,
                      states[:, :n].copy() if keep_lattice else None, dt)


def fit_decay_rate(trajectory: Trajectory, t_start_fraction: float = 0.2,
                   window_fraction: float = 0.5, min_decades: float = 2.0,
                   min_r2: float = 0.99) -> float:
    """Least-squares slope of -ln|c(t)|^2 over the late part of the trajectory.

    The first ``t_start_fraction`` of the run is discarded; the fit uses the
    last ``window_fraction`` of what remains.
    """
    t = np.asarray(trajectory.times, dtype=float)
    p = np.abs(np.asarray(trajectory.impurity)) ** 2
    t_end = t[-1]
    t0 = t_start_fraction * t_end
    after = t >= t0
    if not np.any(p[after] > 0):
        raise FitError("impurity population vanished")
    drop = np.log10(p[after][0] / max(p[-1], 1e-300))
    if drop < min_decades:
        raise FitError(f"population drops by only {drop:.2f} decades after t={t0:.3g}")
    t_fit0 = t_end - window_fraction * (t_end - t0)
    sel = (t >= t_fit0) & (p > 0)
    if sel.sum() < 3:
        raise FitError("too few samples in the fit window")
    x, y = t[sel], np.log(p[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    if r2 < min_r2:
        raise FitError(f"fit window is not exponential (R^2 = {r2:.4f})")
    return float(-slope)
