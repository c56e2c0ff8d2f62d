from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from ..couplings import CouplingSystem
from ..geometry import LatticeKind, LatticeSpec, Placement, build_lattice, lattice_spacing
from ..solver import SweepCurve, detuning_sweep, eigen_sweep
from .config import ExperimentConfig

T = TypeVar("T")
R = TypeVar("R")


def run_sweep(system: CouplingSystem, config: ExperimentConfig, **overrides) -> SweepCurve:
    kwargs = {**config.sweep_kwargs(), **overrides}
    if config.method == "direct":
        return detuning_sweep(system, **kwargs)
    return eigen_sweep(system, **kwargs)


def case_spec(kind, placement, config: ExperimentConfig, substitution: str = "rescaled",
              triangular: str = "equal_distance") -> LatticeSpec:
    kind = LatticeKind(kind)
    theta = config.theta if kind is LatticeKind.OBLIQUE else None
    scale = config.scale if kind is LatticeKind.RECTANGULAR else None
    a = lattice_spacing(kind, placement, config.a_sq, theta, scale, substitution, triangular)
    return LatticeSpec(kind, a, theta=theta, scale=scale, n_atoms=config.n_atoms,
                       placement=Placement(placement))


def case_array(kind, placement, config: ExperimentConfig, **conventions):
    return build_lattice(case_spec(kind, placement, config, **conventions), gamma_I=config.gamma_I)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def log_error(computed: float, reference: float) -> float:
    if not (computed > 0 and reference > 0):
        return math.inf
    return abs(math.log(computed / reference))
