"""Impurity moved along the plaquette diagonal toward a vacant lattice site."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..couplings import assemble_system, impurity_coupling
from ..geometry import EmitterArray, GeometryError, LatticeSpec, build_lattice
from ..solver import SweepCurve
from .common import parallel_map, run_sweep
from .config import ExperimentConfig

# offsets from the plaquette centre, in units of the lattice spacing
VACANCY_OFFSETS = ((0.0, 0.0), (-0.1, -0.1), (-0.2, -0.2), (-0.3, -0.3), (-0.5, -0.5))


@dataclass
class VacancyCurve:
    offset: tuple[float, float]
    position: np.ndarray
    curve: SweepCurve


def vacancy_array(config: ExperimentConfig) -> EmitterArray:
    """Square array with the lower-left corner of the central plaquette removed."""
    a = config.a_sq
    full = build_lattice(LatticeSpec("square", a, n_atoms=config.n_atoms), gamma_I=config.gamma_I)
    centre = full.impurity_position
    vacancy = centre + np.array([-0.5 * a, -0.5 * a, 0.0])
    d = np.linalg.norm(full.lattice_positions - vacancy, axis=1)
    k = int(np.argmin(d))
    if d[k] > 1e-9:
        raise GeometryError("vacancy site not found")
    return EmitterArray(np.delete(full.lattice_positions, k, axis=0), centre,
                        full.gamma_L, full.gamma_I, spec=full.spec, plaquette=full.plaquette)


def run_vacancy_scan(config: ExperimentConfig = ExperimentConfig(),
                     offsets=VACANCY_OFFSETS) -> list[VacancyCurve]:
    array = vacancy_array(config)
    base = assemble_system(array)
    centre = array.impurity_position

    def one(off):
        pos = centre + config.a_sq * np.array([off[0], off[1], 0.0])
        system = base.with_coupling(impurity_coupling(array, pos))
        return VacancyCurve(tuple(off), pos, run_sweep(system, config))

    base.eigen  # noqa: B018 - build the shared cache before fanning out
    return parallel_map(one, offsets, config.threads)
