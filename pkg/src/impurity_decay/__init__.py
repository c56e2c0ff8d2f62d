"""Effective decay of an impurity embedded in finite two-dimensional emitter arrays."""
from .couplings import (
    CouplingSystem,
    PairCoupling,
    assemble_system,
    collective_decay_matrix,
    green_tensor,
    pair_coupling_circular,
    pair_coupling_general,
)
from .dynamics import Trajectory, fit_decay_rate, integrate_amplitudes
from .geometry import EmitterArray, LatticeSpec, build_lattice, nearest_neighbor_stats
from .solver import (
    ResonanceError,
    SelfEnergy,
    SweepCurve,
    detect_band_edge,
    detuning_sweep,
    effective_decay,
    eigen_sweep,
    self_energy,
)

__version__ = "0.1.0"
