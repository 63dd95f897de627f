"""Entanglement witnesses built from far-field light of multilevel emitter arrays."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    DetectionChannel,
    EmitterArray,
    TransitionTable,
    direction_from_angles,
    structure_factor,
    zeta,
)
from .hilbert import DensityMatrix, StateVector, mix_white_noise  # noqa: E402
from .loos import LooFamily, build_loos  # noqa: E402
from .scan import AngularGrid, WitnessField, mirror_check, stereographic, sweep  # noqa: E402
from .states import (  # noqa: E402
    dicke_symmetric,
    make_state,
    singlet_antisymmetric,
    two_qutrit_example,
    w_state,
)
from .witness import (  # noqa: E402
    NumericalFailure,
    WitnessBreakdown,
    compute_moments,
    noise_threshold,
    polarization_blind_values,
    witness_min,
)

__all__ = [
    "AngularGrid", "DensityMatrix", "DetectionChannel", "EmitterArray", "LooFamily",
    "NumericalFailure", "StateVector", "TransitionTable", "WitnessBreakdown", "WitnessField",
    "build_loos", "compute_moments", "dicke_symmetric", "direction_from_angles", "make_state",
    "mirror_check", "mix_white_noise", "noise_threshold", "polarization_blind_values",
    "singlet_antisymmetric", "stereographic", "structure_factor", "sweep", "two_qutrit_example",
    "w_state", "witness_min", "zeta",
]
