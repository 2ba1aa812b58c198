"""Qudit circuit simulation around an ancilla-free, log-depth n-qudit Toffoli."""
from .circuit import Cinc, Circuit, CircuitError, Cphase, MultiInc, Single, WireSpec, emit, parse, validate
from .gates import DomainError, ResourceError
from .statevec import StateVector, apply, prepare_basis, probability_of, run

__all__ = [
    "Cinc", "Circuit", "CircuitError", "Cphase", "MultiInc", "Single", "WireSpec",
    "emit", "parse", "validate", "DomainError", "ResourceError",
    "StateVector", "apply", "prepare_basis", "probability_of", "run",
]
