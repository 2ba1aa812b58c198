"""Mixed-radix state-vector simulation.

Amplitudes are stored flat with wire 0 as the most significant digit, so a
basis label reads left to right as wire 0, wire 1, ...
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import Cinc, Circuit, Cphase, GateOp, MultiInc, Single
from .gates import DomainError, single_matrix

MAX_STATE_DIM = 2**26
BASIS_TOL = 1e-10


class IntegrityError(RuntimeError):
    pass


def encode(dims: Sequence[int], digits: Sequence[int]) -> int:
    index = 0
    for d, x in zip(dims, digits):
        index = index * d + x
    return index


def decode(dims: Sequence[int], index: int) -> tuple[int, ...]:
    digits = []
    for d in reversed(dims):
        index, x = divmod(index, d)
        digits.append(x)
    return tuple(reversed(digits))


def format_digits(digits: Sequence[int], dims: Sequence[int] | None = None) -> str:
    """One character per wire when every level fits in a decimal digit, else comma-separated."""
    limit = max(dims) if dims is not None else max(digits, default=0) + 1
    if limit <= 10:
        return "".join(str(x) for x in digits)
    return ",".join(str(x) for x in digits)


def parse_digits(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        raise DomainError("empty digit string")
    try:
        if "," in text:
            return tuple(int(t) for t in text.split(","))
        return tuple(int(c) for c in text)
    except ValueError:
        raise DomainError(f"malformed digit string {text!r}") from None


class StateVector:
    def __init__(self, dims: Sequence[int], amps: np.ndarray | None = None):
        self.dims = tuple(int(d) for d in dims)
        size = int(np.prod(self.dims, dtype=np.int64))
        if size > MAX_STATE_DIM:
            raise DomainError(f"Hilbert dimension {size} exceeds guard {MAX_STATE_DIM}")
        if amps is None:
            amps = np.zeros(size, dtype=complex)
            amps[0] = 1
        amps = np.asarray(amps, dtype=complex)
        if amps.shape != (size,):
            raise DomainError(f"amplitude array has shape {amps.shape}, expected ({size},)")
        self.amps = amps

    @property
    def n(self) -> int:
        return len(self.dims)

    def copy(self) -> "StateVector":
        return StateVector(self.dims, self.amps.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def tensor(self) -> np.ndarray:
        """View of the amplitudes shaped by ``dims`` (writes go through)."""
        return self.amps.reshape(self.dims)

    def basis_digits(self, tol: float = BASIS_TOL) -> tuple[int, ...] | None:
        """Digits of the single occupied basis state, or None for superpositions."""
        k = int(np.argmax(np.abs(self.amps)))
        if abs(1.0 - abs(self.amps[k])) > tol:
            return None
        return decode(self.dims, k)

    def label(self) -> str:
        digits = self.basis_digits()
        return "superposed" if digits is None else format_digits(digits, self.dims)


def prepare_basis(dims: Sequence[int], digits: Sequence[int]) -> StateVector:
    if len(dims) != len(digits):
        raise DomainError(f"{len(digits)} digits for {len(dims)} wires")
    for i, (d, x) in enumerate(zip(dims, digits)):
        if not 0 <= x < d:
            raise DomainError(f"digit {x} on wire {i} outside [0, {d})")
    state = StateVector(dims, np.zeros(int(np.prod(dims, dtype=np.int64)), dtype=complex))
    state.amps[encode(dims, digits)] = 1
    return state


def prepare_uniform(dims: Sequence[int], d: int) -> StateVector:
    """Equal superposition over the computational levels ``0..d-1`` of every wire."""
    t = np.zeros(dims, dtype=complex)
    t[(slice(0, d),) * len(dims)] = 1
    return StateVector(dims, t.ravel() / np.sqrt(d ** len(dims)))


def _wire_view(state: StateVector, wire: int) -> np.ndarray:
    pre = int(np.prod(state.dims[:wire], dtype=np.int64))
    return state.amps.reshape(pre, state.dims[wire], -1)


def apply_matrix(state: StateVector, wire: int, u: np.ndarray) -> None:
    """Apply an ``m x m`` matrix to levels ``0..m-1`` of ``wire`` in place."""
    view = _wire_view(state, wire)
    m = u.shape[0]
    view[:, :m, :] = u @ view[:, :m, :]


def _controlled_roll(t: np.ndarray, controls: Iterable[tuple[int, int]], target: int, m: int, shift: int) -> None:
    index: list = [slice(None)] * t.ndim
    for w, v in controls:
        index[w] = v
    index[target] = slice(0, m)
    axis = sum(1 for s in index[:target] if not isinstance(s, int))
    index = tuple(index)
    t[index] = np.roll(t[index], shift, axis=axis)


def _check_op(state: StateVector, op: GateOp) -> None:
    wires = op.wires
    if any(not 0 <= w < state.n for w in wires) or len(set(wires)) != len(wires):
        raise DomainError(f"op {op} does not fit {state.n} wires")
    if isinstance(op, (Single, Cinc, MultiInc)):
        target = op.wire if isinstance(op, Single) else op.target
        if not 2 <= op.modulus <= state.dims[target]:
            raise DomainError(f"modulus {op.modulus} invalid for wire {target} of dim {state.dims[target]}")


def apply(state: StateVector, op: GateOp) -> StateVector:
    """Apply ``op`` in place and return the state."""
    _check_op(state, op)
    if isinstance(op, Single):
        if op.kind in ("x", "xinv"):
            t = state.tensor()
            _controlled_roll(t, (), op.wire, op.modulus, 1 if op.kind == "x" else -1)
        elif op.kind == "z":
            view = _wire_view(state, op.wire)
            m = op.modulus
            view[:, :m, :] *= np.exp(2j * np.pi * np.arange(m) / m)[None, :, None]
        else:
            apply_matrix(state, op.wire, single_matrix(op.kind, op.modulus))
    elif isinstance(op, Cinc):
        if not 0 <= op.control_value < state.dims[op.control]:
            raise DomainError(f"control value {op.control_value} out of range")
        _controlled_roll(state.tensor(), ((op.control, op.control_value),), op.target, op.modulus, op.delta)
    elif isinstance(op, MultiInc):
        ctrls = tuple((w, op.control_value) for w in op.controls)
        _controlled_roll(state.tensor(), ctrls, op.target, op.modulus, 1)
    elif isinstance(op, Cphase):
        index: list = [slice(None)] * state.n
        for w, v in op.controls:
            index[w] = v
        index[op.target] = op.target_value
        state.tensor()[tuple(index)] *= np.exp(1j * op.phase)
    else:
        raise DomainError(f"unsupported op {op!r}")
    return state


@dataclass(frozen=True)
class TraceRecord:
    cycle_index: int
    basis_label: str


def run(
    circuit: Circuit,
    state: StateVector,
    trace: bool = False,
    moments: Sequence[Sequence[GateOp]] | None = None,
) -> list[TraceRecord]:
    """Apply the circuit in order.

    With ``trace`` a record is taken after every op. Passing ``moments``
    (a partition of the ops into consecutive groups) records once per group
    instead; the ops applied are then exactly the concatenated moments.
    """
    if tuple(state.dims) != circuit.dims:
        raise DomainError(f"state dims {state.dims} do not match circuit dims {circuit.dims}")
    groups = moments if moments is not None else [(op,) for op in circuit.ops]
    if moments is not None and tuple(op for g in moments for op in g) != tuple(circuit.ops):
        raise DomainError("moments do not partition the circuit ops in order")
    records = []
    for k, group in enumerate(groups, start=1):
        for op in group:
            apply(state, op)
        if trace or moments is not None:
            records.append(TraceRecord(k, state.label()))
    return records


def probability_of(state: StateVector, digits: Sequence[int]) -> float:
    for i, (d, x) in enumerate(zip(state.dims, digits)):
        if not 0 <= x < d:
            raise DomainError(f"digit {x} on wire {i} outside [0, {d})")
    if len(digits) != state.n:
        raise DomainError(f"{len(digits)} digits for {state.n} wires")
    return float(abs(state.amps[encode(state.dims, digits)]) ** 2)


def measure_all(state: StateVector, rng: np.random.Generator) -> tuple[int, ...]:
    """Sample a basis outcome from ``|amp|^2``; the state is left untouched."""
    probs = np.abs(state.amps) ** 2
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise IntegrityError(f"state norm {total} deviates from 1")
    k = int(rng.choice(probs.size, p=probs / total))
    return decode(state.dims, k)


def wire_marginal(state: StateVector, wire: int) -> np.ndarray:
    view = _wire_view(state, wire)
    return np.sum(np.abs(view) ** 2, axis=(0, 2))


def subspace_mass(state: StateVector, wire: int, levels: Iterable[int]) -> float:
    """Probability that ``wire`` is found in any of ``levels``."""
    levels = sorted(set(levels))
    if not 0 <= wire < state.n:
        raise DomainError(f"wire {wire} out of range")
    if any(not 0 <= lv < state.dims[wire] for lv in levels):
        raise DomainError(f"levels {levels} outside [0, {state.dims[wire]})")
    return float(wire_marginal(state, wire)[levels].sum())


def computational_mass(state: StateVector, d: int) -> float:
    """Total probability with every wire inside levels ``0..d-1``."""
    t = state.tensor()
    return float(np.sum(np.abs(t[(slice(0, d),) * state.n]) ** 2))
