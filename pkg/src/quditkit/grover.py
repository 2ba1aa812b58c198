"""Generalized d-ary Grover search built on the tree-lowered multi-control."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, Cphase, GateOp, Single
from .gates import DomainError, ResourceError
from .statevec import (
    StateVector, apply, computational_mass, decode, encode, measure_all, prepare_basis, probability_of,
)
from .toffoli import lower_controlled, optimize_cancel

GROVER_GUARD = 2**20


@dataclass(frozen=True)
class GroverProblem:
    n: int
    d: int
    marked: tuple[int, ...]
    iterations: int | None = None

    def __post_init__(self):
        if self.n < 1 or self.d < 2:
            raise DomainError(f"need n >= 1 and d >= 2, got n={self.n}, d={self.d}")
        if len(self.marked) != self.n:
            raise DomainError(f"marked element has {len(self.marked)} digits, expected {self.n}")
        if any(not 0 <= s < self.d for s in self.marked):
            raise DomainError(f"marked digits {self.marked} must lie in [0, {self.d})")
        if self.iterations is not None and self.iterations < 0:
            raise DomainError("iterations must be >= 0")

    @property
    def size(self) -> int:
        return self.d**self.n

    @property
    def rounds(self) -> int:
        return iterations_for(self.size) if self.iterations is None else self.iterations


@dataclass
class GroverResult:
    success_probability: float
    probability_trajectory: list[float] = field(default_factory=list)
    measured_sample: tuple[int, ...] | None = None
    leakage_mass: float = 0.0


def iterations_for(size: int) -> int:
    if size < 2:
        raise DomainError(f"search space must have >= 2 elements, got {size}")
    return max(1, math.floor(math.pi / 4 * math.sqrt(size)))


def analytic_success(size: int, k: int) -> float:
    return math.sin((2 * k + 1) * math.asin(1 / math.sqrt(size))) ** 2


def phase_flip_ops(wires: Sequence[int], d: int, phase: float = math.pi) -> tuple[GateOp, ...]:
    """Phase ``exp(i*phase)`` on the basis state with every wire at ``d-1``.

    The last wire carries the phase; the others are folded into one carrier
    by the control tree, so only two-qudit gates plus one controlled phase
    are used.
    """
    wires = list(wires)
    if len(wires) == 1:
        return (Cphase((), wires[0], d - 1, phase),)
    target = wires[-1]
    ops = lower_controlled(wires[:-1], d, lambda c, lv: Cphase(((c, lv),), target, d - 1, phase))
    return optimize_cancel(Circuit.uniform(max(wires) + 1, d, ops)).ops


def _shift_ops(wire: int, steps: int, d: int) -> list[Single]:
    return [Single(wire, "x", d) for _ in range(steps % d)]


def oracle_segments(problem: GroverProblem) -> tuple[list[GateOp], tuple[GateOp, ...], list[GateOp]]:
    """(shift, lowered phase flip, unshift) for ``I - 2|s><s|``."""
    n, d = problem.n, problem.d
    shift = [op for i, s in enumerate(problem.marked) for op in _shift_ops(i, d - 1 - s, d)]
    unshift = [op for i, s in enumerate(problem.marked) for op in _shift_ops(i, s + 1, d)]
    return shift, phase_flip_ops(range(n), d), unshift


def diffusion_segments(n: int, d: int) -> tuple[list[GateOp], tuple[GateOp, ...], list[GateOp]]:
    """(F-dagger and shift, lowered phase flip, unshift and F) for ``-D``."""
    pre = [Single(i, "finv", d) for i in range(n)] + [Single(i, "xinv", d) for i in range(n)]
    post = [Single(i, "x", d) for i in range(n)] + [Single(i, "f", d) for i in range(n)]
    return pre, phase_flip_ops(range(n), d), post


def build_oracle(problem: GroverProblem) -> Circuit:
    shift, flip, unshift = oracle_segments(problem)
    return Circuit.uniform(problem.n, problem.d, [*shift, *flip, *unshift])


def build_diffusion_circuit(n: int, d: int) -> Circuit:
    if n < 1 or d < 2:
        raise DomainError(f"need n >= 1 and d >= 2, got n={n}, d={d}")
    pre, flip, post = diffusion_segments(n, d)
    return Circuit.uniform(n, d, [*pre, *flip, *post])


def prepare_initial(problem: GroverProblem) -> StateVector:
    state = prepare_basis((problem.d + 2,) * problem.n, (0,) * problem.n)
    for i in range(problem.n):
        apply(state, Single(i, "f", problem.d))
    return state


def check_size(problem: GroverProblem, guard: int = GROVER_GUARD) -> None:
    if problem.size > guard:
        raise ResourceError(f"d**n = {problem.size} exceeds guard {guard}")


def run_grover(problem: GroverProblem, trace: bool = False, rng: np.random.Generator | None = None) -> GroverResult:
    """Uniform superposition, then ``rounds`` of oracle followed by diffusion."""
    check_size(problem)
    state = prepare_initial(problem)
    oracle = build_oracle(problem).ops
    diffusion = build_diffusion_circuit(problem.n, problem.d).ops
    trajectory = []
    for _ in range(problem.rounds):
        for op in oracle:
            apply(state, op)
        for op in diffusion:
            apply(state, op)
        if trace:
            trajectory.append(probability_of(state, problem.marked))
    return GroverResult(
        success_probability=probability_of(state, problem.marked),
        probability_trajectory=trajectory,
        measured_sample=measure_all(state, rng) if rng is not None else None,
        leakage_mass=max(0.0, 1.0 - computational_mass(state, problem.d)),
    )


def circuit_matrix(circuit: Circuit, d: int) -> np.ndarray:
    """Dense action of a circuit restricted to the computational subspace (columns = inputs)."""
    n = len(circuit.wires)
    dims = circuit.dims
    size = d**n
    if size > 4096:
        raise ResourceError(f"d**n = {size} too large for a dense matrix")
    out = np.zeros((size, size), dtype=complex)
    rows = [encode(dims, decode((d,) * n, i)) for i in range(size)]
    for j in range(size):
        state = prepare_basis(dims, decode((d,) * n, j))
        for op in circuit.ops:
            apply(state, op)
        out[:, j] = state.amps[rows]
    return out
