"""Leakage noise: coherent |d-1> <-> |d> coupling and the erasure channel.

Erasure is simulated by trajectories. Leak opportunities sit after every
parallel layer of each lowered multi-control, once per carrier wire raised in
that layer (the targets of the layer's controlled increments).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .circuit import Cinc, Circuit, GateOp
from .gates import DomainError, ResourceError
from .grover import (
    GroverProblem, analytic_success, diffusion_segments, iterations_for, oracle_segments, prepare_initial,
)
from .statevec import (
    StateVector, apply, apply_matrix, format_digits, prepare_basis, probability_of, subspace_mass, wire_marginal,
)
from .toffoli import layerize

MC_GUARD = 2**18
MC_STATE_GUARD = 2**16


@dataclass(frozen=True)
class LeakageConfig:
    model: str
    p_l: float = 0.0
    t: float = 0.0
    seed: int = 0
    trials: int = 1000

    def __post_init__(self):
        if self.model not in ("unitary", "erasure"):
            raise DomainError(f"unknown leakage model {self.model!r}")
        if not 0.0 <= self.p_l <= 1.0:
            raise DomainError(f"p_l must lie in [0, 1], got {self.p_l}")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    n: int
    N: int
    p_l: float
    analytic_survival: float
    analytic_composed: float
    monte_carlo_success: float | None
    stderr: float | None
    trials: int
    seed: int


def unitary_leak_op(t: float, d: int) -> np.ndarray:
    """``exp(-iHt)`` for ``H = (|d><d-1| + |d-1><d|) / 2`` on a ``d+2`` level wire."""
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    u = np.eye(d + 2, dtype=complex)
    c, s = math.cos(t / 2), math.sin(t / 2)
    u[d - 1, d - 1] = u[d, d] = c
    u[d - 1, d] = u[d, d - 1] = -1j * s
    return u


def leakage_rate(state: StateVector, wire: int, d: int) -> float:
    return subspace_mass(state, wire, (d, d + 1))


def erase_wire(state: StateVector, wire: int, level: int, rng: np.random.Generator) -> int:
    """Replace ``wire`` by ``|level>``: sample its current digit, collapse, then relabel.

    Returns the sampled digit. This is one trajectory of tracing out the wire
    and re-preparing it in the leakage level.
    """
    probs = wire_marginal(state, wire)
    x = int(rng.choice(probs.size, p=probs / probs.sum()))
    view = state.amps.reshape(int(np.prod(state.dims[:wire], dtype=np.int64)), state.dims[wire], -1)
    kept = view[:, x, :] / math.sqrt(probs[x])
    view[:] = 0
    view[:, level, :] = kept
    return x


def erasure_step(
    state: StateVector, wire: int, p_l: float, rng: np.random.Generator, level: int | None = None,
) -> bool:
    """With probability ``p_l`` move ``wire`` into the leakage level (default ``d = dim - 2``)."""
    if not 0 <= wire < state.n:
        raise DomainError(f"wire {wire} out of range")
    if rng.random() >= p_l:
        return False
    erase_wire(state, wire, state.dims[wire] - 2 if level is None else level, rng)
    return True


def analytic_survival(n: int, d: int, p_l: float) -> float:
    """No-leak probability ``(1-p_l) ** (2*ceil(log2 n) * sqrt(d**n))``."""
    if n < 2 or d < 2:
        raise DomainError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
    return (1.0 - p_l) ** (2 * math.ceil(math.log2(n)) * math.sqrt(d**n))


# -- noisy Grover ---------------------------------------------------------------


Segment = tuple[bool, tuple[GateOp, ...]]


def grover_program(problem: GroverProblem, oracle_noise: bool = True) -> list[Segment]:
    """One round as (noisy?, ops) segments; noisy segments are the lowered multi-controls."""
    shift, oflip, unshift = oracle_segments(problem)
    pre, dflip, post = diffusion_segments(problem.n, problem.d)
    return [
        (False, tuple(shift)), (oracle_noise, oflip), (False, tuple(unshift)),
        (False, tuple(pre)), (True, dflip), (False, tuple(post)),
    ]


def count_opportunities(problem: GroverProblem, oracle_noise: bool = True) -> int:
    per_round = sum(
        sum(isinstance(op, Cinc) for op in ops)
        for noisy, ops in grover_program(problem, oracle_noise) if noisy
    )
    return per_round * problem.rounds


def run_noisy_grover(
    problem: GroverProblem,
    on_carrier: Callable[[StateVector, int], None],
    oracle_noise: bool = True,
) -> StateVector:
    """Run Grover, calling ``on_carrier(state, wire)`` at every leak opportunity in order."""
    state = prepare_initial(problem)
    program = [
        (noisy, layerize(ops) if noisy else [list(ops)])
        for noisy, ops in grover_program(problem, oracle_noise)
    ]
    for _ in range(problem.rounds):
        for noisy, layers in program:
            for layer in layers:
                for op in layer:
                    apply(state, op)
                if noisy:
                    for op in layer:
                        if isinstance(op, Cinc):
                            on_carrier(state, op.target)
    return state


def _check_mc(problem: GroverProblem, trials: int) -> None:
    if problem.size > MC_GUARD:
        raise ResourceError(f"d**n = {problem.size} exceeds the Monte Carlo guard {MC_GUARD}")
    if trials < 100:
        raise DomainError(f"need at least 100 trials, got {trials}")


def grover_erasure_mc(
    problem: GroverProblem,
    p_l: float,
    trials: int,
    seed: int,
    leak_level: int | None = None,
    oracle_noise: bool = True,
) -> SweepRow:
    """Mean success probability over erasure trajectories.

    Trajectory ``i`` draws from ``default_rng([seed, i])``: first one uniform
    per leak opportunity (leak iff below ``p_l``), then one digit sample per
    leak. Leak-free trajectories reuse the noiseless success value.
    """
    _check_mc(problem, trials)
    if not 0.0 <= p_l <= 1.0:
        raise DomainError(f"p_l must lie in [0, 1], got {p_l}")
    level = problem.d if leak_level is None else leak_level
    if not 0 <= level < problem.d + 2:
        raise DomainError(f"leak level {level} outside [0, {problem.d + 2})")
    slots = count_opportunities(problem, oracle_noise)
    clean = None
    values = np.empty(trials)
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        flags = rng.random(slots) < p_l
        if not flags.any():
            if clean is None:
                clean = probability_of(run_noisy_grover(problem, lambda s, w: None, oracle_noise), problem.marked)
            values[i] = clean
            continue
        slot = iter(flags)

        def on_carrier(state, wire, slot=slot, rng=rng):
            if next(slot):
                erase_wire(state, wire, level, rng)

        values[i] = probability_of(run_noisy_grover(problem, on_carrier, oracle_noise), problem.marked)
    survival = analytic_survival(problem.n, problem.d, p_l) if problem.n >= 2 else float("nan")
    return SweepRow(
        n=problem.n, N=problem.size, p_l=p_l,
        analytic_survival=survival,
        analytic_composed=survival * analytic_success(problem.size, problem.rounds),
        monte_carlo_success=float(values.mean()),
        stderr=float(values.std(ddof=1) / math.sqrt(trials)),
        trials=trials, seed=seed,
    )


def grover_unitary_leak(problem: GroverProblem, t: float, oracle_noise: bool = True) -> float:
    """Success probability with ``unitary_leak_op(t)`` applied at every leak opportunity."""
    u = unitary_leak_op(t, problem.d)
    state = run_noisy_grover(problem, lambda s, w: apply_matrix(s, w, u), oracle_noise)
    return probability_of(state, problem.marked)


def sweep(
    d: int,
    n_range: Iterable[int],
    p_l: float,
    trials: int,
    seed: int,
    leak_level: int | None = None,
    oracle_noise: bool = True,
) -> list[SweepRow]:
    """Analytic survival for every n; Monte Carlo where the padded state is small enough."""
    rows = []
    for n in n_range:
        size = d**n
        survival = analytic_survival(n, d, p_l)
        composed = survival * analytic_success(size, iterations_for(size))
        feasible = trials >= 100 and size <= MC_GUARD and (d + 2) ** n <= MC_STATE_GUARD
        if feasible:
            problem = GroverProblem(n, d, (0,) * n)
            row = grover_erasure_mc(problem, p_l, trials, seed, leak_level, oracle_noise)
        else:
            row = SweepRow(n, size, p_l, survival, composed, None, None, trials, seed)
        rows.append(row)
    return rows


CSV_HEADER = "n,N,p_l,analytic_survival,mc_success,mc_stderr,trials,seed,analytic_composed"


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    def fmt(x):
        return "" if x is None else repr(float(x))

    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            str(r.n), str(r.N), repr(r.p_l), fmt(r.analytic_survival), fmt(r.monte_carlo_success),
            fmt(r.stderr), str(r.trials), str(r.seed), fmt(r.analytic_composed),
        ]))
    return "\n".join(lines) + "\n"


# -- forced leaks on a single decomposed Toffoli ---------------------------------


def run_with_forced_leak(circuit: Circuit, digits: Sequence[int], wire: int, before_op: int, level: int) -> str:
    """Run a permutation circuit on a basis input, forcing ``wire`` to ``level`` just before op ``before_op``."""
    state = prepare_basis(circuit.dims, digits)
    rng = np.random.default_rng(0)  # basis inputs make the digit sample deterministic
    for k, op in enumerate(circuit.ops):
        if k == before_op:
            erase_wire(state, wire, level, rng)
        apply(state, op)
    if before_op >= len(circuit.ops):
        erase_wire(state, wire, level, rng)
    return format_digits(state.basis_digits(), circuit.dims)
