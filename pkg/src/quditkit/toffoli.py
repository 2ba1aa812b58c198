"""Ancilla-free, log-depth decomposition of the n-qudit Toffoli.

The n-1 controls are arranged as an in-order binary tree: the middle control
is the node, the left and right halves are its subtrees. A node becomes
"true" by climbing from ``d-1`` to ``d`` once itself and both subtree
carriers are true, using only two-qudit controlled increments and the spare
levels ``d`` and ``d+1`` of each wire:

* merge left carrier into right carrier (right climbs one level, mod +2),
* merge right carrier into the node (node climbs ``d-1 -> d``, mod ``d+1``),
* undo the first merge.

The root carrier then drives the target increment mod ``d``, and the forward
pass is mirrored to restore every control. For 7 controls this is exactly the
circuit traced in the 8-qubit truth table (carriers q2/q6 feed q4).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuit import Cinc, Circuit, Cphase, GateOp, MultiInc, Single, inverse
from .gates import DomainError, ResourceError
from .statevec import (
    StateVector, computational_mass, decode, encode, format_digits, parse_digits, prepare_basis, run,
)

EQUIVALENCE_GUARD = 2**16
STATEVEC_CHECK_GUARD = 2**21


@dataclass(frozen=True)
class ControlTree:
    """Forward half of a lowered multi-control.

    ``carrier`` ends at level ``level`` exactly when every control held
    ``d-1``; ``moments`` are groups of ops on disjoint wires.
    """

    carrier: int
    level: int
    moments: tuple[tuple[Cinc, ...], ...]

    @property
    def ops(self) -> tuple[Cinc, ...]:
        return tuple(op for m in self.moments for op in m)


def _merge_parallel(a, b):
    return tuple(
        tuple(x or ()) + tuple(y or ())
        for x, y in itertools.zip_longest(a, b)
    )


def control_tree(controls: Sequence[int], d: int) -> ControlTree:
    if not controls:
        raise DomainError("control tree needs at least one control")
    if len(controls) == 1:
        return ControlTree(controls[0], d - 1, ())
    mid = len(controls) // 2
    node = controls[mid]
    left = control_tree(controls[:mid], d)
    if mid + 1 == len(controls):
        # one child: fold it straight into the node
        raise_node = Cinc(left.carrier, left.level, node, d + 1, +1)
        return ControlTree(node, d, left.moments + ((raise_node,),))
    right = control_tree(controls[mid + 1:], d)
    merge = Cinc(left.carrier, left.level, right.carrier, right.level + 2, +1)
    raise_node = Cinc(right.carrier, right.level + 1, node, d + 1, +1)
    moments = _merge_parallel(left.moments, right.moments) + (
        (merge,), (raise_node,), (inverse(merge),),
    )
    return ControlTree(node, d, moments)


def mirror(ops: Sequence[GateOp]) -> tuple[GateOp, ...]:
    return tuple(inverse(op) for op in reversed(ops))


def lower_controlled(controls: Sequence[int], d: int, root: Callable[[int, int], GateOp]) -> tuple[GateOp, ...]:
    """Forward tree, ``root(carrier, level)``, then the mirrored tree."""
    tree = control_tree(controls, d)
    return tree.ops + (root(tree.carrier, tree.level),) + mirror(tree.ops)


def _check_nd(n: int, d: int) -> None:
    if n < 3:
        raise DomainError(f"Toffoli decomposition needs n >= 3 qudits, got {n}")
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")


def decompose_toffoli3(d: int) -> Circuit:
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    first = Cinc(0, d - 1, 1, d + 1, +1)
    return Circuit.uniform(3, d, (first, Cinc(1, d, 2, d, +1), inverse(first)))


def toffoli_moments(n: int, d: int) -> tuple[tuple[tuple[Cinc, ...], ...], Cinc]:
    """Forward moments and the root gate of ``decompose(n, d)``."""
    _check_nd(n, d)
    tree = control_tree(range(n - 1), d)
    return tree.moments, Cinc(tree.carrier, tree.level, n - 1, d, +1)


def decompose(n: int, d: int) -> Circuit:
    """Unoptimized decomposition: forward tree, root increment, mirror."""
    _check_nd(n, d)
    ops = lower_controlled(range(n - 1), d, lambda c, lv: Cinc(c, lv, n - 1, d, +1))
    return Circuit.uniform(n, d, ops)


def _is_inverse_pair(a: GateOp, b: GateOp) -> bool:
    inv = inverse(a)
    return inv is not None and inv == b and not (isinstance(a, Cphase) and a.phase == 0)


def optimize_cancel(circuit: Circuit) -> Circuit:
    """Remove adjacent inverse pairs (no op in between touches their wires) to a fixpoint."""
    ops = list(circuit.ops)
    changed = True
    while changed:
        changed = False
        for i, op in enumerate(ops):
            wires = set(op.wires)
            for j in range(i + 1, len(ops)):
                if wires & set(ops[j].wires):
                    if set(ops[j].wires) == wires and _is_inverse_pair(op, ops[j]):
                        del ops[j], ops[i]
                        changed = True
                    break
            if changed:
                break
    return circuit.with_ops(ops)


def layerize(circuit: Circuit | Sequence[GateOp]) -> list[list[GateOp]]:
    """Greedy ASAP layering: each op lands right after the last op sharing a wire."""
    ops = circuit.ops if isinstance(circuit, Circuit) else circuit
    layers: list[list[GateOp]] = []
    ready: dict[int, int] = {}
    for op in ops:
        k = max((ready.get(w, 0) for w in op.wires), default=0)
        if k == len(layers):
            layers.append([])
        layers[k].append(op)
        for w in op.wires:
            ready[w] = k + 1
    return layers


def depth(circuit: Circuit) -> int:
    return len(layerize(circuit))


# -- classical basis-state simulation ------------------------------------------


def permute_basis(circuit: Circuit, inputs: np.ndarray) -> tuple[np.ndarray, int]:
    """Push a batch of basis states (rows of digits) through a permutation circuit.

    Returns the output digits and the highest level any wire held at any point.
    """
    s = np.array(inputs, dtype=np.int64, copy=True)
    top = int(s.max(initial=0))
    for op in circuit.ops:
        if isinstance(op, Cinc):
            hit = (s[:, op.control] == op.control_value) & (s[:, op.target] < op.modulus)
            s[hit, op.target] = (s[hit, op.target] + op.delta) % op.modulus
        elif isinstance(op, MultiInc):
            hit = np.all(s[:, list(op.controls)] == op.control_value, axis=1) & (s[:, op.target] < op.modulus)
            s[hit, op.target] = (s[hit, op.target] + 1) % op.modulus
        elif isinstance(op, Single) and op.kind in ("x", "xinv"):
            hit = s[:, op.wire] < op.modulus
            step = 1 if op.kind == "x" else -1
            s[hit, op.wire] = (s[hit, op.wire] + step) % op.modulus
        elif isinstance(op, Cphase):
            continue
        else:
            raise DomainError(f"{op!r} is not a basis permutation")
        top = max(top, int(s.max(initial=0)))
    return s, top


def computational_inputs(n: int, d: int) -> np.ndarray:
    return np.array(list(itertools.product(range(d), repeat=n)), dtype=np.int64).reshape(-1, n)


def toffoli_reference(inputs: np.ndarray, d: int) -> np.ndarray:
    out = inputs.copy()
    hit = np.all(inputs[:, :-1] == d - 1, axis=1)
    out[hit, -1] = (out[hit, -1] + 1) % d
    return out


# -- metrics ------------------------------------------------------------------


@dataclass(frozen=True)
class DecompositionStats:
    two_qudit_count: int
    parallel_depth: int
    max_level: int
    wire_count: int

    def as_dict(self, n: int, d: int) -> dict:
        return {
            "n": n, "d": d,
            "two_qudit_count": self.two_qudit_count,
            "parallel_depth": self.parallel_depth,
            "max_level": self.max_level,
        }


def stats(circuit: Circuit, d: int) -> DecompositionStats:
    n = len(circuit.wires)
    if d**n <= EQUIVALENCE_GUARD:
        _, top = permute_basis(circuit, computational_inputs(n, d))
    else:
        top = d - 1
        for op in circuit.ops:
            if isinstance(op, Cinc):
                top = max(top, op.modulus - 1, op.control_value)
    return DecompositionStats(
        two_qudit_count=sum(isinstance(op, Cinc) for op in circuit.ops),
        parallel_depth=depth(circuit),
        max_level=top,
        wire_count=n,
    )


@dataclass
class EquivalenceReport:
    n: int
    d: int
    total: int
    matched: int
    mismatches: list[tuple[str, str, str]]
    max_level: int
    off_subspace_mass: float | None

    @property
    def ok(self) -> bool:
        mass_ok = self.off_subspace_mass is None or self.off_subspace_mass <= 1e-10
        return not self.mismatches and self.matched == self.total and mass_ok


def verify_equivalence(n: int, d: int, circuit: Circuit | None = None, seed: int = 0) -> EquivalenceReport:
    """Check the decomposition against n-qudit Toffoli semantics on every basis input.

    Every input is pushed through the circuit as a basis permutation. When the
    padded state fits, the circuit is also run once on a random-phase
    superposition of all inputs, which pins the same permutation through the
    state-vector engine and measures any mass left outside levels ``0..d-1``.
    """
    if d**n > EQUIVALENCE_GUARD:
        raise ResourceError(f"d**n = {d**n} exceeds the equivalence guard {EQUIVALENCE_GUARD}")
    circuit = circuit if circuit is not None else decompose(n, d)
    inputs = computational_inputs(n, d)
    got, top = permute_basis(circuit, inputs)
    want = toffoli_reference(inputs, d)
    bad = np.flatnonzero(np.any(got != want, axis=1))
    dims = circuit.dims
    mismatches = [
        tuple(format_digits(row, dims) for row in (inputs[i], want[i], got[i])) for i in bad
    ]

    off_mass = None
    if int(np.prod(dims, dtype=np.int64)) <= STATEVEC_CHECK_GUARD:
        rng = np.random.default_rng(seed)
        phases = np.exp(2j * np.pi * rng.random(len(inputs))) / np.sqrt(len(inputs))
        idx_in = np.array([encode(dims, row) for row in inputs])
        idx_out = np.array([encode(dims, row) for row in want])
        state = StateVector(dims, np.zeros(int(np.prod(dims)), dtype=complex))
        state.amps[idx_in] = phases
        run(circuit, state)
        off_mass = max(0.0, 1.0 - computational_mass(state, d))
        expected = np.zeros_like(state.amps)
        expected[idx_out] = phases
        wrong = np.flatnonzero(np.abs(state.amps - expected) > 1e-10)
        for k in wrong[: max(0, 10 - len(mismatches))]:
            digits = format_digits(decode(dims, int(k)), dims)
            mismatches.append((digits, "statevector", "amplitude mismatch"))

    return EquivalenceReport(
        n=n, d=d, total=len(inputs), matched=len(inputs) - len(bad),
        mismatches=mismatches, max_level=top, off_subspace_mass=off_mass,
    )


# -- truth table of the 8-qudit example ---------------------------------------


def table_trace(digits: Sequence[int] | str, n: int = 8, d: int = 2) -> list[str]:
    """Per-moment states of the forward pass, the state after the root, then the mirrored output.

    For ``n=8, d=2`` this is one row of the bundled 8-qubit truth table (7 cycles +
    output), without the input column.
    """
    if isinstance(digits, str):
        digits = parse_digits(digits)
    moments, root = toffoli_moments(n, d)
    forward = tuple(op for m in moments for op in m)
    circuit = Circuit.uniform(n, d, forward + (root,) + mirror(forward))
    groups = list(moments) + [(root,), mirror(forward)]
    state = prepare_basis(circuit.dims, digits)
    return [r.basis_label for r in run(circuit, state, moments=groups)]


def truth_table_rows(n: int = 8, d: int = 2, target: int = 0) -> list[list[str]]:
    """Rows ``[input, cycle_1, ..., output]`` over all inputs with the given target digit."""
    rows = []
    dims = (d + 2,) * n
    for ctrl in itertools.product(range(d), repeat=n - 1):
        digits = ctrl + (target,)
        rows.append([format_digits(digits, dims)] + table_trace(digits, n, d))
    return rows
