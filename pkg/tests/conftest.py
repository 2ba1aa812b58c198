import itertools

import numpy as np
import pytest

from quditkit.circuit import Cinc, Circuit, Cphase, MultiInc, Single
from quditkit.gates import embed, kron_all, single_matrix, build_cinc


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng, dims):
    v = rng.normal(size=int(np.prod(dims))) + 1j * rng.normal(size=int(np.prod(dims)))
    return v / np.linalg.norm(v)


def dense_operator(op, dims):
    """Full matrix of one op over ``dims``, built from gate_matrices and index bookkeeping only."""
    n = len(dims)
    size = int(np.prod(dims))
    if isinstance(op, Single):
        mats = [np.eye(d) for d in dims]
        mats[op.wire] = single_matrix(op.kind, op.modulus, dims[op.wire])
        return kron_all(mats)
    out = np.zeros((size, size), dtype=complex)
    for col, digits in enumerate(itertools.product(*[range(d) for d in dims])):
        digits = list(digits)
        amp = 1.0 + 0j
        if isinstance(op, Cinc):
            phys = dims[op.control]
            assert dims[op.target] == phys
            u = build_cinc(phys, op.control_value, op.modulus, op.delta)
            src = digits[op.control] * phys + digits[op.target]
            dst = int(np.flatnonzero(u[:, src])[0])
            digits[op.control], digits[op.target] = divmod(dst, phys)
        elif isinstance(op, MultiInc):
            if all(digits[c] == op.control_value for c in op.controls) and digits[op.target] < op.modulus:
                digits[op.target] = (digits[op.target] + 1) % op.modulus
        elif isinstance(op, Cphase):
            if all(digits[w] == v for w, v in op.controls) and digits[op.target] == op.target_value:
                amp = np.exp(1j * op.phase)
        row = int(np.ravel_multi_index(digits, dims))
        out[row, col] = amp
    return out
