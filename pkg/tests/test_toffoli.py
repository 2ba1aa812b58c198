import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense_operator
from quditkit.circuit import Cinc, Circuit, Single, inverse, validate
from quditkit.gates import DomainError, ResourceError, build_multi_toffoli
from quditkit.statevec import encode
from quditkit.toffoli import (
    computational_inputs, control_tree, decompose, decompose_toffoli3, depth, layerize, mirror,
    optimize_cancel, permute_basis, stats, table_trace, toffoli_moments, toffoli_reference, verify_equivalence,
)


def test_toffoli3_structure():
    c = decompose_toffoli3(3)
    assert c.ops == (Cinc(0, 2, 1, 4, 1), Cinc(1, 3, 2, 3, 1), Cinc(0, 2, 1, 4, -1))
    assert validate(c) == []


@pytest.mark.parametrize("d", [2, 3, 4])
def test_toffoli3_matches_dense_toffoli(d):
    c = decompose_toffoli3(d)
    dims = c.dims
    u = np.eye(int(np.prod(dims)), dtype=complex)
    for op in c.ops:
        u = dense_operator(op, dims) @ u
    idx = [encode(dims, digits) for digits in itertools.product(range(d), repeat=3)]
    assert np.allclose(u[np.ix_(idx, idx)], build_multi_toffoli(3, d))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_decompose_matches_dense_toffoli_qutrits(n):
    d = 3
    c = decompose(n, d)
    inputs = computational_inputs(n, d)
    out, _ = permute_basis(c, inputs)
    u = build_multi_toffoli(n, d)
    for row_in, row_out in zip(inputs, out):
        col = int(np.ravel_multi_index(row_in, (d,) * n))
        assert np.flatnonzero(u[:, col])[0] == int(np.ravel_multi_index(row_out, (d,) * n))


def test_bold_row_trace():
    assert table_trace("11111110") == [
        "11211120", "12211220", "12111210", "12111310", "12121310", "12121210", "12121211", "11111111",
    ]


def test_only_all_ones_row_changes():
    for ctrl in itertools.product(range(2), repeat=7):
        digits = "".join(map(str, ctrl)) + "0"
        out = table_trace(digits)[-1]
        assert out == (digits[:-1] + "1" if all(ctrl) else digits)


def test_eight_qubit_all_256_inputs():
    n, d = 8, 2
    inputs = computational_inputs(n, d)
    out, top = permute_basis(decompose(n, d), inputs)
    assert np.array_equal(out, toffoli_reference(inputs, d))
    assert top == 3
    assert sum(1 for row in inputs if not np.array_equal(row, toffoli_reference(row[None], d)[0])) == 2


@pytest.mark.parametrize("n", range(3, 17))
def test_optimized_count(n):
    c = optimize_cancel(decompose(n, 2))
    assert sum(isinstance(op, Cinc) for op in c.ops) == 2 * n - 3
    assert len(c.wires) == n


def test_eight_qubit_counts():
    raw = decompose(8, 2)
    opt = optimize_cancel(raw)
    # forward pass: two 3-control subtrees (3 ops each) + merge, raise, undo; root; mirror
    assert len(raw.ops) == 9 + 1 + 9
    assert len(opt.ops) == 13


@pytest.mark.parametrize("n, d", [(5, 2), (8, 3), (11, 4)])
def test_optimize_preserves_semantics_and_is_idempotent(n, d):
    raw = decompose(n, d)
    opt = optimize_cancel(raw)
    assert optimize_cancel(opt) == opt
    inputs = computational_inputs(n, d)[:: max(1, d**n // 2000)]
    assert np.array_equal(permute_basis(raw, inputs)[0], permute_basis(opt, inputs)[0])


def test_optimize_cancels_nested_pairs():
    a = Cinc(0, 1, 1, 3, 1)
    b = Single(2, "f", 2)
    c = Circuit.uniform(3, 2, [a, b, inverse(b), inverse(a), Single(0, "z", 2)])
    assert optimize_cancel(c).ops == (Single(0, "z", 2),)


@pytest.mark.parametrize("n, d", [(3, 2), (6, 3), (9, 2)])
def test_mirror_restores_controls(n, d):
    tree = control_tree(range(n - 1), d)
    forward = Circuit.uniform(n, d, tree.ops + mirror(tree.ops))
    inputs = computational_inputs(n, d)
    assert np.array_equal(permute_basis(forward, inputs)[0], inputs)


@pytest.mark.parametrize("n, d", [(4, 2), (7, 3), (9, 2)])
def test_tree_carrier_flags_all_controls(n, d):
    tree = control_tree(range(n - 1), d)
    c = Circuit.uniform(n, d, tree.ops)
    inputs = computational_inputs(n, d)
    out, _ = permute_basis(c, inputs)
    flagged = out[:, tree.carrier] == tree.level
    assert np.array_equal(flagged, np.all(inputs[:, :-1] == d - 1, axis=1))


def test_moments_touch_disjoint_wires():
    for n in (5, 8, 16, 33):
        moments, _ = toffoli_moments(n, 2)
        for m in moments:
            wires = [w for op in m for w in op.wires]
            assert len(wires) == len(set(wires))


def test_layerize_respects_order_and_disjointness():
    c = optimize_cancel(decompose(12, 3))
    layers = layerize(c)
    assert [op for layer in layers for op in layer] != [] and sum(map(len, layers)) == len(c.ops)
    position = {}
    for k, layer in enumerate(layers):
        wires = [w for op in layer for w in op.wires]
        assert len(wires) == len(set(wires))
        for op in layer:
            position.setdefault(op, k)
    # every op sits strictly after the last earlier op sharing a wire
    last = {}
    for k, layer in enumerate(layers):
        for op in layer:
            for w in op.wires:
                assert last.get(w, -1) < k
        for op in layer:
            for w in op.wires:
                last[w] = k


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("n", [4, 8, 16])
def test_depth_grows_by_constant_on_doubling(n, d):
    for build in (decompose, lambda n, d: optimize_cancel(decompose(n, d))):
        assert depth(build(2 * n, d)) - depth(build(n, d)) <= 4


def test_stats_eight_qubits():
    s = stats(optimize_cancel(decompose(8, 2)), 2)
    assert s.as_dict(8, 2) == {"n": 8, "d": 2, "two_qudit_count": 13, "parallel_depth": 9, "max_level": 3}
    assert s.wire_count == 8


@pytest.mark.parametrize("n", [3, 8, 17, 32])
@pytest.mark.parametrize("d", [2, 3, 5])
def test_ancilla_free_and_level_bound(n, d):
    c = decompose(n, d)
    assert len(c.wires) == n
    assert validate(c) == []
    assert stats(c, d).max_level <= d + 1


@pytest.mark.parametrize("n, d", [(3, 2), (8, 2), (4, 4), (8, 4), (5, 3), (10, 3)])
def test_verify_equivalence(n, d):
    report = verify_equivalence(n, d)
    assert report.ok
    assert report.total == d**n
    assert d <= report.max_level <= d + 1
    assert report.off_subspace_mass is None or report.off_subspace_mass <= 1e-10


def test_verify_equivalence_detects_broken_circuit():
    c = decompose(5, 2)
    broken = Circuit(c.wires, c.ops[:-1])
    report = verify_equivalence(5, 2, broken)
    assert not report.ok
    assert report.mismatches


def test_guards_and_domain():
    with pytest.raises(DomainError):
        decompose(2, 2)
    with pytest.raises(DomainError):
        decompose(4, 1)
    with pytest.raises(ResourceError):
        verify_equivalence(17, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 9), st.integers(2, 4), st.data())
def test_random_inputs_match_reference(n, d, data):
    rows = data.draw(st.lists(st.lists(st.integers(0, d - 1), min_size=n, max_size=n), min_size=1, max_size=20))
    inputs = np.array(rows, dtype=np.int64)
    c = optimize_cancel(decompose(n, d))
    assert np.array_equal(permute_basis(c, inputs)[0], toffoli_reference(inputs, d))
