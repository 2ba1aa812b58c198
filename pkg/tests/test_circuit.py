import math

import pytest
from hypothesis import given, settings, strategies as st

from quditkit.circuit import (
    Cinc, Circuit, CircuitError, Cphase, MultiInc, Single, WireSpec, emit, inverse, parse, validate,
)
from quditkit.toffoli import decompose, decompose_toffoli3, optimize_cancel


def test_empty_circuit_is_valid():
    assert validate(Circuit.uniform(3, 2)) == []


def test_wirespec_dimensions():
    w = WireSpec(3)
    assert w.physical_dim == 5


def test_cinc_same_wire_flagged():
    c = Circuit.uniform(2, 2, [Cinc(0, 1, 0, 3, 1)])
    assert validate(c) == ["op 0: wires not distinct"]


def test_cinc_control_value_out_of_range():
    c = Circuit.uniform(2, 2, [Cinc(0, 4, 1, 3, 1)])
    assert validate(c) == ["op 0: control_value out of range"]


@pytest.mark.parametrize("op, rule", [
    (Single(0, "x", 5), "modulus out of range"),
    (Single(0, "y", 2), "unknown single-qudit kind 'y'"),
    (Cinc(0, 1, 1, 3, 2), "delta must be +1 or -1"),
    (Cinc(0, 1, 7, 3, 1), "wire index out of range"),
    (Cphase(((0, 1),), 1, 4, 0.5), "target_value out of range"),
    (MultiInc((0, 1), 1, 1, 2), "wires not distinct"),
    (MultiInc((), 1, 1, 2), "no controls"),
])
def test_validate_rules(op, rule):
    assert validate(Circuit.uniform(2, 2, [op])) == [f"op 0: {rule}"]


def test_small_logical_dim_flagged():
    c = Circuit((WireSpec(1),), ())
    assert validate(c) == ["wire 0: logical_dim must be >= 2"]


def test_emit_single_x():
    assert emit(Circuit.uniform(1, 2, [Single(0, "x", 2)])) == "wires 4\nx w=0 m=2\n"


def test_emit_toffoli3():
    text = emit(decompose_toffoli3(2))
    assert text == (
        "wires 4 4 4\n"
        "cinc c=0 v=1 t=1 m=3 delta=+1\n"
        "cinc c=1 v=2 t=2 m=2 delta=+1\n"
        "cinc c=0 v=1 t=1 m=3 delta=-1\n"
    )


def test_emit_refuses_invalid():
    with pytest.raises(CircuitError, match="wires not distinct"):
        emit(Circuit.uniform(2, 2, [Cinc(1, 1, 1, 3, 1)]))


def test_parse_cinc():
    c = parse("wires 4 4\ncinc c=0 v=1 t=1 m=3 delta=+1\n")
    assert c == Circuit((WireSpec(2), WireSpec(2)), (Cinc(0, 1, 1, 3, 1),))


def test_parse_rejects_unknown_directive():
    with pytest.raises(CircuitError) as exc:
        parse("wires 4\nbogus\n")
    assert exc.value.line == 2


@pytest.mark.parametrize("text, line", [
    ("x w=0 m=2\n", 1),
    ("wires 4\nx w=0\n", 2),
    ("wires 4\nx w=0 m=two\n", 2),
    ("wires 4 4\ncinc c=0 v=1 t=1 m=3 delta=+2\n", 2),
    ("wires 4\nx w=3 m=2\n", 2),
    ("wires 3\n", 1),
    ("wires 4\n\nwires 4\n", 3),
    ("wires 4 4\ncphase ctrls=0-1 t=1 tv=1 phase=0\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(CircuitError) as exc:
        parse(text)
    assert exc.value.line == line


def test_parse_comments_and_blank_lines():
    c = parse("# header\nwires 4  # one wire\n\nx w=0 m=2 # bump\n")
    assert c.ops == (Single(0, "x", 2),)


def test_cphase_without_controls_round_trips():
    c = Circuit.uniform(1, 3, [Cphase((), 0, 2, math.pi)])
    assert parse(emit(c)) == c


@pytest.mark.parametrize("n, d", [(3, 2), (5, 3), (8, 2), (9, 4)])
def test_fixture_files_are_fixed_points(n, d, tmp_path):
    for circuit in (decompose(n, d), optimize_cancel(decompose(n, d))):
        path = tmp_path / "c.qdc"
        path.write_text(emit(circuit))
        text = path.read_text()
        assert emit(parse(text)) == text


def test_inverse_pairs():
    assert inverse(Cinc(0, 1, 2, 3, 1)) == Cinc(0, 1, 2, 3, -1)
    assert inverse(Single(0, "f", 3)) == Single(0, "finv", 3)
    assert inverse(Single(0, "z", 3)) is None
    assert inverse(Cphase(((0, 1),), 1, 0, 0.25)).phase == -0.25


@st.composite
def circuits(draw):
    n = draw(st.integers(2, 5))
    d = draw(st.integers(2, 5))
    phys = d + 2
    wire = st.integers(0, n - 1)

    def two_wires():
        return st.lists(wire, min_size=2, max_size=2, unique=True)

    ops = []
    for _ in range(draw(st.integers(0, 12))):
        kind = draw(st.sampled_from(["single", "cinc", "cphase", "minc"]))
        if kind == "single":
            ops.append(Single(draw(wire), draw(st.sampled_from(["x", "xinv", "z", "f", "finv"])),
                              draw(st.integers(2, phys))))
        elif kind == "cinc":
            c, t = draw(two_wires())
            ops.append(Cinc(c, draw(st.integers(0, phys - 1)), t, draw(st.integers(2, phys)),
                            draw(st.sampled_from([1, -1]))))
        elif kind == "cphase":
            ws = draw(st.lists(wire, min_size=1, max_size=n, unique=True))
            ctrls = tuple((w, draw(st.integers(0, phys - 1))) for w in ws[:-1])
            phase = draw(st.floats(-10, 10, allow_nan=False))
            ops.append(Cphase(ctrls, ws[-1], draw(st.integers(0, phys - 1)), phase))
        else:
            ws = draw(st.lists(wire, min_size=2, max_size=n, unique=True))
            ops.append(MultiInc(tuple(ws[:-1]), draw(st.integers(0, phys - 1)), ws[-1],
                                draw(st.integers(2, phys))))
    return Circuit.uniform(n, d, ops)


@settings(max_examples=200, deadline=None)
@given(circuits())
def test_round_trip_random(circuit):
    assert validate(circuit) == []
    text = emit(circuit)
    assert parse(text) == circuit
    assert emit(parse(text)) == text
