"""Circuit IR for qudit circuits and the line-based ``.qdc`` text format.

Every wire carries ``d + 2`` physical levels: the computational levels
``0..d-1`` plus two extra levels used as temporary storage by the Toffoli
decomposition (and as the leakage subspace by the noise models).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

SINGLE_KINDS = ("x", "xinv", "z", "f", "finv")
_SINGLE_INVERSE = {"x": "xinv", "xinv": "x", "f": "finv", "finv": "f"}


class CircuitError(ValueError):
    """Raised for invalid circuits or malformed ``.qdc`` text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class WireSpec:
    logical_dim: int

    @property
    def physical_dim(self) -> int:
        return self.logical_dim + 2


@dataclass(frozen=True)
class Single:
    """One-qudit gate acting on levels ``0..modulus-1``; identity above."""

    wire: int
    kind: str
    modulus: int

    @property
    def wires(self) -> tuple[int, ...]:
        return (self.wire,)


@dataclass(frozen=True)
class Cinc:
    """Add ``delta`` (mod ``modulus``) to ``target`` iff ``control == control_value``.

    Target levels at or above ``modulus`` are left alone.
    """

    control: int
    control_value: int
    target: int
    modulus: int
    delta: int = 1

    @property
    def wires(self) -> tuple[int, ...]:
        return (self.control, self.target)


@dataclass(frozen=True)
class Cphase:
    """Multiply by ``exp(i*phase)`` when every control and the target hold their values."""

    controls: tuple[tuple[int, int], ...]
    target: int
    target_value: int
    phase: float

    @property
    def wires(self) -> tuple[int, ...]:
        return tuple(w for w, _ in self.controls) + (self.target,)


@dataclass(frozen=True)
class MultiInc:
    """Undecomposed multi-controlled increment (the n-qudit Toffoli)."""

    controls: tuple[int, ...]
    control_value: int
    target: int
    modulus: int

    @property
    def wires(self) -> tuple[int, ...]:
        return tuple(self.controls) + (self.target,)


GateOp = Union[Single, Cinc, Cphase, MultiInc]


@dataclass(frozen=True)
class Circuit:
    wires: tuple[WireSpec, ...]
    ops: tuple[GateOp, ...] = field(default=())

    @classmethod
    def uniform(cls, n: int, d: int, ops: Iterable[GateOp] = ()) -> "Circuit":
        return cls(tuple(WireSpec(d) for _ in range(n)), tuple(ops))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(w.physical_dim for w in self.wires)

    def with_ops(self, ops: Iterable[GateOp]) -> "Circuit":
        return Circuit(self.wires, tuple(ops))

    def __len__(self) -> int:
        return len(self.ops)


def inverse(op: GateOp) -> GateOp | None:
    """Exact inverse of ``op`` within the IR, or None if it has no IR inverse."""
    if isinstance(op, Cinc):
        return Cinc(op.control, op.control_value, op.target, op.modulus, -op.delta)
    if isinstance(op, Cphase):
        return Cphase(op.controls, op.target, op.target_value, -op.phase)
    if isinstance(op, Single) and op.kind in _SINGLE_INVERSE:
        return Single(op.wire, _SINGLE_INVERSE[op.kind], op.modulus)
    return None


# -- validation ---------------------------------------------------------------


def _op_violations(op: GateOp, dims: tuple[int, ...]) -> list[str]:
    out = []
    wires = op.wires
    if any(not isinstance(w, int) or w < 0 or w >= len(dims) for w in wires):
        return ["wire index out of range"]
    if len(set(wires)) != len(wires):
        out.append("wires not distinct")

    def check_value(wire: int, value: int, what: str) -> None:
        if not 0 <= value < dims[wire]:
            out.append(f"{what} out of range")

    def check_modulus(wire: int, m: int) -> None:
        if not 2 <= m <= dims[wire]:
            out.append("modulus out of range")

    if isinstance(op, Single):
        if op.kind not in SINGLE_KINDS:
            out.append(f"unknown single-qudit kind {op.kind!r}")
        check_modulus(op.wire, op.modulus)
    elif isinstance(op, Cinc):
        check_value(op.control, op.control_value, "control_value")
        check_modulus(op.target, op.modulus)
        if op.delta not in (1, -1):
            out.append("delta must be +1 or -1")
    elif isinstance(op, Cphase):
        for w, v in op.controls:
            check_value(w, v, "control_value")
        check_value(op.target, op.target_value, "target_value")
    elif isinstance(op, MultiInc):
        if not op.controls:
            out.append("no controls")
        for w in op.controls:
            check_value(w, op.control_value, "control_value")
        check_modulus(op.target, op.modulus)
    else:
        out.append(f"unknown op type {type(op).__name__}")
    return out


def validate(circuit: Circuit) -> list[str]:
    """Return every broken invariant as ``"op <k>: <rule>"`` (or ``"wire <k>: ..."``)."""
    violations = [
        f"wire {i}: logical_dim must be >= 2"
        for i, w in enumerate(circuit.wires)
        if w.logical_dim < 2
    ]
    dims = circuit.dims
    for k, op in enumerate(circuit.ops):
        violations.extend(f"op {k}: {v}" for v in _op_violations(op, dims))
    return violations


# -- text format --------------------------------------------------------------


def _emit_op(op: GateOp) -> str:
    if isinstance(op, Single):
        return f"{op.kind} w={op.wire} m={op.modulus}"
    if isinstance(op, Cinc):
        sign = "+1" if op.delta > 0 else "-1"
        return f"cinc c={op.control} v={op.control_value} t={op.target} m={op.modulus} delta={sign}"
    if isinstance(op, Cphase):
        ctrls = ",".join(f"{w}:{v}" for w, v in op.controls)
        return f"cphase ctrls={ctrls} t={op.target} tv={op.target_value} phase={op.phase:.17g}"
    ctrls = ",".join(str(w) for w in op.controls)
    return f"minc ctrls={ctrls} v={op.control_value} t={op.target} m={op.modulus}"


def emit(circuit: Circuit) -> str:
    violations = validate(circuit)
    if violations:
        raise CircuitError("cannot emit invalid circuit: " + "; ".join(violations))
    lines = ["wires " + " ".join(str(d) for d in circuit.dims)]
    lines.extend(_emit_op(op) for op in circuit.ops)
    return "\n".join(lines) + "\n"


_FIELDS = {
    "x": ("w", "m"), "xinv": ("w", "m"), "z": ("w", "m"), "f": ("w", "m"), "finv": ("w", "m"),
    "cinc": ("c", "v", "t", "m", "delta"),
    "cphase": ("ctrls", "t", "tv", "phase"),
    "minc": ("ctrls", "v", "t", "m"),
}


def _int(text: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise CircuitError(f"expected integer, got {text!r}", lineno) from None


def _parse_op(tokens: list[str], lineno: int) -> GateOp:
    name = tokens[0]
    if name not in _FIELDS:
        raise CircuitError(f"unknown directive {name!r}", lineno)
    kv = {}
    for tok in tokens[1:]:
        key, sep, value = tok.partition("=")
        if not sep or not (value or (name == "cphase" and key == "ctrls")):
            raise CircuitError(f"malformed token {tok!r}", lineno)
        if key in kv:
            raise CircuitError(f"duplicate key {key!r}", lineno)
        kv[key] = value
    if set(kv) != set(_FIELDS[name]):
        raise CircuitError(f"{name} expects keys {', '.join(_FIELDS[name])}", lineno)

    if name in SINGLE_KINDS:
        return Single(_int(kv["w"], lineno), name, _int(kv["m"], lineno))
    if name == "cinc":
        if kv["delta"] not in ("+1", "-1"):
            raise CircuitError("delta must be +1 or -1", lineno)
        return Cinc(
            _int(kv["c"], lineno), _int(kv["v"], lineno), _int(kv["t"], lineno),
            _int(kv["m"], lineno), 1 if kv["delta"] == "+1" else -1,
        )
    if name == "cphase":
        ctrls = []
        for item in filter(None, kv["ctrls"].split(",")):
            w, sep, v = item.partition(":")
            if not sep:
                raise CircuitError(f"malformed control {item!r}", lineno)
            ctrls.append((_int(w, lineno), _int(v, lineno)))
        try:
            phase = float(kv["phase"])
        except ValueError:
            raise CircuitError(f"bad phase {kv['phase']!r}", lineno) from None
        return Cphase(tuple(ctrls), _int(kv["t"], lineno), _int(kv["tv"], lineno), phase)
    ctrls = tuple(_int(w, lineno) for w in kv["ctrls"].split(","))
    return MultiInc(ctrls, _int(kv["v"], lineno), _int(kv["t"], lineno), _int(kv["m"], lineno))


def parse(text: str) -> Circuit:
    """Parse ``.qdc`` text. Errors carry the 1-based line number."""
    wires = None
    ops: list[GateOp] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        if wires is None:
            if tokens[0] != "wires" or len(tokens) < 2:
                raise CircuitError("first directive must be 'wires <dim> ...'", lineno)
            dims = [_int(t, lineno) for t in tokens[1:]]
            if any(d < 4 for d in dims):
                raise CircuitError("physical dimension must be >= 4 (logical d >= 2 plus two levels)", lineno)
            wires = tuple(WireSpec(d - 2) for d in dims)
            continue
        if tokens[0] == "wires":
            raise CircuitError("duplicate 'wires' directive", lineno)
        op = _parse_op(tokens, lineno)
        bad = _op_violations(op, tuple(w.physical_dim for w in wires))
        if bad:
            raise CircuitError("; ".join(bad), lineno)
        ops.append(op)
    if wires is None:
        raise CircuitError("missing 'wires' directive")
    return Circuit(wires, tuple(ops))
