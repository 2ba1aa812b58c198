"""Command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import leakage
from .circuit import CircuitError, emit, parse
from .gates import DomainError, ResourceError, build_diffusion, equal_up_to_phase
from .grover import GroverProblem, build_diffusion_circuit, circuit_matrix, run_grover
from .statevec import format_digits, parse_digits, prepare_basis, run
from .toffoli import decompose, optimize_cancel, stats, truth_table_rows, verify_equivalence

TABLE_HEADER = "input,cycle1,cycle2,cycle3,cycle4,cycle5,cycle6,cycle7,output"
EQUIVALENCE_GRID = [(n, d) for d in (2, 3, 4) for n in range(3, 9) if d**n <= 2**16]
DIFFUSION_CASES = [(2, 2), (3, 2), (2, 3)]


class UsageError(Exception):
    pass


class VerificationFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(name):
    def convert(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if value < 0:
            raise argparse.ArgumentTypeError(f"{name} must be >= 0, got {value}")
        return value
    return convert


def _probability(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a probability, got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quditkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="decompose an n-qudit Toffoli into controlled increments")
    p.add_argument("--n", type=_positive("--n"), required=True)
    p.add_argument("--d", type=_positive("--d"), required=True)
    p.add_argument("--optimize", action="store_true", help="cancel adjacent inverse pairs")
    p.add_argument("--out", type=Path, help="write the .qdc circuit here (default: stdout)")

    p = sub.add_parser("simulate", help="run a .qdc circuit on a basis input")
    p.add_argument("circuit", type=Path)
    p.add_argument("--input", required=True, help="digit string, wire 0 first")
    p.add_argument("--trace", action="store_true", help="print the state after every op")

    p = sub.add_parser("grover", help="d-ary Grover search for one marked element")
    p.add_argument("--n", type=_positive("--n"), required=True)
    p.add_argument("--d", type=_positive("--d"), required=True)
    p.add_argument("--marked", required=True)
    p.add_argument("--iterations", type=_positive("--iterations"))
    p.add_argument("--seed", type=_positive("--seed"), default=0, help="seed for the measured sample")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("leakage", help="leakage-noise sweep over n")
    p.add_argument("--model", choices=("erasure", "unitary"), default="erasure")
    p.add_argument("--d", type=_positive("--d"), default=2)
    p.add_argument("--n-min", type=_positive("--n-min"), default=2)
    p.add_argument("--n-max", type=_positive("--n-max"), default=14)
    p.add_argument("--p-l", type=_probability, default=0.001)
    p.add_argument("--t", type=float, default=0.1, help="coupling time (unitary model)")
    p.add_argument("--trials", type=_positive("--trials"), default=1000)
    p.add_argument("--seed", type=_positive("--seed"), default=0)
    p.add_argument("--leak-level", type=_positive("--leak-level"), help="erasure target level (default d)")
    p.add_argument("--no-oracle-noise", action="store_true", help="leave the oracle's multi-control noiseless")
    p.add_argument("--out", type=Path, help="CSV output path (default: stdout)")

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", choices=("toffoli-table", "equivalence", "diffusion", "all"), default="all")
    p.add_argument("--fixture", type=Path, help="truth-table CSV (default: bundled transcription)")
    return parser


def _digits(text: str, n: int | None = None) -> tuple[int, ...]:
    try:
        digits = parse_digits(text)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if n is not None and len(digits) != n:
        raise UsageError(f"digit string {text!r} has {len(digits)} digits, expected {n}")
    return digits


def _write(path: Path | None, text: str, out) -> None:
    if path is None:
        out.write(text)
    else:
        path.write_text(text, encoding="utf-8", newline="\n")


def cmd_decompose(args, out) -> int:
    if args.n > 64:
        raise UsageError(f"--n {args.n} exceeds the limit of 64")
    if args.d > 64:
        raise UsageError(f"--d {args.d} exceeds the limit of 64")
    circuit = decompose(args.n, args.d)
    if args.optimize:
        circuit = optimize_cancel(circuit)
    _write(args.out, emit(circuit), out)
    out.write(json.dumps(stats(circuit, args.d).as_dict(args.n, args.d)) + "\n")
    return 0


def cmd_simulate(args, out) -> int:
    try:
        circuit = parse(args.circuit.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {args.circuit}: {exc.strerror}") from None
    digits = _digits(args.input, len(circuit.wires))
    state = prepare_basis(circuit.dims, digits)
    records = run(circuit, state, trace=args.trace)
    if args.trace:
        out.write(f"cycle=0 state={format_digits(digits, circuit.dims)}\n")
        for r in records:
            out.write(f"cycle={r.cycle_index} state={r.basis_label}\n")
    else:
        out.write(f"state={state.label()}\n")
    return 0


def cmd_grover(args, out) -> int:
    marked = _digits(args.marked, args.n)
    problem = GroverProblem(args.n, args.d, marked, args.iterations)
    result = run_grover(problem, trace=True, rng=np.random.default_rng(args.seed))
    dims = (args.d,) * args.n
    payload = {
        "n": args.n, "d": args.d,
        "marked": format_digits(marked, dims),
        "iterations": problem.rounds,
        "success_probability": result.success_probability,
        "trajectory": result.probability_trajectory,
        "measured": format_digits(result.measured_sample, (args.d + 2,) * args.n),
    }
    if args.json:
        out.write(json.dumps(payload) + "\n")
    else:
        out.write(
            f"n={args.n} d={args.d} marked={payload['marked']} iterations={problem.rounds} "
            f"success={result.success_probability:.12f} measured={payload['measured']}\n"
        )
    return 0


def cmd_leakage(args, out) -> int:
    if args.n_min < 2 or args.n_max < args.n_min:
        raise UsageError(f"invalid n range {args.n_min}..{args.n_max} (need 2 <= n-min <= n-max)")
    if args.d < 2:
        raise UsageError("--d must be >= 2")
    n_range = range(args.n_min, args.n_max + 1)
    oracle_noise = not args.no_oracle_noise
    if args.model == "erasure":
        if args.leak_level is not None and args.leak_level not in (args.d, args.d + 1):
            raise UsageError(f"--leak-level must be {args.d} or {args.d + 1}")
        rows = leakage.sweep(args.d, n_range, args.p_l, args.trials, args.seed, args.leak_level, oracle_noise)
        text = leakage.sweep_csv(rows)
    else:
        lines = ["n,N,t,success,noiseless_success"]
        for n in n_range:
            if (args.d + 2) ** n > leakage.MC_STATE_GUARD:
                lines.append(f"{n},{args.d**n},{args.t!r},,")
                continue
            problem = GroverProblem(n, args.d, (0,) * n)
            noisy = leakage.grover_unitary_leak(problem, args.t, oracle_noise)
            clean = run_grover(problem).success_probability
            lines.append(f"{n},{args.d**n},{args.t!r},{noisy!r},{clean!r}")
        text = "\n".join(lines) + "\n"
    _write(args.out, text, out)
    return 0


# -- verification suites --------------------------------------------------------


def table_csv(rows) -> str:
    return TABLE_HEADER + "\n" + "".join(",".join(r) + "\n" for r in rows)


def bundled_fixture() -> str:
    return resources.files("quditkit").joinpath("data/table3.csv").read_text(encoding="utf-8")


def check_table(fixture_text: str) -> list[str]:
    """Compare the simulated truth table with a fixture; returns the differing fixture rows."""
    generated = table_csv(truth_table_rows(8, 2)).splitlines()
    expected = fixture_text.replace("\r\n", "\n").splitlines()
    problems = []
    if not expected or expected[0] != TABLE_HEADER:
        return ["header mismatch"]
    for k in range(1, max(len(generated), len(expected))):
        want = expected[k] if k < len(expected) else "<missing>"
        got = generated[k] if k < len(generated) else "<missing>"
        if want != got:
            problems.append(f"row {k} fixture {want} simulated {got}")
    return problems


def suite_table(args, out) -> None:
    if args.fixture is not None:
        try:
            text = args.fixture.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read fixture {args.fixture}: {exc.strerror}") from None
    else:
        text = bundled_fixture()
    problems = check_table(text)
    if problems:
        raise VerificationFailure(f"toffoli-table: {len(problems)} differing row(s); first: {problems[0]}")
    out.write("toffoli-table: 128/128 rows match\n")


def suite_equivalence(args, out) -> None:
    for n, d in EQUIVALENCE_GRID:
        report = verify_equivalence(n, d)
        if not report.ok:
            raise VerificationFailure(f"equivalence n={n} d={d}: first mismatch {report.mismatches[:1]}")
        out.write(f"equivalence n={n} d={d}: {report.matched}/{report.total} match\n")


def suite_diffusion(args, out) -> None:
    for n, d in DIFFUSION_CASES:
        if not equal_up_to_phase(circuit_matrix(build_diffusion_circuit(n, d), d), build_diffusion(n, d), atol=1e-9):
            raise VerificationFailure(f"diffusion n={n} d={d}: circuit differs from D")
        out.write(f"diffusion n={n} d={d}: matches D up to global phase\n")


def cmd_verify(args, out) -> int:
    suites = {"toffoli-table": suite_table, "equivalence": suite_equivalence, "diffusion": suite_diffusion}
    chosen = list(suites) if args.suite == "all" else [args.suite]
    for name in chosen:
        suites[name](args, out)
    return 0


COMMANDS = {
    "decompose": cmd_decompose, "simulate": cmd_simulate, "grover": cmd_grover,
    "leakage": cmd_leakage, "verify": cmd_verify,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return 1
    except (CircuitError, DomainError, ResourceError) as exc:
        err.write(f"error: {exc}\n")
        return 1
    except VerificationFailure as exc:
        err.write(f"verification failed: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
