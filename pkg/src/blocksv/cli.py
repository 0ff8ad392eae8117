"""Command-line front end: ``blocksv {run,verify,partition} ...``.

Machine-readable JSON goes to stdout (or ``--report``); a one-line summary
goes to stderr. Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import engine
from .circuit import BENCHMARKS, Circuit, QasmError, generate_benchmark, parse_qasm
from .partition import group_block_ids, partition_circuit

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_argument_group("circuit source")
    src.add_argument("--circuit", metavar="FILE", help="OpenQASM 2.0 file")
    src.add_argument("--bench", choices=BENCHMARKS, help="generated benchmark circuit")
    src.add_argument("--qubits", type=_positive_int, help="qubit count for --bench")
    src.add_argument("--layers", type=_positive_int, default=1, help="qaoa layer count")
    src.add_argument("--secret", help="bv secret bitstring")
    src.add_argument("--seed", type=_non_negative_int, default=0, help="seed for generated angles")
    common.add_argument("--block-bits", type=_positive_int, required=True, help="local index bits b")
    common.add_argument("--inner-size", type=_non_negative_int, default=2)
    common.add_argument("--report", metavar="PATH", help="write JSON here instead of stdout")

    sim = _Parser(add_help=False)
    sim.add_argument("--error-bound", type=_positive_float, default=1e-3)
    sim.add_argument("--mem-budget", type=_non_negative_int, default=None, metavar="BYTES")
    sim.add_argument("--spill-dir", default=None, metavar="PATH")
    sim.add_argument("--workers", type=_positive_int, default=engine.default_workers())
    sim.add_argument("--no-compress", action="store_true")

    parser = _Parser(prog="blocksv", description="Block-compressed state-vector simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common, sim], help="simulate and print a report")
    sub.add_parser("verify", parents=[common, sim], help="simulate and compare with the dense oracle")
    part = sub.add_parser("partition", parents=[common], help="print the stage table")
    part.add_argument("--format", choices=("json", "text"), default="json")
    return parser


def _load_circuit(args) -> Circuit:
    if (args.circuit is None) == (args.bench is None):
        raise UsageError("give exactly one of --circuit FILE or --bench NAME")
    if args.bench is not None:
        if args.qubits is None:
            raise UsageError("--bench needs --qubits")
        try:
            return generate_benchmark(args.bench, args.qubits, layers=args.layers,
                                      seed=args.seed, secret=args.secret)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        with open(args.circuit, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.circuit}: {exc.strerror}") from None
    try:
        return parse_qasm(text)
    except QasmError as exc:
        raise UsageError(f"{args.circuit}: {exc}") from None


def _stage_table(circuit: Circuit, b: int, inner_size: int) -> list[dict]:
    plan = partition_circuit(circuit, b, inner_size)
    return [
        {"stage": i, "gate_begin": s.start, "gate_end": s.stop,
         "inner_indices": list(s.inner), "group_count": len(group_block_ids(s, plan.layout))}
        for i, s in enumerate(plan.stages)
    ]


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        circuit = _load_circuit(args)
        if args.block_bits > circuit.n:
            raise UsageError(f"--block-bits {args.block_bits} exceeds the qubit count {circuit.n}")
        if args.command != "partition":
            config = engine.Config(
                b=args.block_bits, inner_size=args.inner_size, b_r=args.error_bound,
                budget=args.mem_budget, spill_dir=args.spill_dir, workers=args.workers,
                compress=not args.no_compress, verify=args.command == "verify")
            if config.verify and engine.standard_bytes(circuit.n) > config.verify_cap_bytes:
                raise UsageError(f"verify is limited to {config.verify_cap_bytes} bytes of dense state")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE

    try:
        if args.command == "partition":
            table = _stage_table(circuit, args.block_bits, args.inner_size)
            if args.format == "json":
                out = json.dumps(table, indent=2)
            else:
                lines = [f"{'stage':>5}  {'gates':>13}  {'groups':>6}  inner"]
                lines += [f"{r['stage']:>5}  {r['gate_begin']:>6}-{r['gate_end']:<6}  "
                          f"{r['group_count']:>6}  {r['inner_indices']}" for r in table]
                out = "\n".join(lines)
            _emit(out, args.report)
            print(f"{len(circuit.gates)} gates -> {len(table)} stages", file=sys.stderr)
            return EXIT_OK

        report = engine.run(circuit, config)
        _emit(report.to_json(indent=2), args.report)
        summary = (f"{report.qubits} qubits, {report.gate_count} gates, {report.stage_count} stages, "
                   f"ratio {report.compression_ratio:.2f}, {report.wall_ms:.0f} ms")
        if report.fidelity is not None:
            summary += f", fidelity {report.fidelity:.6f}"
        print(summary, file=sys.stderr)
        return EXIT_OK
    except Exception as exc:
        print(f"blocksv: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
