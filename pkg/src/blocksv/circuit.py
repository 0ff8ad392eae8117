"""Circuits, gate unitaries, an OpenQASM 2.0 subset parser and benchmark generators.

Bit convention used everywhere in the package: qubit position 0 is the
least-significant bit of an amplitude index. For two-qubit gates the first
operand is the high-order bit of the 2-bit sub-index, so ``CX(c, t)`` with
sub-index ``(c, t)`` swaps ``|10>`` and ``|11>``.
"""

from __future__ import annotations

import ast
import enum
import math
import operator
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 62


class GateKind(enum.Enum):
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    P = "p"
    CX = "cx"
    CZ = "cz"
    CP = "cp"

    @property
    def num_qubits(self) -> int:
        return 2 if self in _TWO_QUBIT else 1

    @property
    def num_params(self) -> int:
        return 1 if self in _PARAMETERIZED else 0


_TWO_QUBIT = frozenset({GateKind.CX, GateKind.CZ, GateKind.CP})
_PARAMETERIZED = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.P, GateKind.CP})


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    operands: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "operands", tuple(int(q) for q in self.operands))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.operands) != self.kind.num_qubits:
            raise ValueError(
                f"{self.kind.name} takes {self.kind.num_qubits} operand(s), got {len(self.operands)}"
            )
        if len(set(self.operands)) != len(self.operands):
            raise ValueError(f"{self.kind.name} operands must be distinct: {self.operands}")
        if any(q < 0 for q in self.operands):
            raise ValueError(f"negative qubit operand in {self.operands}")
        if len(self.params) != self.kind.num_params:
            raise ValueError(
                f"{self.kind.name} takes {self.kind.num_params} parameter(s), got {len(self.params)}"
            )
        if not all(math.isfinite(p) for p in self.params):
            raise ValueError(f"non-finite gate parameter in {self.params}")

    def __repr__(self) -> str:
        args = ", ".join(str(q) for q in self.operands)
        if self.params:
            args = ", ".join(f"{p:.6g}" for p in self.params) + "; " + args
        return f"{self.kind.name}({args})"


# Shorthand constructors, mostly for tests and generators.
def H(q): return Gate(GateKind.H, (q,))
def X(q): return Gate(GateKind.X, (q,))
def Y(q): return Gate(GateKind.Y, (q,))
def Z(q): return Gate(GateKind.Z, (q,))
def RX(theta, q): return Gate(GateKind.RX, (q,), (theta,))
def RY(theta, q): return Gate(GateKind.RY, (q,), (theta,))
def RZ(theta, q): return Gate(GateKind.RZ, (q,), (theta,))
def P(theta, q): return Gate(GateKind.P, (q,), (theta,))
def CX(c, t): return Gate(GateKind.CX, (c, t))
def CZ(a, b): return Gate(GateKind.CZ, (a, b))
def CP(theta, c, t): return Gate(GateKind.CP, (c, t), (theta,))


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {self.n}")
        for i, g in enumerate(self.gates):
            if max(g.operands) >= self.n:
                raise ValueError(f"gate {i} ({g!r}) has an operand outside the {self.n}-qubit register")

    def __len__(self) -> int:
        return len(self.gates)


_INV_SQRT2 = 1.0 / math.sqrt(2.0)

_FIXED_1Q = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=np.complex128) * _INV_SQRT2,
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    GateKind.Z: np.diag([1, -1]).astype(np.complex128),
    GateKind.S: np.diag([1, 1j]).astype(np.complex128),
    GateKind.SDG: np.diag([1, -1j]).astype(np.complex128),
    GateKind.T: np.diag([1, np.exp(1j * math.pi / 4)]).astype(np.complex128),
    GateKind.TDG: np.diag([1, np.exp(-1j * math.pi / 4)]).astype(np.complex128),
}

_CX = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]], dtype=np.complex128)
_CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)


def gate_unitary(g: Gate) -> np.ndarray:
    """Return the 2x2 or 4x4 unitary of ``g`` (first operand = high sub-index bit)."""
    k = g.kind
    if k in _FIXED_1Q:
        return _FIXED_1Q[k].copy()
    if k is GateKind.CX:
        return _CX.copy()
    if k is GateKind.CZ:
        return _CZ.copy()
    theta = g.params[0]
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if k is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if k is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if k is GateKind.RZ:
        return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    if k is GateKind.P:
        return np.diag([1.0, np.exp(1j * theta)]).astype(np.complex128)
    if k is GateKind.CP:
        return np.diag([1.0, 1.0, 1.0, np.exp(1j * theta)]).astype(np.complex128)
    raise AssertionError(f"unhandled gate kind {k}")


# ---------------------------------------------------------------------------
# OpenQASM 2.0 subset

class QasmError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


_ALIASES = {"u1": GateKind.P, "cu1": GateKind.CP}
_GATE_NAMES = {k.value: k for k in GateKind} | _ALIASES
_IGNORED_DECLS = ("include", "creg")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[\[\](),;+\-*/^])
    """,
    re.VERBOSE,
)

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
          "ln": math.log, "sqrt": math.sqrt}


def _eval_param(expr: str) -> float:
    """Evaluate a QASM parameter expression (numbers, pi, + - * / ^, a few functions)."""
    tree = ast.parse(expr.replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported expression {expr!r}")

    return float(ev(tree))


def _tokenize(text: str):
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            yield kind, m.group(), line, pos - line_start + 1
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()


def _split_statements(text: str):
    stmt = []
    for tok in _tokenize(text):
        if tok[1] == ";":
            if not stmt:
                continue
            yield stmt
            stmt = []
        else:
            stmt.append(tok)
    if stmt:
        _, val, line, col = stmt[0]
        raise QasmError("missing ';' at end of statement", line, col)


def _parse_args(toks, reg_name, n, where):
    """Parse ``q[i], q[j]`` (or a bare register) into a list of index lists."""
    args, i = [], 0
    while i < len(toks):
        kind, val, line, col = toks[i]
        if kind != "ident":
            raise QasmError(f"expected register name, found {val!r}", line, col)
        if val != reg_name:
            raise QasmError(f"unknown register {val!r}", line, col)
        if i + 1 < len(toks) and toks[i + 1][1] == "[":
            if i + 3 >= len(toks) or toks[i + 2][0] != "number" or toks[i + 3][1] != "]":
                raise QasmError("malformed register index", line, col)
            idx = int(toks[i + 2][1])
            if idx >= n:
                raise QasmError(f"qubit index {idx} out of range for {reg_name}[{n}]", line, toks[i + 2][3])
            args.append([idx])
            i += 4
        else:
            args.append(list(range(n)))
            i += 1
        if i < len(toks):
            if toks[i][1] != ",":
                raise QasmError(f"expected ',' found {toks[i][1]!r}", toks[i][2], toks[i][3])
            i += 1
            if i == len(toks):
                raise QasmError("trailing ','", *where)
    return args


def parse_qasm(text: str) -> Circuit:
    """Parse an OpenQASM 2.0 program with a single ``qreg`` into a :class:`Circuit`.

    ``swap a,b`` is lowered to three CX gates; ``barrier`` is ignored and
    ``measure`` is ignored with a warning. Raises :class:`QasmError` with the
    line and column of the offending token.
    """
    reg_name, n = None, None
    gates: list[Gate] = []
    warned_measure = False

    for stmt in _split_statements(text):
        kind, head, line, col = stmt[0]
        if head == "OPENQASM":
            if len(stmt) != 2 or stmt[1][1] not in ("2.0", "2"):
                raise QasmError("only OPENQASM 2.0 is supported", line, col)
            continue
        if head in _IGNORED_DECLS:
            continue
        if head == "qreg":
            if reg_name is not None:
                raise QasmError("multiple qreg declarations are not supported", line, col)
            if (len(stmt) != 5 or stmt[1][0] != "ident" or stmt[2][1] != "["
                    or stmt[3][0] != "number" or stmt[4][1] != "]"):
                raise QasmError("malformed qreg declaration", line, col)
            reg_name, n = stmt[1][1], int(stmt[3][1])
            if not 1 <= n <= MAX_QUBITS:
                raise QasmError(f"register size {n} outside [1, {MAX_QUBITS}]", line, stmt[3][3])
            continue
        if head == "barrier":
            continue
        if head == "measure":
            if not warned_measure:
                warnings.warn("measure statements are ignored; the simulator returns the final state",
                              stacklevel=2)
                warned_measure = True
            continue
        if kind != "ident":
            raise QasmError(f"unexpected token {head!r}", line, col)
        if head not in _GATE_NAMES and head != "swap":
            raise QasmError(f'unsupported gate "{head}"', line, col)
        if reg_name is None:
            raise QasmError("gate applied before qreg declaration", line, col)

        rest = stmt[1:]
        params: list[float] = []
        if rest and rest[0][1] == "(":
            depth, j = 0, 0
            for j, tok in enumerate(rest):
                depth += tok[1] == "("
                depth -= tok[1] == ")"
                if depth == 0:
                    break
            if depth != 0:
                raise QasmError("unbalanced parentheses", line, col)
            inner, rest = rest[1:j], rest[j + 1:]
            chunks, cur = [], []
            depth = 0
            for tok in inner:
                if tok[1] == "," and depth == 0:
                    chunks.append(cur)
                    cur = []
                    continue
                depth += tok[1] == "("
                depth -= tok[1] == ")"
                cur.append(tok)
            chunks.append(cur)
            for chunk in chunks:
                if not chunk:
                    raise QasmError("empty gate parameter", line, col)
                try:
                    params.append(_eval_param(" ".join(t[1] for t in chunk)))
                except (ValueError, SyntaxError, ZeroDivisionError, OverflowError) as exc:
                    raise QasmError(f"bad parameter expression: {exc}", chunk[0][2], chunk[0][3]) from None

        args = _parse_args(rest, reg_name, n, (line, col))
        arity = 2 if head == "swap" else _GATE_NAMES[head].num_qubits
        if len(args) != arity:
            raise QasmError(f"{head} expects {arity} qubit argument(s), got {len(args)}", line, col)
        width = max(len(a) for a in args)
        if any(len(a) not in (1, width) for a in args):
            raise QasmError("register broadcast size mismatch", line, col)
        expanded = [[a[0] if len(a) == 1 else a[k] for a in args] for k in range(width)]

        for qs in expanded:
            try:
                if head == "swap":
                    if params:
                        raise ValueError("swap takes no parameters")
                    a, b = qs
                    gates.extend([CX(a, b), CX(b, a), CX(a, b)])
                else:
                    gates.append(Gate(_GATE_NAMES[head], tuple(qs), tuple(params)))
            except ValueError as exc:
                raise QasmError(str(exc), line, col) from None

    if reg_name is None:
        raise QasmError("no qreg declaration found")
    return Circuit(n, tuple(gates))


def emit_qasm(circuit: Circuit) -> str:
    """Serialize ``circuit`` as OpenQASM 2.0; ``parse_qasm`` reads it back exactly."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n}];"]
    for g in circuit.gates:
        name = g.kind.value
        if g.params:
            name += "(" + ",".join(repr(p) for p in g.params) + ")"
        lines.append(name + " " + ",".join(f"q[{q}]" for q in g.operands) + ";")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Benchmark generators

BENCHMARKS = ("ghz", "cat_state", "bv", "qft", "qaoa")


def _swap(a: int, b: int) -> list[Gate]:
    return [CX(a, b), CX(b, a), CX(a, b)]


def ghz(n: int) -> Circuit:
    return Circuit(n, [H(0)] + [CX(i, i + 1) for i in range(n - 1)])


def bernstein_vazirani(n: int, secret: str | Sequence[int] | None = None) -> Circuit:
    """Bernstein-Vazirani on ``n - 1`` data qubits with qubit ``n - 1`` as the oracle ancilla.

    ``secret`` is a bitstring whose character ``i`` is data qubit ``i``.
    """
    data = n - 1
    if secret is None:
        bits = [1 - (i % 2) for i in range(data)]
    else:
        bits = [int(ch) for ch in secret]
        if not bits:
            raise ValueError("bv secret must be non-empty")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"bv secret must be a bitstring, got {secret!r}")
        if len(bits) > data:
            raise ValueError(f"secret of length {len(bits)} needs at least {len(bits) + 1} qubits")
    anc = n - 1
    gates = [X(anc)]
    gates += [H(q) for q in range(n)]
    gates += [CX(i, anc) for i, bit in enumerate(bits) if bit]
    gates += [H(q) for q in range(n)]
    return Circuit(n, gates)


def qft(n: int) -> Circuit:
    gates = []
    for target in range(n - 1, -1, -1):
        gates.append(H(target))
        for ctrl in range(target - 1, -1, -1):
            gates.append(CP(math.pi / 2 ** (target - ctrl), ctrl, target))
    for i in range(n // 2):
        gates += _swap(i, n - 1 - i)
    return Circuit(n, gates)


def qaoa(n: int, layers: int = 1, seed: int = 0) -> Circuit:
    """Ring-graph MaxCut QAOA with angles drawn from ``seed``."""
    if layers < 1:
        raise ValueError("qaoa needs at least one layer")
    rng = np.random.default_rng(seed)
    gammas = rng.uniform(0, 2 * math.pi, size=layers)
    betas = rng.uniform(0, math.pi, size=layers)
    edges = [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(0, 1)]
    gates = [H(q) for q in range(n)]
    for gamma, beta in zip(gammas, betas):
        for a, b in edges:
            gates += [CX(a, b), RZ(2 * gamma, b), CX(a, b)]
        gates += [RX(2 * beta, q) for q in range(n)]
    return Circuit(n, gates)


def generate_benchmark(name: str, n: int, *, layers: int = 1, seed: int = 0,
                       secret: str | None = None) -> Circuit:
    """Build one of the bundled benchmark circuits (see :data:`BENCHMARKS`)."""
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")
    if n < 2:
        raise ValueError(f"{name} needs at least 2 qubits, got {n}")
    if name in ("ghz", "cat_state"):
        return ghz(n)
    if name == "bv":
        return bernstein_vazirani(n, secret)
    if name == "qft":
        return qft(n)
    return qaoa(n, layers, seed)


def random_circuit(n: int, depth: int, rng: np.random.Generator,
                   kinds: Iterable[GateKind] = tuple(GateKind)) -> Circuit:
    """Random circuit over ``kinds``; used by the test-suite and demos."""
    kinds = list(kinds)
    if n < 2:
        kinds = [k for k in kinds if k.num_qubits == 1]
    gates = []
    for _ in range(depth):
        kind = kinds[rng.integers(len(kinds))]
        qs = rng.choice(n, size=kind.num_qubits, replace=False)
        params = tuple(rng.uniform(-math.pi, math.pi, size=kind.num_params))
        gates.append(Gate(kind, tuple(int(q) for q in qs), params))
    return Circuit(n, gates)
