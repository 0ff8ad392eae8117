import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blocksv.circuit import (
    CP, CX, Circuit, Gate, GateKind, H, QasmError, RZ, X, emit_qasm, gate_unitary,
    generate_benchmark, parse_qasm, random_circuit,
)

angles = st.floats(-10, 10, allow_nan=False)


class TestGate:
    def test_operand_validation(self):
        with pytest.raises(ValueError):
            Gate(GateKind.CX, (1, 1))
        with pytest.raises(ValueError):
            Gate(GateKind.H, (0, 1))
        with pytest.raises(ValueError):
            Gate(GateKind.RX, (0,))
        with pytest.raises(ValueError):
            Circuit(2, [CX(0, 2)])
        with pytest.raises(ValueError):
            Circuit(0)
        with pytest.raises(ValueError):
            Circuit(63)

    @given(kind=st.sampled_from(list(GateKind)), theta=angles)
    def test_every_unitary_is_unitary(self, kind, theta):
        ops = tuple(range(kind.num_qubits))
        u = gate_unitary(Gate(kind, ops, (theta,) * kind.num_params))
        assert np.max(np.abs(u.conj().T @ u - np.eye(len(u)))) <= 1e-12

    def test_textbook_matrices(self):
        np.testing.assert_allclose(gate_unitary(H(0)), np.array([[1, 1], [1, -1]]) / math.sqrt(2))
        cx = gate_unitary(CX(0, 1))
        basis = np.eye(4)
        # |10> <-> |11>, |00> and |01> fixed (first operand is the high sub-index bit)
        np.testing.assert_array_equal(cx @ basis[2], basis[3])
        np.testing.assert_array_equal(cx @ basis[3], basis[2])
        np.testing.assert_array_equal(cx @ basis[0], basis[0])
        np.testing.assert_array_equal(cx @ basis[1], basis[1])
        np.testing.assert_allclose(gate_unitary(RZ(math.pi, 0)),
                                   np.diag([np.exp(-0.5j * math.pi), np.exp(0.5j * math.pi)]))


class TestQasm:
    def test_basic(self):
        c = parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];")
        assert c.n == 2
        assert c.gates == (H(0), CX(0, 1))

    def test_swap_lowering(self):
        c = parse_qasm("qreg q[3]; swap q[0],q[2];")
        assert c.gates == (CX(0, 2), CX(2, 0), CX(0, 2))

    def test_unsupported_gate(self):
        with pytest.raises(QasmError, match='unsupported gate "foo"') as info:
            parse_qasm("qreg q[2]; foo q[0];")
        assert info.value.line == 1 and info.value.column == 12

    @pytest.mark.parametrize("text, fragment", [
        ("qreg q[2]; h q[2];", "out of range"),
        ("qreg q[2]; qreg r[2];", "multiple qreg"),
        ("qreg q[2]; h q[0]", "missing ';'"),
        ("qreg q[2]; h q[0] $;", "unexpected character"),
        ("qreg q[2]; cx q[0];", "expects 2"),
        ("qreg q[2]; rz(foo) q[0];", "bad parameter"),
        ("h q[0];", "before qreg"),
        ("", "no qreg"),
    ])
    def test_errors(self, text, fragment):
        with pytest.raises(QasmError, match=fragment):
            parse_qasm(text)

    def test_error_position_on_later_line(self):
        with pytest.raises(QasmError) as info:
            parse_qasm("OPENQASM 2.0;\nqreg q[2];\n  h q[5];\n")
        assert info.value.line == 3

    def test_full_program(self):
        text = """
        OPENQASM 2.0;
        include "qelib1.inc";   // standard header
        qreg q[3];
        creg c[3];
        h q;
        u1(pi/4) q[1];
        cu1(-pi / 2) q[0], q[2];
        rx(2*pi^2) q[2];
        barrier q;
        measure q[0] -> c[0];
        """
        with pytest.warns(UserWarning, match="measure"):
            c = parse_qasm(text)
        assert c.gates == (H(0), H(1), H(2),
                           Gate(GateKind.P, (1,), (math.pi / 4,)),
                           CP(-math.pi / 2, 0, 2),
                           Gate(GateKind.RX, (2,), (2 * math.pi ** 2,)))

    def test_no_warning_without_measure(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            parse_qasm("qreg q[1]; x q[0]; barrier q[0];")

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 8), depth=st.integers(0, 30))
    def test_emit_parse_roundtrip(self, seed, n, depth):
        c = random_circuit(n, depth, np.random.default_rng(seed))
        assert parse_qasm(emit_qasm(c)) == c

    @pytest.mark.parametrize("name", ["ghz", "cat_state", "bv", "qft", "qaoa"])
    def test_generators_roundtrip(self, name):
        c = generate_benchmark(name, 6, layers=2, seed=3)
        assert parse_qasm(emit_qasm(c)) == c


class TestBenchmarks:
    def test_ghz(self):
        assert generate_benchmark("ghz", 3).gates == (H(0), CX(0, 1), CX(1, 2))
        assert generate_benchmark("cat_state", 3) == generate_benchmark("ghz", 3)

    def test_qft_gate_count(self):
        # 3 H + 3 CP + one swap lowered to 3 CX
        c = generate_benchmark("qft", 3)
        kinds = [g.kind for g in c.gates]
        assert len(c.gates) == 9
        assert kinds.count(GateKind.H) == 3
        assert kinds.count(GateKind.CP) == 3
        assert kinds.count(GateKind.CX) == 3

    def test_bv_gate_count(self):
        # X on the ancilla + 4 H + 2 CX (secret 101) + 4 H
        c = generate_benchmark("bv", 4, secret="101")
        assert len(c.gates) == 11
        assert c.gates[0] == X(3)
        assert [g for g in c.gates if g.kind is GateKind.CX] == [CX(0, 3), CX(2, 3)]

    def test_bv_default_secret_alternates(self):
        c = generate_benchmark("bv", 6)
        assert [g.operands[0] for g in c.gates if g.kind is GateKind.CX] == [0, 2, 4]

    @pytest.mark.parametrize("name, n, kwargs", [
        ("ghz", 1, {}), ("qft", 1, {}), ("bv", 4, {"secret": ""}), ("bv", 3, {"secret": "111"}),
        ("bv", 4, {"secret": "12"}), ("qaoa", 4, {"layers": 0}), ("nope", 4, {}),
    ])
    def test_generator_errors(self, name, n, kwargs):
        with pytest.raises(ValueError):
            generate_benchmark(name, n, **kwargs)

    def test_deterministic(self):
        a = generate_benchmark("qaoa", 8, layers=3, seed=11)
        b = generate_benchmark("qaoa", 8, layers=3, seed=11)
        assert a == b
        assert a != generate_benchmark("qaoa", 8, layers=3, seed=12)

    def test_qaoa_structure(self):
        c = generate_benchmark("qaoa", 5, layers=2, seed=0)
        # H layer + per layer (5 ring edges * 3 + 5 RX)
        assert len(c.gates) == 5 + 2 * (15 + 5)
