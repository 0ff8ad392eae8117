import json
import math

import numpy as np
import pytest

from blocksv.circuit import Circuit, H, generate_benchmark, random_circuit
from blocksv.codec import compress_amplitudes
from blocksv.engine import (
    Config, SimulationError, Simulator, dense_reference, extract_state, fidelity, init_state, run,
    standard_bytes,
)
from blocksv.partition import Layout
from blocksv.store import BlockStore


def test_standard_bytes():
    assert standard_bytes(20) == 16 * 2**20 == 2**24


class TestInit:
    def test_two_compressions(self):
        cfg = Config(b=2)
        with BlockStore() as store:
            assert init_state(4, cfg, store) == 2
            assert len(store) == 4
            distinct = {id(r.payload) for _, r in store.entries()}
            assert len(distinct) == 2
            np.testing.assert_array_equal(extract_state(store, Layout(4, 2), cfg), np.eye(16)[0])

    def test_single_block(self):
        cfg = Config(b=3)
        with BlockStore() as store:
            assert init_state(3, cfg, store) == 1
            assert len(store) == 1
            np.testing.assert_array_equal(extract_state(store, Layout(3, 3), cfg), np.eye(8)[0])

    def test_zero_payload_is_header_only(self):
        cfg = Config(b=4)
        with BlockStore() as store:
            init_state(8, cfg, store)
            zero = store.get(1)
            assert zero == compress_amplitudes(np.zeros(16), 1e-3)
            assert len(zero) < 32

    def test_needs_empty_store(self):
        with BlockStore() as store:
            store.put(0, b"x")
            with pytest.raises(ValueError):
                init_state(3, Config(b=1), store)


class TestOracle:
    def test_hadamard(self):
        np.testing.assert_allclose(dense_reference(Circuit(1, [H(0)])), [2**-0.5] * 2, atol=1e-15)

    def test_qft_of_zero_is_uniform(self):
        np.testing.assert_allclose(dense_reference(generate_benchmark("qft", 3)), [8**-0.5] * 8,
                                   atol=1e-14)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_qft_matches_dft(self, n):
        # columns of the circuit's unitary vs the DFT matrix, via basis-state preparation
        from blocksv.circuit import X
        N = 2**n
        dft = np.exp(2j * np.pi * np.outer(range(N), range(N)) / N) / np.sqrt(N)
        for x in range(N):
            prep = [X(q) for q in range(n) if (x >> q) & 1]
            c = Circuit(n, prep + list(generate_benchmark("qft", n).gates))
            np.testing.assert_allclose(dense_reference(c), dft[:, x], atol=1e-12)

    @pytest.mark.parametrize("n, secret", [(4, "101"), (6, "11001"), (9, "10000001")])
    def test_bv_recovers_secret(self, n, secret):
        psi = dense_reference(generate_benchmark("bv", n, secret=secret))
        peak = int(np.argmax(np.abs(psi)))
        data = [(peak >> i) & 1 for i in range(len(secret))]
        assert data == [int(ch) for ch in secret]
        assert abs(psi[peak]) == pytest.approx(1.0, abs=1e-12)

    def test_cap(self):
        with pytest.raises(SimulationError):
            dense_reference(Circuit(10), cap_bytes=1000)


class TestFidelity:
    def test_self(self):
        rng = np.random.default_rng(0)
        psi = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi /= np.linalg.norm(psi)
        assert fidelity(psi, psi) == pytest.approx(1.0, abs=1e-14)
        phase = np.exp(0.7j)
        assert fidelity(phase * psi, psi) == pytest.approx(1.0, abs=1e-14)
        assert fidelity(psi, np.exp(-2.1j) * psi) == pytest.approx(1.0, abs=1e-14)

    def test_orthogonal(self):
        assert fidelity(np.eye(4)[0], np.eye(4)[1]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(np.zeros(2), np.zeros(4))


class TestRun:
    def test_ghz3(self):
        c = generate_benchmark("ghz", 3)
        with Simulator(c, Config(b=1, inner_size=2)) as sim:
            report = sim.run()
            psi = sim.state()
        assert np.count_nonzero(psi) == 2 and psi[0] != 0 and psi[7] != 0
        np.testing.assert_allclose(psi, dense_reference(c), atol=1e-3)
        assert fidelity(dense_reference(c), psi) >= 0.99
        assert report.stage_count >= 1

    def test_empty_circuit(self):
        with Simulator(Circuit(4), Config(b=2)) as sim:
            report = sim.run()
            np.testing.assert_array_equal(sim.state(), np.eye(16)[0])
        assert report.stage_count == 0 and report.gate_count == 0
        assert report.norm == 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_uncompressed_equals_oracle(self, seed):
        rng = np.random.default_rng(seed)
        c = random_circuit(7, 40, rng)
        with Simulator(c, Config(b=3, inner_size=2, compress=False)) as sim:
            sim.run()
            assert np.max(np.abs(sim.state() - dense_reference(c))) <= 1e-12

    def test_one_cycle_per_block_per_stage(self):
        c = generate_benchmark("qft", 8)
        with Simulator(c, Config(b=3, inner_size=2)) as sim:
            report = sim.run()
        for st in report.per_stage_timings:
            assert st.decompressions == st.compressions == 2**5
            assert st.max_per_block == 1 and st.every_block_once

    def test_verify_flag_adds_fidelity(self):
        report = run(generate_benchmark("qft", 6), Config(b=3, inner_size=2, verify=True))
        assert report.fidelity >= 0.99

    def test_extract_cap(self):
        with Simulator(generate_benchmark("ghz", 6), Config(b=2, verify_cap_bytes=100)) as sim:
            sim.run()
            with pytest.raises(SimulationError):
                sim.state()

    def test_report_json_fields(self):
        report = run(generate_benchmark("ghz", 6), Config(b=2))
        data = json.loads(report.to_json())
        for key in ("qubits", "gate_count", "stage_count", "max_footprint_bytes", "standard_bytes",
                    "compression_ratio", "spilled_blocks", "wall_ms", "per_stage_timings",
                    "fidelity", "norm"):
            assert key in data
        assert data["standard_bytes"] == 16 * 2**6
        assert data["compression_ratio"] == pytest.approx(
            data["standard_bytes"] / data["max_footprint_bytes"])

    def test_sparse_footprint_smaller_with_compression(self):
        for name in ("ghz", "cat_state", "bv"):
            c = generate_benchmark(name, 12)
            on = run(c, Config(b=6, inner_size=2))
            off = run(c, Config(b=6, inner_size=2, compress=False))
            assert on.max_footprint_bytes <= off.max_footprint_bytes

    def test_worker_counts_agree(self):
        c = generate_benchmark("qaoa", 10, layers=2, seed=4)
        states, payloads = [], []
        for workers in (1, 3):
            with Simulator(c, Config(b=4, inner_size=3, workers=workers)) as sim:
                sim.run()
                states.append(sim.state())
                payloads.append([sim.store.get(g) for g in range(2**6)])
        np.testing.assert_array_equal(states[0], states[1])
        assert payloads[0] == payloads[1]

    def test_errors_carry_stage_context(self):
        c = generate_benchmark("ghz", 5)
        with Simulator(c, Config(b=2)) as sim:
            sim.store.put(3, b"garbage")
            with pytest.raises(SimulationError, match="stage 0"):
                sim.run()

    def test_bad_config(self):
        with pytest.raises(ValueError):
            Config(b=2, workers=0)
        with pytest.raises(ValueError):
            Config(b=2, b_r=0)
        with pytest.raises(ValueError):
            Simulator(Circuit(3), Config(b=4))

    def test_norm_streamed_matches_dense(self):
        c = generate_benchmark("qft", 9)
        with Simulator(c, Config(b=4, inner_size=3)) as sim:
            report = sim.run()
            assert report.norm == pytest.approx(np.linalg.norm(sim.state()), rel=1e-12)
        assert math.isclose(report.norm, 1.0, abs_tol=0.02)
