"""Staged, block-compressed simulation driver plus the dense oracle.

Each stage dispatches its SV groups to a thread pool. A group task fetches
and decompresses the group's blocks, runs the stage's gates on the
concatenated buffer, then recompresses and stores the blocks. The pool is
drained before the next stage starts, since the grouping changes from one
stage to the next.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, gate_unitary
from .codec import ErrorBound, compress_amplitudes, decompress_amplitudes
from .kernel import apply_stage, assemble_group_buffer, split_buffer
from .partition import Layout, PartitionPlan, group_block_ids, partition_circuit
from .store import BlockStore

log = logging.getLogger(__name__)

DEFAULT_VERIFY_CAP_BYTES = 16 << 24


class SimulationError(RuntimeError):
    pass


@dataclass
class Config:
    b: int
    inner_size: int = 2
    b_r: float = 1e-3
    budget: int | None = None
    spill_dir: str | None = None
    workers: int = 1
    compress: bool = True
    verify: bool = False
    verify_cap_bytes: int = DEFAULT_VERIFY_CAP_BYTES

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.inner_size < 0:
            raise ValueError(f"inner_size must be >= 0, got {self.inner_size}")
        ErrorBound(self.b_r)


@dataclass
class StageStats:
    stage: int
    gate_begin: int
    gate_end: int
    inner_indices: list[int]
    group_count: int
    wall_ms: float
    decompressions: int
    compressions: int
    max_per_block: int
    every_block_once: bool
    footprint_bytes: int


@dataclass
class SimulationReport:
    qubits: int
    gate_count: int
    stage_count: int
    max_footprint_bytes: int
    standard_bytes: int
    compression_ratio: float
    spilled_blocks: int
    wall_ms: float
    per_stage_timings: list[StageStats] = field(default_factory=list)
    fidelity: float | None = None
    norm: float = 0.0

    WALL_CLOCK_FIELDS = ("wall_ms",)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def standard_bytes(n: int) -> int:
    """Dense double-precision state-vector size, ``2**(n + 4)`` bytes."""
    return 1 << (n + 4)


def _encode(amps: np.ndarray, config: Config) -> bytes:
    if config.compress:
        return compress_amplitudes(amps, config.b_r)
    return np.ascontiguousarray(amps, dtype=np.complex128).tobytes()


def _decode(payload: bytes, config: Config) -> np.ndarray:
    if config.compress:
        return decompress_amplitudes(payload)
    return np.frombuffer(payload, dtype=np.complex128).copy()


def init_state(n: int, config: Config, store: BlockStore) -> int:
    """Store ``|0...0>``: compress block 0 and one zero block shared by all other ids.

    Returns the number of compressions performed.
    """
    if len(store):
        raise ValueError("init_state needs an empty store")
    layout = Layout(n, config.b)
    first = np.zeros(layout.block_size, dtype=np.complex128)
    first[0] = 1.0
    store.put(0, _encode(first, config))
    if layout.num_blocks == 1:
        return 1
    store.put_shared(range(1, layout.num_blocks),
                     _encode(np.zeros(layout.block_size, dtype=np.complex128), config))
    return 2


def extract_state(store: BlockStore, layout: Layout, config: Config) -> np.ndarray:
    """Decode every block in id order into one dense vector (verification only)."""
    size = standard_bytes(layout.n)
    if size > config.verify_cap_bytes:
        raise SimulationError(
            f"dense state of {layout.n} qubits needs {size} bytes, over the verification cap of "
            f"{config.verify_cap_bytes} bytes")
    out = np.empty(1 << layout.n, dtype=np.complex128)
    step = layout.block_size
    for g in range(layout.num_blocks):
        out[g * step:(g + 1) * step] = _decode(store.get(g), config)
    return out


def state_norm(store: BlockStore, layout: Layout, config: Config) -> float:
    """2-norm of the stored state, computed block by block."""
    total = 0.0
    for g in range(layout.num_blocks):
        amps = _decode(store.get(g), config)
        total += float(np.vdot(amps, amps).real)
    return math.sqrt(total)


def dense_reference(circuit: Circuit, cap_bytes: int = DEFAULT_VERIFY_CAP_BYTES) -> np.ndarray:
    """Ideal final state: every gate applied to the full vector, no blocks, no compression.

    Uses a tensor contraction over a ``(2,) * n`` view, independent of the
    strided kernel used by the staged path.
    """
    n = circuit.n
    if standard_bytes(n) > cap_bytes:
        raise SimulationError(f"dense reference for {n} qubits exceeds the cap of {cap_bytes} bytes")
    psi = np.zeros((2,) * n, dtype=np.complex128)
    psi[(0,) * n] = 1.0
    for gate in circuit.gates:
        axes = [n - 1 - q for q in gate.operands]  # C-order: axis 0 is the top bit
        k = len(axes)
        u = gate_unitary(gate).reshape((2,) * (2 * k))
        psi = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), axes))
        psi = np.moveaxis(psi, list(range(k)), axes)
    return np.ascontiguousarray(psi).reshape(-1)


def fidelity(psi_a: np.ndarray, psi_b: np.ndarray) -> float:
    """``|<psi_a|psi_b>|``."""
    if len(psi_a) != len(psi_b):
        raise ValueError(f"state lengths differ: {len(psi_a)} vs {len(psi_b)}")
    return float(abs(np.vdot(psi_a, psi_b)))


class Simulator:
    """One simulation run over a private :class:`BlockStore`.

    ``step()`` executes the next stage; ``run()`` executes all of them and
    returns the report. Close the simulator (or use it as a context
    manager) to remove the spill file.
    """

    def __init__(self, circuit: Circuit, config: Config, store: BlockStore | None = None):
        if not 0 < config.b <= circuit.n:
            raise ValueError(f"block bits must satisfy 0 < b <= n, got b={config.b}, n={circuit.n}")
        self.circuit = circuit
        self.config = config
        self.plan: PartitionPlan = partition_circuit(circuit, config.b, config.inner_size)
        self.layout = self.plan.layout
        self.store = store if store is not None else BlockStore(config.budget, config.spill_dir)
        self.stats: list[StageStats] = []
        self.init_compressions = init_state(circuit.n, config, self.store)
        self._next = 0
        self._elapsed = 0.0
        self._pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None
        self.store.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @property
    def done(self) -> bool:
        return self._next >= len(self.plan.stages)

    def _run_group(self, stage_idx: int, ids: np.ndarray) -> tuple[list[int], list[int]]:
        """Process one SV group; returns the block ids decoded and encoded."""
        stage = self.plan.stages[stage_idx]
        decoded, encoded = [], []
        try:
            blocks = []
            for g in ids:
                blocks.append(_decode(self.store.get(int(g)), self.config))
                decoded.append(int(g))
            buf = assemble_group_buffer(blocks)
            apply_stage(buf, stage, self.circuit, self.layout)
            for g, blk in zip(ids, split_buffer(buf, self.layout.b)):
                self.store.put(int(g), _encode(blk, self.config))
                encoded.append(int(g))
        except Exception as exc:
            raise SimulationError(
                f"stage {stage_idx} group starting at block {int(ids[0])}: {exc}") from exc
        return decoded, encoded

    def step(self) -> StageStats:
        if self.done:
            raise StopIteration("all stages have run")
        idx = self._next
        stage = self.plan.stages[idx]
        groups = group_block_ids(stage, self.layout)
        t0 = time.perf_counter()
        if self._pool is None:
            touched = [self._run_group(idx, row) for row in groups]
        else:
            futures = [self._pool.submit(self._run_group, idx, row) for row in groups]
            touched = [f.result() for f in futures]  # barrier
        wall = time.perf_counter() - t0
        self._elapsed += wall

        dec = Counter(g for ids, _ in touched for g in ids)
        enc = Counter(g for _, ids in touched for g in ids)
        everything = range(self.layout.num_blocks)
        fp = self.store.footprint()
        stats = StageStats(
            stage=idx, gate_begin=stage.start, gate_end=stage.stop,
            inner_indices=list(stage.inner), group_count=len(groups),
            wall_ms=wall * 1e3,
            decompressions=sum(dec.values()), compressions=sum(enc.values()),
            max_per_block=max(max(dec.values()), max(enc.values())),
            every_block_once=all(dec[g] == 1 and enc[g] == 1 for g in everything),
            footprint_bytes=fp.resident_bytes + fp.spilled_live_bytes,
        )
        self.stats.append(stats)
        self._next += 1
        log.debug("stage %d: gates [%d, %d) inner=%s groups=%d %.1f ms", idx, stage.start,
                  stage.stop, stage.inner, len(groups), stats.wall_ms)
        return stats

    def run(self) -> SimulationReport:
        while not self.done:
            self.step()
        return self.report()

    def state(self) -> np.ndarray:
        return extract_state(self.store, self.layout, self.config)

    def report(self, fidelity: float | None = None) -> SimulationReport:
        n = self.circuit.n
        fp = self.store.footprint()
        std = standard_bytes(n)
        peak = fp.peak_footprint_bytes
        return SimulationReport(
            qubits=n,
            gate_count=len(self.circuit.gates),
            stage_count=len(self.plan.stages),
            max_footprint_bytes=peak,
            standard_bytes=std,
            compression_ratio=std / peak if peak else 0.0,
            spilled_blocks=self.store.spilled_blocks,
            wall_ms=self._elapsed * 1e3,
            per_stage_timings=list(self.stats),
            fidelity=fidelity,
            norm=state_norm(self.store, self.layout, self.config),
        )


def run(circuit: Circuit, config: Config) -> SimulationReport:
    """Simulate ``circuit``; with ``config.verify`` the report carries the fidelity vs the dense oracle."""
    with Simulator(circuit, config) as sim:
        report = sim.run()
        if config.verify:
            ideal = dense_reference(circuit, config.verify_cap_bytes)
            report.fidelity = fidelity(ideal, sim.state())
    return report


def default_workers() -> int:
    return os.cpu_count() or 1
