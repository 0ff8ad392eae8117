"""Block layout of the state vector and greedy staging of a circuit.

An amplitude index ``i`` splits into a block id ``g = i >> b`` (the global
index, ``c = n - b`` bits) and a position ``i & (2**b - 1)`` inside the
block (the local index). A stage is a contiguous run of gates touching at
most ``max(inner_size, 2)`` distinct global qubits; those qubits are the
stage's inner indices. Blocks that agree on all other (outer) global bits
form an SV group and can be updated together after one decompression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit


@dataclass(frozen=True)
class Layout:
    n: int
    b: int

    def __post_init__(self):
        if not 0 < self.b <= self.n:
            raise ValueError(f"local bits must satisfy 0 < b <= n, got b={self.b}, n={self.n}")

    @property
    def c(self) -> int:
        return self.n - self.b

    @property
    def num_blocks(self) -> int:
        return 1 << self.c

    @property
    def block_size(self) -> int:
        return 1 << self.b

    def split_index(self, i: int) -> tuple[int, int]:
        return i >> self.b, i & (self.block_size - 1)


@dataclass(frozen=True)
class Stage:
    start: int
    stop: int
    inner: tuple[int, ...]

    @property
    def gate_range(self) -> range:
        return range(self.start, self.stop)

    def __len__(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class PartitionPlan:
    layout: Layout
    inner_size: int
    stages: tuple[Stage, ...]

    def __len__(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class SVGroup:
    outer_value: int
    block_ids: tuple[int, ...]


def partition_circuit(circuit: Circuit, b: int, inner_size: int) -> PartitionPlan:
    """Split ``circuit`` into stages with the greedy first-fit scan.

    Gates are added one at a time; when the next gate would push the number
    of distinct global operands above ``max(inner_size, 2)``, the current
    stage is closed and the gate opens a new one. Both operands of a
    two-qubit gate count. No reordering or lookahead.
    """
    if inner_size < 0:
        raise ValueError(f"inner_size must be >= 0, got {inner_size}")
    layout = Layout(circuit.n, b)
    threshold = max(inner_size, 2)

    stages: list[Stage] = []
    start = 0
    current: set[int] = set()
    for i, gate in enumerate(circuit.gates):
        touched = current.union(q for q in gate.operands if q >= b)
        if len(touched) > threshold:
            stages.append(Stage(start, i, tuple(sorted(current))))
            start = i
            touched = {q for q in gate.operands if q >= b}
        current = touched
    if start < len(circuit.gates):
        stages.append(Stage(start, len(circuit.gates), tuple(sorted(current))))
    return PartitionPlan(layout, inner_size, tuple(stages))


def _deposit(values: np.ndarray, positions: list[int]) -> np.ndarray:
    """Scatter the low bits of ``values`` onto bit ``positions`` (ascending)."""
    out = np.zeros_like(values)
    for rank, pos in enumerate(positions):
        out |= ((values >> rank) & 1) << pos
    return out


def group_block_ids(stage: Stage, layout: Layout) -> np.ndarray:
    """Block ids of every group of ``stage`` as a ``(groups, 2**|inner|)`` array."""
    inner = [q - layout.b for q in stage.inner]
    if any(not 0 <= q < layout.c for q in inner):
        raise ValueError(f"inner indices {stage.inner} outside the global range [{layout.b}, {layout.n})")
    outer = [q for q in range(layout.c) if q not in inner]
    outer_part = _deposit(np.arange(1 << len(outer), dtype=np.int64), outer)
    inner_part = _deposit(np.arange(1 << len(inner), dtype=np.int64), inner)
    return outer_part[:, None] | inner_part[None, :]


def enumerate_groups(stage: Stage, layout: Layout) -> list[SVGroup]:
    ids = group_block_ids(stage, layout)
    return [SVGroup(o, tuple(int(g) for g in row)) for o, row in enumerate(ids)]


def buffer_bit_of_qubit(stage: Stage, layout: Layout, q: int) -> int:
    """Bit position of qubit ``q`` inside the stage's group buffer."""
    if q < layout.b:
        return q
    try:
        return layout.b + stage.inner.index(q)
    except ValueError:
        raise ValueError(
            f"qubit {q} is an outer index of stage [{stage.start}, {stage.stop}) "
            f"with inner {stage.inner}"
        ) from None
