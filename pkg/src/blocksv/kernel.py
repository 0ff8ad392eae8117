"""Gate application on SV blocks and group buffers.

Blocks are plain ``complex128`` arrays of length ``2**b``. A group buffer is
the concatenation of a group's blocks in ascending inner-value order, so
buffer position ``p`` holds inner value ``p >> b`` and local index
``p & (2**b - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, gate_unitary
from .partition import Layout, Stage, SVGroup, buffer_bit_of_qubit


@dataclass
class GroupBuffer:
    amplitudes: np.ndarray
    group: SVGroup | None = None


def assemble_group_buffer(blocks: Sequence[np.ndarray], group: SVGroup | None = None) -> GroupBuffer:
    if not blocks:
        raise ValueError("cannot assemble a buffer from zero blocks")
    count = len(blocks)
    if count & (count - 1):
        raise ValueError(f"block count must be a power of two, got {count}")
    size = len(blocks[0])
    if any(len(blk) != size for blk in blocks):
        raise ValueError("all blocks of a group must have the same length")
    return GroupBuffer(np.concatenate(blocks).astype(np.complex128, copy=False), group)


def split_buffer(buffer: GroupBuffer | np.ndarray, b: int) -> list[np.ndarray]:
    amps = buffer.amplitudes if isinstance(buffer, GroupBuffer) else buffer
    size = 1 << b
    if len(amps) % size:
        raise ValueError(f"buffer length {len(amps)} is not a multiple of the block size {size}")
    return [amps[k:k + size] for k in range(0, len(amps), size)]


def apply_gate(amps: np.ndarray, u: np.ndarray, bits: Sequence[int]) -> np.ndarray:
    """Apply ``u`` in place to ``amps`` on buffer ``bits`` and return ``amps``.

    For a 4x4 ``u`` the first entry of ``bits`` is the high-order bit of the
    2-bit sub-index. Every amplitude is visited exactly once.
    """
    m = len(amps).bit_length() - 1
    if len(amps) != 1 << m:
        raise ValueError(f"buffer length {len(amps)} is not a power of two")
    if any(not 0 <= q < m for q in bits):
        raise ValueError(f"bit positions {tuple(bits)} out of range for a {m}-bit buffer")

    if len(bits) == 1:
        (q,) = bits
        if u.shape != (2, 2):
            raise ValueError("single-bit update needs a 2x2 matrix")
        v = amps.reshape(-1, 2, 1 << q)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
        v[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
        return amps

    if len(bits) != 2 or bits[0] == bits[1]:
        raise ValueError(f"expected one or two distinct bits, got {tuple(bits)}")
    if u.shape != (4, 4):
        raise ValueError("two-bit update needs a 4x4 matrix")
    hi, lo = bits
    top, bot = max(hi, lo), min(hi, lo)
    v = amps.reshape(-1, 2, 1 << (top - bot - 1), 2, 1 << bot)

    def view(h, l):
        # sub-index (h, l) with h on bit `hi`, l on bit `lo`
        if hi == top:
            return v[:, h, :, l, :]
        return v[:, l, :, h, :]

    old = [view(h, l).copy() for h in (0, 1) for l in (0, 1)]
    for row in range(4):
        out = view(row >> 1, row & 1)
        out[...] = u[row, 0] * old[0]
        for col in range(1, 4):
            if u[row, col] != 0:
                out += u[row, col] * old[col]
    return amps


def apply_stage(buffer: GroupBuffer, stage: Stage, circuit: Circuit, layout: Layout) -> GroupBuffer:
    """Run every gate of ``stage`` on ``buffer`` in program order."""
    for gate in circuit.gates[stage.start:stage.stop]:
        bits = [buffer_bit_of_qubit(stage, layout, q) for q in gate.operands]
        apply_gate(buffer.amplitudes, gate_unitary(gate), bits)
    return buffer
