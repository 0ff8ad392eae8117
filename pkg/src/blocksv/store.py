"""Budgeted block store: payloads live in memory up to a byte budget, the rest in a spill file.

When an incoming payload does not fit the remaining budget, that payload is
appended to the run's spill file; resident blocks are never evicted. Several
block ids may share one payload (the all-zero blocks after initialization);
a shared payload is counted once.
"""

from __future__ import annotations

import math
import os
import tempfile
import threading
from dataclasses import dataclass
from typing import Iterator, Sequence


class SpillError(RuntimeError):
    """Writing to or reading from the spill file failed."""


@dataclass(frozen=True)
class Memory:
    payload: bytes


@dataclass(frozen=True)
class Spilled:
    file_id: str
    offset: int
    length: int


Residency = Memory | Spilled


class _Entry:
    __slots__ = ("residency", "refs")

    def __init__(self, residency):
        self.residency = residency
        self.refs = 0

    @property
    def size(self) -> int:
        r = self.residency
        return len(r.payload) if isinstance(r, Memory) else r.length


@dataclass(frozen=True)
class Footprint:
    resident_bytes: int
    spilled_live_bytes: int
    peak_footprint_bytes: int


class BlockStore:
    """Thread-safe id -> payload map with a memory budget and file spill.

    ``budget=None`` (or ``math.inf``) never spills; ``budget=0`` spills
    everything.
    """

    def __init__(self, budget: int | float | None = None, spill_dir: str | os.PathLike | None = None):
        self.budget = math.inf if budget is None else budget
        if self.budget < 0:
            raise ValueError(f"memory budget must be non-negative, got {budget}")
        self.spill_dir = spill_dir
        self._index: dict[int, _Entry] = {}
        self._lock = threading.Lock()
        self._spill_lock = threading.Lock()
        self._fd: int | None = None
        self._spill_path: str | None = None
        self._cursor = 0
        self.resident_bytes = 0
        self.spilled_live_bytes = 0
        self.peak_footprint_bytes = 0
        self.puts = 0
        self.spilled_blocks = 0

    # -- lifecycle -------------------------------------------------------

    def close(self) -> None:
        with self._spill_lock:
            if self._fd is not None:
                os.close(self._fd)
                self._fd = None
                try:
                    os.unlink(self._spill_path)
                except FileNotFoundError:
                    pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @property
    def spill_path(self) -> str | None:
        return self._spill_path

    # -- internals -------------------------------------------------------

    def _release(self, entry: _Entry) -> None:
        entry.refs -= 1
        if entry.refs == 0:
            if isinstance(entry.residency, Memory):
                self.resident_bytes -= entry.size
            else:
                self.spilled_live_bytes -= entry.size

    def _sample_peak(self) -> None:
        self.peak_footprint_bytes = max(self.peak_footprint_bytes,
                                        self.resident_bytes + self.spilled_live_bytes)

    def _spill(self, payload: bytes) -> Spilled:
        try:
            with self._spill_lock:
                if self._fd is None:
                    fd, path = tempfile.mkstemp(prefix="blocksv-", suffix=".spill", dir=self.spill_dir)
                    self._fd, self._spill_path = fd, path
                offset = self._cursor
                written = os.pwrite(self._fd, payload, offset)
                if written != len(payload):
                    raise OSError(f"short write ({written} of {len(payload)} bytes)")
                self._cursor += len(payload)
                path = self._spill_path
        except OSError as exc:
            raise SpillError(f"cannot write to spill file in {self.spill_dir or tempfile.gettempdir()}: {exc}") from exc
        return Spilled(path, offset, len(payload))

    def _install(self, ids: Sequence[int], payload: bytes) -> Residency:
        payload = bytes(payload)
        with self._lock:
            self.puts += 1
            for i in ids:
                old = self._index.pop(i, None)
                if old is not None:
                    self._release(old)
            if self.resident_bytes + len(payload) <= self.budget:
                entry = _Entry(Memory(payload))
                self.resident_bytes += len(payload)
                entry.refs = len(ids)
                for i in ids:
                    self._index[i] = entry
                self._sample_peak()
                return entry.residency
        # over budget: the incoming payload goes to disk
        entry = _Entry(self._spill(payload))
        with self._lock:
            self.spilled_blocks += 1
            self.spilled_live_bytes += len(payload)
            entry.refs = len(ids)
            for i in ids:
                self._index[i] = entry
            self._sample_peak()
        return entry.residency

    # -- public API ------------------------------------------------------

    def put(self, block_id: int, payload: bytes) -> Residency:
        return self._install([block_id], payload)

    def put_shared(self, block_ids: Sequence[int], payload: bytes) -> Residency:
        ids = list(block_ids)
        if not ids:
            raise ValueError("put_shared needs at least one block id")
        return self._install(ids, payload)

    def get(self, block_id: int) -> bytes:
        with self._lock:
            entry = self._index.get(block_id)
        if entry is None:
            raise KeyError(f"block {block_id} was never stored")
        r = entry.residency
        if isinstance(r, Memory):
            return r.payload
        try:
            data = os.pread(self._fd, r.length, r.offset)
        except (OSError, TypeError) as exc:
            raise SpillError(f"cannot read block {block_id} from spill file: {exc}") from exc
        if len(data) != r.length:
            raise SpillError(f"short read for block {block_id}: {len(data)} of {r.length} bytes")
        return data

    def residency(self, block_id: int) -> Residency:
        with self._lock:
            return self._index[block_id].residency

    def entries(self) -> Iterator[tuple[int, Residency]]:
        with self._lock:
            items = [(i, e.residency) for i, e in self._index.items()]
        return iter(sorted(items, key=lambda t: t[0]))

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, block_id: int) -> bool:
        return block_id in self._index

    def footprint(self) -> Footprint:
        with self._lock:
            return Footprint(self.resident_bytes, self.spilled_live_bytes, self.peak_footprint_bytes)
