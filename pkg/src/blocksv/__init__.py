"""Memory-bounded state-vector simulation over independently compressed blocks."""

from .circuit import (
    BENCHMARKS, Circuit, Gate, GateKind, QasmError, emit_qasm, gate_unitary,
    generate_benchmark, parse_qasm,
)
from .codec import (
    CodecError, CompressedBlock, ErrorBound, PrescanBitmap, compress_block,
    decompress_block, prescan_decode, prescan_encode, relative_to_absolute_bound,
)
from .engine import (
    Config, SimulationError, SimulationReport, Simulator, dense_reference,
    extract_state, fidelity, init_state, run,
)
from .kernel import GroupBuffer, apply_gate, apply_stage, assemble_group_buffer, split_buffer
from .partition import (
    Layout, PartitionPlan, Stage, SVGroup, buffer_bit_of_qubit, enumerate_groups,
    partition_circuit,
)
from .store import BlockStore, Memory, SpillError, Spilled

__version__ = "0.1.0"
