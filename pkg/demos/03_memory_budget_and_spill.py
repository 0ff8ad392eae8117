"""Running under a memory budget.

Payloads that do not fit the remaining budget go to an append-only spill
file; the simulation result is bit-identical to an unlimited run.
"""
import tempfile

import numpy as np

from blocksv import Config, generate_benchmark
from blocksv.engine import Simulator

circuit = generate_benchmark("qft", 16)

with Simulator(circuit, Config(b=10, inner_size=3)) as sim:
    report = sim.run()
    reference = sim.state()
print(f"unlimited: peak {report.max_footprint_bytes} B, ratio {report.compression_ratio:.1f}x")

with tempfile.TemporaryDirectory() as spill_dir:
    for budget in (20_000, 5_000, 1_000, 0):
        with Simulator(circuit, Config(b=10, inner_size=3, budget=budget, spill_dir=spill_dir)) as sim:
            report = sim.run()
            same = np.array_equal(sim.state(), reference)
            fp = sim.store.footprint()
            print(f"budget {budget:>6} B: {sim.store.spilled_blocks}/{sim.store.puts} puts spilled, "
                  f"resident {fp.resident_bytes} B, identical={same}")
