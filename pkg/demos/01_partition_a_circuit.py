"""Staging a circuit: how many decompress/recompress cycles does a run need?

A gate on a local qubit (position < b) only pairs amplitudes inside one
block. Gates on global qubits pair amplitudes across blocks, so a stage
bundles gates until the set of distinct global qubits would grow past
max(inner_size, 2). Each stage costs one decode + one encode per block.
"""
import json

from blocksv import enumerate_groups, generate_benchmark, partition_circuit

circuit = generate_benchmark("qft", 20)
print(f"qft(20): {len(circuit)} gates")

# stage count falls as the inner budget grows
for inner_size in range(0, 9):
    plan = partition_circuit(circuit, b=10, inner_size=inner_size)
    print(f"  b=10 inner_size={inner_size}: {len(plan)} stages")

plan = partition_circuit(circuit, b=10, inner_size=5)
for i, stage in enumerate(plan.stages[:4]):
    groups = enumerate_groups(stage, plan.layout)
    print(f"stage {i}: gates [{stage.start}, {stage.stop}) inner={list(stage.inner)} "
          f"-> {len(groups)} groups of {len(groups[0].block_ids)} blocks")

# the 6-qubit grouping used throughout the docs: b=2, inner qubits 3 and 5
from blocksv import Layout, Stage
groups = enumerate_groups(Stage(0, 1, (3, 5)), Layout(6, 2))
print(json.dumps({g.outer_value: g.block_ids for g in groups}))
