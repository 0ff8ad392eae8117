"""Fidelity against the dense oracle, and memory saved, for the bundled benchmarks."""
from blocksv import Config, dense_reference, fidelity, generate_benchmark
from blocksv.engine import Simulator

n = 18
print(f"{'circuit':<10} {'gates':>6} {'stages':>6} {'ratio':>9} {'fidelity':>10} {'norm':>9}")
for name in ("ghz", "cat_state", "bv", "qft", "qaoa"):
    circuit = generate_benchmark(name, n, layers=2, seed=1)
    with Simulator(circuit, Config(b=10, inner_size=4, b_r=1e-3)) as sim:
        report = sim.run()
        f = fidelity(dense_reference(circuit), sim.state())
    print(f"{name:<10} {report.gate_count:>6} {report.stage_count:>6} "
          f"{report.compression_ratio:>8.1f}x {f:>10.6f} {report.norm:>9.6f}")

# a looser bound trades fidelity for memory
circuit = generate_benchmark("qft", n)
for b_r in (1e-1, 1e-2, 1e-3, 1e-4):
    with Simulator(circuit, Config(b=10, inner_size=4, b_r=b_r)) as sim:
        report = sim.run()
        f = fidelity(dense_reference(circuit), sim.state())
    print(f"qft b_r={b_r:g}: ratio {report.compression_ratio:.1f}x fidelity {f:.6f}")
