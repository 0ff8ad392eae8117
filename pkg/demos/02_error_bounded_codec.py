"""The block codec: sign/zero bitmaps plus log2-domain quantization.

Every nonzero scalar comes back within a relative error b_r of the
original; zeros and signs are exact. Sparse and sign-coherent blocks
shrink to a few bytes because constant bitmap chunks cost two bits.
"""
import numpy as np

from blocksv import compress_block, decompress_block, relative_to_absolute_bound

rng = np.random.default_rng(0)
x = 10.0 ** rng.uniform(-30, 0, 1 << 16) * rng.choice([-1, 1], 1 << 16)
x[rng.random(len(x)) < 0.1] = 0.0

for b_r in (1e-2, 1e-3, 1e-4):
    payload = compress_block(x, b_r).to_bytes()
    y = decompress_block(payload)
    nz = x != 0
    rel = np.abs(y[nz] - x[nz]) / np.abs(x[nz])
    print(f"b_r={b_r:g}  b_a={relative_to_absolute_bound(b_r):.6g}  "
          f"max rel err={rel.max():.3g}  {x.nbytes} -> {len(payload)} bytes")

# a uniform-magnitude block with coherent signs: what a GHZ or BV block looks like
block = np.full(1 << 13, 2.0 ** -10)
block[len(block) // 2:] *= -1
print("coherent block:", block.nbytes, "->", len(compress_block(block, 1e-3).to_bytes()), "bytes")
print("all-zero block:", block.nbytes, "->", len(compress_block(0 * block, 1e-3).to_bytes()), "bytes")
