"""The quanta/frac decomposition against raw floating-point dynamics.

The package never topples real numbers: a continuous height h splits into
quanta = floor(2d h) and a fractional remainder below 1/2d, topplings
move whole quanta, and the remainder is carried through untouched. This
script runs the same additions twice, once through the decomposition and
once with a naive dense float loop (subtract 1, give 1/2d to each
neighbour), and compares. The decomposed heights stay exact; the dense
ones accumulate rounding drift.
"""

import numpy as np

from sandpiles import build_lattice, cbtw_add, decompose, zero_config

rng = np.random.default_rng(42)
lat = build_lattice([3])
share = 1.0 / (2 * lat.d)

def dense_add(heights, x, u):
    h = heights.copy()
    h[x] += u
    while True:
        unstable = np.flatnonzero(h >= 1.0 - 1e-12)
        if unstable.size == 0:
            return h
        for i in unstable:
            h[i] -= 1.0
            for y in lat.adjacency[i]:
                h[y] += share

config = zero_config(lat)
dense = np.zeros(lat.n_sites)

print("three-site path, 200 uniform additions at random sites")
print()
print(" step  site  amount   decomposed heights          dense drift")
for t in range(1, 201):
    x = int(rng.integers(lat.n_sites))
    u = float(rng.uniform(0.0, 1.0))
    config = cbtw_add(lat, config, x, u)
    dense = dense_add(dense, x, u)
    if t in (1, 2, 50, 100, 200):
        drift = np.max(np.abs(config.heights() - dense))
        hs = ", ".join(f"{v:.6f}" for v in config.heights())
        print(f"{t:>5} {x:>5}  {u:.4f}   [{hs}]   {drift:.2e}")

print()
print("quanta are integers, so the decomposed trajectory cannot drift:")
print(f"  quanta   = {config.quanta.tolist()}")
print(f"  frac     = {np.array2string(config.frac, precision=17)}")
print(f"  heights  = quanta/2d + frac, all below 1: {config.is_stable()}")

redecomposed = decompose(lat, config.heights())
print()
print("decomposing the reported heights recovers the stored parts:")
print(f"  quanta match: {np.array_equal(redecomposed.quanta, config.quanta)}")
print(f"  frac error:   {np.max(np.abs(redecomposed.frac - config.frac)):.2e}")
