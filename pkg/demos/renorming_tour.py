"""
Weak-type Lorentz norms on a handful of atoms
=============================================

A step function on weighted atoms has a quasinorm built from its decreasing
rearrangement, and a family of honest norms indexed by r < p that squeeze it
from above. This walks one example end to end.
"""

import numpy as np

import latticelab as ll
from latticelab import lorentz as lz

mu = ll.AtomicMeasure((0.5, 2.0, 1.0, 0.25))
f = ll.StepFunction((3.0, -1.0, 2.0, 5.0), mu)

# the rearrangement sorts |values| decreasingly and accumulates the weights
r = ll.rearrange(f)
print("values     ", f.values)
print("rearranged ", r.values)
print("breakpoints", r.breakpoints)

p = 2.0
print("\nquasinorm (p=2):", lz.quasinorm_pinfty(f, p))
for rr in (1.0, 1.3, 1.7):
    nrm = lz.norm_pinfty_r(f, p, rr)
    cap = (p / (p - rr)) ** (1.0 / rr)
    print(f"  r={rr:3}: norm={nrm:.6f}  (<= {cap:.4f} * quasinorm)")

rep = lz.check_renorming_sandwich(f, p, 1.3)
print("\nsandwich check:", rep["pass"],
      " ratio norm/quasi", f"{rep['ratio']:.6f}",
      " allowed factor", f"{rep['upper_factor']:.6f}")

# the sequence (k+1)^(1/p*) - k^(1/p*) is extremal: every prefix sum
# telescopes, and its [1]-norm over counting measure is exactly one
n, ps = 16, 2.0
k = np.arange(n, dtype=float)
alpha = (k + 1) ** (1.0 / ps) - k ** (1.0 / ps)
g = ll.StepFunction(tuple(alpha.tolist()), ll.AtomicMeasure.counting(n))
print("\nalpha sequence, n=16, p=2:")
print("  [1]-norm =", lz.norm_pinfty_r(g, 2.0, 1.0), "(exactly 1)")
