"""
Why the big sequence space fails an upper p-estimate
====================================================

Inside the space of p-weak sequences of little-lp blocks, cyclic shifts of
one carefully chosen vector are all normalized and pairwise disjoint, yet
the norm of their supremum outgrows n^(1/p) by a factor A_n that keeps
increasing. No single constant can cap an upper p-estimate.
"""

import latticelab as ll

p = 2.0
rep = ll.reproduce_lpinfty_lp(p, 8)

print("n = 8, p = 2")
print("  every shifted copy has norm 1:", rep["unit_norms_ok"],
      f"(max dev {rep['unit_norm_check']:.1e})")
print(f"  ||sup of copies|| / n^(1/p) = {rep['vee_ratio']:.12f}")
print(f"  predicted ratio A_n         = {rep['A_n']:.12f}")

print("\ngrowth of A_n as n doubles:")
for row in rep["growth_table"]:
    # last column compares A_n^p with the harmonic number, a rough guide
    print(f"  n={row['n']:3d}  A_n={row['A_n']:.6f}  A_n^p/H_n={row['A_n^p/H_n']:.3f}")
