"""
Certificates for embedding into sup-sums of weak-type spaces
============================================================

A lattice embeds C-isomorphically into a sup-sum of weak-L_p spaces exactly
when finitely many restricted dual norms can be glued below C. The checker
either produces that data (a certificate) or reports where gluing failed.
The three-atom counterexample shows the failure side: its covering-family
bound proves every embedding constant exceeds one.
"""

import numpy as np

import latticelab as ll

p = 2.0
X = ll.NormedLattice(2, ll.Lp(p))
a = np.array([0.6, 0.8])            # already unit in l_2

res = ll.t41_check(X, p, 1.0001, a, budget=500, seed=0)
print("l_2^2, C = 1.0001:", type(res).__name__)
if isinstance(res, ll.EmbeddingCertificate):
    val = ll.validate_certificate(res, X, p, C=1.0001)
    print("  revalidation:", val["margins_ok"] and val["pairing_ok"]
          and val["simplex_ok"])

# the three-atom dual space: norm is a max of three split sums
Xd = ll.NormedLattice(3, ll.Example54Dual(p))
print("\nthree-atom dual space, p=2:")
print("  ||(1,1,1)|| =", ll.eval_norm(Xd, np.ones(3)), "(sqrt 5)")

rep = ll.reproduce_example54(p)
print("  lower estimate constant of the dual:",
      f"{rep['lower_estimate_constant']:.9f}")
print("  covering bound:", f"{rep['bound']:.9f}",
      " closed form:", f"{rep['bound_formula']:.9f}")
print("  bound exceeds 1:", rep["exceeds_one"])

# the bound is a genuine obstruction certificate: pairs {1,2},{1,3},{2,3}
# cover each atom twice, and the quotient beats 1 for every p
for pp in (4 / 3, 2.0, 4.0):
    print(f"  p={pp:.3f}: bound = {ll.reproduce_example54(pp)['bound']:.6f}")
