"""
Estimating convexity and estimate constants by seeded search
============================================================

Lower bounds for operator constants come from randomized families plus
exhaustive structured probes; on small instances the structured part is a
complete enumeration, so known values are hit exactly.
"""

import numpy as np

import latticelab as ll

# identity on l_1^4: disjoint blocks drive the upper 2-estimate ratio to
# n^(1-1/p) = 2, attained by four singletons
X = ll.NormedLattice(4, ll.Lp(1.0))
est = ll.estimate_constant(ll.identity_operator(X), ll.UpperEstimate(2.0),
                           budget=500, seed=0)
print("upper 2-estimate of id on l_1^4:", est.value, "(exact: 2.0)", est.side)

# l_p is q-convex with constant one for q <= p; the estimator cannot beat it
Y = ll.NormedLattice(3, ll.Lp(2.5))
est2 = ll.estimate_constant(ll.identity_operator(Y), ll.Convex(1.5, 2.5),
                            budget=500, seed=1)
print("(1.5,2.5)-convexity of id on l_2.5^3:", f"{est2.value:.12f}")

print("\ngamma curve (bounded, peak at p* = e):")
for p in (1.1, 1.5, 2.0, 2.58, 4.0, 16.0):
    print(f"  p={p:5}  gamma={ll.gamma(p):.6f}")

# a weighted weak-type space with the [1]-renorming has upper estimate
# constant one, so its q-convexity sits under (p/(p-q))^(1/q) * gamma_p
w = ll.AtomicMeasure((0.7, 1.4, 0.9))
Z = ll.NormedLattice(3, ll.WeightedLorentzPInfty(2.0, 1, w))
rep = ll.check_q_convexity_bound(Z, 1.3, budget=800, seed=3)
print("\nq-convexity bound check, p=2, q=1.3:")
print(f"  bound          = {rep['bound']:.6f}")
print(f"  searched lower = {rep['K_q_lower']:.6f}")
print(f"  [q]-renormed ratio max = {rep['renormed_ratio_max']:.9f}  (stays at 1)")
print("  pass:", rep["pass"])
