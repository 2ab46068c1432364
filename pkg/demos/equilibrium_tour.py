"""Solve the equilibrium problem across temperatures and potentials.

The flat case is exact (the uniform density solves the problem for V = 0 at
every beta); a cosine potential shows how interaction strength flattens the
profile as beta grows.
"""

import numpy as np

from htcg.equilibrium import PotentialSpec, solve_equilibrium

print("V = 0: uniform density, closed-form constants")
print("%6s %5s %12s %14s %14s" % ("beta", "iter", "residual",
                                  "C'", "2 beta log 2"))
for beta in (0.5, 1.0, 2.0, 8.0):
    eq = solve_equilibrium(PotentialSpec.zero(), beta)
    print("%6.2f %5d %12.3e %14.10f %14.10f"
          % (beta, eq.iterations, eq.residual_sup, eq.C_prime,
             2 * beta * np.log(2.0)))

print()
print("V = cos x: the log-gas repulsion fights the confining well")
print("%8s %5s %12s %10s %10s %12s" % ("beta", "iter", "residual",
                                       "min rho", "max rho", "b*min rho"))
for beta in (0.001, 0.1, 1.0, 10.0, 100.0, 1000.0):
    eq = solve_equilibrium(PotentialSpec.cosine(1.0, 0.0), beta)
    print("%8.3f %5d %12.3e %10.5f %10.5f %12.4g"
          % (beta, eq.iterations, eq.residual_sup,
             float(np.min(eq.rho)), float(np.max(eq.rho)),
             beta * float(np.min(eq.rho))))

print()
print("as beta -> 0 the density tends to e^{-V}/Z; as beta -> infinity")
print("the repulsion wins and rho -> 1. The last column is the witness")
print("used by the large-beta variance comparison.")
