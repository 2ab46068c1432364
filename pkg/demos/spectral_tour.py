"""Eigenvalues of the fluctuation operator, flat anchor, and the growth fit.

At V = 0 the operator diagonalizes in the Fourier basis with eigenvalues
k^2 + beta k, each twice (cos and sin). A potential perturbs them upward,
never below the interaction-free part (interlacing).
"""

import numpy as np

from htcg.equilibrium import PotentialSpec, solve_equilibrium
from htcg.spectral import assemble, eigensystem, weyl_fit

beta = 1.0
eq0 = solve_equilibrium(PotentialSpec.zero(), beta)
eqc = solve_equilibrium(PotentialSpec.cosine(1.0, 0.0), beta)

kap0 = eigensystem(assemble(eq0, 64)).kappas
kapc = eigensystem(assemble(eqc, 64)).kappas
lamc = eigensystem(assemble(eqc, 64, operator="A")).kappas

print("lowest eigenvalue pairs at beta = %g" % beta)
print("%4s %14s %14s %14s %14s" % ("k", "k^2+beta k", "V=0 computed",
                                   "V=cos", "A-only (V=cos)"))
for k in range(1, 9):
    j = 2 * (k - 1)
    print("%4d %14.9f %14.9f %14.9f %14.9f"
          % (k, k * k + beta * k, kap0[j], kapc[j], lamc[j]))

worst = float(np.min(kapc - lamc))
print()
print("interlacing: min_j (kappa_j - lambda_j) = %.6f  (never negative)"
      % worst)

print()
print("growth exponent fit kappa_j ~ alpha j^2 on the doubled index,")
print("window j in [32, 64]; doubling the truncation leaves it unchanged:")
for K_op in (64, 128):
    wf = weyl_fit(eigensystem(assemble(eq0, K_op)), 32, 64)
    print("  K_op = %3d: alpha_hat = %.9f  spread = %.4f"
          % (K_op, wf.alpha_hat, wf.spread))
print("(alpha -> 1/4 as j grows since kappa_{2k} = k^2 + beta k ~ (j/2)^2)")
