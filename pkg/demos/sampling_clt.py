"""Gibbs sampling and the central limit theorem for linear statistics.

Draws independent configurations at N = 100, forms the centered scaled
statistic nu_N(cos x), and compares its spread to the operator-predicted
variance. The beta = 0 exact sampler gets the classical iid comparison.
"""

import numpy as np

from htcg.equilibrium import PotentialSpec, solve_equilibrium
from htcg.fluctuations import variance_solve
from htcg.gibbs import ChainSpec, linear_statistics, sample_batch
from htcg.spectral import assemble
from htcg.torus import TrigSeries

COS = TrigSeries.from_cos_sin(0.0, [1.0], [])
V0 = PotentialSpec.zero()

eq = solve_equilibrium(V0, 1.0)
sigma2 = variance_solve(COS, assemble(eq, 64))
spec = ChainSpec(N=100, beta=1.0, potential=V0, algorithm="MH",
                 n_steps=1, burn_in=32, seed=7)
series = linear_statistics(sample_batch(spec, 1000), COS, eq)
s = series.summary
print("interacting gas, beta = 1, N = 100, 1000 independent chains")
print("  predicted sigma^2 = %.6f" % sigma2)
print("  sample variance   = %.6f  (std err of the estimate ~ %.4f)"
      % (s["variance"], s["variance"] * np.sqrt(2.0 / 999)))
print("  sample mean       = %+.4f  (should be ~ 0)" % s["mean"])
print("  normality p-value = %.3f   (Anderson-Darling)" % s["normality_p"])

print()
Vc = PotentialSpec.cosine(1.0, 0.0)
eqb0 = solve_equilibrium(Vc, 0.0)
spec0 = ChainSpec(N=100, beta=0.0, potential=Vc, algorithm="IID0",
                  n_steps=1, burn_in=0, seed=7)
vals = linear_statistics(sample_batch(spec0, 1000), COS, eqb0).values
psi_g = COS.grid(eqb0.M)
m = float(np.mean(psi_g * eqb0.rho))
target = float(np.mean((psi_g - m) ** 2 * eqb0.rho))
print("independent particles (beta = 0, V = cos x), exact sampler")
print("  quadrature variance target = %.6f" % target)
print("  sample variance            = %.6f" % float(np.var(vals, ddof=1)))
print()
print("interaction shrinks the variance: %.4f < %.4f because the log-gas"
      % (s["variance"], target))
print("repulsion rigidifies the configuration.")
