"""Acceptance suite: one test per advertised guarantee of the package.

Every test prints a single `criterion NN PASS/FAIL` line with the measured
numbers (clause details indented above it), then asserts each clause at its
stated tolerance. Tolerances are fixed here, not tuned to runs; seeds are
pinned so the whole suite is reproducible bit for bit. Expected wall time is
a few minutes, dominated by the Monte Carlo criteria (6, 8, 9).

Two clauses are known to fail for reasons recorded with the measurements
they print: the K-doubling halving clause of criterion 5 and the quantile
distance slope clause of criterion 6 both ask for decay in quantities that
are already pinned to a numerical floor (double-precision roundoff and the
finite-sample estimator floor respectively). They are asserted literally
anyway; see the printed diagnostics.
"""

import warnings

import numpy as np
import pytest

from htcg.equilibrium import PotentialSpec, solve_equilibrium
from htcg.fluctuations import (closed_form_v0, interpolation_check,
                               variance_report)
from htcg.gibbs import (ChainSpec, generator_identity_gap, linear_statistics,
                        sample, sample_batch, w2_to_gaussian, zeta_N)
from htcg.spectral import assemble, eigensystem, weyl_fit
from htcg.torus import TrigSeries
from htcg.transport import concentration_experiment, w1_circle

COS = TrigSeries.from_cos_sin(0.0, [1.0], [])
COS2 = TrigSeries.from_cos_sin(0.0, [0.0, 1.0], [])
V0 = PotentialSpec.zero()
VCOS = PotentialSpec.cosine(1.0, 0.0)
LOG2 = np.log(2.0)


def verdict(num, clauses):
    """Print clause details and the one-line criterion verdict, then assert."""
    for name, ok, detail in clauses:
        print("    - %-22s %s  (%s)" % (name, "ok" if ok else "VIOLATED",
                                        detail))
    ok_all = all(ok for _, ok, _ in clauses)
    print("criterion %2d %s" % (num, "PASS" if ok_all else "FAIL"))
    for name, ok, detail in clauses:
        assert ok, "criterion %d, %s: %s" % (num, name, detail)


@pytest.fixture(scope="module")
def eq0():
    return solve_equilibrium(V0, 1.0, K=256, M=1024)


def test_01_flat_exactness():
    clauses = []
    for beta in (0.5, 1.0, 2.0):
        eq = solve_equilibrium(V0, beta, K=256, M=1024)
        rho_err = float(np.max(np.abs(eq.rho - 1.0)))
        u_err = float(np.max(np.abs(eq.U.grid(eq.M) - LOG2)))
        # stored constant is for the unit-mean density; against the
        # probability normalization both sides shift by log 2pi, so the
        # comparison is made after removing that common shift
        c_err = abs((eq.C_prime - np.log(2 * np.pi))
                    - (2 * beta * LOG2 - np.log(2 * np.pi)))
        clauses.append(("rho uniform b=%g" % beta, rho_err <= 1e-12,
                        "max|rho-1| = %.2e" % rho_err))
        clauses.append(("EL residual b=%g" % beta,
                        eq.residual_sup <= 1e-12,
                        "%.2e" % eq.residual_sup))
        clauses.append(("free constant b=%g" % beta, c_err <= 1e-12,
                        "|C - 2 b log2| = %.2e" % c_err))
        clauses.append(("log potential b=%g" % beta, u_err <= 1e-12,
                        "max|U-log2| = %.2e" % u_err))
    verdict(1, clauses)


def test_02_spectrum_anchor():
    clauses = []
    for beta in (0.5, 1.0, 2.0):
        eq = solve_equilibrium(V0, beta, K=256, M=1024)
        kap = eigensystem(assemble(eq, 64)).kappas
        expect = np.sort(np.array([k * k + beta * k
                                   for k in range(1, 21)] * 2))
        rel = float(np.max(np.abs(kap[:40] - expect) / expect))
        clauses.append(("lowest 40, b=%g" % beta, rel <= 1e-9,
                        "rel err %.2e" % rel))
    eqc = solve_equilibrium(VCOS, 1.0, K=256, M=1024)
    kap = eigensystem(assemble(eqc, 64)).kappas
    lam = eigensystem(assemble(eqc, 64, operator="A")).kappas
    worst = float(np.min(kap - lam))
    clauses.append(("interlacing V=cos", worst >= -1e-9,
                    "min(kappa_j - lambda_j) = %.3e" % worst))
    verdict(2, clauses)


def test_03_variance_triple():
    clauses = []
    for psi, beta, target, label in ((COS, 1.0, 0.25, "cos x, b=1"),
                                     (COS2, 3.0, 0.2, "cos 2x, b=3")):
        eq = solve_equilibrium(V0, beta, K=256, M=1024)
        rep = variance_report(psi, eq, K_op=64)
        cf = closed_form_v0(psi, beta)
        for route, val in (("eigen", rep.sigma2_eigen),
                           ("solve", rep.sigma2_solve),
                           ("closed form", cf)):
            rel = abs(val - target) / target
            clauses.append(("%s %s" % (label, route), rel <= 1e-8,
                            "%.12g vs %g, rel %.2e" % (val, target, rel)))
    verdict(3, clauses)


def test_04_interpolation_limits():
    table = interpolation_check(COS, VCOS, beta_grid=[1e-3, 1e3],
                                K=256, M=1024, tol=1e-10, K_op=64,
                                witness_floor=100.0)
    rep = table.endpoint_report()
    clauses = [("small-b L2 limit", rep["low_gap_rel"] <= 0.01,
                "gap %.3g%% of target at b=%g"
                % (100 * rep["low_gap_rel"], rep["low_beta"]))]
    if rep["high_abstained"]:
        clauses.append(("large-b H^1/2 limit", True,
                        "abstained: witness b*min rho = %.3g < 100"
                        % rep["high_witness"]))
    else:
        clauses.append(("large-b H^1/2 limit", rep["high_gap_rel"] <= 0.05,
                        "gap %.3g%% of 1/2, witness %.4g"
                        % (100 * rep["high_gap_rel"], rep["high_witness"])))
    verdict(4, clauses)


def test_05_generator_identity(eq0):
    rng = np.random.default_rng(20260819)
    flat = max(generator_identity_gap(rng.uniform(0, 2 * np.pi, 50), COS, eq0)
               for _ in range(100))
    rng = np.random.default_rng(20260819)
    cfgs = [rng.uniform(0, 2 * np.pi, 50) for _ in range(20)]
    gaps = {}
    for K in (256, 512):
        eq = solve_equilibrium(VCOS, 1.0, K=K, M=4 * K, tol=1e-13)
        gaps[K] = max(generator_identity_gap(c, COS, eq) for c in cfgs)
    ratio = gaps[512] / gaps[256]
    clauses = [
        ("flat, 100 configs", flat <= 1e-10, "max gap %.3e" % flat),
        ("V=cos at K=256", gaps[256] <= 1e-7, "max gap %.3e" % gaps[256]),
        # both gaps sit at the double-precision floor, six orders below the
        # 1e-7 requirement, so this ratio measures roundoff, not resolution
        ("halves when K doubles", ratio <= 0.5,
         "gap(512)/gap(256) = %.3e/%.3e = %.3f" % (gaps[512], gaps[256],
                                                   ratio)),
    ]
    verdict(5, clauses)


def test_06_clt_monte_carlo(eq0):
    spec = ChainSpec(N=200, beta=1.0, potential=V0, algorithm="MH",
                     n_steps=1, burn_in=32, seed=2026060)
    s = linear_statistics(sample_batch(spec, 4000), COS, eq0).summary
    var_tol = max(3 * 0.25 * np.sqrt(2.0 / 3999), 0.02)
    clauses = [
        ("variance", abs(s["variance"] - 0.25) <= var_tol,
         "%.5f vs 0.25, tol %.4f" % (s["variance"], var_tol)),
        ("normality", s["normality_p"] > 0.01,
         "AD p = %.4f" % s["normality_p"]),
        ("mean", abs(s["mean"]) <= 3 * s["stderr"],
         "%.5f, 3 SE = %.5f" % (s["mean"], 3 * s["stderr"])),
    ]
    w2 = {}
    for N in (50, 200, 800):
        sp = ChainSpec(N=N, beta=1.0, potential=V0, algorithm="MH",
                       n_steps=24000, burn_in=40, thinning=6, seed=2026061 + N)
        vals = linear_statistics(sample(sp), COS, eq0).values
        w2[N] = w2_to_gaussian(vals, 0.5)
    slope = np.polyfit(np.log([50.0, 200.0, 800.0]),
                       np.log([w2[50], w2[200], w2[800]]), 1)[0]
    # the estimator itself has a floor: a 4000-draw sample of the limit
    # Gaussian measures this far from its own law, so distances at or below
    # the control are resolution-limited and the fitted slope is noise
    control = w2_to_gaussian(np.random.default_rng(99).normal(0, 0.5, 4000),
                             0.5)
    clauses.append(("quantile distance slope", slope <= -0.3,
                    "slope %.3f; W2 = %.4f / %.4f / %.4f at N = 50/200/800, "
                    "same-size Gaussian control %.4f"
                    % (slope, w2[50], w2[200], w2[800], control)))
    verdict(6, clauses)


def test_07_independent_sampling_clt():
    eq = solve_equilibrium(VCOS, 0.0, K=256, M=1024)
    spec = ChainSpec(N=200, beta=0.0, potential=VCOS, algorithm="IID0",
                     n_steps=1, burn_in=0, seed=2026070)
    vals = linear_statistics(sample_batch(spec, 4000), COS, eq).values
    psi_g = COS.grid(eq.M)
    mean_psi = float(np.mean(psi_g * eq.rho))
    target = float(np.mean((psi_g - mean_psi) ** 2 * eq.rho))
    var = float(np.var(vals, ddof=1))
    tol = 3 * target * np.sqrt(2.0 / 3999)
    verdict(7, [("variance vs quadrature", abs(var - target) <= tol,
                 "%.5f vs %.5f, 3 SE = %.5f" % (var, target, tol))])


def test_08_concentration(eq0):
    spec = ChainSpec(N=500, beta=1.0, potential=V0, algorithm="MH",
                     n_steps=1, burn_in=32, seed=2026080)
    with warnings.catch_warnings():
        # high acceptance advisory at this N; harmless for independent draws
        warnings.simplefilter("ignore", UserWarning)
        rows, w1 = concentration_experiment(spec, eq0, [0.6, 0.8, 1.0, 1.2],
                                            n_samples=2000)
    clauses = []
    for r in rows:
        if r["vacuous_flag"]:
            clauses.append(("tail r=%.1f" % r["r"], True,
                            "bound %.3g >= 1 is vacuous; freq %.4g"
                            % (r["theorem_bound"], r["empirical_freq"])))
        else:
            clauses.append(("tail r=%.1f" % r["r"],
                            r["empirical_freq"] <= r["theorem_bound"],
                            "freq %.4g <= bound %.4g"
                            % (r["empirical_freq"], r["theorem_bound"])))
    rng = np.random.default_rng(2026081)
    worst = 0.0
    for _ in range(50):
        na, nb = rng.integers(1, 9, 2)
        pa, pb = rng.uniform(0, 2 * np.pi, na), rng.uniform(0, 2 * np.pi, nb)
        wa, wb = rng.dirichlet(np.ones(na)), rng.dirichlet(np.ones(nb))
        d_cdf = w1_circle((pa, wa), (pb, wb), method="cdf").w1_arc
        d_lp = w1_circle((pa, wa), (pb, wb), method="lp_oracle").w1_arc
        worst = max(worst, abs(d_cdf - d_lp))
    clauses.append(("W1 formula vs LP oracle", worst <= 1e-9,
                    "worst |cdf - lp| = %.3e over 50 instances" % worst))
    verdict(8, clauses)


def test_09_pair_term_moment_growth(eq0):
    ratios = []
    sizes = (50, 100, 200, 400, 800)
    for N in sizes:
        sp = ChainSpec(N=N, beta=1.0, potential=V0, algorithm="MH",
                       n_steps=1200, burn_in=40, thinning=6, seed=2026090 + N)
        z2 = float(np.mean([zeta_N(c, COS, eq0) ** 2
                            for c in sample(sp).configs]))
        ratios.append(z2 / np.log(N) ** 2)
    slope = np.polyfit(np.log(sizes), np.log(ratios), 1)[0]
    verdict(9, [("second moment growth", slope <= 0.15,
                 "log-log slope %.3f of E|zeta|^2/(log N)^2" % slope)])


def test_10_growth_exponent_stability():
    clauses = []
    for label, V in (("V=0", V0), ("V=cos", VCOS)):
        eq = solve_equilibrium(V, 1.0, K=512, M=2048)
        alphas = [weyl_fit(eigensystem(assemble(eq, K_op)), 32, 64).alpha_hat
                  for K_op in (64, 128)]
        rel = abs(alphas[1] - alphas[0]) / alphas[0]
        clauses.append(("doubling, %s" % label, rel <= 0.02,
                        "alpha %.9g -> %.9g, rel change %.2e"
                        % (alphas[0], alphas[1], rel)))
    verdict(10, clauses)
