"""Fluctuation operator: grid applications, Galerkin spectra, oracles."""

import numpy as np
import pytest
from scipy.special import i0

from htcg.equilibrium import PotentialSpec, solve_equilibrium
from htcg.spectral import (
    apply_A,
    apply_L,
    apply_W,
    apply_Xi,
    assemble,
    eigensystem,
    h_inner,
    weyl_fit,
)
from htcg.torus import TrigSeries, hilbert_grid

from oracles import fd_sturm_liouville, pv_hilbert, xi_kernel_quadrature

RNG = np.random.default_rng(90910223)


@pytest.fixture(scope="module")
def eq_v0():
    return solve_equilibrium(PotentialSpec.zero(), beta=2.0, tol=1e-12)


@pytest.fixture(scope="module")
def eq_cos_b1():
    return solve_equilibrium(PotentialSpec.cosine(), beta=1.0, tol=1e-12)


@pytest.fixture(scope="module")
def eq_cos_b0():
    return solve_equilibrium(PotentialSpec.cosine(), beta=0.0, tol=1e-12)


def cos_series(j, K=8):
    a = np.zeros(max(j, 1))
    a[j - 1] = 1.0
    return TrigSeries.from_cos_sin(0.0, a)


def random_series(K=6):
    a = RNG.normal(size=K) / (1.0 + np.arange(K)) ** 2
    b = RNG.normal(size=K) / (1.0 + np.arange(K)) ** 2
    return TrigSeries.from_cos_sin(0.0, a, b)


class TestApplyOnFlatDensity:
    # V = 0: rho = 1 and L e^{ijx} = (j^2 + beta |j|) e^{ijx}.
    def test_eigenfunctions(self, eq_v0):
        for j in (1, 2, 5):
            out = apply_L(cos_series(j), eq_v0)
            want = (j * j + 2.0 * j) * np.cos(j * eq_v0.density.rho_grid.x)
            assert np.max(np.abs(out.grid(eq_v0.M) - want)) < 1e-11

    def test_split_parts(self, eq_v0):
        x = eq_v0.density.rho_grid.x
        for j in (1, 3):
            a = apply_A(cos_series(j), eq_v0).grid(eq_v0.M)
            w = apply_W(cos_series(j), eq_v0).grid(eq_v0.M)
            assert np.max(np.abs(a - j * j * np.cos(j * x))) < 1e-11
            assert np.max(np.abs(w - (j / (2 * np.pi)) * np.cos(j * x))) < 1e-12

    def test_decomposition_random(self, eq_cos_b1):
        # L = A + 2 pi beta W pointwise on a generic observable
        for _ in range(5):
            phi = random_series()
            lhs = apply_L(phi, eq_cos_b1).coeffs
            a = apply_A(phi, eq_cos_b1).coeffs
            w = apply_W(phi, eq_cos_b1).coeffs
            rhs = a + 2 * np.pi * eq_cos_b1.beta * w
            assert np.max(np.abs(lhs - rhs)) < 1e-11


class TestApplyAgainstQuadrature:
    def test_full_operator_at_sample_points(self, eq_cos_b1):
        # independent route: L phi = -(phi'' + beta H(rho phi') + dlr phi')
        # with dlr = -V' - beta H(rho) from the stationarity equation, both
        # Hilbert transforms by principal-value quadrature.
        eq = eq_cos_b1
        rho_fn = eq.rho_series.eval
        phi = TrigSeries.from_cos_sin(0.0, [1.0], [0.0, 0.3])
        dphi = phi.derivative()
        got = apply_L(phi, eq)
        xs = np.linspace(0.1, 2 * np.pi, 16, endpoint=False)
        h_rho_dphi = pv_hilbert(lambda t: rho_fn(t) * dphi.eval(t), xs)
        h_rho = pv_hilbert(rho_fn, xs)
        dlr = np.sin(xs) - eq.beta * h_rho
        want = -(phi.derivative(2).eval(xs) + eq.beta * h_rho_dphi
                 + dlr * dphi.eval(xs))
        assert np.max(np.abs(got.eval(xs) - want)) < 1e-8

    def test_beta_zero_reduces_to_drift_form(self, eq_cos_b0):
        # at beta = 0 the density is e^{-V}/I0 so L phi = -phi'' + V' phi'
        eq = eq_cos_b0
        x = eq.density.rho_grid.x
        phi = random_series()
        got = apply_L(phi, eq).grid(eq.M)
        want = -phi.derivative(2).grid(eq.M) - np.sin(x) * phi.derivative().grid(eq.M)
        assert np.max(np.abs(got - want)) < 1e-9

    def test_density_matches_explicit_gibbs_factor(self, eq_cos_b0):
        x = eq_cos_b0.density.rho_grid.x
        want = np.exp(-np.cos(x)) / i0(1.0)
        assert np.max(np.abs(eq_cos_b0.rho - want)) < 1e-11


class TestXi:
    def test_flat_density_halved_hilbert(self, eq_v0):
        # rho = 1: Xi(psi) = H(psi)/2, so Xi(cos) = -sin/2
        out = apply_Xi(cos_series(1), eq_v0)
        x = eq_v0.density.rho_grid.x
        assert np.max(np.abs(out.grid(eq_v0.M) + 0.5 * np.sin(x))) < 1e-12

    def test_kernel_quadrature_oracle(self, eq_cos_b1):
        eq = eq_cos_b1
        rho_fn = eq.rho_series.eval
        xs = np.linspace(0.0, 2 * np.pi, 8, endpoint=False) + 0.173
        cases = [
            (lambda t: np.cos(t), lambda t: -np.sin(t), cos_series(1)),
            (lambda t: np.sin(2 * t), lambda t: 2 * np.cos(2 * t),
             TrigSeries.from_cos_sin(0.0, [0.0], [0.0, 1.0])),
        ]
        for psi_fn, dpsi_fn, psi in cases:
            want = xi_kernel_quadrature(psi_fn, dpsi_fn, rho_fn, xs)
            got = apply_Xi(psi, eq).eval(xs)
            assert np.max(np.abs(got - want)) < 1e-9

    def test_mean_identity(self, eq_cos_b1):
        # int Xi(psi) dmu = -int H(rho) psi dmu for any smooth psi
        eq = eq_cos_b1
        for _ in range(4):
            psi = random_series()
            lhs = np.mean(apply_Xi(psi, eq).grid(eq.M) * eq.rho)
            rhs = -np.mean(hilbert_grid(eq.rho) * psi.grid(eq.M) * eq.rho)
            assert abs(lhs - rhs) < 1e-12

    def test_commutator_recovers_operator(self, eq_cos_b1):
        # phi'' + 2 beta Xi(phi') - V' phi' = -L(phi) on the minimizer
        eq = eq_cos_b1
        x = eq.density.rho_grid.x
        phi = TrigSeries.from_cos_sin(0.0, [0.4, 0.0, 0.0], [0.0, 0.0, -0.25])
        dphi = phi.derivative()
        lhs = (phi.derivative(2).grid(eq.M)
               + 2 * eq.beta * apply_Xi(dphi, eq).grid(eq.M)
               + np.sin(x) * dphi.grid(eq.M))
        rhs = -apply_L(phi, eq).grid(eq.M)
        assert np.max(np.abs(lhs - rhs)) < 1e-8

    def test_band_guard(self, eq_v0):
        too_wide = TrigSeries.from_cos_sin(0.0, np.zeros(eq_v0.K + 1))
        with pytest.raises(ValueError):
            apply_Xi(too_wide, eq_v0)


class TestAssemble:
    def test_flat_density_exact_spectrum(self, eq_v0):
        model = assemble(eq_v0, K_op=16)
        es = eigensystem(model)
        k = np.arange(1, 17, dtype=float)
        want = np.sort(np.concatenate([k * k + 2.0 * k] * 2))
        assert np.max(np.abs(es.kappas - want) / want) < 1e-9
        assert es.ortho_residual < 1e-9
        assert model.asym_defect < 1e-12

    def test_flat_density_gram_diagonal(self, eq_v0):
        model = assemble(eq_v0, K_op=8)
        want = np.repeat(np.arange(1, 9, dtype=float) ** 2 / 2.0, 2)
        assert np.max(np.abs(model.G - np.diag(want))) < 1e-12

    def test_h_inner_matches_gram(self, eq_cos_b1):
        f = random_series(4)
        g = random_series(4)
        # expand in the basis and contract with G
        model = assemble(eq_cos_b1, K_op=4)
        fa = np.empty(8)
        ga = np.empty(8)
        for k in range(1, 5):
            fc = f.coeffs[f.K + k]
            gc = g.coeffs[g.K + k]
            fa[2 * k - 2], fa[2 * k - 1] = 2 * fc.real, -2 * fc.imag
            ga[2 * k - 2], ga[2 * k - 1] = 2 * gc.real, -2 * gc.imag
        assert abs(h_inner(f, g, eq_cos_b1) - fa @ model.G @ ga) < 1e-12

    def test_sturm_liouville_against_finite_differences(self, eq_cos_b0):
        # beta = 0 kills the nonlocal term; the remaining weighted Laplacian
        # has an independent finite-difference discretization.
        model = assemble(eq_cos_b0, K_op=24, operator="A")
        es = eigensystem(model)
        fd = fd_sturm_liouville(lambda t: np.exp(-np.cos(t)) / i0(1.0),
                                n_eigs=12, M=8192)
        # fd includes the trivial zero mode; the Galerkin basis excludes it
        assert fd[0] < 1e-8
        rel = np.abs(es.kappas[:10] - fd[1:11]) / fd[1:11]
        assert np.max(rel) < 1e-6

    def test_interlacing_with_local_part(self, eq_cos_b1):
        # the nonlocal part is nonnegative, so kappa_j >= lambda_j; the
        # reverse defect is bounded by 16 pi^4 (beta/min rho) sqrt(lambda_j)
        K_op = 24
        kap = eigensystem(assemble(eq_cos_b1, K_op)).kappas
        lam = eigensystem(assemble(eq_cos_b1, K_op, operator="A")).kappas
        assert np.all(kap >= lam - 1e-10)
        slack = 16 * np.pi ** 4 * eq_cos_b1.beta / eq_cos_b1.density.delta_est
        assert np.all(kap <= lam + slack * np.sqrt(lam) + 1e-10)

    def test_positivity_and_symmetry(self, eq_cos_b1):
        model = assemble(eq_cos_b1, K_op=20)
        assert model.asym_defect < 1e-8
        es = eigensystem(model)
        assert es.kappas[0] > 0.0
        assert np.all(np.diff(es.kappas) > -1e-12)

    def test_cutoff_doubling_stability(self, eq_cos_b1):
        small = eigensystem(assemble(eq_cos_b1, K_op=12)).kappas
        big = eigensystem(assemble(eq_cos_b1, K_op=24)).kappas
        rel = np.abs(small[:12] - big[:12]) / big[:12]
        assert np.max(rel) < 1e-9

    def test_guards(self, eq_cos_b1):
        with pytest.raises(ValueError):
            assemble(eq_cos_b1, K_op=eq_cos_b1.K)
        with pytest.raises(ValueError):
            assemble(eq_cos_b1, K_op=0)
        with pytest.raises(ValueError):
            assemble(eq_cos_b1, K_op=4, operator="B")

    def test_json_and_csv(self, eq_v0, tmp_path):
        es = eigensystem(assemble(eq_v0, K_op=4))
        d = es.to_json_dict()
        assert len(d["kappas"]) == 8 and d["K_op"] == 4
        p = tmp_path / "spec.csv"
        es.write_csv(p)
        rows = p.read_text().strip().split("\n")
        assert rows[0] == "j,kappa"
        assert len(rows) == 9
        assert abs(float(rows[1].split(",")[1]) - es.kappas[0]) < 1e-15


class TestWeylFit:
    def test_flat_density_quarter_coefficient(self):
        eq = solve_equilibrium(PotentialSpec.zero(), beta=0.5, tol=1e-12)
        es = eigensystem(assemble(eq, K_op=64))
        fit = weyl_fit(es, 32, 64)
        # paired eigenvalues k^2 + beta k sit near (j/2)^2 in doubled rank
        assert abs(fit.alpha_hat - 0.25) < 0.04
        assert fit.spread < 0.3

    def test_window_guards(self, eq_v0):
        es = eigensystem(assemble(eq_v0, K_op=8))
        with pytest.raises(ValueError):
            weyl_fit(es, 5, 5)
        with pytest.raises(ValueError):
            weyl_fit(es, 2, 12)
