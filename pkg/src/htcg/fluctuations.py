"""Limiting variances of linear statistics and their small/large-beta limits.

The centered linear statistic of a smooth observable psi is asymptotically
Gaussian with variance

    sigma_beta^2(psi) = <psi, L^{-1} psi>_H = sum_j kappa_j^{-1} <psi, phi_j>_H^2,

computed here by two independent routes through the Galerkin model (an
eigen-expansion and a direct linear solve) plus the flat-density closed form

    sigma_beta^2(psi) = 2 sum_{k>=1} (1 + beta/k)^{-1} |psi_hat(k)|^2.

In beta the variance interpolates between the independent-sampling limit
Var_{mu_0^V}(psi) at beta -> 0 and the rigid regime where
beta sigma^2 -> ||psi||_{H^{1/2}}^2, the latter contingent on
beta min rho -> infinity.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import solve

from .spectral import assemble, basis_derivative_rows, eigensystem
from .torus import h_half_norm_sq

__all__ = [
    "VarianceReport",
    "InterpolationTable",
    "variance_eigen",
    "variance_solve",
    "closed_form_v0",
    "variance_report",
    "interpolation_check",
]


def _coeff_vector(psi, eq, K_op):
    """H-inner products of psi against the interleaved trigonometric basis."""
    if psi.K > eq.K:
        raise ValueError("observable band exceeds equilibrium band")
    M = eq.M
    dpsi = psi.derivative().grid(M)
    E1 = basis_derivative_rows(K_op, M)
    return E1 @ (dpsi * eq.rho) / M


def _is_constant(psi):
    c = psi.coeffs.copy()
    c[psi.K] = 0.0
    return bool(np.max(np.abs(c)) == 0.0)


def variance_eigen(psi, es, eq):
    """Truncated eigen-sum sum_j kappa_j^{-1} <psi, phi_j>_H^2.

    The observable is centered implicitly: the H pairing only sees psi', so
    the constant part never contributes. A constant observable is a
    degenerate statistic and returns 0 with a warning.
    """
    if _is_constant(psi):
        warnings.warn("constant observable has degenerate (zero) fluctuations")
        return 0.0
    b = _coeff_vector(psi, eq, es.K_op)
    proj = es.vectors.T @ b
    return float(np.sum(proj * proj / es.kappas))


def variance_solve(psi, model):
    """<psi, u>_H with u the Galerkin solution of L u = psi."""
    if _is_constant(psi):
        warnings.warn("constant observable has degenerate (zero) fluctuations")
        return 0.0
    b = _coeff_vector(psi, model.eq, model.K_op)
    u = solve(model.Lmat, b, assume_a="pos")
    return float(b @ u)


def closed_form_v0(psi, beta):
    """Flat-density variance 2 sum_{k>=1} (1 + beta/k)^{-1} |psi_hat(k)|^2."""
    K = psi.K
    k = np.arange(1, K + 1, dtype=float)
    ck = psi.coeffs[K + 1 :]
    return float(2.0 * np.sum(np.abs(ck) ** 2 / (1.0 + beta / k)))


class VarianceReport:
    """Both variance routes for one observable, with their relative gap."""

    __slots__ = ("psi", "beta", "sigma2_eigen", "sigma2_solve",
                 "n_modes_used", "route_gap", "tail_estimate")

    def __init__(self, psi, beta, sigma2_eigen, sigma2_solve, n_modes_used,
                 route_gap, tail_estimate):
        self.psi = psi
        self.beta = beta
        self.sigma2_eigen = sigma2_eigen
        self.sigma2_solve = sigma2_solve
        self.n_modes_used = n_modes_used
        self.route_gap = route_gap
        self.tail_estimate = tail_estimate

    def to_json_dict(self):
        return {
            "beta": float(self.beta),
            "sigma2_eigen": float(self.sigma2_eigen),
            "sigma2_solve": float(self.sigma2_solve),
            "n_modes_used": self.n_modes_used,
            "route_gap": float(self.route_gap),
            "tail_estimate": float(self.tail_estimate),
        }


def variance_report(psi, eq, K_op=None):
    """Run both routes on one Galerkin model and package the comparison.

    tail_estimate is the contribution of the top decile of computed modes;
    for band-limited psi it collapses to roundoff, confirming the truncated
    eigen-sum has converged.
    """
    if K_op is None:
        K_op = min(64, eq.K // 2)
    model = assemble(eq, K_op)
    es = eigensystem(model)
    s_solve = variance_solve(psi, model)
    if _is_constant(psi):
        return VarianceReport(psi, eq.beta, 0.0, 0.0, 2 * K_op, 0.0, 0.0)
    b = _coeff_vector(psi, eq, K_op)
    proj = es.vectors.T @ b
    contrib = proj * proj / es.kappas
    s_eigen = float(np.sum(contrib))
    top = max(1, contrib.size // 10)
    tail = float(np.sum(contrib[-top:]))
    gap = abs(s_eigen - s_solve) / abs(s_eigen)
    return VarianceReport(psi, eq.beta, s_eigen, s_solve, 2 * K_op, gap, tail)


class InterpolationTable:
    """Variance sweep over beta with both limit targets alongside.

    Columns: beta, sigma2, beta_sigma2, l2_target (the centered L^2(mu_beta)
    norm of psi), h_half_target (the H^{1/2} semi-norm squared), and the
    witness beta_min_rho for the large-beta hypothesis.
    """

    __slots__ = ("rows", "psi", "witness_floor")

    def __init__(self, rows, psi, witness_floor=100.0):
        self.rows = rows
        self.psi = psi
        self.witness_floor = witness_floor

    def write_csv(self, path):
        cols = ("beta", "sigma2", "beta_sigma2", "l2_target",
                "h_half_target", "beta_min_rho")
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in self.rows:
                fh.write(",".join("%.17g" % r[c] for c in cols) + "\n")

    def endpoint_report(self):
        """Relative gaps at both ends of the sweep.

        The large-beta comparison is only asserted when the recorded witness
        beta * min rho clears the floor; otherwise the report abstains (the
        limit theorem's hypothesis is not met at this beta).
        """
        lo, hi = self.rows[0], self.rows[-1]
        low_gap = abs(lo["sigma2"] - lo["l2_target"]) / lo["l2_target"]
        high_gap = (abs(hi["beta_sigma2"] - hi["h_half_target"])
                    / hi["h_half_target"])
        witness = hi["beta_min_rho"]
        return {
            "low_beta": lo["beta"],
            "low_gap_rel": low_gap,
            "high_beta": hi["beta"],
            "high_gap_rel": high_gap,
            "high_witness": witness,
            "high_abstained": bool(witness < self.witness_floor),
        }


def interpolation_check(psi, V, beta_grid=None, K=256, M=1024, tol=1e-10,
                        K_op=None, witness_floor=100.0):
    """sigma^2 along an ascending beta grid with both limit targets.

    Defaults to 25 logarithmic points over [1e-3, 1e3], wide enough to see
    the independent-sampling limit on the left and the rigid H^{1/2} regime
    on the right.
    """
    from .equilibrium import solve_equilibrium

    if beta_grid is None:
        beta_grid = np.logspace(-3.0, 3.0, 25)
    beta_grid = np.asarray(beta_grid, dtype=float)
    if beta_grid.size < 2 or np.any(np.diff(beta_grid) <= 0):
        raise ValueError("beta_grid must be ascending with >= 2 points")
    if K_op is None:
        K_op = min(64, K // 2)
    h_half = h_half_norm_sq(psi)
    rows = []
    for beta in beta_grid:
        eq = solve_equilibrium(V, float(beta), tol=tol, K=K, M=M)
        model = assemble(eq, K_op)
        s2 = variance_solve(psi, model)
        psi_g = psi.grid(eq.M)
        mean_psi = float(np.mean(psi_g * eq.rho))
        l2 = float(np.mean((psi_g - mean_psi) ** 2 * eq.rho))
        rows.append({
            "beta": float(beta),
            "sigma2": s2,
            "beta_sigma2": float(beta) * s2,
            "l2_target": l2,
            "h_half_target": h_half,
            "beta_min_rho": float(beta) * eq.density.delta_est,
        })
    return InterpolationTable(rows, psi, witness_floor)
