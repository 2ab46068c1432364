"""The fluctuation operator and its spectrum in a trigonometric Galerkin basis.

In the rho convention the operator acts on smooth mean-zero observables as

    -L(phi) = phi'' + beta H(rho phi') + (log rho)' phi',

and decomposes as L = A + 2 pi beta W with

    A(phi) = -phi'' - (log rho)' phi',      W(phi) = -H(phi' rho) / (2 pi).

L is symmetric and positive for the weighted Sobolev inner product

    <f, g>_H = int f' g' rho dx/(2pi),

so its Galerkin matrix in the basis {cos kx, sin kx : 1 <= k <= K_op} gives a
symmetric generalized eigenvalue problem Lmat v = kappa G v with G the Gram
matrix of the H inner product. At V = 0 everything is diagonal with
L(e^{ijx}) = (j^2 + beta |j|) e^{ijx}.

The weighted Hilbert-transform commutator

    Xi(psi) = (1/2) (H(psi rho) - psi H(rho))

enters the particle-system generator identity; it satisfies
phi'' + 2 beta Xi(phi') - V' phi' = -L(phi) on the equilibrium density.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh, norm

from .torus import TrigSeries, hilbert_grid

__all__ = [
    "OperatorModel",
    "EigenSystem",
    "WeylFit",
    "h_inner",
    "apply_L",
    "apply_A",
    "apply_W",
    "apply_Xi",
    "assemble",
    "eigensystem",
    "weyl_fit",
]


def _grid_derivative(values):
    """Spectral derivative of grid samples."""
    M = values.size
    c = np.fft.rfft(values)
    k = np.arange(c.size)
    c *= 1j * k
    if M % 2 == 0:
        c[-1] = 0.0
    return np.fft.irfft(c, n=M)


def _eq_arrays(eq):
    """Grid arrays (rho, (log rho)') shared by the operator applications."""
    rho = eq.rho
    dlr = _grid_derivative(np.log(rho))
    return rho, dlr


def _check_band(phi, eq):
    if phi.K > eq.K:
        raise ValueError("observable band %d exceeds equilibrium band %d"
                         % (phi.K, eq.K))


def h_inner(f, g, eq):
    """Weighted Sobolev inner product <f, g>_H = int f' g' rho dx/(2pi)."""
    M = eq.M
    df = f.derivative().grid(M)
    dg = g.derivative().grid(M)
    return float(np.mean(df * dg * eq.rho))


def apply_L(phi, eq):
    """L(phi) = -(phi'' + beta H(rho phi') + (log rho)' phi'), truncated to K."""
    _check_band(phi, eq)
    rho, dlr = _eq_arrays(eq)
    M = eq.M
    dphi = phi.derivative().grid(M)
    ddphi = phi.derivative(2).grid(M)
    out = -(ddphi + eq.beta * hilbert_grid(rho * dphi) + dlr * dphi)
    return TrigSeries.from_grid(out, eq.K)


def apply_A(phi, eq):
    """Sturm-Liouville part A(phi) = -phi'' - (log rho)' phi'."""
    _check_band(phi, eq)
    _, dlr = _eq_arrays(eq)
    M = eq.M
    dphi = phi.derivative().grid(M)
    ddphi = phi.derivative(2).grid(M)
    return TrigSeries.from_grid(-(ddphi + dlr * dphi), eq.K)


def apply_W(phi, eq):
    """Nonlocal part W(phi) = -H(phi' rho) / (2 pi); L = A + 2 pi beta W."""
    _check_band(phi, eq)
    M = eq.M
    dphi = phi.derivative().grid(M)
    return TrigSeries.from_grid(-hilbert_grid(dphi * eq.rho) / (2.0 * np.pi),
                                eq.K)


def apply_Xi(psi, eq):
    """Weighted Hilbert commutator Xi(psi) = (H(psi rho) - psi H(rho)) / 2."""
    _check_band(psi, eq)
    M = eq.M
    psi_g = psi.grid(M)
    rho = eq.rho
    out = 0.5 * (hilbert_grid(psi_g * rho) - psi_g * hilbert_grid(rho))
    return TrigSeries.from_grid(out, eq.K)


class OperatorModel:
    """Galerkin matrices of the operator in the H inner product.

    Basis ordering: e_{2k-1} = cos(kx), e_{2k} = sin(kx) for 1 <= k <= K_op
    (dimension d = 2 K_op; constants are excluded, which quotients out the
    mean-zero constraint since the H product only sees derivatives).
    G_ab = <e_a, e_b>_H and Lmat_ab = <L e_a, e_b>_H, with Lmat symmetrized
    as (L + L^T)/2 and the relative asymmetry defect recorded.
    """

    __slots__ = ("eq", "K_op", "G", "Lmat", "asym_defect", "operator")

    def __init__(self, eq, K_op, G, Lmat, asym_defect, operator):
        self.eq = eq
        self.K_op = K_op
        self.G = G
        self.Lmat = Lmat
        self.asym_defect = asym_defect
        self.operator = operator

    @property
    def dim(self):
        return 2 * self.K_op


class EigenSystem:
    """Ascending eigenvalues kappa_j with G-orthonormal coefficient columns."""

    __slots__ = ("kappas", "vectors", "ortho_residual", "K_op")

    def __init__(self, kappas, vectors, ortho_residual, K_op):
        if kappas[0] <= 0.0:
            raise ValueError("operator lost positivity: kappa_1 = %r"
                             % kappas[0])
        self.kappas = kappas
        self.vectors = vectors
        self.ortho_residual = ortho_residual
        self.K_op = K_op

    def to_json_dict(self):
        return {
            "kappas": [float(v) for v in self.kappas],
            "ortho_residual": float(self.ortho_residual),
            "K_op": self.K_op,
        }

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("j,kappa\n")
            for j, k in enumerate(self.kappas, start=1):
                fh.write("%d,%.17g\n" % (j, k))


def basis_derivative_rows(K_op, M):
    """d x M array of basis derivatives e_a'(x_m) in the interleaved order."""
    x = 2.0 * np.pi * np.arange(M) / M
    rows = np.empty((2 * K_op, M))
    for k in range(1, K_op + 1):
        rows[2 * k - 2] = -k * np.sin(k * x)   # (cos kx)'
        rows[2 * k - 1] = k * np.cos(k * x)    # (sin kx)'
    return rows


def assemble(eq, K_op, operator="L"):
    """Galerkin matrices (G, Lmat) of L (or of A alone) at basis cutoff K_op.

    Requires K_op <= K/2 so products of basis functions with the density stay
    inside the alias-free band of the equilibrium grid.
    """
    if K_op < 1:
        raise ValueError("K_op must be positive")
    if K_op > eq.K // 2:
        raise ValueError("K_op must satisfy K_op <= K/2 (got %d > %d)"
                         % (K_op, eq.K // 2))
    if operator not in ("L", "A"):
        raise ValueError("operator must be 'L' or 'A'")
    rho, dlr = _eq_arrays(eq)
    M = eq.M
    d = 2 * K_op
    x = 2.0 * np.pi * np.arange(M) / M

    E1 = basis_derivative_rows(K_op, M)
    # second derivatives: (cos kx)'' = -k^2 cos kx, (sin kx)'' = -k^2 sin kx
    E2 = np.empty((d, M))
    for k in range(1, K_op + 1):
        E2[2 * k - 2] = -k * k * np.cos(k * x)
        E2[2 * k - 1] = -k * k * np.sin(k * x)

    Lrows = -(E2 + dlr[None, :] * E1)
    if operator == "L":
        prod = E1 * rho[None, :]
        spec = np.fft.rfft(prod, axis=1)
        mult = 1j * np.ones(spec.shape[1])
        mult[0] = 0.0
        if M % 2 == 0:
            mult[-1] = 0.0
        Lrows = Lrows - eq.beta * np.fft.irfft(spec * mult[None, :], n=M, axis=1)

    # derivative of each L e_a for the H pairing
    spec = np.fft.rfft(Lrows, axis=1)
    k = np.arange(spec.shape[1])
    spec *= 1j * k[None, :]
    if M % 2 == 0:
        spec[:, -1] = 0.0
    dLrows = np.fft.irfft(spec, n=M, axis=1)

    weight = rho / M
    G = (E1 * weight[None, :]) @ E1.T
    Lmat = (dLrows * weight[None, :]) @ E1.T
    defect = float(norm(Lmat - Lmat.T) / max(norm(Lmat), 1e-300))
    Lmat = 0.5 * (Lmat + Lmat.T)

    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise ValueError("Gram matrix not positive definite; increase "
                         "resolution") from None
    return OperatorModel(eq, K_op, G, Lmat, defect, operator)


def eigensystem(model):
    """Solve the symmetric generalized problem Lmat v = kappa G v.

    Columns are returned G-orthonormal (LAPACK convention) with the maximal
    deviation max|V^T G V - I| recorded as ortho_residual.
    """
    w, v = eigh(model.Lmat, model.G)
    gram = v.T @ model.G @ v
    ortho = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    return EigenSystem(w, v, ortho, model.K_op)


class WeylFit:
    """Least-squares coefficient of kappa_j ~ alpha j^2 over an index window.

    Index convention: j is the 1-based rank in the ascending eigenvalue list.
    Eigenvalues of L come in near-degenerate cos/sin pairs, so relative to
    this doubled index the V = 0 list {k^2 + beta k, twice each} fits
    alpha ~ 1/4 (kappa_{2k} = k^2 + beta k ~ (j/2)^2).
    """

    __slots__ = ("alpha_hat", "spread", "j_min", "j_max")

    def __init__(self, alpha_hat, spread, j_min, j_max):
        self.alpha_hat = alpha_hat
        self.spread = spread
        self.j_min = j_min
        self.j_max = j_max


def weyl_fit(es, j_min, j_max):
    """Fit kappa_j ~ alpha j^2 by least squares on j_min <= j <= j_max.

    The window must stay in the truncation-clean lower half of the computed
    spectrum; a degenerate window is an error.
    """
    n = es.kappas.size
    if not (1 <= j_min < j_max):
        raise ValueError("need 1 <= j_min < j_max")
    if j_max > n // 2:
        raise ValueError("window exceeds the trusted range: j_max <= %d"
                         % (n // 2))
    j = np.arange(j_min, j_max + 1, dtype=float)
    kap = es.kappas[j_min - 1 : j_max]
    alpha = float(np.sum(kap * j * j) / np.sum(j ** 4))
    ratio = kap / (j * j)
    spread = float((ratio.max() - ratio.min()) / np.median(ratio))
    return WeylFit(alpha, spread, j_min, j_max)
