"""Free energy on densities and its minimizer by a damped fixed point.

The functional, in the rho convention (rho = 2pi * density, uniform = 1), is

    F_beta^V(rho) = beta * E(rho) + int (V rho + rho log rho) dx/(2pi),
    E(rho) = log 2 + sum_{k>=1} |rho_hat(k)|^2 / k,

with V renormalized so that e^{-V} is a probability density. The minimizer
solves the Euler-Lagrange equation

    2 beta U(x) + V(x) + log rho(x) = C'   for all x,

where U is the logarithmic potential of rho. The solver iterates the damped
geometric fixed point rho ~ rho^(1-theta) * exp(-V - 2 beta U)^theta,
renormalized each step; theta halves whenever the free energy would increase,
and betas above 50 are reached by continuation from beta/2.
"""

from __future__ import annotations

import numpy as np

from .torus import GridFn, TrigSeries

__all__ = [
    "PotentialSpec",
    "Density",
    "EquilibriumResult",
    "ConvergenceError",
    "free_energy",
    "energy_gap",
    "solve_equilibrium",
    "limit_diagnostics",
]

CONTINUATION_BETA = 50.0


class ConvergenceError(RuntimeError):
    """Fixed point failed to reach tolerance; carries the last residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class PotentialSpec:
    """External potential V as a finite trigonometric series.

    The additive constant of V is free: `normalized` shifts it so that
    e^{-V} integrates to 1 against dx/(2pi), i.e. e^{-V} is the reference
    probability density in the rho convention.

    Args:
        series: TrigSeries of V.
        smoothness_tag: declared regularity class, purely informational
            ("analytic" for the presets; CLT use needs at least C^{3,1}).
    """

    __slots__ = ("series", "smoothness_tag")

    def __init__(self, series, smoothness_tag="analytic"):
        self.series = series
        self.smoothness_tag = smoothness_tag

    @classmethod
    def zero(cls):
        return cls(TrigSeries.zero(1))

    @classmethod
    def cosine(cls, a=1.0, b=0.0):
        """Preset a*cos(x) + b*cos(2x)."""
        return cls(TrigSeries.from_cos_sin(0.0, [a, b]))

    @property
    def is_zero(self):
        return bool(np.max(np.abs(self.series.coeffs)) == 0.0)

    def normalization_shift(self, M=4096):
        """log of int e^{-V} dx/(2pi) (quadrature on an M-point grid)."""
        v = self.series.grid(max(M, 4 * self.series.K + 8))
        m = v.min()
        return float(np.log(np.mean(np.exp(-(v - m)))) - m)

    def normalized(self, M=4096):
        """Same potential shifted so int e^{-V} dx/(2pi) = 1."""
        return PotentialSpec(self.series + self.normalization_shift(M),
                             self.smoothness_tag)


class Density:
    """Probability density in the rho convention with a positivity witness.

    Invariants checked at construction: rho > 0 on the grid and
    (1/M) sum rho = 1 (to quadrature roundoff). delta_est is a recorded
    lower-bound witness min_m rho(x_m).
    """

    __slots__ = ("rho_grid", "rho_series", "beta", "delta_est")

    def __init__(self, rho_grid, rho_series, beta, delta_est=None):
        if not isinstance(rho_grid, GridFn):
            rho_grid = GridFn(rho_grid)
        rmin = float(rho_grid.values.min())
        if rmin <= 0.0:
            raise ValueError("density must be strictly positive on the grid")
        mass = rho_grid.quad()
        if abs(mass - 1.0) > 1e-10:
            raise ValueError("density not normalized: int rho dx/2pi = %r" % mass)
        self.rho_grid = rho_grid
        self.rho_series = rho_series
        self.beta = float(beta)
        self.delta_est = rmin if delta_est is None else float(delta_est)

    @property
    def M(self):
        return self.rho_grid.M


class EquilibriumResult:
    """Converged minimizer: density, its log potential, and the EL constant.

    residual_sup = sup_m |2 beta U(x_m) + V(x_m) + log rho(x_m) - C_prime|.
    """

    __slots__ = ("density", "U", "C_prime", "residual_sup", "iterations",
                 "potential", "K")

    def __init__(self, density, U, C_prime, residual_sup, iterations,
                 potential, K):
        self.density = density
        self.U = U
        self.C_prime = C_prime
        self.residual_sup = residual_sup
        self.iterations = iterations
        self.potential = potential
        self.K = K

    @property
    def beta(self):
        return self.density.beta

    @property
    def M(self):
        return self.density.M

    @property
    def rho(self):
        return self.density.rho_grid.values

    @property
    def rho_series(self):
        return self.density.rho_series

    def to_json_dict(self):
        uc = self.U.coeffs[self.U.K:]
        return {
            "beta": self.beta,
            "K": self.K,
            "M": self.M,
            "C_prime": self.C_prime,
            "residual_sup": self.residual_sup,
            "rho": [float(v) for v in self.rho],
            "U_coeffs": [[float(c.real), float(c.imag)] for c in uc],
        }

    def write_csv(self, path):
        x = self.density.rho_grid.x
        with open(path, "w") as fh:
            fh.write("x,rho\n")
            for xi, ri in zip(x, self.rho):
                fh.write("%.17g,%.17g\n" % (xi, ri))


def _rho_series_from_grid(rho, K):
    return TrigSeries.from_grid(rho, K)


def _interaction_energy(rho_values):
    """E(rho) = log 2 + sum_{k>=1} |rho_hat(k)|^2 / k over the full grid band."""
    M = rho_values.size
    c = np.fft.rfft(rho_values) / M
    k = np.arange(1, c.size)
    return float(np.log(2.0) + np.sum(np.abs(c[1:]) ** 2 / k))


def _coerce_rho_values(rho, M=None):
    if isinstance(rho, Density):
        v = rho.rho_grid.values
    elif isinstance(rho, GridFn):
        v = rho.values
    elif isinstance(rho, TrigSeries):
        v = rho.grid(M if M is not None else max(4 * rho.K + 8, 1024))
    else:
        v = np.asarray(rho, dtype=float)
    return v


def free_energy(rho, V, beta, M=None):
    """F_beta^V(rho) = beta E(rho) + int (V rho + rho log rho) dx/(2pi).

    V is renormalized internally so that e^{-V} is a probability density.
    Raises ValueError if rho is nonpositive anywhere (entropy undefined).
    """
    rv = _coerce_rho_values(rho, M)
    if rv.min() <= 0.0:
        raise ValueError("free energy undefined: rho <= 0 somewhere")
    Vn = V.series + V.normalization_shift()
    v = Vn.grid(rv.size)
    entropy_term = float(np.mean(v * rv + rv * np.log(rv)))
    return float(beta) * _interaction_energy(rv) + entropy_term


def energy_gap(rho, eq, V, beta):
    """beta * E(rho - rho_eq) + KL(rho | rho_eq).

    E of a signed difference is sum_{k>=1} |rho_hat - tau_hat|^2 / k; equals
    free_energy(rho) - free_energy(rho_eq) within quadrature tolerance.
    """
    rv = _coerce_rho_values(rho, eq.M)
    if rv.size != eq.M:
        raise ValueError("rho grid must match the equilibrium grid")
    if rv.min() <= 0.0:
        raise ValueError("energy gap undefined: rho <= 0 somewhere")
    tv = eq.rho
    M = rv.size
    dc = np.fft.rfft(rv - tv) / M
    k = np.arange(1, dc.size)
    e_diff = float(np.sum(np.abs(dc[1:]) ** 2 / k))
    kl = float(np.mean(rv * np.log(rv / tv)))
    return float(beta) * e_diff + kl


def _log_potential_grid(rho_values):
    """U on the grid from the full FFT band (k=0 times log 2, else 1/(2|k|))."""
    M = rho_values.size
    c = np.fft.rfft(rho_values)
    mult = np.empty(c.size)
    mult[0] = np.log(2.0)
    mult[1:] = 1.0 / (2.0 * np.arange(1, c.size))
    return np.fft.irfft(c * mult, n=M)


def solve_equilibrium(V, beta, tol=1e-10, K=256, M=1024, theta=0.5,
                      max_iter=100000):
    """Minimize F_beta^V by the damped geometric fixed point.

    Iterates log rho <- (1-theta) log rho + theta (-V - 2 beta U^rho), with
    renormalization each step; a step is rejected and theta halved whenever
    the free energy increases, so accepted free energies are monotone. For
    beta > 50 the solve is warm-started by continuation from beta/2.

    Args:
        V: PotentialSpec (renormalized internally).
        beta: inverse-temperature-like parameter, >= 0.
        tol: sup-norm tolerance on the centered Euler-Lagrange residual.
        K: stored series band; M: grid size (power of two, M >= 4K).
        theta: initial damping in (0, 1].
        max_iter: iteration budget before ConvergenceError.

    Returns:
        EquilibriumResult with residual_sup <= tol.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if M < 4 * K:
        raise ValueError("grid must oversample the band: M >= 4K")
    Vn = V.normalized(M)
    v = Vn.series.grid(M)

    lr = np.zeros(M)
    if beta > CONTINUATION_BETA:
        prev = solve_equilibrium(V, beta / 2.0, tol=max(tol, 1e-10), K=K, M=M,
                                 theta=theta, max_iter=max_iter)
        lr = np.log(prev.rho)

    def normalize(logr):
        m = logr.max()
        z = np.log(np.mean(np.exp(logr - m))) + m
        return logr - z

    lr = normalize(lr)
    rho = np.exp(lr)
    F = beta * _interaction_energy(rho) + float(np.mean(v * rho + rho * lr))
    U = _log_potential_grid(rho)

    it = 0
    residual = np.inf
    while it < max_iter:
        it += 1
        el = 2.0 * beta * U + v + lr
        C = float(el.mean())
        residual = float(np.max(np.abs(el - C)))
        if residual <= tol:
            break
        accepted = False
        while not accepted and theta > 1e-8:
            lr_new = normalize((1.0 - theta) * lr + theta * (-v - 2.0 * beta * U))
            rho_new = np.exp(lr_new)
            F_new = (beta * _interaction_energy(rho_new)
                     + float(np.mean(v * rho_new + rho_new * lr_new)))
            if F_new <= F + 1e-14 * (1.0 + abs(F)):
                accepted = True
                lr, rho, F = lr_new, rho_new, F_new
                U = _log_potential_grid(rho)
            else:
                theta *= 0.5
        if not accepted:
            break

    if residual > tol:
        raise ConvergenceError(
            "equilibrium solve stalled at residual %.3e after %d iterations"
            % (residual, it), residual)

    el = 2.0 * beta * U + v + lr
    C_prime = float(el.mean())
    residual_sup = float(np.max(np.abs(el - C_prime)))
    density = Density(GridFn(rho), _rho_series_from_grid(rho, K), beta)
    U_series = TrigSeries.from_grid(U, K)
    return EquilibriumResult(density, U_series, C_prime, residual_sup, it,
                             Vn, K)


def limit_diagnostics(V, beta_grid, tol=1e-10, K=256, M=1024):
    """W1 distances of mu_beta^V to mu_0^V and to uniform along a beta grid.

    Returns a list of dict rows (beta, w1_to_mu0, w1_to_uniform). The first
    column tends to 0 as beta -> 0, the second as beta -> infinity.
    """
    from .transport import w1_circle

    beta_grid = np.asarray(beta_grid, dtype=float)
    if beta_grid.ndim != 1 or np.any(np.diff(beta_grid) <= 0):
        raise ValueError("beta_grid must be strictly ascending")
    Vn = V.normalized(M)
    rho0 = np.exp(-Vn.series.grid(M))
    rho0 /= rho0.mean()
    uniform = np.ones(M)
    rows = []
    for b in beta_grid:
        eq = solve_equilibrium(V, float(b), tol=tol, K=K, M=M)
        rho = GridFn(eq.rho)
        rows.append({
            "beta": float(b),
            "w1_to_mu0": w1_circle(rho, GridFn(rho0)).w1_arc,
            "w1_to_uniform": w1_circle(rho, GridFn(uniform)).w1_arc,
        })
    return rows
