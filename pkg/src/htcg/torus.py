"""Fourier-side primitives on the torus T = [0, 2pi).

Conventions used across the package:

  * A real function is represented by a trigonometric polynomial
        f(x) = sum_{|k| <= K} c_k e^{ikx},   c_{-k} = conj(c_k),
    so c_k is the usual Fourier coefficient f_hat(k) = int f(x) e^{-ikx} dx/(2pi).
  * Integrals are always taken against dx/(2pi); the M-point trapezoid rule
    (1/M) sum_m f(x_m) with x_m = 2pi m / M is exact for trig polynomials of
    degree < M.
  * Densities are stored in the "rho convention": rho := 2pi * (density w.r.t.
    dx), so the uniform probability measure is rho == 1 and normalization reads
    int rho dx/(2pi) = 1.

The Hilbert transform H is the Fourier multiplier i*sgn(k) (principal-value
convolution with -cot((x-t)/2)/(2pi)), and the logarithmic potential of a
density rho is the convolution with log|sin(x/2)|^{-1}, which is diagonal in
Fourier: U_hat(0) = log(2)*rho_hat(0), U_hat(k) = rho_hat(k)/(2|k|).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "TrigSeries",
    "GridFn",
    "hilbert_transform",
    "hilbert_grid",
    "log_potential",
    "h_half_norm_sq",
    "weighted_l2_norm_sq",
    "pairing",
]


def _next_pow2(n):
    m = 1
    while m < n:
        m *= 2
    return m


class TrigSeries:
    """Real trigonometric polynomial sum_{|k| <= K} c_k e^{ikx}.

    Coefficients are stored for k = -K..K in a complex array of length 2K+1
    (index k + K). Construction enforces Hermitian symmetry exactly, so
    evaluation is real to machine precision.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coeffs must be a 1-d array of odd length 2K+1")
        # exact Hermitian symmetrization: c_{-k} <- conj(c_k) average
        self.coeffs = 0.5 * (c + np.conj(c[::-1]))

    @property
    def K(self):
        return (self.coeffs.size - 1) // 2

    def coef(self, k):
        """Fourier coefficient c_k (zero outside the band)."""
        if abs(k) > self.K:
            return 0.0 + 0.0j
        return self.coeffs[k + self.K]

    @property
    def mean(self):
        """int f dx/(2pi) = c_0."""
        return float(self.coeffs[self.K].real)

    @classmethod
    def zero(cls, K=0):
        return cls(np.zeros(2 * K + 1, dtype=np.complex128))

    @classmethod
    def constant(cls, value, K=0):
        c = np.zeros(2 * K + 1, dtype=np.complex128)
        c[K] = value
        return cls(c)

    @classmethod
    def from_cos_sin(cls, a0=0.0, a=(), b=()):
        """Build a0 + sum_k a[k-1] cos(kx) + sum_k b[k-1] sin(kx)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        K = max(len(a), len(b), 1)
        c = np.zeros(2 * K + 1, dtype=np.complex128)
        c[K] = a0
        for k in range(1, K + 1):
            ak = a[k - 1] if k <= len(a) else 0.0
            bk = b[k - 1] if k <= len(b) else 0.0
            c[K + k] = 0.5 * (ak - 1j * bk)
            c[K - k] = 0.5 * (ak + 1j * bk)
        return cls(c)

    @classmethod
    def from_grid(cls, values, K):
        """Fourier coefficients of grid samples, truncated to band K.

        Exact when the sampled function is band-limited with degree
        <= len(values)/2 - 1; otherwise a spectral truncation.
        """
        values = np.asarray(values, dtype=float)
        M = values.size
        if K > M // 2 - 1:
            raise ValueError("need K <= M/2 - 1 for alias-free coefficients")
        A = np.fft.rfft(values)
        c = np.zeros(2 * K + 1, dtype=np.complex128)
        c[K:] = A[: K + 1] / M
        c[:K] = np.conj(c[K + 1 :][::-1])
        return cls(c)

    def grid(self, M):
        """Sample on the M-point grid x_m = 2pi m / M (M a power of two)."""
        K = self.K
        if M < 2 * K + 2:
            raise ValueError("need M >= 2K + 2 to sample without aliasing")
        half = np.zeros(M // 2 + 1, dtype=np.complex128)
        half[: K + 1] = self.coeffs[K:] * M
        return np.fft.irfft(half, n=M)

    def grid_fn(self, M):
        return GridFn(self.grid(M))

    def eval(self, x):
        """Evaluate at arbitrary angles (scalar or array)."""
        x = np.asarray(x, dtype=float)
        K = self.K
        z = np.exp(1j * x)
        acc = np.zeros_like(x, dtype=np.complex128)
        p = np.ones_like(z)
        for k in range(1, K + 1):
            p = p * z
            acc += self.coeffs[K + k] * p
        return self.coeffs[K].real + 2.0 * acc.real

    def derivative(self, order=1):
        K = self.K
        k = np.arange(-K, K + 1)
        return TrigSeries(self.coeffs * (1j * k) ** order)

    def truncate(self, K2):
        """Restrict (or zero-pad) the band to K2."""
        K = self.K
        if K2 >= K:
            c = np.zeros(2 * K2 + 1, dtype=np.complex128)
            c[K2 - K : K2 + K + 1] = self.coeffs
            return TrigSeries(c)
        return TrigSeries(self.coeffs[K - K2 : K + K2 + 1])

    def _binary(self, other, sign):
        K = max(self.K, other.K)
        a = self.truncate(K).coeffs
        b = other.truncate(K).coeffs
        return TrigSeries(a + sign * b)

    def __add__(self, other):
        if np.isscalar(other):
            c = self.coeffs.copy()
            c[self.K] += other
            return TrigSeries(c)
        return self._binary(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        if np.isscalar(other):
            return self + (-other)
        return self._binary(other, -1.0)

    def __mul__(self, scalar):
        return TrigSeries(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return TrigSeries(-self.coeffs)


class GridFn:
    """Real samples on the uniform grid x_m = 2pi m / M, M a power of two."""

    __slots__ = ("values",)

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        M = values.size
        if M < 2 or M & (M - 1):
            raise ValueError("grid size must be a power of two >= 2")
        self.values = values

    @property
    def M(self):
        return self.values.size

    @property
    def x(self):
        M = self.M
        return 2.0 * np.pi * np.arange(M) / M

    def quad(self):
        """int f dx/(2pi), exact for trig polynomials of degree < M."""
        return float(self.values.mean())

    def to_series(self, K):
        return TrigSeries.from_grid(self.values, K)


def hilbert_transform(f):
    """Hilbert transform on the torus: Fourier multiplier i*sgn(k).

    Sends cos(kx) -> -sin(kx) and sin(kx) -> cos(kx) for k >= 1 and kills
    the mean. Preserves the L2 norm on mean-zero input.
    """
    K = f.K
    k = np.arange(-K, K + 1)
    return TrigSeries(1j * np.sign(k) * f.coeffs)


def hilbert_grid(values):
    """Hilbert transform of grid samples via the FFT multiplier.

    Exact for trig polynomials of degree < len(values)/2.
    """
    values = np.asarray(values, dtype=float)
    M = values.size
    A = np.fft.rfft(values)
    A *= 1j
    A[0] = 0.0
    if M % 2 == 0:
        # the unpaired Nyquist mode has sgn ambiguity; band-limited data
        # never populates it
        A[-1] = 0.0
    return np.fft.irfft(A, n=M)


def log_potential(rho):
    """Logarithmic potential U of a density given in the rho convention.

    U(x) = int log|sin((x-y)/2)|^{-1} rho(y) dy/(2pi), diagonal in Fourier:
    U_hat(0) = log(2) rho_hat(0), U_hat(k) = rho_hat(k) / (2|k|). Its
    derivative satisfies U' = (1/2) H(rho).
    """
    K = rho.K
    k = np.arange(-K, K + 1, dtype=float)
    mult = np.empty(2 * K + 1)
    mult[K] = np.log(2.0)
    nz = k != 0
    mult[nz] = 1.0 / (2.0 * np.abs(k[nz]))
    return TrigSeries(rho.coeffs * mult)


def h_half_norm_sq(psi):
    """Sobolev H^{1/2} semi-norm squared: 2 sum_{k>=1} k |psi_hat(k)|^2."""
    K = psi.K
    if K == 0:
        return 0.0
    c_pos = psi.coeffs[K + 1 :]
    k = np.arange(1, K + 1, dtype=float)
    return float(2.0 * np.sum(k * np.abs(c_pos) ** 2))


def l2_norm_sq(psi):
    """L2(dx/2pi) norm squared: |psi_hat(0)|^2 + 2 sum_{k>=1} |psi_hat(k)|^2."""
    K = psi.K
    c = psi.coeffs
    return float(c[K].real ** 2 + 2.0 * np.sum(np.abs(c[K + 1 :]) ** 2))


def pairing(f, g):
    """L2 pairing int f g dx/(2pi) of two real series."""
    K = min(f.K, g.K)
    a = f.coeffs[f.K - K : f.K + K + 1]
    b = g.coeffs[g.K - K : g.K + K + 1]
    return float(np.real(np.sum(a * np.conj(b))))


def _density_series(rho):
    """Coerce Density / TrigSeries / GridFn / array to a TrigSeries."""
    if hasattr(rho, "rho_series"):
        return rho.rho_series
    if isinstance(rho, TrigSeries):
        return rho
    if isinstance(rho, GridFn):
        return rho.to_series(rho.M // 2 - 1)
    values = np.asarray(rho, dtype=float)
    return GridFn(values).to_series(values.size // 2 - 1)


def weighted_l2_norm_sq(psi, rho, M=None):
    """int psi^2 rho dx/(2pi) by exact trapezoid quadrature.

    The integrand psi^2 rho has degree 2*deg(psi) + deg(rho); the grid is
    upsampled to at least twice that, so the quadrature is alias-free. An
    explicitly requested smaller M raises (aliasing would silently corrupt
    the value).
    """
    rho_s = _density_series(rho)
    deg = 2 * psi.K + rho_s.K
    M_need = _next_pow2(max(2 * deg, 2 * psi.K + 2, 2 * rho_s.K + 2, 8))
    if M is None:
        M = M_need
    elif M < M_need:
        raise ValueError(
            "quadrature grid M=%d aliases: integrand degree %d needs M >= %d"
            % (M, deg, M_need)
        )
    psi_g = psi.grid(M)
    rho_g = rho_s.grid(M)
    return float(np.mean(psi_g * psi_g * rho_g))
