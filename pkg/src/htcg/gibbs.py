"""Gibbs samplers for the N-particle circle gas and its fluctuation statistics.

The target is the unnormalized density

    exp((2 beta/N) sum_{i<j} log|e^{ix_i} - e^{ix_j}| - sum_j V(x_j))

on the N-torus. Three sampling algorithms: single-site random-walk Metropolis
(MH), a Metropolis-corrected Langevin scheme (MALA), and exact independent
draws from the beta = 0 product measure (IID0, inverse-CDF). Chains are keyed
by a counter-based generator on (seed, chain_id), so a batch of chains is
reproducible bit-for-bit regardless of scheduling.

Fluctuation statistics: nu_N(psi) is the centered, sqrt(N)-scaled linear
statistic; zeta_N(phi) the quadratic kernel statistic entering the generator
identity

    G nu_N(phi) = -nu_N(L phi) + (beta/sqrt(N)) zeta_N(phi),

which generator_identity_gap evaluates per configuration.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.special import ndtri
from scipy.stats import anderson

from . import _kernels
from .spectral import apply_L, apply_Xi
from .torus import TrigSeries

__all__ = [
    "Configuration",
    "ChainSpec",
    "StatSeries",
    "SampleResult",
    "log_density_unnorm",
    "drift",
    "sample",
    "sample_batch",
    "nu_N",
    "zeta_N",
    "generator_identity_gap",
    "linear_statistics",
    "ad_normality_pvalue",
    "w2_to_gaussian",
]

_TWO_PI = 2.0 * np.pi
_ALGORITHMS = ("MH", "MALA", "IID0")
_PILOT_CHAIN = 2 ** 64 - 1
_MH_TARGET = 0.44
_MALA_TARGET = 0.574
_BLOCK = 256


def _angles(x):
    if isinstance(x, Configuration):
        return x.angles
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise ValueError("a configuration is a flat vector of angles")
    return np.mod(a, _TWO_PI)


class Configuration:
    """Positions of the N particles, wrapped to [0, 2 pi), pairwise distinct."""

    __slots__ = ("angles",)

    def __init__(self, angles):
        a = np.mod(np.asarray(angles, dtype=float), _TWO_PI)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("angles must be a nonempty flat vector")
        s = np.sort(a)
        if s.size > 1 and np.min(np.diff(s)) == 0.0:
            raise ValueError("coincident particles")
        self.angles = a

    @property
    def N(self):
        return self.angles.size


class ChainSpec:
    """Everything needed to reproduce one chain (or a keyed batch of them)."""

    __slots__ = ("N", "beta", "potential", "algorithm", "step_size",
                 "n_steps", "burn_in", "thinning", "seed")

    def __init__(self, N, beta, potential, algorithm="MH", step_size=None,
                 n_steps=100, burn_in=100, thinning=1, seed=0):
        if N < 1:
            raise ValueError("N must be >= 1")
        if beta < 0:
            raise ValueError("beta must be nonnegative")
        if algorithm not in _ALGORITHMS:
            raise ValueError("algorithm must be one of %s" % (_ALGORITHMS,))
        if algorithm == "IID0" and beta != 0.0:
            raise ValueError("IID0 is the exact beta = 0 sampler")
        if step_size is not None and step_size <= 0.0:
            raise ValueError("step_size must be positive")
        if n_steps < 1 or burn_in < 0 or thinning < 1:
            raise ValueError("need n_steps >= 1, burn_in >= 0, thinning >= 1")
        if not (0 <= int(seed) < 2 ** 64):
            raise ValueError("seed must fit in 64 bits")
        self.N = int(N)
        self.beta = float(beta)
        self.potential = potential
        self.algorithm = algorithm
        self.step_size = step_size
        self.n_steps = int(n_steps)
        self.burn_in = int(burn_in)
        self.thinning = int(thinning)
        self.seed = int(seed)


def ad_normality_pvalue(values):
    """Anderson-Darling composite normality p-value.

    Statistic from scipy; the p-value uses the case-4 (mean and variance
    estimated) correction A* = A(1 + 0.75/n + 2.25/n^2) and the standard
    piecewise exponential fit for its null distribution.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 8:
        return float("nan")
    a = anderson(values, dist="norm").statistic
    a_star = a * (1.0 + 0.75 / n + 2.25 / n ** 2)
    if a_star >= 0.6:
        p = np.exp(1.2937 - 5.709 * a_star + 0.0186 * a_star ** 2)
    elif a_star > 0.34:
        p = np.exp(0.9177 - 4.279 * a_star - 1.38 * a_star ** 2)
    elif a_star > 0.2:
        p = 1.0 - np.exp(-8.318 + 42.796 * a_star - 59.938 * a_star ** 2)
    else:
        p = 1.0 - np.exp(-13.436 + 101.14 * a_star - 223.73 * a_star ** 2)
    return float(min(max(p, 0.0), 1.0))


class StatSeries:
    """Realizations of one statistic across retained samples or chains."""

    __slots__ = ("values", "name", "N", "beta", "seed_base")

    def __init__(self, values, name, N, beta, seed_base=0):
        self.values = np.asarray(values, dtype=float)
        self.name = name
        self.N = int(N)
        self.beta = float(beta)
        self.seed_base = int(seed_base)

    @property
    def summary(self):
        v = self.values
        n = v.size
        var = float(np.var(v, ddof=1)) if n > 1 else 0.0
        return {
            "mean": float(np.mean(v)),
            "variance": var,
            "stderr": float(np.sqrt(var / n)) if n > 1 else float("nan"),
            "normality_p": ad_normality_pvalue(v),
        }

    def to_json_dict(self):
        return {
            "name": self.name,
            "N": self.N,
            "beta": self.beta,
            "seed_base": self.seed_base,
            "values": [float(v) for v in self.values],
            "summary": self.summary,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)


def _series_cos_sin(series):
    """(a0, cos coeffs, sin coeffs) arrays for the compiled evaluator."""
    K = series.K
    c = series.coeffs
    a0 = float(c[K].real)
    ac = np.ascontiguousarray(2.0 * c[K + 1 :].real)
    as_ = np.ascontiguousarray(-2.0 * c[K + 1 :].imag)
    return a0, ac, as_


def log_density_unnorm(x, beta, V):
    """(2 beta/N) sum_{i<j} log|e^{ix_i} - e^{ix_j}| - sum_j V(x_j).

    A pair closer than the resolution floor returns the -inf sentinel.
    """
    ang = _angles(x)
    N = ang.size
    v = float(np.sum(V.series.eval(ang))) if not V.is_zero else 0.0
    if N < 2:
        return -v
    d = ang[:, None] - ang[None, :]
    c = np.cos(d)
    iu = np.triu_indices(N, k=1)
    two_m2c = 2.0 - 2.0 * c[iu]           # |e^{ia} - e^{ib}|^2
    if np.min(two_m2c) < (2.0 * _kernels.PAIR_GAP_FLOOR) ** 2:
        return float("-inf")
    return float((2.0 * beta / N) * 0.5 * np.sum(np.log(two_m2c)) - v)


def drift(x, beta, V):
    """Gradient of log_density_unnorm, component j:

    (2 beta/N) sum_{i != j} cot((x_j - x_i)/2)/2 - V'(x_j).
    """
    ang = _angles(x)
    N = ang.size
    out = (-V.series.derivative().eval(ang) if not V.is_zero
           else np.zeros(N))
    if N < 2:
        return out
    d = ang[:, None] - ang[None, :]
    one_m_c = 1.0 - np.cos(d)             # 2 sin^2(d/2)
    np.fill_diagonal(one_m_c, 1.0)
    if np.min(one_m_c) < 2.0 * _kernels.PAIR_GAP_FLOOR ** 2:
        raise ValueError("near-coincident pair: drift is singular")
    cot_half = np.sin(d) / one_m_c        # cot(d/2), zero on the diagonal
    return out + (beta / N) * np.sum(cot_half, axis=1)


class _InverseCdf:
    """Exact sampler for the product measure with density e^{-V}.

    The CDF is evaluated from the antiderivative of the trigonometric
    expansion of the density and inverted by table lookup plus Newton.
    """

    __slots__ = ("flat", "rho", "_anti", "_xs", "_cdf")

    def __init__(self, potential, K=64, table=8192):
        self.flat = potential.is_zero
        if self.flat:
            return
        vn = potential.normalized()
        vg = vn.series.grid(2048)
        rho0 = np.exp(-vg)
        rho0 /= np.mean(rho0)
        self.rho = TrigSeries.from_grid(rho0, K)
        k = np.arange(1, K + 1)
        self._anti = self.rho.coeffs[K + 1 :] / (1j * k)
        self._xs = np.linspace(0.0, _TWO_PI, table + 1)
        self._cdf = self._G(self._xs)
        self._cdf[0] = 0.0
        self._cdf[-1] = 1.0

    def _G(self, x):
        z = np.exp(1j * x)
        zp = np.ones_like(z)
        acc = np.zeros_like(z)
        for ak in self._anti:
            zp = zp * z
            acc += ak * (zp - 1.0)
        return (x + 2.0 * acc.real) / _TWO_PI

    def draw(self, u):
        if self.flat:
            return _TWO_PI * u
        x = np.interp(u, self._cdf, self._xs)
        for _ in range(3):
            x = x - (self._G(x) - u) * _TWO_PI / self.rho.eval(x)
        return np.mod(x, _TWO_PI)


def _chain_rng(seed, chain_id):
    key = np.array([seed, chain_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _advance(x, spec, param, n, rng, coeffs):
    """Run n kernel steps in place; returns (accepted, proposals)."""
    a0, ac, as_, dc, ds = coeffs
    g = 2.0 * spec.beta / spec.N
    acc = 0
    prop = 0
    done = 0
    while done < n:
        b = min(_BLOCK, n - done)
        z = rng.standard_normal((b, spec.N))
        if spec.algorithm == "MH":
            u = rng.random((b, spec.N))
            acc += _kernels.mh_sweeps(x, param, g, a0, ac, as_, z, u)
            prop += b * spec.N
        else:
            u = rng.random(b)
            acc += _kernels.mala_steps(x, param, g, a0, ac, as_, dc, ds, z, u)
            prop += b
        done += b
    return acc, prop


def _potential_coeffs(potential):
    a0, ac, as_ = _series_cos_sin(potential.series)
    _, dc, ds = _series_cos_sin(potential.series.derivative())
    return a0, ac, as_, dc, ds


def _default_step(spec):
    return 1.0 if spec.algorithm == "MH" else 0.5 / spec.N


def _tune_and_burn(x, spec, rng, coeffs):
    """Adapt the step over the first half of burn-in, then freeze.

    Frozen kernels preserve detailed balance; the adaptive phase is part of
    burn-in and none of its states are retained. Returns (step, acceptance
    rate over the frozen half).
    """
    param = spec.step_size if spec.step_size is not None else _default_step(spec)
    target = _MH_TARGET if spec.algorithm == "MH" else _MALA_TARGET
    half = spec.burn_in // 2
    rest = spec.burn_in - half
    if spec.step_size is None and half >= 16:
        nb = 8
        per = half // nb
        for _ in range(nb):
            acc, prop = _advance(x, spec, param, per, rng, coeffs)
            rate = acc / prop
            param = float(np.clip(param * np.exp(1.2 * (rate - target)),
                                  1e-7, 20.0))
        leftover = half - nb * per
        if leftover:
            _advance(x, spec, param, leftover, rng, coeffs)
    elif half:
        _advance(x, spec, param, half, rng, coeffs)
    if rest:
        acc, prop = _advance(x, spec, param, rest, rng, coeffs)
        rate = acc / prop
    else:
        rate = float("nan")
    return param, rate


class SampleResult:
    """Retained configurations of one chain, with sampler metadata.

    Sequence of Configuration; the raw (n_kept, N) angle array is `configs`.
    """

    __slots__ = ("configs", "acceptance", "step_size", "spec", "warnings")

    def __init__(self, configs, acceptance, step_size, spec, warns):
        self.configs = configs
        self.acceptance = acceptance
        self.step_size = step_size
        self.spec = spec
        self.warnings = warns

    def __len__(self):
        return self.configs.shape[0]

    def __getitem__(self, i):
        return Configuration(self.configs[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def sample(spec):
    """Run one chain: burn_in steps (tuning in the first half when no step
    size is pinned), then n_steps more, retaining every thinning-th state.

    IID0 ignores burn-in and emits exact independent draws. The acceptance
    rate over the retained phase is reported; a rate outside [0.05, 0.95]
    is recorded as a warning in the result metadata.

    MH is the workhorse: its single-site moves are insensitive to the
    log-gas drift singularity. MALA is exact but stiff, since the drift
    grows like 1/gap near coincident pairs; expect tiny tuned steps at
    large N and slow relaxation of small-gap transients.
    """
    rng = _chain_rng(spec.seed, 0)
    inv = _InverseCdf(spec.potential)
    n_kept = spec.n_steps // spec.thinning
    warns = []
    if spec.algorithm == "IID0":
        configs = inv.draw(rng.random((n_kept, spec.N)))
        return SampleResult(configs, 1.0, None, spec, warns)
    x = inv.draw(rng.random(spec.N))
    coeffs = _potential_coeffs(spec.potential)
    param, _ = _tune_and_burn(x, spec, rng, coeffs)
    configs = np.empty((n_kept, spec.N))
    acc = 0
    prop = 0
    for t in range(n_kept):
        a, p = _advance(x, spec, param, spec.thinning, rng, coeffs)
        acc += a
        prop += p
        configs[t] = x
    leftover = spec.n_steps - n_kept * spec.thinning
    if leftover:
        a, p = _advance(x, spec, param, leftover, rng, coeffs)
        acc += a
        prop += p
    rate = acc / prop if prop else float("nan")
    if not (0.05 <= rate <= 0.95):
        warns.append("acceptance rate %.3f outside [0.05, 0.95]" % rate)
    return SampleResult(configs, rate, param, spec, warns)


def _batch_slice(spec, param, inv, lo, hi):
    """Final states of chains lo..hi-1, each keyed (seed, chain_id)."""
    out = np.empty((hi - lo, spec.N))
    coeffs = _potential_coeffs(spec.potential)
    acc = 0
    prop = 0
    for cid in range(lo, hi):
        rng = _chain_rng(spec.seed, cid)
        x = inv.draw(rng.random(spec.N))
        if spec.burn_in:
            a, p = _advance(x, spec, param, spec.burn_in, rng, coeffs)
            acc += a
            prop += p
        out[cid - lo] = x
    return out, acc, prop


def sample_batch(spec, n_samples, workers=None):
    """One retained sample from each of n_samples independent chains.

    Chain i uses the stream keyed (spec.seed, i) and runs spec.burn_in steps
    from an exact draw of the product measure e^{-V}; the step size is tuned
    once on a pilot chain (reserved key) and frozen for every production
    chain. Returns the (n_samples, N) array of final states, ordered by
    chain id, identical for any worker count.
    """
    inv = _InverseCdf(spec.potential)
    if spec.algorithm == "IID0":
        out = np.empty((n_samples, spec.N))
        for cid in range(n_samples):
            out[cid] = inv.draw(_chain_rng(spec.seed, cid).random(spec.N))
        return out
    if spec.step_size is not None:
        param = spec.step_size
    else:
        rng = _chain_rng(spec.seed, _PILOT_CHAIN)
        x = inv.draw(rng.random(spec.N))
        param, _ = _tune_and_burn(x, spec, rng, _potential_coeffs(spec.potential))
    if workers is None or workers <= 1 or n_samples < 4:
        out, acc, prop = _batch_slice(spec, param, inv, 0, n_samples)
    else:
        edges = np.linspace(0, n_samples, workers + 1).astype(int)
        parts = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_batch_slice, spec, param, inv, lo, hi)
                    for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
            parts = [f.result() for f in futs]
        out = np.concatenate([p[0] for p in parts])
        acc = sum(p[1] for p in parts)
        prop = sum(p[2] for p in parts)
    if prop:
        rate = acc / prop
        if not (0.05 <= rate <= 0.95):
            warnings.warn("batch acceptance rate %.3f outside [0.05, 0.95]"
                          % rate)
    return out


def nu_N(x, psi, eq):
    """Centered scaled linear statistic (1/sqrt N) sum psi(x_i) - sqrt N <psi>."""
    ang = _angles(x)
    N = ang.size
    mean_psi = float(np.mean(psi.grid(eq.M) * eq.rho))
    return float((np.sum(psi.eval(ang)) - N * mean_psi) / np.sqrt(N))


def linear_statistics(samples, psi, eq, name="nu_N", seed_base=0):
    """nu_N(psi) across the rows of an (n, N) sample array, as a StatSeries."""
    if isinstance(samples, SampleResult):
        samples = samples.configs
    samples = np.asarray(samples, dtype=float)
    n, N = samples.shape
    mean_psi = float(np.mean(psi.grid(eq.M) * eq.rho))
    sums = psi.eval(samples.reshape(-1)).reshape(n, N).sum(axis=1)
    vals = (sums - N * mean_psi) / np.sqrt(N)
    return StatSeries(vals, name, N, eq.beta, seed_base)


def zeta_N(x, phi, eq):
    """Kernel statistic: the nu_N x nu_N integral of

        k_phi(x, y) = (phi'(x) - phi'(y)) / (2 tan((x - y)/2)),

    diagonal k_phi(x, x) = phi''(x), minus the empirical mean of phi''.
    Expanded into the particle-particle sum plus particle-measure and
    measure-measure quadratures, the latter two through Xi(phi'):

        zeta_N = (1/N) sum_{i != j} k_phi(x_i, x_j)
                 - 2 sum_i Xi(phi')(x_i) + N int Xi(phi') dmu.
    """
    ang = _angles(x)
    N = ang.size
    dphi = phi.derivative()
    xi = apply_Xi(dphi, eq)
    xi_int = float(np.mean(xi.grid(eq.M) * eq.rho))
    pair = _pair_kernel_sum(ang, dphi) if N > 1 else 0.0
    return pair / N - 2.0 * float(np.sum(xi.eval(ang))) + N * xi_int


def _pair_kernel_sum(ang, dphi):
    """sum_{i != j} k_phi(x_i, x_j); the quotient stays O(1) even for nearly
    coincident pairs, where numerator and denominator vanish together."""
    dp = dphi.eval(ang)
    d = ang[:, None] - ang[None, :]
    t = np.tan(0.5 * d)
    np.fill_diagonal(t, 1.0)
    kmat = (dp[:, None] - dp[None, :]) / (2.0 * t)
    np.fill_diagonal(kmat, 0.0)
    return float(np.sum(kmat))


def generator_identity_gap(x, phi, eq, beta=None):
    """Relative defect of the pathwise generator identity at one configuration.

    Computes |G nu_N(phi) + nu_N(L phi) - (beta/sqrt N) zeta_N(phi)| over the
    magnitude of the largest of the three terms. The identity is algebraic,
    so the defect measures only the truncations inside L phi and Xi.

    The drift contribution sum_j phi'(x_j) drift_j is accumulated in its
    pair-symmetrized form (beta/N) sum_{i != j} k_phi - sum_j phi' V': the
    unpaired products carry cotangent factors of either sign that only cancel
    analytically, and a single close pair would otherwise amplify roundoff
    past any fixed tolerance.
    """
    if beta is None:
        beta = eq.beta
    ang = _angles(x)
    N = ang.size
    dphi = phi.derivative()
    dV = eq.potential.series.derivative()
    pair = _pair_kernel_sum(ang, dphi) if N > 1 else 0.0
    lhs = float((np.sum(phi.derivative(2).eval(ang))
                 + beta / N * pair
                 - np.sum(dV.eval(ang) * dphi.eval(ang))) / np.sqrt(N))
    nu_l = nu_N(ang, apply_L(phi, eq), eq)
    zeta_term = beta / np.sqrt(N) * zeta_N(ang, phi, eq)
    resid = lhs + nu_l - zeta_term
    scale = max(abs(lhs), abs(nu_l), abs(zeta_term), 1e-300)
    return abs(resid) / scale


def w2_to_gaussian(values, sigma):
    """Quantile distance between a sample and the centered Gaussian N(0, s^2).

    Order-statistic form of the quadratic Kantorovich distance: the i-th
    sorted value couples to the Gaussian quantile at (i - 1/2)/n.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    q = sigma * ndtri((np.arange(1, n + 1) - 0.5) / n)
    return float(np.sqrt(np.mean((v - q) ** 2)))
