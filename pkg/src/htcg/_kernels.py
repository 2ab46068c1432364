"""Compiled inner loops for the particle samplers.

Both kernels consume pregenerated random arrays so the calling code owns the
random stream (counter-based, keyed per chain) and results are bit-identical
regardless of how chains are scheduled. Pair terms use half-angle identities:
sin((a - b)/2) = sin(a/2)cos(b/2) - cos(a/2)sin(b/2), so a sweep touches each
of the N cached cos/sin values instead of calling sin per pair.

The additive constant log 2 per pair of the interaction is dropped here; it
cancels in every Metropolis ratio.
"""

import numpy as np
from numba import njit

PAIR_GAP_FLOOR = 1e-12


@njit(cache=True)
def eval_trig(x, a0, ac, as_):
    """a0 + sum_k ac[k-1] cos(kx) + as_[k-1] sin(kx)."""
    v = a0
    for k in range(ac.shape[0]):
        v += ac[k] * np.cos((k + 1) * x) + as_[k] * np.sin((k + 1) * x)
    return v


@njit(cache=True)
def log_target(x, g, a0, ac, as_):
    """g * sum_{i<j} log|sin((x_i-x_j)/2)| - sum_j V(x_j); -inf on coincidence."""
    N = x.shape[0]
    ch = np.cos(0.5 * x)
    sh = np.sin(0.5 * x)
    tot = 0.0
    for j in range(N):
        for i in range(j + 1, N):
            sn = abs(sh[j] * ch[i] - ch[j] * sh[i])
            if sn < PAIR_GAP_FLOOR:
                return -np.inf
            tot += np.log(sn)
    v = 0.0
    for j in range(N):
        v += eval_trig(x[j], a0, ac, as_)
    return g * tot - v


@njit(cache=True)
def drift_fill(x, g, dc, ds, out):
    """out[j] = g sum_{i != j} cot((x_j - x_i)/2)/2 - V'(x_j); g = 2 beta/N."""
    N = x.shape[0]
    ch = np.cos(0.5 * x)
    sh = np.sin(0.5 * x)
    for j in range(N):
        out[j] = -eval_trig(x[j], 0.0, dc, ds)
    for j in range(N):
        for i in range(j + 1, N):
            sn = sh[j] * ch[i] - ch[j] * sh[i]
            cn = ch[j] * ch[i] + sh[j] * sh[i]
            c = 0.5 * g * cn / sn
            out[j] += c
            out[i] -= c


@njit(cache=True)
def mh_sweeps(x, sigma, g, a0, ac, as_, z, u):
    """Single-site random-walk Metropolis, one proposal per site per sweep.

    x is updated in place; z (normals) and u (uniforms) have shape
    (sweeps, N). Returns the number of accepted proposals.
    """
    sweeps = z.shape[0]
    N = x.shape[0]
    twopi = 2.0 * np.pi
    ch = np.cos(0.5 * x)
    sh = np.sin(0.5 * x)
    acc = 0
    for s in range(sweeps):
        for j in range(N):
            xo = x[j]
            xn = (xo + sigma * z[s, j]) % twopi
            chn = np.cos(0.5 * xn)
            shn = np.sin(0.5 * xn)
            cho = ch[j]
            sho = sh[j]
            d = 0.0
            ok = True
            for i in range(N):
                if i == j:
                    continue
                sn = abs(shn * ch[i] - chn * sh[i])
                if sn < PAIR_GAP_FLOOR:
                    ok = False
                    break
                so = abs(sho * ch[i] - cho * sh[i])
                d += np.log(sn / so)
            if not ok:
                continue
            dl = g * d - (eval_trig(xn, a0, ac, as_)
                          - eval_trig(xo, a0, ac, as_))
            if dl >= 0.0 or u[s, j] < np.exp(dl):
                x[j] = xn
                ch[j] = chn
                sh[j] = shn
                acc += 1
    return acc


@njit(cache=True)
def mala_steps(x, step, g, a0, ac, as_, dc, ds, z, u):
    """Full-vector Langevin proposal with Metropolis correction, in place.

    Proposal y = x + step * drift(x) + sqrt(2 step) * z; the chain lives on
    the line with a periodic target, and accepted states are wrapped (every
    term of the target and drift is 2 pi periodic, so wrapping is free).
    z has shape (steps, N), u has shape (steps,). Returns accepted count.
    """
    steps = z.shape[0]
    N = x.shape[0]
    twopi = 2.0 * np.pi
    dx = np.empty(N)
    dy = np.empty(N)
    y = np.empty(N)
    drift_fill(x, g, dc, ds, dx)
    lpx = log_target(x, g, a0, ac, as_)
    sq = np.sqrt(2.0 * step)
    acc = 0
    for s in range(steps):
        for j in range(N):
            y[j] = x[j] + step * dx[j] + sq * z[s, j]
        lpy = log_target(y, g, a0, ac, as_)
        if lpy > -np.inf:
            drift_fill(y, g, dc, ds, dy)
            qf = 0.0
            qb = 0.0
            for j in range(N):
                fd = y[j] - x[j] - step * dx[j]
                bd = x[j] - y[j] - step * dy[j]
                qf += fd * fd
                qb += bd * bd
            la = lpy - lpx + (qf - qb) / (4.0 * step)
            if la >= 0.0 or u[s] < np.exp(la):
                for j in range(N):
                    x[j] = y[j] % twopi
                    dx[j] = dy[j]
                lpx = lpy
                acc += 1
    return acc
