"""Compiled inner loops for the particle filters.

Everything here is plain scalar code so it runs under numba's nopython mode;
when numba is unavailable the same functions run as (slow) pure Python and
the high-level module prefers its vectorized numpy path instead.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap


_LOG2PI = 1.8378770664093454
_SQRT1_2 = 0.7071067811865476


@njit(cache=True)
def _ndtr(z):
    return 0.5 * math.erfc(-z * _SQRT1_2)


@njit(cache=True)
def _log_ndtr(z):
    """log of the standard normal CDF, stable far into the lower tail."""
    if z < -30.0:
        # asymptotic Mills-ratio expansion; erfc underflows near z = -37
        z2 = z * z
        ser = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) \
            + 105.0 / (z2 * z2 * z2 * z2)
        return -0.5 * z2 - 0.5 * _LOG2PI - math.log(-z) + math.log(ser)
    if z < 6.0:
        return math.log(0.5 * math.erfc(-z * _SQRT1_2))
    return math.log1p(-0.5 * math.erfc(z * _SQRT1_2))


@njit(cache=True)
def _ndtri(u):
    """Standard normal quantile (Wichura's double-precision rational fits)."""
    q = u - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        r = u
    else:
        r = 1.0 - u
    if r <= 0.0:
        return -math.inf if q < 0.0 else math.inf
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


@njit(cache=True)
def _trunc_draw(u, pr, mu2star, tau2):
    a = u * pr
    if a < 1e-300:
        a = 1e-300
    elif a > 1.0 - 1e-16:
        a = 1.0 - 1e-16
    return mu2star + tau2 * _ndtri(a)


@njit(cache=True)
def filter_kernel(base_mean, Y, D, b, Cs, xbar0, bt, Om_inv, logdet_Om,
                  Xi_inv, logdet_Xi, r, tau2, unif_prop, unif_res, fapf):
    """Shared SIS / fully adapted auxiliary particle filter loop.

    Returns (per-period log increments, ess, shadow draws by genealogy,
    per-period post-propagation snapshots, weights, ancestor indices,
    index of the first period with degenerate weights or -1).

    Weight conventions: SIS weights are carried and mean-one normalized,
    FAPF weights are the per-period normalized resampling probabilities.
    """
    T = Y.shape[0]
    k = Y.shape[1]
    M = unif_prop.shape[1]
    km1 = k - 1
    p = Cs.shape[1]
    logM = math.log(M)

    ystar = np.empty((T, M))
    snap = np.empty((T, M))
    wout = np.empty((T, M))
    anc = np.empty((T, M), np.int64)
    terms = np.zeros(T)
    ess = np.full(T, np.nan)
    logW = np.zeros(M)
    logw = np.empty(M)
    mu2s = np.empty(M)
    logPr = np.empty(M)
    mcol = np.empty(k)
    ev = np.empty(k)
    cums = np.empty(M)
    sel = np.empty(M, np.int64)
    tmp = np.empty(M)
    bad_t = -1

    c_f0 = -0.5 * (k * _LOG2PI + logdet_Om)
    c_f1 = -0.5 * (km1 * _LOG2PI + logdet_Xi)

    for t in range(T):
        dt = D[t]
        for j in range(M):
            for i in range(k):
                mcol[i] = base_mean[t, i]
            for lag in range(1, p + 1):
                s_idx = t - lag
                if s_idx >= 0:
                    xl = ystar[s_idx, j] - b
                    if xl > 0.0:
                        xl = 0.0
                else:
                    xl = xbar0[p + s_idx]
                if xl != 0.0:
                    for i in range(k):
                        mcol[i] += Cs[i, lag - 1] * xl
            if dt:
                gap = b - mcol[km1]
                re = 0.0
                q = 0.0
                for i in range(km1):
                    ev[i] = Y[t, i] - (mcol[i] + bt[i] * gap)
                for i in range(km1):
                    acc = 0.0
                    for i2 in range(km1):
                        acc += Xi_inv[i, i2] * ev[i2]
                    q += ev[i] * acc
                    re += r[i] * ev[i]
                m2star = mcol[km1] + re
                lp = _log_ndtr((b - m2star) / tau2)
                logw[j] = c_f1 - 0.5 * q + lp
                mu2s[j] = m2star
                logPr[j] = lp
            else:
                q = 0.0
                for i in range(k):
                    ev[i] = Y[t, i] - mcol[i]
                for i in range(k):
                    acc = 0.0
                    for i2 in range(k):
                        acc += Om_inv[i, i2] * ev[i2]
                    q += ev[i] * acc
                logw[j] = c_f0 - 0.5 * q

        if fapf:
            mx = -math.inf
            for j in range(M):
                if logw[j] > mx:
                    mx = logw[j]
            if not math.isfinite(mx):
                terms[t] = -math.inf
                bad_t = t
                break
            ssum = 0.0
            for j in range(M):
                ssum += math.exp(logw[j] - mx)
            lse = mx + math.log(ssum)
            terms[t] = lse - logM
            csum = 0.0
            for j in range(M):
                pi_j = math.exp(logw[j] - lse)
                wout[t, j] = pi_j
                csum += pi_j
                cums[j] = csum
            for j in range(M):
                idx = np.searchsorted(cums, unif_res[t, j])
                if idx >= M:
                    idx = M - 1
                sel[j] = idx
                anc[t, j] = idx
            for lag in range(1, p + 1):
                s_idx = t - lag
                if s_idx >= 0:
                    for j in range(M):
                        tmp[j] = ystar[s_idx, sel[j]]
                    for j in range(M):
                        ystar[s_idx, j] = tmp[j]
            for j in range(M):
                if dt:
                    par = sel[j]
                    ystar[t, j] = _trunc_draw(unif_prop[t, j],
                                              math.exp(logPr[par]),
                                              mu2s[par], tau2)
                else:
                    ystar[t, j] = Y[t, km1]
                snap[t, j] = ystar[t, j]
        else:
            mx = -math.inf
            for j in range(M):
                v = logw[j] + logW[j]
                tmp[j] = v
                if v > mx:
                    mx = v
            if not math.isfinite(mx):
                terms[t] = -math.inf
                bad_t = t
                break
            ssum = 0.0
            for j in range(M):
                ssum += math.exp(tmp[j] - mx)
            st = mx + math.log(ssum) - logM
            terms[t] = st
            s2 = 0.0
            for j in range(M):
                logW[j] = tmp[j] - st
                w = math.exp(logW[j])
                wout[t, j] = w
                s2 += w * w
            ess[t] = M * M / s2
            for j in range(M):
                anc[t, j] = j
                if dt:
                    ystar[t, j] = _trunc_draw(unif_prop[t, j],
                                              math.exp(logPr[j]),
                                              mu2s[j], tau2)
                else:
                    ystar[t, j] = Y[t, km1]
                snap[t, j] = ystar[t, j]

    return terms, ess, ystar, snap, wout, anc, bad_t
