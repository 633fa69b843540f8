"""Likelihood evaluation: analytic when only observed lags enter, particle
filters (sequential importance sampling, or fully adapted auxiliary with
resampling) when censored latent lags feed back into the dynamics.

Per period, with state s_{t-1} = (X_t, Xbar*_t) and m_t = Cbar X_t +
Cbarstar Xbar*_t, the incremental weight is

    D_t = 0:  f0 = N_k(Y_t; m_t, Omega)
    D_t = 1:  f1 * Pr,  f1 = N_{k-1}(Y_1t; mu_1t, Xi_1),
              Pr = Phi((b - mu*_2t) / tau_2)

where mu_1t = m_1t + betatilde (b - m_2t), Xi_1 = Omega_1.2 + dtil dtil'
tau^2 with dtil = delta - betatilde, mu*_2t = m_2t + tau^2 dtil' Xi_1^{-1}
(Y_1t - mu_1t) and tau_2 = tau sqrt(1 - tau^2 dtil' Xi_1^{-1} dtil).
Densities carry their full normalizing constants.  All weight arithmetic is
done in log space.
"""

from __future__ import annotations

import math
import warnings
from collections import namedtuple
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import log_ndtr as _sp_log_ndtr
from scipy.special import ndtr as _sp_ndtr
from scipy.special import ndtri as _sp_ndtri

from . import _kernels
from .model import ModelError, ReducedForm
from .simulate import Dataset

__all__ = [
    "LikelihoodResult",
    "ParticleSystem",
    "LatentEstimate",
    "f0_density",
    "f1_density",
    "cond_u2_moments",
    "prob_bound",
    "draw_truncated_shadow",
    "loglik_ksvar",
    "loglik_sis",
    "loglik_fapf",
    "filter_latent",
]

_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LikelihoodResult:
    """Log-likelihood with its per-period decomposition.

    per_period holds log S_t (carried-weight filter) or the log mean
    incremental weight (resampling filter); ess is the effective sample
    size path, only defined for the carried-weight filter.
    """

    loglik: float
    per_period: np.ndarray
    ess: Optional[np.ndarray]
    filter_kind: str


@dataclass(frozen=True)
class ParticleSystem:
    """Particle values of the shadow rate with their weights.

    states[t, j] is particle j's value of Ybar2*_t right after propagation
    at t.  For the resampling filter, weights[t] are the normalized
    resampling probabilities in pre-resampling particle order and
    ancestors[t, j] is the parent index drawn for slot j; for the
    carried-weight filter, weights[t] are the mean-one importance weights
    W_t and ancestors is the identity.
    """

    M: int
    states: np.ndarray
    weights: np.ndarray
    uniforms: np.ndarray
    ancestors: Optional[np.ndarray]


@dataclass(frozen=True)
class LatentEstimate:
    """Filtered and smoothed means of the shadow rate and its censored part."""

    ybar2star_filtered: np.ndarray
    ybar2star_smoothed: np.ndarray
    xbar_filtered: np.ndarray
    xbar_smoothed: np.ndarray
    filter_kind: str
    particles: ParticleSystem


_Pre = namedtuple("_Pre", "Om_inv logdet_Om Xi1 Xi1_inv logdet_Xi1 r tau2 dtil")


def _precompute(rf: ReducedForm) -> _Pre:
    """Quantities of the weight formulas that do not depend on the state."""
    k = rf.k
    tau = rf.tau
    dtil = rf.delta - rf.betatilde
    Om = rf.Omega
    cho = np.linalg.cholesky(Om)
    Om_inv = np.linalg.inv(Om)
    logdet_Om = 2.0 * np.sum(np.log(np.diag(cho)))
    Xi1 = rf.Omega_1dot2 + np.outer(dtil, dtil) * tau**2
    if k > 1:
        cho1 = np.linalg.cholesky(Xi1)
        Xi1_inv = np.linalg.inv(Xi1)
        logdet_Xi1 = 2.0 * np.sum(np.log(np.diag(cho1)))
        # 1 - tau^2 dtil' Xi1^{-1} dtil = 1/(1 + tau^2 s), computed via the
        # stable route so tau2 stays strictly positive
        s = dtil @ np.linalg.solve(rf.Omega_1dot2, dtil)
        tau2 = tau / math.sqrt(1.0 + tau**2 * s)
        r = tau**2 * (Xi1_inv @ dtil)
    else:
        Xi1_inv = np.zeros((0, 0))
        logdet_Xi1 = 0.0
        tau2 = tau
        r = np.zeros(0)
    return _Pre(Om_inv, logdet_Om, Xi1, Xi1_inv, logdet_Xi1, r, tau2, dtil)


def _state_mean(rf, state):
    x, xbs = state
    x = np.asarray(x, dtype=float).reshape(-1)
    xbs = np.asarray(xbs, dtype=float).reshape(-1)
    if x.shape[0] != rf.q or xbs.shape[0] != rf.p:
        raise ModelError("state dimensions do not match the reduced form")
    return rf.Cbar @ x + rf.Cbarstar @ xbs


def f0_density(rf, Y_t, state):
    """Joint Gaussian predictive density of Y_t for an unconstrained period."""
    pre = _precompute(rf)
    e = np.asarray(Y_t, dtype=float).reshape(-1) - _state_mean(rf, state)
    q = e @ pre.Om_inv @ e
    return math.exp(-0.5 * (rf.k * _LOG2PI + pre.logdet_Om + q))


def _mu1(rf, m):
    return m[: rf.k - 1] + rf.betatilde * (rf.b - m[rf.k - 1])


def f1_density(rf, Y1_t, state):
    """Gaussian predictive density of the unconstrained block for a period
    at the bound."""
    pre = _precompute(rf)
    m = _state_mean(rf, state)
    e = np.asarray(Y1_t, dtype=float).reshape(-1) - _mu1(rf, m)
    q = e @ pre.Xi1_inv @ e
    return math.exp(-0.5 * ((rf.k - 1) * _LOG2PI + pre.logdet_Xi1 + q))


def cond_u2_moments(rf, Y1_t, state):
    """Mean and standard deviation of u_2t given Y_1t and the state."""
    pre = _precompute(rf)
    m = _state_mean(rf, state)
    e = np.asarray(Y1_t, dtype=float).reshape(-1) - _mu1(rf, m)
    return float(pre.r @ e), float(pre.tau2)


def prob_bound(rf, Y1_t, state):
    """Pr(D_t = 1 | Y_1t, state)."""
    pre = _precompute(rf)
    m = _state_mean(rf, state)
    e = np.asarray(Y1_t, dtype=float).reshape(-1) - _mu1(rf, m)
    mu2star = m[rf.k - 1] + pre.r @ e
    return float(_sp_ndtr((rf.b - mu2star) / pre.tau2))


def draw_truncated_shadow(rf, Y1_t, state, u):
    """Inverse-CDF draw of Ybar2*_t from its truncated conditional, strictly
    increasing in the uniform u.  Vectorizes over an array of uniforms."""
    pre = _precompute(rf)
    m = _state_mean(rf, state)
    e = np.asarray(Y1_t, dtype=float).reshape(-1) - _mu1(rf, m)
    mu2star = m[rf.k - 1] + pre.r @ e
    pr = _sp_ndtr((rf.b - mu2star) / pre.tau2)
    a = np.clip(np.asarray(u, dtype=float) * pr, 1e-300, 1.0 - 1e-16)
    out = mu2star + pre.tau2 * _sp_ndtri(a)
    return out if out.ndim else float(out)


def _check_data(rf, data: Dataset):
    if data.k != rf.k or data.p != rf.p or data.k0 != rf.k0:
        raise ModelError("dataset dimensions do not match the reduced form")
    if not np.isclose(data.b, rf.b):
        raise ModelError(f"dataset bound {data.b} != model bound {rf.b}")


def _filter_numpy(base_mean, Y, D, b, Cs, xbar0, bt, Om_inv, logdet_Om,
                  Xi_inv, logdet_Xi, r, tau2, unif_prop, unif_res, fapf):
    """Vectorized reference implementation of the compiled filter loop."""
    T, k = Y.shape
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
    bad_t = -1
    c_f0 = -0.5 * (k * _LOG2PI + logdet_Om)
    c_f1 = -0.5 * (km1 * _LOG2PI + logdet_Xi)

    for t in range(T):
        m = np.repeat(base_mean[t][:, None], M, axis=1)
        for lag in range(1, p + 1):
            s_idx = t - lag
            if s_idx >= 0:
                xl = np.minimum(ystar[s_idx] - b, 0.0)
            else:
                xl = np.full(M, xbar0[p + s_idx])
            m += Cs[:, lag - 1][:, None] * xl[None, :]
        if D[t]:
            gap = b - m[km1]
            e = Y[t, :km1][:, None] - (m[:km1] + bt[:, None] * gap[None, :])
            q = np.einsum("im,ij,jm->m", e, Xi_inv, e)
            mu2s = m[km1] + r @ e
            z = (b - mu2s) / tau2
            logPr = _sp_log_ndtr(z)
            logw = c_f1 - 0.5 * q + logPr
        else:
            e = Y[t][:, None] - m
            q = np.einsum("im,ij,jm->m", e, Om_inv, e)
            logw = c_f0 - 0.5 * q

        if fapf:
            mx = np.max(logw)
            if not np.isfinite(mx):
                terms[t] = -np.inf
                bad_t = t
                break
            lse = mx + math.log(np.sum(np.exp(logw - mx)))
            terms[t] = lse - logM
            pi = np.exp(logw - lse)
            sel = np.minimum(np.searchsorted(np.cumsum(pi), unif_res[t]), M - 1)
            wout[t] = pi
            anc[t] = sel
            lo = max(t - p, 0)
            ystar[lo:t] = ystar[lo:t][:, sel]
            if D[t]:
                a = np.clip(unif_prop[t] * np.exp(logPr[sel]), 1e-300, 1.0 - 1e-16)
                ystar[t] = mu2s[sel] + tau2 * _sp_ndtri(a)
            else:
                ystar[t] = Y[t, km1]
            snap[t] = ystar[t]
        else:
            lw = logw + logW
            mx = np.max(lw)
            if not np.isfinite(mx):
                terms[t] = -np.inf
                bad_t = t
                break
            st = mx + math.log(np.sum(np.exp(lw - mx))) - logM
            terms[t] = st
            logW = lw - st
            W = np.exp(logW)
            wout[t] = W
            ess[t] = M * M / np.sum(W * W)
            anc[t] = np.arange(M)
            if D[t]:
                a = np.clip(unif_prop[t] * np.exp(logPr), 1e-300, 1.0 - 1e-16)
                ystar[t] = mu2s + tau2 * _sp_ndtri(a)
            else:
                ystar[t] = Y[t, km1]
            snap[t] = ystar[t]

    return terms, ess, ystar, snap, wout, anc, bad_t


def _resolve_engine(engine):
    if engine == "auto":
        return "numba" if _kernels.HAVE_NUMBA else "numpy"
    if engine not in ("numba", "numpy"):
        raise ValueError(f"unknown engine: {engine!r}")
    return engine


def _run_filter(rf, data, M, unif_prop, unif_res, fapf, engine):
    _check_data(rf, data)
    pre = _precompute(rf)
    base_mean = data.regressor_matrix() @ rf.Cbar.T
    args = (
        base_mean,
        np.ascontiguousarray(data.Y),
        data.D.astype(np.uint8),
        float(rf.b),
        np.ascontiguousarray(rf.Cbarstar),
        data.xbar_init(),
        np.ascontiguousarray(rf.betatilde),
        pre.Om_inv,
        pre.logdet_Om,
        np.ascontiguousarray(pre.Xi1_inv),
        pre.logdet_Xi1,
        np.ascontiguousarray(pre.r),
        pre.tau2,
        unif_prop,
        unif_res,
        fapf,
    )
    if _resolve_engine(engine) == "numba":
        out = _kernels.filter_kernel(*args)
    else:
        out = _filter_numpy(*args)
    terms, ess, ystar, snap, wout, anc, bad_t = out
    if bad_t >= 0:
        warnings.warn(
            f"all particle weights vanished at period {bad_t}; "
            "log-likelihood is -inf",
            RuntimeWarning,
            stacklevel=3,
        )
        terms[bad_t + 1:] = 0.0
    return terms, ess, ystar, snap, wout, anc, bad_t


def _uniforms(rng, T, M):
    return np.random.default_rng(rng).random((T, M))


def loglik_ksvar(rf, data, engine="auto"):
    """Exact log-likelihood when no censored latent lags enter (Cbarstar = 0).

    Runs the filter machinery with a single degenerate particle, which is
    exact because the weights do not depend on the particle values.
    """
    if not rf.is_ksvar():
        raise ModelError("analytic likelihood requires Cbarstar == 0")
    T = data.T
    half = np.full((T, 1), 0.5)
    terms, _, _, _, _, _, bad_t = _run_filter(
        rf, data, 1, half, half, False, engine
    )
    loglik = -np.inf if bad_t >= 0 else float(np.sum(terms))
    return LikelihoodResult(loglik=loglik, per_period=terms, ess=None,
                            filter_kind="analytic")


def loglik_sis(rf, data, M=1000, uniforms=None, rng=None, engine="auto"):
    """Sequential importance sampling estimate of the log-likelihood.

    With pre-drawn `uniforms` (T, M) held fixed across calls (common random
    numbers) the map from parameters to log-likelihood is continuous, which
    is what gradient-based optimizers need.  Returns the result together
    with the particle system.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if uniforms is None:
        uniforms = _uniforms(rng, data.T, M)
    uniforms = np.ascontiguousarray(uniforms, dtype=float)
    if uniforms.shape != (data.T, M):
        raise ValueError(f"uniforms must have shape {(data.T, M)}")
    terms, ess, ystar, snap, wout, anc, bad_t = _run_filter(
        rf, data, M, uniforms, uniforms, False, engine
    )
    loglik = -np.inf if bad_t >= 0 else float(np.sum(terms))
    res = LikelihoodResult(loglik=loglik, per_period=terms, ess=ess,
                           filter_kind="sis")
    ps = ParticleSystem(M=M, states=snap, weights=wout, uniforms=uniforms,
                        ancestors=None)
    return res, ps


def loglik_fapf(rf, data, M=1000, rng=None, engine="auto"):
    """Fully adapted particle filter estimate of the log-likelihood.

    Only the censored latent lags are resampled; the observed block of the
    state is common to all particles.  Resampling makes the estimate not
    smooth in the parameters, so use the importance-sampling variant inside
    derivative-based optimizers.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng(rng)
    unif_prop = rng.random((data.T, M))
    unif_res = rng.random((data.T, M))
    terms, _, _, _, _, _, bad_t = _run_filter(
        rf, data, M, unif_prop, unif_res, True, engine
    )
    loglik = -np.inf if bad_t >= 0 else float(np.sum(terms))
    return LikelihoodResult(loglik=loglik, per_period=terms, ess=None,
                            filter_kind="fapf")


def _fapf_trajectories(snap, anc):
    """Genealogy-consistent particle paths from per-period snapshots."""
    T, M = snap.shape
    traj = np.empty_like(snap)
    ptr = np.arange(M)
    for t in range(T - 1, -1, -1):
        traj[t] = snap[t][ptr]
        if t > 0:
            ptr = anc[t][ptr]
    return traj


def filter_latent(rf, data, M=1000, filter_kind="sis", rng=None,
                  uniforms=None, engine="auto"):
    """Filtered and smoothed means of the shadow rate Ybar2*_t and of its
    censored part min(Ybar2*_t - b, 0).

    Filtering weights particles at t by W_t (importance filter) or equally
    (resampling filter); smoothing weights whole trajectories by W_T or,
    after resampling, averages the genealogy-consistent paths.
    """
    if filter_kind == "sis":
        if uniforms is None:
            uniforms = _uniforms(rng, data.T, M)
        uniforms = np.ascontiguousarray(uniforms, dtype=float)
        terms, ess, ystar, snap, wout, anc, bad_t = _run_filter(
            rf, data, M, uniforms, uniforms, False, engine
        )
        W = wout
        filt = np.sum(W * snap, axis=1) / M
        xfilt = np.sum(W * np.minimum(snap - rf.b, 0.0), axis=1) / M
        WT = W[-1]
        smoo = (ystar @ WT) / M
        xsmoo = (np.minimum(ystar - rf.b, 0.0) @ WT) / M
        ps = ParticleSystem(M=M, states=snap, weights=wout, uniforms=uniforms,
                            ancestors=None)
    elif filter_kind == "fapf":
        rng = np.random.default_rng(rng)
        unif_prop = rng.random((data.T, M))
        unif_res = rng.random((data.T, M))
        terms, ess, ystar, snap, wout, anc, bad_t = _run_filter(
            rf, data, M, unif_prop, unif_res, True, engine
        )
        filt = np.mean(snap, axis=1)
        xfilt = np.mean(np.minimum(snap - rf.b, 0.0), axis=1)
        traj = _fapf_trajectories(snap, anc)
        smoo = np.mean(traj, axis=1)
        xsmoo = np.mean(np.minimum(traj - rf.b, 0.0), axis=1)
        ps = ParticleSystem(M=M, states=snap, weights=wout, uniforms=unif_prop,
                            ancestors=anc)
    else:
        raise ValueError(f"unknown filter_kind: {filter_kind!r}")
    return LatentEstimate(
        ybar2star_filtered=filt,
        ybar2star_smoothed=smoo,
        xbar_filtered=xfilt,
        xbar_smoothed=xsmoo,
        filter_kind=filter_kind,
        particles=ps,
    )
