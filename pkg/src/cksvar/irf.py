"""Generalized impulse responses under an occasionally binding bound.

A response at horizon h is the difference between two conditional
expectations of Y_{t+h}: one with the period-t policy shock set to a
given size and one with it set to zero, all other shocks shared.  Both
expectations are averaged over M simulated paths that use common random
numbers across the two branches, so the estimate is exactly zero for a
zero shock and has low Monte Carlo variance otherwise.  Paths follow
the reduced-form recursion, switching regime whenever the simulated
shadow value of the bounded variable falls below the bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .identify import IdentifiedSet, StructuralSolution, point_id
from .likelihood import filter_latent
from .model import ModelError, ReducedForm
from .simulate import Dataset, simulate

__all__ = [
    "IrfState",
    "IrfRequest",
    "IrfBundle",
    "girf",
    "irf_identified_set",
    "condition_state",
    "bootstrap_bands",
]


@dataclass(frozen=True)
class IrfState:
    """Conditioning information for an impulse response at some period.

    `recent` holds the p most recent observations in chronological order
    (oldest first); `xbar` the matching censoring gaps min(Ybar2* - b, 0),
    zero for periods where the bound did not bind.  `x0` is the row of
    deterministic regressors for the shock period (ones when omitted).
    """

    recent: np.ndarray
    xbar: np.ndarray
    x0: np.ndarray | None = None
    filtered: bool = False

    def __post_init__(self):
        recent = np.atleast_2d(np.asarray(self.recent, dtype=float))
        xbar = np.asarray(self.xbar, dtype=float).reshape(-1)
        if xbar.shape[0] != recent.shape[0]:
            raise ModelError("xbar must have one entry per recent row")
        if np.any(xbar > 1e-12):
            raise ModelError("censoring gaps must be nonpositive")
        x0 = self.x0
        if x0 is not None:
            x0 = np.asarray(x0, dtype=float).reshape(-1)
            x0.setflags(write=False)
        recent.setflags(write=False)
        xbar.setflags(write=False)
        object.__setattr__(self, "recent", recent)
        object.__setattr__(self, "xbar", xbar)
        object.__setattr__(self, "x0", x0)

    @property
    def p(self):
        return self.recent.shape[0]


@dataclass(frozen=True)
class IrfRequest:
    """Settings for a generalized impulse response.

    `shock` is 'one_sd' (one standard deviation of the policy shock),
    'unit', or an explicit size.  `state` must be an IrfState; build one
    with condition_state or by hand.
    """

    horizon: int = 24
    shock: object = "one_sd"
    state: IrfState | None = None
    M: int = 1000
    seed: int | None = 0

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 0:
            raise ValueError("horizon must be a nonnegative integer")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("M must be a positive integer")
        if isinstance(self.shock, str):
            if self.shock not in ("one_sd", "unit"):
                raise ValueError("shock must be 'one_sd', 'unit', or a number")
        else:
            float(self.shock)


@dataclass(frozen=True)
class IrfBundle:
    """Responses for one structural solution, with optional bands."""

    responses: np.ndarray
    xi: float
    root_index: int
    shock_size: float
    band_lo: np.ndarray | None = None
    band_hi: np.ndarray | None = None


def _resolve_shock(shock, sol: StructuralSolution) -> float:
    if isinstance(shock, str):
        return sol.A22bar_inv if shock == "one_sd" else 1.0
    return float(shock)


def _xi1_of(betabar, Omega):
    # cov of u1 - betabar*u2, the non-policy shocks at this solution
    k = Omega.shape[0]
    O11 = Omega[: k - 1, : k - 1]
    O12 = Omega[: k - 1, k - 1]
    O22 = Omega[k - 1, k - 1]
    return (O11 - np.outer(betabar, O12) - np.outer(O12, betabar)
            + O22 * np.outer(betabar, betabar))


def _impact_u(sol: StructuralSolution, varsigma, eps1):
    """Reduced-form innovations implied by policy shock `varsigma` and
    non-policy shocks `eps1` (M, k-1)."""
    denom = 1.0 - float(sol.gammabar @ sol.betabar)
    tilt = (eps1 @ sol.gammabar + varsigma) / denom
    u1 = eps1 + tilt[:, None] * sol.betabar
    return np.concatenate([u1, tilt[:, None]], axis=1)


def _paths(rf: ReducedForm, state: IrfState, u0, U):
    """Simulate M paths of length H+1 from `state`, with impact
    innovations `u0` (M, k) and later innovations `U` (M, H, k)."""
    k, p, b = rf.k, rf.p, rf.b
    M, H = u0.shape[0], U.shape[1]
    x0 = state.x0 if state.x0 is not None else np.ones(rf.k0)
    if x0.shape[0] != rf.k0:
        raise ModelError("state.x0 length must match the deterministic block")
    if state.p != p:
        raise ModelError("state history length must equal the lag order")

    histY = np.broadcast_to(state.recent, (M, p, k)).copy()
    histx = np.broadcast_to(state.xbar, (M, p)).copy()
    x0row = np.broadcast_to(x0, (M, rf.k0))
    bt = rf.betatilde
    out = np.empty((M, H + 1, k))
    for h in range(H + 1):
        X = np.concatenate([x0row, histY[:, ::-1, :].reshape(M, p * k)], axis=1)
        m = X @ rf.Cbar.T + histx[:, ::-1] @ rf.Cbarstar.T
        u = u0 if h == 0 else U[:, h - 1, :]
        y2s = m[:, k - 1] + u[:, k - 1]
        gap = np.minimum(y2s - b, 0.0)
        y1 = m[:, : k - 1] + u[:, : k - 1] - gap[:, None] * bt
        ynew = np.concatenate([y1, np.maximum(y2s, b)[:, None]], axis=1)
        out[:, h, :] = ynew
        histY = np.concatenate([histY[:, 1:, :], ynew[:, None, :]], axis=1)
        histx = np.concatenate([histx[:, 1:], gap[:, None]], axis=1)
    return out


def _girf_core(rf, sol, req, Z_eps, Z_u):
    varsigma = _resolve_shock(req.shock, sol)
    Xi1 = _xi1_of(sol.betabar, rf.Omega)
    eps1 = Z_eps @ np.linalg.cholesky(Xi1).T
    U = Z_u @ np.linalg.cholesky(rf.Omega).T
    u_shock = _impact_u(sol, varsigma, eps1)
    u_base = _impact_u(sol, 0.0, eps1)
    diff = _paths(rf, req.state, u_shock, U) - _paths(rf, req.state, u_base, U)
    return diff.mean(axis=0), varsigma


def _draw_standard(rf, req):
    # one eps block then one u block; order matters for reproducibility
    rng = np.random.default_rng(req.seed)
    Z_eps = rng.standard_normal((req.M, rf.k - 1))
    Z_u = rng.standard_normal((req.M, req.horizon, rf.k))
    return Z_eps, Z_u


def girf(rf: ReducedForm, sol: StructuralSolution, req: IrfRequest):
    """Monte Carlo generalized impulse response, (H+1) x k.

    Row h holds the average difference between the shocked and baseline
    paths at horizon h; column ordering matches the observation vector.
    """
    if req.state is None:
        raise ModelError("IrfRequest.state is required; see condition_state")
    Z_eps, Z_u = _draw_standard(rf, req)
    resp, _ = _girf_core(rf, sol, req, Z_eps, Z_u)
    return resp


def irf_identified_set(rf: ReducedForm, idset: IdentifiedSet,
                       req: IrfRequest) -> list[IrfBundle]:
    """One IrfBundle per solution in the set, all from shared draws.

    The point solution at xi = 0 is always included, so the first bundle
    exists even when the grid produced no other members.
    """
    if req.state is None:
        raise ModelError("IrfRequest.state is required; see condition_state")
    sols = list(idset.solutions)
    if not any(s.xi == 0.0 for s in sols):
        sols.insert(0, point_id(rf))
    Z_eps, Z_u = _draw_standard(rf, req)
    bundles = []
    for sol in sols:
        resp, varsigma = _girf_core(rf, sol, req, Z_eps, Z_u)
        bundles.append(IrfBundle(responses=resp, xi=sol.xi,
                                 root_index=sol.root_index,
                                 shock_size=varsigma))
    return bundles


def condition_state(rf: ReducedForm, data: Dataset, t, filter_kind="sis",
                    M=1000, rng=None, engine="auto") -> IrfState:
    """Conditioning state for an impulse at period t (1-based, up to T+1).

    When every lagged period entering the period-t regressors sits above
    the bound, the censoring gaps are exactly zero and no filtering is
    run; otherwise gaps at binding in-sample periods are replaced by
    their filtered means.  Presample gaps come from the stored latent
    initials and are exact either way.
    """
    t = int(t)
    if not 1 <= t <= data.T + 1:
        raise ValueError("t must lie in [1, T+1]")
    k, p = data.k, data.p
    stacked = np.vstack([data.init[:, :k], data.Y])
    recent = stacked[t - 1: t - 1 + p]

    xinit = data.xbar_init()
    lat = None
    xbar = np.empty(p)
    filtered = False
    for i in range(p):
        s = t - p + i  # the period supplying lag p - i
        if s <= 0:
            xbar[i] = xinit[s + p - 1]
        elif not data.D[s - 1]:
            xbar[i] = 0.0
        else:
            if lat is None:
                lat = filter_latent(rf, data, M=M, filter_kind=filter_kind,
                                    rng=rng, engine=engine)
                filtered = True
            xbar[i] = lat.xbar_filtered[s - 1]
    x0 = data.X0[min(t, data.T) - 1]
    return IrfState(recent=recent, xbar=xbar, x0=x0, filtered=filtered)


def bootstrap_bands(data: Dataset, fit, req: IrfRequest, B=999,
                    coverage=0.9, rng=None) -> IrfBundle:
    """Parametric bootstrap bands around the point-identified response.

    Simulates B samples from the fitted reduced form, refits the same
    specification on each, recomputes the response, and returns pointwise
    empirical quantiles at (1 -+ coverage)/2.  Replications that fail to
    refit or identify are dropped, up to 5 percent of B.
    """
    if B < 99:
        raise ValueError("B must be at least 99")
    if not 0.0 < coverage < 1.0:
        raise ValueError("coverage must lie in (0, 1)")
    rf = fit.rf
    sol0 = point_id(rf)
    point = girf(rf, sol0, req)

    rng = np.random.default_rng(rng)
    responses = []
    failures = 0
    max_fail = math.ceil(0.05 * B)
    for _ in range(B):
        sim_seed = rng.integers(2**63)
        try:
            ds_b, _ = simulate(rf, T=data.T, init=data.init, rng=sim_seed)
            fit_b = fit.refit(ds_b)
            sol_b = point_id(fit_b.rf)
            responses.append(girf(fit_b.rf, sol_b, req))
        except (ModelError, np.linalg.LinAlgError, RuntimeError) as exc:
            failures += 1
            if failures > max_fail:
                raise RuntimeError(
                    f"more than {max_fail} bootstrap replications failed"
                ) from exc
    if failures:
        warnings.warn(f"dropped {failures} failed bootstrap replications",
                      RuntimeWarning, stacklevel=2)
    stack = np.stack(responses)
    lo, hi = np.quantile(stack, [(1 - coverage) / 2, (1 + coverage) / 2],
                         axis=0)
    return IrfBundle(responses=point, xi=0.0, root_index=sol0.root_index,
                     shock_size=_resolve_shock(req.shock, sol0),
                     band_lo=lo, band_hi=hi)
