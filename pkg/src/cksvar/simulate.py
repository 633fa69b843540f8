"""Simulation of observed and latent paths from the reduced form.

The recursion, per period: with x_t = [X0_t, Y_{t-1}, ..., Y_{t-p}] and
xbar*_t = [xbar_{t-1}, ..., xbar_{t-p}],

    m_t      = Cbar x_t + Cbarstar xbar*_t
    Ybar2*_t = m_{t,k} + u_{2t}
    Y2_t     = max(Ybar2*_t, b),    D_t = 1{Ybar2*_t <= b}
    Y1_t     = m_{t,1:k-1} + u_{1t} - betatilde * D_t * (Ybar2*_t - b)
    xbar_t   = min(Ybar2*_t - b, 0)

with u_t drawn i.i.d. N(0, Omega) as standard normal rows times the lower
Cholesky factor of Omega transposed (this draw order is part of the seeded
reproducibility contract).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelError, ReducedForm, StructuralParams

__all__ = ["Dataset", "LatentPath", "simulate", "make_dgp"]


@dataclass(frozen=True)
class Dataset:
    """Observed sample plus the presample rows needed to start the recursion.

    Y : (T, k) observations, constrained variable last.
    D : (T,) boolean bound indicators.
    b : scalar bound.
    p : lag order.
    init : (p, k+1) presample rows [Y, Ybar2*] in chronological order
        (newest last).  When the latent value is unknown the last column
        just repeats the observed Y2.
    X0 : (T, k0) exogenous block; a column of ones by default.
    """

    Y: np.ndarray
    D: np.ndarray
    b: float
    p: int
    init: np.ndarray
    X0: np.ndarray | None = None

    def __post_init__(self):
        Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        D = np.asarray(self.D, dtype=bool).reshape(-1)
        init = np.atleast_2d(np.asarray(self.init, dtype=float))
        if self.X0 is None:
            X0 = np.ones((Y.shape[0], 1))
        else:
            X0 = np.asarray(self.X0, dtype=float)
            if X0.ndim != 2:
                X0 = X0.reshape(Y.shape[0], -1)
        p = int(self.p)
        if Y.ndim != 2 or D.shape[0] != Y.shape[0]:
            raise ModelError("Y must be (T, k) with matching D")
        if init.shape != (p, Y.shape[1] + 1):
            raise ModelError(f"init must be (p, k+1) = ({p}, {Y.shape[1] + 1})")
        if X0.shape[0] != Y.shape[0]:
            raise ModelError("X0 must have T rows")
        for name, val in (("Y", Y), ("D", D), ("init", init), ("X0", X0)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "p", p)
        for a in (self.Y, self.D, self.init, self.X0):
            a.setflags(write=False)

    @property
    def T(self):
        return self.Y.shape[0]

    @property
    def k(self):
        return self.Y.shape[1]

    @property
    def k0(self):
        return self.X0.shape[1]

    @classmethod
    def from_observations(cls, Y, b, p, bind_tol=0.0, X0=None):
        """Split raw observations into presample and sample with computed
        bound indicators D_t = 1{Y2_t <= b + bind_tol}."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        n, k = Y.shape
        if n <= p:
            raise ModelError("need more rows than the lag order")
        if X0 is None:
            X0 = np.ones((n, 1))
        X0 = np.asarray(X0, dtype=float).reshape(n, -1)
        init = np.column_stack([Y[:p], Y[:p, k - 1]])
        Ys = Y[p:]
        D = Ys[:, k - 1] <= b + bind_tol
        return cls(Y=Ys, D=D, b=b, p=p, init=init, X0=X0[p:])

    def regressor_matrix(self):
        """(T, q) matrix of observed regressors [X0, lag 1, ..., lag p]."""
        k, p, T = self.k, self.p, self.T
        full = np.vstack([self.init[:, :k], self.Y])
        cols = [self.X0]
        for j in range(1, p + 1):
            cols.append(full[p - j: p - j + T])
        return np.concatenate(cols, axis=1)

    def xbar_init(self):
        """Presample censored latent values min(Ybar2* - b, 0), oldest first."""
        return np.minimum(self.init[:, self.k] - self.b, 0.0)


@dataclass(frozen=True)
class LatentPath:
    """Shadow values and censored latents along a simulated path."""

    Ybar2star: np.ndarray
    xbar: np.ndarray


def simulate(rf: ReducedForm, T, init=None, rng=None, n_burn=None, X0=None):
    """Simulate T observations from a reduced form.

    When `init` is omitted the recursion starts at zeros and a burn-in of
    `n_burn` periods (default 100) is discarded; when `init` is given the
    default burn-in is zero and the path continues from the supplied
    presample.  Returns (Dataset, LatentPath).
    """
    rng = np.random.default_rng(rng)
    k, p, k0, b = rf.k, rf.p, rf.k0, rf.b
    if n_burn is None:
        n_burn = 0 if init is not None else 100
    n_burn = int(n_burn)
    if init is None:
        init = np.zeros((p, k + 1))
    init = np.atleast_2d(np.asarray(init, dtype=float))
    if init.shape != (p, k + 1):
        raise ModelError(f"init must be (p, k+1) = ({p}, {k + 1})")
    if X0 is None:
        X0s = np.ones((T, k0))
    else:
        X0s = np.asarray(X0, dtype=float).reshape(T, k0)
    X0full = np.vstack([np.ones((n_burn, k0)), X0s]) if k0 else np.zeros((n_burn + T, 0))

    ntot = n_burn + T
    z = rng.standard_normal((ntot, k))
    u = z @ np.linalg.cholesky(rf.Omega).T

    histY = [init[i, :k] for i in range(p)]
    histx = list(np.minimum(init[:, k] - b, 0.0))
    histY2s = list(init[:, k])

    Yout = np.empty((ntot, k))
    y2s_out = np.empty(ntot)
    xbar_out = np.empty(ntot)
    bt = rf.betatilde
    for t in range(ntot):
        x = np.concatenate([X0full[t]] + [histY[-j] for j in range(1, p + 1)])
        xbs = np.array([histx[-j] for j in range(1, p + 1)])
        m = rf.Cbar @ x + rf.Cbarstar @ xbs
        y2s = m[k - 1] + u[t, k - 1]
        d = y2s <= b
        kink = (y2s - b) if d else 0.0
        y1 = m[: k - 1] + u[t, : k - 1] - bt * kink
        row = np.concatenate([y1, [b if d else y2s]])
        Yout[t] = row
        y2s_out[t] = y2s
        xbar_out[t] = min(y2s - b, 0.0)
        histY.append(row)
        histx.append(xbar_out[t])
        histY2s.append(y2s)

    Y = Yout[n_burn:]
    y2star = y2s_out[n_burn:]
    xbar = xbar_out[n_burn:]
    D = y2star <= b
    if n_burn >= p:
        init_used = np.column_stack([Yout[n_burn - p: n_burn],
                                     y2s_out[n_burn - p: n_burn]])
    elif n_burn == 0:
        init_used = init
    else:
        rows = np.vstack([init[:, :k], Yout[:n_burn]])[-p:]
        lat = np.concatenate([init[:, k], y2s_out[:n_burn]])[-p:]
        init_used = np.column_stack([rows, lat])
    ds = Dataset(Y=Y, D=D, b=b, p=p, init=init_used, X0=X0s)
    return ds, LatentPath(Ybar2star=y2star, xbar=xbar)


_DGP_NAMES = {"dgp1": 1, "dgp2": 2, "dgp3": 3, "1": 1, "2": 2, "3": 3}


def make_dgp(which) -> StructuralParams:
    """The three trivariate one-lag designs used by the Monte Carlo harness.

    Common core: unconstrained block is a diagonal VAR(1) with coefficient
    0.5, the constrained equation has unit coefficient on the shadow value
    and none on the observed value, zero intercepts, bound at zero.
    DGP1: no feedback from the bound variable (both special cases hold).
    DGP2: observed lagged Y2 enters its own equation (kinked case holds).
    DGP3: latent lagged Y2* enters instead (censored case holds).
    """
    if isinstance(which, (int, np.integer)):
        num = int(which)
    else:
        num = _DGP_NAMES.get(str(which).strip().lower())
    if num not in (1, 2, 3):
        raise ValueError(f"unknown DGP: {which!r}")
    rho = 0.5
    k = 3
    B = np.zeros((k, 1 + k))
    B[0, 1] = rho
    B[1, 2] = rho
    if num == 2:
        B[2, 3] = rho
    Bstar = np.zeros((k, 1))
    if num == 3:
        Bstar[2, 0] = rho
    return StructuralParams(
        A11=np.eye(2),
        A12=np.zeros(2),
        A12star=np.zeros(2),
        A21=np.zeros(2),
        A22=0.0,
        A22star=1.0,
        B=B,
        Bstar=Bstar,
        b=0.0,
        p=1,
    )
