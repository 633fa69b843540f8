"""Independent reference implementations used only by the test suite.

Everything here is written against definitions, not against the package
internals: direct quadratic forms, partitioned-inverse block formulas, grid
quadrature, dense-grid scans, and textbook recursions.  Tests compare package
output to these.
"""

from __future__ import annotations

import math

import numpy as np

# ---------------------------------------------------------------------------
# scalar normal helpers (erf-based, no scipy)

SQRT2 = math.sqrt(2.0)
PHI_INV_025 = -0.6744897501960817  # standard normal quantile at 0.25


def normal_cdf(x):
    return 0.5 * math.erfc(-x / SQRT2)


def normal_pdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def normal_ppf_bisect(u, lo=-40.0, hi=40.0, tol=1e-14):
    """Quantile by bisection on the erf-based CDF."""
    if not 0.0 < u < 1.0:
        raise ValueError("u must be in (0,1)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < u:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def truncnorm_cdf(x, mu, sigma, upper):
    """CDF of N(mu, sigma^2) truncated to (-inf, upper]."""
    denom = normal_cdf((upper - mu) / sigma)
    val = normal_cdf((min(x, upper) - mu) / sigma) / denom
    return min(val, 1.0)


def mvn_logpdf(x, mean, cov):
    """Direct multivariate normal log density via slogdet and solve."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = len(x)
    if d == 0:
        return 0.0
    resid = x - mean
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise ValueError("covariance not PD")
    quad = resid @ np.linalg.solve(cov, resid)
    return -0.5 * (d * math.log(2.0 * math.pi) + logdet + quad)


# ---------------------------------------------------------------------------
# structural -> reduced form via the partitioned-inverse block formulas

def reduced_form_blocks(s):
    """Block-formula route: returns (betatilde, kappa, Cbar, Cbarstar, Omega).

    Uses the explicit Schur-complement expressions and the identities
    Ctilde1 = C1 - betatilde C2, Ctilde2 = kappa C2, rather than the matrix
    maps the package computes with.  Needs A22star != 0.
    """
    k = s.k
    A11, A12, A12s, A21 = s.A11, s.A12, s.A12star, s.A21
    A22, A22s = s.A22, s.A22star
    if A22s == 0:
        raise ValueError("oracle needs A22star != 0")
    A12bar = A12 + A12s
    A22bar = A22 + A22s

    A11_inv = np.linalg.inv(A11)
    schur_bar = A22bar - A21 @ A11_inv @ A12bar
    schur_star = A22s - A21 @ A11_inv @ A12s
    kappa = schur_bar / schur_star

    lhs = A11 - np.outer(A12s, A21) / A22s
    betatilde = np.linalg.solve(lhs, A12s * (A22 / A22s) - A12)

    B1, B2 = s.B[: k - 1], s.B[k - 1]
    C2 = (B2 - A21 @ A11_inv @ B1) / schur_bar
    C1 = A11_inv @ (B1 - np.outer(A12bar, C2))

    B1s, B2s = s.Bstar[: k - 1], s.Bstar[k - 1]
    C2s = (B2s - A21 @ A11_inv @ B1s) / schur_bar
    C1s = A11_inv @ (B1s - np.outer(A12bar, C2s))

    C = np.vstack([C1, C2])
    Cstar = np.vstack([C1s, C2s])

    cbar = C.copy()
    cols = [s.k0 + j * k - 1 for j in range(1, s.p + 1)]
    cbar[:, cols] += Cstar
    cbarstar = kappa * Cstar

    Abar = np.block([[A11, A12bar[:, None]], [A21[None, :], np.array([[A22bar]])]])
    Abar_inv = np.linalg.inv(Abar)
    omega = Abar_inv @ Abar_inv.T
    return betatilde, float(kappa), cbar, cbarstar, omega


def kappa_det_ratio(s):
    """Coherency scalar as a determinant ratio (dual route)."""
    return float(np.linalg.det(s.Abar()) / np.linalg.det(s.Astar()))


def random_coherent_structural(rng, k=3, p=1, k0=1, scale=0.5):
    """Rejection-sample a coherent StructuralParams with A22star != 0."""
    from cksvar.model import StructuralParams, check_coherency

    for _ in range(1000):
        A11 = np.eye(k - 1) + scale * rng.normal(size=(k - 1, k - 1)) / np.sqrt(k)
        s = StructuralParams(
            A11=A11,
            A12=scale * rng.normal(size=k - 1),
            A12star=scale * rng.normal(size=k - 1),
            A21=scale * rng.normal(size=k - 1),
            A22=scale * rng.normal(),
            A22star=1.0 + scale * abs(rng.normal()),
            B=scale * rng.normal(size=(k, k0 + k * p)),
            Bstar=scale * rng.normal(size=(k, p)),
            b=float(rng.normal()),
            p=p,
        )
        try:
            rep = check_coherency(s)
        except Exception:
            continue
        if rep.coherent and abs(np.linalg.det(A11)) > 1e-3:
            return s
    raise RuntimeError("failed to draw a coherent system")


# ---------------------------------------------------------------------------
# linear VAR simulation and impulse responses (never-binding limit)

def linear_var_path(Cbar, u, x0_block, presample):
    """Iterate Y_t = Cbar [X0_t, Y_{t-1}, ..., Y_{t-p}] + u_t.

    presample is a (p, k) array in chronological order (newest last);
    x0_block is (T, k0).
    """
    Cbar = np.asarray(Cbar, dtype=float)
    u = np.atleast_2d(np.asarray(u, dtype=float))
    T, k = u.shape
    x0_block = np.asarray(x0_block, dtype=float)
    k0 = x0_block.shape[1]
    p = (Cbar.shape[1] - k0) // k
    hist = [np.asarray(r, dtype=float) for r in presample]
    out = np.empty((T, k))
    for t in range(T):
        x = np.concatenate([x0_block[t]] + [hist[-j] for j in range(1, p + 1)])
        out[t] = Cbar @ x + u[t]
        hist.append(out[t])
    return out


def linear_irf(Cbar, k, p, k0, impact, H):
    """Response of a linear VAR to a one-off innovation `impact` (length k),
    by direct recursion on the lag polynomial."""
    A = [Cbar[:, k0 + (j - 1) * k: k0 + j * k] for j in range(1, p + 1)]
    resp = np.zeros((H + 1, k))
    resp[0] = np.asarray(impact, dtype=float)
    for h in range(1, H + 1):
        acc = np.zeros(k)
        for j, Aj in enumerate(A, start=1):
            if h - j >= 0:
                acc += Aj @ resp[h - j]
        resp[h] = acc
    return resp


# ---------------------------------------------------------------------------
# grid-filter likelihood and latent moments for p = 1, k in {1, 2}
#
# The state xbar_{t-1} lives in (-inf, 0]; its distribution is an atom at 0
# (or at the known initial value) plus a density on a fixed negative grid.
# Observation t with D_t = 0 contributes the full normal density of Y_t and
# collapses the state to the atom; D_t = 1 contributes the joint density of
# (Y1_t, Ybar2*_t = b + xbar_t) integrated over the grid.  The key change of
# variables: with m = Cbar x_t + Cbarstar xbar_{t-1},
#   u2 = b + g' - m_2,   u1 = Y1_t - m_1 + betatilde * g'   ~ N(0, Omega),
# with unit Jacobian.

def _grid(n_grid, tau, span):
    lo = -span * max(tau, 1.0)
    grid = np.linspace(lo, -1e-9, n_grid)
    h = grid[1] - grid[0]
    w = np.full(n_grid, h)
    w[0] = w[-1] = h / 2.0  # trapezoid endpoint weights
    return grid, w


def _step_kernel(rf, Y_t, D_t, src_vals, grid, dx):
    """Mass-transfer matrix from source states to [atom0, grid] targets."""
    k = rf.k
    Om = rf.Omega
    Oinv = np.linalg.inv(Om)
    det = np.linalg.det(Om)
    b = rf.b
    m_base = None  # means already folded into src-specific mean below
    K = np.zeros((len(src_vals), 1 + len(grid)))
    mean = Y_t["m"][None, :] + np.outer(src_vals, rf.Cbarstar[:, 0])
    y = Y_t["y"]
    if not D_t:
        if k == 2:
            r = y[None, :] - mean
            quad = (Oinv[0, 0] * r[:, 0] ** 2 + 2 * Oinv[0, 1] * r[:, 0] * r[:, 1]
                    + Oinv[1, 1] * r[:, 1] ** 2)
            K[:, 0] = np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
        else:
            tau = math.sqrt(Om[0, 0])
            r = (y[0] - mean[:, 0]) / tau
            K[:, 0] = np.exp(-0.5 * r * r) / (math.sqrt(2.0 * math.pi) * tau)
    else:
        g = grid[None, :]
        if k == 2:
            bt = float(rf.betatilde[0])
            u1 = y[0] + bt * g - mean[:, 0][:, None]
            u2 = b + g - mean[:, 1][:, None]
            quad = Oinv[0, 0] * u1 * u1 + 2 * Oinv[0, 1] * u1 * u2 + Oinv[1, 1] * u2 * u2
            dens = np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
        else:
            tau = math.sqrt(Om[0, 0])
            u2 = (b + g - mean[:, 0][:, None]) / tau
            dens = np.exp(-0.5 * u2 * u2) / (math.sqrt(2.0 * math.pi) * tau)
        K[:, 1:] = dens * dx[None, :]
    return K


def _regressor_rows(ds):
    Y = np.atleast_2d(ds.Y)
    k = Y.shape[1]
    prev = np.vstack([np.asarray(ds.init)[-1, :k][None, :], Y[:-1]])
    return [{"y": Y[t], "m": None, "x": np.concatenate([ds.X0[t], prev[t]])}
            for t in range(Y.shape[0])]


def quadrature_loglik_ds(rf, ds, n_grid=2000, span=12.0):
    """Grid-filter log likelihood for a Dataset with p = 1 and k in {1, 2}."""
    Y = np.atleast_2d(ds.Y)
    D = np.asarray(ds.D, dtype=bool)
    T, k = Y.shape
    assert rf.p == 1 and k in (1, 2)
    grid, dx = _grid(n_grid, rf.tau, span)
    rows = _regressor_rows(ds)
    for r in rows:
        r["m"] = rf.Cbar @ r["x"]

    xbar0 = min(float(np.asarray(ds.init)[-1, k]) - rf.b, 0.0)
    src_vals = np.concatenate([[xbar0], grid])
    w = np.concatenate([[1.0], np.zeros(n_grid)])
    loglik = 0.0
    for t in range(T):
        K = _step_kernel(rf, rows[t], D[t], src_vals, grid, dx)
        new_w = w @ K
        lt = new_w.sum()
        loglik += math.log(lt)
        w = new_w / lt
        src_vals = np.concatenate([[0.0], grid])
    return loglik


def quadrature_latent_moments(rf, ds, n_grid=2000, span=12.0):
    """Filtered and smoothed means of xbar_t via forward-backward on the grid
    filter.  Returns (filtered (T,), smoothed (T,))."""
    Y = np.atleast_2d(ds.Y)
    D = np.asarray(ds.D, dtype=bool)
    T, k = Y.shape
    assert rf.p == 1 and k in (1, 2)
    grid, dx = _grid(n_grid, rf.tau, span)
    rows = _regressor_rows(ds)
    for r in rows:
        r["m"] = rf.Cbar @ r["x"]
    targets = np.concatenate([[0.0], grid])

    xbar0 = min(float(np.asarray(ds.init)[-1, k]) - rf.b, 0.0)
    src_vals = np.concatenate([[xbar0], grid])
    alphas, kernels = [], []
    w = np.concatenate([[1.0], np.zeros(n_grid)])
    for t in range(T):
        K = _step_kernel(rf, rows[t], D[t], src_vals, grid, dx)
        new_w = w @ K
        new_w /= new_w.sum()
        kernels.append(K)
        alphas.append(new_w)
        w = new_w
        src_vals = targets
    filtered = np.array([a @ targets for a in alphas])

    smoothed = np.empty(T)
    beta = np.ones(1 + n_grid)
    for t in range(T - 1, -1, -1):
        post = alphas[t] * beta
        post /= post.sum()
        smoothed[t] = post @ targets
        beta = kernels[t] @ beta
        m = beta.max()
        if m > 0:
            beta /= m
    return filtered, smoothed


# ---------------------------------------------------------------------------
# OLS VAR (closed form)

def ols_var(Y, X):
    """Equation-wise least squares with ML residual covariance.
    Returns (C (k, q), Omega (k, k))."""
    C, *_ = np.linalg.lstsq(X, Y, rcond=None)
    resid = Y - X @ C
    Omega = resid.T @ resid / Y.shape[0]
    return C.T, Omega


def gaussian_var_loglik(Y, X, C, Omega):
    T, k = Y.shape
    resid = Y - X @ C.T
    sign, logdet = np.linalg.slogdet(Omega)
    quad = np.einsum("ij,jk,ik->i", resid, np.linalg.inv(Omega), resid)
    return -0.5 * (T * k * math.log(2 * math.pi) + T * logdet + quad.sum())


# ---------------------------------------------------------------------------
# bivariate identified-set oracles

def gamma_of_beta(beta, Om):
    o11, o12, o22 = Om[0, 0], Om[0, 1], Om[1, 1]
    return (o12 - o22 * beta) / (o11 - o12 * beta)


def bounds_lambda_grid(betatilde, Om, n_lambda=20001):
    """All beta consistent with some lambda in [0,1]: solve the scalar
    quadratic on a lambda grid, keep real roots that reproduce betatilde and
    pass coherency."""
    o11, o12, o22 = Om[0, 0], Om[0, 1], Om[1, 1]
    bt = float(betatilde)
    betas = []
    for lam in np.linspace(0.0, 1.0, n_lambda):
        c2 = lam * bt * o22 + (1 - lam) * o12
        c1 = bt * o12 * (1 + lam) + (1 - lam) * o11
        c0 = bt * o11
        if abs(c2) < 1e-14:
            roots = [c0 / c1] if abs(c1) > 1e-14 else []
        else:
            disc = c1 * c1 - 4 * c2 * c0
            if disc < 0:
                continue
            sq = math.sqrt(disc)
            roots = [(c1 - sq) / (2 * c2), (c1 + sq) / (2 * c2)]
        for r in roots:
            den = o11 - o12 * r
            if abs(den) < 1e-12:
                continue
            g = gamma_of_beta(r, Om)
            if (1 - g * r) * (1 - lam * g * r) <= 0:
                continue
            if abs((1 - lam) * r / (1 - lam * g * r) - bt) > 1e-8 * max(1, abs(bt)):
                continue
            betas.append(r)
    return np.array(sorted(betas))


def lambda_disc(betatilde, Om, lam):
    """Discriminant D(lambda) of the beta-quadratic, evaluated directly."""
    o11, o12, o22 = Om[0, 0], Om[0, 1], Om[1, 1]
    bt = float(betatilde)
    return (lam * lam * (o11 - bt * o12) ** 2
            - 2 * lam * (o11 ** 2 - bt ** 2 * o12 ** 2 - 2 * bt * o11 * o12
                         + 2 * bt ** 2 * o11 * o22)
            + (o11 - bt * o12) ** 2)


def betabar_grid_search(betatilde, Om, xi, lo=-50.0, hi=50.0, n=200001):
    """Brute-force k=2 root finder: scan the defining-equation residual over
    [lo, hi] and refine sign changes by bisection."""
    o11, o12, o22 = Om[0, 0], Om[0, 1], Om[1, 1]
    bt = float(betatilde)

    def resid(bb):
        den = o11 - o12 * bb
        if abs(den) < 1e-14:
            return np.nan
        g = (o12 - o22 * bb) / den
        d2 = 1 - xi * g * bb
        if abs(d2) < 1e-14:
            return np.nan
        return (1 - xi) * bb / d2 - bt

    xs = np.linspace(lo, hi, n)
    vals = np.array([resid(x) for x in xs])
    roots = []
    for i in range(n - 1):
        a, bv = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(bv)):
            continue
        if a == 0.0:
            roots.append(xs[i])
        elif a * bv < 0:
            lox, hix = xs[i], xs[i + 1]
            fa = a
            for _ in range(200):
                mid = 0.5 * (lox + hix)
                rm = resid(mid)
                if not np.isfinite(rm):
                    break
                if fa * rm <= 0:
                    hix = mid
                else:
                    lox = mid
                    fa = rm
            cand = 0.5 * (lox + hix)
            rc = resid(cand)
            # a sign flip across a pole of the map is not a root
            if np.isfinite(rc) and abs(rc) <= 1e-6 * max(1.0, abs(bt)):
                roots.append(cand)
    out = []
    for r in roots:
        g = gamma_of_beta(r, Om)
        if (1 - g * r) * (1 - xi * g * r) > 0:
            out.append(r)
    out = sorted(out)
    dedup = []
    for r in out:
        if not dedup or abs(r - dedup[-1]) > 1e-6:
            dedup.append(r)
    return np.array(dedup)
