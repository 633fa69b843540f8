"""Maximum-likelihood estimation, standard errors, and LR tests.

Three nested specifications share one parameter vector layout:

  cksvar   all blocks free: vec Cbar, vec Cbarstar, betatilde, delta,
           lower Cholesky of the conditional covariance, tau
  ksvar    Cbarstar fixed at zero (no state dependence; analytic
           likelihood available)
  csvar    betatilde fixed at zero and the lagged-Y2 columns of Cbar
           tied to the matching Cbarstar columns (a linear VAR in the
           latent process, observed with censoring)

The optimizer works on an unconstrained scale: Cholesky diagonal and
tau enter through their logs.  Reporting and numerical standard errors
use the natural scale.  Simulation-based likelihoods hold one fixed
block of uniforms per fit, so the objective is smooth in the parameters
and quasi-Newton methods apply.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .likelihood import loglik_fapf, loglik_ksvar, loglik_sis
from .model import ModelError, ReducedForm, lagged_y2_columns
from .simulate import Dataset, simulate

__all__ = [
    "ParamLayout",
    "FitResult",
    "TestResult",
    "fit_ml",
    "std_errors",
    "lr_test",
    "bootstrap_lr",
]

_MODEL_KINDS = ("cksvar", "ksvar", "csvar")


@dataclass(frozen=True)
class ParamLayout:
    """Packing of a ReducedForm into a flat vector for one model kind."""

    k: int
    p: int
    k0: int
    b: float
    model_kind: str

    def __post_init__(self):
        if self.model_kind not in _MODEL_KINDS:
            raise ModelError(f"unknown model kind: {self.model_kind!r}")

    @property
    def q(self):
        return self.k0 + self.k * self.p

    @property
    def _free_cbar_cols(self):
        if self.model_kind != "csvar":
            return np.arange(self.q)
        tied = set(lagged_y2_columns(self.k, self.p, self.k0).tolist())
        return np.array([j for j in range(self.q) if j not in tied])

    @property
    def _block_sizes(self):
        k, p = self.k, self.p
        n_cbar = k * len(self._free_cbar_cols)
        n_cstar = 0 if self.model_kind == "ksvar" else k * p
        n_bt = 0 if self.model_kind == "csvar" else k - 1
        n_chol = (k - 1) * k // 2
        return n_cbar, n_cstar, n_bt, k - 1, n_chol, 1

    @property
    def n_params(self):
        return sum(self._block_sizes)

    @property
    def log_scale_positions(self):
        """Indices packed as logs: Cholesky diagonal entries and tau."""
        n_cbar, n_cstar, n_bt, n_delta, n_chol, _ = self._block_sizes
        base = n_cbar + n_cstar + n_bt + n_delta
        pos = []
        at = base
        for i in range(self.k - 1):
            at += i  # subdiagonal entries of row i
            pos.append(at)
            at += 1
        pos.append(self.n_params - 1)
        return np.array(pos)

    def pack(self, rf: ReducedForm):
        k = self.k
        parts = [rf.Cbar[:, self._free_cbar_cols].ravel()]
        if self.model_kind != "ksvar":
            parts.append(rf.Cbarstar.ravel())
        if self.model_kind != "csvar":
            parts.append(rf.betatilde)
        parts.append(rf.delta)
        L = rf.chol_Omega_1dot2
        tri = []
        for i in range(k - 1):
            tri.extend(L[i, :i])
            tri.append(math.log(L[i, i]))
        parts.append(np.asarray(tri))
        parts.append([math.log(rf.tau)])
        return np.concatenate(parts)

    def unpack(self, theta) -> ReducedForm:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ModelError(f"expected {self.n_params} parameters")
        k, p, q = self.k, self.p, self.q
        n_cbar, n_cstar, n_bt, n_delta, n_chol, _ = self._block_sizes
        at = 0

        Cbar = np.zeros((k, q))
        Cbar[:, self._free_cbar_cols] = theta[at:at + n_cbar].reshape(k, -1)
        at += n_cbar
        if self.model_kind == "ksvar":
            Cstar = np.zeros((k, p))
        else:
            Cstar = theta[at:at + n_cstar].reshape(k, p)
            at += n_cstar
        if self.model_kind == "csvar":
            Cbar[:, lagged_y2_columns(k, p, self.k0)] = Cstar
            bt = np.zeros(k - 1)
        else:
            bt = theta[at:at + n_bt]
            at += n_bt
        delta = theta[at:at + n_delta]
        at += n_delta
        L = np.zeros((k - 1, k - 1))
        for i in range(k - 1):
            L[i, :i] = theta[at:at + i]
            at += i
            L[i, i] = math.exp(theta[at])
            at += 1
        tau = math.exp(theta[at])
        return ReducedForm.from_psi(Cbar, Cstar, bt, delta, L, tau, b=self.b)

    def to_natural(self, theta):
        out = np.array(theta, dtype=float)
        pos = self.log_scale_positions
        out[pos] = np.exp(out[pos])
        return out

    def from_natural(self, theta_nat):
        out = np.array(theta_nat, dtype=float)
        pos = self.log_scale_positions
        if np.any(out[pos] <= 0.0):
            raise ModelError("scale parameters must be positive")
        out[pos] = np.log(out[pos])
        return out

    def names(self):
        """Human-readable names in packing order (natural scale)."""
        k, p, k0 = self.k, self.p, self.k0

        def col_name(j):
            if j < k0:
                return "Constant" if k0 == 1 else f"Constant{j + 1}"
            h, v = divmod(j - k0, k)
            return (f"Y1{v + 1}_{h + 1}" if v < k - 1 else f"Y2_{h + 1}")

        out = []
        for i in range(1, k + 1):
            for j in self._free_cbar_cols:
                out.append(f"Eq.{i} {col_name(j)}")
        if self.model_kind != "ksvar":
            # in the csvar the tied columns are the plain lag coefficients
            # of the latent process, so they keep the Y2 label
            tag = "Y2" if self.model_kind == "csvar" else "lY2"
            out.extend(f"Eq.{i} {tag}_{h}" for i in range(1, k + 1)
                       for h in range(1, p + 1))
        if self.model_kind != "csvar":
            out.extend(f"betatilde_{j}" for j in range(1, k))
        out.extend(f"delta_{j}" for j in range(1, k))
        out.extend(f"Ch_{i + 1}{j + 1}"
                   for i in range(k - 1) for j in range(i + 1))
        out.append("tau")
        return out


@dataclass
class FitResult:
    """Outcome of one maximum-likelihood fit."""

    psi_hat: ReducedForm
    loglik: float
    theta: np.ndarray
    layout: ParamLayout
    model_kind: str
    filter_kind: str
    converged: bool
    n_iter: int
    message: str
    M: int | None
    seed: int | None
    data: Dataset = field(repr=False, default=None)
    vcov: np.ndarray | None = None
    vcov_flagged: bool = field(default=False, repr=False)

    @property
    def rf(self) -> ReducedForm:
        return self.psi_hat

    def param_table(self):
        """(name, estimate) pairs on the natural scale."""
        return list(zip(self.layout.names(),
                        self.layout.to_natural(self.theta)))

    def refit(self, data: Dataset, seed=None) -> "FitResult":
        """Fit the same specification on new data, warm-started from this
        optimum (and skipping the restricted pre-fit, which the warm start
        replaces)."""
        return fit_ml(data, self.model_kind, filter_kind=self.filter_kind,
                      M=self.M, seed=self.seed if seed is None else seed,
                      extra_starts=[self.theta], prestart=False)


@dataclass
class TestResult:
    """Likelihood-ratio test summary."""

    lr_stat: float
    df: int
    p_asym: float
    p_boot: float | None = None
    B: int | None = None
    n_dropped: int = 0


def _ols_coefficients(data: Dataset):
    X = data.regressor_matrix()
    coef, *_ = np.linalg.lstsq(X, data.Y, rcond=None)
    resid = data.Y - X @ coef
    Omega = resid.T @ resid / data.T
    # guard against a singular covariance from short samples
    Omega += 1e-8 * np.eye(data.k)
    return coef.T, Omega


def _start_candidates(data: Dataset, layout: ParamLayout):
    """OLS-based starting points; the second replaces the constrained
    equation by a regression on the unconstrained subsample only."""
    k, p = layout.k, layout.p
    Chat, Omhat = _ols_coefficients(data)
    lag_cols = lagged_y2_columns(k, p, layout.k0)

    def build(C, Om):
        Cstar = C[:, lag_cols] if layout.model_kind == "csvar" \
            else np.zeros((k, p))
        return ReducedForm(Cbar=C, Cbarstar=Cstar, betatilde=np.zeros(k - 1),
                           Omega=Om, b=layout.b)

    starts = [layout.pack(build(Chat, Omhat))]
    free = ~data.D
    X = data.regressor_matrix()
    if free.sum() > X.shape[1] + 2:
        C2 = Chat.copy()
        c2, *_ = np.linalg.lstsq(X[free], data.Y[free, k - 1], rcond=None)
        C2[k - 1] = c2
        resid = data.Y - X @ C2.T
        Om2 = resid.T @ resid / data.T + 1e-8 * np.eye(k)
        starts.append(layout.pack(build(C2, Om2)))
    return starts


def _resolve_filter(model_kind, filter_kind):
    if filter_kind == "auto":
        return "analytic" if model_kind == "ksvar" else "sis"
    if filter_kind == "analytic" and model_kind != "ksvar":
        raise ModelError("the analytic likelihood requires Cbarstar == 0; "
                         "use filter_kind='sis' or 'fapf'")
    if filter_kind not in ("analytic", "sis", "fapf"):
        raise ModelError(f"unknown filter kind: {filter_kind!r}")
    return filter_kind


_BAD = 1e12


def fit_ml(data: Dataset, model_kind="cksvar", filter_kind="auto", M=1000,
           seed=0, maxiter=500, gtol=1e-5, extra_starts=None, engine="auto",
           annealing_maxiter=100, n_starts=None, prestart=True) -> FitResult:
    """Maximize the likelihood of one model kind on `data`.

    Simulation likelihoods ('sis') freeze one block of uniforms drawn
    from `seed` for the whole fit, so repeated calls with the same seed
    reproduce the fit exactly.  'fapf' objectives are not smooth, so
    they are maximized by simulated annealing around the best start;
    prefer 'sis' for estimation and 'fapf' for likelihood comparison.
    The unrestricted model is warm-started from a restricted (ksvar)
    fit, which is fast because its likelihood needs no simulation.

    `n_starts` caps how many starting points get a full optimizer run,
    ranked by their initial objective value; the analytic likelihood is
    cheap enough to try them all (the default), simulation likelihoods
    default to the single best.
    """
    model_kind = str(model_kind).lower()
    if model_kind not in _MODEL_KINDS:
        raise ModelError(f"unknown model kind: {model_kind!r}")
    filter_kind = _resolve_filter(model_kind, filter_kind)
    layout = ParamLayout(k=data.k, p=data.p, k0=data.k0, b=data.b,
                         model_kind=model_kind)

    if filter_kind == "sis":
        uniforms = np.random.default_rng(seed).random((data.T, M))
    else:
        uniforms = None

    def evaluate(rf):
        if filter_kind == "analytic":
            return loglik_ksvar(rf, data, engine=engine).loglik
        if filter_kind == "sis":
            res, _ = loglik_sis(rf, data, M=M, uniforms=uniforms,
                                engine=engine)
            return res.loglik
        return loglik_fapf(rf, data, M=M, rng=seed, engine=engine).loglik

    def negll(theta):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                ll = evaluate(layout.unpack(theta))
        except (ModelError, np.linalg.LinAlgError, OverflowError):
            return _BAD
        return -ll if np.isfinite(ll) else _BAD

    starts = _start_candidates(data, layout)
    if model_kind == "cksvar" and prestart:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                pre = fit_ml(data, "ksvar", filter_kind="analytic", seed=seed,
                             maxiter=maxiter, gtol=gtol, engine=engine)
            starts.insert(0, layout.pack(pre.psi_hat))
        except (ModelError, np.linalg.LinAlgError):
            pass
    if extra_starts is not None:
        starts = [np.asarray(s, dtype=float) for s in extra_starts] + starts
    scored = [(negll(s), i, s) for i, s in enumerate(starts)]
    scored = [t for t in scored if t[0] < _BAD]
    if not scored:
        raise ModelError("no feasible starting point found")
    scored.sort()
    if n_starts is None:
        n_starts = len(scored) if filter_kind == "analytic" else 1
    scored = scored[:max(1, int(n_starts))]

    best = None
    for _, _, x0 in scored:
        if filter_kind == "fapf":
            res = optimize.dual_annealing(
                negll, bounds=np.column_stack([x0 - 2.0, x0 + 2.0]), x0=x0,
                maxiter=annealing_maxiter, no_local_search=True, seed=seed)
        else:
            res = optimize.minimize(negll, x0, method="BFGS",
                                    options={"gtol": gtol,
                                             "maxiter": maxiter})
        if best is None or res.fun < best.fun:
            best = res

    theta_hat = np.asarray(best.x, dtype=float)
    converged = bool(best.success)
    if not converged and getattr(best, "status", None) == 2:
        # line-search precision loss at the numeric-gradient noise floor:
        # no loglik improvement is attainable, so accept a slightly larger
        # gradient than gtol before flagging the fit
        jac = getattr(best, "jac", None)
        if jac is not None and np.max(np.abs(jac)) < 50 * gtol:
            converged = True
    fit = FitResult(
        psi_hat=layout.unpack(theta_hat),
        loglik=-float(best.fun),
        theta=theta_hat,
        layout=layout,
        model_kind=model_kind,
        filter_kind=filter_kind,
        converged=converged,
        n_iter=int(getattr(best, "nit", 0)),
        message=str(best.message),
        M=M if filter_kind != "analytic" else None,
        seed=seed,
        data=data,
    )
    if not fit.converged:
        warnings.warn(f"optimizer did not report convergence: {fit.message}",
                      RuntimeWarning, stacklevel=2)
    return fit


def _central_hessian(f, x, step):
    """Symmetric central-difference Hessian of f at x."""
    n = x.size
    h = step * np.maximum(1.0, np.abs(x))
    H = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej)
                - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def std_errors(fit: FitResult, step=1e-4):
    """Parameter covariance from the numerical Hessian, natural scale.

    Only smooth likelihoods qualify; resampling-filter fits have no
    usable derivatives, so inference there should go through likelihood
    ratios instead.  Near-singular Hessians fall back to a pseudo-inverse
    with the result projected to be positive semidefinite and flagged.
    """
    if fit.filter_kind == "fapf":
        raise NotImplementedError(
            "standard errors need a smooth likelihood; resampling-filter "
            "fits should use likelihood-ratio inference")
    layout = fit.layout
    data = fit.data
    theta_nat = layout.to_natural(fit.theta)

    def nat_loglik(tn):
        rf = layout.unpack(layout.from_natural(tn))
        if fit.filter_kind == "analytic":
            return loglik_ksvar(rf, data).loglik
        uniforms = np.random.default_rng(fit.seed).random((data.T, fit.M))
        res, _ = loglik_sis(rf, data, M=fit.M, uniforms=uniforms)
        return res.loglik

    H = _central_hessian(nat_loglik, theta_nat, step)
    info = -H
    flagged = False
    try:
        vcov = np.linalg.inv(info)
        if not np.all(np.isfinite(vcov)) or np.any(np.diag(vcov) <= 0):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        vcov = np.linalg.pinv(info)
        w, V = np.linalg.eigh(0.5 * (vcov + vcov.T))
        vcov = (V * np.maximum(w, 0.0)) @ V.T
        flagged = True
        warnings.warn("information matrix near singular; covariance "
                      "projected to positive semidefinite",
                      RuntimeWarning, stacklevel=2)
    vcov = 0.5 * (vcov + vcov.T)
    fit.vcov = vcov
    fit.vcov_flagged = flagged
    return vcov


def lr_test(fit_u: FitResult, fit_r: FitResult, df=None) -> TestResult:
    """Likelihood-ratio test of the restricted against the nesting model."""
    if df is None:
        df = fit_u.layout.n_params - fit_r.layout.n_params
    if df <= 0:
        raise ModelError("restricted model must have fewer parameters")
    lr = 2.0 * (fit_u.loglik - fit_r.loglik)
    if lr < -1e-4:
        warnings.warn(
            f"restricted fit beats the unrestricted one (LR = {lr:.3g}); "
            "refit the unrestricted model with better starts",
            RuntimeWarning, stacklevel=2)
    p = float(stats.chi2.sf(max(lr, 0.0), df))
    return TestResult(lr_stat=float(lr), df=int(df), p_asym=p)


def bootstrap_lr(data: Dataset, fit_r: FitResult, fit_u: FitResult, B=999,
                 rng=None) -> TestResult:
    """Parametric-bootstrap p-value for the LR test.

    Simulates B samples from the restricted estimate (the null), refits
    both models on each, and counts bootstrap statistics at least as
    large as the observed one.  Replications that fail are dropped, up
    to 5 percent of B.
    """
    if B < 99:
        raise ValueError("B must be at least 99")
    base = lr_test(fit_u, fit_r)
    lr_obs = max(base.lr_stat, 0.0)

    rng = np.random.default_rng(rng)
    stats_b = []
    failures = 0
    max_fail = math.ceil(0.05 * B)
    for _ in range(B):
        sim_seed = rng.integers(2**63)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                ds_b, _ = simulate(fit_r.psi_hat, T=data.T, init=data.init,
                                   rng=sim_seed)
                rb = fit_r.refit(ds_b)
                ub = fit_u.refit(ds_b)
            lr_b = 2.0 * (ub.loglik - rb.loglik)
            if not np.isfinite(lr_b):
                raise ModelError("non-finite bootstrap statistic")
            stats_b.append(max(lr_b, 0.0))
        except (ModelError, np.linalg.LinAlgError, RuntimeError) as exc:
            failures += 1
            if failures > max_fail:
                raise RuntimeError(
                    f"more than {max_fail} bootstrap replications failed"
                ) from exc
    if failures:
        warnings.warn(f"dropped {failures} failed bootstrap replications",
                      RuntimeWarning, stacklevel=2)
    stats_b = np.asarray(stats_b)
    b_eff = stats_b.size
    p_boot = (1.0 + np.sum(stats_b >= lr_obs)) / (b_eff + 1.0)
    return TestResult(lr_stat=base.lr_stat, df=base.df, p_asym=base.p_asym,
                      p_boot=float(p_boot), B=b_eff, n_dropped=failures)
