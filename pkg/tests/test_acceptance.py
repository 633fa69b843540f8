"""End-to-end checks of the package's headline guarantees.

One test per numbered criterion; each produces a single pass/fail line
under ``pytest -v``.  Criteria 3-5 need Monte Carlo campaigns measured in
hours, so they are gated on CKSVAR_ACCEPT_NREP (50 = smoke tier with
widened tolerances, 200 = full tier) and read cached campaign reports from
CKSVAR_ACCEPT_CACHE when available, computing them in-process otherwise.
Criterion 10 needs externally constructed data and is gated on
CKSVAR_APPLICATION_CSV.
"""

import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

from cksvar.estimate import ParamLayout, fit_ml, lr_test
from cksvar.identify import bivariate_bounds, identified_set, lambda_set, \
    point_id
from cksvar.irf import IrfRequest, IrfState, girf
from cksvar.likelihood import loglik_fapf, loglik_ksvar, loglik_sis
from cksvar.model import ReducedForm
from cksvar.montecarlo import McConfig, run_mc_lr
from cksvar.simulate import Dataset, simulate

import oracles

CACHE = Path(os.environ.get("CKSVAR_ACCEPT_CACHE",
                            Path(__file__).resolve().parent.parent
                            / ".acceptance_cache"))
_campaigns = {}


def _nrep_or_skip():
    raw = os.environ.get("CKSVAR_ACCEPT_NREP")
    if not raw:
        pytest.skip("set CKSVAR_ACCEPT_NREP=50 (smoke tier, ~3 h single "
                    "core) or 200 (full tier, ~12 h) to run the Monte "
                    "Carlo criteria")
    return int(raw)


def _campaign(dgp_id, n_rep):
    """Cached (or freshly computed) campaign report as a plain dict."""
    key = (dgp_id, n_rep)
    if key not in _campaigns:
        path = CACHE / f"dgp{dgp_id}_n{n_rep}" / "mc_report.json"
        if not path.exists():
            rep = run_mc_lr(McConfig(dgp_id=dgp_id, T=250, n_rep=n_rep,
                                     M=1000, seed=0))
            path.parent.mkdir(parents=True, exist_ok=True)
            rep.write_json(path)
        _campaigns[key] = json.loads(path.read_text())
    return _campaigns[key]


def _rejection(report, test, method, level=0.05):
    for row in report["rejections"]:
        if (row["test"] == test and row["method"] == method
                and abs(row["level"] - level) < 1e-12):
            return row["rate"]
    raise AssertionError(f"no rejection entry for {test}/{method}")


def _sig_tol(ref, digits=3):
    # half a unit in the last significant digit of ref
    mag = math.floor(math.log10(abs(ref)))
    return 0.5 * 10.0 ** (mag - digits + 1)


def _toy_cksvar_k2():
    return ReducedForm(
        Cbar=np.array([[0.2, 0.4, 0.1], [0.3, 0.1, 0.3]]),
        Cbarstar=np.array([[0.1], [0.25]]),
        betatilde=np.array([0.4]),
        Omega=np.array([[1.0, 0.3], [0.3, 0.8]]),
    )


def test_c01_degenerate_filters_match_analytic_loglik():
    """Without latent lag feedback, both simulation filters are exact."""
    rf = ReducedForm(
        Cbar=np.array([[0.1, 0.4, 0.1], [0.5, 0.1, 0.3]]),
        Cbarstar=np.zeros((2, 1)),
        betatilde=np.array([0.4]),
        Omega=np.array([[1.0, 0.3], [0.3, 0.8]]),
    )
    ds, _ = simulate(rf, 60, init=np.zeros((1, 3)),
                     rng=np.random.default_rng(8))
    assert ds.D.any() and not ds.D.all()
    exact = loglik_ksvar(rf, ds).loglik
    for M in (1, 7, 100):
        for seed in (0, 1):
            sis, _ = loglik_sis(rf, ds, M=M,
                                rng=np.random.default_rng(seed))
            fapf = loglik_fapf(rf, ds, M=M,
                               rng=np.random.default_rng(seed))
            assert abs(sis.loglik - exact) <= 1e-10
            assert abs(fapf.loglik - exact) <= 1e-10


def test_c02_particle_logliks_match_quadrature():
    """T=5 bivariate model: M=1e5 filters agree with numerical integration
    to three significant digits."""
    rf = _toy_cksvar_k2()
    Y = np.array([[0.4, 0.7], [-0.2, 0.0], [0.3, 0.0], [0.5, 0.4],
                  [0.1, 0.0]])
    D = np.array([False, True, True, False, True])
    ds = Dataset(Y=Y, D=D, b=0.0, p=1,
                 init=np.array([[0.1, 0.5, 0.5]]))
    ref = oracles.quadrature_loglik_ds(rf, ds, n_grid=4000, span=14.0)
    tol = _sig_tol(ref)
    sis, _ = loglik_sis(rf, ds, M=100_000, rng=np.random.default_rng(0))
    fapf = loglik_fapf(rf, ds, M=100_000, rng=np.random.default_rng(0))
    assert abs(sis.loglik - ref) <= tol, (sis.loglik, ref, tol)
    assert abs(fapf.loglik - ref) <= tol, (fapf.loglik, ref, tol)


def test_c03_estimator_moments_dgp1():
    """DGP1 sampling moments: biases within 2 Monte Carlo standard errors
    and the RMSE of the first kink coefficient inside its window."""
    n = _nrep_or_skip()
    widen = 1.0 if n >= 200 else 1.5
    rows = [r for r in _campaign(1, n)["params"]
            if r["model"] == "cksvar"]
    assert rows, "campaign carries no unrestricted draws"
    problems = []
    for r in rows:
        bound = widen * 2.0 * r["sd"] / math.sqrt(n)
        if abs(r["bias"]) > bound:
            problems.append(f"{r['name']}: |bias| {abs(r['bias']):.4f} "
                            f"> {bound:.4f}")
    rmse = {r["name"]: r["rmse"] for r in rows}["betatilde_1"]
    lo, hi = (0.25, 0.47) if n >= 200 else (0.178, 0.534)
    if not lo <= rmse <= hi:
        problems.append(f"betatilde_1 RMSE {rmse:.3f} outside [{lo}, {hi}]")
    assert not problems, "; ".join(problems)


def test_c04_bootstrap_corrects_lr_test_size():
    """DGP1: bootstrap 5% rejection near nominal for both restriction
    tests while the asymptotic test over-rejects."""
    n = _nrep_or_skip()
    widen = 1.0 if n >= 200 else 1.5
    report = _campaign(1, n)
    lo, hi = 0.02 / widen, 0.09 * widen
    for test in ("ksvar", "csvar"):
        boot = _rejection(report, test, "bootstrap")
        asym = _rejection(report, test, "asymptotic")
        assert lo <= boot <= hi, f"{test}: bootstrap rate {boot:.3f}"
        assert asym > 0.05, f"{test}: asymptotic rate {asym:.3f} not > 0.05"


def test_c05_power_ranking_across_misspecifications():
    """Latent-lag misspecification is easier to detect than the kink-only
    one: bootstrap power ordering at the 5% level."""
    n = _nrep_or_skip()
    power_ksvar_test = _rejection(_campaign(3, n), "ksvar", "bootstrap")
    power_csvar_test = _rejection(_campaign(2, n), "csvar", "bootstrap")
    assert power_ksvar_test > power_csvar_test, \
        (power_ksvar_test, power_csvar_test)


def test_c06_xi_grid_set_matches_bivariate_bounds():
    """100 random bivariate models: grid set endpoints agree with the
    analytic bounds and every draw lands in exactly one case."""
    rng = np.random.default_rng(2024)
    R = 500
    cases = {"real_line", "half_line", "interval", "infeasible"}
    seen = set()
    for _ in range(100):
        A = rng.normal(size=(2, 2))
        Omega = A @ A.T + 0.1 * np.eye(2)
        bt = 0.8 * rng.normal()
        rf = ReducedForm(Cbar=np.zeros((2, 3)), Cbarstar=np.zeros((2, 1)),
                         betatilde=np.array([bt]), Omega=Omega)
        bb = bivariate_bounds(bt, Omega)
        assert bb.case in cases
        seen.add(bb.case)
        iset = identified_set(rf, R=R)
        betas = np.array([s.betabar[0] for s in iset.solutions])
        if bb.case == "infeasible":
            assert betas.size == 0
            continue
        if betas.size:
            assert np.all(betas >= bb.lo - 1e-8)
            assert np.all(betas <= bb.hi + 1e-8)
        if bb.case == "interval":
            width = bb.hi - bb.lo
            tol = 2.0 / (R + 1) * width
            assert abs(betas.min() - bb.lo) <= tol
            assert abs(betas.max() - bb.hi) <= tol
    assert "interval" in seen  # the informative case actually occurred


def test_c07_lambda_discriminant_nonnegative_at_zero():
    """The censoring-frequency set is never empty: D(0) is an exact
    square for 10^4 random draws."""
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        A = rng.normal(size=(2, 2))
        Omega = A @ A.T + 0.05 * np.eye(2)
        bt = rng.normal()
        ls = lambda_set(bt, Omega)
        d0 = ls.disc(0.0)
        assert d0 >= 0.0
        assert d0 == pytest.approx((Omega[0, 0] - bt * Omega[0, 1]) ** 2,
                                   rel=1e-12)
        assert ls.contains(0.0)


def test_c08_girf_matches_linear_var_without_bound():
    """With the bound unreachable, the simulated response reproduces the
    closed-form linear IRF within three Monte Carlo standard errors."""
    rf = ReducedForm(
        Cbar=np.array([[0.0, 0.4, 0.1, 0.1], [0.0, 0.2, 0.3, 0.0],
                       [0.0, 0.1, 0.0, 0.5]]),
        Cbarstar=np.zeros((3, 1)),
        betatilde=np.array([0.4, -0.2]),
        Omega=np.array([[1.0, 0.2, 0.1], [0.2, 0.9, 0.3],
                        [0.1, 0.3, 1.1]]),
        b=-1e9,
    )
    sol = point_id(rf)
    state = IrfState(recent=np.zeros((1, 3)), xbar=np.zeros(1))
    H = 24
    runs = np.stack([
        girf(rf, sol, IrfRequest(horizon=H, shock="one_sd", state=state,
                                 M=2000, seed=s))
        for s in range(12)
    ])
    se = runs.std(axis=0, ddof=1) / math.sqrt(runs.shape[0])
    denom = 1.0 - sol.gammabar @ sol.betabar
    varsigma = sol.A22bar_inv
    impact = np.append(sol.betabar * varsigma / denom, varsigma / denom)
    linear = oracles.linear_irf(rf.Cbar, k=3, p=1, k0=1, impact=impact, H=H)
    tol = np.maximum(3.0 * se, 1e-8)
    assert np.all(np.abs(runs.mean(axis=0) - linear) <= tol)


def test_c09_crn_loglik_gradients_are_stable():
    """Frozen-draw simulated likelihood is smooth: central-difference
    gradients at step sizes 1e-4 and 1e-5 agree to two significant digits
    at 20 random parameter points."""
    rf = _toy_cksvar_k2()
    ds, _ = simulate(rf, 60, init=np.zeros((1, 3)),
                     rng=np.random.default_rng(3))
    layout = ParamLayout(k=2, p=1, k0=1, b=0.0, model_kind="cksvar")
    theta0 = layout.pack(rf)
    uniforms = np.random.default_rng(0).random((ds.T, 200))

    def nll(th):
        res, _ = loglik_sis(layout.unpack(th), ds, M=200, uniforms=uniforms)
        return -res.loglik

    def grad(th, h_rel):
        g = np.empty_like(th)
        for i in range(th.size):
            h = h_rel * max(1.0, abs(th[i]))
            up, dn = th.copy(), th.copy()
            up[i] += h
            dn[i] -= h
            g[i] = (nll(up) - nll(dn)) / (2.0 * h)
        return g

    rng = np.random.default_rng(42)
    for _ in range(20):
        th = theta0 + 0.08 * rng.standard_normal(theta0.size)
        g4 = grad(th, 1e-4)
        g5 = grad(th, 1e-5)
        scale = max(np.max(np.abs(g4)), np.max(np.abs(g5)))
        for a, b in zip(g4, g5):
            big = max(abs(a), abs(b))
            assert abs(a - b) <= 0.05 * big or big <= 1e-6 * scale, \
                (a, b, scale)


def test_c10_application_replication():
    """Optional: user-supplied quarterly dataset reproduces the headline
    likelihood-ratio statistics and the two filters agree closely."""
    path = os.environ.get("CKSVAR_APPLICATION_CSV")
    if not path:
        pytest.skip("set CKSVAR_APPLICATION_CSV to a quarterly CSV (date "
                    "column, two unconstrained series, then the policy "
                    "rate; CKSVAR_APPLICATION_COLUMN names the rate, "
                    "CKSVAR_APPLICATION_BOUND sets the bound, default 0.2)")
    from cksvar.cli import ingest

    col = os.environ.get("CKSVAR_APPLICATION_COLUMN", "rate")
    bound = float(os.environ.get("CKSVAR_APPLICATION_BOUND", "0.2"))
    ds = ingest(path, col, bound=bound, lags=4)
    fit_u = fit_ml(ds, "cksvar", filter_kind="sis", M=1000, seed=0)
    fit_k = fit_ml(ds, "ksvar", seed=0)
    fit_c = fit_ml(ds, "csvar", filter_kind="sis", M=1000, seed=0)
    lr_k = lr_test(fit_u, fit_k).lr_stat
    lr_c = lr_test(fit_u, fit_c).lr_stat
    assert abs(lr_k - 30.8) <= 2.0, lr_k
    assert abs(lr_c - 26.4) <= 2.0, lr_c
    alt = loglik_fapf(fit_u.rf, ds, M=1000, rng=np.random.default_rng(0))
    assert abs(alt.loglik - fit_u.loglik) < 0.5
