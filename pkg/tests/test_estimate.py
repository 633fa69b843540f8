import numpy as np
import pytest
from scipy import stats

import oracles
from cksvar.estimate import (
    FitResult,
    ParamLayout,
    _central_hessian,
    bootstrap_lr,
    fit_ml,
    lr_test,
    std_errors,
)
from cksvar.model import (
    ModelError,
    ReducedForm,
    count_free_parameters,
    restriction_counts,
    structural_to_reduced,
)
from cksvar.likelihood import loglik_ksvar, loglik_sis
from cksvar.simulate import make_dgp, simulate


def stable_rf_k2(b=0.0):
    return ReducedForm(Cbar=np.array([[0.2, 0.4, 0.1], [0.1, 0.1, 0.3]]),
                       Cbarstar=np.array([[0.0], [0.2]]),
                       betatilde=[0.5],
                       Omega=np.array([[1.0, 0.3], [0.3, 0.8]]), b=b)


def random_rf(rng, k=3, p=1):
    s = oracles.random_coherent_structural(rng, k=k, p=p)
    return structural_to_reduced(s)


class TestParamLayout:
    def test_round_trip_all_kinds(self):
        rng = np.random.default_rng(0)
        for kind in ("cksvar", "ksvar", "csvar"):
            layout = ParamLayout(k=3, p=2, k0=1, b=0.0, model_kind=kind)
            theta = rng.standard_normal(layout.n_params) * 0.4
            rf = layout.unpack(theta)
            assert np.allclose(layout.pack(rf), theta, atol=1e-12)
            rf2 = layout.unpack(layout.pack(rf))
            assert np.allclose(rf2.Cbar, rf.Cbar)
            assert np.allclose(rf2.Cbarstar, rf.Cbarstar)
            assert np.allclose(rf2.betatilde, rf.betatilde)
            assert np.allclose(rf2.Omega, rf.Omega)

    def test_restriction_structure(self):
        layout = ParamLayout(k=3, p=2, k0=1, b=0.0, model_kind="csvar")
        rf = layout.unpack(np.random.default_rng(1)
                           .standard_normal(layout.n_params))
        assert rf.is_csvar()
        assert np.all(rf.betatilde == 0.0)
        kl = ParamLayout(k=3, p=2, k0=1, b=0.0, model_kind="ksvar")
        rfk = kl.unpack(np.random.default_rng(2).standard_normal(kl.n_params))
        assert rfk.is_ksvar()

    def test_counts_match_model_helpers(self):
        for k, p in ((2, 1), (3, 1), (3, 4)):
            full = ParamLayout(k, p, 1, 0.0, "cksvar").n_params
            assert full == count_free_parameters(k, p, 1)[0]
            counts = restriction_counts(k, p)
            assert full - ParamLayout(k, p, 1, 0.0, "ksvar").n_params \
                == counts["ksvar"]
            assert full - ParamLayout(k, p, 1, 0.0, "csvar").n_params \
                == counts["csvar"]

    def test_names(self):
        layout = ParamLayout(k=3, p=1, k0=1, b=0.0, model_kind="cksvar")
        names = layout.names()
        assert len(names) == layout.n_params
        assert names[0] == "Eq.1 Constant"
        assert names[1] == "Eq.1 Y11_1"
        assert names[3] == "Eq.1 Y2_1"
        assert "Eq.2 lY2_1" in names
        assert names[-1] == "tau"
        assert names[-2] == "Ch_22" and "Ch_21" in names
        # the csvar reports the tied lag under the plain label
        cs = ParamLayout(k=3, p=1, k0=1, b=0.0, model_kind="csvar").names()
        assert "Eq.1 Y2_1" in cs and "Eq.1 lY2_1" not in cs
        assert "betatilde_1" not in cs

    def test_natural_scale_round_trip(self):
        layout = ParamLayout(k=3, p=1, k0=1, b=0.0, model_kind="cksvar")
        theta = np.random.default_rng(3).standard_normal(layout.n_params)
        nat = layout.to_natural(theta)
        assert np.allclose(layout.from_natural(nat), theta)
        assert nat[-1] == pytest.approx(np.exp(theta[-1]))
        rf = layout.unpack(theta)
        assert nat[-1] == pytest.approx(rf.tau)

    def test_unpack_validates_length(self):
        layout = ParamLayout(k=2, p=1, k0=1, b=0.0, model_kind="cksvar")
        with pytest.raises(ModelError):
            layout.unpack(np.zeros(layout.n_params + 1))


class TestFitMl:
    def test_never_binding_csvar_equals_ols(self):
        rf = stable_rf_k2(b=-1e9)
        ds, _ = simulate(rf, T=150, rng=0)
        assert not ds.D.any()
        fit = fit_ml(ds, "csvar", filter_kind="sis", M=2, seed=1)
        Chat, Omhat = oracles.ols_var(ds.Y, ds.regressor_matrix())
        assert np.allclose(fit.psi_hat.Cbar, Chat, atol=1e-4)
        assert np.allclose(fit.psi_hat.Omega, Omhat, atol=1e-3)
        # the simulated likelihood at the optimum equals the Gaussian one
        want = oracles.gaussian_var_loglik(ds.Y, ds.regressor_matrix(),
                                           Chat, Omhat)
        assert fit.loglik == pytest.approx(want, abs=1e-4)

    def test_ksvar_fit_beats_truth(self):
        rf = structural_to_reduced(make_dgp(1))
        ds, _ = simulate(rf, T=200, init=np.zeros((1, 4)), rng=4)
        fit = fit_ml(ds, "ksvar")
        assert fit.filter_kind == "analytic"
        assert np.isfinite(fit.loglik)
        assert fit.loglik >= loglik_ksvar(rf, ds).loglik - 1e-6
        assert abs(fit.psi_hat.tau - 1.0) < 0.3

    def test_seed_reproducibility(self):
        rf = stable_rf_k2()
        ds, _ = simulate(rf, T=80, rng=5)
        a = fit_ml(ds, "cksvar", M=100, seed=7)
        b = fit_ml(ds, "cksvar", M=100, seed=7)
        assert np.array_equal(a.theta, b.theta)
        assert a.loglik == b.loglik

    def test_nesting_monotonicity(self):
        rf = stable_rf_k2()
        ds, _ = simulate(rf, T=80, rng=6)
        full = fit_ml(ds, "cksvar", M=100, seed=2)
        ks = fit_ml(ds, "ksvar", filter_kind="sis", M=100, seed=2)
        cs = fit_ml(ds, "csvar", M=100, seed=2)
        assert full.loglik >= ks.loglik - 1e-4
        assert full.loglik >= cs.loglik - 1e-4

    def test_sis_objective_uses_frozen_uniforms(self):
        rf = stable_rf_k2()
        ds, _ = simulate(rf, T=60, rng=8)
        fit = fit_ml(ds, "cksvar", M=64, seed=3)
        uniforms = np.random.default_rng(3).random((60, 64))
        res, _ = loglik_sis(fit.psi_hat, ds, M=64, uniforms=uniforms)
        assert res.loglik == pytest.approx(fit.loglik, abs=1e-9)

    def test_validation(self):
        rf = stable_rf_k2()
        ds, _ = simulate(rf, T=50, rng=9)
        with pytest.raises(ModelError):
            fit_ml(ds, "svar")
        with pytest.raises(ModelError):
            fit_ml(ds, "cksvar", filter_kind="analytic")
        with pytest.raises(ModelError):
            fit_ml(ds, "cksvar", filter_kind="kalman")

    def test_nonconvergence_is_flagged(self):
        rf = stable_rf_k2()
        ds, _ = simulate(rf, T=60, rng=10)
        with pytest.warns(RuntimeWarning):
            fit = fit_ml(ds, "ksvar", maxiter=1)
        assert not fit.converged


class TestStdErrors:
    def test_quadratic_hessian_exact(self):
        rng = np.random.default_rng(11)
        A = rng.standard_normal((4, 4))
        A = A @ A.T + np.eye(4)
        bvec = rng.standard_normal(4)

        def f(x):
            return -0.5 * x @ A @ x + bvec @ x

        x0 = rng.standard_normal(4)
        H = _central_hessian(f, x0, step=1e-4)
        assert np.allclose(H, -A, atol=1e-6)
        assert np.array_equal(H, H.T)

    def test_ksvar_tau_se_close_to_sampling_sd(self):
        rf = structural_to_reduced(make_dgp(1))
        ds, _ = simulate(rf, T=250, init=np.zeros((1, 4)), rng=12)
        fit = fit_ml(ds, "ksvar")
        vcov = std_errors(fit)
        assert fit.vcov is vcov
        w = np.linalg.eigvalsh(0.5 * (vcov + vcov.T))
        assert w.min() > -1e-10
        se_tau = np.sqrt(vcov[-1, -1])
        # sampling sd of tau-hat at this design is about 0.068
        assert 0.68 * 0.068 < se_tau < 1.32 * 0.068

    def test_fapf_fit_rejected(self):
        layout = ParamLayout(k=2, p=1, k0=1, b=0.0, model_kind="cksvar")
        fit = FitResult(psi_hat=stable_rf_k2(), loglik=-10.0,
                        theta=np.zeros(layout.n_params), layout=layout,
                        model_kind="cksvar", filter_kind="fapf",
                        converged=True, n_iter=5, message="", M=100, seed=0)
        with pytest.raises(NotImplementedError):
            std_errors(fit)


def _stub_fit(layout, loglik):
    return FitResult(psi_hat=None, loglik=loglik,
                     theta=np.zeros(layout.n_params), layout=layout,
                     model_kind=layout.model_kind, filter_kind="analytic",
                     converged=True, n_iter=1, message="", M=None, seed=0)


class TestLrTest:
    def test_identical_fits(self):
        layout_u = ParamLayout(3, 1, 1, 0.0, "cksvar")
        layout_r = ParamLayout(3, 1, 1, 0.0, "ksvar")
        res = lr_test(_stub_fit(layout_u, -50.0), _stub_fit(layout_r, -50.0))
        assert res.lr_stat == 0.0
        assert res.p_asym == 1.0

    def test_default_df_from_layouts(self):
        u = _stub_fit(ParamLayout(3, 4, 1, 0.0, "cksvar"), -80.0)
        rk = _stub_fit(ParamLayout(3, 4, 1, 0.0, "ksvar"), -90.0)
        rc = _stub_fit(ParamLayout(3, 4, 1, 0.0, "csvar"), -90.0)
        assert lr_test(u, rk).df == 12
        assert lr_test(u, rc).df == 14

    def test_chi2_pvalue(self):
        u = _stub_fit(ParamLayout(3, 4, 1, 0.0, "cksvar"), -81.64)
        r = _stub_fit(ParamLayout(3, 4, 1, 0.0, "ksvar"), -81.64 - 30.82 / 2)
        res = lr_test(u, r)
        assert res.lr_stat == pytest.approx(30.82, abs=1e-10)
        assert res.p_asym == pytest.approx(stats.chi2.sf(30.82, 12))
        assert res.p_asym == pytest.approx(0.002, abs=5e-4)

    def test_negative_stat_warns(self):
        u = _stub_fit(ParamLayout(3, 1, 1, 0.0, "cksvar"), -52.0)
        r = _stub_fit(ParamLayout(3, 1, 1, 0.0, "ksvar"), -50.0)
        with pytest.warns(RuntimeWarning):
            res = lr_test(u, r)
        assert res.lr_stat < 0
        assert res.p_asym == 1.0

    def test_df_must_be_positive(self):
        u = _stub_fit(ParamLayout(3, 1, 1, 0.0, "cksvar"), -50.0)
        with pytest.raises(ModelError):
            lr_test(u, u)


class TestBootstrapLr:
    def test_smoke_and_determinism(self):
        rf = ReducedForm(Cbar=np.array([[0.1, 0.3, 0.1], [0.0, 0.1, 0.2]]),
                         Cbarstar=np.zeros((2, 1)), betatilde=[0.0],
                         Omega=np.eye(2))
        ds, _ = simulate(rf, T=40, rng=13)
        fit_r = fit_ml(ds, "ksvar")
        fit_u = fit_ml(ds, "cksvar", M=20, seed=1)
        res = bootstrap_lr(ds, fit_r, fit_u, B=99, rng=42)
        assert res.p_boot is not None and 0.0 < res.p_boot <= 1.0
        assert res.B + res.n_dropped == 99
        assert res.n_dropped <= 5
        res2 = bootstrap_lr(ds, fit_r, fit_u, B=99, rng=42)
        assert res2.p_boot == res.p_boot

    def test_minimum_b(self):
        layout = ParamLayout(2, 1, 1, 0.0, "cksvar")
        with pytest.raises(ValueError):
            bootstrap_lr(None, _stub_fit(layout, 0.0),
                         _stub_fit(layout, 0.0), B=50)
