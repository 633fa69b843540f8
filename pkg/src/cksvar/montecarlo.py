"""Monte Carlo harness: estimator sampling moments and LR rejection rates.

One campaign simulates `n_rep` samples from a chosen data-generating
process, fits the requested model kinds to each, and reduces the
estimates to per-parameter (true, mean, bias, sd, RMSE) tables.  LR
campaigns additionally test each restricted model against the
unrestricted one, with two critical values per level: the asymptotic
chi-squared quantile and a warp-speed bootstrap quantile.  Warp speed
draws a single bootstrap sample per replication under the restricted
estimate and pools the resulting statistics into one null reference
distribution, so the bootstrap costs one extra refit per test instead
of several hundred.

Replication failures (non-convergence, incoherent estimates, singular
covariances) are dropped and counted, up to 5 percent of n_rep for any
one model or test; beyond that the campaign aborts.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from .estimate import ParamLayout, fit_ml
from .model import ModelError, structural_to_reduced
from .simulate import make_dgp, simulate

__all__ = ["McConfig", "McReport", "run_mc_estimation", "run_mc_lr"]

_DEFAULT_TESTS = {1: ("ksvar", "csvar"), 2: ("csvar",), 3: ("ksvar",)}


@dataclass(frozen=True)
class McConfig:
    """Campaign settings.

    `models` limits which model kinds are fitted (estimation runs) or
    which restricted models are tested against the unrestricted one (LR
    runs); None picks all three for estimation and the tests whose
    restriction the chosen process violates or satisfies interestingly
    (both for process 1, the misspecified one for 2 and 3).
    """

    dgp_id: int = 1
    T: int = 250
    n_rep: int = 200
    M: int = 1000
    models: tuple | None = None
    seed: int = 0
    levels: tuple = (0.10, 0.05, 0.01)

    def __post_init__(self):
        if self.n_rep < 1:
            raise ValueError("n_rep must be at least 1")
        if not all(0.0 < lv < 1.0 for lv in self.levels):
            raise ValueError("levels must lie in (0, 1)")
        if self.models is not None:
            object.__setattr__(self, "models",
                               tuple(str(m).lower() for m in self.models))


@dataclass
class McReport:
    """Campaign output tables.

    params : DataFrame [model, name, true, mean, bias, sd, rmse]
    rejections : DataFrame [test, method, level, rate] or None
    estimates : per-model DataFrame of natural-scale draws, one row per
        completed replication
    lr_stats : DataFrame [test, rep, lr, lr_boot] or None
    """

    config: McConfig
    params: pd.DataFrame
    rejections: pd.DataFrame | None
    estimates: dict[str, pd.DataFrame]
    lr_stats: pd.DataFrame | None
    diagnostics: dict = field(default_factory=dict)

    def write_csv(self, outdir):
        """params.csv, rejections.csv, and draws_<model>.csv under outdir."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        self.params.to_csv(outdir / "params.csv", index=False,
                           float_format="%.12g")
        if self.rejections is not None:
            self.rejections.to_csv(outdir / "rejections.csv", index=False,
                                   float_format="%.12g")
        if self.lr_stats is not None:
            self.lr_stats.to_csv(outdir / "lr_stats.csv", index=False,
                                 float_format="%.12g")
        for model, df in self.estimates.items():
            df.to_csv(outdir / f"draws_{model}.csv", index=False,
                      float_format="%.12g")
        return outdir

    def write_json(self, path):
        """Summary tables and diagnostics as a single JSON document."""
        doc = {
            "config": dataclasses.asdict(self.config),
            "params": self.params.to_dict(orient="records"),
            "rejections": (None if self.rejections is None
                           else self.rejections.to_dict(orient="records")),
            "diagnostics": self.diagnostics,
        }
        path = Path(path)
        path.write_text(json.dumps(doc, indent=2, sort_keys=True,
                                   default=float) + "\n")
        return path


def _representable_truth(layout, rf_true):
    """Natural-scale truth, or NaNs when the model cannot express it."""
    theta = layout.pack(rf_true)
    back = layout.unpack(theta)
    ok = (np.allclose(back.Cbar, rf_true.Cbar, atol=1e-12)
          and np.allclose(back.Cbarstar, rf_true.Cbarstar, atol=1e-12)
          and np.allclose(back.betatilde, rf_true.betatilde, atol=1e-12)
          and np.allclose(back.Omega, rf_true.Omega, atol=1e-10))
    return layout.to_natural(theta) if ok else np.full(layout.n_params,
                                                       np.nan)


def _fit_models(ds, kinds, M, seed):
    fits = {}
    for kind in kinds:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                fit = fit_ml(ds, kind, M=M, seed=seed)
            if not np.isfinite(fit.loglik):
                raise ModelError("non-finite maximized loglik")
            fits[kind] = fit
        except (ModelError, np.linalg.LinAlgError, RuntimeError,
                OverflowError):
            fits[kind] = None
    return fits


def _campaign(cfg: McConfig, do_lr: bool) -> McReport:
    rf_true = structural_to_reduced(make_dgp(cfg.dgp_id))
    k, p, k0 = rf_true.k, rf_true.p, rf_true.k0

    if do_lr:
        tests = cfg.models or _DEFAULT_TESTS.get(cfg.dgp_id, ("ksvar",))
        bad = [t for t in tests if t not in ("ksvar", "csvar")]
        if bad:
            raise ModelError(f"cannot test {bad[0]!r} against itself")
        kinds = ("cksvar",) + tuple(tests)
    else:
        kinds = cfg.models or ("cksvar", "ksvar", "csvar")
    layouts = {m: ParamLayout(k=k, p=p, k0=k0, b=rf_true.b, model_kind=m)
               for m in kinds}
    truths = {m: _representable_truth(layouts[m], rf_true) for m in kinds}

    draws = {m: [] for m in kinds}
    lr_rows = []
    fails = {m: 0 for m in kinds}
    test_fails = {t: 0 for t in (tests if do_lr else ())}
    max_fail = math.ceil(0.05 * cfg.n_rep)
    init = np.zeros((p, k + 1))

    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_rep)
    for rep, child in enumerate(children):
        rng = np.random.default_rng(child)
        ds, _ = simulate(rf_true, T=cfg.T, init=init, rng=rng)
        fit_seed = int(rng.integers(2**31))
        fits = _fit_models(ds, kinds, cfg.M, fit_seed)

        for m in kinds:
            if fits[m] is None:
                fails[m] += 1
                if fails[m] > max_fail:
                    raise RuntimeError(
                        f"more than {max_fail} replications failed for {m!r}")
            else:
                draws[m].append(layouts[m].to_natural(fits[m].theta))

        if not do_lr:
            continue
        for t in tests:
            row = {"test": t, "rep": rep, "lr": np.nan, "lr_boot": np.nan}
            try:
                if fits["cksvar"] is None or fits[t] is None:
                    raise ModelError("fit failed")
                row["lr"] = 2.0 * (fits["cksvar"].loglik - fits[t].loglik)
                # warp speed: one null sample, one bootstrap statistic
                ds_b, _ = simulate(fits[t].psi_hat, T=cfg.T, init=init,
                                   rng=rng)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    ub = fits["cksvar"].refit(ds_b)
                    rb = fits[t].refit(ds_b)
                row["lr_boot"] = 2.0 * (ub.loglik - rb.loglik)
                if not np.isfinite(row["lr"] + row["lr_boot"]):
                    raise ModelError("non-finite statistic")
            except (ModelError, np.linalg.LinAlgError, RuntimeError,
                    OverflowError):
                row["lr"] = row["lr_boot"] = np.nan
                test_fails[t] += 1
                if test_fails[t] > max_fail:
                    raise RuntimeError(
                        f"more than {max_fail} replications failed for the "
                        f"{t!r} test")
            lr_rows.append(row)

    param_rows = []
    estimates = {}
    for m in kinds:
        names = layouts[m].names()
        mat = (np.vstack(draws[m]) if draws[m]
               else np.empty((0, len(names))))
        estimates[m] = pd.DataFrame(mat, columns=names)
        mean = mat.mean(axis=0) if mat.size else np.full(len(names), np.nan)
        sd = mat.std(axis=0, ddof=0) if mat.size else mean
        bias = mean - truths[m]
        rmse = np.sqrt(bias**2 + sd**2)
        for i, name in enumerate(names):
            param_rows.append({"model": m, "name": name,
                               "true": truths[m][i], "mean": mean[i],
                               "bias": bias[i], "sd": sd[i],
                               "rmse": rmse[i]})
    params = pd.DataFrame(param_rows)

    rejections = None
    lr_stats = None
    if do_lr:
        lr_stats = pd.DataFrame(lr_rows)
        rej_rows = []
        for t in tests:
            df_t = layouts["cksvar"].n_params - layouts[t].n_params
            sub = lr_stats[lr_stats["test"] == t].dropna()
            lr = sub["lr"].to_numpy()
            boot = sub["lr_boot"].to_numpy()
            for lv in cfg.levels:
                asym_crit = stats.chi2.ppf(1.0 - lv, df_t)
                boot_crit = (np.quantile(boot, 1.0 - lv) if boot.size
                             else np.nan)
                asym_rate = float(np.mean(lr > asym_crit)) if lr.size \
                    else np.nan
                boot_rate = float(np.mean(lr > boot_crit)) if lr.size \
                    else np.nan
                rej_rows.append({"test": t, "method": "asymptotic",
                                 "level": lv, "rate": asym_rate})
                rej_rows.append({"test": t, "method": "bootstrap",
                                 "level": lv, "rate": boot_rate})
        rejections = pd.DataFrame(rej_rows)

    diagnostics = {
        "n_rep": cfg.n_rep,
        "dgp_id": cfg.dgp_id,
        "T": cfg.T,
        "M": cfg.M,
        "fit_failures": fails,
        "test_failures": test_fails if do_lr else None,
        "completed": {m: int(len(draws[m])) for m in kinds},
    }
    return McReport(config=cfg, params=params, rejections=rejections,
                    estimates=estimates, lr_stats=lr_stats,
                    diagnostics=diagnostics)


def run_mc_estimation(cfg: McConfig) -> McReport:
    """Sampling moments of the ML estimators across simulated samples."""
    return _campaign(cfg, do_lr=False)


def run_mc_lr(cfg: McConfig) -> McReport:
    """LR size/power campaign; also accumulates the estimator draws from
    the fits it performs, so one run serves both kinds of table."""
    return _campaign(cfg, do_lr=True)
