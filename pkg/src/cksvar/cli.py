"""Batch front end for the library.

Subcommands cover the full workflow: ``estimate`` fits one model to a CSV
file, ``test`` runs the nested likelihood-ratio comparisons, ``irf`` and
``idset`` produce impulse responses and identified sets, ``mc`` drives the
simulation harness, and ``simulate`` writes synthetic datasets.  Every run
writes a ``manifest.json`` carrying the resolved configuration, its hash,
and library versions, so a run can be repeated exactly by passing the
manifest back through ``--config``.

Configuration comes from an INI-style file (any section names; keys match
the command-line flags with dashes or underscores), overridden by explicit
flags.  Outputs are long-format CSV for series and JSON for summaries; no
timestamps are embedded, so repeated runs are byte-identical.

Exit codes: 0 on success, 2 for configuration or input-data errors, 3 for
numerical failures (non-coherent estimates, failed optimizations, exceeded
bootstrap failure budgets).
"""

import argparse
import configparser
import dataclasses
import hashlib
import importlib.metadata
import json
import logging
import platform
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .estimate import bootstrap_lr, fit_ml, lr_test, std_errors
from .identify import bivariate_bounds, identified_set, lambda_set, point_id
from .irf import IrfBundle, IrfRequest, bootstrap_bands, condition_state, \
    girf, irf_identified_set
from .model import ModelError, structural_to_reduced
from .montecarlo import McConfig, run_mc_estimation, run_mc_lr
from .simulate import Dataset, make_dgp, simulate

log = logging.getLogger(__name__)

_MODELS = ("cksvar", "ksvar", "csvar")
_FILTERS = ("auto", "analytic", "sis", "fapf")
_NUMERICAL_ERRORS = (ModelError, np.linalg.LinAlgError, FloatingPointError,
                     OverflowError, RuntimeError)


class ConfigError(ValueError):
    """Bad flags, config keys, or input data; maps to exit code 2."""


@dataclass
class RunConfig:
    """Resolved settings for one run; defaults < config file < flags."""

    data: str | None = None
    date_col: str | None = None
    constrained: str | None = None
    bound: float = 0.0
    bind_tol: float = 0.0
    lags: int = 1
    model: str = "cksvar"
    filter: str = "auto"
    particles: int = 1000
    seed: int = 0
    bootstrap: int = 0
    horizon: int = 24
    shock: str = "one_sd"
    at: int | None = None
    draws: int = 1000
    bands: int = 0
    coverage: float = 0.9
    xi_grid: int = 100
    sign_restrict: bool = False
    dgp: int = 1
    nrep: int = 200
    periods: int = 250
    estimation_only: bool = False
    out: str = "out"


_BOOL_KEYS = {"sign_restrict", "estimation_only"}
_INT_KEYS = {"lags", "particles", "seed", "bootstrap", "horizon", "at",
             "draws", "bands", "xi_grid", "dgp", "nrep", "periods"}
_FLOAT_KEYS = {"bound", "bind_tol", "coverage"}
_ALL_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


# ---------------------------------------------------------------------------
# data ingestion and export

def _read_frame(path, constrained, date_col=None):
    """Validated (values, names) from a CSV, constrained column last."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"data file not found: {path}")
    df = pd.read_csv(path, float_precision="round_trip")
    if date_col is None:
        objs = [c for c in df.columns if df[c].dtype == object]
        if not objs:
            raise ConfigError("no date column found; name one with date_col")
        date_col = objs[0]
    elif date_col not in df.columns:
        raise ConfigError(f"date column {date_col!r} not in the file")
    dates = pd.to_datetime(df[date_col], errors="coerce")
    if dates.isna().any():
        raise ConfigError(f"unparseable dates in column {date_col!r}")
    if not (dates.is_monotonic_increasing and dates.is_unique):
        raise ConfigError("dates must be strictly increasing")

    rest = df.drop(columns=[date_col])
    numeric = {}
    for c in rest.columns:
        vals = pd.to_numeric(rest[c], errors="coerce")
        if vals.isna().any():
            raise ConfigError(f"missing or non-numeric values in column {c!r}")
        numeric[c] = vals.to_numpy(dtype=float)
    if constrained not in numeric:
        raise ConfigError(f"constrained column {constrained!r} not in the file")
    names = [c for c in rest.columns if c != constrained] + [constrained]
    if len(names) < 2:
        raise ConfigError("need at least two numeric series besides the date")
    Y = np.column_stack([numeric[c] for c in names])
    return Y, names


def ingest(path, constrained, date_col=None, bound=0.0, bind_tol=0.0,
           lags=1) -> Dataset:
    """Read a CSV into a Dataset ready for estimation.

    The file needs a header row, one date column (auto-detected as the
    first non-numeric column unless named), and at least two numeric
    series with no gaps.  Columns are reordered so the bound-constrained
    series comes last; observations within ``bind_tol`` of ``bound``
    count as at the bound.  The first ``lags`` rows become the presample,
    where latent levels are taken equal to the observed values.
    """
    Y, _ = _read_frame(path, constrained, date_col)
    ds = Dataset.from_observations(Y, b=bound, p=lags, bind_tol=bind_tol)
    n_bound = int(ds.D.sum())
    if n_bound == 0:
        warnings.warn("the constrained series is never at the bound; the "
                      "model behaves as an unconstrained VAR in-sample",
                      UserWarning, stacklevel=2)
    elif n_bound == ds.T:
        warnings.warn("the constrained series is always at the bound; the "
                      "unconstrained regime is not identified from this "
                      "sample", UserWarning, stacklevel=2)
    log.info("%d observations, %d at the bound (%.1f%%)",
             ds.T, n_bound, 100.0 * n_bound / ds.T)
    return ds


def export_csv(data: Dataset, path, names=None, start="2000-01-01"):
    """Write presample plus sample as a dated CSV.

    ``ingest`` with the same bound, tolerance, and lag order reads the
    file back bit-exactly.  The latent presample column is not exported;
    on re-ingestion presample latent levels equal the observed values.
    """
    k = data.k
    if names is None:
        names = [f"Y1_{j}" for j in range(1, k)] + ["Y2"]
    rows = np.vstack([data.init[:, :k], data.Y])
    dates = pd.period_range(start=start, periods=len(rows), freq="Q")
    df = pd.DataFrame(rows, columns=list(names))
    df.insert(0, "date", dates.to_timestamp().strftime("%Y-%m-%d"))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
    return path


def _load_dataset(cfg: RunConfig):
    ds = ingest(cfg.data, cfg.constrained, date_col=cfg.date_col,
                bound=cfg.bound, bind_tol=cfg.bind_tol, lags=cfg.lags)
    _, names = _read_frame(cfg.data, cfg.constrained, cfg.date_col)
    return ds, names


# ---------------------------------------------------------------------------
# configuration plumbing

def _coerce(key, value):
    if key not in _ALL_KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    if value is None:
        return None
    if key in _BOOL_KEYS:
        if isinstance(value, bool):
            return value
        states = configparser.ConfigParser.BOOLEAN_STATES
        try:
            return states[str(value).strip().lower()]
        except KeyError:
            raise ConfigError(f"config key {key!r} wants a boolean, "
                              f"got {value!r}") from None
    try:
        if key in _INT_KEYS:
            return int(str(value))
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ConfigError(f"bad value for config key {key!r}: "
                          f"{value!r}") from None
    return None if value is None else str(value)


def _load_config_file(path):
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    if p.suffix == ".json":
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config: {exc}") from None
        raw = dict(doc.get("config", doc))
        raw.pop("command", None)
    else:
        cp = configparser.ConfigParser()
        try:
            cp.read_string(p.read_text(), source=str(p))
        except configparser.Error as exc:
            raise ConfigError(f"bad config file: {exc}") from None
        raw = dict(cp.defaults())
        for section in cp.sections():
            raw.update(cp[section])
    return {k.replace("-", "_"): _coerce(k.replace("-", "_"), v)
            for k, v in raw.items()}


def _parse_shock(text):
    if text in ("one_sd", "unit"):
        return text
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError("shock must be 'one_sd', 'unit', or a "
                          "number") from None


def _validate(cfg: RunConfig, command: str):
    if command in ("estimate", "test", "irf", "idset"):
        if not cfg.data:
            raise ConfigError("--data is required for this command")
        if not cfg.constrained:
            raise ConfigError("--constrained must name the bound-constrained "
                              "column")
    if cfg.lags < 1:
        raise ConfigError("lags must be at least 1")
    if cfg.model not in _MODELS:
        raise ConfigError(f"model must be one of {', '.join(_MODELS)}")
    if cfg.filter not in _FILTERS:
        raise ConfigError(f"filter must be one of {', '.join(_FILTERS)}")
    if cfg.filter == "analytic" and (command == "test"
                                     or cfg.model != "ksvar"):
        raise ConfigError("the analytic likelihood is only available under "
                          "the ksvar restriction")
    if cfg.particles < 1:
        raise ConfigError("particles must be positive")
    if cfg.bootstrap and cfg.bootstrap < 99:
        raise ConfigError("bootstrap must be 0 (off) or at least 99")
    if cfg.bands and cfg.bands < 99:
        raise ConfigError("bands must be 0 (off) or at least 99")
    if not 0.0 < cfg.coverage < 1.0:
        raise ConfigError("coverage must lie strictly between 0 and 1")
    if cfg.horizon < 0:
        raise ConfigError("horizon must be nonnegative")
    if cfg.draws < 1:
        raise ConfigError("draws must be positive")
    if cfg.xi_grid < 1:
        raise ConfigError("xi-grid must be positive")
    if cfg.at is not None and cfg.at < 1:
        raise ConfigError("at must be a 1-based period index")
    if cfg.bind_tol < 0:
        raise ConfigError("bind-tol must be nonnegative")
    if cfg.dgp not in (1, 2, 3):
        raise ConfigError("dgp must be 1, 2, or 3")
    if cfg.nrep < 1:
        raise ConfigError("nrep must be positive")
    if cfg.periods < cfg.lags + 1:
        raise ConfigError("periods must exceed the lag order")
    _parse_shock(cfg.shock)


def resolve_config(args) -> RunConfig:
    """Merge defaults, an optional config file, and explicit flags."""
    values = {}
    if getattr(args, "config", None):
        values.update(_load_config_file(args.config))
    for key in _ALL_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    cfg = RunConfig(**values)
    _validate(cfg, args.command)
    return cfg


def _versions():
    try:
        own = importlib.metadata.version("cksvar")
    except importlib.metadata.PackageNotFoundError:
        own = "0+unknown"
    import scipy
    return {"cksvar": own, "numpy": np.__version__,
            "pandas": pd.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _write_json(path, doc):
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True,
                               default=float) + "\n")
    return path


def _write_manifest(outdir, command, cfg, outputs):
    config = dataclasses.asdict(cfg)
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    doc = {"command": command,
           "config": config,
           "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
           "outputs": sorted(outputs),
           "versions": _versions()}
    return _write_json(outdir / "manifest.json", doc)


def _finite_or_none(x):
    x = float(x)
    return x if np.isfinite(x) else None


# ---------------------------------------------------------------------------
# subcommands

def _cmd_estimate(cfg: RunConfig, outdir: Path):
    ds, names = _load_dataset(cfg)
    fit = fit_ml(ds, model_kind=cfg.model, filter_kind=cfg.filter,
                 M=cfg.particles, seed=cfg.seed)
    se = None
    if fit.filter_kind != "fapf":
        se = np.sqrt(np.diag(std_errors(fit)))
    params = [{"name": name, "estimate": float(value),
               "se": None if se is None else float(se[i])}
              for i, (name, value) in enumerate(fit.param_table())]
    doc = {"model": fit.model_kind, "filter": fit.filter_kind,
           "loglik": fit.loglik, "converged": fit.converged,
           "n_iter": fit.n_iter, "message": fit.message,
           "n_obs": ds.T, "n_bound": int(ds.D.sum()),
           "particles": fit.M, "seed": fit.seed,
           "variables": names, "params": params}
    _write_json(outdir / "fit.json", doc)
    state = "converged" if fit.converged else "NOT converged"
    print(f"{fit.model_kind} ({fit.filter_kind}) loglik {fit.loglik:.4f}, "
          f"{state} after {fit.n_iter} iterations")
    return ["fit.json"]


def _cmd_test(cfg: RunConfig, outdir: Path):
    ds, _ = _load_dataset(cfg)
    fit_u = fit_ml(ds, model_kind="cksvar", filter_kind=cfg.filter,
                   M=cfg.particles, seed=cfg.seed)
    rows = []
    for i, kind in enumerate(("ksvar", "csvar")):
        fit_r = fit_ml(ds, model_kind=kind, filter_kind="auto",
                       M=cfg.particles, seed=cfg.seed)
        res = lr_test(fit_u, fit_r)
        row = {"restriction": kind, "loglik": fit_r.loglik,
               "n_restrictions": res.df, "lr": res.lr_stat,
               "p_asym": res.p_asym, "p_boot": None, "B": None}
        if cfg.bootstrap:
            boot = bootstrap_lr(ds, fit_r, fit_u, B=cfg.bootstrap,
                                rng=np.random.default_rng([cfg.seed, 10 + i]))
            row.update(p_boot=boot.p_boot, B=boot.B,
                       n_dropped=boot.n_dropped)
        rows.append(row)
        pb = "" if row["p_boot"] is None else f", p_boot {row['p_boot']:.3f}"
        print(f"{kind}: LR {res.lr_stat:.2f} ({res.df} restrictions), "
              f"p_asym {res.p_asym:.3f}{pb}")
    doc = {"unrestricted": {"model": "cksvar", "filter": fit_u.filter_kind,
                            "loglik": fit_u.loglik},
           "n_obs": ds.T, "n_bound": int(ds.D.sum()), "tests": rows}
    _write_json(outdir / "test.json", doc)
    return ["test.json"]


def _irf_request(cfg: RunConfig, fit, ds):
    t = ds.T + 1 if cfg.at is None else cfg.at
    state = condition_state(fit.rf, ds, t, M=cfg.particles,
                            rng=np.random.default_rng([cfg.seed, 20]))
    return IrfRequest(horizon=cfg.horizon, shock=_parse_shock(cfg.shock),
                      state=state, M=cfg.draws, seed=cfg.seed)


def _irf_frame(bundle, names):
    H1, k = bundle.responses.shape
    rows = []
    for h in range(H1):
        for j in range(k):
            row = {"horizon": h, "variable": names[j],
                   "response": bundle.responses[h, j]}
            if bundle.band_lo is not None:
                row["band_lo"] = bundle.band_lo[h, j]
                row["band_hi"] = bundle.band_hi[h, j]
            rows.append(row)
    return pd.DataFrame(rows)


def _cmd_irf(cfg: RunConfig, outdir: Path):
    ds, names = _load_dataset(cfg)
    fit = fit_ml(ds, model_kind=cfg.model, filter_kind=cfg.filter,
                 M=cfg.particles, seed=cfg.seed)
    req = _irf_request(cfg, fit, ds)
    if cfg.bands:
        bundle = bootstrap_bands(ds, fit, req, B=cfg.bands,
                                 coverage=cfg.coverage,
                                 rng=np.random.default_rng([cfg.seed, 21]))
    else:
        sol = point_id(fit.rf)
        size = {"one_sd": sol.A22bar_inv, "unit": 1.0}.get(
            req.shock, req.shock)
        bundle = IrfBundle(responses=girf(fit.rf, sol, req), xi=0.0,
                           root_index=sol.root_index,
                           shock_size=float(size))
    _irf_frame(bundle, names).to_csv(outdir / "irf.csv", index=False)
    doc = {"shock": cfg.shock, "shock_size": bundle.shock_size,
           "xi": bundle.xi, "root_index": bundle.root_index,
           "impulse_period": ds.T + 1 if cfg.at is None else cfg.at,
           "horizon": cfg.horizon, "paths": cfg.draws,
           "bands": None if not cfg.bands else {"B": cfg.bands,
                                                "coverage": cfg.coverage}}
    _write_json(outdir / "irf.json", doc)
    print(f"impulse {bundle.shock_size:.4f} to the constrained equation, "
          f"{cfg.horizon} horizons")
    return ["irf.csv", "irf.json"]


def _cmd_idset(cfg: RunConfig, outdir: Path):
    ds, names = _load_dataset(cfg)
    fit = fit_ml(ds, model_kind=cfg.model, filter_kind=cfg.filter,
                 M=cfg.particles, seed=cfg.seed)
    iset = identified_set(fit.rf, R=cfg.xi_grid,
                          sign_restrictions=cfg.sign_restrict)

    sol_rows = []
    for s in iset.solutions:
        entries = [("coherency", s.coherency_value),
                   ("a22bar_inv", s.A22bar_inv)]
        entries += [(f"betabar_{j + 1}", v) for j, v in enumerate(s.betabar)]
        entries += [(f"gammabar_{j + 1}", v) for j, v in enumerate(s.gammabar)]
        for param, value in entries:
            sol_rows.append({"xi": s.xi, "root_index": s.root_index,
                             "param": param, "value": float(value)})
    pd.DataFrame(sol_rows,
                 columns=["xi", "root_index", "param", "value"]) \
        .to_csv(outdir / "solutions.csv", index=False)

    req = _irf_request(cfg, fit, ds)
    bundles = irf_identified_set(fit.rf, iset, req)
    frames = []
    for b in bundles:
        f = _irf_frame(b, names)
        f.insert(0, "root_index", b.root_index)
        f.insert(0, "xi", b.xi)
        frames.append(f)
    pd.concat(frames, ignore_index=True).to_csv(outdir / "idset_irf.csv",
                                                index=False)

    doc = {"n_solutions": len(iset.solutions),
           "sign_restricted": iset.sign_restricted,
           "policy_unidentified": iset.policy_unidentified,
           "diagnostics": iset.diagnostics}
    if fit.rf.k == 2:
        bb = bivariate_bounds(fit.rf.betatilde, fit.rf.Omega)
        ls = lambda_set(fit.rf.betatilde, fit.rf.Omega)
        doc["bivariate_bounds"] = {"case": bb.case,
                                   "lo": _finite_or_none(bb.lo),
                                   "hi": _finite_or_none(bb.hi)}
        doc["lambda_set"] = {"case": ls.case,
                             "pieces": [[float(a), float(b)]
                                        for a, b in ls.pieces]}
    _write_json(outdir / "idset.json", doc)
    print(f"{len(iset.solutions)} structural solutions on a "
          f"{cfg.xi_grid + 1}-point grid, {len(bundles)} response bundles")
    return ["solutions.csv", "idset_irf.csv", "idset.json"]


def _cmd_mc(cfg: RunConfig, outdir: Path):
    mcfg = McConfig(dgp_id=cfg.dgp, T=cfg.periods, n_rep=cfg.nrep,
                    M=cfg.particles, seed=cfg.seed)
    report = (run_mc_estimation if cfg.estimation_only else run_mc_lr)(mcfg)
    report.write_csv(outdir)
    report.write_json(outdir / "mc_report.json")
    outputs = ["params.csv", "mc_report.json"]
    outputs += [f"draws_{m}.csv" for m in sorted(report.estimates)]
    if report.rejections is not None:
        outputs += ["rejections.csv", "lr_stats.csv"]
        at_5 = report.rejections.query("level == 0.05")
        for _, r in at_5.iterrows():
            print(f"{r['test']} test, {r['method']}: rejection rate "
                  f"{r['rate']:.3f} at the 5% level")
    else:
        print(f"{cfg.nrep} replications of DGP {cfg.dgp} complete")
    return outputs


def _cmd_simulate(cfg: RunConfig, outdir: Path):
    rf = structural_to_reduced(make_dgp(cfg.dgp))
    ds, _ = simulate(rf, cfg.periods, init=np.zeros((rf.p, rf.k + 1)),
                     rng=np.random.default_rng(cfg.seed))
    export_csv(ds, outdir / "data.csv")
    n_bound = int(ds.D.sum())
    print(f"DGP {cfg.dgp}: {ds.T} observations, {n_bound} at the bound "
          f"({100.0 * n_bound / ds.T:.1f}%)")
    return ["data.csv"]


_HANDLERS = {"estimate": _cmd_estimate, "test": _cmd_test, "irf": _cmd_irf,
             "idset": _cmd_idset, "mc": _cmd_mc, "simulate": _cmd_simulate}


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p):
    p.add_argument("--config", metavar="PATH",
                   help="INI config file or a manifest.json from a prior run")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--seed", type=int)


def _add_data(p):
    p.add_argument("--data", metavar="CSV", help="input data file")
    p.add_argument("--constrained", metavar="COL",
                   help="name of the bound-constrained column")
    p.add_argument("--date-col", metavar="COL",
                   help="date column (default: first non-numeric)")
    p.add_argument("--bound", type=float, help="lower bound b")
    p.add_argument("--bind-tol", type=float,
                   help="treat values within this tolerance as at the bound")
    p.add_argument("--lags", type=int, help="lag order p")


def _add_model(p):
    p.add_argument("--model", choices=_MODELS)
    p.add_argument("--filter", choices=_FILTERS)
    p.add_argument("--particles", type=int,
                   help="simulation draws per period in the filter")


def _add_irf(p):
    p.add_argument("--horizon", type=int)
    p.add_argument("--shock", help="'one_sd', 'unit', or a number")
    p.add_argument("--at", type=int,
                   help="impulse period, 1-based (default: end of sample)")
    p.add_argument("--draws", type=int, help="Monte Carlo response paths")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cksvar",
        description="Structural VARs with an occasionally binding bound")
    try:
        v = importlib.metadata.version("cksvar")
    except importlib.metadata.PackageNotFoundError:
        v = "0+unknown"
    parser.add_argument("--version", action="version", version=v)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="fit one model by maximum likelihood")
    _add_common(p)
    _add_data(p)
    _add_model(p)

    p = sub.add_parser("test", help="likelihood-ratio tests of the nested "
                                    "restrictions")
    _add_common(p)
    _add_data(p)
    _add_model(p)
    p.add_argument("--bootstrap", type=int, metavar="B",
                   help="bootstrap replications (0 = asymptotic only)")

    p = sub.add_parser("irf", help="generalized impulse responses")
    _add_common(p)
    _add_data(p)
    _add_model(p)
    _add_irf(p)
    p.add_argument("--bands", type=int, metavar="B",
                   help="bootstrap band replications (0 = none)")
    p.add_argument("--coverage", type=float, help="band coverage in (0, 1)")

    p = sub.add_parser("idset", help="identified set over the partial-"
                                     "identification grid")
    _add_common(p)
    _add_data(p)
    _add_model(p)
    _add_irf(p)
    p.add_argument("--xi-grid", type=int, metavar="R", help="grid resolution")
    p.add_argument("--sign-restrict", action="store_true", default=None,
                   help="keep only solutions with a positive-impact "
                        "policy response")

    p = sub.add_parser("mc", help="Monte Carlo study on a built-in DGP")
    _add_common(p)
    p.add_argument("--dgp", type=int, choices=(1, 2, 3))
    p.add_argument("--nrep", type=int, help="number of replications")
    p.add_argument("--periods", type=int, help="sample length per replication")
    p.add_argument("--particles", type=int)
    p.add_argument("--estimation-only", action="store_true", default=None,
                   help="skip the likelihood-ratio part of the study")

    p = sub.add_parser("simulate", help="write a synthetic dataset from a "
                                        "built-in DGP")
    _add_common(p)
    p.add_argument("--dgp", type=int, choices=(1, 2, 3))
    p.add_argument("--periods", type=int)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(format="%(message)s", level=logging.INFO)
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        outputs = _HANDLERS[args.command](cfg, outdir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    _write_manifest(outdir, args.command, cfg, outputs)
    print(f"wrote {outdir}/manifest.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
