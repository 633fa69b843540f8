"""Generate the synthetic quarterly dataset shipped as data/synthetic_rates.csv.

The real policy-rate vintage behind the package's headline application is
not redistributable, so the repository ships a stand-in with the same
shape: 234 quarterly observations of inflation, an output gap, and a
short rate bounded below at 0.2, with about 11 percent of the sample at
the bound, most of it in one long spell late in the sample.

The process is a censored-and-kinked system chosen by hand for plausible
persistence; the seed was picked so the bound share lands on 26/234.
Rerunning this script reproduces the CSV byte for byte.
"""

import pathlib

import numpy as np

from cksvar.cli import export_csv
from cksvar.model import ReducedForm
from cksvar.simulate import simulate

BOUND = 0.2
SEED = 49
T = 234


def build_process() -> ReducedForm:
    """Quarterly [inflation, gap, rate] system, rate censored at 0.2."""
    Cbar = np.array([
        # const  infl-1  gap-1  rate-1  infl-2  gap-2  rate-2
        [0.30,   0.72,   0.08,  -0.02,  0.12,   0.00,   0.00],
        [0.05,   0.00,   1.15,  -0.08,  0.00,  -0.30,   0.02],
        [0.15,   0.25,   0.25,   1.05, -0.10,  -0.05,  -0.20],
    ])
    # shadow-rate kink: the gap min(rate* - b, 0) feeds back mildly
    Cbarstar = np.array([[-0.02, 0.0], [0.05, 0.0], [0.30, 0.0]])
    betatilde = np.array([-0.05, -0.15])
    Omega = np.array([[0.36, 0.05, 0.04],
                      [0.05, 0.64, 0.10],
                      [0.04, 0.10, 0.49]])
    return ReducedForm(Cbar=Cbar, Cbarstar=Cbarstar, betatilde=betatilde,
                       Omega=Omega, b=BOUND)


def main():
    rf = build_process()
    init = np.array([[3.0, 0.0, 4.5, 4.5], [3.0, 0.0, 4.5, 4.5]])
    data, latent = simulate(rf, T, init=init, rng=np.random.default_rng(SEED))
    out = pathlib.Path(__file__).resolve().parents[1] / "data" / "synthetic_rates.csv"
    out.parent.mkdir(exist_ok=True)
    export_csv(data, out, names=["infl", "gap", "rate"], start="1959-01-01")
    share = data.D.mean()
    print(f"wrote {out} ({T} quarters, {data.D.sum()} at the bound, "
          f"share {share:.3f})")
    print(f"shadow rate bottoms at {latent.Ybar2star.min():.2f} "
          f"against a bound of {BOUND}")


if __name__ == "__main__":
    main()
