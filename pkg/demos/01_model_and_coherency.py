"""Structural parameterization, coherency, and the reduced-form mapping.

A bivariate system: Y1 is an outcome (inflation, say), Y2 a policy rate
censored below at b. The policy rate reacts to Y1 within the period; when
the bound binds, a latent shadow value Y2* keeps moving and can feed back
into Y1 with a coefficient of its own.
"""

import numpy as np

from cksvar.model import (
    CoherencyError,
    StructuralParams,
    check_coherency,
    count_free_parameters,
    restriction_counts,
    structural_to_reduced,
)

# ---------------------------------------------------------------- setup
# One lag, intercept plus lag coefficients in B, shadow-lag loadings in
# Bstar. A22 multiplies the observed rate, A22star the shadow value.
s = StructuralParams(
    A11=np.array([[1.0]]),
    A12=[0.3],          # observed rate in the Y1 equation
    A12star=[0.1],      # shadow rate in the Y1 equation
    A21=[-0.5],         # Y1 in the policy equation
    A22=0.0,
    A22star=1.0,        # the policy rule moves the shadow value
    B=np.array([[0.2, 0.6, -0.1], [0.1, 0.4, 0.5]]),
    Bstar=np.array([[0.05], [0.2]]),
    b=0.0,
    p=1,
)

rep = check_coherency(s)
print(f"kappa = {rep.kappa:.4f}  -> coherent: {rep.coherent}")

rf = structural_to_reduced(s)
print("\nreduced form:")
print("  Cbar      =", np.array2string(rf.Cbar, precision=4))
print("  Cbarstar  =", np.array2string(rf.Cbarstar, precision=4))
print("  betatilde =", np.array2string(rf.betatilde, precision=4))
print("  Omega     =", np.array2string(rf.Omega, precision=4))

# ------------------------------------------------- an incoherent system
# Give the observed rate and the shadow rate opposite-signed loadings in
# the policy equation: the censored and uncensored regimes then disagree
# about which one applies, kappa turns negative, and the model stops
# having a unique solution for Y2.
bad = StructuralParams(
    A11=np.array([[1.0]]),
    A12=[0.3],
    A12star=[0.1],
    A21=[0.0],
    A22=1.2,
    A22star=-0.6,
    B=s.B,
    Bstar=s.Bstar,
)
print(f"\nbroken system: kappa = {check_coherency(bad).kappa:.4f}")
try:
    structural_to_reduced(bad)
except CoherencyError as err:
    print("structural_to_reduced refuses:", err)

# ------------------------------------------------------ parameter counts
# The reduced form never pins down every structural coefficient: the gap
# below is what identification arguments (or restrictions) must close.
n_red, n_str, gap = count_free_parameters(k=2, p=1, k0=1)
print(f"\nfree parameters: reduced {n_red}, structural {n_str}, gap {gap}")
print("restrictions imposed by the special cases:", restriction_counts(k=2, p=1))
