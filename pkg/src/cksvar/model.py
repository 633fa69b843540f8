"""Parameterizations of a structural VAR in which the last variable is
subject to an occasionally binding lower bound.

The structural system stacks the unconstrained block Y1 (k-1 series) and the
constrained variable Y2 = max(Y2*, b), with separate coefficients on the
observed and shadow values of Y2 and on p lags of both.  The reduced form is
the estimable object: coefficients Cbar on observed regressors, Cbarstar on
the censored latent lags, a kink coefficient betatilde in the Y1 equations,
and an error covariance Omega.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelError",
    "SingularityError",
    "DegenerateModelError",
    "CoherencyError",
    "StructuralParams",
    "ReducedForm",
    "CoherencyReport",
    "check_coherency",
    "structural_to_reduced",
    "count_free_parameters",
    "restriction_counts",
    "lagged_y2_columns",
]


class ModelError(ValueError):
    """Base error for invalid model inputs."""


class SingularityError(ModelError):
    """A required matrix block is singular."""


class DegenerateModelError(ModelError):
    """The model is degenerate (e.g. zero coherency denominator)."""


class CoherencyError(ModelError):
    """The coherency condition fails, so the system has no unique solution."""


def _as_vector(x, n, name):
    v = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if v.shape != (n,):
        raise ModelError(f"{name} must have {n} entries, got shape {np.shape(x)}")
    return v


def lagged_y2_columns(k, p, k0):
    """Column indices of the lagged constrained variable inside the q = k0 + k*p
    regressor block [exogenous, lag 1, ..., lag p]."""
    return np.array([k0 + j * k - 1 for j in range(1, p + 1)])


@dataclass(frozen=True)
class StructuralParams:
    """Structural coefficients.

    The system is, with eps ~ N(0, I_k),

        A11 Y1t + A12 Y2t + A12star Y2t*       = B1 Xt + B1star Xt* + eps1t
        A21 Y1t + A22 Y2t + A22star Y2t*       = B2 Xt + B2star Xt* + eps2t

    Xt holds k0 exogenous regressors and p lags of (Y1, Y2); Xt* holds p lags
    of Y2*.  B is k x q with q = k0 + k*p; Bstar is k x p.
    """

    A11: np.ndarray
    A12: np.ndarray
    A12star: np.ndarray
    A21: np.ndarray
    A22: float
    A22star: float
    B: np.ndarray
    Bstar: np.ndarray
    b: float = 0.0
    p: int = 1

    def __post_init__(self):
        A11 = np.asarray(self.A11, dtype=float)
        if A11.ndim != 2 or A11.shape[0] != A11.shape[1]:
            raise ModelError("A11 must be square")
        k = A11.shape[0] + 1
        if k < 2:
            raise ModelError("system dimension k must be >= 2")
        if int(self.p) < 1:
            raise ModelError("lag order p must be >= 1")
        object.__setattr__(self, "A11", A11)
        object.__setattr__(self, "A12", _as_vector(self.A12, k - 1, "A12"))
        object.__setattr__(self, "A12star", _as_vector(self.A12star, k - 1, "A12star"))
        object.__setattr__(self, "A21", _as_vector(self.A21, k - 1, "A21"))
        object.__setattr__(self, "A22", float(self.A22))
        object.__setattr__(self, "A22star", float(self.A22star))
        B = np.asarray(self.B, dtype=float)
        Bstar = np.asarray(self.Bstar, dtype=float)
        p = int(self.p)
        if B.ndim != 2 or B.shape[0] != k:
            raise ModelError(f"B must be {k} x q")
        if B.shape[1] < k * p:
            raise ModelError("B has too few columns for k lags of order p")
        if Bstar.shape != (k, p):
            raise ModelError(f"Bstar must be {k} x {p}")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Bstar", Bstar)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "p", p)
        for name in ("A11", "A12", "A12star", "A21", "B", "Bstar"):
            getattr(self, name).setflags(write=False)

    @property
    def k(self):
        return self.A11.shape[0] + 1

    @property
    def q(self):
        return self.B.shape[1]

    @property
    def k0(self):
        return self.q - self.k * self.p

    def Abar(self):
        """Left-hand matrix with Y2 and Y2* coefficients summed."""
        k = self.k
        out = np.empty((k, k))
        out[: k - 1, : k - 1] = self.A11
        out[: k - 1, k - 1] = self.A12 + self.A12star
        out[k - 1, : k - 1] = self.A21
        out[k - 1, k - 1] = self.A22 + self.A22star
        return out

    def Astar(self):
        """Left-hand matrix keeping only the Y2* coefficients."""
        k = self.k
        out = np.empty((k, k))
        out[: k - 1, : k - 1] = self.A11
        out[: k - 1, k - 1] = self.A12star
        out[k - 1, : k - 1] = self.A21
        out[k - 1, k - 1] = self.A22star
        return out


@dataclass(frozen=True)
class CoherencyReport:
    kappa: float
    coherent: bool


class ReducedForm:
    """Reduced-form parameters (psi).

    Stores the covariance through the (delta, chol(Omega_1.2), tau) split used
    during estimation, which keeps Omega positive definite by construction:
    tau^2 = Omega_22, delta = Omega_12 / tau^2, Omega_1.2 = Omega_11 -
    delta delta' tau^2.

    Parameters
    ----------
    Cbar : (k, q) coefficients on observed regressors [X0, lag 1, ..., lag p].
    Cbarstar : (k, p) coefficients on lagged censored latent values
        xbar_{t-j} = min(Ybar2*_{t-j} - b, 0).
    betatilde : (k-1,) kink coefficient in the Y1 equations.
    Omega : (k, k) symmetric positive definite error covariance.
    b : scalar bound.
    """

    __slots__ = ("Cbar", "Cbarstar", "betatilde", "b", "p", "k0",
                 "_delta", "_chol1", "_tau", "_omega")

    def __init__(self, Cbar, Cbarstar, betatilde, Omega, b=0.0, p=None, k0=None):
        Cbar = np.asarray(Cbar, dtype=float)
        Cbarstar = np.asarray(Cbarstar, dtype=float)
        if Cbar.ndim != 2 or Cbarstar.ndim != 2 or Cbar.shape[0] != Cbarstar.shape[0]:
            raise ModelError("Cbar and Cbarstar must be 2-D with matching row count")
        k = Cbar.shape[0]
        if p is None:
            p = Cbarstar.shape[1]
        p = int(p)
        if p < 1 or Cbarstar.shape[1] != p:
            raise ModelError("Cbarstar must have p >= 1 columns")
        q = Cbar.shape[1]
        if k0 is None:
            k0 = q - k * p
        k0 = int(k0)
        if k0 < 0 or k0 + k * p != q:
            raise ModelError(f"Cbar has {q} columns, expected k0 + k*p")
        betatilde = _as_vector(betatilde, k - 1, "betatilde")
        Omega = np.asarray(Omega, dtype=float)
        if Omega.shape != (k, k) or not np.allclose(Omega, Omega.T, atol=1e-10):
            raise ModelError("Omega must be k x k symmetric")
        tau2 = Omega[k - 1, k - 1]
        if tau2 <= 0:
            raise ModelError("Omega_22 must be positive")
        tau = np.sqrt(tau2)
        delta = Omega[: k - 1, k - 1] / tau2
        o1dot2 = Omega[: k - 1, : k - 1] - np.outer(delta, delta) * tau2
        o1dot2 = 0.5 * (o1dot2 + o1dot2.T)
        try:
            chol1 = np.linalg.cholesky(o1dot2) if k > 1 else np.zeros((0, 0))
        except np.linalg.LinAlgError:
            raise ModelError("Omega is not positive definite") from None
        self.Cbar = Cbar
        self.Cbarstar = Cbarstar
        self.betatilde = betatilde
        self.b = float(b)
        self.p = p
        self.k0 = k0
        self._delta = delta
        self._chol1 = chol1
        self._tau = float(tau)
        self._omega = None
        for a in (self.Cbar, self.Cbarstar, self.betatilde, self._delta, self._chol1):
            a.setflags(write=False)

    @classmethod
    def from_psi(cls, Cbar, Cbarstar, betatilde, delta, chol1, tau, b=0.0):
        """Build from the estimation parameterization of the covariance."""
        k = np.asarray(Cbar).shape[0]
        delta = _as_vector(delta, k - 1, "delta")
        chol1 = np.asarray(chol1, dtype=float)
        tau = float(tau)
        o1dot2 = chol1 @ chol1.T
        omega = np.empty((k, k))
        omega[: k - 1, : k - 1] = o1dot2 + np.outer(delta, delta) * tau ** 2
        omega[: k - 1, k - 1] = delta * tau ** 2
        omega[k - 1, : k - 1] = delta * tau ** 2
        omega[k - 1, k - 1] = tau ** 2
        return cls(Cbar, Cbarstar, betatilde, omega, b=b)

    @property
    def k(self):
        return self.Cbar.shape[0]

    @property
    def q(self):
        return self.Cbar.shape[1]

    @property
    def tau(self):
        return self._tau

    @property
    def delta(self):
        return self._delta

    @property
    def Omega_1dot2(self):
        return self._chol1 @ self._chol1.T

    @property
    def chol_Omega_1dot2(self):
        return self._chol1

    @property
    def Omega(self):
        if self._omega is None:
            k = self.k
            tau2 = self._tau ** 2
            omega = np.empty((k, k))
            omega[: k - 1, : k - 1] = self.Omega_1dot2 + np.outer(self._delta, self._delta) * tau2
            omega[: k - 1, k - 1] = self._delta * tau2
            omega[k - 1, : k - 1] = self._delta * tau2
            omega[k - 1, k - 1] = tau2
            omega.setflags(write=False)
            self._omega = omega
        return self._omega

    def is_ksvar(self, atol=0.0):
        return bool(np.all(np.abs(self.Cbarstar) <= atol))

    def is_csvar(self, atol=0.0):
        if not np.all(np.abs(self.betatilde) <= atol):
            return False
        cols = lagged_y2_columns(self.k, self.p, self.k0)
        return bool(np.all(np.abs(self.Cbar[:, cols] - self.Cbarstar) <= atol))

    def replace(self, **kw):
        args = dict(Cbar=self.Cbar, Cbarstar=self.Cbarstar, betatilde=self.betatilde,
                    Omega=self.Omega, b=self.b, p=self.p, k0=self.k0)
        args.update(kw)
        return ReducedForm(**args)

    def __repr__(self):
        return (f"ReducedForm(k={self.k}, p={self.p}, k0={self.k0}, b={self.b}, "
                f"tau={self._tau:.4g})")


def check_coherency(s: StructuralParams) -> CoherencyReport:
    """Existence/uniqueness check: kappa must be positive.

    kappa = (Abar22 - A21 A11^-1 Abar12) / (A22star - A21 A11^-1 A12star),
    equal to det(Abar)/det(Astar); it does not involve B or Bstar.
    """
    A12bar = s.A12 + s.A12star
    A22bar = s.A22 + s.A22star
    try:
        t = np.linalg.solve(s.A11, np.column_stack([A12bar, s.A12star]))
    except np.linalg.LinAlgError:
        raise SingularityError("A11 is singular; reorder the unconstrained block") from None
    if not np.all(np.isfinite(t)):
        raise SingularityError("A11 solve produced non-finite values")
    num = A22bar - s.A21 @ t[:, 0]
    den = s.A22star - s.A21 @ t[:, 1]
    if abs(den) < 1e-14 * max(1.0, abs(s.A22star), abs(num)):
        raise DegenerateModelError("coherency denominator A22star - A21 A11^-1 A12star is zero")
    kappa = num / den
    return CoherencyReport(kappa=float(kappa), coherent=bool(kappa > 0))


def structural_to_reduced(s: StructuralParams) -> ReducedForm:
    """Map structural parameters to the reduced form.

    Omega = Abar^-1 Abar^-T; the lagged-Y2 columns of Abar^-1 B are augmented
    by the corresponding columns of Abar^-1 Bstar; Cbarstar = kappa Abar^-1
    Bstar.  betatilde and kappa come from the rows of Astar^-1 Abar, which
    equals [[I, -betatilde], [0, kappa]].
    """
    rep = check_coherency(s)
    if not rep.coherent:
        raise CoherencyError(f"model incoherent: kappa = {rep.kappa:.6g} <= 0")
    k = s.k
    Abar = s.Abar()
    eye_and_rhs = np.concatenate([s.B, s.Bstar], axis=1)
    sol = np.linalg.solve(Abar, eye_and_rhs)
    C = sol[:, : s.q]
    Cstar = sol[:, s.q:]
    Abar_inv = np.linalg.solve(Abar, np.eye(k))
    omega = Abar_inv @ Abar_inv.T
    M = np.linalg.solve(s.Astar(), Abar)
    betatilde = -M[: k - 1, k - 1]
    cbar = C.copy()
    cols = lagged_y2_columns(k, s.p, s.k0)
    cbar[:, cols] += Cstar
    cbarstar = rep.kappa * Cstar
    return ReducedForm(cbar, cbarstar, betatilde, omega, b=s.b, p=s.p, k0=s.k0)


def count_free_parameters(k, p, k0):
    """Free-parameter counts (reduced form, structural form, and the
    under-identification gap k(k-1)/2 + 1)."""
    if k < 2 or p < 1 or k0 < 0:
        raise ValueError("need k >= 2, p >= 1, k0 >= 0")
    n_reduced = k0 * k + k * k * p + k * p + (k - 1) + k * (k + 1) // 2
    n_structural = k0 * k + k * k * p + k * p + k * k + k
    return n_reduced, n_structural, n_structural - n_reduced


def restriction_counts(k, p):
    """Number of reduced-form restrictions imposed by each special case."""
    return {"ksvar": k * p, "csvar": k * p + (k - 1)}
