"""Mapping reduced-form parameters to structural objects.

The structural system normalizes the constrained equation so a policy shock
eps2 moves Y2 one-for-one through Abar22^{-1}.  With
gamma0 := Omega_12 / Omega_11 (bivariate case), the reduced-form impact
coefficient betatilde identifies the causal effect betabar only up to the
attenuation from the latent regime, indexed by xi in [0, 1):

    betatilde = (1 - xi) (I - xi betabar gammabar')^{-1} betabar

At xi = 0 the map is invertible (betabar = betatilde); for xi > 0 the
defining equation is polynomial and can have several solutions, so the
identified set is traced on a grid of xi values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import CoherencyError, DegenerateModelError, ModelError, ReducedForm

__all__ = [
    "StructuralSolution",
    "IdentifiedSet",
    "BivariateBounds",
    "LambdaSet",
    "point_id",
    "solve_betabar",
    "identified_set",
    "bivariate_bounds",
    "lambda_set",
    "lambda_from_xi",
]


@dataclass(frozen=True)
class StructuralSolution:
    """One coherent structural rotation consistent with the reduced form.

    betabar: impact of the policy shock on the unconstrained block.
    gammabar: loading of the unconstrained block in the policy equation.
    A22bar_inv: structural scale of the policy shock (one-sd impact on Y2).
    xi: censoring-attenuation index this solution was computed at.
    root_index: position among the solutions found at this xi.
    """

    betabar: np.ndarray
    gammabar: np.ndarray
    A22bar_inv: float
    xi: float
    root_index: int

    def __post_init__(self):
        bb = np.asarray(self.betabar, dtype=float).reshape(-1)
        gb = np.asarray(self.gammabar, dtype=float).reshape(-1)
        if bb.shape != gb.shape:
            raise ModelError("betabar and gammabar must have equal length")
        object.__setattr__(self, "betabar", bb)
        object.__setattr__(self, "gammabar", gb)
        object.__setattr__(self, "A22bar_inv", float(self.A22bar_inv))
        object.__setattr__(self, "xi", float(self.xi))
        bb.setflags(write=False)
        gb.setflags(write=False)

    @property
    def coherency_value(self):
        gb = float(self.gammabar @ self.betabar)
        return (1.0 - gb) * (1.0 - self.xi * gb)


@dataclass(frozen=True)
class IdentifiedSet:
    """Solutions collected over the xi grid (always including xi = 0)."""

    solutions: tuple
    R: int
    sign_restricted: bool
    xi_grid: np.ndarray
    policy_unidentified: bool
    diagnostics: dict

    def betabars(self):
        return np.array([s.betabar for s in self.solutions])

    def xis(self):
        return np.array([s.xi for s in self.solutions])


def _blocks(Omega):
    Omega = np.asarray(Omega, dtype=float)
    k = Omega.shape[0]
    return Omega[: k - 1, : k - 1], Omega[: k - 1, k - 1], Omega[k - 1, k - 1]


def _gammabar_of(betabar, Omega):
    """Solve the orthogonality condition
    (Omega_11 - betabar Omega_12') gammabar = Omega_12 - Omega_22 betabar."""
    O11, O12, O22 = _blocks(Omega)
    M = O11 - np.outer(betabar, O12)
    rhs = O12 - O22 * betabar
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        raise DegenerateModelError(
            "orthogonality system is singular at this betabar") from None
    if not np.all(np.isfinite(sol)):
        raise DegenerateModelError(
            "orthogonality system is singular at this betabar")
    return sol


def _a22bar_inv(gammabar, Omega):
    k = Omega.shape[0]
    v = np.concatenate([-gammabar, [1.0]])
    var2 = float(v @ Omega @ v)
    if var2 <= 0:
        raise DegenerateModelError("policy-shock variance is not positive")
    return math.sqrt(var2)


def _make_solution(betabar, Omega, xi, root_index):
    """Full solution from betabar, or None when coherency fails."""
    gb = _gammabar_of(betabar, Omega)
    chk = float(gb @ betabar)
    if (1.0 - chk) * (1.0 - xi * chk) <= 0.0:
        return None
    return StructuralSolution(
        betabar=betabar,
        gammabar=gb,
        A22bar_inv=_a22bar_inv(gb, Omega),
        xi=xi,
        root_index=root_index,
    )


def point_id(rf: ReducedForm) -> StructuralSolution:
    """The xi = 0 solution: betabar = betatilde, gammabar and the shock scale
    from the orthogonality condition."""
    sol = _make_solution(rf.betatilde.copy(), rf.Omega, 0.0, 0)
    if sol is None:
        raise CoherencyError(
            "the xi=0 solution violates the coherency condition")
    return sol


def _build_poly_system(betatilde, Omega, xi):
    """Matrix Atilde and vector btilde of the defining equation
    betatilde - Atilde betabar + betabar (btilde' betabar) = 0."""
    O11, O12, O22 = _blocks(Omega)
    k1 = len(betatilde)
    O11inv_O12 = np.linalg.solve(O11, O12)
    a = float(O12 @ np.linalg.solve(O11, betatilde))
    h = float(O12 @ O11inv_O12)
    At = np.outer(betatilde, O11inv_O12) + (xi * a + 1.0 - xi) * np.eye(k1)
    bt = xi * np.linalg.solve(
        O11, ((O22 - h) * np.eye(k1) + np.outer(O12, O11inv_O12)) @ betatilde
    ) + (1.0 - xi) * O11inv_O12
    return At, bt


def _z_poly_roots(At, bt, betatilde):
    """Roots of the scalar resultant in z = btilde' betabar.

    Uses the Leverrier recursion for the characteristic polynomial of At and
    the matching adjugate expansion, so the polynomial has degree k and its
    real roots index all candidate solutions."""
    m = At.shape[0]
    Ms = np.eye(m)
    coeffs = np.zeros(m + 2)
    coeffs[0] = 1.0
    proj = np.zeros(m + 2)
    for i in range(1, m + 1):
        proj[i + 1] = bt @ Ms @ betatilde
        ci = -np.trace(At @ Ms) / i
        Ms = At @ Ms + ci * np.eye(m)
        coeffs[i] = ci
    return np.roots(coeffs + proj)


def _reproduces_betatilde(betabar, gammabar, betatilde, xi):
    k1 = len(betabar)
    M = np.eye(k1) - xi * np.outer(betabar, gammabar)
    try:
        implied = (1.0 - xi) * np.linalg.solve(M, betabar)
    except np.linalg.LinAlgError:
        return False
    scale = max(1.0, float(np.abs(betatilde).max(initial=0.0)))
    return float(np.abs(implied - betatilde).max(initial=0.0)) <= 1e-8 * scale


def solve_betabar(rf: ReducedForm, xi) -> list:
    """All coherent structural solutions at a given xi in [0, 1).

    Solves the defining polynomial system by reducing it to a degree-k
    scalar polynomial in z = btilde' betabar, recovering betabar for each
    real root and polishing with Newton steps on the vector equation.  An
    empty list is a valid outcome (no real solution at this xi).
    """
    xi = float(xi)
    if not 0.0 <= xi < 1.0:
        raise ValueError("xi must lie in [0, 1)")
    if xi == 0.0:
        try:
            return [point_id(rf)]
        except CoherencyError:
            return []
    betatilde = rf.betatilde
    Omega = rf.Omega
    k1 = len(betatilde)
    At, bt = _build_poly_system(betatilde, Omega, xi)
    scale = max(1.0, float(np.abs(betatilde).max(initial=0.0)))

    candidates = []
    for z in _z_poly_roots(At, bt, betatilde):
        if abs(z.imag) > 1e-8 * max(1.0, abs(z.real)):
            continue
        M = At - z.real * np.eye(k1)
        try:
            cand = np.linalg.solve(M, betatilde)
        except np.linalg.LinAlgError:
            cand = np.linalg.lstsq(M, betatilde, rcond=None)[0]
        if not np.all(np.isfinite(cand)):
            continue
        # Newton polish on F(b) = betatilde - At b + b (bt'b)
        for _ in range(50):
            F = betatilde - At @ cand + cand * (bt @ cand)
            if np.abs(F).max(initial=0.0) < 1e-12 * scale:
                break
            J = -At + (bt @ cand) * np.eye(k1) + np.outer(cand, bt)
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                break
            if np.abs(step).max() > 1e6:
                break
            cand = cand + step
        F = betatilde - At @ cand + cand * (bt @ cand)
        if np.abs(F).max(initial=0.0) >= 1e-8 * scale:
            continue
        candidates.append(cand)

    sols = []
    for cand in candidates:
        if any(np.abs(cand - prev).max() <= 1e-6 * max(1.0, np.abs(prev).max())
               for prev in (s.betabar for s in sols)):
            continue
        try:
            sol = _make_solution(cand, Omega, xi, 0)
        except DegenerateModelError:
            continue
        if sol is None:
            continue
        if not _reproduces_betatilde(sol.betabar, sol.gammabar, betatilde, xi):
            continue
        sols.append(sol)

    sols.sort(key=lambda s: tuple(s.betabar))
    return [
        StructuralSolution(betabar=s.betabar, gammabar=s.gammabar,
                           A22bar_inv=s.A22bar_inv, xi=s.xi, root_index=i)
        for i, s in enumerate(sols)
    ]


_REFINE_LEVELS = 60


def _boundary_refinement(rf: ReducedForm, R) -> list:
    """Extra solutions at xi values geometrically close to 0 and to 1.

    The solution branches are rational in xi and can move arbitrarily fast
    near the ends of the interval, so a uniform grid with spacing 1/(R+1)
    can understate the extent of the set there. Halving the first and last
    grid offsets down to machine scale pins the set boundary without
    assuming a particular dimension or closed form. The ladder is fixed so
    the evaluated xi values do not depend on any downstream filtering.
    """
    h = 1.0 / (R + 1.0)
    out = []
    for upper in (False, True):
        step = h
        for _ in range(_REFINE_LEVELS):
            step *= 0.5
            xi = 1.0 - step if upper else step
            if not 0.0 < xi < 1.0:
                break
            sols = solve_betabar(rf, xi)
            if not sols:
                # branches gone this close to the end stay gone
                break
            out.extend(sols)
    return out


def identified_set(rf: ReducedForm, R=100, sign_restrictions=False,
                   refine_endpoints=True) -> IdentifiedSet:
    """Trace the structural solutions over xi in {0} + {r/(R+1): r=1..R}.

    With sign_restrictions, solutions whose impact response of Y2 to its own
    shock would be negative (1 - gammabar'betabar < 0) are dropped. With
    refine_endpoints (default), extra xi values accumulating at 0 and 1 are
    added so the reported set reaches its boundary even when a branch moves
    steeply near the ends; set it False for the plain uniform grid.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    xi_grid = np.concatenate([[0.0], np.arange(1, R + 1) / (R + 1.0)])
    solutions = []
    dropped_sign = 0
    empty_points = 0
    for xi in xi_grid:
        sols = solve_betabar(rf, xi)
        if sign_restrictions:
            kept = [s for s in sols if float(s.gammabar @ s.betabar) < 1.0]
            dropped_sign += len(sols) - len(kept)
            sols = kept
        if not sols:
            empty_points += 1
        solutions.extend(sols)
    n_refined = 0
    if refine_endpoints:
        extra = _boundary_refinement(rf, R)
        if sign_restrictions:
            kept = [s for s in extra if float(s.gammabar @ s.betabar) < 1.0]
            dropped_sign += len(extra) - len(kept)
            extra = kept
        n_refined = len(extra)
        solutions.extend(extra)
    policy_unidentified = bool(np.all(np.abs(rf.betatilde) < 1e-12))
    diagnostics = {
        "n_grid": len(xi_grid),
        "n_solutions": len(solutions),
        "empty_grid_points": empty_points,
        "dropped_by_sign": dropped_sign,
        "refined_solutions": n_refined,
    }
    return IdentifiedSet(
        solutions=tuple(solutions),
        R=int(R),
        sign_restricted=bool(sign_restrictions),
        xi_grid=xi_grid,
        policy_unidentified=policy_unidentified,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class BivariateBounds:
    """Analytic identified set for the scalar causal effect (k = 2).

    case is one of 'real_line', 'half_line', 'interval', 'infeasible';
    [lo, hi] are the (possibly infinite) endpoints when applicable.
    """

    case: str
    lo: float
    hi: float


def bivariate_bounds(betatilde, Omega) -> BivariateBounds:
    """Sharp bounds on betabar from (betatilde, Omega) without tracing xi.

    With gamma0 = omega_12/omega_11: opposite signs or betatilde = 0 leave
    the effect unbounded; zero covariance gives a half line starting at
    betatilde; 0 < betatilde*gamma0 <= 1 gives the attenuation interval
    between betatilde and 1/gamma0; betatilde*gamma0 > 1 is infeasible.
    """
    Omega = np.asarray(Omega, dtype=float)
    if Omega.shape != (2, 2):
        raise ModelError("Omega must be 2x2")
    if not np.allclose(Omega, Omega.T) or np.any(np.linalg.eigvalsh(Omega) <= 0):
        raise ModelError("Omega must be symmetric positive definite")
    bt = float(np.asarray(betatilde).reshape(-1)[0]) if np.ndim(betatilde) \
        else float(betatilde)
    o11, o12 = Omega[0, 0], Omega[0, 1]
    gamma0 = o12 / o11
    if bt == 0.0 or bt * gamma0 < 0.0:
        return BivariateBounds("real_line", -math.inf, math.inf)
    if o12 == 0.0:
        if bt < 0.0:
            return BivariateBounds("half_line", -math.inf, bt)
        return BivariateBounds("half_line", bt, math.inf)
    if bt * gamma0 <= 1.0:
        if bt < 0.0:
            return BivariateBounds("interval", 1.0 / gamma0, bt)
        return BivariateBounds("interval", bt, 1.0 / gamma0)
    return BivariateBounds("infeasible", math.nan, math.nan)


@dataclass(frozen=True)
class LambdaSet:
    """Set of censoring frequencies lambda compatible with (betatilde, Omega).

    The set is {lambda : D(lambda) >= 0} for the quadratic
    D(lambda) = alpha lambda^2 - 2 beta_c lambda + c with
    alpha = c = (omega_11 - betatilde omega_12)^2.  case describes the
    unclamped shape ('real_line', 'two_rays', 'ray'); pieces are the closed
    intervals after intersecting with [0, 1] when clamped.
    """

    case: str
    pieces: tuple
    alpha: float
    beta_c: float
    clamped: bool

    def disc(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.alpha * lam**2 - 2.0 * self.beta_c * lam + self.alpha

    def contains(self, lam):
        return any(lo - 1e-12 <= lam <= hi + 1e-12 for lo, hi in self.pieces)


def _clamp_pieces(pieces):
    out = []
    for lo, hi in pieces:
        lo2, hi2 = max(lo, 0.0), min(hi, 1.0)
        if lo2 <= hi2:
            out.append((lo2, hi2))
    return tuple(out)


def lambda_set(betatilde, Omega, clamp_unit=True) -> LambdaSet:
    """Identified set for the frequency of censoring lambda (k = 2)."""
    Omega = np.asarray(Omega, dtype=float)
    if Omega.shape != (2, 2):
        raise ModelError("Omega must be 2x2")
    bt = float(np.asarray(betatilde).reshape(-1)[0]) if np.ndim(betatilde) \
        else float(betatilde)
    o11, o12, o22 = Omega[0, 0], Omega[0, 1], Omega[1, 1]
    alpha = (o11 - bt * o12) ** 2
    beta_c = (o11**2 - bt**2 * o12**2 - 2.0 * bt * o11 * o12
              + 2.0 * bt**2 * o11 * o22)
    if alpha > 0.0:
        disc = beta_c**2 - alpha**2
        if disc <= 0.0:
            case, pieces = "real_line", ((-math.inf, math.inf),)
        else:
            sq = math.sqrt(disc)
            # the roots multiply to exactly one; compute the large-magnitude
            # one first to avoid cancellation in beta_c -+ sqrt(disc)
            big = (beta_c + math.copysign(sq, beta_c)) / alpha
            other = 1.0 / big
            lo_root, hi_root = min(big, other), max(big, other)
            case = "two_rays"
            pieces = ((-math.inf, lo_root), (hi_root, math.inf))
    else:
        # D(lambda) = -2 beta_c lambda; beta_c > 0 under positive definiteness
        if beta_c > 0.0:
            case, pieces = "ray", ((-math.inf, 0.0),)
        elif beta_c < 0.0:
            case, pieces = "ray", ((0.0, math.inf),)
        else:
            case, pieces = "real_line", ((-math.inf, math.inf),)
    if clamp_unit:
        pieces = _clamp_pieces(pieces)
    return LambdaSet(case=case, pieces=pieces, alpha=alpha, beta_c=beta_c,
                     clamped=bool(clamp_unit))


def lambda_from_xi(xi_set, zeta) -> np.ndarray:
    """Convert xi values to lambda = xi / zeta, keeping those in [0, 1]."""
    zeta = float(zeta)
    if zeta <= 0.0:
        raise ValueError("zeta must be positive")
    if isinstance(xi_set, IdentifiedSet):
        xis = np.unique(xi_set.xis())
    else:
        xis = np.unique(np.asarray(xi_set, dtype=float).reshape(-1))
    lam = xis / zeta
    return lam[(lam >= 0.0) & (lam <= 1.0)]
