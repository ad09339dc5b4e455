"""Discrete verification of the functional inequalities behind the certificates.

Each check evaluates both sides of one inequality on concrete grid fields
and reports the slack. Three of them (Holder11, Holder13, Jensen14) are
exact for discrete sums, so any slack beyond round-off is a bug; Sobolev10
is a continuum embedding checked with a discretization allowance; the
composite DissipationBound stacks all of them and gets the widest tolerance.

Tolerance semantics: a report passes iff
``slack >= -tol * max(|lhs|, |rhs|, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fields
from .fields import FluidState, Grid
from .thresholds import (
    ExponentParams,
    condition15,
    condition15_value,
    internal_energy_exponent,
    momentum_K1,
    sobolev_K,
)

TOL_EXACT = 1e-10
TOL_DISCRETIZATION = 0.05
TOL_COMPOSITE = 0.10

GRADIENT_FULL = "full"
GRADIENT_SYMMETRIC = "symmetric"

CHECK_NAMES = ("Sobolev10", "Holder11", "Holder13", "Jensen14", "Momentum16",
               "DissipationBound")


@dataclass(frozen=True)
class InequalityReport:
    """Both sides of one verified inequality plus pass/fail."""

    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    tol: float
    context: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "passed": self.passed,
            "tol": self.tol,
            "context": self.context,
        }


def _report(name: str, lhs: float, rhs: float, tol: float,
            context: dict) -> InequalityReport:
    slack = rhs - lhs
    passed = slack >= -tol * max(abs(lhs), abs(rhs), 1.0)
    return InequalityReport(name=name, lhs=float(lhs), rhs=float(rhs),
                            slack=float(slack), passed=bool(passed), tol=tol,
                            context=context)


def verify_sobolev10(u: np.ndarray, grid: Grid, q: float,
                     gradient_choice: str = GRADIENT_FULL,
                     tol: float = TOL_DISCRETIZATION) -> InequalityReport:
    """Embedding bound (int |u|^{qn/(n-q)})^{(n-q)/n} <= K int |Gu|^q.

    G is the full velocity Jacobian or its symmetric part, per
    `gradient_choice`; K = q(n-1)/(2(n-q)). The symmetric choice makes the
    verified claim strictly stronger (|sym Gu| <= |Gu| pointwise).
    """
    n = grid.n
    if not 1.0 < q < n:
        raise ValueError(f"q must lie in (1, n) = (1, {n}), got {q}")
    if gradient_choice not in (GRADIENT_FULL, GRADIENT_SYMMETRIC):
        raise ValueError(f"unknown gradient choice {gradient_choice!r}")
    K = sobolev_K(n, q)
    q_star = q * n / (n - q)
    u_mag = fields.vector_magnitude(u)
    lhs = fields.integrate(u_mag ** q_star, grid) ** ((n - q) / n)
    if gradient_choice == GRADIENT_FULL:
        G = fields.gradient(u, grid)
    else:
        G = fields.shear_rate(u, grid)
    rhs = K * fields.integrate(fields.tensor_magnitude(G) ** q, grid)
    return _report("Sobolev10", lhs, rhs, tol,
                   {"q": q, "n": n, "K": K, "gradient": gradient_choice})


def verify_holder11(rho: np.ndarray, grid: Grid, sigma: float, gamma: float,
                    tol: float = TOL_EXACT) -> InequalityReport:
    """Interpolation int rho^sigma <= (int rho)^a (int rho^gamma)^b.

    a = (gamma-sigma)/(gamma-1), b = (sigma-1)/(gamma-1). Exact for
    discrete sums; equality at constant rho.
    """
    if not 1.0 < sigma < gamma:
        raise ValueError(f"sigma must lie in (1, gamma) = (1, {gamma}), got {sigma}")
    if np.any(rho < 0):
        raise ValueError("density must be nonnegative")
    lhs = fields.integrate(rho ** sigma, grid)
    mass = fields.integrate(rho, grid)
    gam_int = fields.integrate(rho ** gamma, grid)
    rhs = mass ** ((gamma - sigma) / (gamma - 1.0)) \
        * gam_int ** ((sigma - 1.0) / (gamma - 1.0))
    return _report("Holder11", lhs, rhs, tol,
                   {"sigma": sigma, "gamma": gamma})


def _momentum_exponents(n: int, q: float) -> tuple[float, float]:
    """Conjugate pair for the momentum bound: rho power a, |u| power qn/(n-q)."""
    if not 1.0 < q < n:
        raise ValueError(f"q must lie in (1, n) = (1, {n}), got {q}")
    a = q * n / (n * (q - 1.0) + q)
    u_pow = q * n / (n - q)
    return a, u_pow


def verify_holder13(rho: np.ndarray, u: np.ndarray, grid: Grid, q: float,
                    tol: float = TOL_EXACT) -> InequalityReport:
    """Momentum bound |int rho u| <= (int rho^a)^{1/a} (int |u|^{a'})^{1/a'}.

    a = qn/(n(q-1)+q) and a' = qn/(n-q) are conjugate, so this is exact for
    discrete sums.
    """
    n = grid.n
    a, u_pow = _momentum_exponents(n, q)
    if np.any(rho < 0):
        raise ValueError("density must be nonnegative")
    vol = grid.cell_volume
    P = np.array([float(np.sum(rho * u[i])) * vol for i in range(n)])
    lhs = float(np.sqrt(np.sum(P ** 2)))
    u_mag = fields.vector_magnitude(u)
    rhs = fields.integrate(rho ** a, grid) ** (1.0 / a) \
        * fields.integrate(u_mag ** u_pow, grid) ** ((n - q) / (q * n))
    return _report("Holder13", lhs, rhs, tol, {"q": q, "n": n})


def verify_jensen14(rho: np.ndarray, grid: Grid, q: float, gamma: float,
                    A: float, m: float | None = None,
                    tol: float = TOL_EXACT) -> InequalityReport:
    """Density-moment bound ((1/m) int rho^a)^J <= (int rho^gamma)/m.

    J = (gamma-1)(n(q-1)+q)/(n-q). Valid only when J >= 1 (the convexity
    condition); refuses to report otherwise since the direction is then not
    guaranteed. Equality when rho is uniform on its support.
    """
    n = grid.n
    a, _ = _momentum_exponents(n, q)
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    if not condition15(n, gamma, q):
        raise ValueError(
            "Jensen validity condition fails "
            f"((gamma-1)*(n*(q-1)+q)/(n-q) = {condition15_value(n, gamma, q):.6g} < 1); "
            "inequality direction not guaranteed"
        )
    if np.any(rho < 0):
        raise ValueError("density must be nonnegative")
    J = condition15_value(n, gamma, q)
    if m is None:
        m = fields.integrate(rho, grid)
    if not m > 0:
        raise ValueError(f"total mass must be positive, got {m}")
    lhs = (fields.integrate(rho ** a, grid) / m) ** J
    rhs = fields.integrate(rho ** gamma, grid) / m
    return _report("Jensen14", lhs, rhs, tol,
                   {"q": q, "gamma": gamma, "A": A, "m": m, "J": J})


def verify_momentum16(rho: np.ndarray, u: np.ndarray, grid: Grid,
                      gamma: float, q: float, A: float,
                      tol: float = TOL_EXACT) -> InequalityReport:
    """Combined bound |P| <= K1 E_i^e (int |u|^{qn/(n-q)})^{(n-q)/(qn)}.

    The composition of the momentum and density-moment bounds with
    K1 = K1(gamma, n, m, A); exact for discrete sums under the Jensen
    validity condition.
    """
    n = grid.n
    _, u_pow = _momentum_exponents(n, q)
    vol = grid.cell_volume
    m = fields.integrate(rho, grid)
    if not m > 0:
        raise ValueError(f"total mass must be positive, got {m}")
    K1 = momentum_K1(n, gamma, q, m, A)
    e = internal_energy_exponent(n, gamma, q)
    e_i = A / (gamma - 1.0) * fields.integrate(rho ** gamma, grid)
    P = np.array([float(np.sum(rho * u[i])) * vol for i in range(n)])
    lhs = float(np.sqrt(np.sum(P ** 2)))
    u_mag = fields.vector_magnitude(u)
    rhs = K1 * e_i ** e \
        * fields.integrate(u_mag ** u_pow, grid) ** ((n - q) / (q * n))
    return _report("Momentum16", lhs, rhs, tol,
                   {"q": q, "gamma": gamma, "A": A, "m": m, "K1": K1})


def chain_lower_bound(p_mag: float, e_internal: float, n: int, gamma: float,
                      q: float, m: float, A: float) -> float:
    """Dissipation floor (1/K) * (|P| / (K1 * E_i^e))^q implied by the chain.

    This is the quantity that, multiplied by nu, bounds the energy decay
    rate from below while the certificate hypotheses hold.
    """
    K = sobolev_K(n, q)
    K1 = momentum_K1(n, gamma, q, m, A)
    e = internal_energy_exponent(n, gamma, q)
    if p_mag == 0.0:
        return 0.0
    if not e_internal > 0:
        raise ValueError("internal energy must be positive for the chain bound")
    return (p_mag / (K1 * e_internal ** e)) ** q / K


def dissipation_lower_bound(state: FluidState, params: ExponentParams,
                            m: float | None = None,
                            tol: float = TOL_COMPOSITE) -> InequalityReport:
    """Check measured dissipation int |D(u)|^q against the chain floor.

    lhs is `chain_lower_bound` on the state's momentum and internal energy;
    rhs is the dissipation functional with the symmetric gradient (the
    stronger claim). Composite of three inequalities, hence the wide
    tolerance.
    """
    n = state.grid.n
    gamma, q, A = params.gamma, params.q, params.A
    if not 1.0 < q < n:
        raise ValueError(f"q must lie in (1, n) = (1, {n}), got {q}")
    bk = fields.functionals(state, params)
    if m is None:
        m = bk.mass
    lhs = chain_lower_bound(bk.momentum_magnitude, bk.e_internal, n, gamma, q,
                            m, A)
    rhs = bk.dissipation_q
    return _report("DissipationBound", lhs, rhs, tol,
                   {"q": q, "gamma": gamma, "m": m,
                    "P": bk.momentum_magnitude, "E_i": bk.e_internal})
