"""Closed-form exponent thresholds, constants, and admissibility checks.

Everything in this module is scalar 64-bit arithmetic on user-chosen
parameters: the critical coercivity exponents q0 and q1, the embedding
constant K, the momentum bound constant K1, the Jensen validity condition,
and the guaranteed energy-decay rate / lifespan bound that together make up
a blow-up certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

THEOREM_FLUID = "fluid"
THEOREM_MHD = "mhd"
THEOREM_NONE = "none"


@dataclass(frozen=True)
class ExponentParams:
    """Model parameters: dimension, pressure law, coercivity, resistivity.

    n is the spatial dimension (1-3 for the solver; the threshold and
    certificate functions additionally require n >= 2). gamma and A define
    the barotropic pressure p = A rho^gamma; nu and q the dissipation lower
    bound nu * |D|^q; eta the magnetic resistivity (MHD only).
    """

    n: int
    gamma: float
    A: float
    nu: float
    q: float
    eta: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.gamma > 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.A > 0:
            raise ValueError(f"A must be positive, got {self.A}")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.q > 1:
            raise ValueError(f"q must exceed 1, got {self.q}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")


@dataclass(frozen=True)
class ThresholdSet:
    """The critical exponents and constants for one parameter choice.

    K and K1 are only defined for q < n; mhd_lo (= 6*gamma/(5*gamma - 3))
    only at n = 3, where it coincides with q0.
    """

    q0: float
    q1: float
    K: Optional[float] = None
    K1: Optional[float] = None
    mhd_lo: Optional[float] = None


@dataclass(frozen=True)
class AdmissibilityReport:
    """Hypothesis check for the nonexistence certificate.

    in_q_range uses the range of whichever certificate was requested: the
    open interval (q0, n) for the pure fluid, the closed-left [q0, 3) for
    MHD at n = 3. Both memberships are kept as extra attributes since the
    endpoint q = q0 genuinely differs between the two.
    """

    in_q_range: bool
    condition15: bool
    momentum_nonzero: bool
    theorem_applies: bool
    which_theorem: str
    q_range_open: bool = field(default=False, compare=False)
    q_range_closed: bool = field(default=False, compare=False)
    condition15_value: float = field(default=float("nan"), compare=False)
    failed: tuple = field(default=(), compare=False)

    def as_dict(self) -> dict:
        """Serializable view with exactly the schema field names."""
        return {
            "in_q_range": self.in_q_range,
            "condition15": self.condition15,
            "momentum_nonzero": self.momentum_nonzero,
            "theorem_applies": self.theorem_applies,
            "which_theorem": self.which_theorem,
        }


def _require_theory_dims(n: int, gamma: float) -> None:
    if not isinstance(n, (int,)) or n < 2:
        raise ValueError(f"dimension n must be an integer >= 2, got {n!r}")
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")


def q0(n: int, gamma: float) -> float:
    """Critical exponent 2*n*gamma / (n*(gamma-1) + 2*gamma), in (1, n)."""
    _require_theory_dims(n, gamma)
    return 2.0 * n * gamma / (n * (gamma - 1.0) + 2.0 * gamma)


def q1(n: int, gamma: float) -> float:
    """Lower exponent n*gamma / ((n+1)*(gamma-1) + 1); always below q0."""
    _require_theory_dims(n, gamma)
    return n * gamma / ((n + 1) * (gamma - 1.0) + 1.0)


def q_sigma(n: int, sigma: float) -> float:
    """Interpolation exponent 2*n*sigma / ((sigma-1)*n + 2*sigma).

    Strictly decreasing in sigma, bounded in (1, n); equals q0 at
    sigma = gamma.
    """
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"dimension n must be an integer >= 2, got {n!r}")
    if not sigma > 1:
        raise ValueError(f"sigma must exceed 1, got {sigma}")
    return 2.0 * n * sigma / ((sigma - 1.0) * n + 2.0 * sigma)


def sobolev_K(n: int, q: float) -> float:
    """Embedding constant q*(n-1) / (2*(n-q)), defined for 1 < q < n."""
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"dimension n must be an integer >= 2, got {n!r}")
    if not 1.0 < q < n:
        raise ValueError(f"q must lie in (1, n) = (1, {n}), got {q}")
    return q * (n - 1.0) / (2.0 * (n - q))


def condition15_value(n: int, gamma: float, q: float) -> float:
    """Jensen validity quantity (gamma-1)*(n*(q-1)+q) / (n-q).

    The Jensen step in the momentum bound is valid iff this is >= 1.
    At q = q0 it equals gamma + 1 identically.
    """
    _require_theory_dims(n, gamma)
    if not 1.0 < q < n:
        raise ValueError(f"q must lie in (1, n) = (1, {n}), got {q}")
    return (gamma - 1.0) * (n * (q - 1.0) + q) / (n - q)


def condition15(n: int, gamma: float, q: float) -> bool:
    """True iff the Jensen step of the momentum bound is valid."""
    return condition15_value(n, gamma, q) >= 1.0


def internal_energy_exponent(n: int, gamma: float, q: float) -> float:
    """Exponent (n-q) / (q*n*(gamma-1)) carried by E_i in the momentum bound."""
    return (n - q) / (q * n * (gamma - 1.0))


def momentum_K1(n: int, gamma: float, q: float, m: float, A: float) -> float:
    """Constant K1 in |P| <= K1 * E_i^e * (int |u|^{qn/(n-q)})^{(n-q)/(qn)}.

    Obtained by composing the momentum Holder bound with the Jensen bound
    on the density integral:

        K1 = m^((n(q-1)+q)/(qn)) * ((gamma-1)/(m*A))^((n-q)/(qn(gamma-1)))

    where e = (n-q)/(qn(gamma-1)) is `internal_energy_exponent`. Requires
    the Jensen validity condition; raises otherwise.
    """
    _require_theory_dims(n, gamma)
    if not 1.0 < q < n:
        raise ValueError(f"q must lie in (1, n) = (1, {n}), got {q}")
    if not m > 0:
        raise ValueError(f"total mass m must be positive, got {m}")
    if not A > 0:
        raise ValueError(f"A must be positive, got {A}")
    if not condition15(n, gamma, q):
        raise ValueError(
            "Jensen validity condition fails: "
            f"(gamma-1)*(n*(q-1)+q)/(n-q) = {condition15_value(n, gamma, q):.6g} < 1"
        )
    mass_exp = (n * (q - 1.0) + q) / (q * n)
    e = internal_energy_exponent(n, gamma, q)
    return m ** mass_exp * ((gamma - 1.0) / (m * A)) ** e


def threshold_set(params: ExponentParams, m: float = 1.0) -> ThresholdSet:
    """All thresholds for one parameter set; K and K1 only when q < n.

    K1 uses the supplied total mass (default 1, the normalized reference).
    """
    n, gamma, q = params.n, params.gamma, params.q
    ts_q0 = q0(n, gamma)
    ts_q1 = q1(n, gamma)
    K = K1 = None
    if 1.0 < q < n:
        K = sobolev_K(n, q)
        if condition15(n, gamma, q):
            K1 = momentum_K1(n, gamma, q, m, params.A)
    mhd_lo = 6.0 * gamma / (5.0 * gamma - 3.0) if n == 3 else None
    return ThresholdSet(q0=ts_q0, q1=ts_q1, K=K, K1=K1, mhd_lo=mhd_lo)


def _momentum_magnitude(P) -> float:
    try:
        return math.sqrt(sum(float(p) ** 2 for p in P))
    except TypeError:
        return abs(float(P))


def admissibility(params: ExponentParams, P, mhd: bool = False) -> AdmissibilityReport:
    """Check the certificate hypotheses for a momentum vector P.

    The fluid certificate requires q strictly inside (q0, n); the MHD
    certificate (n = 3 only) admits the closed-left range [q0, 3). The
    Jensen condition and a nonzero momentum are required either way.
    """
    n, gamma, q = params.n, params.gamma, params.q
    _require_theory_dims(n, gamma)
    lo = q0(n, gamma)
    open_member = lo < q < n
    closed_member = lo <= q < n
    try:
        cond15 = condition15(n, gamma, q)
    except ValueError:
        cond15 = False
    p_mag = _momentum_magnitude(P)
    momentum_nonzero = p_mag > 0.0

    mhd_possible = mhd and n == 3
    in_range = closed_member if mhd_possible else open_member
    applies = in_range and cond15 and momentum_nonzero and (not mhd or mhd_possible)

    failed = []
    if not in_range:
        failed.append("in_q_range")
    if not cond15:
        failed.append("condition15")
    if not momentum_nonzero:
        failed.append("momentum_nonzero")
    if mhd and not mhd_possible:
        failed.append("mhd_requires_n3")

    which = THEOREM_NONE
    if applies:
        which = THEOREM_MHD if mhd_possible else THEOREM_FLUID

    try:
        c15_val = condition15_value(n, gamma, q)
    except ValueError:
        c15_val = float("nan")

    return AdmissibilityReport(
        in_q_range=in_range,
        condition15=cond15,
        momentum_nonzero=momentum_nonzero,
        theorem_applies=applies,
        which_theorem=which,
        q_range_open=open_member,
        q_range_closed=closed_member,
        condition15_value=c15_val,
        failed=tuple(failed),
    )


def certificate_constants(
    params: ExponentParams, m: float, P, E0: float, mhd: bool = False
) -> tuple[float, float]:
    """Guaranteed energy-decay rate C and lifespan bound T* = E0 / C.

    C = nu * |P|^q / (K1^q * K) * E0^(-(n-q)/(qn(gamma-1))): the constant
    rate at which total energy must fall while the hypotheses hold, which
    forces the energy negative (hence no solution) at time T*. Raises when
    the admissibility check fails or E0 <= 0.
    """
    report = admissibility(params, P, mhd=mhd)
    if not report.theorem_applies:
        raise ValueError(
            "certificate hypotheses fail: " + ", ".join(report.failed)
        )
    if not E0 > 0:
        raise ValueError(f"initial total energy must be positive, got {E0}")
    n, gamma, q = params.n, params.gamma, params.q
    K = sobolev_K(n, q)
    K1 = momentum_K1(n, gamma, q, m, params.A)
    p_mag = _momentum_magnitude(P)
    e = internal_energy_exponent(n, gamma, q)
    C = params.nu * p_mag ** q / (K1 ** q * K) * E0 ** (-e)
    return C, E0 / C
