"""Stress tensor models, the barotropic pressure law, and coercivity checks.

Three viscosity models are supported: the classical linear (Newtonian) law,
the power-law model nu * (|D|^2 + eps^2)^((q-2)/2) * D, and a generalized
form beta0(rho, div u) * I + beta(rho, |D|) * D with user-supplied
coefficient functions. The power-law model with eps = 0 saturates the
dissipation lower bound nu * |D|^q exactly; the regularization eps > 0
keeps the coefficient finite at D = 0 when q < 2 (at the price of breaking
that lower bound for q < 2, which `coercivity_check` reports honestly).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import fields
from .fields import Grid
from .thresholds import ExponentParams


@dataclass(frozen=True)
class NewtonianModel:
    """Linear viscous stress lam * div(u) * I + 2 * mu * D."""

    lam: float
    mu: float
    A: float
    gamma: float
    n: int = 3

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.lam + 2.0 * self.mu / self.n > 0:
            raise ValueError(
                f"need lam + (2/n) mu > 0, got {self.lam + 2.0 * self.mu / self.n}"
            )
        _check_pressure(self.A, self.gamma)


@dataclass(frozen=True)
class PowerLawModel:
    """Shear-dependent stress nu * (|D|^2 + eps_reg^2)^((q-2)/2) * D."""

    nu: float
    q: float
    A: float
    gamma: float
    eps_reg: float = 0.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.q > 1:
            raise ValueError(f"q must exceed 1, got {self.q}")
        if self.eps_reg < 0:
            raise ValueError(f"eps_reg must be nonnegative, got {self.eps_reg}")
        _check_pressure(self.A, self.gamma)


@dataclass(frozen=True)
class GeneralizedModel:
    """Stress beta0(rho, div u) * I + beta(rho, |D|) * D with callables.

    Both coefficient functions must accept array arguments and be safe to
    call concurrently. Certificates for such models are only meaningful
    after `coercivity_check` passes on a documented sample set.
    """

    beta0: Callable[[np.ndarray, np.ndarray], np.ndarray]
    beta: Callable[[np.ndarray, np.ndarray], np.ndarray]
    A: float
    gamma: float

    def __post_init__(self):
        _check_pressure(self.A, self.gamma)


def _check_pressure(A: float, gamma: float) -> None:
    if not A > 0:
        raise ValueError(f"A must be positive, got {A}")
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")


def pressure(rho: np.ndarray, A: float, gamma: float) -> np.ndarray:
    """Barotropic pressure A * rho^gamma, cell-wise."""
    _check_pressure(A, gamma)
    if np.any(rho < 0):
        raise ValueError("density must be nonnegative")
    return A * rho ** gamma


def power_law_coefficient(d_mag_sq: np.ndarray, nu: float, q: float,
                          eps_reg: float) -> np.ndarray:
    """Viscosity coefficient nu * (|D|^2 + eps^2)^((q-2)/2) on |D|^2 values.

    At eps = 0 the q < 2 branch diverges as |D| -> 0; the coefficient is
    only ever used multiplied by D, and cells with |D| = 0 contribute zero
    stress, so those cells are mapped to 0 rather than inf.
    """
    expo = 0.5 * (q - 2.0)
    arg = d_mag_sq + eps_reg ** 2
    if eps_reg == 0.0 and q < 2.0:
        out = np.zeros_like(arg)
        nz = arg > 0
        out[nz] = nu * arg[nz] ** expo
        return out
    return nu * arg ** expo


def viscous_stress(model, rho: np.ndarray, u: np.ndarray, grid: Grid) -> np.ndarray:
    """Viscous part of the stress for any supported model."""
    D = fields.shear_rate(u, grid)
    return viscous_stress_from_shear(model, rho, u, D, grid)


def viscous_stress_from_shear(model, rho: np.ndarray, u: np.ndarray,
                              D: np.ndarray, grid: Grid) -> np.ndarray:
    """Viscous stress with a precomputed shear-rate tensor."""
    n = grid.n
    if isinstance(model, NewtonianModel):
        div_u = fields.divergence(u, grid)
        S = 2.0 * model.mu * D
        for i in range(n):
            S[i, i] += model.lam * div_u
        return S
    if isinstance(model, PowerLawModel):
        d_sq = np.sum(D * D, axis=(0, 1))
        coeff = power_law_coefficient(d_sq, model.nu, model.q, model.eps_reg)
        return coeff * D
    if isinstance(model, GeneralizedModel):
        div_u = fields.divergence(u, grid)
        d_mag = np.sqrt(np.sum(D * D, axis=(0, 1)))
        S = model.beta(rho, d_mag) * D
        b0 = model.beta0(rho, div_u)
        for i in range(n):
            S[i, i] += b0
        return S
    raise TypeError(f"unsupported constitutive model: {type(model).__name__}")


def full_stress(model, rho: np.ndarray, u: np.ndarray, grid: Grid) -> np.ndarray:
    """Total stress -p(rho) * I + viscous part."""
    S = viscous_stress(model, rho, u, grid)
    p = pressure(rho, model.A, model.gamma)
    for i in range(grid.n):
        S[i, i] -= p
    return S


@dataclass(frozen=True)
class CoercivityReport:
    """Outcome of sampling the pointwise dissipation lower bound."""

    samples_checked: int
    min_slack: float
    passed: bool
    note: str = ""


def coercivity_check(model, g_samples: Sequence[float],
                     B_samples: Sequence[np.ndarray], nu: float, q: float,
                     rel_tol: float = 1e-10) -> CoercivityReport:
    """Sample beta0(g, tr B) tr B + beta(g, |B|) |B|^2 >= nu |B|^q pointwise.

    Evaluates the product set of density samples g and symmetric matrices B
    and reports the worst slack. The power-law model with eps_reg = 0
    saturates the bound exactly (slack 0 everywhere); with eps_reg > 0 and
    q < 2 the regularized coefficient undershoots and the check fails, which
    is reported rather than hidden.
    """
    if not g_samples or not len(B_samples):
        raise ValueError("sample lists must be non-empty")
    if not nu > 0 or not q > 1:
        raise ValueError("need nu > 0 and q > 1")
    min_slack = np.inf
    scale = 0.0
    note = ""
    for B in B_samples:
        B = np.asarray(B, dtype=float)
        if not np.allclose(B, B.T, atol=1e-12):
            raise ValueError("coercivity samples must be symmetric matrices")
        b_sq = float(np.sum(B * B))
        b_mag = np.sqrt(b_sq)
        tr = float(np.trace(B))
        target = nu * b_mag ** q
        for g in g_samples:
            if g < 0:
                raise ValueError("density samples must be nonnegative")
            lhs = _coercivity_lhs(model, float(g), B, tr, b_sq, b_mag)
            slack = lhs - target
            min_slack = min(min_slack, slack)
            scale = max(scale, abs(lhs), abs(target))
    if isinstance(model, NewtonianModel) and model.lam < 0:
        note = "lam < 0: the trace term can be negative, bound not guaranteed"
    passed = min_slack >= -rel_tol * max(scale, 1.0)
    return CoercivityReport(
        samples_checked=len(g_samples) * len(B_samples),
        min_slack=float(min_slack), passed=passed, note=note,
    )


def _coercivity_lhs(model, g: float, B: np.ndarray, tr: float, b_sq: float,
                    b_mag: float) -> float:
    if isinstance(model, NewtonianModel):
        return model.lam * tr * tr + 2.0 * model.mu * b_sq
    if isinstance(model, PowerLawModel):
        if b_sq == 0.0:
            return 0.0
        coeff = float(power_law_coefficient(np.asarray([b_sq]), model.nu,
                                            model.q, model.eps_reg)[0])
        return coeff * b_sq
    if isinstance(model, GeneralizedModel):
        b0 = float(np.asarray(model.beta0(np.asarray(g), np.asarray(tr))))
        b = float(np.asarray(model.beta(np.asarray(g), np.asarray(b_mag))))
        return b0 * tr + b * b_sq
    raise TypeError(f"unsupported constitutive model: {type(model).__name__}")


def exponent_params(model, n: int, eta: float = 0.0) -> ExponentParams:
    """Dissipation parameters (nu, q) implied by a constitutive model.

    The power-law model carries its own (nu, q). The Newtonian model
    satisfies the lower bound with q = 2 and nu = 2 mu provided lam >= 0
    (for lam < 0 the bound is not guaranteed; `coercivity_check` records
    the caveat). Generalized models must be given explicit (nu, q) via
    `ExponentParams` directly.
    """
    if isinstance(model, PowerLawModel):
        return ExponentParams(n=n, gamma=model.gamma, A=model.A, nu=model.nu,
                              q=model.q, eta=eta)
    if isinstance(model, NewtonianModel):
        return ExponentParams(n=n, gamma=model.gamma, A=model.A,
                              nu=2.0 * model.mu, q=2.0, eta=eta)
    raise TypeError(
        "exponent parameters must be supplied explicitly for generalized models"
    )
