"""Uniform periodic-grid fields, central-difference operators, and integrals.

Scalars are arrays of shape ``grid.shape``; vectors stack components on a
leading axis, shape ``(n, *grid.shape)``; rank-two tensors use shape
``(n, n, *grid.shape)``. All differential operators are 2nd-order central
differences with periodic wrap, chosen so that the discrete divergence of a
discrete curl vanishes identically and linear fields differentiate exactly.

Integrals are plain cell sums times the cell volume. ``numpy.sum`` performs
a fixed-order pairwise reduction, so every functional here is deterministic
and independent of thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .thresholds import ExponentParams


@dataclass(frozen=True)
class Grid:
    """Cell-centered uniform grid on the periodic box [-L, L)^n."""

    n: int
    cells: tuple
    half_width: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"grid dimension must be 1, 2 or 3, got {self.n}")
        if len(self.cells) != self.n:
            raise ValueError(
                f"need {self.n} cell counts, got {len(self.cells)}"
            )
        if any(int(c) != c or c < 8 for c in self.cells):
            raise ValueError(f"cells per axis must be integers >= 8, got {self.cells}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def shape(self) -> tuple:
        return self.cells

    @property
    def spacing(self) -> tuple:
        """Spacing 2L / N per axis."""
        return tuple(2.0 * self.half_width / c for c in self.cells)

    @property
    def min_spacing(self) -> float:
        return min(self.spacing)

    @property
    def cell_volume(self) -> float:
        vol = 1.0
        for h in self.spacing:
            vol *= h
        return vol

    @property
    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.n

    def axis_coords(self, axis: int) -> np.ndarray:
        """Cell-center coordinates -L + (i + 1/2) h along one axis."""
        h = self.spacing[axis]
        return -self.half_width + (np.arange(self.cells[axis]) + 0.5) * h

    def coords(self) -> list:
        """Meshgrid ('ij') of cell-center coordinates, one array per axis."""
        return list(np.meshgrid(*(self.axis_coords(a) for a in range(self.n)),
                                indexing="ij"))

    def radius(self) -> np.ndarray:
        """Distance of each cell center from the origin."""
        r2 = np.zeros(self.shape)
        for x in self.coords():
            r2 += x * x
        return np.sqrt(r2)


def make_grid(n: int, cells, half_width: float) -> Grid:
    """Build a grid; `cells` may be a single count or one per axis."""
    if np.isscalar(cells):
        cells = (int(cells),) * n
    return Grid(n=n, cells=tuple(int(c) for c in cells), half_width=float(half_width))


def sample_scalar(grid: Grid, f: Callable) -> np.ndarray:
    """Sample f(x1, ..., xn) at cell centers; rejects non-finite values."""
    values = np.asarray(f(*grid.coords()), dtype=float)
    values = np.broadcast_to(values, grid.shape).copy()
    if not np.all(np.isfinite(values)):
        raise ValueError("sampled scalar field contains non-finite values")
    return values


def sample_vector(grid: Grid, f: Callable) -> np.ndarray:
    """Sample a vector-valued f returning n components of x-shaped arrays."""
    comps = f(*grid.coords())
    if len(comps) != grid.n:
        raise ValueError(f"expected {grid.n} components, got {len(comps)}")
    values = np.stack([np.broadcast_to(np.asarray(c, dtype=float), grid.shape)
                       for c in comps])
    if not np.all(np.isfinite(values)):
        raise ValueError("sampled vector field contains non-finite values")
    return values


# ---------------------------------------------------------------------------
# Differential operators (periodic central differences)
# ---------------------------------------------------------------------------

def deriv(values: np.ndarray, axis: int, grid: Grid) -> np.ndarray:
    """Central difference along a box axis, periodic wrap.

    For a field with leading component axes, `axis` counts box axes: the
    array axis differentiated is ``axis + (values.ndim - grid.n)``.
    """
    array_axis = axis + (values.ndim - grid.n)
    h = grid.spacing[axis]
    return (np.roll(values, -1, axis=array_axis)
            - np.roll(values, 1, axis=array_axis)) / (2.0 * h)


def gradient(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Jacobian of a vector field: G[i, j] = d u_i / d x_j."""
    return np.stack([np.stack([deriv(u[i], j, grid) for j in range(grid.n)])
                     for i in range(u.shape[0])])


def gradient_scalar(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Gradient vector of a scalar field."""
    return np.stack([deriv(f, j, grid) for j in range(grid.n)])


def divergence(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Divergence of a vector field."""
    if v.shape[0] != grid.n:
        raise ValueError(f"vector field has {v.shape[0]} components on a "
                         f"{grid.n}-dimensional grid")
    out = deriv(v[0], 0, grid)
    for j in range(1, grid.n):
        out = out + deriv(v[j], j, grid)
    return out


def tensor_divergence(T: np.ndarray, grid: Grid) -> np.ndarray:
    """Row-wise divergence of a rank-two tensor: out[i] = sum_j d T[i,j] / d x_j."""
    return np.stack([divergence(T[i], grid) for i in range(T.shape[0])])


def curl(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Curl of a 3-component vector field (3D grids only)."""
    if grid.n != 3:
        raise ValueError("curl requires a 3-dimensional grid")
    return np.stack([
        deriv(v[2], 1, grid) - deriv(v[1], 2, grid),
        deriv(v[0], 2, grid) - deriv(v[2], 0, grid),
        deriv(v[1], 0, grid) - deriv(v[0], 1, grid),
    ])


def shear_rate(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Symmetric part of the velocity Jacobian, (du_i/dx_j + du_j/dx_i)/2."""
    G = gradient(u, grid)
    return 0.5 * (G + np.swapaxes(G, 0, 1))


# ---------------------------------------------------------------------------
# Integral functionals
# ---------------------------------------------------------------------------

def integrate(values: np.ndarray, grid: Grid) -> float:
    """Cell sum times cell volume (fixed-order pairwise reduction)."""
    return float(np.sum(values)) * grid.cell_volume


def vector_magnitude(v: np.ndarray) -> np.ndarray:
    """Pointwise Euclidean norm of a vector field."""
    return np.sqrt(np.sum(v * v, axis=0))


def tensor_magnitude(T: np.ndarray) -> np.ndarray:
    """Pointwise Frobenius norm sqrt(T:T) of a rank-two tensor field."""
    return np.sqrt(np.sum(T * T, axis=(0, 1)))


def lp_norm(values: np.ndarray, p: float, grid: Grid) -> float:
    """(sum |values|^p h^n)^(1/p); for vectors/tensors |.| is pointwise."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if values.ndim == grid.n + 1:
        mag = vector_magnitude(values)
    elif values.ndim == grid.n + 2:
        mag = tensor_magnitude(values)
    else:
        mag = np.abs(values)
    return integrate(mag ** p, grid) ** (1.0 / p)


@dataclass(frozen=True)
class FluidState:
    """Discrete fields at one time: density, velocity, optional magnetic field."""

    grid: Grid
    rho: np.ndarray
    u: np.ndarray
    H: Optional[np.ndarray] = None
    time: float = 0.0

    def __post_init__(self):
        if self.rho.shape != self.grid.shape:
            raise ValueError(f"rho shape {self.rho.shape} does not match grid "
                             f"{self.grid.shape}")
        if self.u.shape != (self.grid.n,) + self.grid.shape:
            raise ValueError(f"u shape {self.u.shape} does not match grid")
        if self.H is not None and self.H.shape != (3,) + self.grid.shape:
            raise ValueError("H must have 3 components on the grid")

    def validate(self, div_tol: float = 1e-8) -> None:
        """Enforce rho >= 0 and (if H present) a relatively small div H."""
        if np.any(self.rho < 0):
            raise ValueError("density must be nonnegative everywhere")
        if self.H is not None:
            div_h = lp_norm(divergence(self.H, self.grid), 2.0, self.grid)
            scale = lp_norm(self.H, 2.0, self.grid)
            if div_h > div_tol * max(scale, 1e-300):
                raise ValueError(
                    f"magnetic field is not divergence-free: |div H| = {div_h:.3e} "
                    f"exceeds {div_tol:.1e} relative"
                )


@dataclass(frozen=True)
class EnergyBreakdown:
    """Mass, momentum, energy components, and q-dissipation at one time."""

    mass: float
    momentum: np.ndarray
    e_kinetic: float
    e_internal: float
    e_magnetic: float
    total: float
    dissipation_q: float

    @property
    def momentum_magnitude(self) -> float:
        return float(np.sqrt(np.sum(self.momentum ** 2)))


def functionals(state: FluidState, params: ExponentParams) -> EnergyBreakdown:
    """Integrate mass, momentum, energies, and the dissipation ∫|D(u)|^q."""
    grid = state.grid
    vol = grid.cell_volume
    m = float(np.sum(state.rho)) * vol
    P = np.array([float(np.sum(state.rho * state.u[i])) * vol
                  for i in range(grid.n)])
    e_k = 0.5 * float(np.sum(state.rho * np.sum(state.u ** 2, axis=0))) * vol
    e_i = params.A / (params.gamma - 1.0) * float(
        np.sum(state.rho ** params.gamma)) * vol
    if state.H is not None:
        e_m = 0.5 * float(np.sum(state.H ** 2)) * vol
    else:
        e_m = 0.0
    D = shear_rate(state.u, grid)
    d_q = float(np.sum(tensor_magnitude(D) ** params.q)) * vol
    return EnergyBreakdown(
        mass=m, momentum=P, e_kinetic=e_k, e_internal=e_i, e_magnetic=e_m,
        total=e_k + e_i + e_m, dissipation_q=d_q,
    )


def support_radius(state: FluidState, threshold: float) -> float:
    """Radius of the smallest origin-centered ball holding the active cells.

    A cell is active when rho, |u|, or |H| exceeds threshold times that
    field's own maximum. Returns 0 for identically zero fields.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    grid = state.grid
    r = grid.radius()
    active = np.zeros(grid.shape, dtype=bool)
    mags = [state.rho, vector_magnitude(state.u)]
    if state.H is not None:
        mags.append(vector_magnitude(state.H))
    for mag in mags:
        peak = float(np.max(mag))
        if peak > 0:
            active |= mag > threshold * peak
    if not np.any(active):
        return 0.0
    return float(np.max(r[active]))
