"""Explicit time integration of the compressible flow and 3D MHD systems.

Everything is evolved in conservative form on the periodic box: density and
momentum updates are pure flux divergences, so the total mass and momentum
sums telescope to zero identically and the discrete conservation drift is
round-off only. The magnetic force enters the momentum flux as
H (x) H - |H|^2/2 I, keeping that property; the induction update is a curl,
which preserves the discrete div H = 0 identity of central differences, and
a spectral projection after each full step removes accumulated round-off.

Time stepping is midpoint Runge-Utta with a combined acoustic / viscous /
resistive step limit recomputed every step. Density is clamped at a floor
after each stage; clamp events are counted, and any run where they fire is
not conservation-guaranteed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import constitutive, fields
from .constitutive import NewtonianModel, PowerLawModel
from .fields import EnergyBreakdown, FluidState, Grid
from .thresholds import ExponentParams

STOP_T_END = "t_end"
STOP_BREAKDOWN = "numerical-breakdown"
STOP_DOMAIN = "domain-exhausted"

GENERATORS = ("gaussian_drift", "colliding_bumps", "mhd_loop", "fourier_mode_h")


@dataclass
class SimConfig:
    """Everything one run needs: grid, model, stepping and monitoring knobs."""

    grid: Grid
    model: object
    params: ExponentParams
    t_end: float
    initial_condition: dict
    cfl: float = 0.4
    rho_floor: Optional[float] = None
    support_margin: float = 0.4
    support_threshold: float = 1e-3
    output_every: int = 1
    eta: float = 0.0
    induction_only: bool = False
    hyperdiffusion: Optional[float] = None
    max_steps: int = 10_000_000
    config_hash: Optional[str] = None

    def __post_init__(self):
        if not 0.0 < self.cfl <= 0.9:
            raise ValueError(f"cfl must lie in (0, 0.9], got {self.cfl}")
        if not 0.0 < self.support_margin < 1.0:
            raise ValueError(
                f"support_margin must lie in (0, 1), got {self.support_margin}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.output_every < 1:
            raise ValueError(f"output_every must be >= 1, got {self.output_every}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")

    @property
    def hyper_coefficient(self) -> float:
        """Filter strength; zero unless requested or the model is sub-quadratic."""
        if self.hyperdiffusion is not None:
            return self.hyperdiffusion
        q = getattr(self.model, "q", 2.0)
        return 0.0 if q >= 2.0 else 0.02


@dataclass
class TimeSeries:
    """Recorded functionals of one run plus how and when it stopped."""

    n: int
    times: list = field(default_factory=list)
    breakdowns: list = field(default_factory=list)
    support_radii: list = field(default_factory=list)
    clamp_counts: list = field(default_factory=list)
    stop_reason: str = STOP_T_END
    stop_time: float = 0.0
    support_limit: float = math.inf
    config_hash: Optional[str] = None
    violations: list = field(default_factory=list)

    def record(self, t: float, bk: EnergyBreakdown, radius: float,
               clamps: int) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError("recorded times must be strictly increasing")
        self.times.append(t)
        self.breakdowns.append(bk)
        self.support_radii.append(radius)
        self.clamp_counts.append(clamps)

    def __len__(self) -> int:
        return len(self.times)


# ---------------------------------------------------------------------------
# Initial data generators
# ---------------------------------------------------------------------------

def _radial_profile(grid: Grid, width: float, center=None) -> np.ndarray:
    r2 = np.zeros(grid.shape)
    for a, x in enumerate(grid.coords()):
        off = 0.0 if center is None else center[a]
        r2 += (x - off) ** 2
    return np.exp(-r2 / width ** 2)


def _unit_direction(direction, n: int) -> np.ndarray:
    d = np.asarray(direction, dtype=float)[:n]
    mag = np.sqrt(np.sum(d ** 2))
    if mag == 0:
        raise ValueError("direction must be a nonzero vector")
    return d / mag


def initial_data(name: str, ic: dict, grid: Grid,
                 rho_floor: float = 0.0) -> FluidState:
    """Build a named initial state on the grid.

    gaussian_drift: one density bump with an aligned velocity bump, giving
    nonzero net momentum unless u_peak = 0. colliding_bumps: two mirrored
    bumps with opposing velocities, net momentum exactly zero by symmetry.
    mhd_loop: gaussian_drift plus a magnetic field that is the discrete curl
    of a localized vector potential (hence divergence-free to round-off).
    fourier_mode_h: uniform density at rest with a single sinusoidal
    magnetic mode, the resistive-decay test state.

    When `background` is zero, density is cut to exactly 0 below the floor;
    a positive `background` (relative to the peak) keeps the whole box above
    it so no floor clamping ever fires.
    """
    if name not in GENERATORS:
        raise ValueError(f"unknown initial condition {name!r}; "
                         f"choose one of {GENERATORS}")
    builder = {
        "gaussian_drift": _gaussian_drift,
        "colliding_bumps": _colliding_bumps,
        "mhd_loop": _mhd_loop,
        "fourier_mode_h": _fourier_mode_h,
    }[name]
    return builder(dict(ic), grid, rho_floor)


def _apply_floor(rho: np.ndarray, rho_peak: float, background: float,
                 rho_floor: float) -> np.ndarray:
    if background > 0:
        return np.maximum(rho, background * rho_peak)
    if rho_floor > 0:
        rho = rho.copy()
        rho[rho < rho_floor] = 0.0
    return rho


def _gaussian_drift(ic: dict, grid: Grid, rho_floor: float) -> FluidState:
    rho_peak = float(ic.pop("rho_peak", 1.0))
    width = float(ic.pop("width", 1.0))
    u_peak = float(ic.pop("u_peak", 0.0))
    direction = ic.pop("direction", (1.0, 0.0, 0.0))
    background = float(ic.pop("background", 0.0))
    if ic:
        raise ValueError(f"unknown gaussian_drift parameters: {sorted(ic)}")
    if rho_peak <= 0 or width <= 0:
        raise ValueError("rho_peak and width must be positive")
    profile = _radial_profile(grid, width)
    rho = _apply_floor(rho_peak * profile, rho_peak, background, rho_floor)
    e = _unit_direction(direction, grid.n)
    u = np.stack([u_peak * e[i] * profile for i in range(grid.n)])
    return FluidState(grid=grid, rho=rho, u=u)


def _colliding_bumps(ic: dict, grid: Grid, rho_floor: float) -> FluidState:
    rho_peak = float(ic.pop("rho_peak", 1.0))
    width = float(ic.pop("width", 1.0))
    u_peak = float(ic.pop("u_peak", 0.0))
    separation = float(ic.pop("separation", 2.0))
    axis = int(ic.pop("axis", 0))
    background = float(ic.pop("background", 0.0))
    if ic:
        raise ValueError(f"unknown colliding_bumps parameters: {sorted(ic)}")
    if not 0 <= axis < grid.n:
        raise ValueError(f"axis must be in [0, {grid.n}), got {axis}")
    center = np.zeros(grid.n)
    center[axis] = 0.5 * separation
    plus = _radial_profile(grid, width, center)
    minus = _radial_profile(grid, width, -center)
    rho = _apply_floor(rho_peak * (plus + minus), rho_peak, background,
                       rho_floor)
    u = np.zeros((grid.n,) + grid.shape)
    u[axis] = u_peak * (minus - plus)
    return FluidState(grid=grid, rho=rho, u=u)


def _mhd_loop(ic: dict, grid: Grid, rho_floor: float) -> FluidState:
    if grid.n != 3:
        raise ValueError("mhd_loop requires a 3-dimensional grid")
    h_amplitude = float(ic.pop("h_amplitude", 1.0))
    h_width = float(ic.pop("h_width", ic.get("width", 1.0)))
    base = _gaussian_drift(ic, grid, rho_floor)
    potential = np.zeros((3,) + grid.shape)
    potential[2] = h_amplitude * _radial_profile(grid, h_width)
    H = fields.curl(potential, grid)
    return FluidState(grid=grid, rho=base.rho, u=base.u, H=H)


def _fourier_mode_h(ic: dict, grid: Grid, rho_floor: float) -> FluidState:
    if grid.n != 3:
        raise ValueError("fourier_mode_h requires a 3-dimensional grid")
    rho0 = float(ic.pop("rho0", 1.0))
    amplitude = float(ic.pop("amplitude", 1.0))
    mode = int(ic.pop("mode", 1))
    axis = int(ic.pop("axis", 0))
    component = int(ic.pop("component", 2))
    if ic:
        raise ValueError(f"unknown fourier_mode_h parameters: {sorted(ic)}")
    if axis == component:
        raise ValueError("wave axis and field component must differ "
                         "(else div H != 0)")
    if mode < 1:
        raise ValueError(f"mode must be a positive integer, got {mode}")
    k = mode * math.pi / grid.half_width
    x = grid.coords()[axis]
    H = np.zeros((3,) + grid.shape)
    H[component] = amplitude * np.sin(k * x)
    rho = np.full(grid.shape, rho0)
    u = np.zeros((3,) + grid.shape)
    return FluidState(grid=grid, rho=rho, u=u, H=H)


def mode_wavenumber(grid: Grid, mode: int) -> float:
    """Angular wavenumber of the `mode`-th periodic mode of the box."""
    return mode * math.pi / grid.half_width


# ---------------------------------------------------------------------------
# Step size
# ---------------------------------------------------------------------------

def stable_dt(state: FluidState, model, config: SimConfig) -> float:
    """Combined acoustic / viscous / resistive step limit times the CFL number.

    dt = cfl * min( h/(|u| + c_s), h^2 rho / (2 n mu_eff), h^2 / (2 n eta) )
    with the sound speed from the pressure law at floored density and the
    effective viscosity of the model at the local shear rate.
    """
    grid = state.grid
    h = grid.min_spacing
    n = grid.n
    floor = config.rho_floor if config.rho_floor else 0.0
    rho_eff = np.maximum(state.rho, floor)
    limits = []
    u_mag = fields.vector_magnitude(state.u)
    if config.induction_only:
        u_max = float(np.max(u_mag))
        if u_max > 0:
            limits.append(h / u_max)
    else:
        gamma, A = model.gamma, model.A
        c_s = np.sqrt(gamma * A * rho_eff ** (gamma - 1.0))
        denom = u_mag + c_s
        if float(np.max(denom)) <= 0:
            raise ValueError("degenerate state: no acoustic or advective speed "
                             "(set a positive density floor)")
        limits.append(float(np.min(np.where(denom > 0, h / np.where(
            denom > 0, denom, 1.0), np.inf))))
        mu_eff = _effective_viscosity(model, state.u, grid)
        if mu_eff is not None:
            with np.errstate(divide="ignore"):
                visc = np.where(mu_eff > 0,
                                h * h * rho_eff / (2.0 * n * np.where(
                                    mu_eff > 0, mu_eff, 1.0)),
                                np.inf)
            limits.append(float(np.min(visc)))
    if state.H is not None and config.eta > 0:
        limits.append(h * h / (2.0 * n * config.eta))
    if not limits or not all(math.isfinite(x) or x == math.inf for x in limits):
        raise ValueError("non-finite step limit")
    dt = config.cfl * min(limits)
    if not math.isfinite(dt) or dt <= 0:
        if config.induction_only:
            return config.t_end
        raise ValueError(f"non-finite or non-positive step size {dt}")
    return dt


def _effective_viscosity(model, u: np.ndarray, grid: Grid):
    if isinstance(model, NewtonianModel):
        return np.full(grid.shape, model.lam + 2.0 * model.mu)
    if isinstance(model, PowerLawModel):
        if model.nu == 0.0:
            return None
        D = fields.shear_rate(u, grid)
        d_sq = np.sum(D * D, axis=(0, 1))
        return constitutive.power_law_coefficient(d_sq, model.nu, model.q,
                                                  model.eps_reg)
    return None


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------

def _rhs_conservative(rho: np.ndarray, mom: np.ndarray,
                      H: Optional[np.ndarray], grid: Grid, model,
                      eta: float, rho_floor: float, hyper: float,
                      induction_only: bool):
    """Flux-divergence right-hand side on conservative variables."""
    n = grid.n
    rho_eff = np.maximum(rho, rho_floor)
    u = np.zeros_like(mom)
    np.divide(mom, rho_eff, out=u, where=rho_eff > 0)

    if induction_only:
        drho = np.zeros_like(rho)
        dmom = np.zeros_like(mom)
    else:
        drho = -fields.divergence(mom, grid)
        S = constitutive.full_stress(model, rho, u, grid)
        dmom = np.empty_like(mom)
        for i in range(n):
            flux = mom[i] * u - S[i]
            if H is not None:
                flux = flux - H[i] * H
                flux[i] = flux[i] + 0.5 * np.sum(H * H, axis=0)
            dmom[i] = -fields.divergence(flux, grid)
        if hyper > 0:
            drho += _hyperdiffusion(rho, grid, hyper)
            for i in range(n):
                dmom[i] += _hyperdiffusion(mom[i], grid, hyper)

    dH = None
    if H is not None:
        electric = -_cross(u, H)
        if eta > 0:
            electric = electric + eta * fields.curl(H, grid)
        dH = -fields.curl(electric, grid)
    return drho, dmom, dH


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def _hyperdiffusion(f: np.ndarray, grid: Grid, coeff: float) -> np.ndarray:
    """Fourth-difference damping, -coeff * delta4(f) / h per axis."""
    out = np.zeros_like(f)
    for axis in range(grid.n):
        h = grid.spacing[axis]
        d4 = (np.roll(f, -2, axis) - 4.0 * np.roll(f, -1, axis) + 6.0 * f
              - 4.0 * np.roll(f, 1, axis) + np.roll(f, 2, axis))
        out -= coeff * d4 / h
    return out


def rhs_fluid(state: FluidState, model, grid: Optional[Grid] = None):
    """Density and momentum tendencies for the pure fluid system."""
    grid = grid or state.grid
    mom = state.rho * state.u
    drho, dmom, _ = _rhs_conservative(state.rho, mom, None, grid, model,
                                      0.0, 0.0, 0.0, False)
    return drho, dmom


def rhs_mhd(state: FluidState, model, eta: float,
            grid: Optional[Grid] = None):
    """Density, momentum, and magnetic tendencies for the 3D MHD system."""
    grid = grid or state.grid
    if grid.n != 3:
        raise ValueError("the MHD system requires a 3-dimensional grid")
    H = state.H if state.H is not None else np.zeros((3,) + grid.shape)
    mom = state.rho * state.u
    return _rhs_conservative(state.rho, mom, H, grid, model, eta, 0.0, 0.0,
                             False)


# ---------------------------------------------------------------------------
# Divergence cleaning
# ---------------------------------------------------------------------------

def project_div_free(H: np.ndarray, grid: Grid) -> np.ndarray:
    """Remove the part of H seen by the central-difference divergence.

    Spectral projection using the central-difference symbol sin(k h)/h, so
    the discrete div of the result is zero to round-off. Modes invisible to
    the central difference (k = 0 and the Nyquist lines) pass through
    unchanged.
    """
    if grid.n != 3:
        raise ValueError("projection requires a 3-dimensional grid")
    axes = (1, 2, 3)
    H_hat = np.fft.fftn(H, axes=axes)
    syms = []
    for a in range(3):
        h = grid.spacing[a]
        k = 2.0 * math.pi * np.fft.fftfreq(grid.cells[a], d=h)
        s = np.sin(k * h) / h
        shape = [1, 1, 1]
        shape[a] = grid.cells[a]
        syms.append(s.reshape(shape))
    denom = syms[0] ** 2 + syms[1] ** 2 + syms[2] ** 2
    dot = (syms[0] * H_hat[0] + syms[1] * H_hat[1] + syms[2] * H_hat[2])
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(denom > 0, dot / np.where(denom > 0, denom, 1.0), 0.0)
    clean = np.stack([H_hat[a] - syms[a] * scale for a in range(3)])
    return np.real(np.fft.ifftn(clean, axes=axes))


# ---------------------------------------------------------------------------
# Stepping and runs
# ---------------------------------------------------------------------------

def _advance(rho, mom, H, dt, grid, model, config):
    """One midpoint Runge-Kutta step on conservative variables.

    Returns the new variables and the number of density floor clamps that
    fired across both stages.
    """
    floor = config.rho_floor or 0.0
    hyper = config.hyper_coefficient
    clamps = 0

    def clamp(r):
        nonlocal clamps
        below = r < floor
        count = int(np.count_nonzero(below))
        if count:
            clamps += count
            r = np.where(below, floor, r)
        return r

    k1 = _rhs_conservative(rho, mom, H, grid, model, config.eta, floor, hyper,
                           config.induction_only)
    rho_h = clamp(rho + 0.5 * dt * k1[0])
    mom_h = mom + 0.5 * dt * k1[1]
    H_h = H + 0.5 * dt * k1[2] if H is not None else None

    k2 = _rhs_conservative(rho_h, mom_h, H_h, grid, model, config.eta, floor,
                           hyper, config.induction_only)
    rho_n = clamp(rho + dt * k2[0])
    mom_n = mom + dt * k2[1]
    H_n = H + dt * k2[2] if H is not None else None
    if H_n is not None:
        H_n = project_div_free(H_n, grid)
    return rho_n, mom_n, H_n, clamps


def step(state: FluidState, config: SimConfig) -> FluidState:
    """Advance a state by one stable step and return the new state."""
    grid = config.grid
    dt = stable_dt(state, config.model, config)
    mom = state.rho * state.u
    rho, mom, H, _ = _advance(state.rho, mom, state.H, dt, grid,
                              config.model, config)
    floor = config.rho_floor or 0.0
    rho_eff = np.maximum(rho, floor)
    u = np.zeros_like(mom)
    np.divide(mom, rho_eff, out=u, where=rho_eff > 0)
    return FluidState(grid=grid, rho=rho, u=u, H=H, time=state.time + dt)


def run(config: SimConfig, initial_state: Optional[FluidState] = None
        ) -> tuple[TimeSeries, FluidState]:
    """Integrate to t_end, recording functionals every output_every steps.

    Stops early on non-finite fields ("numerical-breakdown") or when the
    field support leaves the margin fraction of the box
    ("domain-exhausted"); either way the partial series is returned, never
    raised. Returns the series and the last valid state.
    """
    grid = config.grid
    if initial_state is None:
        state0 = initial_data(config.initial_condition["name"],
                              {k: v for k, v in config.initial_condition.items()
                               if k != "name"},
                              grid, rho_floor=0.0)
    else:
        state0 = initial_state
    if config.rho_floor is None:
        peak = float(np.max(state0.rho))
        config.rho_floor = 1e-10 * peak if peak > 0 else 0.0
        if initial_state is None and config.rho_floor > 0:
            ic = dict(config.initial_condition)
            name = ic.pop("name")
            state0 = initial_data(name, ic, grid, rho_floor=config.rho_floor)
    state0.validate()

    rho = state0.rho.copy()
    mom = state0.rho * state0.u
    H = state0.H.copy() if state0.H is not None else None
    t = state0.time
    limit = config.support_margin * grid.half_width
    series = TimeSeries(n=grid.n, support_limit=limit,
                        config_hash=config.config_hash)
    clamps_total = 0
    model = config.model

    def snapshot() -> FluidState:
        floor = config.rho_floor or 0.0
        rho_eff = np.maximum(rho, floor)
        u = np.zeros_like(mom)
        np.divide(mom, rho_eff, out=u, where=rho_eff > 0)
        return FluidState(grid=grid, rho=rho, u=u, H=H, time=t)

    def record(st: FluidState) -> float:
        bk = fields.functionals(st, config.params)
        radius = fields.support_radius(st, config.support_threshold)
        series.record(st.time, bk, radius, clamps_total)
        return radius

    last = snapshot()
    radius = record(last)
    if radius > limit:
        series.stop_reason = STOP_DOMAIN
        series.stop_time = t
        return series, last

    steps = 0
    stop = STOP_T_END
    while t < config.t_end and steps < config.max_steps:
        dt = stable_dt(last, model, config)
        dt = min(dt, config.t_end - t)
        rho_n, mom_n, H_n, clamps = _advance(rho, mom, H, dt, grid, model,
                                             config)
        finite = np.all(np.isfinite(rho_n)) and np.all(np.isfinite(mom_n))
        if finite and H_n is not None:
            finite = np.all(np.isfinite(H_n))
        if not finite:
            stop = STOP_BREAKDOWN
            break
        rho, mom, H = rho_n, mom_n, H_n
        clamps_total += clamps
        t += dt
        steps += 1
        last = snapshot()
        if steps % config.output_every == 0 or t >= config.t_end:
            radius = record(last)
            if radius > limit:
                stop = STOP_DOMAIN
                break

    if series.times[-1] < t and stop != STOP_BREAKDOWN:
        record(last)
    series.stop_reason = stop
    series.stop_time = t
    return series, last
