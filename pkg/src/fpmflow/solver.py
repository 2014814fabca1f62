"""Pseudo-spectral time evolution of the conservative continuity equation
d_t rho = -d_x(rho u) with the nonlocal velocity induced by rho.

Products are formed in physical space and the quadratic flux is truncated at
a fraction of the Nyquist band (2/3 by default).  Time stepping is the
three-stage strong-stability-preserving Runge-Kutta scheme with a CFL step
combining the transport limit dx/max|u| and the explicit limit of the
dissipative factor hidden in the flux, 1/(max rho (2 pi k_max)^alpha).

The run stops when the spectral tail mass fraction exceeds a threshold:
past that point the solution is not trustworthy and the simulator refuses
to certify anything about it.  The tail fraction is the l1 spectral mass in
the top third of the retained band over the total l1 mass, which makes the
threshold commensurate with amplitude-level error bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import DensityField, PeriodicGrid, make_grid

__all__ = [
    "SolverConfig",
    "SimulationState",
    "RunResult",
    "SolverBlowupError",
    "rhs",
    "stable_dt",
    "step_ssprk3",
    "run",
    "tail_fraction",
]


class SolverBlowupError(RuntimeError):
    """Raised when a stage produces non-finite values."""


@dataclass(frozen=True)
class SolverConfig:
    alpha: float
    n_points: int
    t_end: float
    cfl: float = 0.4
    dealias_fraction: float = 2.0 / 3.0
    tail_threshold: float = 1e-8
    snapshot_interval: Optional[float] = None
    max_steps: int = 20_000_000
    dt_fixed: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias fraction must lie in (0, 1]")
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")

    @property
    def snapshot_dt(self) -> float:
        return self.snapshot_interval if self.snapshot_interval else self.t_end / 200.0


@dataclass(frozen=True)
class SimulationState:
    t: float
    rho: DensityField
    u: DensityField
    step_count: int
    dt_last: float
    under_resolved: bool


@dataclass
class RunResult:
    states: list  # snapshot SimulationStates
    records: list  # one entry per observer return value per snapshot
    final_state: SimulationState
    stop_reason: str  # t_end | under_resolved | max_steps | nan


class _Workspace:
    """Precomputed spectral machinery for one (n, alpha, dealias) triple."""

    def __init__(self, grid: PeriodicGrid, alpha: float, dealias_fraction: float):
        self.grid = grid
        self.alpha = alpha
        n = grid.n
        k = grid.k_half.astype(float)
        self.k_max_kept = int(np.floor(dealias_fraction * (n // 2)))
        self.mask = grid.k_half <= self.k_max_kept
        self.vel_sym = np.zeros(n // 2 + 1, dtype=complex)
        self.vel_sym[1:] = -1j * (2.0 * np.pi * k[1:]) ** (alpha - 1.0)
        self.vel_sym[-1] = 0.0
        self.flux_sym = np.where(self.mask, -2j * np.pi * k, 0.0)
        self.flux_sym[-1] = 0.0
        band_lo = (2 * self.k_max_kept) // 3
        self.tail_band = (grid.k_half > band_lo) & self.mask
        self.l1_weights = np.where(
            (grid.k_half > 0) & (grid.k_half < n // 2), 2.0, 1.0)

    def velocity(self, rho_hat: np.ndarray) -> np.ndarray:
        return np.fft.irfft(self.vel_sym * rho_hat, self.grid.n)

    def rhs_values(self, rho_values: np.ndarray) -> np.ndarray:
        rho_hat = np.fft.rfft(rho_values)
        u = self.velocity(rho_hat)
        flux_hat = np.fft.rfft(rho_values * u)
        out_hat = self.flux_sym * flux_hat
        out_hat[0] = 0.0  # mass neutral by construction
        return np.fft.irfft(out_hat, self.grid.n)

    def tail_fraction(self, rho_hat: np.ndarray) -> float:
        a = np.abs(rho_hat)
        total = float(np.dot(self.l1_weights, a))
        if total == 0.0:
            return 0.0
        return float(np.dot(self.l1_weights[self.tail_band], a[self.tail_band])) / total


def _workspace(grid: PeriodicGrid, alpha: float, frac: float) -> _Workspace:
    return _Workspace(grid, alpha, frac)


def rhs(rho: DensityField, alpha: float, dealias_fraction: float = 2.0 / 3.0) -> DensityField:
    """Flux divergence -d_x(rho u), dealiased, exactly mass neutral."""
    ws = _workspace(rho.grid, alpha, dealias_fraction)
    return DensityField(rho.grid, ws.rhs_values(rho.values))


def tail_fraction(rho: DensityField, dealias_fraction: float = 2.0 / 3.0) -> float:
    """l1 spectral mass fraction in the top third of the retained band."""
    ws = _workspace(rho.grid, 1.0, dealias_fraction)
    return ws.tail_fraction(np.fft.rfft(rho.values))


def _stable_dt_values(rho_values, u_values, ws: _Workspace, cfl: float) -> float:
    transport = ws.grid.dx / (float(np.max(np.abs(u_values))) + 1e-12)
    rho_peak = max(float(np.max(rho_values)), 1e-12)
    dissipative = 1.0 / (rho_peak * (2.0 * np.pi * ws.k_max_kept) ** ws.alpha)
    return cfl * min(transport, dissipative)


def stable_dt(state: SimulationState, config: SolverConfig) -> float:
    ws = _workspace(state.rho.grid, config.alpha, config.dealias_fraction)
    return _stable_dt_values(state.rho.values, state.u.values, ws, config.cfl)


def _advance_values(rho_values: np.ndarray, dt: float, ws: _Workspace,
                    u0: np.ndarray | None = None) -> np.ndarray:
    if u0 is not None:
        flux_hat = ws.flux_sym * np.fft.rfft(rho_values * u0)
        flux_hat[0] = 0.0
        f0 = np.fft.irfft(flux_hat, ws.grid.n)
    else:
        f0 = ws.rhs_values(rho_values)
    r1 = rho_values + dt * f0
    if not np.all(np.isfinite(r1)):
        raise SolverBlowupError("non-finite values after stage 1")
    r2 = 0.75 * rho_values + 0.25 * (r1 + dt * ws.rhs_values(r1))
    if not np.all(np.isfinite(r2)):
        raise SolverBlowupError("non-finite values after stage 2")
    out = rho_values / 3.0 + (2.0 / 3.0) * (r2 + dt * ws.rhs_values(r2))
    if not np.all(np.isfinite(out)):
        raise SolverBlowupError("non-finite values after stage 3")
    return out


def step_ssprk3(state: SimulationState, dt: float, config: SolverConfig) -> SimulationState:
    """One SSP-RK3 step; recomputes the induced velocity for the new state."""
    ws = _workspace(state.rho.grid, config.alpha, config.dealias_fraction)
    new_values = _advance_values(state.rho.values, dt, ws)
    rho = DensityField(state.rho.grid, new_values)
    u = DensityField(state.rho.grid, ws.velocity(np.fft.rfft(new_values)))
    return SimulationState(t=state.t + dt, rho=rho, u=u,
                           step_count=state.step_count + 1, dt_last=dt,
                           under_resolved=state.under_resolved)


def initial_state(rho0: DensityField, config: SolverConfig) -> SimulationState:
    ws = _workspace(rho0.grid, config.alpha, config.dealias_fraction)
    u = DensityField(rho0.grid, ws.velocity(np.fft.rfft(rho0.values)))
    return SimulationState(t=0.0, rho=rho0, u=u, step_count=0, dt_last=0.0,
                           under_resolved=False)


def run(rho0: DensityField, config: SolverConfig,
        observers: tuple[Callable, ...] = ()) -> RunResult:
    """Integrate to t_end, stopping early on under-resolution, step budget,
    or non-finite values.  Observers run at snapshot times; their non-None
    return values are collected in records (grouped per snapshot when there
    are several observers).
    """
    if rho0.grid.n != config.n_points:
        raise ValueError("initial data grid does not match the configuration")
    grid = rho0.grid
    ws = _workspace(grid, config.alpha, config.dealias_fraction)
    values = rho0.values.copy()
    t = 0.0
    steps = 0
    dt_last = 0.0
    snap_dt = config.snapshot_dt
    next_snap = 0.0
    states: list[SimulationState] = []
    records: list = []
    stop_reason = "t_end"
    under_resolved = False

    def make_state() -> SimulationState:
        rho = DensityField(grid, values)
        u = DensityField(grid, ws.velocity(np.fft.rfft(values)))
        return SimulationState(t=t, rho=rho, u=u, step_count=steps,
                               dt_last=dt_last, under_resolved=under_resolved)

    def snapshot(state: SimulationState):
        states.append(state)
        outputs = [obs(state) for obs in observers]
        outputs = [o for o in outputs if o is not None]
        if len(outputs) == 1:
            records.append(outputs[0])
        elif outputs:
            records.append(tuple(outputs))

    while True:
        rho_hat = np.fft.rfft(values)
        frac = ws.tail_fraction(rho_hat)
        if frac > config.tail_threshold:
            under_resolved = True
            stop_reason = "under_resolved"
            snapshot(make_state())
            break
        if t >= next_snap - 1e-13 * max(1.0, t):
            snapshot(make_state())
            next_snap += snap_dt
        if t >= config.t_end - 1e-13 * config.t_end:
            stop_reason = "t_end"
            break
        if steps >= config.max_steps:
            stop_reason = "max_steps"
            break
        u_values = ws.velocity(rho_hat)
        dt = config.dt_fixed or _stable_dt_values(values, u_values, ws, config.cfl)
        dt = min(dt, config.t_end - t, next_snap - t if next_snap > t else dt)
        try:
            values = _advance_values(values, dt, ws, u0=u_values)
        except SolverBlowupError:
            stop_reason = "nan"
            break
        t += dt
        dt_last = dt
        steps += 1

    final = make_state() if stop_reason != "under_resolved" else states[-1]
    if stop_reason in ("t_end", "max_steps") and (not states or states[-1].t < t - 1e-13):
        snapshot(final)
    return RunResult(states=states, records=records, final_state=final,
                     stop_reason=stop_reason)
