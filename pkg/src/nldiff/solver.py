"""Time integration of u_t = J*u - u - u^p on a periodic grid.

Strang splitting with both substeps exact:

  * linear half: multiplier exp(dt*(J_hat - 1)) — a Markov (stochastic)
    operator on the grid, so it conserves mass exactly, never increases the
    sup norm, and preserves nonnegativity up to rounding;
  * absorption half: the ODE u' = -u^p has the closed-form flow
    u -> (u^(1-p) + (p-1)*dt)^(-1/(p-1)), applied nodewise with zero mapping
    to zero.

Negative values (spectral rounding) are clamped to zero immediately before
each absorption substep only; the largest clamped magnitude is recorded on
the trajectory. The absorbed-mass ledger A(t) accumulates the trapezoid rule
of integral(u^p) per step, so mass conservation reads
integral(u(t)) = integral(u0) - A(t) up to O(dt^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _fastops
from .errors import NonfiniteState
from .fields import Field, Grid, apply_multiplier, integrate
from .kernel import KernelSpec, spectral_symbol
from .fundamental import w_multiplier


@dataclass
class SolveConfig:
    kernel: KernelSpec
    grid: Grid
    p: float | None
    dt: float
    t_end: float
    snapshot_times: tuple

    def __post_init__(self):
        self.snapshot_times = tuple(sorted(float(t) for t in self.snapshot_times))
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.p is not None and self.p <= 1:
            raise ValueError("absorption exponent p must exceed 1")
        for t in self.snapshot_times:
            if t < 0 or t > self.t_end + 1e-12:
                raise ValueError("snapshot times must lie in [0, t_end]")
        times = [t for t in self.snapshot_times if t > 0]
        gaps = np.diff([0.0] + times) if times else np.array([self.t_end])
        if len(gaps) and self.dt > gaps.min() + 1e-12:
            raise ValueError("dt exceeds the smallest snapshot spacing")


@dataclass
class Trajectory:
    snapshots: list
    absorbed_at: list
    initial_mass: float
    clamp_max: float = 0.0

    @property
    def absorbed_mass(self) -> float:
        return self.absorbed_at[-1] if self.absorbed_at else 0.0

    def snapshot_at(self, t: float) -> Field:
        for snap in self.snapshots:
            if abs(snap.time - t) <= 1e-9 * max(1.0, abs(t)):
                return snap
        raise KeyError(f"no snapshot at t = {t}")


def linear_multiplier(symbol_values: np.ndarray, dt: float) -> np.ndarray:
    return np.exp(dt * (symbol_values - 1.0))


def step_linear(field: Field, symbol, dt: float) -> Field:
    out = apply_multiplier(field, linear_multiplier(symbol.values, dt))
    out.time = field.time + dt
    return out


def step_absorption(field: Field, p: float | None, dt: float,
                    coefficient: float = 1.0) -> Field:
    """Exact nodewise absorption flow; p = None or coefficient 0 is the identity."""
    if p is None or coefficient == 0.0 or dt == 0.0:
        return field.with_values(field.values.copy(), field.time)
    new_vals, _ = _fastops.absorb(field.values, p, dt, coefficient)
    return field.with_values(new_vals, field.time)


def step_strang(field: Field, symbol, p: float | None, dt: float,
                coefficient: float = 1.0) -> Field:
    half = step_absorption(field, p, 0.5 * dt, coefficient)
    full = step_linear(half, symbol, dt)
    return step_absorption(full, p, 0.5 * dt, coefficient)


def _segments(snapshot_times, t_end, dt):
    """Event times (snapshots and t_end) split into whole steps of size <= dt."""
    events = sorted(set(t for t in snapshot_times if t > 1e-14) | {float(t_end)})
    segs = []
    prev = 0.0
    for ev in events:
        length = ev - prev
        if length <= 1e-14:
            segs.append((ev, 0, 0.0))
            continue
        m = max(1, math.ceil(length / dt - 1e-9))
        segs.append((ev, m, length / m))
        prev = ev
    return segs


def evolve(config: SolveConfig, u0: Field, coefficient: float = 1.0,
           multiplier_builder=None) -> Trajectory:
    """Run the splitting scheme, storing snapshots at the requested times.

    multiplier_builder(dt) -> array lets the heat reference reuse this loop
    with its own linear semigroup; by default the nonlocal multiplier is used.
    """
    if u0.grid != config.grid:
        raise ValueError("initial datum lives on a different grid")
    if multiplier_builder is None:
        sym = spectral_symbol(config.kernel, config.grid)

        def multiplier_builder(dt):
            return linear_multiplier(sym.values, dt)

    measure = config.grid.cell_measure
    p = config.p
    state = u0.values.copy()
    t = 0.0
    absorbed = 0.0
    clamp_max = 0.0
    snapshots = []
    absorbed_at = []
    initial_mass = float(state.sum()) * measure

    def record(time_point):
        snapshots.append(Field(config.grid, state.copy(), time_point))
        absorbed_at.append(absorbed)

    want0 = config.snapshot_times and abs(config.snapshot_times[0]) <= 1e-14
    if want0:
        record(0.0)

    for ev, m, h in _segments(config.snapshot_times, config.t_end, config.dt):
        if m:
            mult = multiplier_builder(h)
            gp_before = _fastops.power_mass(state, p) * measure if p is not None else 0.0
            for _ in range(m):
                if p is not None:
                    state, c1 = _fastops.absorb(state, p, 0.5 * h, coefficient)
                    clamp_max = max(clamp_max, c1)
                spec = np.fft.fftn(state)
                spec *= mult
                state = np.fft.ifftn(spec).real
                if p is not None:
                    state, c2 = _fastops.absorb(state, p, 0.5 * h, coefficient)
                    clamp_max = max(clamp_max, c2)
                    gp_after = _fastops.power_mass(state, p) * measure
                    absorbed += 0.5 * h * (gp_before + gp_after) * coefficient
                    gp_before = gp_after
                t += h
            total = float(state.sum())
            if not np.isfinite(total):
                raise NonfiniteState(f"state became non-finite at t = {ev:g}", time=ev)
        t = ev
        if any(abs(ev - s) <= 1e-9 * max(1.0, ev) for s in config.snapshot_times):
            record(ev)

    return Trajectory(snapshots=snapshots, absorbed_at=absorbed_at,
                      initial_mass=initial_mass, clamp_max=clamp_max)


def linear_solution_via_w(kernel: KernelSpec, u0: Field, t: float) -> Field:
    """u_L(t) = exp(-t) u0 + W(t) * u0 evaluated as one multiplier.

    The decomposition sums back to the full semigroup multiplier
    exp(-t) + W_hat = exp(t*(J_hat - 1)); both terms are formed explicitly to
    keep the identity visible.
    """
    sym = spectral_symbol(kernel, u0.grid)
    mult = np.exp(-t) + w_multiplier(sym.values, t)
    out = apply_multiplier(u0, mult)
    out.time = u0.time + t
    return out
