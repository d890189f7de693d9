"""Reference solver for the limit problem U_t - a*Laplace(U) = -c0 * U^p.

The linear substep uses the exact periodic heat multiplier exp(-a |xi|^2 dt);
the absorption substep reuses the exact nodewise flow from the nonlocal
solver, scaled by c0. Initial data comes in three flavors:

  * power_law(A, alpha): the singular profile A |x|^(-alpha), represented by
    cell averages so the total mass of every cell is exact (alpha < N);
  * point_source(M): evolution starts from the exact Gaussian at t0 = dt;
  * an explicit Field.

gaussian_point_source is the closed-form self-similar solution
M * (4 pi a t)^(-N/2) exp(-|x|^2 / (4 a t)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidAlpha, SingularDatumUnsupported
from .fields import Field, Grid, interpolate
from .solver import SolveConfig, Trajectory, evolve


@dataclass(frozen=True)
class PowerLawDatum:
    A: float
    alpha: float


@dataclass(frozen=True)
class PointSourceDatum:
    M: float


@dataclass
class LimitProblem:
    diffusivity: float
    c0: float
    p: float | None
    datum: object  # PowerLawDatum | PointSourceDatum | Field

    def __post_init__(self):
        if self.diffusivity <= 0:
            raise ValueError("diffusivity must be positive")
        if self.c0 < 0:
            raise ValueError("c0 must be nonnegative")
        if self.c0 > 0 and (self.p is None or self.p <= 1):
            raise ValueError("absorption requires p > 1")


def heat_multiplier(grid: Grid, diffusivity: float, dt: float) -> np.ndarray:
    return np.exp(-diffusivity * grid.freq_square() * dt)


def gaussian_point_source(M: float, diffusivity: float, grid: Grid, t: float) -> Field:
    if t <= 0:
        raise ValueError("t must be positive")
    r2 = grid.radius() ** 2
    scale = M * (4.0 * np.pi * diffusivity * t) ** (-grid.dimension / 2.0)
    return Field(grid, scale * np.exp(-r2 / (4.0 * diffusivity * t)), t)


def power_law_datum_field(A: float, alpha: float, grid: Grid) -> Field:
    """Cell-averaged A |x|^(-alpha); exact in 1-D, refined quadrature in 2-D."""
    if not 0 < alpha < grid.dimension:
        raise InvalidAlpha(f"alpha must lie in (0, {grid.dimension}); got {alpha}")
    dx = grid.spacing
    if grid.dimension == 1:
        x = grid.axis()
        lo = np.abs(x) - 0.5 * dx
        hi = np.abs(x) + 0.5 * dx
        e = 1.0 - alpha
        vals = np.empty_like(x)
        center = np.abs(x) < 0.5 * dx
        # antiderivative of |s|^-alpha is sign(s)|s|^e / e
        vals[~center] = (hi[~center] ** e - lo[~center] ** e) / (e * dx)
        vals[center] = 2.0 * (0.5 * dx) ** e / (e * dx)
        return Field(grid, A * vals, 0.0)
    # 2-D: midpoint quadrature away from the origin, dyadically refined rings
    # near it, and polar integration over the singular cell.
    x = grid.axis()
    gx, gy = np.meshgrid(x, x, indexing="ij")
    r = np.sqrt(gx * gx + gy * gy)
    vals = np.zeros_like(r)
    far = r >= 4.0 * dx
    vals[far] = r[far] ** (-alpha)
    near = ~far
    idx = np.argwhere(near)
    sub = 16
    off = (np.arange(sub) + 0.5) / sub - 0.5
    ox, oy = np.meshgrid(off * dx, off * dx, indexing="ij")
    for i, j in idx:
        cx, cy = gx[i, j], gy[i, j]
        if abs(cx) < 0.25 * dx and abs(cy) < 0.25 * dx:
            # singular cell: integrate alpha-power over the square via polar rings
            vals[i, j] = _singular_cell_average(alpha, dx)
            continue
        px = cx + ox
        py = cy + oy
        rr = np.sqrt(px * px + py * py)
        vals[i, j] = float(np.mean(rr ** (-alpha)))
    return Field(grid, A * vals, 0.0)


def _singular_cell_average(alpha: float, dx: float) -> float:
    # Average of |x|^-alpha over the square [-dx/2, dx/2]^2: integrate the
    # disc of radius dx/2 exactly, corners by fine midpoint quadrature.
    if alpha >= 2.0:
        raise SingularDatumUnsupported("alpha >= 2 not integrable in 2-D")
    half = 0.5 * dx
    disc = 2.0 * np.pi * half ** (2.0 - alpha) / (2.0 - alpha)
    m = 256
    off = (np.arange(m) + 0.5) / m * half
    px, py = np.meshgrid(off, off, indexing="ij")
    rr = np.sqrt(px * px + py * py)
    corner_mask = rr > half
    corner = 4.0 * float(np.sum(rr[corner_mask] ** (-alpha))) * (half / m) ** 2
    return (disc + corner) / (dx * dx)


def datum_field(problem: LimitProblem, grid: Grid, dt: float) -> tuple:
    """Concrete initial field and its start time for evolve_limit."""
    d = problem.datum
    if isinstance(d, PowerLawDatum):
        return power_law_datum_field(d.A, d.alpha, grid), 0.0
    if isinstance(d, PointSourceDatum):
        return gaussian_point_source(d.M, problem.diffusivity, grid, dt), dt
    if isinstance(d, Field):
        if d.grid != grid:
            raise ValueError("datum field lives on a different grid")
        return d.with_values(d.values.copy(), 0.0), 0.0
    raise TypeError(f"unsupported datum {type(d).__name__}")


def evolve_limit(problem: LimitProblem, grid: Grid, dt: float,
                 snapshot_times) -> Trajectory:
    """Strang splitting with the exact heat multiplier and exact absorption."""
    u0, t0 = datum_field(problem, grid, dt)
    p = problem.p if problem.c0 > 0 else None
    coeff = problem.c0 if problem.c0 > 0 else 1.0

    times = tuple(sorted(float(t) for t in snapshot_times))
    if t0 > 0:
        shifted = tuple(t - t0 for t in times if t >= t0 - 1e-12)
        if len(shifted) != len(times):
            raise ValueError("snapshot times must be >= the point-source start t0 = dt")
    else:
        shifted = times
    t_end = shifted[-1] if shifted and shifted[-1] > 0 else dt
    cfg = SolveConfig(kernel=None, grid=grid, p=p, dt=dt, t_end=t_end,
                      snapshot_times=shifted)

    def builder(step):
        return heat_multiplier(grid, problem.diffusivity, step)

    traj = evolve(cfg, u0, coefficient=coeff, multiplier_builder=builder)
    if t0 > 0:
        for snap in traj.snapshots:
            snap.time += t0
    return traj


def solve_limit_at(problem: LimitProblem, grid: Grid, dt: float, t: float) -> Field:
    traj = evolve_limit(problem, grid, dt, (t,))
    return traj.snapshots[-1]


def self_similarity_check(problem: LimitProblem, grid: Grid, t: float, k: float,
                          dt: float) -> float:
    """Sup defect of f(k) U(k x, k^2 t) - U(x, t) with f(k) = k^alpha.

    Requires a power-law datum (whose solutions are exactly self-similar in
    the continuum). Both snapshots come from one solve; the rescaled read is
    interpolated. Returns the sup over |x| <= half_length / (2k).
    """
    if not isinstance(problem.datum, PowerLawDatum):
        raise ValueError("self-similarity check needs a power-law datum")
    alpha = problem.datum.alpha
    traj = evolve_limit(problem, grid, dt, tuple(sorted({t, k * k * t})))
    u_t = traj.snapshot_at(t)
    u_kt = traj.snapshot_at(k * k * t)
    window = grid.half_length / (2.0 * k)
    if grid.dimension == 1:
        xs = grid.axis()
        sel = np.abs(xs) <= window
        reads = interpolate(u_kt, k * xs[sel])
        defect = k ** alpha * reads - u_t.values[sel]
    else:
        xs = grid.axis()
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        mask = np.maximum(np.abs(gx), np.abs(gy)) <= window
        pts = np.stack([k * gx[mask], k * gy[mask]], axis=-1)
        reads = interpolate(u_kt, pts)
        defect = k ** alpha * reads - u_t.values[mask]
    return float(np.max(np.abs(defect)))
