"""Quantitative reads on trajectories: rate fits, windowed convergence
metrics against a reference solution, mass bookkeeping audits, and
weighted-sup barrier summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientPoints, NonpositiveValue, WindowExceedsDomain
from .fields import Field, integrate
from .scaling import ScalingFamily, f_value, scaling_law
from .solver import Trajectory


@dataclass(frozen=True)
class RateFit:
    exponent: float
    intercept: float
    r_squared: float
    window: tuple
    n_points: int


def rate_fit(series, window=None) -> RateFit:
    """Least-squares slope of log(value) against log(t).

    series is a sequence of (t, value) pairs with t strictly increasing.
    window = (t_min, t_max) restricts the fit; at least 5 points must
    remain in the window and every fitted value must be positive.
    """
    t = np.asarray([s[0] for s in series], dtype=float)
    v = np.asarray([s[1] for s in series], dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    if window is None:
        window = (float(t[0]), float(t[-1]))
    lo, hi = float(window[0]), float(window[1])
    keep = (t >= lo) & (t <= hi)
    t, v = t[keep], v[keep]
    if t.size < 5:
        raise InsufficientPoints(f"{t.size} points in window [{lo:g}, {hi:g}]")
    if np.any(v <= 0) or np.any(t <= 0):
        raise NonpositiveValue("rate fit needs positive times and values")
    x = np.log(t)
    y = np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return RateFit(exponent=float(slope), intercept=float(intercept),
                   r_squared=r2, window=(lo, hi), n_points=int(t.size))


@dataclass(frozen=True)
class ConvergenceSeries:
    entries: tuple
    R: float
    normalizer_name: str

    def times(self) -> np.ndarray:
        return np.asarray([e[0] for e in self.entries])

    def metrics(self) -> np.ndarray:
        return np.asarray([e[1] for e in self.entries])


def _window_sup(diff: np.ndarray, grid, radius: float) -> float:
    mask = grid.radius() <= radius
    return float(np.max(np.abs(diff[mask])))


def normalizer_name(family: ScalingFamily) -> str:
    names = {
        "power_law": "t^(a/2)|u - U|",
        "power_law_over_log": "t^(a/2)|u/log sqrt(t) - U|",
        "power_law_times_log": "t^(a/2)|u*log sqrt(t) - U|",
        "critical_power": "t^(N/2)|u/log sqrt(t) - U|",
        "critical_power_over_log": "t^(N/2)|u/log^2 sqrt(t) - U|",
        "critical_power_times_log": "t^(N/2)|u/log log sqrt(t) - U|",
        "integrable": "t^(N/2)|u - U|",
    }
    return names[family.kind.value]


def normalizer_pair(family: ScalingFamily, t: float):
    """(u_factor, t_power) such that the convergence metric at time t is
    t_power * sup |u_factor * u - U|, with U the self-similar limit.

    Equivalently f(sqrt(t)) * u - t_power * U with f the family
    normalization; the u-side factor carries f's log corrections while the
    limit U is subtracted bare, matching the asymptotic statements. Returns
    None when the log factors are undefined or nonpositive at this t.
    """
    half_log = 0.5 * math.log(t)  # log sqrt(t), exactly
    a = family.exponent
    t_power = t ** (a / 2.0)
    kind = family.kind.value
    if kind in ("power_law", "integrable"):
        u_factor = 1.0
    elif kind in ("power_law_over_log", "critical_power"):
        if half_log <= 0:
            return None
        u_factor = 1.0 / half_log
    elif kind == "power_law_times_log":
        if half_log <= 0:
            return None
        u_factor = half_log
    elif kind == "critical_power_over_log":
        if half_log <= 0:
            return None
        u_factor = 1.0 / half_log ** 2
    else:  # critical_power_times_log
        if half_log <= 1.0:
            return None
        u_factor = 1.0 / math.log(half_log)
    return u_factor, t_power


def convergence_series(traj_u: Trajectory, reference, family: ScalingFamily,
                       p: float, R: float) -> ConvergenceSeries:
    """Windowed, normalized sup distance to the reference at each snapshot.

    metric(t) = t_power * sup over |x| <= R*sqrt(t) of |u_factor * u - U|

    with (u_factor, t_power) = normalizer_pair(family, t) and U =
    reference(t) a Field on the same grid. Snapshot times where the pair is
    undefined (log factors need sqrt(t) > 1; the log log kind needs
    sqrt(t) > e) are skipped. Raises WindowExceedsDomain when R*sqrt(t)
    exceeds half the grid half-length at an included time.
    """
    scaling_law(family, p)  # re-validate admissibility
    entries = []
    for snap in traj_u.snapshots:
        t = snap.time
        if t <= 0:
            continue
        pair = normalizer_pair(family, t)
        if pair is None:
            continue
        u_factor, t_power = pair
        radius = R * math.sqrt(t)
        if radius > 0.5 * snap.grid.half_length:
            raise WindowExceedsDomain(
                f"R*sqrt(t) = {radius:g} exceeds half of half-length "
                f"{snap.grid.half_length:g} at t = {t:g}")
        ref = reference(t)
        if ref.grid != snap.grid:
            raise ValueError("reference grid differs from trajectory grid")
        sup = _window_sup(u_factor * snap.values - ref.values, snap.grid, radius)
        entries.append((t, t_power * sup))
    return ConvergenceSeries(entries=tuple(entries), R=R,
                             normalizer_name=normalizer_name(family))


@dataclass(frozen=True)
class MassAudit:
    t_list: tuple
    lhs: tuple
    rhs: tuple
    M_limit: float

    @property
    def max_residual(self) -> float:
        return max(abs(a - b) for a, b in zip(self.lhs, self.rhs))


def mass_audit(traj: Trajectory) -> MassAudit:
    """Check the ledger identity: field mass equals initial mass minus the
    time-integrated absorption, at every snapshot."""
    if not traj.snapshots:
        raise ValueError("trajectory has no snapshots")
    t_list, lhs, rhs = [], [], []
    for snap, absorbed in zip(traj.snapshots, traj.absorbed_at):
        t_list.append(snap.time)
        lhs.append(integrate(snap))
        rhs.append(traj.initial_mass - absorbed)
    return MassAudit(t_list=tuple(t_list), lhs=tuple(lhs), rhs=tuple(rhs),
                     M_limit=rhs[-1])


@dataclass(frozen=True)
class BarrierSummaryRow:
    t: float
    sup_time_weighted: float
    sup_space_weighted: float
    mu_envelope: float | None


@dataclass(frozen=True)
class SolutionBarrierSummary:
    rows: tuple
    max_time_weighted: float
    max_space_weighted: float
    max_mu_envelope: float | None


def solution_barrier_report(traj: Trajectory, family: ScalingFamily,
                            p: float | None = None,
                            radius_min: float = 1.0) -> SolutionBarrierSummary:
    """Per snapshot: sup of f(sqrt(t))*u, sup over |x| >= radius_min of
    f(|x|)*u, and (when p is given) the envelope sup of
    u*(1 + sqrt(t) + |x|)^(2/(p-1)).

    Snapshots where f(sqrt(t)) is undefined or nonpositive are skipped.
    For families whose f carries log factors, radius_min must keep
    f positive on [radius_min, infinity).
    """
    rows = []
    for snap in traj.snapshots:
        t = snap.time
        if t <= 0:
            continue
        ft = float(f_value(family, math.sqrt(t)))
        if not math.isfinite(ft) or ft <= 0:
            continue
        r = snap.grid.radius()
        mask = r >= radius_min
        fx = f_value(family, r[mask])
        sup_t = ft * float(np.max(snap.values))
        sup_x = float(np.max(fx * snap.values[mask]))
        env = None
        if p is not None:
            mu = 2.0 / (p - 1.0)
            env = float(np.max(snap.values * (1.0 + math.sqrt(t) + r) ** mu))
        rows.append(BarrierSummaryRow(t=t, sup_time_weighted=sup_t,
                                      sup_space_weighted=sup_x, mu_envelope=env))
    if not rows:
        raise ValueError("no usable snapshots (normalizer undefined at all times)")
    envs = [row.mu_envelope for row in rows if row.mu_envelope is not None]
    return SolutionBarrierSummary(
        rows=tuple(rows),
        max_time_weighted=max(row.sup_time_weighted for row in rows),
        max_space_weighted=max(row.sup_space_weighted for row in rows),
        max_mu_envelope=max(envs) if envs else None)
