"""Scaling families, their normalizations f(k), and rescaled views.

A family describes how the initial datum decays, through the weight w(r) in
the prescribed limit w(|x|) * u0(x) -> A as |x| -> infinity. The seven kinds,
their weights, and the induced normalization f(k) = k^N / integral_{B_k} u0
(up to constants) are:

    kind                        weight w(r)          f(k)
    power_law                   r^alpha              k^alpha
    power_law_over_log          r^alpha / log r      k^alpha / log k
    power_law_times_log         r^alpha * log r      k^alpha * log k
    critical_power              r^N                  k^N / log k
    critical_power_over_log     r^N / log r          k^N / log^2 k
    critical_power_times_log    r^N * log r          k^N / log log k
    integrable                  (mass 1 at infinity) k^N

The rescaled absorption coefficient is F(k) = f(k)^(1-p) k^2; its limit c0
decides whether the limit problem keeps absorption (c0 = 1, exactly critical
exponent), loses it (c0 = 0), or the family rejects the exponent as
subcritical (F diverges).

Representative data are smooth, radial, nonnegative closed forms matching
the prescribed tail with constant A. For the log-enhanced kinds
(*_over_log) the tail forces a sup slightly above A (measured <= 1.25 A);
all others are bounded by A.

rescale_field forms u^k(x, t) = f(k) * u(k x, k^2 t) by periodic multilinear
interpolation of a fine-grid snapshot taken at time k^2 t.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import expit

from .errors import DomainTooSmall, InvalidAlpha, SubcriticalExponent
from .fields import Field, Grid, interpolate


class FamilyKind(str, enum.Enum):
    POWER_LAW = "power_law"
    POWER_LAW_OVER_LOG = "power_law_over_log"
    POWER_LAW_TIMES_LOG = "power_law_times_log"
    CRITICAL_POWER = "critical_power"
    CRITICAL_POWER_OVER_LOG = "critical_power_over_log"
    CRITICAL_POWER_TIMES_LOG = "critical_power_times_log"
    INTEGRABLE = "integrable"


_CRITICAL_KINDS = (FamilyKind.CRITICAL_POWER, FamilyKind.CRITICAL_POWER_OVER_LOG,
                   FamilyKind.CRITICAL_POWER_TIMES_LOG)


@dataclass(frozen=True)
class ScalingFamily:
    kind: FamilyKind
    dimension: int
    A: float = 1.0
    alpha: float | None = None

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("A must be positive")
        if self.kind in (FamilyKind.POWER_LAW, FamilyKind.POWER_LAW_OVER_LOG,
                         FamilyKind.POWER_LAW_TIMES_LOG):
            if self.alpha is None or not 0 < self.alpha < self.dimension:
                raise InvalidAlpha(
                    f"{self.kind.value} needs alpha in (0, N); got {self.alpha}")
        elif self.alpha is not None and self.alpha != self.dimension:
            raise InvalidAlpha(f"{self.kind.value} fixes alpha = N")

    @property
    def exponent(self) -> float:
        """Power in the datum tail (alpha, or N for critical/integrable kinds)."""
        if self.alpha is not None:
            return self.alpha
        return float(self.dimension)


@dataclass(frozen=True)
class ScalingLaw:
    family: ScalingFamily
    p: float
    c0: float

    def f(self, k):
        return _f_value(self.family, np.asarray(k, dtype=float))

    def F(self, k):
        k = np.asarray(k, dtype=float)
        return self.f(k) ** (1.0 - self.p) * k ** 2


def f_value(family: ScalingFamily, k):
    """Normalization f(k) for the family, vectorized over k."""
    return _f_value(family, np.asarray(k, dtype=float))


def _f_value(family: ScalingFamily, k):
    a = family.exponent
    N = family.dimension
    kind = family.kind
    logk = np.log(k)
    if kind == FamilyKind.POWER_LAW:
        return k ** a
    if kind == FamilyKind.POWER_LAW_OVER_LOG:
        return k ** a / logk
    if kind == FamilyKind.POWER_LAW_TIMES_LOG:
        return k ** a * logk
    if kind == FamilyKind.CRITICAL_POWER:
        return k ** N / logk
    if kind == FamilyKind.CRITICAL_POWER_OVER_LOG:
        return k ** N / logk ** 2
    if kind == FamilyKind.CRITICAL_POWER_TIMES_LOG:
        return k ** N / np.log(logk)
    return k ** N  # integrable


def critical_exponent(family: ScalingFamily) -> float:
    """p at which the plain power balance F(k) = k^(2 - exponent*(p-1)) is neutral."""
    return 1.0 + 2.0 / family.exponent


def scaling_law(family: ScalingFamily, p: float) -> ScalingLaw:
    """Classify F(k) = f(k)^(1-p) k^2 as k -> infinity.

    Raises SubcriticalExponent whenever F diverges (the rescaled absorption
    would blow up); c0 = 1 only when F -> 1 exactly, else c0 = 0.
    """
    if p <= 1:
        raise SubcriticalExponent("p must exceed 1")
    pc = critical_exponent(family)
    kind = family.kind
    if kind in (FamilyKind.POWER_LAW, FamilyKind.INTEGRABLE):
        if p < pc:
            raise SubcriticalExponent(f"need p >= {pc:g} for {kind.value}")
        c0 = 1.0 if p == pc else 0.0
    elif kind == FamilyKind.POWER_LAW_TIMES_LOG:
        # f = k^alpha * log k grows faster than the plain power, so at the
        # critical exponent F = (log k)^(1-p) still -> 0
        if p < pc:
            raise SubcriticalExponent(f"need p >= {pc:g} for {kind.value}")
        c0 = 0.0
    else:
        # f = k^exponent / (divergent factor); at the critical exponent
        # F = (factor)^(p-1) -> infinity, so p = pc is rejected too
        if p <= pc:
            raise SubcriticalExponent(f"need p > {pc:g} for {kind.value}")
        c0 = 0.0
    return ScalingLaw(family=family, p=p, c0=c0)


def rescaled_absorption_coefficient(family: ScalingFamily, p: float, k: float) -> float:
    return float(scaling_law(family, p).F(k))


def representative_datum(family: ScalingFamily, grid: Grid,
                         smoothing: float = 0.1) -> Field:
    """Smooth radial datum with the family's prescribed tail, constant A."""
    if grid.dimension != family.dimension:
        raise ValueError("family and grid dimension disagree")
    r = grid.radius()
    A = family.A
    a = family.exponent
    kind = family.kind
    if kind == FamilyKind.INTEGRABLE:
        vals = A * expit((1.0 - r) / smoothing)
    else:
        power = (1.0 + r * r) ** (-a / 2.0)
        if kind in (FamilyKind.POWER_LAW, FamilyKind.CRITICAL_POWER):
            vals = A * power
        elif kind in (FamilyKind.POWER_LAW_OVER_LOG, FamilyKind.CRITICAL_POWER_OVER_LOG):
            vals = A * power * np.log(np.e + r)
        else:  # *_times_log: weight r^a log r, datum suppressed by the log
            vals = A * power / np.log(np.e + r)
    return Field(grid, vals, 0.0)


def representative_profile(family: ScalingFamily, r) -> np.ndarray:
    """Radial profile of representative_datum, for quadrature oracles."""
    r = np.asarray(r, dtype=float)
    A, a = family.A, family.exponent
    kind = family.kind
    if kind == FamilyKind.INTEGRABLE:
        return A * expit((1.0 - r) / 0.1)
    power = (1.0 + r * r) ** (-a / 2.0)
    if kind in (FamilyKind.POWER_LAW, FamilyKind.CRITICAL_POWER):
        return A * power
    if kind in (FamilyKind.POWER_LAW_OVER_LOG, FamilyKind.CRITICAL_POWER_OVER_LOG):
        return A * power * np.log(np.e + r)
    return A * power / np.log(np.e + r)


def ball_mass(family: ScalingFamily, k: float) -> float:
    """integral over B_k of the representative datum, by radial quadrature."""
    surface = {1: 2.0, 2: 2.0 * np.pi}[family.dimension]
    N = family.dimension

    def integrand(r):
        return representative_profile(family, r) * r ** (N - 1)

    total = 0.0
    edges = [0.0]
    e = 1.0
    while e < k:
        edges.append(e)
        e *= 4.0
    edges.append(float(k))
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
        total += val
    return surface * total


def _growth_factor(kind: FamilyKind, k: float) -> float:
    """g in f(k) = k^N / g(k) for the critical kinds."""
    if kind == FamilyKind.CRITICAL_POWER:
        return math.log(k)
    if kind == FamilyKind.CRITICAL_POWER_OVER_LOG:
        return math.log(k) ** 2
    if kind == FamilyKind.CRITICAL_POWER_TIMES_LOG:
        return math.log(math.log(k))
    raise ValueError(f"no growth factor for kind {kind.value}")


def delta_mass_constant(family: ScalingFamily, k1: float = 1e3, k2: float = 1e4) -> float:
    """Coefficient of the delta in the rescaled-datum limit.

    For the critical kinds the ball mass grows like C * g(k) with
    g = log k, log^2 k, or log log k, and u0^k -> C * delta in
    distributions. The constant is measured as the g-slope
    (mass(k2) - mass(k1)) / (g(k2) - g(k1)), which cancels the additive
    lower-order constant; for the integrable kind it is the plain mass.
    """
    if family.kind == FamilyKind.INTEGRABLE:
        return ball_mass(family, max(k1, k2))
    g1 = _growth_factor(family.kind, k1)
    g2 = _growth_factor(family.kind, k2)
    return (ball_mass(family, k2) - ball_mass(family, k1)) / (g2 - g1)


def rescale_field(fine: Field, k: float, f_k: float, target: Grid) -> Field:
    """u^k on the target grid: f(k) * fine(k x) read by interpolation.

    The fine snapshot must have been taken at time k^2 * t; the returned
    field carries time fine.time / k^2.
    """
    if target.dimension != fine.grid.dimension:
        raise ValueError("target grid dimension mismatch")
    if k <= 0:
        raise ValueError("k must be positive")
    if k * target.half_length > fine.grid.half_length + 1e-12:
        raise DomainTooSmall(
            f"k * target half-length {k * target.half_length:g} exceeds fine "
            f"half-length {fine.grid.half_length:g}")
    if fine.grid.dimension == 1:
        pts = k * target.axis()
        vals = interpolate(fine, np.clip(pts, -fine.grid.half_length,
                                         np.nextafter(fine.grid.half_length, 0)))
    else:
        ax = target.axis()
        gx, gy = np.meshgrid(ax, ax, indexing="ij")
        pts = np.stack([k * gx.ravel(), k * gy.ravel()], axis=-1)
        lim = np.nextafter(fine.grid.half_length, 0)
        vals = interpolate(fine, np.clip(pts, -fine.grid.half_length, lim))
        vals = vals.reshape(target.shape)
    return Field(target, f_k * np.asarray(vals).reshape(target.shape),
                 fine.time / (k * k))


def condition_f1_bound(family: ScalingFamily, grid: Grid, r_min: float = 4.0) -> float:
    """sup over nodes with |x| >= r_min of f(|x|) * u0(x).

    r_min keeps the log factors of f positive (needs r > e for the
    log log kind), so the bound reads the genuine tail normalization.
    """
    u0 = representative_datum(family, grid)
    r = grid.radius()
    mask = r >= r_min
    fvals = _f_value(family, r[mask])
    return float(np.max(fvals * u0.values[mask]))


def condition_f2_ratio(family: ScalingFamily, delta: float, k0: float = 4.0,
                       l_max: float = 1e4, samples: int = 48) -> float:
    """max of f(k)/f(l) over k0 <= k <= l/delta on a log-spaced sample grid."""
    worst = 0.0
    for l in np.geomspace(k0 * 2.0, l_max, samples):
        ks = np.geomspace(k0, l / delta, samples)
        ratio = _f_value(family, ks) / _f_value(family, np.array(l))
        worst = max(worst, float(ratio.max()))
    return worst
