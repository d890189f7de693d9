"""Radial convolution kernels J and their spectral symbols.

A kernel is a nonnegative, radial, compactly supported profile normalized so
that its integral over R^N equals one. The three families share the closed
form J(x) = c * profile(|x|/R) on |x| < R:

    bump          exp(-1 / (1 - r^2))
    epanechnikov  (1 - r^2)
    quartic       (1 - r^2)^2

The effective diffusivity of the associated nonlocal operator is
a = (1/2N) * integral(J(x) |x|^2 dx); for epanechnikov with N = 1, R = 1 this
is exactly 1/10.

The spectral symbol on a periodic grid is the discrete Fourier transform of
the kernel sampled at lattice displacements, renormalized so the frequency-0
entry is exactly 1. That renormalization is what makes every linear step in
the solvers conserve mass to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import UnderresolvedKernel

FAMILIES = ("bump", "epanechnikov", "quartic")

MIN_POINTS_PER_RADIUS = 16


def _profile(family: str, r: np.ndarray) -> np.ndarray:
    """Unnormalized radial profile on r = |x|/R; zero outside r < 1."""
    r = np.asarray(r, dtype=float)
    inside = r < 1.0
    out = np.zeros_like(r)
    if family == "bump":
        rr = np.where(inside, r, 0.0)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(inside, np.exp(-1.0 / (1.0 - rr * rr)), 0.0)
    elif family == "epanechnikov":
        out = np.where(inside, 1.0 - r * r, 0.0)
    elif family == "quartic":
        out = np.where(inside, (1.0 - r * r) ** 2, 0.0)
    else:
        raise ValueError(f"unknown kernel family {family!r}")
    return out


def _radial_moment(family: str, dimension: int, moment: int) -> float:
    """integral over R^N of profile(|x|) * |x|^moment, support radius 1."""
    surface = {1: 2.0, 2: 2.0 * np.pi}[dimension]

    def integrand(r):
        return _profile(family, np.array(r)) * r ** (moment + dimension - 1)

    val, err = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return surface * val


@dataclass(frozen=True)
class KernelSpec:
    """Normalized kernel: family name, support radius, dimension, and the
    normalization constant c making the integral exactly one."""

    family: str
    support_radius: float
    dimension: int
    normalization: float


@lru_cache(maxsize=None)
def _normalization(family: str, support_radius: float, dimension: int) -> float:
    # integral of profile(|x|/R) dx = R^N * integral of profile(|y|) dy
    base = _radial_moment(family, dimension, 0)
    return 1.0 / (base * support_radius ** dimension)


def make_kernel(family: str, support_radius: float = 1.0, dimension: int = 1) -> KernelSpec:
    if family not in FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; choose from {FAMILIES}")
    if support_radius <= 0:
        raise ValueError("support_radius must be positive")
    if dimension not in (1, 2):
        raise ValueError("dimension must be 1 or 2")
    c = _normalization(family, float(support_radius), dimension)
    return KernelSpec(family, float(support_radius), dimension, c)


def evaluate(kernel: KernelSpec, points: np.ndarray) -> np.ndarray:
    """J at physical points; shape (m,) for N=1 or (m, 2) for N=2."""
    pts = np.asarray(points, dtype=float)
    if kernel.dimension == 1:
        r = np.abs(pts)
    else:
        r = np.sqrt(np.sum(pts * pts, axis=-1))
    return kernel.normalization * _profile(kernel.family, r / kernel.support_radius)


@lru_cache(maxsize=None)
def _second_moment(family: str, support_radius: float, dimension: int) -> float:
    c = _normalization(family, support_radius, dimension)
    # moment integral scales as R^(N+2)
    return c * _radial_moment(family, dimension, 2) * support_radius ** (dimension + 2)


def diffusivity(kernel: KernelSpec) -> float:
    """a = (1/2N) * integral(J |x|^2 dx); the heat-limit diffusion coefficient."""
    m2 = _second_moment(kernel.family, kernel.support_radius, kernel.dimension)
    return m2 / (2.0 * kernel.dimension)


@dataclass(frozen=True)
class SpectralSymbol:
    """Discrete symbol of J on a periodic grid, full FFT layout.

    values is a real array of shape (n,)*N with values[0...0] == 1 exactly and
    every entry in [-1, 1]. grid_key records (dimension, points, half_length)
    so operators can reject fields from other grids.
    """

    values: np.ndarray
    grid_key: tuple


def displacement_samples(kernel: KernelSpec, points: int, half_length: float) -> np.ndarray:
    """Kernel sampled at circular lattice displacements (FFT index order)."""
    n = points
    dx = 2.0 * half_length / n
    disp = np.fft.fftfreq(n, d=1.0 / n) * dx  # 0, dx, ..., -dx
    if kernel.dimension == 1:
        return evaluate(kernel, disp)
    gx, gy = np.meshgrid(disp, disp, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    return evaluate(kernel, pts).reshape(n, n)


def spectral_symbol(kernel: KernelSpec, points, half_length: float | None = None) -> SpectralSymbol:
    """DFT of the sampled kernel, renormalized to exact unit mass at frequency 0.

    Accepts either (kernel, grid) or (kernel, points_per_axis, half_length).
    """
    if half_length is None:
        grid = points
        if grid.dimension != kernel.dimension:
            raise ValueError("kernel and grid dimension disagree")
        points, half_length = grid.points_per_axis, grid.half_length
    n = points
    dx = 2.0 * half_length / n
    if dx > kernel.support_radius / MIN_POINTS_PER_RADIUS + 1e-15:
        raise UnderresolvedKernel(
            f"dx = {dx:.4g} exceeds support_radius/16 = {kernel.support_radius / 16:.4g}")
    samples = displacement_samples(kernel, n, half_length)
    sym = np.fft.fftn(samples).real * dx ** kernel.dimension
    zero = sym.flat[0]
    sym = sym / zero
    # |DFT| <= DFT[0] for a nonnegative kernel; clip the rounding excess.
    np.clip(sym, -1.0, 1.0, out=sym)
    sym.flat[0] = 1.0
    key = (kernel.dimension, n, float(half_length))
    return SpectralSymbol(values=sym, grid_key=key)


def discrete_mass_defect(kernel: KernelSpec, points: int, half_length: float) -> float:
    """|sum J(x_i) dx^N - 1| before renormalization (Riemann-sum mass error)."""
    dx = 2.0 * half_length / points
    samples = displacement_samples(kernel, points, half_length)
    return abs(float(samples.sum()) * dx ** kernel.dimension - 1.0)
