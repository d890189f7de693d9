"""Periodic grids, scalar fields, spectral convolution, and snapshot I/O.

A Grid is a uniform periodic lattice on [-L, L)^N with a power-of-two point
count per axis (N = 1 or 2). Fields carry float64 nodal values plus the time
they represent. All operators are value-semantic: they return new Fields.

Fourier convention: for index m, the frequency is xi_m = 2*pi*fftfreq(n, dx),
and multiplier application is ifftn(fftn(u) * mult).real. Because every
multiplier used in the package has value 1 at frequency zero (or an explicit
known value there), integrate() behaves predictably under all linear steps.

Snapshot format (little-endian): magic b"NLDF", u32 version=1, u32 dimension,
u64 points_per_axis, f64 half_length, f64 time, then points^N f64 values in
row-major order. Round-trips are bit exact.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _fastops
from .errors import CorruptSnapshot, GridMismatch, OutOfDomain

MAGIC = b"NLDF"
VERSION = 1
_HEADER = struct.Struct("<4sIIQdd")


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    dimension: int
    points_per_axis: int
    half_length: float

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if not _is_power_of_two(self.points_per_axis) or self.points_per_axis < 256:
            raise ValueError("points_per_axis must be a power of two >= 256")
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dimension

    @property
    def cell_measure(self) -> float:
        return self.spacing ** self.dimension

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis: -L, -L+dx, ..., L-dx."""
        return _axis(self.points_per_axis, self.half_length)

    def radius(self) -> np.ndarray:
        """|x| at every node, shaped like a field."""
        return _radius(self.dimension, self.points_per_axis, self.half_length)

    def frequencies(self) -> tuple:
        """Angular frequency array per axis, FFT index order."""
        return tuple(_freq(self.points_per_axis, self.half_length)
                     for _ in range(self.dimension))

    def freq_square(self) -> np.ndarray:
        """|xi|^2 at every FFT index, shaped like a field."""
        return _freq_square(self.dimension, self.points_per_axis, self.half_length)


@lru_cache(maxsize=64)
def _axis(n: int, half_length: float) -> np.ndarray:
    a = -half_length + (2.0 * half_length / n) * np.arange(n)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=64)
def _radius(dimension: int, n: int, half_length: float) -> np.ndarray:
    a = _axis(n, half_length)
    if dimension == 1:
        r = np.abs(a)
    else:
        gx, gy = np.meshgrid(a, a, indexing="ij")
        r = np.sqrt(gx * gx + gy * gy)
    r.setflags(write=False)
    return r


@lru_cache(maxsize=64)
def _freq(n: int, half_length: float) -> np.ndarray:
    f = 2.0 * np.pi * np.fft.fftfreq(n, d=2.0 * half_length / n)
    f.setflags(write=False)
    return f


@lru_cache(maxsize=64)
def _freq_square(dimension: int, n: int, half_length: float) -> np.ndarray:
    f = _freq(n, half_length)
    if dimension == 1:
        q = f * f
    else:
        q = f[:, None] ** 2 + f[None, :] ** 2
    q.setflags(write=False)
    return q


@dataclass
class Field:
    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise GridMismatch(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}")

    def with_values(self, values: np.ndarray, time: float | None = None) -> "Field":
        return Field(self.grid, values, self.time if time is None else time)


def constant_field(grid: Grid, value: float, time: float = 0.0) -> Field:
    return Field(grid, np.full(grid.shape, float(value)), time)


def delta_field(grid: Grid, time: float = 0.0) -> Field:
    """Discrete delta column: mass exactly one, supported on the node at x = 0."""
    v = np.zeros(grid.shape)
    center = (grid.points_per_axis // 2,) * grid.dimension
    v[center] = 1.0 / grid.cell_measure
    return Field(grid, v, time)


def _check_same_grid(a: Grid, b: Grid):
    if a != b:
        raise GridMismatch(f"grids differ: {a} vs {b}")


def integrate(field: Field, within: float | None = None) -> float:
    """Riemann sum; if within is given, restricted to the ball |x| <= within."""
    if within is None:
        return float(field.values.sum()) * field.grid.cell_measure
    mask = field.grid.radius() <= within
    return float(field.values[mask].sum()) * field.grid.cell_measure


def sup_norm(field: Field, within: float | None = None) -> float:
    if within is None:
        return float(np.abs(field.values).max())
    mask = field.grid.radius() <= within
    return float(np.abs(field.values[mask]).max())


def lq_norm(field: Field, q: float, within: float | None = None) -> float:
    if within is None:
        vals = np.abs(field.values)
    else:
        vals = np.abs(field.values[field.grid.radius() <= within])
    return float((vals ** q).sum() * field.grid.cell_measure) ** (1.0 / q)


def apply_multiplier(field: Field, multiplier: np.ndarray, time: float | None = None) -> Field:
    """ifftn(fftn(u) * multiplier).real with the full FFT layout."""
    if multiplier.shape != field.grid.shape:
        raise GridMismatch("multiplier layout does not match grid")
    out = np.fft.ifftn(np.fft.fftn(field.values) * multiplier).real
    return field.with_values(out, field.time if time is None else time)


def convolve(field: Field, symbol) -> Field:
    """J * u via the spectral symbol; preserves mass exactly at frequency 0."""
    key = (field.grid.dimension, field.grid.points_per_axis, field.grid.half_length)
    if symbol.grid_key != key:
        raise GridMismatch("symbol was built for a different grid")
    return apply_multiplier(field, symbol.values)


def parseval_l2(field: Field) -> float:
    """L2 norm via the spectrum; equals lq_norm(field, 2) by Parseval."""
    spec = np.fft.fftn(field.values)
    n_total = field.values.size
    s = float(np.sum(np.abs(spec) ** 2)) / n_total * field.grid.cell_measure
    return np.sqrt(s)


def interpolate(field: Field, points: np.ndarray) -> np.ndarray:
    """Periodic multilinear interpolation at physical points.

    Points must lie in [-L, L); convex weights keep values within the local
    node range, so nonnegative fields stay nonnegative.
    """
    pts = np.asarray(points, dtype=np.float64)
    scalar = False
    if field.grid.dimension == 1:
        if pts.ndim == 0:
            pts = pts[None]
            scalar = True
        bad = (pts < -field.grid.half_length) | (pts >= field.grid.half_length)
    else:
        if pts.ndim == 1:
            pts = pts[None, :]
            scalar = True
        bad = np.any((pts < -field.grid.half_length)
                     | (pts >= field.grid.half_length), axis=-1)
    if np.any(bad):
        raise OutOfDomain("interpolation point outside [-L, L)")
    out = _fastops.interp_periodic(field.values, field.grid.half_length,
                                   np.ascontiguousarray(pts))
    return float(out[0]) if scalar else out


def save(field: Field, path) -> None:
    """Write a snapshot atomically (temp file then rename)."""
    header = _HEADER.pack(MAGIC, VERSION, field.grid.dimension,
                          field.grid.points_per_axis, field.grid.half_length,
                          field.time)
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load(path) -> Field:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise CorruptSnapshot("snapshot shorter than header")
    magic, version, dim, n, half_length, time = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CorruptSnapshot(f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptSnapshot(f"unsupported version {version}")
    expected = _HEADER.size + 8 * n ** dim
    if len(raw) != expected:
        raise CorruptSnapshot(f"payload length {len(raw)} != expected {expected}")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape((n,) * dim)
    grid = Grid(dim, n, half_length)
    return Field(grid, values.copy(), time)
