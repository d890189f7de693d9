"""Hot pointwise kernels with a numba path and a pure-numpy fallback.

The FFTs that dominate the linear steps stay in numpy; what lives here are
the per-node loops executed hundreds of thousands of times per run: the exact
absorption update, integer-exponent power sums for the mass ledger, and the
periodic multilinear interpolation used by the rescaling reads.

Backend selection: numba is used when importable unless the environment
variable NLDIFF_NUMBA is set to "0", which forces the numpy fallback. Both
paths compute the same quantities; benchmarks/bench_backends.py times them
against each other.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("NLDIFF_NUMBA", "1")
USE_NUMBA = _env != "0"
HAS_NUMBA = False
if USE_NUMBA:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAS_NUMBA = False
USE_NUMBA = USE_NUMBA and HAS_NUMBA


def _pow_scalar(u, q):
    # Integer exponents resolved by repeated multiplication; the absorption
    # update calls this twice per node per step.
    qi = int(q)
    if qi == q and 0 <= qi <= 16:
        out = 1.0
        for _ in range(qi):
            out *= u
        return out
    return u ** q


def _absorb_py(values, p, dt, coeff):
    """Exact flow of u' = -coeff*u^p over dt, clamping negatives to zero first.

    Returns (new_values_flat, largest_clamped_magnitude). The closed form
    (u^(1-p) + coeff*(p-1)*dt)^(-1/(p-1)) is evaluated as
    u * (1 + coeff*(p-1)*dt*u^(p-1))^(-1/(p-1)) so that tiny node values,
    whose u^(p-1) underflows to zero, map to themselves instead of tripping
    a division by zero.
    """
    n = values.shape[0]
    out = np.empty_like(values)
    clamp = 0.0
    pm1 = p - 1.0
    add = coeff * pm1 * dt
    inv = 1.0 / pm1
    for i in range(n):
        u = values[i]
        if u <= 0.0:
            if -u > clamp:
                clamp = -u
            out[i] = 0.0
        else:
            out[i] = u * (1.0 + add * _pow_scalar(u, pm1)) ** (-inv)
    return out, clamp


def _power_mass_py(values, p):
    """Sum of u^p over nodes, negatives treated as zero (measure factor applied by caller)."""
    n = values.shape[0]
    s = 0.0
    for i in range(n):
        u = values[i]
        if u > 0.0:
            s += _pow_scalar(u, p)
    return s


def _interp_periodic_1d_py(values, half_length, queries):
    n = values.shape[0]
    dx = 2.0 * half_length / n
    out = np.empty(queries.shape[0])
    for i in range(queries.shape[0]):
        s = (queries[i] + half_length) / dx
        i0 = int(np.floor(s))
        f = s - i0
        i0 = i0 % n
        i1 = (i0 + 1) % n
        out[i] = (1.0 - f) * values[i0] + f * values[i1]
    return out


def _interp_periodic_2d_py(values, half_length, queries):
    n = values.shape[0]
    dx = 2.0 * half_length / n
    m = queries.shape[0]
    out = np.empty(m)
    for i in range(m):
        sx = (queries[i, 0] + half_length) / dx
        sy = (queries[i, 1] + half_length) / dx
        ix = int(np.floor(sx))
        iy = int(np.floor(sy))
        fx = sx - ix
        fy = sy - iy
        ix = ix % n
        iy = iy % n
        jx = (ix + 1) % n
        jy = (iy + 1) % n
        out[i] = ((1.0 - fx) * (1.0 - fy) * values[ix, iy]
                  + fx * (1.0 - fy) * values[jx, iy]
                  + (1.0 - fx) * fy * values[ix, jy]
                  + fx * fy * values[jx, jy])
    return out


def absorb_numpy(values, p, dt, coeff=1.0):
    """Vectorized twin of _absorb_py used by the fallback path."""
    flat = values.ravel()
    pos = flat > 0.0
    clamp = float(-flat.min()) if not pos.all() else 0.0
    clamp = max(clamp, 0.0)
    out = np.zeros_like(flat)
    u = flat[pos]
    add = coeff * (p - 1.0) * dt
    out[pos] = u * (1.0 + add * u ** (p - 1.0)) ** (-1.0 / (p - 1.0))
    return out.reshape(values.shape), clamp


def power_mass_numpy(values, p):
    flat = values.ravel()
    u = flat[flat > 0.0]
    return float(np.sum(u ** p))


def interp_periodic_numpy(values, half_length, queries):
    n = values.shape[0]
    dx = 2.0 * half_length / n
    if values.ndim == 1:
        s = (queries + half_length) / dx
        i0 = np.floor(s).astype(np.int64)
        f = s - i0
        i0 %= n
        i1 = (i0 + 1) % n
        return (1.0 - f) * values[i0] + f * values[i1]
    sx = (queries[:, 0] + half_length) / dx
    sy = (queries[:, 1] + half_length) / dx
    ix = np.floor(sx).astype(np.int64)
    iy = np.floor(sy).astype(np.int64)
    fx = sx - ix
    fy = sy - iy
    ix %= n
    iy %= n
    jx = (ix + 1) % n
    jy = (iy + 1) % n
    return ((1.0 - fx) * (1.0 - fy) * values[ix, iy]
            + fx * (1.0 - fy) * values[jx, iy]
            + (1.0 - fx) * fy * values[ix, jy]
            + fx * fy * values[jx, jy])


if USE_NUMBA:
    # rebind the scalar helper first so the jitted callers resolve it to the
    # compiled dispatcher when their own compilation runs
    _pow_scalar = njit(cache=True, inline="always")(_pow_scalar)
    _absorb_jit = njit(cache=True)(_absorb_py)
    _power_mass_jit = njit(cache=True)(_power_mass_py)
    _interp1_jit = njit(cache=True)(_interp_periodic_1d_py)
    _interp2_jit = njit(cache=True)(_interp_periodic_2d_py)

    def absorb(values, p, dt, coeff=1.0):
        out, clamp = _absorb_jit(values.ravel(), float(p), float(dt), float(coeff))
        return out.reshape(values.shape), clamp

    def power_mass(values, p):
        return _power_mass_jit(values.ravel(), float(p))

    def interp_periodic(values, half_length, queries):
        if values.ndim == 1:
            return _interp1_jit(values, float(half_length), queries)
        return _interp2_jit(values, float(half_length), queries)
else:
    absorb = absorb_numpy
    power_mass = power_mass_numpy
    interp_periodic = interp_periodic_numpy


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
