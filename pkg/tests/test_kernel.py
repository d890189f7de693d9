import numpy as np
import pytest

from nldiff import kernel
from nldiff.errors import UnderresolvedKernel
from nldiff.fields import Grid


def test_epanechnikov_peak_value():
    # normalization of 1 - x^2 on [-1, 1] is 3/4
    k = kernel.make_kernel("epanechnikov", 1.0, 1)
    assert abs(kernel.evaluate(k, np.array([0.0]))[0] - 0.75) < 1e-12


def test_zero_outside_support():
    for fam in kernel.FAMILIES:
        k = kernel.make_kernel(fam, 1.0, 1)
        vals = kernel.evaluate(k, np.array([1.0, 1.5, -2.0, 100.0]))
        assert np.all(vals == 0.0)


def test_bump_vanishes_smoothly_at_edge():
    k = kernel.make_kernel("bump", 1.0, 1)
    near_edge = kernel.evaluate(k, np.array([0.999]))[0]
    assert 0.0 < near_edge < 1e-200


def test_epanechnikov_diffusivity_exact():
    # (1/2) * int (3/4)(1 - x^2) x^2 dx = (3/8)(2/3 - 2/5) = 1/10
    k = kernel.make_kernel("epanechnikov", 1.0, 1)
    assert abs(kernel.diffusivity(k) - 0.1) < 1e-10


def test_quartic_diffusivity_exact():
    # normalization 15/16, second moment integral 16/105, a = 1/14
    k = kernel.make_kernel("quartic", 1.0, 1)
    assert abs(k.normalization - 15.0 / 16.0) < 1e-12
    assert abs(kernel.diffusivity(k) - 1.0 / 14.0) < 1e-10


def test_quartic_2d_closed_forms():
    # c = 3/pi from int (1-r^2)^2 2 pi r dr = pi/3; a = 1/16
    k = kernel.make_kernel("quartic", 1.0, 2)
    assert abs(k.normalization - 3.0 / np.pi) < 1e-12
    assert abs(kernel.diffusivity(k) - 1.0 / 16.0) < 1e-10


def test_epanechnikov_2d_closed_forms():
    k = kernel.make_kernel("epanechnikov", 1.0, 2)
    assert abs(k.normalization - 2.0 / np.pi) < 1e-12
    assert abs(kernel.diffusivity(k) - 1.0 / 12.0) < 1e-10


def test_quartic_2d_mass_riemann():
    # row-chunked Riemann sum over [-1, 1)^2 approximates unit mass
    k = kernel.make_kernel("quartic", 1.0, 2)
    n = 2048
    dx = 2.0 / n
    ax = -1.0 + dx * np.arange(n)
    total = 0.0
    for i in range(0, n, 256):
        gx = ax[i:i + 256][:, None]
        gy = ax[None, :]
        pts = np.stack([np.broadcast_to(gx, (gx.shape[0], n)).ravel(),
                        np.broadcast_to(gy, (gx.shape[0], n)).ravel()], axis=-1)
        total += float(kernel.evaluate(k, pts).sum())
    assert abs(total * dx * dx - 1.0) < 1e-6


def test_diffusivity_dilation():
    # a scales like R^2: a(R) = a(1) R^2
    base = kernel.diffusivity(kernel.make_kernel("epanechnikov", 1.0, 1))
    for r in (2.0, 4.0, 0.5):
        scaled = kernel.diffusivity(kernel.make_kernel("epanechnikov", r, 1))
        assert abs(scaled - base * r * r) < 1e-12 * max(1.0, r * r)


def test_kernel_mass_is_one_by_quadrature():
    from scipy.integrate import quad
    for fam in kernel.FAMILIES:
        k = kernel.make_kernel(fam, 1.5, 1)

        def f(x):
            return kernel.evaluate(k, np.array([x]))[0]

        val, _ = quad(f, -1.5, 1.5, epsabs=1e-13, limit=200)
        assert abs(val - 1.0) < 1e-9


def test_make_kernel_validation():
    with pytest.raises(ValueError):
        kernel.make_kernel("triangle", 1.0, 1)
    with pytest.raises(ValueError):
        kernel.make_kernel("bump", -1.0, 1)
    with pytest.raises(ValueError):
        kernel.make_kernel("bump", 1.0, 3)


def test_symbol_zero_frequency_exactly_one():
    k = kernel.make_kernel("epanechnikov", 1.0, 1)
    sym = kernel.spectral_symbol(k, 4096, 16.0)
    assert sym.values.flat[0] == 1.0


def test_symbol_range_real_even():
    k = kernel.make_kernel("quartic", 1.0, 1)
    sym = kernel.spectral_symbol(k, 2048, 8.0)
    v = sym.values
    assert v.dtype == np.float64
    assert np.all(v <= 1.0) and np.all(v >= -1.0)
    assert np.allclose(v[1:], v[1:][::-1], atol=1e-14)


def test_epanechnikov_symbol_vs_continuum_transform():
    # J_hat(xi) = 3 (sin xi - xi cos xi) / xi^3 for the unit epanechnikov
    k = kernel.make_kernel("epanechnikov", 1.0, 1)
    n, L = 32768, 16.0
    sym = kernel.spectral_symbol(k, n, L)
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=2.0 * L / n)
    sel = (np.abs(xi) > 1e-9) & (np.abs(xi) <= 40.0)
    x = xi[sel]
    exact = 3.0 * (np.sin(x) - x * np.cos(x)) / x ** 3
    assert np.max(np.abs(sym.values[sel] - exact)) < 1e-6


def test_symbol_grid_form_matches_raw_form():
    k = kernel.make_kernel("epanechnikov", 1.0, 1)
    g = Grid(1, 1024, 8.0)
    a = kernel.spectral_symbol(k, g)
    b = kernel.spectral_symbol(k, 1024, 8.0)
    assert np.array_equal(a.values, b.values)
    assert a.grid_key == (1, 1024, 8.0)


def test_symbol_dimension_mismatch():
    k = kernel.make_kernel("epanechnikov", 1.0, 2)
    with pytest.raises(ValueError):
        kernel.spectral_symbol(k, Grid(1, 1024, 8.0))


def test_underresolved_kernel_rejected():
    k = kernel.make_kernel("epanechnikov", 1.0, 1)
    with pytest.raises(UnderresolvedKernel):
        kernel.spectral_symbol(k, 256, 16.0)  # dx = 1/8 > 1/16


def test_discrete_mass_defect_epanechnikov():
    # Riemann sum of 1 - x^2 with nodes on the kink: defect = 1/(4 m^2),
    # m nodes per unit length
    k = kernel.make_kernel("epanechnikov", 1.0, 1)
    d1 = kernel.discrete_mass_defect(k, 4096, 16.0)   # m = 128
    d2 = kernel.discrete_mass_defect(k, 8192, 16.0)   # m = 256
    assert abs(d1 - 1.0 / (4.0 * 128 ** 2)) < 1e-9
    assert 3.5 < d1 / d2 < 4.5


def test_discrete_mass_defect_fine_grid_tiny():
    k = kernel.make_kernel("epanechnikov", 1.0, 1)
    assert kernel.discrete_mass_defect(k, 2 ** 18, 2.0) < 1e-10


def test_discrete_mass_defect_smooth_families():
    # quartic has a vanishing edge derivative (O(h^4) defect); bump is
    # flat to all orders at the edge, so its lattice sum is spectrally exact
    q = kernel.make_kernel("quartic", 1.0, 1)
    b = kernel.make_kernel("bump", 1.0, 1)
    assert kernel.discrete_mass_defect(q, 4096, 16.0) < 1e-8
    assert kernel.discrete_mass_defect(b, 4096, 16.0) < 1e-12


def test_displacement_samples_layout():
    k = kernel.make_kernel("epanechnikov", 1.0, 1)
    s = kernel.displacement_samples(k, 512, 8.0)
    assert s[0] == kernel.evaluate(k, np.array([0.0]))[0]
    # circular: index n-1 is displacement -dx
    dx = 16.0 / 512
    assert abs(s[-1] - kernel.evaluate(k, np.array([-dx]))[0]) < 1e-15
