import numpy as np
import pytest

from nldiff import fundamental, heat, kernel
from nldiff.errors import EmptyExclusionRegion
from nldiff.fields import (Field, Grid, convolve, delta_field, integrate,
                           interpolate, sup_norm)


def test_mass_law_1d(kern1, grid_medium):
    for t in (0.01, 1.0, 10.0):
        w = fundamental.w_field(kern1, grid_medium, t).field
        assert abs(integrate(w) - (1.0 - np.exp(-t))) < 1e-8


def test_mass_law_2d(kern2):
    g = Grid(2, 512, 16.0)
    w = fundamental.w_field(kern2, g, 2.0).field
    assert abs(integrate(w) - (1.0 - np.exp(-2.0))) < 1e-8


def test_w_nonnegative(kern1, grid_medium):
    for t in (0.1, 1.0, 20.0):
        w = fundamental.w_field(kern1, grid_medium, t).field
        assert np.min(w.values) >= -1e-10 * sup_norm(w)


def test_w_at_time_zero_vanishes(kern1, grid_small):
    w = fundamental.w_field(kern1, grid_small, 0.0).field
    assert sup_norm(w) < 1e-14
    with pytest.raises(ValueError):
        fundamental.w_field(kern1, grid_small, -1.0)


def test_multiplier_zero_frequency_values(kern1, grid_small):
    sym = kernel.spectral_symbol(kern1, grid_small)
    t = 3.0
    assert abs(fundamental.w_multiplier(sym.values, t)[0]
               - (1.0 - np.exp(-t))) < 1e-15
    assert abs(fundamental.wt_multiplier(sym.values, t)[0]
               - np.exp(-t)) < 1e-15


def test_wt_matches_time_difference(kern1, grid_medium):
    t, h = 2.0, 1e-4
    wt = fundamental.wt_field(kern1, grid_medium, t)
    wp = fundamental.w_field(kern1, grid_medium, t + h).field
    wm = fundamental.w_field(kern1, grid_medium, t - h).field
    fd = (wp.values - wm.values) / (2.0 * h)
    assert np.max(np.abs(wt.values - fd)) < 1e-6


def test_w_solves_its_evolution_equation(kern1):
    # independent RK4 integration of W_t = J*W - W + exp(-t) J from W(0) = 0
    g = Grid(1, 2048, 16.0)
    sym = kernel.spectral_symbol(kern1, g)
    j_discrete = convolve(delta_field(g), sym).values

    def rhs(w_vals, t):
        conv = np.fft.ifft(np.fft.fft(w_vals) * sym.values).real
        return conv - w_vals + np.exp(-t) * j_discrete

    t_end, dt = 2.0, 2e-3
    steps = int(round(t_end / dt))
    w = np.zeros(g.shape)
    t = 0.0
    for _ in range(steps):
        k1 = rhs(w, t)
        k2 = rhs(w + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(w + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(w + dt * k3, t + dt)
        w = w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
    exact = fundamental.w_field(kern1, g, t_end).field
    assert np.max(np.abs(w - exact.values)) < 1e-6


def test_grad_components_zero_mean_and_antisymmetric(kern1, grid_medium):
    comps = fundamental.grad_w_field(kern1, grid_medium, 2.0)
    assert len(comps) == 1
    vals = comps[0].values
    scale = np.max(np.abs(vals))
    assert abs(vals.sum() * grid_medium.cell_measure) < 1e-9 * max(scale, 1.0)
    # odd in x: vals[j] = -vals[n - j] off the two self-paired nodes
    n = grid_medium.points_per_axis
    assert np.max(np.abs(vals[1:] + vals[1:][::-1])) < 1e-10 * scale


def test_fd_gradient_of_affine_wave():
    g = Grid(1, 512, 8.0)
    x = g.axis()
    u = Field(g, np.sin(np.pi * x / 8.0))
    d = fundamental.fd_gradient(u)[0]
    exact = np.pi / 8.0 * np.cos(np.pi * x / 8.0)
    assert np.max(np.abs(d.values - exact)) < (np.pi / 8.0) ** 3 * g.spacing ** 2


def test_spectral_and_fd_gradient_l1_norms_agree(kern1):
    # the spectral route's kink ripple is oscillatory; on a fine grid the
    # two readings of ||grad W||_1 agree to 1e-4 relative
    g = Grid(1, 262144, 32.0)
    t = 4.0
    spec = fundamental.grad_w_field(kern1, g, t)[0]
    fd = fundamental.fd_gradient(fundamental.w_field(kern1, g, t).field)[0]
    a = fundamental.l1_norm(spec)
    b = fundamental.l1_norm(fd)
    assert abs(a - b) / b < 1e-4


def test_grad_norm_field_matches_fd_magnitude(kern1, grid_small):
    t = 1.5
    mag = fundamental.grad_norm_field(kern1, grid_small, t)
    fd = fundamental.fd_gradient(fundamental.w_field(kern1, grid_small, t).field)
    assert np.array_equal(mag.values, np.abs(fd[0].values))


def test_wt_sup_decays_beyond_ten(kern1, grid_medium):
    sups = [sup_norm(fundamental.wt_field(kern1, grid_medium, t))
            for t in (10.0, 20.0, 40.0, 80.0)]
    assert all(b < a for a, b in zip(sups, sups[1:]))


def test_w_approaches_heat_kernel(kern1):
    # sqrt(t) sup |W - U| decreasing for t >= 10 and small by t = 200
    g = Grid(1, 8192, 64.0)
    a = kernel.diffusivity(kern1)
    gaps = []
    for t in (10.0, 20.0, 50.0, 100.0, 200.0):
        w = fundamental.w_field(kern1, g, t).field
        u = heat.gaussian_point_source(1.0, a, g, t)
        gaps.append(np.sqrt(t) * float(np.max(np.abs(w.values - u.values))))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.05 / np.sqrt(4.0 * np.pi * a)


def test_w_rescaled_reading_stable_under_grid_refinement(kern1):
    # the rescaled quantity 2 W(2x, 4) is computed twice, once from a base
    # grid and once from a half-spacing grid; the two readings agree in
    # sup-norm to 1e-4 relative on the inner window
    base = Grid(1, 4096, 32.0)
    fine = Grid(1, 8192, 32.0)
    w_base = fundamental.w_field(kern1, base, 4.0).field
    w_fine = fundamental.w_field(kern1, fine, 4.0).field
    x = base.axis()
    sel = np.abs(x) <= 8.0
    read_base = 2.0 * interpolate(w_base, 2.0 * x[sel])
    read_fine = 2.0 * interpolate(w_fine, 2.0 * x[sel])
    defect = np.max(np.abs(read_base - read_fine))
    assert defect / np.max(np.abs(read_fine)) < 1e-4


def test_exclusion_mask_and_empty_region(kern1, grid_medium):
    mask = fundamental.exclusion_mask(grid_medium, kern1, 4.0)
    r = grid_medium.radius()
    assert np.array_equal(mask, r >= 8.0)
    small_t = fundamental.exclusion_mask(grid_medium, kern1, 0.01)
    assert np.array_equal(small_t, r >= 2.0 * kern1.support_radius)
    with pytest.raises(EmptyExclusionRegion):
        fundamental.exclusion_mask(grid_medium, kern1, 100.0)


def test_barrier_report_structure(kern1, grid_medium):
    rep = fundamental.barrier_report(kern1, grid_medium, (1.0, 2.0, 4.0))
    assert list(rep.column("t")) == [1.0, 2.0, 4.0]
    for name in ("c_w", "c_grad", "c_t", "l1_grad", "l1_wt"):
        col = rep.column(name)
        assert np.all(np.isfinite(col)) and np.all(col > 0)
    for row in rep.rows:
        assert abs(row.mass - (1.0 - np.exp(-row.t))) < 1e-8
        assert abs(row.g1 - row.l1_grad * max(np.sqrt(row.t), 1.0 / row.t)) < 1e-15
        assert abs(row.t1 - row.l1_wt * row.t) < 1e-15
    assert rep.spread("g1") >= 1.0


def test_barrier_l1_branches_stay_bounded(kern1):
    # ||grad W||_1 ~ 1/sqrt(t) for large t and ~ t for small t
    g = Grid(1, 8192, 64.0)
    large = fundamental.barrier_report(kern1, g, (1.0, 4.0, 16.0, 64.0))
    assert large.spread("g1") <= 4.0
    assert large.spread("t1") <= 4.0
    small = fundamental.barrier_report(kern1, Grid(1, 4096, 16.0),
                                       (1e-3, 1e-2, 1e-1))
    assert small.spread("g1") <= 4.0


def test_barrier_report_validation(kern1, grid_small):
    with pytest.raises(ValueError):
        fundamental.barrier_report(kern1, grid_small, ())
    with pytest.raises(ValueError):
        fundamental.barrier_report(kern1, grid_small, (0.0, 1.0))
