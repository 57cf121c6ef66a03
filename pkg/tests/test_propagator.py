import math

import numpy as np
import pytest

from katolab import propagator as P
from katolab import symbols as S
from katolab.core import (Field, Grid, GaussianRecipe, RandomBandlimited,
                          Sector, dft, idft, make_field)

SYM = S.schrodinger(1)


def band_field(grid, seed=0):
    return make_field(grid, RandomBandlimited(Sector(), seed=seed))


def test_time_zero_is_identity():
    g = Grid(1, 256, 32.0)
    f = band_field(g)
    u = P.propagate(f, SYM, [0.0])
    scale = np.max(np.abs(f.values))
    assert np.max(np.abs(u.slices[0] - f.values)) <= 1e-14 * scale


def closed_form_gaussian(x, t):
    # unit-width gaussian under the quadratic flow (forward phase e^{i t xi^2})
    a = 1.0 - 2j * t
    return a**-0.5 * np.exp(-(x**2) / (2 * a))


def quadrature_oracle(x, t, nodes=1 << 16, xi_max=16.0):
    xi = np.linspace(-xi_max, xi_max, nodes, endpoint=False)
    fhat = math.sqrt(2 * math.pi) * np.exp(-(xi**2) / 2.0)
    dxi = xi[1] - xi[0]
    out = (np.exp(1j * t * xi**2) * fhat)[None, :] * np.exp(1j * np.outer(x, xi))
    return out.sum(axis=1) * dxi / (2 * math.pi)


def test_gaussian_propagation_against_both_oracles():
    g = Grid(1, 2048, 64.0)
    f = make_field(g, GaussianRecipe(center=(0.0,), width=1.0))
    t = 0.5
    u = P.propagate(f, SYM, [t]).slices[0]
    x = g.x_axis()
    closed = closed_form_gaussian(x, t)
    quad = quadrature_oracle(x, t)
    assert np.max(np.abs(closed - quad)) <= 1e-8  # oracles agree with each other
    assert np.max(np.abs(u - closed)) <= 1e-6
    assert np.max(np.abs(u - quad)) <= 1e-6


def test_translation_commutes():
    g = Grid(1, 256, 64.0)
    f = band_field(g, 5)
    shift = 7
    times = [0.3, 0.6]
    u = P.propagate(f, SYM, times)
    fr = Field(g, np.roll(f.values, shift))
    ur = P.propagate(fr, SYM, times)
    for s in range(len(times)):
        assert np.max(np.abs(ur.slices[s] - np.roll(u.slices[s], shift))) <= 1e-10


def test_energy_identity():
    g = Grid(1, 512, 64.0)
    worst = 0.0
    for seed in range(10):
        f = band_field(g, seed)
        u = P.propagate(f, SYM, np.linspace(0.0, 8.0, 16))
        worst = max(worst, P.energy_defect(u, f))
    assert worst <= 1e-12


def test_sector_operator_kills_disjoint_support():
    g = Grid(1, 512, 64.0)
    rng = np.random.default_rng(1)
    coef = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    mask = np.abs(g.xi_axis()) <= 0.25
    f = idft(Field(g, np.where(mask, coef, 0)))
    u = P.apply_U(f, SYM, P.canonical_bump(1), [0.0, 0.5])
    assert np.max(np.abs(u.slices)) <= 1e-12 * np.max(np.abs(f.values))


def test_sector_operator_matches_direct_quadrature():
    # data whose transform is the bump itself; compare at t = 0 against
    # direct quadrature of the defining integral on a window far from the
    # torus seam (the discrete sum periodizes the integral at distance L)
    g = Grid(1, 1 << 14, 2048.0)
    bump = P.canonical_bump(1)
    fhat = Field(g, bump.values_1d(g.xi_axis()).astype(complex))
    f = idft(fhat)
    u = P.apply_U(f, SYM, bump, [0.0]).slices[0]
    x = g.x_axis()
    inner = np.abs(x) <= 64.0
    nodes = 1 << 15
    xi = np.linspace(0.4, 2.1, nodes)
    w = bump.values_1d(xi) ** 2
    dxi = xi[1] - xi[0]
    direct = (w[None, :] * np.exp(1j * np.outer(x[inner], xi))).sum(axis=1) * dxi
    assert np.max(np.abs(u[inner] - direct)) <= 1e-8


def test_sector_operator_linear():
    g = Grid(1, 256, 64.0)
    bump = P.canonical_bump(1)
    rng = np.random.default_rng(0)
    f1, f2 = band_field(g, 1), band_field(g, 2)
    for _ in range(20):
        a = complex(rng.standard_normal(), rng.standard_normal())
        b = complex(rng.standard_normal(), rng.standard_normal())
        lhs = P.apply_U(Field(g, a * f1.values + b * f2.values), SYM, bump, [0.4])
        rhs = (a * P.apply_U(f1, SYM, bump, [0.4]).slices[0]
               + b * P.apply_U(f2, SYM, bump, [0.4]).slices[0])
        scale = np.max(np.abs(rhs)) + 1e-30
        assert np.max(np.abs(lhs.slices[0] - rhs)) <= 1e-10 * scale


def test_sector_output_spectrum_stays_in_sector():
    g = Grid(1, 512, 64.0)
    f = Field(g, np.random.default_rng(3).standard_normal(g.shape).astype(complex))
    bump = P.canonical_bump(1)
    u = P.apply_U(f, SYM, bump, [0.0, 1.0, 2.0])
    mask = Sector().contains(g.xi_mesh())
    for s in range(3):
        spec = dft(Field(g, u.slices[s])).values
        outside = np.sum(np.abs(spec[~mask]) ** 2)
        total = np.sum(np.abs(spec) ** 2)
        assert outside <= 1e-12 * total


def test_bessel_weight():
    g = Grid(1, 128, 32.0)
    f = band_field(g, 2)
    assert np.max(np.abs(P.bessel(f, 0.0).values - f.values)) <= 1e-13

    k0 = 11
    xi0 = g.xi_axis()[k0]
    pw = Field(g, np.exp(1j * g.x_axis() * xi0))
    out = P.bessel(pw, 0.8)
    expected = (1 + xi0**2) ** 0.4 * pw.values
    assert np.max(np.abs(out.values - expected)) <= 1e-10 * np.max(np.abs(expected))

    rt = P.bessel(P.bessel(f, 1.0), -1.0)
    assert np.max(np.abs(rt.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))


def test_dyadic_blocks():
    g = Grid(1, 512, 64.0)
    # data inside block 3's flat band [8, 11.2] is reproduced by it alone
    rng = np.random.default_rng(4)
    coef = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    rho = np.abs(g.xi_axis())
    f = idft(Field(g, np.where((rho >= 8.1) & (rho <= 11.0), coef, 0)))
    blk = P.lp_project(f, 3)
    assert np.max(np.abs(blk.values - f.values)) <= 1e-10 * np.max(np.abs(f.values))
    other = P.lp_project(f, 1)
    assert np.max(np.abs(other.values)) <= 1e-10 * np.max(np.abs(f.values))

    const = Field(g, np.ones(g.shape, dtype=complex))
    blk0 = P.lp_project(const, 0)
    assert np.max(np.abs(blk0.values - const.values)) <= 1e-12

    f = Field(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    acc = np.zeros(g.shape, dtype=complex)
    for k in range(P.lp_shell_range(g) + 1):
        acc += P.lp_project(f, k).values
    assert np.max(np.abs(acc - f.values)) <= 1e-10 * np.max(np.abs(f.values))

    with pytest.raises(ValueError):
        P.lp_project(f, 40)


def test_rescaling_identity():
    g = Grid(1, 2048, 64.0)
    f = band_field(g, 7)
    assert P.rescale_check(f, SYM, 0) <= 1e-12
    assert P.rescale_check(f, SYM, 1) <= 1e-6
    assert P.rescale_check(f, SYM, 2) <= 1e-6


def test_rescaling_time_factor():
    # level k with degree m contracts time by 2^{-mk}: check the argument
    # wiring by evolving one step on each side
    g = Grid(1, 1024, 64.0)
    f = band_field(g, 9)
    m = SYM.m
    k = 2
    assert 2.0 ** (-m * k) == 1.0 / 16.0
    assert P.rescale_check(f, SYM, k, times=(0.0, 8.0, 16.0)) <= 1e-6


def test_times_for_window_cap():
    times, capped = P.times_for_window(SYM, 0.0, 1.0, 2.0, max_steps=10)
    assert len(times) <= 10
    t2, capped2 = P.times_for_window(SYM, 0.0, 1.0, 2.0)
    assert not capped2
    dt = np.diff(t2)
    assert np.allclose(dt, dt[0])
