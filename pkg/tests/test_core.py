import numpy as np
import pytest

from katolab.core import (Annulus, Field, FieldFormatError, GaussianRecipe,
                          Grid, KnappRecipe, RandomBandlimited, Sector,
                          dft, idft, make_field, parseval_defect, read_field,
                          write_field)


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return Field(grid, rng.standard_normal(grid.shape)
                 + 1j * rng.standard_normal(grid.shape))


def test_grid_invariants():
    with pytest.raises(ValueError):
        Grid(1, 7, 10.0)  # odd
    with pytest.raises(ValueError):
        Grid(1, 4, 10.0)  # too small
    with pytest.raises(ValueError):
        Grid(1, 64, -1.0)
    g = Grid(2, 16, 8.0)
    xi = g.xi_axis()
    # symmetric about zero except the lone Nyquist node
    assert np.isclose(xi.min(), -g.nyquist)
    pos = np.sort(xi[xi > 0])
    neg = np.sort(-xi[xi < -pos.max() - 1e-12])
    assert len(xi[xi < 0]) == len(xi[xi > 0]) + 1


def test_roundtrip_and_parseval():
    g = Grid(1, 256, 64.0)
    for seed in range(5):
        f = random_field(g, seed)
        rt = idft(dft(f))
        assert np.max(np.abs(rt.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))
        assert parseval_defect(f) <= 1e-12


def test_parseval_many_random():
    g = Grid(1, 128, 32.0)
    worst = max(parseval_defect(random_field(g, s)) for s in range(100))
    assert worst <= 1e-12


def test_constant_field_mass_at_zero():
    g = Grid(1, 64, 16.0)
    fhat = dft(Field(g, np.ones(g.shape, dtype=complex)))
    mags = np.abs(fhat.values)
    assert np.argmax(mags) == 0  # zero node first in fft order
    assert np.sum(mags > 1e-9 * mags.max()) == 1


def test_plane_wave_single_node():
    g = Grid(1, 128, 32.0)
    k0 = 9
    xi0 = g.xi_axis()[k0]
    fhat = dft(Field(g, np.exp(1j * g.x_axis() * xi0)))
    mags = np.abs(fhat.values)
    assert np.argmax(mags) == k0
    others = np.delete(mags, k0)
    assert np.max(others) <= 1e-10 * mags[k0]


def test_translation_is_phase():
    g = Grid(1, 128, 32.0)
    f = random_field(g, 3)
    shift = 5
    rolled = Field(g, np.roll(f.values, shift))
    a = g.dx * shift
    lhs = dft(rolled).values
    rhs = np.exp(-1j * a * g.xi_axis()) * dft(f).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_gaussian_recipe():
    g = Grid(1, 256, 32.0)
    f = make_field(g, GaussianRecipe(center=(0.0,), width=1.0))
    assert np.all(f.values.real > 0)
    assert np.max(np.abs(f.values.imag)) == 0
    assert abs(g.x_axis()[np.argmax(f.values.real)]) <= g.dx


def test_random_bandlimited_deterministic():
    g = Grid(1, 256, 64.0)
    a = make_field(g, RandomBandlimited(Sector(), seed=7))
    b = make_field(g, RandomBandlimited(Sector(), seed=7))
    assert np.array_equal(a.values, b.values)
    c = make_field(g, RandomBandlimited(Sector(), seed=8))
    assert not np.array_equal(a.values, c.values)


def test_knapp_mass_inside_sector():
    g = Grid(1, 1024, 128.0)
    f = make_field(g, KnappRecipe(R=16))
    fhat = dft(f)
    mask = Sector().contains(g.xi_mesh())
    total = np.sum(np.abs(fhat.values) ** 2)
    inside = np.sum(np.abs(fhat.values) ** 2 * mask)
    assert inside / total >= 0.999


def test_annulus_region():
    g = Grid(1, 256, 64.0)
    f = make_field(g, RandomBandlimited(Annulus(0.5, 2.0), seed=1))
    fhat = dft(f)
    rho = np.abs(g.xi_axis())
    outside = (rho < 0.5) | (rho > 2.0)
    assert np.max(np.abs(fhat.values[outside])) <= 1e-10


def test_field_file_roundtrip_bit_exact(tmp_path):
    g = Grid(1, 64, 16.0)
    f = random_field(g, 11)
    p = tmp_path / "f.kslf"
    write_field(f, str(p))
    f2 = read_field(str(p))
    assert f2.grid == g
    assert np.array_equal(f.values, f2.values)
    # bit-exact: a second write produces identical bytes
    p2 = tmp_path / "g.kslf"
    write_field(f2, str(p2))
    assert p.read_bytes() == p2.read_bytes()


def test_field_file_errors(tmp_path):
    p = tmp_path / "bad.kslf"
    p.write_bytes(b"NOPE" + b"\x00" * 40)
    with pytest.raises(FieldFormatError) as exc:
        read_field(str(p))
    assert exc.value.offset == 0

    g = Grid(1, 16, 4.0)
    good = tmp_path / "ok.kslf"
    write_field(random_field(g), str(good))
    raw = good.read_bytes()
    trunc = tmp_path / "trunc.kslf"
    trunc.write_bytes(raw[:-8])
    with pytest.raises(FieldFormatError):
        read_field(str(trunc))
