"""Periodic grids, complex fields, and discrete Fourier transforms.

Everything else in the lab computes on these. The transform convention is
the integral one: forward kernel e^{-i x.xi} with rectangle-rule weight
dx^n, inverse carrying (2 pi)^{-n}. Sample points sit at cell centers,
x_j = -L/2 + (j + 1/2) dx, so that balls whose radius is a multiple of dx
have exactly the right discrete measure.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

KSLF_MAGIC = b"KSLF"
KSLT_MAGIC = b"KSLT"
KSLF_VERSION = 1


class GridResolutionError(ValueError):
    """A requested scale cannot be represented on the grid."""


class FieldFormatError(ValueError):
    """Malformed field file; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L/2, L/2)^n with N cells per axis."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n < 1 or self.n > 3:
            raise ValueError(f"dimension n={self.n} outside supported range 1..3")
        if self.N < 8 or self.N % 2 != 0:
            raise ValueError(f"N={self.N} must be even and >= 8")
        if not self.L > 0:
            raise ValueError(f"period L={self.L} must be positive")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.L

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def nyquist(self) -> float:
        """Largest representable |xi| along one axis."""
        return np.pi / self.dx

    def x_axis(self) -> np.ndarray:
        j = np.arange(self.N)
        return -self.L / 2 + (j + 0.5) * self.dx

    def x_mesh(self) -> list:
        ax = self.x_axis()
        return list(np.meshgrid(*([ax] * self.n), indexing="ij", sparse=True))

    def xi_axis(self) -> np.ndarray:
        """Frequency nodes 2 pi k / L in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    def xi_mesh(self) -> list:
        ax = self.xi_axis()
        return list(np.meshgrid(*([ax] * self.n), indexing="ij", sparse=True))

    def xi_radius(self) -> np.ndarray:
        mesh = self.xi_mesh()
        return np.sqrt(sum(m**2 for m in mesh))


@dataclass(frozen=True)
class Field:
    """Complex samples on a Grid (either side of the transform)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError(f"sample shape {v.shape} != grid shape {self.grid.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def l2(self) -> float:
        """Spatial L2 norm with rectangle weight dx^n."""
        return float(np.sqrt(self.grid.dx**self.grid.n * np.sum(np.abs(self.values) ** 2)))

    def l2_freq(self) -> float:
        """L2 norm of a frequency-side field, weight (2 pi)^-n dxi^n."""
        g = self.grid
        w = g.dxi**g.n / (2.0 * np.pi) ** g.n
        return float(np.sqrt(w * np.sum(np.abs(self.values) ** 2)))


@dataclass(frozen=True)
class SpacetimeField:
    """Time-sampled evolution: slices[s] is the field at times[s]."""

    grid: Grid
    times: np.ndarray
    slices: np.ndarray  # shape (S,) + grid.shape

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.ascontiguousarray(self.slices, dtype=np.complex128)
        if t.ndim != 1 or len(t) < 1:
            raise ValueError("times must be a nonempty 1-d array")
        if s.shape != (len(t),) + self.grid.shape:
            raise ValueError(f"slice shape {s.shape} incompatible with times/grid")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if len(t) > 2:
            dt = np.diff(t)
            if np.max(np.abs(dt - dt[0])) > 1e-12 * max(abs(t[-1]), abs(t[0]), 1.0):
                raise ValueError("time samples must be uniformly spaced")
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "slices", s)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def slice_field(self, s: int) -> Field:
        return Field(self.grid, self.slices[s])


def _axis_phase(grid: Grid, sign: float) -> list:
    # e^{sign * i * x0 * xi_k} per axis, x0 = -L/2 + dx/2 (cell-center offset)
    x0 = -grid.L / 2 + grid.dx / 2
    ph = np.exp(sign * 1j * x0 * grid.xi_axis())
    out = []
    for axis in range(grid.n):
        shape = [1] * grid.n
        shape[axis] = grid.N
        out.append(ph.reshape(shape))
    return out


def dft(f: Field) -> Field:
    """Forward transform: fhat(xi_k) = dx^n sum_j e^{-i x_j xi_k} f(x_j)."""
    g = f.grid
    out = np.fft.fftn(f.values) * g.dx**g.n
    for ph in _axis_phase(g, -1.0):
        out = out * ph
    return Field(g, out)


def idft(fhat: Field) -> Field:
    """Inverse of dft; carries the (2 pi)^{-n} of the integral convention."""
    g = fhat.grid
    v = fhat.values
    for ph in _axis_phase(g, +1.0):
        v = v * ph
    return Field(g, np.fft.ifftn(v) / g.dx**g.n)


def parseval_defect(f: Field) -> float:
    """Relative mismatch between the two sides of the Parseval identity."""
    a = f.l2()
    b = dft(f).l2_freq()
    return abs(a - b) / max(a, 1e-300)


# ---------------------------------------------------------------------------
# Field recipes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sector:
    """Annular sector 1/2 <= |xi| <= 2 within angle pi/4 (chordal) of e1."""

    def contains(self, mesh: list) -> np.ndarray:
        rho = np.sqrt(sum(m**2 for m in mesh))
        rho_safe = np.where(rho > 0, rho, 1.0)
        chord2 = (mesh[0] / rho_safe - 1.0) ** 2
        for m in mesh[1:]:
            chord2 = chord2 + (m / rho_safe) ** 2
        ok = (rho >= 0.5) & (rho <= 2.0) & (np.sqrt(chord2) <= np.pi / 4)
        return ok & (rho > 0)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def contains(self, mesh: list) -> np.ndarray:
        d2 = sum((m - c) ** 2 for m, c in zip(mesh, self.center))
        return d2 < self.radius**2


@dataclass(frozen=True)
class Annulus:
    r_inner: float
    r_outer: float

    def contains(self, mesh: list) -> np.ndarray:
        rho = np.sqrt(sum(m**2 for m in mesh))
        return (rho >= self.r_inner) & (rho <= self.r_outer)


@dataclass(frozen=True)
class GaussianRecipe:
    center: tuple = (0.0,)
    width: float = 1.0


@dataclass(frozen=True)
class RandomBandlimited:
    region: object = field(default_factory=Sector)
    seed: int = 0


@dataclass(frozen=True)
class KnappRecipe:
    """Mollified frequency plate inside the sector.

    Thickness 1/R along the e1 axis in one dimension; for n >= 2 the plate
    is 1/R^2 thick along e1 and 1/R wide transversally.
    """

    R: float
    center_xi: float = 1.2


@dataclass(frozen=True)
class FileRecipe:
    path: str


def _smoothstep(u: np.ndarray) -> np.ndarray:
    # C-infinity ramp: 0 for u<=0, 1 for u>=1.
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def make_field(grid: Grid, recipe) -> Field:
    """Build a field from a declarative recipe; deterministic given seeds."""
    if isinstance(recipe, GaussianRecipe):
        mesh = grid.x_mesh()
        d2 = sum((m - c) ** 2 for m, c in zip(mesh, recipe.center))
        return Field(grid, np.exp(-d2 / (2.0 * recipe.width**2)).astype(complex))

    if isinstance(recipe, RandomBandlimited):
        rng = np.random.default_rng(recipe.seed)
        shape = grid.shape
        coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        mask = recipe.region.contains(grid.xi_mesh())
        fhat = Field(grid, np.where(mask, coef, 0.0))
        return idft(fhat)

    if isinstance(recipe, KnappRecipe):
        R = recipe.R
        mesh = grid.xi_mesh()
        if grid.n == 1:
            half = [0.5 / R]
        else:
            half = [0.5 / R**2] + [0.5 / R] * (grid.n - 1)
        centers = [recipe.center_xi] + [0.0] * (grid.n - 1)
        prof = np.ones(grid.shape)
        for m, c, h in zip(mesh, centers, half):
            # flat top on 80% of the plate, mollified edges
            u = (h - np.abs(m - c)) / (0.2 * h)
            prof = prof * _smoothstep(u)
        return idft(Field(grid, prof.astype(complex)))

    if isinstance(recipe, FileRecipe):
        return read_field(recipe.path, expect_grid=grid)

    raise TypeError(f"unknown field recipe {recipe!r}")


# ---------------------------------------------------------------------------
# Persistence (bit-exact): magic, version u32, then n, N, L as little-endian
# f64, then interleaved (re, im) f64 samples in row-major order.
# ---------------------------------------------------------------------------


def write_field(f: Field, path: str) -> None:
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(KSLF_MAGIC)
        fh.write(struct.pack("<I", KSLF_VERSION))
        fh.write(struct.pack("<ddd", float(g.n), float(g.N), g.L))
        inter = np.empty(f.values.size * 2, dtype="<f8")
        flat = f.values.reshape(-1)
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def read_field(path: str, expect_grid: Grid | None = None) -> Field:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != KSLF_MAGIC:
        raise FieldFormatError("bad magic, expected KSLF", 0)
    if len(raw) < 8:
        raise FieldFormatError("truncated version", 4)
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != KSLF_VERSION:
        raise FieldFormatError(f"unsupported version {version}", 4)
    if len(raw) < 32:
        raise FieldFormatError("truncated header", 8)
    n_f, N_f, L = struct.unpack_from("<ddd", raw, 8)
    n, N = int(n_f), int(N_f)
    if n_f != n or N_f != N:
        raise FieldFormatError("non-integer dimensions", 8)
    grid = Grid(n, N, L)
    count = N**n
    need = 32 + 16 * count
    if len(raw) != need:
        raise FieldFormatError(f"expected {need} bytes, found {len(raw)}", min(len(raw), need))
    inter = np.frombuffer(raw, dtype="<f8", offset=32)
    values = (inter[0::2] + 1j * inter[1::2]).reshape(grid.shape)
    if expect_grid is not None and grid != expect_grid:
        raise FieldFormatError("grid in file does not match expected grid", 8)
    return Field(grid, values)


def write_spacetime(u: SpacetimeField, path: str) -> None:
    g = u.grid
    with open(path, "wb") as fh:
        fh.write(KSLT_MAGIC)
        fh.write(struct.pack("<I", KSLF_VERSION))
        fh.write(struct.pack("<ddd", float(g.n), float(g.N), g.L))
        fh.write(struct.pack("<d", float(len(u.times))))
        fh.write(np.asarray(u.times, dtype="<f8").tobytes())
        flat = u.slices.reshape(-1)
        inter = np.empty(flat.size * 2, dtype="<f8")
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def read_spacetime(path: str) -> SpacetimeField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != KSLT_MAGIC:
        raise FieldFormatError("bad magic, expected KSLT", 0)
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != KSLF_VERSION:
        raise FieldFormatError(f"unsupported version {version}", 4)
    n_f, N_f, L = struct.unpack_from("<ddd", raw, 8)
    grid = Grid(int(n_f), int(N_f), L)
    (S_f,) = struct.unpack_from("<d", raw, 32)
    S = int(S_f)
    t_end = 40 + 8 * S
    times = np.frombuffer(raw, dtype="<f8", offset=40, count=S)
    count = S * grid.N**grid.n
    need = t_end + 16 * count
    if len(raw) != need:
        raise FieldFormatError(f"expected {need} bytes, found {len(raw)}", min(len(raw), need))
    inter = np.frombuffer(raw, dtype="<f8", offset=t_end)
    slices = (inter[0::2] + 1j * inter[1::2]).reshape((S,) + grid.shape)
    return SpacetimeField(grid, times.copy(), slices)
