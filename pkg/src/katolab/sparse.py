"""Sparse-ball machinery: surface measure decay, restriction sampling,
sparse families, the decoupling check, and the recursive cube decomposition.

All set geometry here (cube sets, separations, level thresholds) runs in
exact integer/rational arithmetic; floating point enters only through the
oscillatory quadratures.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import symbols as sym_mod
from .core import SpacetimeField
from .symbols import SymbolSpec


class ScaleError(ValueError):
    """A recursion radius left the representable coordinate range."""


# ---------------------------------------------------------------------------
# Surface measure and restriction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfacePatch:
    """The graph {(Phi(xi), xi)} over the sector, sampled for quadrature.

    Nodes are midpoints of the parameter interval; weights carry the area
    element sqrt(1 + |grad Phi|^2) times the parameter cell measure.
    """

    sym: SymbolSpec
    xi: np.ndarray
    weights: np.ndarray

    @property
    def tau(self) -> np.ndarray:
        return sym_mod.value(self.sym, [self.xi])

    def points(self) -> np.ndarray:
        """Surface samples as rows (tau, xi) in spacetime frequency."""
        return np.stack([self.tau, self.xi], axis=1)


def surface_patch(sym: SymbolSpec, samples: int = 2048) -> SurfacePatch:
    if sym.n != 1:
        raise NotImplementedError("surface sampling implemented for n = 1")
    lo, hi = 0.5, 2.0
    dxi = (hi - lo) / samples
    xi = lo + (np.arange(samples) + 0.5) * dxi
    grad = sym_mod.gradient(sym, [xi])[0]
    weights = np.sqrt(1.0 + grad**2) * dxi
    return SurfacePatch(sym=sym, xi=xi, weights=weights)


def surface_fourier(patch: SurfacePatch, zeta) -> complex:
    """Transform of the surface measure, int_S e^{-i z . zeta} dsigma(z)."""
    zeta = np.asarray(zeta, dtype=float)
    phase = zeta[0] * patch.tau + zeta[1] * patch.xi
    return complex(np.sum(patch.weights * np.exp(-1j * phase)))


def surface_measure(patch: SurfacePatch) -> float:
    return float(np.sum(patch.weights))


def restriction(u: SpacetimeField, patch: SurfacePatch) -> np.ndarray:
    """Spacetime transform of u sampled on the surface.

    Direct rectangle-rule evaluation of the (1+1)-dimensional transform at
    the patch nodes; u must be compactly supported in its box (callers can
    check leakage with `support_leakage`).
    """
    g = u.grid
    if g.n != 1:
        raise NotImplementedError("restriction implemented for n = 1")
    x = g.x_axis()
    # spatial transform at the patch frequencies, then the time transform
    Ex = np.exp(-1j * np.outer(x, patch.xi))  # (N, M)
    B = u.slices @ Ex * g.dx  # (S, M)
    wt = u.dt if len(u.times) > 1 else 1.0
    Et = np.exp(-1j * np.outer(u.times, patch.tau))  # (S, M)
    return wt * np.sum(Et * B, axis=0)


def extension(gvals: np.ndarray, patch: SurfacePatch, grid, times) -> SpacetimeField:
    """Adjoint of restriction: sum of surface samples against e^{+i z.zeta}."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x = grid.x_axis()
    Ex = np.exp(1j * np.outer(x, patch.xi))  # (N, M)
    amp = patch.weights * gvals
    out = np.empty((len(times), grid.N), dtype=np.complex128)
    for s, t in enumerate(times):
        out[s] = Ex @ (amp * np.exp(1j * t * patch.tau))
    return SpacetimeField(grid, times, out)


def support_leakage(u: SpacetimeField, frac: float = 0.05) -> float:
    """Share of |u|^2 mass within `frac` of the box edges (warn-level)."""
    g = u.grid
    x = g.x_axis()
    edge = np.abs(x) > (0.5 - frac) * g.L
    total = float(np.sum(np.abs(u.slices) ** 2))
    return float(np.sum(np.abs(u.slices[:, edge]) ** 2) / max(total, 1e-300))


# ---------------------------------------------------------------------------
# Sparse families (exact arithmetic)
# ---------------------------------------------------------------------------


def gamma_exponent(n: int, rho: Fraction | None = None) -> Fraction:
    """gamma = n / rho with the curved-surface decay rate rho = n/2."""
    if rho is None:
        rho = Fraction(n, 2)
    return Fraction(n, 1) / rho


@dataclass(frozen=True)
class SparseFamily:
    centers: tuple  # tuples of ints (or Fractions)
    H: int
    gamma: Fraction = Fraction(2)

    @property
    def N(self) -> int:
        return len(self.centers)


def _dist2(a, b):
    # exact: plain int when both endpoints are ints, Fraction otherwise
    if all(isinstance(c, int) for c in a) and all(isinstance(c, int) for c in b):
        return sum((x - y) ** 2 for x, y in zip(a, b))
    return sum((Fraction(x) - Fraction(y)) ** 2 for x, y in zip(a, b))


def _sep_ok(d2, N: int, H: int, gamma: Fraction) -> bool:
    # |dz| >= (N H)^gamma  <=>  |dz|^(2q) >= (N H)^(2p), gamma = p/q
    p, q = gamma.numerator, gamma.denominator
    if isinstance(d2, int):
        return d2**q >= (N * H) ** (2 * p)
    return d2**q >= Fraction(N * H) ** (2 * p)


def is_sparse(family: SparseFamily) -> bool:
    """Exact predicate: pairwise center separation at least (N H)^gamma."""
    cs = family.centers
    for i in range(len(cs)):
        for j in range(i + 1, len(cs)):
            if not _sep_ok(_dist2(cs[i], cs[j]), family.N, family.H, family.gamma):
                return False
    return True


@dataclass(frozen=True)
class CubeSet:
    """Finite union of unit cubes, identified by integer corner points."""

    dim: int
    points: tuple  # tuple of int tuples

    def __post_init__(self):
        pts = tuple(tuple(int(c) for c in p) for p in self.points)
        if len(set(pts)) != len(pts):
            raise ValueError("cube corners must be unique")
        if not pts:
            raise ValueError("cube set must be nonempty")
        for p in pts:
            if len(p) != self.dim:
                raise ValueError(f"point {p} does not have dimension {self.dim}")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_csv(cls, path: str) -> "CubeSet":
        with open(path, newline="") as fh:
            rows = [tuple(int(c) for c in row) for row in csv.reader(fh) if row]
        if not rows:
            raise ValueError(f"no points in {path}")
        return cls(dim=len(rows[0]), points=tuple(rows))

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for p in self.points:
                w.writerow(p)


H_LIMIT = 10**60  # defensive only: radii are exact big integers


@dataclass(frozen=True)
class SparseLevel:
    k: int
    H_k: int
    ball_radius: int  # radius used for covering: previous level's H
    members: tuple
    families: tuple  # of SparseFamily


def sparse_decompose(E: CubeSet, K: int, gamma: Fraction = Fraction(2)) -> list:
    """Split a cube set into K levels of sparse ball families.

    Level radii follow the recursion H_k = |E|^gamma H_{k-1}^gamma from
    H_0 = 1; a point joins level k when its H_k-ball captures at most
    |E|^(k/K) of the set. Each level is covered greedily by balls of the
    previous radius centered at a maximal separated subset, and the balls
    are packed into families first-fit under the exact separation predicate
    (re-verified for the grown family size on every insertion).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    pts = list(E.points)
    size = len(pts)
    remaining = set(range(size))
    levels = []
    H_prev = 1
    p, q = gamma.numerator, gamma.denominator
    for k in range(1, K + 1):
        hk_frac = Fraction(size) ** gamma * Fraction(H_prev) ** gamma
        if hk_frac.denominator != 1:
            H_k = int(math.ceil(hk_frac))
        else:
            H_k = int(hk_frac)
        if H_k > H_LIMIT:
            raise ScaleError(f"level {k} radius {H_k} exceeds the supported range")
        members = []
        if k == K:
            members = sorted(remaining)
        else:
            # count^K <= size^k exactly, with count = |E ∩ B(x, H_k)|
            hk2 = H_k * H_k
            for i in sorted(remaining):
                count = 0
                for jpt in pts:
                    if _dist2(pts[i], jpt) <= hk2:
                        count += 1
                if count**K <= size**k:
                    members.append(i)
        remaining -= set(members)
        families = _cover_and_pack([pts[i] for i in members], H_prev, gamma)
        levels.append(SparseLevel(k=k, H_k=H_k, ball_radius=H_prev,
                                  members=tuple(pts[i] for i in members),
                                  families=tuple(families)))
        H_prev = H_k
    return levels


def _cover_and_pack(points: list, radius: int, gamma: Fraction) -> list:
    if not points:
        return []
    r2 = radius * radius
    centers = []
    for pt in points:
        if all(_dist2(pt, c) > r2 for c in centers):
            centers.append(pt)
    families: list = []
    for c in centers:
        placed = False
        for fam in families:
            grown = fam + [c]
            N = len(grown)
            ok = True
            for i in range(N):
                for j in range(i + 1, N):
                    if not _sep_ok(_dist2(grown[i], grown[j]), N, radius, gamma):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                fam.append(c)
                placed = True
                break
        if not placed:
            families.append([c])
    return [SparseFamily(centers=tuple(f), H=radius, gamma=gamma) for f in families]


def audit_decomposition(E: CubeSet, levels: list) -> dict:
    """Exact audit: partition, cover, and per-family sparsity."""
    seen: dict = {}
    for lv in levels:
        for ptp in lv.members:
            seen[ptp] = seen.get(ptp, 0) + 1
    partition_ok = (set(seen) == set(E.points)
                    and all(v == 1 for v in seen.values()))
    cover_ok = True
    sparse_ok = True
    max_families = 0
    for lv in levels:
        max_families = max(max_families, len(lv.families))
        r2 = lv.ball_radius * lv.ball_radius
        for ptp in lv.members:
            if not any(_dist2(ptp, c) <= r2
                       for fam in lv.families for c in fam.centers):
                cover_ok = False
        for fam in lv.families:
            if not is_sparse(fam):
                sparse_ok = False
    return {"partition_ok": partition_ok, "cover_ok": cover_ok,
            "sparse_ok": sparse_ok, "max_families": max_families}


def columns_by_height(E: CubeSet, axis: int = 0) -> dict:
    """Group columns (fibers along `axis`) by dyadic height.

    Returns {h: CubeSet} with h dyadic; each column of E lands in the bin
    [h, 2h) by its cube count, and the bins partition E exactly.
    """
    cols: dict = {}
    for ptp in E.points:
        base = tuple(c for i, c in enumerate(ptp) if i != axis)
        cols.setdefault(base, []).append(ptp)
    out: dict = {}
    for base, members in cols.items():
        h = 1 << (len(members).bit_length() - 1)
        out.setdefault(h, []).extend(members)
    return {h: CubeSet(dim=E.dim, points=tuple(v)) for h, v in sorted(out.items())}


# ---------------------------------------------------------------------------
# Sparse decoupling check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BallFunction:
    """A function sampled on a uniform box grid in spacetime frequency."""

    t_axis: np.ndarray
    x_axis: np.ndarray
    values: np.ndarray  # (len(t_axis), len(x_axis))

    @property
    def cell(self) -> float:
        dt = self.t_axis[1] - self.t_axis[0] if len(self.t_axis) > 1 else 1.0
        dx = self.x_axis[1] - self.x_axis[0] if len(self.x_axis) > 1 else 1.0
        return float(dt * dx)

    def lp(self, p: float) -> float:
        return float((self.cell * np.sum(np.abs(self.values) ** p)) ** (1.0 / p))


def mollifier_hat(zeta_norm: np.ndarray) -> np.ndarray:
    """Compactly supported window profile (1 - |z|^2 / 1.5^2)^6."""
    s2 = (np.asarray(zeta_norm) / 1.5) ** 2
    return np.where(s2 < 1.0, (1.0 - np.minimum(s2, 1.0)) ** 6, 0.0)


def decoupling_check(family: SparseFamily, functions: list, p: float,
                     patch: SurfacePatch) -> dict:
    """Ratio of the summed, window-convolved surface restriction to the
    separated right side.

    LHS = || sum_i (f_i * phihat_i) |_S ||_{L^p(dsigma)} where phihat_i is
    the ball-scale window modulated to the family center z_i; RHS =
    H^{1/p} (sum_i ||f_i||_p^p)^{1/p}. Requires the family to pass the
    exact sparsity predicate (the bound is not claimed otherwise). The
    functions themselves may live anywhere; the centers enter through the
    modulations.
    """
    if not 1.0 <= p <= 2.0:
        raise ValueError("p must lie in [1, 2]")
    if len(functions) != family.N:
        raise ValueError("one function per family ball is required")
    if not is_sparse(family):
        raise ValueError("family fails the sparsity predicate; bound not claimed")
    H = family.H
    pts = patch.points()  # (M, 2)
    total = np.zeros(len(pts), dtype=np.complex128)
    for z_i, f in zip(family.centers, functions):
        z = np.array([float(z_i[0]), float(z_i[1])])
        tt, xx = np.meshgrid(f.t_axis, f.x_axis, indexing="ij")
        y = np.stack([tt.ravel(), xx.ravel()], axis=1)  # (P, 2)
        vals = f.values.ravel()
        diff_t = pts[:, 0][:, None] - y[None, :, 0]
        diff_x = pts[:, 1][:, None] - y[None, :, 1]
        win = mollifier_hat(H * np.sqrt(diff_t**2 + diff_x**2))
        phase = np.exp(-1j * (z[0] * diff_t + z[1] * diff_x))
        total += H**2 * f.cell * (win * phase) @ vals
    lhs = float((np.sum(patch.weights * np.abs(total) ** p)) ** (1.0 / p))
    rhs = float(H ** (1.0 / p) * (sum(f.lp(p) ** p for f in functions)) ** (1.0 / p))
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / max(rhs, 1e-300)}


# ---------------------------------------------------------------------------
# Loss bookkeeping for the window-to-line passage
# ---------------------------------------------------------------------------


def epsilon_removal_delta(K: int, eps: float, gamma: Fraction = Fraction(2)) -> float:
    """Integrability loss delta = 1/K + eps * gamma^K."""
    return 1.0 / K + eps * float(gamma) ** K


def epsilon_removal_levels(eps: float, C_gamma: float,
                           gamma: Fraction = Fraction(2)) -> int:
    """Level count K = C^{-1} log(1/eps); C must exceed log(gamma) so the
    loss vanishes with eps."""
    if not C_gamma > math.log(float(gamma)):
        raise ValueError(f"C_gamma must exceed log(gamma) = {math.log(float(gamma)):.4f}")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return max(1, int(round(math.log(1.0 / eps) / C_gamma)))
