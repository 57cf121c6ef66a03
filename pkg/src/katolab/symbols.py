"""Homogeneous dispersion symbols and their validation.

A symbol is a real function Phi on R^n \\ {0}, positively homogeneous of
degree m > 1 with nonvanishing gradient away from the origin. Two families
are shipped: radial power laws |xi|^m (any real m > 1) and homogeneous
polynomials with user-supplied coefficients (integer degree). Both are
defined at the origin by continuity, Phi(0) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ValidationReport:
    max_homogeneity_deviation: float
    min_gradient_norm: float
    passed: bool
    used_ratio_form: bool
    samples: int


@dataclass(frozen=True)
class SymbolSpec:
    """kind 'power': Phi = scale * |xi|^m.

    kind 'poly': Phi = sum of coeff * prod_i xi_i^e_i, every term of the
    same total degree m (checked), given as terms=((coeff, (e_1..e_n)), ...).
    """

    kind: str
    m: float
    n: int
    scale: float = 1.0
    terms: tuple = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if not self.m > 1:
            raise ValueError(f"degree m={self.m} must exceed 1")
        if self.kind == "power":
            return
        if self.kind == "poly":
            if not self.terms:
                raise ValueError("poly symbol needs at least one term")
            for coeff, exps in self.terms:
                if len(exps) != self.n:
                    raise ValueError("term exponent tuple length != n")
                if any(e < 0 or e != int(e) for e in exps):
                    raise ValueError("poly exponents must be nonnegative integers")
                if sum(exps) != self.m:
                    raise ValueError(
                        f"term {exps} has degree {sum(exps)}, expected {self.m}"
                    )
            return
        raise ValueError(f"unknown symbol kind {self.kind!r}")


def schrodinger(n: int = 1) -> SymbolSpec:
    return SymbolSpec(kind="power", m=2.0, n=n)


def power_law(m: float, n: int = 1, scale: float = 1.0) -> SymbolSpec:
    return SymbolSpec(kind="power", m=m, n=n, scale=scale)


def value(sym: SymbolSpec, mesh) -> np.ndarray:
    """Vectorized Phi over a broadcastable list of coordinate arrays."""
    if sym.kind == "power":
        r2 = sum(np.asarray(m) ** 2 for m in mesh)
        return sym.scale * np.power(r2, sym.m / 2.0)
    out = 0.0
    for coeff, exps in sym.terms:
        term = coeff * np.ones_like(np.asarray(mesh[0], dtype=float))
        for mi, e in zip(mesh, exps):
            if e:
                term = term * np.asarray(mi, dtype=float) ** e
        out = out + term
    return out


def gradient(sym: SymbolSpec, mesh) -> list:
    """Vectorized grad Phi; zero at the origin by continuity (m > 1)."""
    if sym.kind == "power":
        r2 = sum(np.asarray(m) ** 2 for m in mesh)
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(r2 > 0, sym.scale * sym.m * np.power(r2, sym.m / 2.0 - 1.0), 0.0)
        return [fac * np.asarray(m) for m in mesh]
    grads = []
    for axis in range(sym.n):
        acc = np.zeros(np.broadcast(*[np.asarray(m) for m in mesh]).shape)
        for coeff, exps in sym.terms:
            e_ax = exps[axis]
            if e_ax == 0:
                continue
            term = coeff * e_ax * np.ones_like(acc)
            for i, (mi, e) in enumerate(zip(mesh, exps)):
                p = e - 1 if i == axis else e
                if p:
                    term = term * np.asarray(mi, dtype=float) ** p
            acc = acc + term
        grads.append(acc)
    return grads


def phase(sym: SymbolSpec, xi) -> tuple:
    """Phi and grad Phi at a single point, as (float, ndarray)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (sym.n,):
        raise ValueError(f"point has shape {xi.shape}, expected ({sym.n},)")
    mesh = [xi[i] for i in range(sym.n)]
    val = float(value(sym, mesh))
    grad = np.array([float(g) for g in gradient(sym, mesh)])
    return val, grad


def gradient_speed(sym: SymbolSpec, mesh) -> np.ndarray:
    return np.sqrt(sum(np.asarray(g) ** 2 for g in gradient(sym, mesh)))


def max_speed_on_sector(sym: SymbolSpec, samples: int = 4096, seed: int = 0) -> float:
    """Upper estimate of |grad Phi| over the annulus 1/2 <= |xi| <= 2."""
    rng = np.random.default_rng(seed)
    xs = _annulus_samples(sym.n, samples, rng)
    return float(np.max(gradient_speed(sym, [xs[:, i] for i in range(sym.n)]))) * 1.05


def _annulus_samples(n: int, count: int, rng) -> np.ndarray:
    dirs = rng.standard_normal((count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(0.5, 2.0, size=count)
    pts = dirs * radii[:, None]
    # deterministic probes at the annulus edges (pins the exact minimum of
    # |grad Phi| for radial families at the inner radius)
    probes = []
    for axis in range(n):
        for s in (+1.0, -1.0):
            for r in (0.5, 2.0):
                e = np.zeros(n)
                e[axis] = s * r
                probes.append(e)
    return np.vstack([pts, np.array(probes)])


def validate_symbol(sym: SymbolSpec, sample_count: int, seed: int = 0) -> ValidationReport:
    """Check homogeneity and gradient nonvanishing on the annulus.

    Homogeneity is measured as the deviation of log(Phi(lam xi)/Phi(xi))/log(lam)
    from m; if Phi is not strictly positive on the samples the check falls
    back to the ratio form |Phi(lam xi) - lam^m Phi(xi)| (relative).
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    pts = _annulus_samples(sym.n, sample_count, rng)
    mesh = [pts[:, i] for i in range(sym.n)]
    vals = value(sym, mesh)
    lams = rng.uniform(0.5, 4.0, size=len(pts))
    lams = np.where(np.abs(lams - 1.0) < 0.1, 2.0, lams)
    mesh_l = [lams * m for m in mesh]
    vals_l = value(sym, mesh_l)

    use_ratio = bool(np.any(vals <= 0))
    if use_ratio:
        scale = np.maximum(np.abs(lams**sym.m * vals), 1e-300)
        dev = np.abs(vals_l - lams**sym.m * vals) / scale
        max_dev = float(np.max(dev))
    else:
        max_dev = float(np.max(np.abs(np.log(vals_l / vals) / np.log(lams) - sym.m)))

    min_grad = float(np.min(gradient_speed(sym, mesh)))
    return ValidationReport(
        max_homogeneity_deviation=max_dev,
        min_gradient_norm=min_grad,
        passed=(max_dev <= 1e-10 and min_grad > 0),
        used_ratio_form=use_ratio,
        samples=len(pts),
    )


def from_config(text: str) -> SymbolSpec:
    """Parse a symbol key like 'power:m=2,n=1' or 'poly:n=2,m=3,terms=1*1.2'.

    Poly terms are semicolon-separated 'coeff*e1.e2...eN' entries.
    """
    kind, _, rest = text.partition(":")
    kv = {}
    for part in filter(None, rest.split(",")):
        k, _, v = part.partition("=")
        kv[k.strip()] = v.strip()
    n = int(kv.get("n", "1"))
    if kind == "power":
        return SymbolSpec(kind="power", m=float(kv.get("m", "2")), n=n,
                          scale=float(kv.get("scale", "1")))
    if kind == "poly":
        terms = []
        for chunk in kv["terms"].split(";"):
            coeff_s, _, exps_s = chunk.partition("*")
            exps = tuple(int(e) for e in exps_s.split("."))
            terms.append((float(coeff_s), exps))
        m = float(sum(terms[0][1]))
        return SymbolSpec(kind="poly", m=m, n=n, terms=tuple(terms))
    raise ValueError(f"unknown symbol kind {kind!r}")
