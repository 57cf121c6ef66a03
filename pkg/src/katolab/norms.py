"""Mixed space-time norms over balls and windows, in both nesting orders.

Inner and outer integrals use the rectangle rule on the sampled lattice;
an infinite exponent is the max over samples. Ball membership is decided
by the cell-center test with an open ball, which makes the discrete
measure of a ball exact whenever its radius is a multiple of the grid
spacing (cell-centered grids).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SpacetimeField

INF = math.inf


@dataclass(frozen=True)
class MixedNormSpec:
    q: float
    r: float
    order: str = "xt"  # 'xt': outer x, inner t; 'tx': outer t, inner x
    ball: tuple | None = None  # (center tuple, radius)
    window: tuple | None = None  # (a, b), else all sampled times

    def __post_init__(self):
        if self.q < 1 or self.r < 1:
            raise ValueError("exponents must lie in [1, inf]")
        if self.order not in ("xt", "tx"):
            raise ValueError(f"order must be 'xt' or 'tx', got {self.order!r}")


def _spatial_mask(u: SpacetimeField, ball) -> np.ndarray:
    g = u.grid
    if ball is None:
        return np.ones(g.shape, dtype=bool)
    center, radius = ball
    mesh = g.x_mesh()
    d2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    return np.broadcast_to(d2 < radius**2, g.shape)


def _time_mask(u: SpacetimeField, window) -> np.ndarray:
    if window is None:
        return np.ones(len(u.times), dtype=bool)
    a, b = window
    return (u.times >= a) & (u.times <= b)


def _reduce(values: np.ndarray, p: float, weight: float, axis: int) -> np.ndarray:
    if p == INF:
        return np.max(values, axis=axis)
    return (weight * np.sum(values**p, axis=axis)) ** (1.0 / p)


def mixed_norm(u: SpacetimeField, spec: MixedNormSpec) -> float:
    smask = _spatial_mask(u, spec.ball)
    tmask = _time_mask(u, spec.window)
    if not smask.any():
        raise ValueError("spatial region contains no grid cells")
    if not tmask.any():
        raise ValueError("time window contains no samples")
    g = u.grid
    # slab of |u| over selected times x selected cells, shape (S_sel, X_sel)
    slab = np.abs(u.slices[tmask][:, smask])
    wx = g.dx**g.n
    wt = u.dt if len(u.times) > 1 else 1.0
    if spec.order == "xt":
        inner = _reduce(slab, spec.r, wt, axis=0)  # per cell over t
        return float(_reduce(inner, spec.q, wx, axis=0))
    inner = _reduce(slab, spec.q, wx, axis=1)  # per time over x
    return float(_reduce(inner, spec.r, wt, axis=0))


def maximal_norm(u: SpacetimeField, q: float, ball=None, window=None) -> float:
    """Pointwise-in-x max over sampled times, then L^q in x."""
    return mixed_norm(u, MixedNormSpec(q=q, r=INF, order="xt", ball=ball, window=window))


def refinement_delta(u: SpacetimeField, spec: MixedNormSpec) -> float:
    """Relative change of the norm when every second time sample is dropped.

    Reported alongside maximal norms so undersampling of the sup in t is
    visible; small delta means the time lattice resolves the envelope.
    """
    if len(u.times) < 4:
        return 0.0
    coarse = SpacetimeField(u.grid, u.times[::2], u.slices[::2])
    full = mixed_norm(u, spec)
    half = mixed_norm(coarse, spec)
    return abs(full - half) / max(full, 1e-300)
