"""Operator norms of the localized smoothing map and the exponent calculus.

The operator under study sends initial data with spectrum on the sector to
the weighted evolution restricted to a ball in space and a window in time:

    A f = [sector evolution of f, weighted by (1+|xi|^2)^(alpha/2)]
          restricted to B_R x window.

For q = r = 2 the squared norm is a quadratic form whose kernel factors
into closed-form window integrals,

    H[k',k] = d_k' d_k * X(xi_k - xi_k') * T(Phi_k - Phi_k'),

with X the spatial ball integral (a sinc) and T the time-window integral
(a sinc as well), d the weighted bump amplitude, over a uniform frequency
quadrature whose span scales with the window length so that the periodic
representation never recirculates mass through the ball. The norm is the
top eigenvalue, found by power iteration (with restarts) and cross-checked
against a dense eigensolve at small scale. For the quadratic symbol the
kernel splits into a short sum of modulated Toeplitz and Hankel kernels,
so one apply costs a few FFTs and the R = 64 cases stay interactive.

Mixed-norm cases (q, r) != (2, 2), including the maximal r = inf, are
handled by lower_bound_mixed: structured candidates (narrowband chirps,
plates) plus projected gradient ascent on the Rayleigh quotient. Those
values are lower bounds by construction and are reported as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import symbols as sym_mod
from .core import Grid, SpacetimeField
from .norms import INF, MixedNormSpec, mixed_norm
from .propagator import SectorBump, canonical_bump
from .symbols import SymbolSpec

TWO_PI = 2.0 * math.pi

# Frequency-quadrature span per unit of (max speed x window end); calibrated
# so the periodic image of the slowest/fastest launch stays out of the ball
# and the top eigenvalue is converged at the per-mille level.
SPAN_FACTOR = 2.5
GLOBAL_T_FACTOR = 8.0


@dataclass(frozen=True)
class SmoothingOperatorSpec:
    sym: SymbolSpec
    alpha: float
    R: float
    q: float = 2.0
    r: float = 2.0
    order: str = "xt"
    window: str = "local"  # 'local' -> [R^m/2, 2R^m]; 'global' -> [-T, T]
    global_t_factor: float = GLOBAL_T_FACTOR

    def __post_init__(self):
        if self.q < 1 or self.r < 1:
            raise ValueError("exponents must lie in [1, inf]")
        if self.window not in ("local", "global"):
            raise ValueError(f"window must be 'local' or 'global', got {self.window!r}")
        if self.R < 1:
            raise ValueError("scale R must be >= 1")

    def time_window(self) -> tuple:
        if self.window == "local":
            return (self.R**self.sym.m / 2.0, 2.0 * self.R**self.sym.m)
        T = self.global_t_factor * self.R**self.sym.m
        return (-T, T)


@dataclass(frozen=True)
class ModeGrid:
    """Uniform frequency nodes covering the sector bump's support."""

    xi: np.ndarray
    dxi: float
    amp: np.ndarray  # <xi>^alpha * bump(xi) at the nodes
    phi_vals: np.ndarray  # symbol values at the nodes


def mode_grid(spec: SmoothingOperatorSpec, bump: SectorBump | None = None) -> ModeGrid:
    if spec.sym.n != 1:
        raise NotImplementedError("operator-norm machinery is one-dimensional")
    if bump is None:
        bump = canonical_bump(1)
    a, b = spec.time_window()
    t_reach = max(abs(a), abs(b))
    v_max = sym_mod.max_speed_on_sector(spec.sym)
    span = SPAN_FACTOR * (v_max * t_reach + 4.0 * spec.R)
    dxi = TWO_PI / span
    lo, hi = bump.support_radial()
    k0 = math.floor(lo / dxi)
    k1 = math.ceil(hi / dxi)
    xi = (np.arange(k0, k1 + 1) + 0.5) * dxi
    w = bump.values_1d(xi)
    live = w > 1e-14
    xi = xi[live]
    amp = ((1.0 + xi**2) ** (spec.alpha / 2.0)) * w[live]
    return ModeGrid(xi=xi, dxi=dxi, amp=amp,
                    phi_vals=sym_mod.value(spec.sym, [xi]))


def _sinc_integral(width: float, center: float, omega: np.ndarray) -> np.ndarray:
    """int_{c-w/2}^{c+w/2} e^{i t omega} dt, stable through omega = 0."""
    return width * np.exp(1j * center * omega) * np.sinc(width * omega / TWO_PI)


def ball_window(R: float, kappa: np.ndarray) -> np.ndarray:
    """int_{-R}^{R} e^{i x kappa} dx = 2 sin(R kappa)/kappa."""
    return 2.0 * R * np.sinc(R * kappa / math.pi)


def dense_operator_matrix(spec: SmoothingOperatorSpec,
                          modes: ModeGrid | None = None) -> np.ndarray:
    """Explicit quadratic-form kernel; O(M^2) memory, for small scales."""
    if modes is None:
        modes = mode_grid(spec)
    M = len(modes.xi)
    if M > 6000:
        raise ValueError(f"dense kernel with M={M} modes would be too large")
    a, b = spec.time_window()
    delta = modes.xi[None, :] - modes.xi[:, None]
    omega = modes.phi_vals[None, :] - modes.phi_vals[:, None]
    X = ball_window(spec.R, delta)
    T = _sinc_integral(b - a, (a + b) / 2.0, omega)
    d = modes.amp
    return (d[:, None] * d[None, :]) * X * T


class _FastKernel:
    """Structured apply of the quadratic-form kernel for quadratic symbols.

    Off the diagonal, with delta = xi_k - xi_k', sigma = xi_k + xi_k' and
    omega = delta * sigma,

        X(delta) T(omega) = -sum_{s,w} s c_w e^{i s R delta} e^{i t_w omega}
                            / (delta * omega),

    and 1/(delta*omega) = (1/rho)(1/delta^2) - (1/rho^2)(1/delta)
    + (1/rho^2)(1/sigma) with rho = 2 xi_k'. Each term is a row scaling, a
    modulation, a pure Toeplitz (1/delta^p) or Hankel (1/sigma) kernel, and
    a column scaling, so the apply is a handful of FFT convolutions.
    """

    def __init__(self, spec: SmoothingOperatorSpec, modes: ModeGrid):
        if spec.sym.kind != "power" or spec.sym.m != 2.0 or spec.sym.scale != 1.0:
            raise ValueError("fast kernel requires the quadratic power symbol")
        self.modes = modes
        self.R = spec.R
        a, b = spec.time_window()
        self.window = (a, b)
        xi = modes.xi
        M = len(xi)
        self.M = M
        dxi = modes.dxi
        lags = np.arange(-(M - 1), M) * dxi
        with np.errstate(divide="ignore"):
            t1 = np.where(lags != 0, 1.0 / lags, 0.0)
            t2 = np.where(lags != 0, 1.0 / lags**2, 0.0)
        sig = xi[0] + xi[0] + np.arange(2 * M - 1) * dxi  # sigma over k+k'
        h0 = 1.0 / sig
        self.P = 1 << int(math.ceil(math.log2(3 * M)))
        self.ft_t1 = np.fft.fft(t1[::-1], self.P)
        self.ft_t2 = np.fft.fft(t2[::-1], self.P)
        self.ft_h0 = np.fft.fft(h0, self.P)
        self.rho = 2.0 * xi
        self.diag = modes.amp**2 * (2.0 * spec.R) * (b - a)
        # column/row modulations for s in {+1,-1} (ball) and w in {b, a} (window)
        self.mods = []
        for s_sign in (+1.0, -1.0):
            for t_w, c_w in ((b, +1.0), (a, -1.0)):
                col = np.exp(1j * (s_sign * spec.R * xi + t_w * xi**2))
                row = np.conj(col)
                self.mods.append((s_sign, c_w, col, row))

    def _corr_toeplitz(self, ft_kernel: np.ndarray, g: np.ndarray) -> np.ndarray:
        # out[i] = sum_k t[k-i] g[k] via full convolution with reversed kernel
        gf = np.fft.fft(g, self.P)
        full = np.fft.ifft(gf * ft_kernel)
        return full[self.M - 1: 2 * self.M - 1]

    def _corr_hankel(self, g: np.ndarray) -> np.ndarray:
        # out[i] = sum_k h[i+k] g[k]
        gf = np.fft.fft(g[::-1], self.P)
        full = np.fft.ifft(gf * self.ft_h0)
        return full[self.M - 1: 2 * self.M - 1]

    def apply(self, c: np.ndarray) -> np.ndarray:
        d = self.modes.amp
        out = self.diag * c
        base = d * c
        inv_rho = 1.0 / self.rho
        inv_rho2 = inv_rho**2
        for s_sign, c_w, col, row in self.mods:
            g = col * base
            part = (inv_rho * self._corr_toeplitz(self.ft_t2, g)
                    - inv_rho2 * self._corr_toeplitz(self.ft_t1, g)
                    + inv_rho2 * self._corr_hankel(g))
            out = out - (s_sign * c_w) * d * row * part
        return out


@dataclass
class OperatorNormResult:
    value: float
    iterations: int
    converged: bool
    restarts: int
    last_gap: float
    mode_count: int
    method: str


def _power_iteration(apply_fn, M: int, seed: int, restarts: int = 3,
                     tol: float = 1e-4, max_iter: int = 200) -> tuple:
    rng = np.random.default_rng(seed)
    best = 0.0
    best_iters = 0
    best_conv = False
    best_gap = math.inf
    for _ in range(restarts):
        v = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        v /= np.linalg.norm(v)
        lam_prev = 0.0
        converged = False
        gap = math.inf
        it = 0
        for it in range(1, max_iter + 1):
            w = apply_fn(v)
            lam = float(np.real(np.vdot(v, w)))
            nw = np.linalg.norm(w)
            if nw == 0:
                break
            v = w / nw
            gap = abs(lam - lam_prev) / max(abs(lam), 1e-300)
            if it > 1 and gap < tol:
                converged = True
                break
            lam_prev = lam
        if lam > best:
            best = lam
            best_iters = it
            best_conv = converged
            best_gap = gap
    return best, best_iters, best_conv, best_gap


def operator_norm_l2(spec: SmoothingOperatorSpec, seed: int = 0,
                     restarts: int = 3, tol: float = 1e-4,
                     max_iter: int = 200, method: str = "auto") -> OperatorNormResult:
    """Norm of the ball/window-localized weighted evolution on L^2 data.

    Power iteration on the quadratic-form kernel over sector-limited modes;
    three seeded restarts guard against an unlucky start. method='dense'
    forces the explicit matrix (small scales), 'fast' the structured apply.
    """
    if spec.q != 2 or spec.r != 2:
        raise ValueError("operator_norm_l2 requires q = r = 2")
    modes = mode_grid(spec)
    M = len(modes.xi)
    use_fast = method == "fast" or (method == "auto" and
                                    spec.sym.kind == "power" and spec.sym.m == 2.0
                                    and spec.sym.scale == 1.0 and M > 1500)
    if use_fast:
        kern = _FastKernel(spec, modes)
        apply_fn = kern.apply
        how = "power-fast"
    else:
        H = dense_operator_matrix(spec, modes)
        apply_fn = lambda v: H @ v
        how = "power-dense"
    lam, iters, conv, gap = _power_iteration(apply_fn, M, seed, restarts, tol, max_iter)
    value = math.sqrt(max(TWO_PI * modes.dxi * lam, 0.0))
    return OperatorNormResult(value=value, iterations=iters, converged=conv,
                              restarts=restarts, last_gap=gap, mode_count=M,
                              method=how)


def operator_norm_dense_eig(spec: SmoothingOperatorSpec) -> float:
    """Cross-check route: top eigenvalue of the explicit kernel."""
    H = dense_operator_matrix(spec)
    lam = float(np.linalg.eigvalsh(H)[-1])
    return math.sqrt(max(TWO_PI * mode_grid(spec).dxi * lam, 0.0))


# ---------------------------------------------------------------------------
# Mixed-norm lower bounds
# ---------------------------------------------------------------------------


@dataclass
class LowerBoundResult:
    value: float
    candidate: str
    ascent_gain: float
    refinement_delta: float
    window_delta: float
    tail_fraction: float
    evaluations: int


def _candidate_bank(spec: SmoothingOperatorSpec, modes: ModeGrid, seed: int) -> list:
    """Structured trial spectra: focusing chirps of several bandwidths, a
    1/R plate, a broadband chirp, and seeded noise."""
    xi = modes.xi
    a, b = spec.time_window()
    t_focus = 0.0 if spec.window == "global" else (a + b) / 2.0
    chirp = np.exp(-1j * t_focus * modes.phi_vals)
    rng = np.random.default_rng(seed)
    bank = []
    root = 1.0 / math.sqrt(spec.R)
    for width, tag in ((0.5 * root, "chirp-narrow"), (root, "chirp-root"),
                       (2.0 * root, "chirp-wide"), (1.0 / spec.R, "plate")):
        for center in (0.9, 1.3):
            prof = np.exp(-0.5 * ((xi - center) / (0.5 * width)) ** 2)
            prof = np.where(np.abs(xi - center) < 3 * width, prof, 0.0)
            if np.any(prof > 0):
                bank.append((f"{tag}@{center}", chirp * prof))
    bank.append(("chirp-broad", chirp * np.exp(-0.5 * ((xi - 1.2) / 0.35) ** 2)))
    noise = rng.standard_normal(len(xi)) + 1j * rng.standard_normal(len(xi))
    bank.append(("noise", chirp * noise * np.exp(-0.5 * ((xi - 1.2) / 0.4) ** 2)))
    return bank


def _transit_times(spec: SmoothingOperatorSpec, modes: ModeGrid, c: np.ndarray,
                   margin_factor: float = 1.0) -> np.ndarray:
    """Time samples covering every live mode's passage through the ball.

    A mode chirped to focus at t0 transits the ball around t0 within
    +- (ball + envelope width)/speed; sampling is tied to the envelope
    timescale rather than the carrier phase. Capped at 20000 samples.
    """
    a, b = spec.time_window()
    live = np.abs(c) > 1e-9 * np.max(np.abs(c))
    xi_live = modes.xi[live]
    width = max(float(np.ptp(xi_live)), modes.dxi)
    # recover the focus time from the chirp's phase curvature (if any)
    ph = np.unwrap(np.angle(c[live])) if np.sum(live) > 3 else None
    t0 = 0.0
    if ph is not None:
        dphi = np.gradient(ph, xi_live)
        grad = sym_mod.gradient(spec.sym, [xi_live])[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            est = -dphi / np.where(np.abs(grad) > 1e-12, grad, 1.0)
        t0 = float(np.median(est))
    speeds = np.abs(sym_mod.gradient(spec.sym, [xi_live])[0])
    v_min = max(float(np.min(speeds)), 1e-6)
    # a packet of bandwidth `width` focused at t0 re-disperses linearly in
    # |t - t0|; solving transit-overlap with that growth gives the 3.5x factor
    margin = margin_factor * 3.5 * (2.0 * spec.R + 1.0 / width) / v_min
    lo = max(a, t0 - margin)
    hi = min(b, t0 + margin)
    if hi <= lo:
        lo, hi = a, min(b, a + 2 * margin)
    # envelope timescale: transit of the focused width at the slowest speed
    dt = max((1.0 / width) / v_min / 8.0, (hi - lo) / 20000)
    steps = max(int(math.ceil((hi - lo) / dt)), 8)
    return lo + (np.arange(steps) + 0.5) * (hi - lo) / steps


def _eval_mixed(spec: SmoothingOperatorSpec, modes: ModeGrid, c: np.ndarray,
                times: np.ndarray, nx: int | None = None,
                want_slab: bool = False):
    """Mixed norm of the weighted sector evolution of the spectrum c."""
    R = spec.R
    if nx is None:
        # resolve both the carrier (|xi| <= 2.2) and the envelope
        nx = max(int(math.ceil(2 * R / 0.7)), 32)
        nx += nx % 2
    gx = Grid(1, max(nx, 8), 2 * R)
    x = gx.x_axis()
    amp_c = modes.amp * c * modes.dxi
    live = np.abs(amp_c) > 1e-14 * np.max(np.abs(amp_c))
    xi = modes.xi[live]
    phiv = modes.phi_vals[live]
    av = amp_c[live]
    E = np.exp(1j * np.outer(x, xi))  # (B, M_live)
    slab = np.empty((len(times), len(x)), dtype=np.complex128)
    chunk = max(1, int(2e6 // max(len(xi), 1)))
    for s0 in range(0, len(times), chunk):
        ts = times[s0:s0 + chunk]
        ph = np.exp(1j * np.outer(ts, phiv)) * av[None, :]
        slab[s0:s0 + len(ts)] = ph @ E.T
    u = SpacetimeField(gx, times, slab)
    spec_norm = MixedNormSpec(q=spec.q, r=spec.r, order=spec.order)
    val = mixed_norm(u, spec_norm)
    if want_slab:
        return val, u
    return val


def _l2_of_spectrum(modes: ModeGrid, c: np.ndarray) -> float:
    return math.sqrt(modes.dxi / TWO_PI * float(np.sum(np.abs(c) ** 2)))


def _quotient_gradient(spec: SmoothingOperatorSpec, modes: ModeGrid,
                       c: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Gradient of the Rayleigh quotient wrt conj(c) (subgradient at r=inf)."""
    val, u = _eval_mixed(spec, modes, c, times, want_slab=True)
    slab = u.slices
    absu = np.abs(slab)
    wt = u.dt if len(times) > 1 else 1.0
    wx = u.grid.dx
    q, r = spec.q, spec.r
    if r == INF:
        Mb = absu.max(axis=0)
        arg = absu.argmax(axis=0)
        W = np.zeros_like(slab)
        cols = np.arange(slab.shape[1])
        uu = slab[arg, cols]
        safe = np.where(Mb > 0, Mb, 1.0)
        W[arg, cols] = 0.5 * val ** (1 - q) * wx * safe ** (q - 1) * uu / safe
    else:
        G = wt * np.sum(absu**r, axis=0)
        safe = np.where(absu > 0, absu, 1.0)
        W = (0.5 * val ** (1 - q) * wx * wt
             * np.where(G > 0, G, 1.0) ** (q / r - 1.0)
             * safe ** (r - 2) * slab)
        W[:, G <= 0] = 0.0
    # chain rule back to the spectrum:
    # g_k = amp_k sum_s e^{-i t_s phi_k} sum_b e^{-i x_b xi_k} W[s, b]
    x = u.grid.x_axis()
    amp = modes.amp * modes.dxi
    ph_x = np.exp(-1j * np.outer(x, modes.xi))
    g = np.zeros(len(modes.xi), dtype=np.complex128)
    chunk = max(1, int(2e6 // max(len(modes.xi), 1)))
    for s0 in range(0, len(times), chunk):
        ts = times[s0:s0 + chunk]
        ph_t = np.exp(-1j * np.outer(modes.phi_vals, ts))
        g += amp * np.sum(ph_t * (ph_x.T @ W[s0:s0 + len(ts)].T), axis=1)
    nf = _l2_of_spectrum(modes, c)
    grad_norm_f = (modes.dxi / TWO_PI) * c / (2.0 * nf)
    quotient = val / nf
    return (g - quotient * grad_norm_f) / nf


def lower_bound_mixed(spec: SmoothingOperatorSpec, seed: int = 0,
                      ascent_steps: int = 50, restarts: int = 5) -> LowerBoundResult:
    """Lower bound for the mixed-norm operator quotient.

    Maximum over structured candidates, refined by normalized gradient
    ascent with step halving on non-improvement. The result is a LOWER
    bound only; stagnation is recorded, never raised.
    """
    modes = mode_grid(spec)
    if spec.q == 2 and spec.r == 2:
        res = operator_norm_l2(spec, seed=seed)
        return LowerBoundResult(value=res.value, candidate="power-iteration",
                                ascent_gain=0.0, refinement_delta=0.0,
                                window_delta=0.0, tail_fraction=0.0,
                                evaluations=res.iterations)
    evals = 0
    best_val = 0.0
    best_c = None
    best_name = ""
    cheap_val = 0.0
    cheap_c = None
    ascent_budget = 4e8  # time-samples x eval-points x live-modes per step
    for name, c in _candidate_bank(spec, modes, seed):
        times = _transit_times(spec, modes, c)
        val = _eval_mixed(spec, modes, c, times) / _l2_of_spectrum(modes, c)
        evals += 1
        if val > best_val:
            best_val, best_c, best_name = val, c, name
        cost = len(times) * (2 * spec.R / 0.7) * int(np.sum(np.abs(c) > 1e-9 * np.max(np.abs(c))))
        if cost <= ascent_budget and val > cheap_val:
            cheap_val, cheap_c = val, c

    # gradient ascent refinement; if the best candidate is too expensive to
    # differentiate repeatedly, refine the best affordable one instead (the
    # result is a max over everything either way)
    seed_c = best_c
    seed_cost = _transit_times(spec, modes, best_c)
    if len(seed_cost) * (2 * spec.R / 0.7) * int(
            np.sum(np.abs(best_c) > 1e-9 * np.max(np.abs(best_c)))) > ascent_budget \
            and cheap_c is not None:
        seed_c = cheap_c
    rng = np.random.default_rng(seed + 1)
    top_val, top_c = best_val, best_c
    for restart in range(restarts):
        if restart == 0:
            c = np.array(seed_c)
        else:
            c = seed_c * (1.0 + 0.2 * (rng.standard_normal(len(seed_c))
                                       + 1j * rng.standard_normal(len(seed_c))))
        # ascent stays inside the seed's frequency neighborhood so the
        # transit window (and the cost) remain those of the seed
        support = np.abs(seed_c) > 1e-9 * np.max(np.abs(seed_c))
        reach = max(3, int(0.02 / modes.dxi))
        support = np.convolve(support.astype(float), np.ones(2 * reach + 1),
                              mode="same") > 0
        times = _transit_times(spec, modes, c)
        cur = _eval_mixed(spec, modes, c, times) / _l2_of_spectrum(modes, c)
        evals += 1
        step = 0.5
        for _ in range(ascent_steps):
            gq = _quotient_gradient(spec, modes, c, times)
            gq = np.where(support, gq, 0.0)
            gn = np.linalg.norm(gq)
            if gn == 0:
                break
            trial = c + step * np.linalg.norm(c) * gq / gn
            val = _eval_mixed(spec, modes, trial, times) / _l2_of_spectrum(modes, trial)
            evals += 2
            if val > cur:
                c, cur = trial, val
            else:
                step *= 0.5
                if step < 1e-4:
                    break
        if cur > top_val:
            top_val, top_c = cur, c

    # report sampling and windowing sensitivity of the winner
    times = _transit_times(spec, modes, top_c)
    t_half = times[::2]
    v_full = _eval_mixed(spec, modes, top_c, times)
    v_half = _eval_mixed(spec, modes, top_c, t_half)
    refinement_delta = abs(v_full - v_half) / max(v_full, 1e-300)
    wide = _transit_times(spec, modes, top_c, margin_factor=2.0)
    v_wide = _eval_mixed(spec, modes, top_c, wide)
    window_delta = abs(v_wide - v_full) / max(v_full, 1e-300)
    # last-decade tail of the time profile (transit tail diagnostics)
    tail_fraction = _tail_fraction(spec, modes, top_c, times)
    nf = _l2_of_spectrum(modes, top_c)
    return LowerBoundResult(value=max(top_val, v_wide / nf), candidate=best_name,
                            ascent_gain=(top_val - best_val) / max(best_val, 1e-300),
                            refinement_delta=refinement_delta,
                            window_delta=window_delta,
                            tail_fraction=tail_fraction, evaluations=evals)


def _tail_fraction(spec, modes, c, times) -> float:
    """Share of the time-profile mass in the last tenth of the window."""
    val, u = _eval_mixed(spec, modes, c, times, want_slab=True)
    per_t = np.sum(np.abs(u.slices) ** 2, axis=1)
    k = max(1, len(per_t) // 10)
    return float(np.sum(per_t[-k:]) / max(np.sum(per_t), 1e-300))


# ---------------------------------------------------------------------------
# Exponent calculus and power-law fitting
# ---------------------------------------------------------------------------


def predicted_exponent(n: int, m: float, q: float, r: float, alpha: float) -> float:
    """Growth exponent -alpha + n/q + m/r - n/2 of the localized norm."""
    inv_q = 0.0 if q == INF else 1.0 / q
    inv_r = 0.0 if r == INF else 1.0 / r
    return -alpha + n * inv_q + m * inv_r - n / 2.0


def transfer_exponent(n: int, r: float, r_tilde: float, alpha: float) -> tuple:
    """Regularity cost of passing from a bounded window to the whole line.

    Returns (delta_inf, alpha_global_sup): any delta > delta_inf is
    admissible, so every global regularity below alpha - delta_inf holds.
    """
    if not r_tilde > r:
        raise ValueError(f"need r_tilde > r, got {r_tilde} <= {r}")
    if r < 2:
        raise ValueError("transfer requires r >= 2")
    inv_r = 0.0 if r == INF else 1.0 / r
    inv_rt = 0.0 if r_tilde == INF else 1.0 / r_tilde
    delta_inf = n * (inv_r - inv_rt)
    return delta_inf, alpha - delta_inf


@dataclass(frozen=True)
class ScalingFit:
    R_values: tuple
    norms: tuple
    slope: float
    intercept: float
    stderr: float
    predicted: float | None = None

    @property
    def residual_slope(self) -> float | None:
        return None if self.predicted is None else self.slope - self.predicted


def fit_exponent(samples, predicted: float | None = None) -> ScalingFit:
    """Least squares on (log R, log value) for dyadic, increasing R."""
    samples = sorted(samples)
    if len(samples) < 3:
        raise ValueError("need at least 3 samples")
    Rs = np.array([s[0] for s in samples], dtype=float)
    vals = np.array([s[1] for s in samples], dtype=float)
    if np.any(vals <= 0):
        raise ValueError("values must be positive for a log-log fit")
    if np.any(np.diff(Rs) <= 0):
        raise ValueError("R values must be strictly increasing")
    ratios = Rs[1:] / Rs[:-1]
    if np.any(np.abs(ratios - np.round(ratios)) > 1e-9) or \
            np.any(np.round(np.log2(np.round(ratios))) < 1):
        raise ValueError("R values must be dyadic (each a power-of-two multiple)")
    x = np.log(Rs)
    y = np.log(vals)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    dof = len(x) - 2
    if dof > 0:
        rss = float(res[0]) if len(res) else float(np.sum((y - A @ coef) ** 2))
        stderr = math.sqrt(rss / dof / float(np.sum((x - x.mean()) ** 2)))
    else:
        stderr = 0.0
    return ScalingFit(R_values=tuple(Rs), norms=tuple(vals), slope=slope,
                      intercept=intercept, stderr=stderr, predicted=predicted)
