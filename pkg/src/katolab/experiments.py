"""Config-driven experiment runner binding all modules, with reports.

Configs are line-oriented key=value text. Reports carry a config echo,
per-step measurements (each tagged with the operation that produced it),
fits, and pass/fail entries; timestamps and wall-clock live in a separate
environment block so reports are byte-reproducible given config and seeds.
"""

from __future__ import annotations

import json
import math
import os
import platform
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import norms, opnorm, propagator, sparse, symbols, wavepackets
from .core import (Annulus, Field, GaussianRecipe, Grid, RandomBandlimited,
                   Sector, make_field)

SCHEMA = "katolab-report-v1"

KIND_CHOICES = ("scaling", "transfer", "maximal", "wavepacket-audit",
                "sparse-audit", "decay-audit", "propagator-audit",
                "decoupling-audit")


class ConfigError(ValueError):
    """Invalid experiment configuration; names the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field_name = field_name


@dataclass
class ExperimentConfig:
    kind: str
    symbol: symbols.SymbolSpec
    alpha: float = 0.5
    q: float = 2.0
    r: float = 2.0
    r_tilde: float = 4.0
    R_list: tuple = (8.0, 16.0, 32.0, 64.0)
    H_list: tuple = (16.0, 32.0, 64.0)
    seed: int = 0
    slope_tol: float = 0.1
    residual_min: float | None = None
    expect: str = "match"  # 'match' or 'residual'
    cross_check: bool = False
    ascent_steps: int = 12
    restarts: int = 2
    trials: int = 50
    K: int = 3
    box: int = 10**6
    max_points: int = 128
    grid_N: int = 1024
    grid_L: float = 128.0
    fields: int = 20
    subcollections: int = 100
    out_dir: str | None = None

    def validate(self):
        if self.kind not in KIND_CHOICES:
            raise ConfigError("kind", f"unknown kind {self.kind!r}")
        if self.kind in ("scaling", "transfer", "maximal"):
            if len(self.R_list) < 3:
                raise ConfigError("R", "need at least 3 scales for a fit")
            if any(x < 1 for x in self.R_list):
                raise ConfigError("R", "scales must be >= 1")
        if self.kind == "transfer" and not self.r_tilde > self.r:
            raise ConfigError("r_tilde", f"must exceed r = {self.r}")
        if self.expect not in ("match", "residual"):
            raise ConfigError("expect", "must be 'match' or 'residual'")
        if self.kind == "wavepacket-audit":
            for R in self.R_list:
                if self.grid_L / R != round(self.grid_L / R):
                    raise ConfigError("grid_L", f"must be a multiple of R={R}")
        return self


def _parse_scalar(v: str):
    v = v.strip()
    if v.lower() in ("inf", "infinity"):
        return math.inf
    if v.lower() in ("true", "false"):
        return v.lower() == "true"
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def parse_config(text: str) -> ExperimentConfig:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw!r}")
        k, _, v = line.partition("=")
        kv[k.strip()] = v.strip()
    if "kind" not in kv:
        raise ConfigError("kind", "missing")
    if "symbol" not in kv:
        raise ConfigError("symbol", "missing")
    cfg = ExperimentConfig(kind=kv.pop("kind"),
                           symbol=symbols.from_config(kv.pop("symbol")))
    lists = {"R": "R_list", "H": "H_list"}
    renames = {"out": "out_dir", "N": "grid_N", "L": "grid_L"}
    for k, v in kv.items():
        if k in lists:
            setattr(cfg, lists[k], tuple(float(x) for x in v.split(",")))
        elif k in renames:
            setattr(cfg, renames[k], _parse_scalar(v) if k != "out" else v)
        elif hasattr(cfg, k):
            setattr(cfg, k, _parse_scalar(v))
        else:
            raise ConfigError(k, "unknown key")
    return cfg.validate()


@dataclass
class Report:
    config: dict
    measurements: list = dc_field(default_factory=list)
    fits: list = dc_field(default_factory=list)
    criteria: list = dc_field(default_factory=list)
    environment: dict = dc_field(default_factory=dict)
    schema: str = SCHEMA

    def measure(self, name: str, value, operation: str):
        self.measurements.append({"name": name, "value": value,
                                  "operation": operation})

    def criterion(self, name: str, passed: bool, detail: str):
        self.criteria.append({"name": name, "passed": bool(passed),
                              "detail": detail})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.criteria)

    def to_dict(self) -> dict:
        return {"schema": self.schema, "config": self.config,
                "measurements": self.measurements, "fits": self.fits,
                "criteria": self.criteria, "environment": self.environment}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def validate_report(d: dict) -> list:
    """Hand-rolled schema check; returns a list of problems (empty = valid)."""
    problems = []
    for key in ("schema", "config", "measurements", "fits", "criteria",
                "environment"):
        if key not in d:
            problems.append(f"missing key {key}")
    if d.get("schema") != SCHEMA:
        problems.append(f"schema is {d.get('schema')!r}, expected {SCHEMA!r}")
    for m in d.get("measurements", []):
        for k in ("name", "value", "operation"):
            if k not in m:
                problems.append(f"measurement missing {k}: {m}")
    for c in d.get("criteria", []):
        for k in ("name", "passed", "detail"):
            if k not in c:
                problems.append(f"criterion missing {k}: {c}")
    return problems


def _environment() -> dict:
    return {"platform": platform.platform(), "python": platform.python_version(),
            "numpy": np.__version__, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "wall_clock_s": None}


def _config_echo(cfg: ExperimentConfig) -> dict:
    d = {}
    for k, v in vars(cfg).items():
        if isinstance(v, symbols.SymbolSpec):
            d[k] = {"kind": v.kind, "m": v.m, "n": v.n, "scale": v.scale,
                    "terms": list(map(list, v.terms))}
        elif isinstance(v, tuple):
            d[k] = list(v)
        elif isinstance(v, float) and math.isinf(v):
            d[k] = "inf"
        else:
            d[k] = v
    return d


def _write_artifacts(report: Report, cfg: ExperimentConfig):
    if not cfg.out_dir:
        return
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "report.json"), "w") as fh:
        fh.write(report.to_json())
    rows = [m for m in report.measurements if isinstance(m["value"], (int, float))]
    with open(os.path.join(cfg.out_dir, "measurements.csv"), "w") as fh:
        fh.write("name,value,operation\n")
        for m in rows:
            fh.write(f"{m['name']},{m['value']!r},{m['operation']}\n")
    for fit in report.fits:
        tag = fit.get("tag", "fit")
        with open(os.path.join(cfg.out_dir, f"{tag}.dat"), "w") as fh:
            fh.write("# R value\n")
            for R, v in zip(fit["R"], fit["values"]):
                fh.write(f"{R} {v}\n")


def run(config: ExperimentConfig) -> Report:
    config.validate()
    start = time.time()
    report = Report(config=_config_echo(config))
    runner = {
        "scaling": _run_scaling,
        "transfer": _run_transfer,
        "maximal": _run_maximal,
        "wavepacket-audit": _run_wavepacket_audit,
        "sparse-audit": _run_sparse_audit,
        "decay-audit": _run_decay_audit,
        "propagator-audit": _run_propagator_audit,
        "decoupling-audit": _run_decoupling_audit,
    }[config.kind]
    runner(config, report)
    report.environment = _environment()
    report.environment["wall_clock_s"] = round(time.time() - start, 3)
    _write_artifacts(report, config)
    return report


# ---------------------------------------------------------------------------
# Individual experiment kinds
# ---------------------------------------------------------------------------


def _run_scaling(cfg: ExperimentConfig, report: Report):
    samples = []
    for R in cfg.R_list:
        spec = opnorm.SmoothingOperatorSpec(sym=cfg.symbol, alpha=cfg.alpha, R=R,
                                            q=cfg.q, r=cfg.r)
        res = opnorm.operator_norm_l2(spec, seed=cfg.seed)
        samples.append((R, res.value))
        report.measure(f"norm_R{R:g}", res.value, "operator_norm_l2")
        report.measure(f"iterations_R{R:g}", res.iterations, "operator_norm_l2")
        if not res.converged:
            report.measure(f"nonconverged_gap_R{R:g}", res.last_gap,
                           "operator_norm_l2")
    predicted = opnorm.predicted_exponent(cfg.symbol.n, cfg.symbol.m, cfg.q,
                                          cfg.r, cfg.alpha)
    fit = opnorm.fit_exponent(samples, predicted=predicted)
    report.fits.append({"tag": "scaling", "R": list(fit.R_values),
                        "values": list(fit.norms), "slope": fit.slope,
                        "intercept": fit.intercept, "stderr": fit.stderr,
                        "predicted": predicted})
    if cfg.expect == "match":
        ok = abs(fit.slope - predicted) <= cfg.slope_tol
        report.criterion("slope-matches-prediction", ok,
                         f"slope {fit.slope:.4f} vs {predicted:.4f} "
                         f"(tol {cfg.slope_tol})")
    else:
        rmin = cfg.residual_min if cfg.residual_min is not None else 0.2
        ok = fit.residual_slope >= rmin
        report.criterion("residual-slope-grows", ok,
                         f"residual {fit.residual_slope:.4f} >= {rmin}")
    if cfg.cross_check:
        R0 = cfg.R_list[0]
        spec0 = opnorm.SmoothingOperatorSpec(sym=cfg.symbol, alpha=cfg.alpha,
                                             R=R0, q=cfg.q, r=cfg.r)
        dense = opnorm.operator_norm_dense_eig(spec0)
        power = samples[0][1]
        rel = abs(dense - power) / dense
        report.measure("dense_vs_power_rel", rel, "operator_norm_dense_eig")
        report.criterion("dense-cross-check", rel <= 0.01,
                         f"eig {dense:.6f} vs power {power:.6f} ({rel:.2e})")


def _run_maximal(cfg: ExperimentConfig, report: Report):
    samples = []
    for R in cfg.R_list:
        spec = opnorm.SmoothingOperatorSpec(sym=cfg.symbol, alpha=cfg.alpha, R=R,
                                            q=cfg.q, r=math.inf)
        res = opnorm.lower_bound_mixed(spec, seed=cfg.seed,
                                       ascent_steps=cfg.ascent_steps,
                                       restarts=cfg.restarts)
        samples.append((R, res.value))
        report.measure(f"maximal_R{R:g}", res.value, "lower_bound_mixed")
        report.measure(f"refinement_delta_R{R:g}", res.refinement_delta,
                       "lower_bound_mixed")
        report.measure(f"candidate_R{R:g}", res.candidate, "lower_bound_mixed")
    predicted = opnorm.predicted_exponent(cfg.symbol.n, cfg.symbol.m, cfg.q,
                                          math.inf, cfg.alpha)
    fit = opnorm.fit_exponent(samples, predicted=predicted)
    report.fits.append({"tag": "maximal", "R": list(fit.R_values),
                        "values": list(fit.norms), "slope": fit.slope,
                        "intercept": fit.intercept, "stderr": fit.stderr,
                        "predicted": predicted})
    ok = abs(fit.slope - predicted) <= cfg.slope_tol
    report.criterion("maximal-slope", ok,
                     f"slope {fit.slope:.4f} vs {predicted:.4f} (tol {cfg.slope_tol})")


def _run_transfer(cfg: ExperimentConfig, report: Report):
    loc, glob = [], []
    for R in cfg.R_list:
        s_loc = opnorm.SmoothingOperatorSpec(sym=cfg.symbol, alpha=cfg.alpha,
                                             R=R, q=cfg.q, r=cfg.r, window="local")
        v_loc = opnorm.operator_norm_l2(s_loc, seed=cfg.seed).value
        loc.append((R, v_loc))
        report.measure(f"local_R{R:g}", v_loc, "operator_norm_l2")
        s_glob = opnorm.SmoothingOperatorSpec(sym=cfg.symbol, alpha=cfg.alpha,
                                              R=R, q=cfg.q, r=cfg.r_tilde,
                                              window="global")
        res = opnorm.lower_bound_mixed(s_glob, seed=cfg.seed,
                                       ascent_steps=cfg.ascent_steps,
                                       restarts=cfg.restarts)
        glob.append((R, res.value))
        report.measure(f"global_R{R:g}", res.value, "lower_bound_mixed")
        report.measure(f"tail_fraction_R{R:g}", res.tail_fraction,
                       "lower_bound_mixed")
    f_loc = opnorm.fit_exponent(loc)
    f_glob = opnorm.fit_exponent(glob)
    delta_inf, alpha_sup = opnorm.transfer_exponent(cfg.symbol.n, cfg.r,
                                                    cfg.r_tilde, cfg.alpha)
    report.fits.append({"tag": "local", "R": list(f_loc.R_values),
                        "values": list(f_loc.norms), "slope": f_loc.slope,
                        "intercept": f_loc.intercept, "stderr": f_loc.stderr,
                        "predicted": None})
    report.fits.append({"tag": "global", "R": list(f_glob.R_values),
                        "values": list(f_glob.norms), "slope": f_glob.slope,
                        "intercept": f_glob.intercept, "stderr": f_glob.stderr,
                        "predicted": None})
    report.measure("delta_inf", delta_inf, "transfer_exponent")
    report.measure("alpha_global_sup", alpha_sup, "transfer_exponent")
    bound = f_loc.slope + delta_inf + 0.1
    ok = f_glob.slope <= bound
    report.criterion("window-transfer-slope", ok,
                     f"global {f_glob.slope:.4f} <= local {f_loc.slope:.4f} "
                     f"+ {delta_inf} + 0.1 = {bound:.4f}")


def _run_propagator_audit(cfg: ExperimentConfig, report: Report):
    grid = Grid(cfg.symbol.n, cfg.grid_N, cfg.grid_L)
    worst = 0.0
    times = np.linspace(0.0, 4.0, 64)
    for s in range(cfg.fields):
        f = make_field(grid, RandomBandlimited(Annulus(0.25, 8.0), seed=cfg.seed + s))
        u = propagator.propagate(f, cfg.symbol, times)
        worst = max(worst, propagator.energy_defect(u, f))
    report.measure("energy_defect_max", worst, "propagate")
    report.criterion("energy-identity", worst <= 1e-12,
                     f"max relative defect {worst:.2e} <= 1e-12")

    gg = Grid(1, 2048, 64.0)
    f0 = make_field(gg, GaussianRecipe(center=(0.0,), width=1.0))
    t = 0.5
    u = propagator.propagate(f0, symbols.schrodinger(1), [t])
    x = gg.x_axis()
    # refined-grid quadrature of the oscillatory integral, independent path
    M = 1 << 13
    xi = np.linspace(-16.0, 16.0, M, endpoint=False)
    fhat = math.sqrt(2 * math.pi) * np.exp(-(xi**2) / 2.0)
    kernel = np.exp(1j * t * xi**2) * fhat
    dxi = xi[1] - xi[0]
    oracle = (kernel[None, :] * np.exp(1j * np.outer(x, xi))).sum(axis=1)
    oracle *= dxi / (2 * math.pi)
    err = float(np.max(np.abs(u.slices[0] - oracle)))
    report.measure("gaussian_oracle_maxabs", err, "propagate")
    report.criterion("gaussian-oracle", err <= 1e-6, f"max abs {err:.2e} <= 1e-6")


def _run_wavepacket_audit(cfg: ExperimentConfig, report: Report):
    grid = Grid(cfg.symbol.n, cfg.grid_N, cfg.grid_L)
    worst_recon = worst_energy = worst_spill = 0.0
    last_dec = None
    for R in cfg.R_list:
        for s in range(cfg.fields):
            f = make_field(grid, RandomBandlimited(Sector(), seed=cfg.seed + s))
            dec = wavepackets.decompose(f, R)
            rec = wavepackets.reconstruct(dec)
            worst_recon = max(worst_recon,
                              Field(grid, rec.values - f.values).l2() / f.l2())
            worst_energy = max(worst_energy, wavepackets.energy_identity_defect(dec))
            worst_spill = max(worst_spill, dec.spill_max)
            last_dec = dec
    report.measure("reconstruction_max", worst_recon, "decompose/reconstruct")
    report.measure("energy_defect_max", worst_energy, "decompose")
    report.measure("spatial_spill_max", worst_spill, "decompose")
    report.measure("spill_radius_factor", wavepackets.SPILL_RADIUS_FACTOR,
                   "decompose")
    report.criterion("packet-reconstruction", worst_recon <= 1e-10,
                     f"max rel error {worst_recon:.2e} <= 1e-10")
    report.criterion("packet-energy-identity", worst_energy <= 1e-10,
                     f"max rel defect {worst_energy:.2e} <= 1e-10")

    rng = np.random.default_rng(cfg.seed)
    packets = last_dec.packets
    worst_ratio = 0.0
    for _ in range(cfg.subcollections):
        k = int(rng.integers(1, len(packets)))
        sel = rng.choice(len(packets), size=k, replace=False)
        worst_ratio = max(worst_ratio, wavepackets.almost_orthogonality(
            [packets[i] for i in sel], grid))
    report.measure("orthogonality_ratio_max", worst_ratio, "almost_orthogonality")
    report.criterion("almost-orthogonality", worst_ratio <= 4.0,
                     f"max ratio {worst_ratio:.3f} <= 4")


def _run_sparse_audit(cfg: ExperimentConfig, report: Report):
    rng = np.random.default_rng(cfg.seed)
    all_ok = True
    worst_c = 0.0
    c_cover = 2.0
    for _ in range(cfg.trials):
        npts = int(rng.integers(2, cfg.max_points + 1))
        pts = set()
        while len(pts) < npts:
            pts.add(tuple(int(rng.integers(0, cfg.box)) for _ in range(2)))
        E = sparse.CubeSet(dim=2, points=tuple(pts))
        levels = sparse.sparse_decompose(E, K=cfg.K)
        audit = sparse.audit_decomposition(E, levels)
        ok = audit["partition_ok"] and audit["cover_ok"] and audit["sparse_ok"]
        all_ok &= ok
        worst_c = max(worst_c, audit["max_families"] / len(E) ** (1.0 / cfg.K))
        cols = sparse.columns_by_height(E)
        all_ok &= sum(len(cs) for cs in cols.values()) == len(E)
    report.measure("worst_cover_constant", worst_c, "sparse_decompose")
    report.measure("c_cover_budget", c_cover, "sparse_decompose")
    report.criterion("sparse-decomposition-audit",
                     all_ok and worst_c <= c_cover,
                     f"all audits pass, worst family constant {worst_c:.2f} "
                     f"<= {c_cover}")


def _run_decay_audit(cfg: ExperimentConfig, report: Report):
    sym = cfg.symbol
    worst_slope = -math.inf
    for R in cfg.R_list:
        v = np.array([1.0])
        t = R**2 / 2.0
        _, grad = symbols.phase(sym, v)
        core = -t * grad[0]
        ds = np.array([R, 2 * R, 4 * R, 8 * R])
        vals = [abs(wavepackets.packet_kernel(v, R, sym, t,
                                              np.array([core + d])).value)
                for d in ds]
        slope = float(np.polyfit(np.log(ds), np.log(vals), 1)[0])
        report.measure(f"kernel_slope_R{R:g}", slope, "packet_kernel")
        worst_slope = max(worst_slope, slope)
    report.criterion("kernel-decay", worst_slope <= -3.0,
                     f"worst log-log slope {worst_slope:.2f} <= -3")

    patch = sparse.surface_patch(sym)
    nvec = np.array([1.0, -2.0]) / math.sqrt(5.0)
    lams = np.exp(np.linspace(math.log(16.0), math.log(256.0), 9))
    vals = [abs(sparse.surface_fourier(patch, lam * nvec)) for lam in lams]
    slope = float(np.polyfit(np.log(lams), np.log(vals), 1)[0])
    report.measure("surface_decay_slope", slope, "surface_fourier")
    report.criterion("surface-measure-decay", abs(slope + 0.5) <= 0.1,
                     f"slope {slope:.3f} within -0.5 +/- 0.1")


def _random_ball_function(seed: int) -> sparse.BallFunction:
    rng = np.random.default_rng(seed)
    t_ax = np.linspace(0.0, 4.5, 64)
    x_ax = np.linspace(0.0, 2.5, 40)
    tt, xx = np.meshgrid(t_ax, x_ax, indexing="ij")
    env = np.exp(-(((tt - 2.2) / 1.5) ** 2) - ((xx - 1.2) / 0.8) ** 2)
    vals = env * (rng.standard_normal(tt.shape) + 1j * rng.standard_normal(tt.shape))
    k = np.exp(-0.5 * ((np.fft.fftfreq(len(t_ax))[:, None] * 8) ** 2
                       + (np.fft.fftfreq(len(x_ax))[None, :] * 8) ** 2))
    vals = np.fft.ifft2(np.fft.fft2(vals) * k)
    return sparse.BallFunction(t_axis=t_ax, x_axis=x_ax, values=vals)


def _run_decoupling_audit(cfg: ExperimentConfig, report: Report):
    patch = sparse.surface_patch(cfg.symbol, samples=256)
    H = 8
    N = 4
    singles = []
    for s in range(6):
        fam1 = sparse.SparseFamily(centers=((0, 0),), H=H)
        f = _random_ball_function(cfg.seed + s)
        singles.append(sparse.decoupling_check(fam1, [f], 2.0, patch)["ratio"])
    c_single = max(singles)
    report.measure("single_ball_constant", c_single, "decoupling_check")
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    sep = (N * H) ** 2
    for trial in range(10):
        centers = [(0, 0)]
        while len(centers) < N:
            cand = (int(rng.integers(-cfg.box, cfg.box)),
                    int(rng.integers(-cfg.box, cfg.box)))
            if all((cand[0] - c[0]) ** 2 + (cand[1] - c[1]) ** 2 >= sep**2
                   for c in centers):
                centers.append(cand)
        fam = sparse.SparseFamily(centers=tuple(centers), H=H)
        fns = [_random_ball_function(cfg.seed + 100 + 10 * trial + i)
               for i in range(N)]
        res = sparse.decoupling_check(fam, fns, 2.0, patch)
        worst = max(worst, res["ratio"])
    report.measure("decoupling_ratio_max", worst, "decoupling_check")
    report.criterion("sparse-decoupling", worst <= 2.0 * c_single,
                     f"max ratio {worst:.4f} <= 2 x single-ball {c_single:.4f}")


# ---------------------------------------------------------------------------
# The acceptance battery
# ---------------------------------------------------------------------------


def acceptance_runs(quick: bool = False) -> list:
    """The full verification battery as (name, config) pairs, in order."""
    schr = "power:m=2,n=1"
    R_big = "8,16,32" if quick else "8,16,32,64"
    runs = [
        ("energy-and-gaussian", f"kind = propagator-audit\nsymbol = {schr}\n"
         "N = 1024\nL = 64\nfields = 100\nseed = 1"),
        ("wavepacket-identities", f"kind = wavepacket-audit\nsymbol = {schr}\n"
         "N = 1024\nL = 128\nR = 4,8\nfields = 20\nseed = 2"),
        ("kernel-and-surface-decay", f"kind = decay-audit\nsymbol = {schr}\n"
         "R = 16,32\nseed = 3"),
        ("l2-scaling", f"kind = scaling\nsymbol = {schr}\nalpha = 0.5\n"
         f"q = 2\nr = 2\nR = {R_big}\ncross_check = true\nseed = 4"),
        ("sharpness-direction", f"kind = scaling\nsymbol = {schr}\n"
         f"alpha = 0.75\nq = 2\nr = 2\nR = {R_big}\nexpect = residual\n"
         "residual_min = 0.2\nseed = 5"),
        ("maximal-exponent", f"kind = maximal\nsymbol = {schr}\nalpha = -0.25\n"
         f"q = 2\nR = {R_big}\nseed = 6"),
        ("window-transfer", f"kind = transfer\nsymbol = {schr}\nalpha = 0.5\n"
         "q = 2\nr = 2\nr_tilde = 4\nR = 8,16,32\nseed = 7"),
        ("sparse-decomposition", f"kind = sparse-audit\nsymbol = {schr}\n"
         "trials = 50\nK = 3\nseed = 8"),
        ("sparse-decoupling", f"kind = decoupling-audit\nsymbol = {schr}\n"
         "seed = 9"),
    ]
    return [(name, parse_config(text)) for name, text in runs]


def verify_all(out_dir: str | None = None, quick: bool = False) -> Report:
    """Run every acceptance experiment; aggregate pass/fail per criterion."""
    t0 = time.time()
    agg = Report(config={"kind": "verify-all", "quick": quick})
    for name, cfg in acceptance_runs(quick=quick):
        if out_dir:
            cfg.out_dir = os.path.join(out_dir, name)
        sub = run(cfg)
        for c in sub.criteria:
            agg.criteria.append({"name": f"{name}/{c['name']}",
                                 "passed": c["passed"], "detail": c["detail"]})
        for m in sub.measurements:
            agg.measurements.append({"name": f"{name}/{m['name']}",
                                     "value": m["value"],
                                     "operation": m["operation"]})
        agg.fits.extend(sub.fits)
    # tube-incidence check runs inline (cheap, geometric)
    sym = symbols.schrodinger(1)
    counts = {}
    for H in (16.0, 32.0, 64.0):
        counts[H] = wavepackets.max_overlap(sym, H)["count"]
    ratio = max(counts.values()) / min(counts.values())
    agg.measurements.append({"name": "tube-incidence/counts",
                             "value": {str(k): v for k, v in counts.items()},
                             "operation": "max_overlap"})
    agg.criteria.append({"name": "tube-incidence/overlap-stability",
                         "passed": ratio <= 2.0,
                         "detail": f"max/min overlap {ratio:.2f} <= 2 across H"})
    agg.environment = _environment()
    agg.environment["wall_clock_s"] = round(time.time() - t0, 3)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "verify.json"), "w") as fh:
            fh.write(agg.to_json())
    return agg
