"""Command-line interface: field creation, propagation, norms, operator
norms, wave-packet decomposition, and the experiment runner."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import experiments, norms, opnorm, propagator, symbols, wavepackets
from .core import (Annulus, Ball, GaussianRecipe, Grid, KnappRecipe,
                   RandomBandlimited, Sector, make_field, read_field,
                   read_spacetime, write_field, write_spacetime)


def _parse_recipe(text: str):
    kind, _, rest = text.partition(":")
    kv = {}
    for part in filter(None, rest.split(",")):
        k, _, v = part.partition("=")
        kv[k.strip()] = v.strip()
    if kind == "gaussian":
        center = tuple(float(c) for c in kv.get("center", "0").split(";"))
        return GaussianRecipe(center=center, width=float(kv.get("width", "1")))
    if kind == "random":
        region = kv.get("region", "sector")
        if region == "sector":
            reg = Sector()
        elif region.startswith("annulus"):
            _, r0, r1 = region.split(";")
            reg = Annulus(float(r0), float(r1))
        else:
            _, c, rad = region.split(";")
            reg = Ball(center=(float(c),), radius=float(rad))
        return RandomBandlimited(region=reg, seed=int(kv.get("seed", "0")))
    if kind == "knapp":
        return KnappRecipe(R=float(kv["R"]),
                           center_xi=float(kv.get("center", "1.2")))
    raise ValueError(f"unknown recipe {text!r}")


def _cmd_field(args):
    n, N, L = args.grid.split(",")
    grid = Grid(int(n), int(N), float(L))
    f = make_field(grid, _parse_recipe(args.make))
    write_field(f, args.out)
    print(f"wrote {args.out} ({grid.n}d, N={grid.N}, L={grid.L})")


def _cmd_propagate(args):
    f = read_field(args.infile)
    sym = symbols.from_config(args.symbol)
    times = np.linspace(args.t0, args.t1, args.steps)
    u = propagator.propagate(f, sym, times)
    write_spacetime(u, args.out)
    print(f"wrote {args.out} ({args.steps} slices on [{args.t0}, {args.t1}])")


def _cmd_norm(args):
    u = read_spacetime(args.infile)
    q = math.inf if args.q == "inf" else float(args.q)
    r = math.inf if args.r == "inf" else float(args.r)
    ball = None
    if args.ball:
        parts = [float(x) for x in args.ball.split(",")]
        ball = (tuple(parts[:-1]), parts[-1])
    window = None
    if args.t:
        a, b = (float(x) for x in args.t.split(","))
        window = (a, b)
    spec = norms.MixedNormSpec(q=q, r=r, order=args.order, ball=ball,
                               window=window)
    print(f"{norms.mixed_norm(u, spec):.12g}")


def _cmd_opnorm(args):
    sym = symbols.from_config(args.symbol)
    window = "local"
    t_factor = opnorm.GLOBAL_T_FACTOR
    if args.window.startswith("global"):
        window = "global"
        if ":" in args.window:
            t_factor = float(args.window.split(":", 1)[1])
    q = math.inf if args.q == "inf" else float(args.q)
    r = math.inf if args.r == "inf" else float(args.r)
    rows = []
    samples = []
    for R in (float(x) for x in args.R.split(",")):
        spec = opnorm.SmoothingOperatorSpec(sym=sym, alpha=args.alpha, R=R,
                                            q=q, r=r, window=window,
                                            global_t_factor=t_factor)
        if q == 2 and r == 2:
            res = opnorm.operator_norm_l2(spec, seed=args.seed)
            rows.append((R, res.value, res.iterations, res.restarts))
        else:
            res = opnorm.lower_bound_mixed(spec, seed=args.seed)
            rows.append((R, res.value, res.evaluations, 0))
        samples.append((R, rows[-1][1]))
    print("R,norm,iterations,restarts")
    for row in rows:
        print(f"{row[0]:g},{row[1]:.10g},{row[2]},{row[3]}")
    if len(samples) >= 3:
        predicted = opnorm.predicted_exponent(sym.n, sym.m, q, r, args.alpha)
        fit = opnorm.fit_exponent(samples, predicted=predicted)
        summary = {"slope": fit.slope, "intercept": fit.intercept,
                   "stderr": fit.stderr, "predicted": predicted}
        print(json.dumps(summary, sort_keys=True))


def _cmd_wavepacket(args):
    f = read_field(args.infile)
    dec = wavepackets.decompose(f, args.R)
    os.makedirs(args.out_dir, exist_ok=True)
    manifest = os.path.join(args.out_dir, "manifest.csv")
    with open(manifest, "w") as fh:
        fh.write("index,l,v,energy,file\n")
        for i, p in enumerate(dec.packets):
            name = f"packet_{i:05d}.kslf"
            write_field(p.field(), os.path.join(args.out_dir, name))
            l_s = ";".join(f"{c:g}" for c in p.l)
            v_s = ";".join(f"{c:g}" for c in p.v)
            fh.write(f"{i},{l_s},{v_s},{p.energy:.17g},{name}\n")
    print(f"wrote {len(dec.packets)} packets to {args.out_dir} "
          f"(dropped {dec.dropped_count}, spill {dec.spill_max:.2e})")


def _cmd_run(args):
    with open(args.config) as fh:
        cfg = experiments.parse_config(fh.read())
    if args.out:
        cfg.out_dir = args.out
    report = experiments.run(cfg)
    for c in report.criteria:
        mark = "PASS" if c["passed"] else "FAIL"
        print(f"[{mark}] {c['name']}: {c['detail']}")
    if not report.criteria:
        print("(no criteria declared; measurements only)")
    return 0 if report.passed else 1


def _cmd_verify(args):
    report = experiments.verify_all(out_dir=args.out, quick=args.quick)
    for c in report.criteria:
        mark = "PASS" if c["passed"] else "FAIL"
        print(f"[{mark}] {c['name']}: {c['detail']}")
    print(f"total wall clock: {report.environment['wall_clock_s']}s")
    return 0 if report.passed else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="kato",
                                 description="smoothing-estimate laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", help="create a field file from a recipe")
    p.add_argument("--make", required=True,
                   help="gaussian:center=0,width=1 | random:region=sector,seed=7 | knapp:R=16")
    p.add_argument("--grid", required=True, help="n,N,L")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_field)

    p = sub.add_parser("propagate", help="evolve a field file")
    p.add_argument("--symbol", required=True)
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_propagate)

    p = sub.add_parser("norm", help="mixed norm of an evolution file")
    p.add_argument("--q", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--order", choices=("xt", "tx"), default="xt")
    p.add_argument("--ball", help="c1[,c2...],radius")
    p.add_argument("--t", help="a,b")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(fn=_cmd_norm)

    p = sub.add_parser("opnorm", help="operator norm scan over scales")
    p.add_argument("--symbol", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--q", default="2")
    p.add_argument("--r", default="2")
    p.add_argument("--order", choices=("xt", "tx"), default="xt")
    p.add_argument("--window", default="local", help="local or global[:T_factor]")
    p.add_argument("--R", required=True, help="comma-separated scales")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_opnorm)

    p = sub.add_parser("wavepacket", help="wave-packet operations")
    wsub = p.add_subparsers(dest="wp_command", required=True)
    pd = wsub.add_parser("decompose", help="split a field into packets")
    pd.add_argument("--R", type=float, required=True)
    pd.add_argument("--in", dest="infile", required=True)
    pd.add_argument("--out-dir", dest="out_dir", required=True)
    pd.set_defaults(fn=_cmd_wavepacket)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("verify", help="run the full verification battery")
    p.add_argument("--out")
    p.add_argument("--quick", action="store_true",
                   help="cap scales at R=32 for a faster pass")
    p.set_defaults(fn=_cmd_verify)

    args = ap.parse_args(argv)
    rc = args.fn(args)
    return int(rc) if rc is not None else 0


if __name__ == "__main__":
    sys.exit(main())
