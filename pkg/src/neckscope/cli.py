"""Batch experiment driver.

One subcommand per module surface: metric, neck, ascr, busemann, volume, gb,
pinch, flow, chain, suite.  Everything writes CSV (optionally an SVG line
plot derived from the same rows); under a fixed seed outputs are
byte-identical across runs on the same platform.  Exit codes: 0 success,
1 a verification check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import acceptance
from .asymptotics import (
    ascr_profile,
    avr,
    bishop_gromov_check,
    busemann_containment_check,
    busemann_estimate,
    relative_volume_report,
    theta_profile,
)
from .chain import ChainConfig, ascr_lower_bound, constants_for, delta_of_Lb
from .errors import NeckscopeError
from .flow import init_flow, run_flow, rescale_at, track_neck
from .hypersurfaces import (
    area_lower_bound_check,
    gauss_bonnet_integrand,
    parallel_surface,
    q_bound_check,
    weingarten_bound_check,
)
from .necks import (
    certify_absolute_neck,
    certify_neck,
    epsilon_prime,
    normalize_parametrization,
    verify_absolute_conversion,
)
from .pinching import (
    EigenTriple,
    dichotomy_check,
    dichotomy_sweep,
    g_quantity,
    integrate_curvature_ode,
    j_quantity,
    lemma_c_check,
    lemma_c_sweep,
    necklike_delta,
    p_quantity,
)
from .warped import (
    Point,
    Tangent,
    annulus_volume_mc,
    ball_volume,
    curvature_at,
    cylinder_spec,
    distance,
    dumbbell_spec,
    flare_spec,
    flat_spec,
    geodesic_shoot,
    make_metric,
    sampled_spec_from_csv,
    scale_metric,
    sphere_spec,
)

# Map from operation name to the unique subcommand that reaches it; the
# registry test asserts coverage of the public operation surface.
OP_REGISTRY = {
    "make_metric": "metric",
    "curvature_at": "metric",
    "distance": "metric",
    "geodesic_shoot": "metric",
    "ball_volume": "volume",
    "annulus_volume_mc": "volume",
    "normalize_parametrization": "neck",
    "certify_neck": "neck",
    "certify_absolute_neck": "neck",
    "epsilon_prime": "neck",
    "verify_absolute_conversion": "neck",
    "ascr_profile": "ascr",
    "avr": "ascr",
    "theta_profile": "busemann",
    "busemann_estimate": "busemann",
    "busemann_containment_check": "busemann",
    "bishop_gromov_check": "volume",
    "relative_volume_report": "volume",
    "parallel_surface": "gb",
    "weingarten_bound_check": "gb",
    "gauss_bonnet_integrand": "gb",
    "q_bound_check": "gb",
    "area_lower_bound_check": "gb",
    "p_quantity": "pinch",
    "necklike_delta": "pinch",
    "lemma_c_check": "pinch",
    "g_quantity": "pinch",
    "j_quantity": "pinch",
    "dichotomy_check": "pinch",
    "integrate_curvature_ode": "pinch",
    "init_flow": "flow",
    "step": "flow",
    "rescale_at": "flow",
    "track_neck": "flow",
    "delta_of_Lb": "chain",
    "ascr_lower_bound": "chain",
    "constants_for": "chain",
    "run_suite": "suite",
}


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_svg_lines(path, header, rows, x_col=0, y_cols=None):
    """Line plot of CSV columns; a derived view carrying no extra data."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = [[float(v) for v in r] for r in rows]
    if not rows:
        return
    if y_cols is None:
        y_cols = list(range(1, len(rows[0])))
    xs = [r[x_col] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for c in y_cols:
        ax.plot(xs, [r[c] for r in rows], label=header[c])
    ax.set_xlabel(header[x_col])
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def build_metric(args):
    preset = args.preset
    if preset == "cylinder":
        spec = cylinder_spec(args.c, n=args.n, t_min=args.t_min, t_max=args.t_max)
    elif preset == "flat":
        spec = flat_spec(n=args.n, t_max=args.t_max)
    elif preset == "sphere":
        spec = sphere_spec(args.a, n=args.n)
    elif preset == "flare":
        spec = flare_spec(args.sigma, n=args.n, t_max=args.t_max)
    elif preset == "dumbbell":
        spec = dumbbell_spec(args.A, n=args.n)
    elif preset == "sampled":
        spec = sampled_spec_from_csv(args.warp_csv, n=args.n)
    else:
        raise NeckscopeError(f"unknown preset {preset}")
    m = make_metric(spec)
    if args.scale != 1.0:
        m = scale_metric(m, args.scale)
    return m


def _add_metric_args(p, t_max=100.0):
    p.add_argument("--preset", default="flare",
                   choices=["cylinder", "flat", "sphere", "flare", "dumbbell", "sampled"])
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--A", type=float, default=0.8)
    p.add_argument("--t-min", type=float, default=-10.0)
    p.add_argument("--t-max", type=float, default=t_max)
    p.add_argument("--warp-csv", default=None)
    p.add_argument("--scale", type=float, default=1.0)


def _out(args, default):
    return args.out or default


# ---------------------------------------------------------------------------
# Subcommand handlers (return process exit code)
# ---------------------------------------------------------------------------

def cmd_metric(args):
    m = build_metric(args)
    if args.action == "curvature":
        ts = np.linspace(m.t_min + 1e-6 * (m.t_max - m.t_min), m.t_max * (1 - 1e-9),
                         args.samples)
        rows = []
        for t in ts:
            cs = curvature_at(m, float(t))
            rows.append([cs.t, cs.K_rad, cs.K_sph, cs.R])
        path = _out(args, "curvature.csv")
        write_csv(path, ["t", "K_rad", "K_sph", "R"], rows)
        if args.svg:
            write_svg_lines(path.replace(".csv", ".svg"), ["t", "K_rad", "K_sph", "R"], rows)
    elif args.action == "distance":
        p = Point(args.p_t, (1.0, 0.0, 0.0))
        gq = args.q_angle
        q = Point(args.q_t, (math.cos(gq), math.sin(gq), 0.0))
        d = distance(m, p, q)
        write_csv(_out(args, "distance.csv"),
                  ["t_p", "t_q", "angle", "distance"],
                  [[args.p_t, args.q_t, gq, d]])
    elif args.action == "shoot":
        p = Point(args.p_t, (1.0, 0.0, 0.0))
        beta = args.beta
        phi0 = float(m.phi(args.p_t))
        tangent = Tangent(math.cos(beta), (0.0, math.sin(beta) / phi0, 0.0))
        end, tan, drift = geodesic_shoot(m, p, tangent, args.length)
        write_csv(_out(args, "shoot.csv"),
                  ["t_end", "radial_speed", "clairaut_drift"],
                  [[end.t, tan.radial, drift]])
    return 0


def cmd_volume(args):
    m = build_metric(args)
    if args.action == "ball":
        rows = [[r, ball_volume(m, r)] for r in np.linspace(args.r1, args.r2, args.samples)]
        write_csv(_out(args, "ball_volume.csv"), ["r", "volume"], rows)
    elif args.action == "annulus":
        Q = Point(args.q_t, (1.0, 0.0, 0.0))
        est = annulus_volume_mc(m, Q, args.r1, args.r2, args.mc_samples, seed=args.seed)
        write_csv(_out(args, "annulus.csv"),
                  ["R1", "R2", "volume", "std_error", "samples"],
                  [[args.r1, args.r2, est.value, est.std_error, est.samples]])
    elif args.action == "bishop-gromov":
        Q = Point(args.q_t, (1.0, 0.0, 0.0))
        base = np.linspace(args.r1, args.r2, 4)
        pairs = [(lo, lo + (args.r2 - args.r1) / 3.0) for lo in base]
        rep = bishop_gromov_check(m, Q, pairs, samples=args.mc_samples, seed=args.seed)
        rows = [[lo, hi, rat, err] for (lo, hi), rat, err in
                zip(rep.pairs, rep.ratios, rep.errors)]
        write_csv(_out(args, "bishop_gromov.csv"),
                  ["lo", "hi", "ratio", "std_error"], rows)
        if not rep.monotone_within_3se:
            print("bishop-gromov monotonicity FAILED", file=sys.stderr)
            return 1
    elif args.action == "relvol":
        Q = Point(args.q_t, (1.0, 0.0, 0.0))
        rep = relative_volume_report(m, Q, args.r1 if args.r1 > 0 else None,
                                     args.r2 if args.r2 > 0 else None,
                                     args.L_b, samples=args.mc_samples, seed=args.seed)
        write_csv(_out(args, "relvol.csv"),
                  ["R1", "R2", "ratio", "ratio_error", "delta", "L_b", "w0",
                   "r0", "pass"],
                  [[rep.R1, rep.R2, rep.ratio, rep.ratio_error, rep.delta,
                    rep.L_b, rep.w0, rep.r0, int(rep.passed)]])
        if not (rep.passed and rep.w0_ok and rep.sublemma_ok):
            print("relative volume check FAILED", file=sys.stderr)
            return 1
    return 0


def cmd_neck(args):
    m = build_metric(args)
    t0, t1 = args.window
    if args.action == "normalize":
        win = normalize_parametrization(m, t0, t1)
        rows = list(zip(win.z, win.t, win.r))
        path = _out(args, "normalized.csv")
        write_csv(path, ["z", "t", "r"], rows)
        if args.svg:
            write_svg_lines(path.replace(".csv", ".svg"), ["z", "t", "r"], rows,
                            y_cols=[2])
    elif args.action == "certify":
        cert = certify_neck(m, t0, t1, args.k)
        rows = [cert.csv_row(args.eps, args.k, args.L)]
        write_csv(_out(args, "certificate.csv"),
                  ["a", "b", "k", "L", "eps_conformal", "eps_logr", "eps", "pass"],
                  rows)
        if args.eps is not None and not cert.passes(args.eps, args.k, args.L):
            print(f"certification FAILED: eps={cert.eps:g} > {args.eps:g}",
                  file=sys.stderr)
            return 1
    elif args.action == "absolute":
        cert = certify_absolute_neck(m, t0, t1, args.k)
        write_csv(_out(args, "absolute_certificate.csv"),
                  ["a", "b", "k", "L", "eps_abs"],
                  [[cert.a, cert.b, cert.k, cert.L, cert.eps_abs]])
    elif args.action == "convert":
        reports = verify_absolute_conversion(m, t0, t1, args.k)
        rows = [[r.eps, r.eps_prime, r.neck_eps, r.abs_eps, int(r.applicable),
                 int(r.passed), r.margin] for r in reports]
        write_csv(_out(args, "conversion.csv"),
                  ["eps", "eps_prime", "neck_eps", "abs_eps", "applicable",
                   "pass", "margin"], rows)
        if not all(r.passed for r in reports):
            return 1
    elif args.action == "epsilon-prime":
        val = epsilon_prime(args.eps or 0.1, args.k, args.L, n=args.n)
        write_csv(_out(args, "epsilon_prime.csv"),
                  ["eps", "k", "L", "n", "eps_prime"],
                  [[args.eps or 0.1, args.k, args.L, args.n, val]])
    return 0


def cmd_ascr(args):
    m = build_metric(args)
    if args.action == "profile":
        grid = np.geomspace(args.r1, args.r2, args.samples)
        prof = ascr_profile(m, grid, truncated=args.truncated)
        rows = list(zip(prof.r, prof.a2, prof.kappa, prof.rho))
        path = _out(args, "ascr_profile.csv")
        write_csv(path, ["r", "a2", "kappa", "rho"], rows)
        if args.svg:
            write_svg_lines(path.replace(".csv", ".svg"), ["r", "a2", "kappa", "rho"],
                            rows, y_cols=[1])
        print(f"ascr_estimate={prof.ascr_estimate!r} diverging={prof.diverging}")
    elif args.action == "avr":
        val = avr(m)
        write_csv(_out(args, "avr.csv"), ["avr"], [[val]])
        print(f"avr={val!r}")
    return 0


def cmd_busemann(args):
    m = build_metric(args)
    Q = Point(args.q_t, (1.0, 0.0, 0.0))
    if args.action == "theta":
        grid = np.geomspace(args.r1, args.r2, args.samples)
        theta, err, refined = theta_profile(m, Q, grid, ray_samples=args.rays)
        rows = list(zip(grid, theta))
        path = _out(args, "theta.csv")
        write_csv(path, ["r", "theta"], rows)
        if args.svg:
            write_svg_lines(path.replace(".csv", ".svg"), ["r", "theta"], rows)
        print(f"refinement_error={err!r} refined={refined}")
    elif args.action == "bounds":
        rng = np.random.default_rng(args.seed)
        rows = []
        from .asymptotics import BusemannContext
        ctx = None
        if not (m.spec.pole_min and Q.t <= m.t_min + 1e-12):
            ctx = BusemannContext(m, Q)
        for _ in range(args.samples):
            t = rng.uniform(Q.t + 0.5, m.t_max * 0.8)
            g = rng.uniform(0, math.pi)
            x = Point(float(t), (math.cos(g), math.sin(g), 0.0))
            lo, hi = busemann_estimate(m, Q, x, context=ctx)
            rows.append([x.t, g, lo, hi])
        write_csv(_out(args, "busemann.csv"), ["t", "gamma", "lower", "upper"], rows)
        if any(r[2] > r[3] + 1e-9 for r in rows):
            return 1
    elif args.action == "containment":
        reports = busemann_containment_check(m, Q, args.r1, args.rho, args.eta2,
                                             seed=args.seed)
        rows = [[r.clause, int(r.passed), r.margin, r.n_points] for r in reports]
        write_csv(_out(args, "containment.csv"),
                  ["clause", "pass", "margin", "points"], rows)
        if not all(r.passed for r in reports):
            return 1
    return 0


def cmd_gb(args):
    m = build_metric(args)
    if args.action == "surface":
        surf = parallel_surface(m, args.r, args.rho, enforce_window=not args.no_window)
        rep = gauss_bonnet_integrand(m, surf)
        write_csv(_out(args, "gb.csv"),
                  ["r", "rho", "kappa", "G", "detL", "Q", "integral", "target"],
                  [[args.r, args.rho, surf.principal_curvature, rep.G, rep.detL,
                    rep.Q, rep.integral, rep.target]])
        if rep.relative_defect > 1e-10:
            return 1
    elif args.action == "weingarten":
        rep = weingarten_bound_check(m, args.r, args.rho)
        write_csv(_out(args, "weingarten.csv"),
                  ["r", "rho", "kappa", "lower", "upper", "pass"],
                  [[args.r, args.rho, rep.kappa, rep.lower, rep.upper,
                    int(rep.passed)]])
        if not rep.passed:
            return 1
    elif args.action == "area-sweep":
        prof = ascr_profile(m, np.geomspace(max(args.r / 20.0, 1e-2), m.t_max * 0.9, 60),
                            truncated=False)
        rows = []
        ok = True
        for r in np.linspace(max(args.r, 1.0), args.r2, args.samples):
            rho = min(prof.rho_at(r - args.eta2), (m.t_max - r) * 0.9)
            arep = area_lower_bound_check(m, r, rho, args.eta2, prof.a_at)
            qrep = q_bound_check(m, r, rho, args.eta2, prof.a_at)
            ok = ok and arep.passed and qrep.passed
            rows.append([r, rho, arep.area, arep.area_bound, arep.area_margin,
                         int(arep.passed and qrep.passed)])
        write_csv(_out(args, "area_sweep.csv"),
                  ["r", "rho", "area", "bound", "margin", "pass"], rows)
        if not ok:
            return 1
    return 0


def cmd_pinch(args):
    if args.action == "sample":
        tested, bad, worst = lemma_c_sweep(args.count, seed=args.seed)
        write_csv(_out(args, "pinch_sweep.csv"),
                  ["tested", "violations", "worst_ratio"], [[tested, bad, worst]])
        print(f"tested={tested} violations={bad} worst_ratio={worst!r}")
        return 0 if bad == 0 else 1
    if args.action == "dichotomy":
        cl, viol, by = dichotomy_sweep(args.count, seed=args.seed)
        write_csv(_out(args, "dichotomy.csv"),
                  ["classified", "violations", "low_curvature", "non_necklike",
                   "not_classified"],
                  [[cl, viol, by["low_curvature"], by["non_necklike"],
                    by["not_classified"]]])
        return 0 if viol == 0 else 1
    if args.action == "point":
        e = EigenTriple(args.lam, args.mu, args.nu)
        rows = [[e.lam, e.mu, e.nu, p_quantity(e), necklike_delta(e)]]
        write_csv(_out(args, "pinch_point.csv"),
                  ["lam", "mu", "nu", "P", "delta_star"], rows)
        return 0
    if args.action == "trajectory":
        if args.eps is None:
            from .pinching import eta_of_delta
            args.eps = eta_of_delta(args.delta)
        e = EigenTriple(args.lam, args.mu, args.nu)
        traj = integrate_curvature_ode(e, (args.time_start, args.time_end))
        rows = []
        for i, t in enumerate(traj.t):
            trip = traj.triple_at(i)
            row = [t, trip.lam, trip.mu, trip.nu, trip.R]
            if t < 0 and trip.R > 0:
                gq = g_quantity(trip, t, args.gamma, args.eps)
                jq = j_quantity(trip, t, args.gamma, args.eps)
                cls = dichotomy_check(trip, t, args.gamma / 8.0, args.delta,
                                      args.gamma, args.eps).classification
            else:
                gq, jq, cls = float("nan"), float("nan"), "n/a"
            rows.append(row + [gq, jq, cls])
        path = _out(args, "trajectory.csv")
        write_csv(path, ["t", "lambda", "mu", "nu", "R", "G", "J", "class"], rows)
        if args.svg:
            write_svg_lines(path.replace(".csv", ".svg"),
                            ["t", "lambda", "mu", "nu", "R"],
                            [r[:5] for r in rows], y_cols=[1, 2, 3])
        return 0
    return 2


def _parse_config(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def cmd_flow(args):
    params = {}
    if args.config:
        cfg = _parse_config(args.config)
        args.profile = cfg.get("profile", args.profile)
        args.grid = int(cfg.get("grid", args.grid))
        args.cfl = float(cfg.get("cfl", args.cfl))
        args.stop_rmax = float(cfg.get("stop_rmax", args.stop_rmax))
        args.snapshot_every = int(cfg.get("snapshot_every", args.snapshot_every))
        if "A" in cfg:
            args.A = float(cfg["A"])
    params["A"] = args.A
    params["a0"] = args.a
    params["sigma"] = args.sigma
    params["c"] = args.c
    state = init_flow(args.profile, grid=args.grid, **params)
    hist = run_flow(state, stop_rmax=args.stop_rmax, cfl=args.cfl,
                    snapshot_every=args.snapshot_every,
                    max_steps=args.max_steps, wall_clock=args.wall_clock)
    base = _out(args, "flow")
    rows = [[d["t"], d["R_max"], d["K_sup"], d["min_phi"], d["neck_phi"],
             d["inj_lower"], d["pole_regularity"]] for d in hist.series]
    write_csv(base + "_series.csv",
              ["t", "R_max", "K_sup", "min_phi", "neck_phi", "inj_lower",
               "pole_regularity"], rows)
    last = hist.snapshots[-1]
    write_csv(base + "_final.csv", ["s", "psi", "phi"],
              list(zip(last.s, last.psi, last.phi)))
    with open(base + "_manifest.txt", "w") as fh:
        fh.write(f"profile={args.profile}\nstop={hist.stop_reason}\n")
        for k, v in last.diagnostics().items():
            fh.write(f"{k}={v!r}\n")
    if args.track_neck:
        pts = track_neck(hist, k=args.k, L_target=args.L, eps_target=args.eps or 0.1)
        rows = [[p.t, "" if p.eps_at_L is None else p.eps_at_L,
                 "" if p.L_at_eps is None else p.L_at_eps, p.R_max] for p in pts]
        write_csv(base + "_neck.csv", ["t", "eps", "L", "rmax"], rows)
    if args.svg:
        write_svg_lines(base + "_series.svg",
                        ["t", "R_max", "K_sup", "min_phi", "neck_phi",
                         "inj_lower", "pole_regularity"],
                        [[r[0], r[1], r[2], r[3], r[4], r[5], r[6]] for r in rows],
                        y_cols=[1])
    return 0


def cmd_chain(args):
    cfg = ChainConfig()
    cc = constants_for(args.n, args.C0, cfg)
    lines = [
        "[chain]",
        f"n = {cc.n}",
        f"C0_requested = {cc.C0_requested!r}",
        f"L_b = {cc.L_b!r}",
        f"delta = {cc.delta!r}",
        f"eps_b = {cc.eps_b!r}",
        f"eps0 = {cc.eps0!r}",
        f"k0 = {cc.k0}",
        f"L0 = {cc.L0!r}",
        f"C0_bound = {cc.C0_bound!r}",
        "",
        "[provenance]",
    ]
    lines += [f"{k} = {v}" for k, v in cc.provenance().items()]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def cmd_suite(args):
    results = acceptance.run_suite(args.name, seed=args.seed, jobs=args.jobs)
    rows = [[r.name, int(r.passed), r.margin, r.detail] for r in results]
    write_csv(_out(args, "suite.csv"), ["criterion", "pass", "margin", "detail"], rows)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="neckscope",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--jobs", type=int,
                    default=int(os.environ.get("NECKSCOPE_JOBS", "1")))
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="curvature samples, distances, geodesics")
    _add_metric_args(p)
    p.add_argument("action", choices=["curvature", "distance", "shoot"])
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--p-t", type=float, default=1.0)
    p.add_argument("--q-t", type=float, default=2.0)
    p.add_argument("--q-angle", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("volume", help="ball/annulus volumes and comparisons")
    _add_metric_args(p)
    p.add_argument("action", choices=["ball", "annulus", "bishop-gromov", "relvol"])
    p.add_argument("--r1", type=float, default=1.0)
    p.add_argument("--r2", type=float, default=2.0)
    p.add_argument("--q-t", type=float, default=0.0)
    p.add_argument("--L-b", type=float, default=16.0)
    p.add_argument("--mc-samples", type=int, default=100000)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("neck", help="neck certification and conversion")
    _add_metric_args(p)
    p.add_argument("action", choices=["normalize", "certify", "absolute",
                                      "convert", "epsilon-prime"])
    p.add_argument("--window", type=float, nargs=2, default=(10.0, 90.0))
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--L", type=float, default=16.0)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_neck)

    p = sub.add_parser("ascr", help="curvature-ratio profile and volume ratio")
    _add_metric_args(p, t_max=4000.0)
    p.add_argument("action", choices=["profile", "avr"])
    p.add_argument("--r1", type=float, default=30.0)
    p.add_argument("--r2", type=float, default=3800.0)
    p.add_argument("--samples", type=int, default=60)
    p.add_argument("--truncated", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ascr)

    p = sub.add_parser("busemann", help="theta profile and Busemann bounds")
    _add_metric_args(p, t_max=2000.0)
    p.add_argument("action", choices=["theta", "bounds", "containment"])
    p.add_argument("--q-t", type=float, default=5.0)
    p.add_argument("--r1", type=float, default=10.0)
    p.add_argument("--r2", type=float, default=1000.0)
    p.add_argument("--rho", type=float, default=5.0)
    p.add_argument("--eta2", type=float, default=0.1)
    p.add_argument("--rays", type=int, default=128)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_busemann)

    p = sub.add_parser("gb", help="parallel surfaces and area bounds")
    _add_metric_args(p, t_max=200.0)
    p.add_argument("action", choices=["surface", "weingarten", "area-sweep"])
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--r2", type=float, default=40.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--eta2", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--no-window", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gb)

    p = sub.add_parser("pinch", help="eigenvalue pinching algebra and sweeps")
    p.add_argument("action", choices=["sample", "dichotomy", "point", "trajectory"])
    p.add_argument("--count", "--n", dest="count", type=int, default=10 ** 6)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--time-start", type=float, default=-10.0)
    p.add_argument("--time-end", type=float, default=-1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_pinch, eps_default=True)

    p = sub.add_parser("flow", help="rotationally symmetric flow runs")
    p.add_argument("--profile", default="round",
                   choices=["round", "dumbbell", "cylinder", "flare"])
    p.add_argument("--config", default=None)
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--cfl", type=float, default=0.25)
    p.add_argument("--A", type=float, default=0.8)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--stop-rmax", type=float, default=1e4)
    p.add_argument("--max-steps", type=int, default=2_000_000)
    p.add_argument("--wall-clock", type=float, default=None)
    p.add_argument("--snapshot-every", type=int, default=2000)
    p.add_argument("--track-neck", action="store_true")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--L", type=float, default=10.0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("chain", help="constant chain for a requested bound")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--C0", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("suite", help="acceptance battery")
    p.add_argument("name", choices=["quick", "full"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_suite)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other exits
        return 2 if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except NeckscopeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
