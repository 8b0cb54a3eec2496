"""Acceptance battery: one callable per criterion, each returning pass/fail
with a numeric margin.  ``run_suite("quick")`` covers the closed-form and
algebraic criteria; ``run_suite("full")`` adds the Monte Carlo and flow runs.

Criterion 11's final-window clause is implemented exactly as stated (short
dumbbell data run to curvature 1e4); the cylinder-convergence rate of generic
pinches is logarithmic in curvature, so that clause is expected to fail and
the result records the measured (eps, L) pair; see the repository notes for
the analysis.  The monotone-improvement clause is checked independently.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import (
    ascr_profile,
    avr,
    bishop_gromov_check,
    relative_volume_report,
)
from .chain import ChainConfig, ascr_lower_bound, constants_for, delta_of_Lb
from .flow import (
    init_dumbbell,
    init_round_sphere,
    run_flow,
    track_neck,
)
from .hypersurfaces import (
    area_lower_bound_check,
    gauss_bonnet_integrand,
    parallel_surface,
    q_bound_check,
)
from .necks import certify_absolute_neck, certify_neck, epsilon_prime
from .pinching import (
    EigenTriple,
    dichotomy_sweep,
    lemma_c_check,
    lemma_c_sweep,
    necklike_delta,
    p_quantity,
)
from .warped import (
    Point,
    cylinder_spec,
    flare_spec,
    flat_spec,
    make_metric,
    sampled_spec,
    scale_metric,
    sphere_spec,
)

__all__ = ["CriterionResult", "run_suite", "CRITERIA", "QUICK", "FULL"]


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    margin: float
    detail: str
    seconds: float = 0.0


def _result(name, passed, margin, detail, t0):
    return CriterionResult(name, bool(passed), float(margin), detail,
                           time.time() - t0)


# -- 1: neck exactness on the cylinder ---------------------------------------

def criterion_neck_exactness(seed=0):
    t0 = time.time()
    worst = 0.0
    m = make_metric(cylinder_spec(2.0, t_min=-40, t_max=40))
    for (a, b) in ((-30, 30), (-5, 12), (0.5, 31.5)):
        for k in range(1, 7):
            worst = max(worst, certify_neck(m, a, b, k).eps)
    # Exact scale invariance under a power-of-two factor.
    base = make_metric(flare_spec(0.2, t_max=100))
    c1 = certify_neck(base, 10, 60, 3)
    c2 = certify_neck(scale_metric(base, 4.0), 40, 240, 3)
    invariant = c1.eps_logr_by_order == c2.eps_logr_by_order
    ok = worst <= 1e-12 and invariant
    return _result("1 neck exactness", ok, 1e-12 - worst,
                   f"cylinder eps={worst:.2e}; scale-invariance exact={invariant}", t0)


# -- 2: sliding-to-fixed conversion soundness ---------------------------------

def _conversion_cases():
    cases = []
    cyl = make_metric(cylinder_spec(1.0, t_min=-80, t_max=80))
    for L in (2, 4, 6, 8, 12, 16, 24, 32, 48, 64):
        cases.append((cyl, -L, L))
    for sigma in (0.001, 0.002, 0.005, 0.01, 0.02, 0.05):
        m = make_metric(flare_spec(sigma, t_max=4000))
        for (a, b) in ((30, 90), (35, 200), (40, 400), (50, 1500), (100, 3900)):
            cases.append((m, a, b))
    # Oscillating sampled warps near the conversion threshold.
    z = np.linspace(0, 260, 4000)
    for amp in (1e-4, 5e-4, 2e-3):
        for freq in (1.0, 0.5):
            logr = amp * np.sin(freq * z)
            r = np.exp(logr)
            t = np.concatenate([[0.0], np.cumsum(0.5 * (r[1:] + r[:-1]) * np.diff(z))])
            m = make_metric(sampled_spec(t + 1.0, r))
            for lo, hi in ((40, -40), (40, 2000), (1500, -40)):
                cases.append((m, float(t[lo] + 1.0), float(t[hi] + 1.0)))
    return cases


def criterion_conversion(seed=0):
    t0 = time.time()
    eps_targets = (0.5, 0.2, 0.1, 0.05)
    total = applicable = failures = 0
    worst_margin = math.inf
    for m, a, b in _conversion_cases():
        for k in (1, 2, 3):
            cert = certify_neck(m, a, b, k)
            abs_cert = certify_absolute_neck(m, a, b, k)
            for eps in eps_targets:
                total += 1
                ep = epsilon_prime(eps, k, cert.L, n=m.n)
                if cert.eps <= ep:
                    applicable += 1
                    margin = eps - abs_cert.eps_abs
                    worst_margin = min(worst_margin, margin)
                    if margin < 0:
                        failures += 1
    ok = failures == 0 and total >= 500 and applicable > 0
    return _result("2 conversion soundness", ok, worst_margin,
                   f"{total} cases, {applicable} applicable, {failures} failures",
                   t0)


# -- 3: curvature-ratio closed forms ------------------------------------------

def criterion_ascr(seed=0):
    t0 = time.time()
    worst = 0.0
    details = []
    for sigma in (0.1, 0.3, 0.5):
        target = 2.0 * (1.0 - sigma ** 2) / sigma ** 2
        m = make_metric(flare_spec(sigma, t_max=4000))
        prof = ascr_profile(m, np.geomspace(30, 3800, 60))
        rel = abs(prof.ascr_estimate - target) / target
        worst = max(worst, rel)
        details.append(f"sigma={sigma}: {prof.ascr_estimate:.4g} vs {target:.4g}")
    return _result("3 ascr closed form", worst <= 0.05, 0.05 - worst,
                   "; ".join(details) + f"; worst rel {worst:.2%}", t0)


# -- 4: volume-ratio closed forms ---------------------------------------------

def criterion_avr(seed=0):
    t0 = time.time()
    flat_val = avr(make_metric(flat_spec(t_max=5000)))
    e1 = abs(flat_val - 4 * math.pi / 3)
    cyl_val = abs(avr(make_metric(cylinder_spec(1.0, t_min=-2500, t_max=2500))))
    m = make_metric(flare_spec(0.3, t_max=5000))
    target = 4 * math.pi * 0.09 / 3
    e3 = abs(avr(m) - target) / target
    ok = e1 <= 1e-6 and cyl_val <= 1e-3 and e3 <= 0.02
    return _result("4 avr closed forms", ok, min(1e-6 - e1, 0.02 - e3),
                   f"flat err {e1:.2e}; cyl {cyl_val:.2e}; flare rel {e3:.2%}", t0)


# -- 5: annulus ratio monotonicity --------------------------------------------

def criterion_bishop_gromov(seed=0, samples=100_000):
    t0 = time.time()
    reports = []
    pole = Point(0.0, (1.0, 0.0, 0.0))
    for name, m, pairs in (
        ("flat", make_metric(flat_spec(t_max=100)),
         [(1, 3), (2, 5), (4, 9), (8, 18)]),
        ("sphere", make_metric(sphere_spec(1.0)),
         [(0.2, 0.5), (0.4, 0.9), (0.8, 1.6), (1.2, 2.4)]),
        ("flare03", make_metric(flare_spec(0.3, t_max=200)),
         [(1, 3), (2, 6), (5, 14), (12, 30)]),
        ("flare01", make_metric(flare_spec(0.1, t_max=200)),
         [(1, 3), (2, 6), (5, 14), (12, 30)]),
    ):
        reports.append((name, bishop_gromov_check(m, pole, pairs)))
    m_off = make_metric(flare_spec(0.3, t_max=160))
    Q = Point(5.0, (1.0, 0.0, 0.0))
    reports.append(("flare03-offpole",
                    bishop_gromov_check(m_off, Q,
                                        [(2, 6), (5, 12), (10, 24), (20, 48)],
                                        samples=samples, seed=seed)))
    bad = [n for n, r in reports if not r.monotone_within_3se]
    detail = "; ".join(f"{n}: " + ",".join(f"{x:.3f}" for x in r.ratios)
                       for n, r in reports)
    return _result("5 bishop-gromov", not bad, 0.0 if bad else 1.0,
                   detail + (f"; FAILED {bad}" if bad else ""), t0)


# -- 6: relative volume behind a long neck ------------------------------------

def neck_metric_for_relvol(sigma=0.005, lam=0.01, t_max_base=90_000.0):
    """Flare scaled so the far cone is clean and the unit slice is exact."""
    base = make_metric(flare_spec(sigma, t_max=t_max_base))
    m = scale_metric(base, lam)
    # Solve phi(t_c) = 1 in the scaled metric (phi' = sigma there).
    from scipy.optimize import brentq
    t_c = brentq(lambda t: float(m.phi(t)) - 1.0, 1e-3, m.t_max * 0.9, xtol=1e-14)
    lam2 = 1.0 / float(m.phi(t_c))
    if abs(lam2 - 1.0) > 1e-12:
        m = scale_metric(m, lam2)
    return m


def criterion_relative_volume(seed=0, samples=200_000):
    t0 = time.time()
    m = neck_metric_for_relvol()
    # Q on the ball-side boundary slice of the L_b window about the unit slice.
    from scipy.integrate import cumulative_simpson
    from scipy.optimize import brentq
    t_c = brentq(lambda t: float(m.phi(t)) - 1.0, 1e-3, m.t_max * 0.9, xtol=1e-14)
    ts = np.linspace(1e-6, t_c, 40000)
    z = cumulative_simpson(1.0 / np.asarray(m.phi(ts), dtype=float), x=ts, initial=0.0)
    t_q = float(np.interp(z[-1] - 16.0, z, ts))
    rep = relative_volume_report(m, Point(t_q, (1.0, 0.0, 0.0)), None, None, 16.0,
                                 samples=samples, seed=seed)
    ok = rep.passed and rep.w0_ok and rep.sublemma_ok
    detail = (f"ratio {rep.ratio:.3e}+-{rep.ratio_error:.1e} vs delta {rep.delta:.4f}; "
              f"w0 {rep.w0:.2f} (>= {0.9 * rep.L_b:.1f}); sublemma max "
              f"{rep.sublemma_max_dist:.2f} <= 6")
    return _result("6 relative volume", ok, rep.delta - rep.ratio, detail, t0)


# -- 7: Gauss-Bonnet totality and area bounds ---------------------------------

def criterion_gauss_bonnet(seed=0):
    t0 = time.time()
    worst_defect = 0.0
    for n in (3, 5):
        presets = [make_metric(flat_spec(n=n, t_max=300)),
                   make_metric(flare_spec(0.3, n=n, t_max=300)),
                   make_metric(flare_spec(0.1, n=n, t_max=300))]
        for m in presets:
            for r in (0.0, 1.0, 5.0):
                for rho in (0.5, 2.0, 10.0):
                    surf = parallel_surface(m, r, rho, enforce_window=False)
                    rep = gauss_bonnet_integrand(m, surf)
                    worst_defect = max(worst_defect, rep.relative_defect)
    # Flat-ambient remainder vanishes identically.
    mf = make_metric(flat_spec(t_max=300))
    q_flat = max(abs(gauss_bonnet_integrand(mf, parallel_surface(mf, r, rho)).Q)
                 for r in (0.0, 2.0) for rho in (1.0, 7.0))
    # Area bound sweep with the module constants.
    bad = 0
    worst_margin = math.inf
    for n in (3, 5):
        for sigma in (0.3, 0.1):
            m = make_metric(flare_spec(sigma, n=n, t_max=3000))
            prof = ascr_profile(m, np.geomspace(0.5, 2900, 80))
            for r in np.linspace(1.0, 40.0, 12):
                rho = min(prof.rho_at(r - 0.5), (m.t_max - r) * 0.5)
                arep = area_lower_bound_check(m, r, rho, 0.5, prof.a_at)
                qrep = q_bound_check(m, r, rho, 0.5, prof.a_at)
                worst_margin = min(worst_margin, arep.area_margin)
                if not (arep.passed and qrep.passed):
                    bad += 1
    ok = worst_defect <= 1e-10 and q_flat == 0.0 and bad == 0
    return _result("7 gauss-bonnet", ok, 1e-10 - worst_defect,
                   f"totality defect {worst_defect:.2e}; flat Q {q_flat}; "
                   f"sweep failures {bad}", t0)


# -- 8: pinching inequality sweep ---------------------------------------------

def criterion_pinching(seed=0):
    t0 = time.time()
    tested, bad, worst = lemma_c_sweep(10 ** 6, seed=seed)
    hand_ok = (p_quantity(EigenTriple(1, 1, 1)) == 0.0
               and p_quantity(EigenTriple(1, 0, 0)) == 0.0
               and p_quantity(EigenTriple(1, 1, 0)) == 2.0
               and abs(necklike_delta(EigenTriple(1, 1, 1)) - math.sqrt(2)) < 1e-15
               and necklike_delta(EigenTriple(1, 0, 0)) == 0.0
               and necklike_delta(EigenTriple(1, 1, 0)) == 1.0
               and lemma_c_check(EigenTriple(1, 1, 0), 1 - 1e-12).passed)
    ok = bad == 0 and hand_ok and tested >= 900_000
    return _result("8 pinching sweep", ok, worst - 1.0,
                   f"{tested} triples, {bad} violations, worst ratio {worst:.2f}; "
                   f"hand cases {'ok' if hand_ok else 'FAILED'}", t0)


# -- 9: dichotomy bounds --------------------------------------------------------

def criterion_dichotomy(seed=0):
    t0 = time.time()
    cl, viol, by = dichotomy_sweep(25_000, seed=seed)
    ok = viol == 0 and cl >= 10 ** 4
    return _result("9 dichotomy bounds", ok, float(cl - viol),
                   f"{cl} classified ({by}), {viol} violations", t0)


# -- 10: flow exactness and convergence ----------------------------------------

def _round_a2_error(grid, t_end=0.05, cfl=0.25):
    st = init_round_sphere(1.0, grid=grid)
    target_R = 6.0 / (1.0 - 4.0 * t_end)
    dt0 = cfl * (math.pi / (grid - 1)) ** 2
    cadence = max(1, int(t_end / dt0 / 20))
    hist = run_flow(st, stop_rmax=target_R, cfl=cfl, snapshot_every=cadence,
                    max_steps=5_000_000)
    worst = 0.0
    for snap in hist.snapshots:
        if snap.t <= t_end:
            i = int(np.argmin(np.abs(snap.s - math.pi / 2)))
            a2 = (float(snap.phi[i]) / math.sin(float(snap.s[i]))) ** 2
            worst = max(worst, abs(a2 - (1 - 4 * snap.t)) / (1 - 4 * snap.t))
    return worst


def criterion_flow_exactness(seed=0):
    t0 = time.time()
    err_1024 = _round_a2_error(1024, t_end=0.1)
    errs = {g: _round_a2_error(g, t_end=0.05) for g in (128, 256)}
    order = math.log2(errs[128] / max(errs[256], 1e-300))
    ok = err_1024 <= 1e-6 and order >= 3.0
    return _result("10 flow exactness", ok, 1e-6 - err_1024,
                   f"a^2 rel err {err_1024:.2e} at grid 1024 over 40% lifespan; "
                   f"order {order:.2f} from grids 128/256 "
                   f"(errs {errs[128]:.2e}/{errs[256]:.2e})", t0)


# -- 11: neckpinch signature -----------------------------------------------------

def criterion_neckpinch(seed=0, grid=1024):
    t0 = time.time()
    st = init_dumbbell(0.8, grid=grid)
    hist = run_flow(st, stop_rmax=1e4, cfl=0.25, snapshot_every=100,
                    max_steps=5_000_000, diag_every=50)
    pts = track_neck(hist, k=1, L_target=10.0, eps_target=0.1, max_snapshots=150)
    final = pts[-1]
    # Monotone improvement over the final decade of curvature growth, with a
    # 1% allowance for certification jitter on the measured trajectory.
    decade = [p for p in pts if p.R_max >= final.R_max / 10.0 and p.eps_at_L is not None]
    mono = all(b.eps_at_L <= a.eps_at_L * 1.01 + 1e-9
               for a, b in zip(decade, decade[1:])) and len(decade) >= 3
    final_ok = (final.eps_at_L is not None and final.eps_at_L <= 0.1
                and final.L_at_eps is not None and final.L_at_eps >= 10.0)
    ok = mono and final_ok
    eps_txt = "none" if final.eps_at_L is None else f"{final.eps_at_L:.3f}"
    L_txt = "none" if final.L_at_eps is None else f"{final.L_at_eps:.2f}"
    detail = (f"R_max {final.R_max:.3g}; final eps@L=10 {eps_txt} (need <=0.1), "
              f"L@eps=0.1 {L_txt} (need >=10); eps nonincreasing over last "
              f"decade: {mono}")
    return _result("11 neckpinch signature", ok,
                   (0.1 - final.eps_at_L) if final.eps_at_L is not None else -1.0,
                   detail, t0)


# -- 12: theorem soundness --------------------------------------------------------

def criterion_theorem_soundness(seed=0):
    t0 = time.time()
    cfg = ChainConfig()
    # Round trip and monotonicity.
    roundtrip_ok = True
    prev_L = 0.0
    mono_L = True
    for C0 in (1.0, 10.0, 100.0, 1000.0):
        for n in (3, 5):
            cc = constants_for(n, C0, cfg)
            if ascr_lower_bound(n, cc.L0, cfg.c(n), cfg.eta1) < C0:
                roundtrip_ok = False
            if n == 3:
                if cc.L0 < prev_L:
                    mono_L = False
                prev_L = cc.L0
    Ls = np.linspace(16, 4000, 200)
    deltas = [delta_of_Lb(3, L) for L in Ls]
    bounds = [ascr_lower_bound(3, L, 1.0, 0.5) for L in Ls]
    mono_delta = all(b < a for a, b in zip(deltas, deltas[1:]))
    mono_bound = all(b >= a - 1e-12 for a, b in zip(bounds, bounds[1:]))

    # Measured-ratio soundness: a certified neck meeting the thresholds
    # forces the measured curvature ratio above the chain bound.
    sound_ok = True
    details = []
    for C0 in (0.05, 1.0, 10.0):
        cc = constants_for(3, C0, cfg)
        sigma = cc.eps0 / 2.0
        t_hi = 50.0 + 2.4 * cc.L0
        m = make_metric(flare_spec(sigma, t_max=t_hi * 1.3))
        cert = certify_neck(m, 50.0, t_hi, cc.k0)
        meets = cert.passes(cc.eps0, cc.k0, cc.L0)
        prof = ascr_profile(m, np.geomspace(30.0, t_hi * 1.25, 50))
        measured = float(prof.a2[-1])  # lower bound for the limit
        if not meets or measured < cc.C0_bound:
            sound_ok = False
        details.append(f"C0={C0:g}: bound {cc.C0_bound:.3g} vs measured>= {measured:.3g}")
    ok = roundtrip_ok and mono_L and mono_delta and mono_bound and sound_ok
    return _result("12 theorem soundness", ok, 1.0 if ok else 0.0,
                   f"roundtrip {roundtrip_ok}; mono delta {mono_delta}, bound "
                   f"{mono_bound}; " + "; ".join(details), t0)


CRITERIA = {
    1: criterion_neck_exactness,
    2: criterion_conversion,
    3: criterion_ascr,
    4: criterion_avr,
    5: criterion_bishop_gromov,
    6: criterion_relative_volume,
    7: criterion_gauss_bonnet,
    8: criterion_pinching,
    9: criterion_dichotomy,
    10: criterion_flow_exactness,
    11: criterion_neckpinch,
    12: criterion_theorem_soundness,
}

QUICK = (1, 3, 4, 7, 8, 9, 12)
FULL = tuple(range(1, 13))


def run_suite(name: str = "quick", seed: int = 0, jobs: int = 1):
    ids = QUICK if name == "quick" else FULL
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(CRITERIA[i], seed) for i in ids]
            return [f.result() for f in futures]
    return [CRITERIA[i](seed) for i in ids]
