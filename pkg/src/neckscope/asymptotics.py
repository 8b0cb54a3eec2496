"""Asymptotic invariants and volume comparison.

Covers the curvature-ratio profile a(r), kappa(r), rho(r) and the extrapolated
limit of R * d^2 at infinity; the asymptotic volume ratio; the angular gap
theta(r) between long minimal segments and rays; two-sided Busemann function
estimates; Bishop-Gromov annulus ratio monotonicity; and the small relative
volume produced by a long neck, with the geodesic crossing diagnostic w0.

Pole-centered quantities use the exact identity d(pole, (t, theta)) = t; all
off-center distance work goes through :class:`neckscope.warped.DistanceField`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    InvalidInput,
    OutOfDomain,
    PreconditionNeck,
    RequiresNoncompact,
)
from .necks import certify_neck, epsilon_prime, normalize_parametrization
from .warped import (
    DistanceField,
    Point,
    WarpedMetric,
    annulus_parameter_volume,
    annulus_volume_mc,
    ball_volume,
    curvature_arrays,
    distance,
    unit_sphere_volume,
)

__all__ = [
    "ASCRProfile",
    "BusemannContext",
    "BusemannReport",
    "RelVolReport",
    "BishopGromovReport",
    "ascr_profile",
    "avr",
    "theta_profile",
    "busemann_estimate",
    "busemann_containment_check",
    "bishop_gromov_check",
    "relative_volume_report",
]


# ---------------------------------------------------------------------------
# Curvature-ratio profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ASCRProfile:
    r: np.ndarray
    a2: np.ndarray            # a(r)^2 = sup_{t >= r} R(t) t^2
    kappa: np.ndarray         # sup_{t >= r} R(t)
    rho: np.ndarray           # pi r / (4 a(r))
    pointwise: np.ndarray     # R(r) r^2 on the grid (divergence diagnostic)
    ascr_estimate: float      # nan when diverging
    diverging: bool
    fit_coeffs: tuple         # (A, B) of the a^2 = A + B/r fit

    def a_at(self, r: float) -> float:
        return math.sqrt(float(np.interp(r, self.r, self.a2)))

    def rho_at(self, r: float) -> float:
        return math.pi * r / (4.0 * self.a_at(r))


def ascr_profile(m: WarpedMetric, r_grid: Sequence[float],
                 truncated: bool = False, n_fine: int = 20000) -> ASCRProfile:
    """Profile of the scalar-curvature ratio seen from the pole.

    a(r)^2 is the sup of R(x) d(x, O)^2 over the complement of the r-ball
    about the origin O (the t_min pole when present; otherwise a point on the
    t_min slice, with the radial parameter as distance proxy -- exact up to
    the slice diameter, which the asymptotic quantities ignore).  The limit
    is estimated by fitting a^2 = A + B/r over the top decade of the grid;
    the profile is flagged diverging when the pointwise ratio R(r) r^2 grows
    by more than 10x between the first and last decade of the grid.
    """
    if m.spec.pole_max and not truncated:
        raise RequiresNoncompact(
            "metric is compact; pass truncated=True to treat it as a truncated end")
    r_grid = np.asarray(sorted(r_grid), dtype=float)
    if r_grid[0] <= m.t_min or r_grid[-1] >= m.t_max:
        raise OutOfDomain("r grid must lie strictly inside the domain")
    ts = np.linspace(r_grid[0], m.t_max * (1.0 - 1e-9), n_fine)
    _, _, R = curvature_arrays(m, ts)
    d = ts - m.t_min
    q_fine = R * d * d
    # Suffix superlative over t >= r.
    suffix_a2 = np.maximum.accumulate(q_fine[::-1])[::-1]
    suffix_k = np.maximum.accumulate(R[::-1])[::-1]
    idx = np.searchsorted(ts, r_grid, side="left").clip(0, n_fine - 1)
    a2 = suffix_a2[idx]
    kappa = suffix_k[idx]
    _, _, R_on_grid = curvature_arrays(m, r_grid)
    pointwise = R_on_grid * (r_grid - m.t_min) ** 2
    rho = np.where(a2 > 0, math.pi * r_grid / (4.0 * np.sqrt(np.maximum(a2, 1e-300))), np.inf)

    first_decade = pointwise[r_grid <= r_grid[0] * 10.0]
    last_decade = pointwise[r_grid >= r_grid[-1] / 10.0]
    q_first = float(np.max(first_decade)) if first_decade.size else 0.0
    q_last = float(np.max(last_decade)) if last_decade.size else 0.0
    diverging = q_last > 10.0 * q_first and q_last > 1e-12

    top = r_grid >= r_grid[-1] / 10.0
    x = 1.0 / r_grid[top]
    y = a2[top]
    B, A = np.polyfit(x, y, 1)
    if diverging:
        estimate = float("nan")
    else:
        estimate = max(float(A), 0.0)
    return ASCRProfile(r_grid, a2, kappa, rho, pointwise, estimate, diverging,
                       (float(A), float(B)))


def avr(m: WarpedMetric, r: Optional[float] = None) -> float:
    """Richardson-extrapolated asymptotic volume ratio lim Vol[B(O, r)]/r^n.

    Pole-anchored metrics use exact ball volumes; metrics without a pole fall
    back to the parameter-slab upper bound, which has the same (zero) limit
    for tube-like ends.
    """
    n = m.n
    if r is None:
        r = (m.t_max - m.t_min) * 0.98
    if m.spec.pole_min:
        f = lambda s: ball_volume(m, s) / s ** n
    else:
        # B(O, s) lies in the slab |t - t_O| <= s.
        t_o = 0.5 * (m.t_min + m.t_max)

        def f(s):
            lo = max(m.t_min, t_o - s)
            hi = min(m.t_max, t_o + s)
            return annulus_parameter_volume(m, lo, hi) / s ** n

    f1, f2 = f(r), f(r / 2.0)
    return 2.0 * f1 - f2


# ---------------------------------------------------------------------------
# Rays, theta(r), Busemann bounds
# ---------------------------------------------------------------------------

class BusemannContext:
    """Shared ray/segment machinery for one base point Q.

    Directions at Q are sampled through the geodesic fan of a
    :class:`DistanceField`; a direction is treated as a ray when its geodesic
    stays minimal out to (almost) the truncation length.
    """

    def __init__(self, m: WarpedMetric, Q: Point, s_max: Optional[float] = None,
                 ray_fraction: float = 0.95, field: Optional[DistanceField] = None,
                 **field_kw):
        m.require_interior(Q.t)
        self.m = m
        self.Q = Q
        if s_max is None:
            s_max = 0.98 * (m.t_max - Q.t) + (Q.t - m.t_min)
        self.s_max = s_max
        self.field = field or DistanceField(m, Q.t, s_max=s_max, **field_kw)
        self.min_lengths = self.field.minimal_lengths()
        self.betas = self.field.rays_beta
        self.ray_mask = self.min_lengths >= ray_fraction * s_max
        self.excluded_fraction = self.field.excluded_rays / max(len(self.betas), 1)

    def theta(self, r: float, n_segments: int = 64, n_rays: int = 128) -> float:
        """Worst angle gap at Q between length >= r minimal segments and rays."""
        stride_seg = max(1, len(self.betas) // n_segments)
        stride_ray = max(1, len(self.betas) // n_rays)
        seg_idx = np.arange(0, len(self.betas), stride_seg)
        ray_idx = np.arange(0, len(self.betas), stride_ray)
        seg_idx = seg_idx[self.min_lengths[seg_idx] >= r]
        ray_idx = ray_idx[self.ray_mask[ray_idx]]
        if seg_idx.size == 0:
            return 0.0
        if ray_idx.size == 0:
            return math.pi
        gaps = np.abs(self.betas[seg_idx][:, None] - self.betas[ray_idx][None, :])
        return float(np.max(np.min(gaps, axis=1)))

    def theta_profile(self, r_grid: Sequence[float], n_segments: int = 64,
                      n_rays: int = 128, refine_tol: float = 0.05):
        """theta(r) samples with a grid-refinement error estimate."""
        if n_rays < 32:
            raise InvalidInput("need at least 32 ray samples")
        coarse = np.array([self.theta(r, n_segments, n_rays) for r in r_grid])
        fine = np.array([self.theta(r, 2 * n_segments, 2 * n_rays) for r in r_grid])
        err = float(np.max(np.abs(fine - coarse)))
        scale = float(np.max(fine)) if np.max(fine) > 0 else 1.0
        refined = err <= refine_tol * scale
        return fine, err, refined

    def ray_endpoints(self, count: int = 8):
        """(arclength, Point) for a spread of sampled rays near truncation."""
        idx = np.nonzero(self.ray_mask)[0]
        if idx.size == 0:
            return []
        picks = idx[np.linspace(0, idx.size - 1, min(count, idx.size)).astype(int)]
        s_grid, t_path, a_path = self.field.ray_paths
        out = []
        theta_Q = self.Q.theta_vec
        # Build an orthonormal partner for the rotation plane.
        partner = np.zeros_like(theta_Q)
        partner[int(np.argmin(np.abs(theta_Q)))] = 1.0
        partner = partner - np.dot(partner, theta_Q) * theta_Q
        partner /= np.linalg.norm(partner)
        for j in picks:
            ok = np.isfinite(t_path[:, j])
            s_end = s_grid[ok][-1]
            t_end = t_path[ok, j][-1]
            al = a_path[ok, j][-1]
            theta_end = math.cos(al) * theta_Q + math.sin(al) * partner
            theta_end /= np.linalg.norm(theta_end)
            out.append((float(s_end), Point(float(t_end), tuple(theta_end))))
        return out

    def busemann_bounds(self, x: Point, theta_value: Optional[float] = None,
                        n_rays: int = 8):
        """(lower, upper) for the base-point Busemann function at x.

        upper = d(x, Q); lower combines the angular-gap bound
        (1 - theta) * d with the best ray-based value T - d(ray(T), x).
        """
        d = distance(self.m, self.Q, x)
        if theta_value is None:
            theta_value = self.theta(d)
        lower = (1.0 - theta_value) * d
        for s_end, endpoint in self.ray_endpoints(n_rays):
            b_gamma = s_end - distance(self.m, endpoint, x)
            lower = max(lower, b_gamma)
        return min(lower, d), d


@dataclass(frozen=True)
class BusemannReport:
    Q: Point
    r: np.ndarray
    theta: np.ndarray
    theta_error: float
    eta2: float
    bounds: tuple  # tuples (x, lower, upper)


def theta_profile(m: WarpedMetric, Q: Point, r_grid: Sequence[float],
                  ray_samples: int = 128, context: Optional[BusemannContext] = None):
    """theta(r) on a grid; thin wrapper over :class:`BusemannContext`."""
    if Q.t <= m.t_min + 1e-12 and m.spec.pole_min:
        # Every direction from the pole is a radial ray.
        return np.zeros(len(r_grid)), 0.0, True
    ctx = context or BusemannContext(m, Q)
    return ctx.theta_profile(r_grid, n_rays=ray_samples)


def busemann_estimate(m: WarpedMetric, Q: Point, x: Point,
                      context: Optional[BusemannContext] = None):
    """Two-sided estimate (lower, upper) of the Busemann function at x."""
    if Q.t <= m.t_min + 1e-12 and m.spec.pole_min:
        d = x.t - m.t_min
        return d, d
    ctx = context or BusemannContext(m, Q)
    return ctx.busemann_bounds(x)


# ---------------------------------------------------------------------------
# Busemann sublevel containments with a perturbed function
# ---------------------------------------------------------------------------

def _default_perturbation(eta2: float, seed: int = 0, amplitude: float = 0.9):
    rng = np.random.default_rng(seed)
    c = rng.uniform(0, 2 * math.pi, 3)
    amp = amplitude * eta2 / 2.0

    def p(t, gamma):
        return amp * (np.cos(0.35 * t + c[0]) + np.sin(gamma + c[1]) * np.cos(0.2 * t + c[2])) / 1.0

    return p


@dataclass(frozen=True)
class ContainmentReport:
    clause: str
    passed: bool
    margin: float
    n_points: int


def busemann_containment_check(m: WarpedMetric, Q: Point, r: float, rho: float,
                               eta2: float, perturbation: Optional[Callable] = None,
                               n_dirs: int = 96, seed: int = 0):
    """Check the four sublevel/level containments for a perturbed Busemann proxy.

    The proxy is b_hat = b_Q + p with sup |p| < eta2.  Exactness is available
    for a pole base point, where b_Q = d(Q, .) = t - t_min; the four clauses
    are then checked on sampled level sets and parallel sets.  Flat space is
    the intended oracle (Euclidean geometry in the meridian half-plane).
    """
    if not (m.spec.pole_min and Q.t <= m.t_min + 1e-12):
        raise InvalidInput("containment check is implemented for a pole base point")
    if not (0 < eta2 <= 1):
        raise InvalidInput("eta2 must lie in (0, 1]")
    if perturbation is None:
        perturbation = _default_perturbation(eta2, seed)
    t0 = m.t_min

    def b_exact(t, gamma):
        return t - t0

    def b_hat(t, gamma):
        val = b_exact(t, gamma) + perturbation(t, gamma)
        return val

    gammas = np.linspace(0.0, math.pi, n_dirs)
    reports = []

    # Sample the level set S_hat_r: solve b_hat(t, gamma) = r along each ray.
    from scipy.optimize import brentq
    t_level = []
    for g in gammas:
        f = lambda t: b_hat(t, g) - r
        lo, hi = t0 + max(r - 2 * eta2, 0.0), min(t0 + r + 2 * eta2, m.t_max)
        if f(lo) > 0 or f(hi) < 0:
            lo, hi = t0, m.t_max
        t_level.append(brentq(f, lo, hi, xtol=1e-12))
    t_level = np.asarray(t_level)

    # (i) S_hat_r inside the b_Q-band and outside the closed (r - eta2)-ball.
    band_lo = t_level - t0 - (r - eta2)
    band_hi = (r + eta2) - (t_level - t0)
    margin_i = float(min(band_lo.min(), band_hi.min()))
    reports.append(ContainmentReport("level_set_band", margin_i > 0, margin_i, n_dirs))
    margin_ib = float(np.min(t_level - t0 - (r - eta2)))
    reports.append(ContainmentReport("level_set_outside_ball", margin_ib > 0,
                                     margin_ib, n_dirs))

    # (ii) Ball and sublevel sandwich.
    rng = np.random.default_rng(seed + 1)
    ts = rng.uniform(t0, min(t0 + r + 3.0, m.t_max), 512)
    gs = rng.uniform(0, math.pi, 512)
    bq = b_exact(ts, gs)
    bh = b_hat(ts, gs)
    inside_ball = bq < r - eta2
    sandwich1 = np.all(bh[inside_ball] < r) if np.any(inside_ball) else True
    in_chat = bh < r
    sandwich2 = np.all(bq[in_chat] < r + eta2) if np.any(in_chat) else True
    m1 = float(np.min(r - bh[inside_ball])) if np.any(inside_ball) else math.inf
    m2 = float(np.min(r + eta2 - bq[in_chat])) if np.any(in_chat) else math.inf
    reports.append(ContainmentReport("sublevel_sandwich", bool(sandwich1 and sandwich2),
                                     min(m1, m2), 512))

    # (iii) Parallel set at distance rho stays outside B(Q, r + rho - eta2).
    # Meridian half-plane Euclidean geometry (flat oracle): boundary points
    # y(gamma) with outward normal of the level set.
    xy = np.stack([t_level * np.cos(gammas), t_level * np.sin(gammas)], axis=1)
    # Outward normals from neighboring boundary points.
    tang = np.gradient(xy, axis=0)
    normals = np.stack([tang[:, 1], -tang[:, 0]], axis=1)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    flip = np.sum(normals * xy, axis=1) < 0
    normals[flip] *= -1.0
    parallel = xy + rho * normals
    d_parallel = np.linalg.norm(parallel, axis=1)
    # Verify the parallel points really sit at distance ~rho from the set.
    dmat = np.linalg.norm(parallel[:, None, :] - xy[None, :, :], axis=2)
    dist_to_set = dmat.min(axis=1)
    geom_ok = np.max(np.abs(dist_to_set - rho)) < 0.05 * rho + 1e-9
    margin_iii = float(np.min(d_parallel - (r + rho - eta2)))
    reports.append(ContainmentReport("parallel_outside_ball",
                                     bool(geom_ok and margin_iii > 0),
                                     margin_iii, n_dirs))

    # (iv) If S_hat_r is inside B(Q, eta) then the parallel set is inside
    # B(Q, eta + rho).
    eta = float(np.max(t_level - t0)) + 1e-9
    margin_iv = float(np.min(eta + rho - d_parallel))
    reports.append(ContainmentReport("parallel_inside_grown_ball", margin_iv > 0,
                                     margin_iv, n_dirs))
    return reports


# ---------------------------------------------------------------------------
# Bishop-Gromov and the neck relative-volume estimate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BishopGromovReport:
    pairs: tuple                # ((lo, hi), ...)
    ratios: tuple               # annulus volume / Euclidean comparison
    errors: tuple               # MC standard errors (0 for exact)
    monotone_within_3se: bool


def _euclidean_annulus(n: int, lo: float, hi: float) -> float:
    return unit_sphere_volume(n) / n * (hi ** n - lo ** n)


def bishop_gromov_check(m: WarpedMetric, Q: Point, pairs: Sequence,
                        samples: int = 100_000, seed: int = 0,
                        field: Optional[DistanceField] = None) -> BishopGromovReport:
    """Nonincreasing annulus volume ratios along a nested radius ladder.

    ``pairs`` is a list of (lo, hi) with both coordinates nondecreasing along
    the list; the reported ratio compares each metric annulus about Q with
    its Euclidean counterpart.  Pole-centered annuli are exact; otherwise the
    shared distance field drives stratified Monte Carlo.
    """
    pairs = [tuple(map(float, p)) for p in pairs]
    for (l1, h1), (l2, h2) in zip(pairs, pairs[1:]):
        if l2 < l1 or h2 < h1:
            raise InvalidInput("radius pairs must be componentwise nondecreasing")
    n = m.n
    at_pole = m.spec.pole_min and Q.t <= m.t_min + 1e-12
    ratios, errors = [], []
    if not at_pole and field is None:
        s_need = max(h for _, h in pairs)
        field = DistanceField(m, Q.t, s_max=1.05 * s_need + 1.0)
    for i, (lo, hi) in enumerate(pairs):
        ref = _euclidean_annulus(n, lo, hi)
        if at_pole:
            vol = annulus_parameter_volume(m, m.t_min + lo, min(m.t_min + hi, m.t_max))
            err = 0.0
        else:
            est = annulus_volume_mc(m, Q, lo, hi, samples, seed=seed + i, field=field)
            vol, err = est.value, est.std_error
        ratios.append(vol / ref)
        errors.append(err / ref)
    ok = True
    for i in range(len(pairs) - 1):
        slack = (3.0 * math.hypot(errors[i], errors[i + 1])
                 + 1e-10 * (abs(ratios[i]) + abs(ratios[i + 1])))
        if ratios[i + 1] > ratios[i] + slack:
            ok = False
    return BishopGromovReport(tuple(pairs), tuple(ratios), tuple(errors), ok)


@dataclass(frozen=True)
class RelVolReport:
    Q: Point
    R1: float
    R2: float
    ratio: float
    ratio_error: float
    delta: float
    L_b: float
    passed: bool
    w0: float
    w0_ok: bool
    r0: float
    neck_eps: float
    eps_b: float
    hypothesis_met: bool      # cert eps <= eps_b (full proposition hypothesis)
    radius_band_ok: bool      # r(z)/r(0) within [9/10, 11/10] on the window
    sublemma_max_dist: float
    sublemma_ok: bool


def relative_volume_report(m: WarpedMetric, Q: Point, R1: Optional[float],
                           R2: Optional[float], L_b: float,
                           samples: int = 200_000, seed: int = 0,
                           delta_fn: Optional[Callable] = None) -> RelVolReport:
    """Small relative annulus volume behind a long unit-radius neck.

    Preconditions: the window of z-half-length L_b centered ahead of Q
    certifies as a neck, the center slice has mean radius 1, and the mean
    radius stays within [9/10, 11/10] across the window (the operative form
    of the absolute-closeness hypothesis).  Q must sit on the ball-side
    boundary slice.  The measured quantity is
    Vol[closed B(Q, R2) minus B(Q, R1)] / ((omega/n)(R2^n - R1^n)) for
    R2 >= R1 >= r0, compared against the delta(L_b) target; the w0 diagnostic
    is the first crossing parameter of the center slice along test geodesics.
    """
    if L_b < 16:
        from .errors import BelowFloor
        raise BelowFloor("neck half-length floor is 16")
    n = m.n
    from .chain import delta_of_Lb
    delta_fn = delta_fn or delta_of_Lb

    # Locate the center slice: z(t_c) - z(Q.t) = L_b.
    from scipy.integrate import cumulative_simpson
    ts = np.linspace(Q.t, m.t_max * (1 - 1e-9), 60000)
    phis = np.asarray(m.phi(ts), dtype=float)
    z = cumulative_simpson(1.0 / phis, x=ts, initial=0.0)
    if z[-1] < 2.0 * L_b:
        raise PreconditionNeck("domain does not contain a window of z-length 2 L_b ahead of Q")
    t_c = float(np.interp(L_b, z, ts))
    t_far = float(np.interp(2.0 * L_b, z, ts))
    r_c = float(m.phi(t_c))
    if abs(r_c - 1.0) > 1e-3:
        raise PreconditionNeck(f"center slice mean radius {r_c:.4f} != 1")
    cert = certify_neck(m, Q.t, t_far, k=1)
    win = normalize_parametrization(m, Q.t, t_far, n_grid=1024)
    band = win.r / r_c
    radius_band_ok = bool(np.all((band >= 0.9) & (band <= 1.1)))
    if not radius_band_ok:
        raise PreconditionNeck("mean radius leaves [9/10, 11/10] across the window")
    eps_b = epsilon_prime(0.1, 1, L_b, n=n)
    hypothesis_met = cert.eps <= eps_b

    # Constructive r0: B(Q, r0) covers the cap and the neck.
    r0 = (Q.t - m.t_min) + (t_far - m.t_min) + 10.0
    if R1 is None:
        R1 = r0
    if R2 is None:
        R2 = 2.0 * r0
    if R1 < r0:
        raise InvalidInput(f"need R1 >= r0 = {r0}")

    field = DistanceField(m, Q.t, s_max=1.05 * R2 + 1.0)
    est = annulus_volume_mc(m, Q, R1, R2, samples, seed=seed, field=field)
    ref = _euclidean_annulus(n, R1, R2)
    ratio = est.value / ref
    ratio_err = est.std_error / ref
    delta = delta_fn(n, L_b)
    passed = ratio <= delta + 3.0 * ratio_err

    # w0: first crossing of the center slice along fan geodesics that reach
    # the annulus while still minimal.
    min_len = field.minimal_lengths()
    s_grid, t_path, a_path = field.ray_paths
    w0 = math.inf
    for j in range(t_path.shape[1]):
        if min_len[j] < R1:
            continue
        col = t_path[:, j]
        ok = np.isfinite(col)
        crossings = np.nonzero((col[ok][:-1] - t_c) * (col[ok][1:] - t_c) <= 0)[0]
        if crossings.size == 0:
            continue
        i = crossings[0]
        svals = s_grid[ok]
        tv = col[ok]
        frac = (t_c - tv[i]) / (tv[i + 1] - tv[i]) if tv[i + 1] != tv[i] else 0.0
        w0 = min(w0, float(svals[i] + frac * (svals[i + 1] - svals[i])))
    w0_ok = w0 >= 0.9 * L_b

    # Sublemma: points with d(Q, x) in [w0 - 2, w0 + 2] lie within distance 6
    # of the center slice (distance to a slice is the parameter gap).
    rng = np.random.default_rng(seed + 17)
    ts_s = rng.uniform(max(m.t_min, t_c - 12.0), min(m.t_max, t_c + 12.0), 20000)
    gs_s = rng.uniform(0, math.pi, 20000)
    d_s = field.query(ts_s, gs_s)
    shell = (d_s >= w0 - 2.0) & (d_s <= w0 + 2.0)
    if np.any(shell):
        sub_max = float(np.max(np.abs(ts_s[shell] - t_c)))
    else:
        sub_max = 0.0
    sublemma_ok = sub_max <= 6.0

    return RelVolReport(Q, float(R1), float(R2), float(ratio), float(ratio_err),
                        float(delta), float(L_b), bool(passed), float(w0),
                        bool(w0_ok), float(r0), float(cert.eps), float(eps_b),
                        bool(hypothesis_met), radius_band_ok, sub_max,
                        bool(sublemma_ok))
