"""Rotationally symmetric metrics g = dt^2 + phi(t)^2 * (round sphere).

Everything downstream consumes the :class:`WarpedMetric` built here.  The
geometry of such a metric is controlled by the warp ``phi`` alone:

* sectional curvature of planes containing the radial direction:
  ``K_rad = -phi''/phi``
* sectional curvature of spherical planes: ``K_sph = (1 - phi'^2)/phi^2``
* scalar curvature: ``R = (n-1) * (2*K_rad + (n-2)*K_sph)``

Geodesics reduce to the 2D surface of revolution over the great circle
through the two sphere positions; the angular momentum ``J = phi^2 d(alpha)/ds``
is conserved (Clairaut), which turns the distance boundary-value problem into
root finding over the launch angle with the swept angle evaluated by
quadrature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import (
    ExitedDomain,
    InvalidInput,
    InvalidRange,
    InvalidSpec,
    NoConvergence,
    OutOfDomain,
    RequiresPole,
)
from .quadrature import adaptive_simpson

__all__ = [
    "WarpSpec",
    "WarpedMetric",
    "CurvatureSample",
    "Point",
    "Tangent",
    "make_metric",
    "cylinder_spec",
    "flat_spec",
    "sphere_spec",
    "flare_spec",
    "dumbbell_spec",
    "sampled_spec",
    "sampled_spec_from_csv",
    "scale_metric",
    "unit_sphere_volume",
    "curvature_at",
    "distance",
    "geodesic_shoot",
    "ball_volume",
    "annulus_volume_mc",
    "DistanceField",
    "MCEstimate",
]

_FAMILIES = ("cylinder", "flat", "sphere", "flare", "dumbbell", "sampled")


def unit_sphere_volume(n: int) -> float:
    """Volume omega_{n-1} of the unit (n-1)-sphere in n-space."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


# ---------------------------------------------------------------------------
# Specs and metric construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WarpSpec:
    """Declarative description of a warp profile.

    ``params`` carries the family parameter (c, a, sigma, A) or, for sampled
    specs, the (t, phi) grid.  Pole flags say whether an endpoint is a smooth
    pole (phi = 0, |phi'| = 1 there).
    """

    family: str
    n: int = 3
    t_min: float = 0.0
    t_max: float = 1.0
    pole_min: bool = False
    pole_max: bool = False
    params: dict = field(default_factory=dict)
    grid_t: Optional[tuple] = None
    grid_phi: Optional[tuple] = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InvalidSpec(f"unknown warp family {self.family!r}")
        if self.n < 3:
            raise InvalidSpec("dimension must satisfy n >= 3")
        if not self.t_max > self.t_min:
            raise InvalidSpec("domain must have t_max > t_min")
        if self.family == "flare":
            sigma = self.params.get("sigma")
            if sigma is None or not 0.0 < sigma < 1.0:
                raise InvalidSpec("flare requires 0 < sigma < 1")
        if self.family == "sampled":
            t = np.asarray(self.grid_t, dtype=float)
            if t.size < 8:
                raise InvalidSpec("sampled grid needs >= 8 points")
            if not np.all(np.diff(t) > 0):
                raise InvalidSpec("sampled grid must be strictly increasing")


def cylinder_spec(c: float = 1.0, n: int = 3, t_min: float = -10.0, t_max: float = 10.0) -> WarpSpec:
    if c <= 0:
        raise InvalidSpec("cylinder radius must be positive")
    return WarpSpec("cylinder", n, t_min, t_max, False, False, {"c": c})


def flat_spec(n: int = 3, t_max: float = 100.0) -> WarpSpec:
    return WarpSpec("flat", n, 0.0, t_max, True, False, {})


def sphere_spec(a: float = 1.0, n: int = 3) -> WarpSpec:
    if a <= 0:
        raise InvalidSpec("sphere radius must be positive")
    return WarpSpec("sphere", n, 0.0, math.pi * a, True, True, {"a": a})


def flare_spec(sigma: float, n: int = 3, t_max: float = 2000.0) -> WarpSpec:
    """Asymptotically conical warp phi(t) = sigma*t + (1-sigma)*(1-exp(-t)).

    phi'' < 0 and 0 < phi' <= 1, so both sectional curvatures are strictly
    positive, and for n = 3 the curvature ratio R * t^2 tends to the finite
    limit 2*(1-sigma^2)/sigma^2.
    """
    return WarpSpec("flare", n, 0.0, t_max, True, False, {"sigma": sigma})


def dumbbell_spec(A: float, n: int = 3) -> WarpSpec:
    """Pinched sphere profile phi(s) = sin(s) * (1 - A*sin(s)^2) on [0, pi]."""
    if not 0.0 < A < 1.0:
        raise InvalidSpec("dumbbell requires 0 < A < 1")
    return WarpSpec("dumbbell", n, 0.0, math.pi, True, True, {"A": A})


def sampled_spec(t: Sequence[float], phi: Sequence[float], n: int = 3,
                 pole_min: bool = False, pole_max: bool = False) -> WarpSpec:
    t = tuple(float(x) for x in t)
    phi = tuple(float(x) for x in phi)
    if len(t) != len(phi):
        raise InvalidSpec("t and phi grids must have equal length")
    return WarpSpec("sampled", n, t[0], t[-1], pole_min, pole_max,
                    {}, grid_t=t, grid_phi=phi)


def sampled_spec_from_csv(path, n: int = 3, **kw) -> WarpSpec:
    """Load a sampled warp from CSV with header ``t,phi``."""
    ts, phis = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["t", "phi"]:
            raise InvalidSpec("sampled warp CSV must have header 't,phi'")
        for row in reader:
            ts.append(float(row["t"]))
            phis.append(float(row["phi"]))
    return sampled_spec(ts, phis, n=n, **kw)


@dataclass(frozen=True)
class WarpedMetric:
    """Immutable rotationally symmetric metric dt^2 + phi(t)^2 * g_{S^{n-1}}."""

    spec: WarpSpec
    phi: Callable
    dphi: Callable
    d2phi: Callable

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def t_min(self) -> float:
        return self.spec.t_min

    @property
    def t_max(self) -> float:
        return self.spec.t_max

    @property
    def has_pole(self) -> bool:
        return self.spec.pole_min or self.spec.pole_max

    def poles(self):
        out = []
        if self.spec.pole_min:
            out.append(self.t_min)
        if self.spec.pole_max:
            out.append(self.t_max)
        return out

    def require_interior(self, t, slack: float = 0.0):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_min - slack) or np.any(t > self.t_max + slack):
            raise OutOfDomain(
                f"t={t} outside domain [{self.t_min}, {self.t_max}]")


def make_metric(spec: WarpSpec) -> WarpedMetric:
    """Build the evaluable metric for a spec.

    Sampled grids are interpolated by a natural cubic spline; analytic
    families use their closed forms.  Raises InvalidSpec if the warp is not
    positive in the interior.
    """
    fam, p = spec.family, spec.params
    if fam == "cylinder":
        c = p["c"]
        phi = lambda t: np.full_like(np.asarray(t, dtype=float), c)
        dphi = lambda t: np.zeros_like(np.asarray(t, dtype=float))
        d2phi = dphi
    elif fam == "flat":
        phi = lambda t: np.asarray(t, dtype=float) + 0.0
        dphi = lambda t: np.ones_like(np.asarray(t, dtype=float))
        d2phi = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    elif fam == "sphere":
        a = p["a"]
        phi = lambda t: a * np.sin(np.asarray(t, dtype=float) / a)
        dphi = lambda t: np.cos(np.asarray(t, dtype=float) / a)
        d2phi = lambda t: -np.sin(np.asarray(t, dtype=float) / a) / a
    elif fam == "flare":
        s = p["sigma"]
        phi = lambda t: s * np.asarray(t, dtype=float) + (1.0 - s) * (-np.expm1(-np.asarray(t, dtype=float)))
        dphi = lambda t: s + (1.0 - s) * np.exp(-np.asarray(t, dtype=float))
        d2phi = lambda t: -(1.0 - s) * np.exp(-np.asarray(t, dtype=float))
    elif fam == "dumbbell":
        A = p["A"]

        def phi(t):
            st = np.sin(np.asarray(t, dtype=float))
            return st * (1.0 - A * st * st)

        def dphi(t):
            t = np.asarray(t, dtype=float)
            st, ct = np.sin(t), np.cos(t)
            return ct * (1.0 - 3.0 * A * st * st)

        def d2phi(t):
            t = np.asarray(t, dtype=float)
            st, ct = np.sin(t), np.cos(t)
            return -st * (1.0 - 3.0 * A * st * st) - 6.0 * A * st * ct * ct
    elif fam == "sampled":
        t = np.asarray(spec.grid_t, dtype=float)
        f = np.asarray(spec.grid_phi, dtype=float)
        spline = CubicSpline(t, f, bc_type="natural")
        d1 = spline.derivative(1)
        d2 = spline.derivative(2)
        phi, dphi, d2phi = spline, d1, d2
    else:  # pragma: no cover - guarded by WarpSpec
        raise InvalidSpec(fam)

    # Interior positivity check on a dense probe grid.
    probe = np.linspace(spec.t_min, spec.t_max, 512)
    inner = probe[1:-1]
    vals = np.asarray(phi(inner), dtype=float)
    if np.any(vals <= 0.0):
        raise InvalidSpec("warp must be positive on the open domain")
    return WarpedMetric(spec, phi, dphi, d2phi)


def scale_metric(m: WarpedMetric, lam: float) -> WarpedMetric:
    """Metric of lam^2 * g: warp lam*phi(t/lam) on the domain scaled by lam."""
    if lam <= 0:
        raise InvalidInput("scale factor must be positive")
    spec = m.spec
    if spec.family == "sampled":
        new_spec = sampled_spec(
            [lam * t for t in spec.grid_t],
            [lam * f for f in spec.grid_phi],
            n=spec.n, pole_min=spec.pole_min, pole_max=spec.pole_max)
        return make_metric(new_spec)
    new_spec = WarpSpec(spec.family, spec.n, lam * spec.t_min, lam * spec.t_max,
                        spec.pole_min, spec.pole_max, dict(spec.params))
    base = make_metric(WarpSpec(spec.family, spec.n, spec.t_min, spec.t_max,
                                spec.pole_min, spec.pole_max, dict(spec.params)))
    phi = lambda t: lam * base.phi(np.asarray(t, dtype=float) / lam)
    dphi = lambda t: base.dphi(np.asarray(t, dtype=float) / lam)
    d2phi = lambda t: base.d2phi(np.asarray(t, dtype=float) / lam) / lam
    return WarpedMetric(new_spec, phi, dphi, d2phi)


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureSample:
    t: float
    K_rad: float
    K_sph: float
    R: float
    ricci_eigenvalues: tuple


def curvature_at(m: WarpedMetric, t: float) -> CurvatureSample:
    """Sectional/scalar/Ricci curvature at parameter t.

    At a smooth pole the 0/0 limits K_rad = K_sph = -phi'''(pole) are taken by
    evaluating at a small interior offset.
    """
    m.require_interior(t)
    n = m.n
    t_eval = float(t)
    h = 1e-5 * (m.t_max - m.t_min)
    if m.spec.pole_min and t_eval < m.t_min + h:
        t_eval = m.t_min + h
    if m.spec.pole_max and t_eval > m.t_max - h:
        t_eval = m.t_max - h
    phi = float(m.phi(t_eval))
    dphi = float(m.dphi(t_eval))
    d2phi = float(m.d2phi(t_eval))
    if phi <= 0.0:
        raise OutOfDomain(f"warp vanishes at t={t}")
    K_rad = -d2phi / phi
    K_sph = (1.0 - dphi * dphi) / (phi * phi)
    R = (n - 1) * (2.0 * K_rad + (n - 2) * K_sph)
    ric_rad = (n - 1) * K_rad
    ric_sph = K_rad + (n - 2) * K_sph
    return CurvatureSample(float(t), K_rad, K_sph, R,
                           (ric_rad,) + (ric_sph,) * (n - 1))


def curvature_arrays(m: WarpedMetric, t: np.ndarray):
    """Vectorized (K_rad, K_sph, R) on an array of interior parameters."""
    t = np.asarray(t, dtype=float)
    phi = np.asarray(m.phi(t), dtype=float)
    dphi = np.asarray(m.dphi(t), dtype=float)
    d2phi = np.asarray(m.d2phi(t), dtype=float)
    K_rad = -d2phi / phi
    K_sph = (1.0 - dphi * dphi) / (phi * phi)
    n = m.n
    R = (n - 1) * (2.0 * K_rad + (n - 2) * K_sph)
    return K_rad, K_sph, R


# ---------------------------------------------------------------------------
# Points and tangents
# ---------------------------------------------------------------------------

def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0:
        raise InvalidInput("zero vector cannot be normalized")
    return v / nrm


@dataclass(frozen=True)
class Point:
    """Manifold point: warp parameter t plus position theta on the unit sphere."""

    t: float
    theta: tuple

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if abs(float(np.linalg.norm(th)) - 1.0) > 1e-12:
            raise InvalidInput("theta must be a unit vector (|theta| = 1 to 1e-12)")
        object.__setattr__(self, "theta", tuple(float(x) for x in th))

    @property
    def theta_vec(self) -> np.ndarray:
        return np.asarray(self.theta, dtype=float)


@dataclass(frozen=True)
class Tangent:
    """Unit tangent split into radial speed dt/ds and sphere velocity dtheta/ds."""

    radial: float
    angular: tuple

    @property
    def angular_vec(self) -> np.ndarray:
        return np.asarray(self.angular, dtype=float)


def sphere_angle(a, b) -> float:
    return float(np.arccos(np.clip(np.dot(_unit(a), _unit(b)), -1.0, 1.0)))


# ---------------------------------------------------------------------------
# Clairaut quadrature machinery
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)


def _gl_integrate(f, a: float, b: float):
    """Gauss-Legendre integral supporting integrands vectorized over nodes."""
    if b <= a:
        return 0.0
    x = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
    return 0.5 * (b - a) * np.sum(f(x) * _GL_WEIGHTS, axis=-1)


def _half_sweep(m: WarpedMetric, t_anchor: float, t_far: float, J: np.ndarray):
    """Angle/length integrals from t_anchor to t_far with the square-root
    substitution at the anchor, where the integrand may be near-singular for
    J close to phi(t_anchor).  Vectorized over J; direction follows the sign
    of t_far - t_anchor.
    """
    span = t_far - t_anchor
    if span == 0.0:
        z = np.zeros_like(J)
        return z, z
    sgn = 1.0 if span > 0 else -1.0
    u_max = math.sqrt(abs(span))
    u = 0.5 * u_max * (_GL_NODES + 1.0)
    w = 0.5 * u_max * _GL_WEIGHTS
    t = t_anchor + sgn * u * u
    phi = np.asarray(m.phi(t), dtype=float)
    dphi_a = abs(float(m.dphi(t_anchor)))
    d2 = phi[None, :] ** 2 - J[:, None] ** 2
    rad = np.sqrt(np.maximum(d2, 0.0))
    small = rad < 1e-9 * np.maximum(J[:, None], 1e-30)
    safe_rad = np.where(small, 1.0, rad)
    ang_int = 2.0 * u[None, :] * J[:, None] / (phi[None, :] * safe_rad)
    len_int = 2.0 * u[None, :] * phi[None, :] / safe_rad
    if np.any(small):
        lim_scale = np.sqrt(np.maximum(2.0 * J * dphi_a, 1e-300))
        ang_lim = 2.0 * J[:, None] / (phi[None, :] * lim_scale[:, None])
        len_lim = 2.0 * phi[None, :] / lim_scale[:, None]
        ang_int = np.where(small, ang_lim, ang_int)
        len_int = np.where(small, len_lim, len_int)
    return ang_int @ w, len_int @ w


def _monotone_sweep(m: WarpedMetric, t0: float, t1: float, J):
    """Angle swept and arclength of the monotone-in-t geodesic branch.

    Valid for 0 <= J < min phi on [t0, t1]; vectorized over J.  The interval
    is split at its midpoint and each half is integrated with the endpoint
    substitution, which keeps near-grazing launches (J close to the endpoint
    warp value) accurate.
    """
    J = np.atleast_1d(np.asarray(J, dtype=float))
    mid = 0.5 * (t0 + t1)
    a1, l1 = _half_sweep(m, t0, mid, J)
    a2, l2 = _half_sweep(m, t1, mid, J)
    return a1 + a2, l1 + l2


def _turning_sweep(m: WarpedMetric, t_star: float, t_end: float, J: float):
    """Angle/length from a turning point t_star (phi(t_star) = J) up to t_end.

    Substitution t = t_star + u^2 removes the inverse square-root singularity.
    """
    if t_end <= t_star:
        return 0.0, 0.0
    u_max = math.sqrt(t_end - t_star)

    def ang(u):
        t = t_star + u * u
        phi = np.asarray(m.phi(t), dtype=float)
        d2 = np.maximum(phi * phi - J * J, 0.0)
        rad = np.sqrt(d2)
        out = np.empty_like(rad)
        small = rad < 1e-9 * max(J, 1e-30)
        big = ~small
        out[big] = 2.0 * u[big] * J / (phi[big] * rad[big])
        if np.any(small):
            dphi_s = float(m.dphi(t_star))
            lim = 2.0 * J / (phi[small] * np.sqrt(max(2.0 * J * dphi_s, 1e-300)))
            out[small] = lim
        return out

    def length(u):
        t = t_star + u * u
        phi = np.asarray(m.phi(t), dtype=float)
        d2 = np.maximum(phi * phi - J * J, 0.0)
        rad = np.sqrt(d2)
        out = np.empty_like(rad)
        small = rad < 1e-9 * max(J, 1e-30)
        big = ~small
        out[big] = 2.0 * u[big] * phi[big] / rad[big]
        if np.any(small):
            dphi_s = float(m.dphi(t_star))
            out[small] = 2.0 * phi[small] / np.sqrt(max(2.0 * J * dphi_s, 1e-300))
        return out

    return float(_gl_integrate(ang, 0.0, u_max)), float(_gl_integrate(length, 0.0, u_max))


def _find_turning(m: WarpedMetric, J: float, t_from: float, side: str):
    """Nearest t* with phi(t*) = J walking from t_from toward a domain end."""
    lo, hi = m.t_min, m.t_max
    ts = (np.linspace(t_from, lo, 400) if side == "down"
          else np.linspace(t_from, hi, 400))
    phis = np.asarray(m.phi(ts), dtype=float)
    below = phis < J
    idx = np.argmax(below)
    if not below[idx]:
        return None
    if idx == 0:
        return None
    a, b = ts[idx - 1], ts[idx]
    try:
        return brentq(lambda t: float(m.phi(t)) - J, min(a, b), max(a, b),
                      xtol=1e-13, maxiter=200)
    except ValueError:
        return None


def _root_scan(f, grid, target):
    """All brentq roots of f(J) = target over consecutive grid brackets."""
    vals = f(grid)
    roots = []
    for i in range(len(grid) - 1):
        v0, v1 = vals[i] - target, vals[i + 1] - target
        if not (np.isfinite(v0) and np.isfinite(v1)):
            continue
        if v0 == 0.0:
            roots.append(grid[i])
        elif v0 * v1 < 0.0:
            try:
                roots.append(brentq(lambda x: float(f(np.array([x]))[0]) - target,
                                    grid[i], grid[i + 1], xtol=1e-13, maxiter=200))
            except ValueError:
                pass
    return roots


def distance(m: WarpedMetric, p: Point, q: Point) -> float:
    """Minimal geodesic distance between two points.

    The boundary-value problem is solved by shooting over the conserved
    angular momentum J (equivalently the launch angle): the swept angle of
    the monotone and turning geodesic branches is evaluated by quadrature and
    matched to the target sphere angle by bracketed root finding.  Paths
    through a pole supply the polar exact fallback.
    """
    m.require_interior(p.t)
    m.require_interior(q.t)
    delta = sphere_angle(p.theta_vec, q.theta_vec)
    t_lo, t_hi = (p.t, q.t) if p.t <= q.t else (q.t, p.t)

    candidates = []
    # Radial segment (exact when the sphere positions agree).
    if delta < 1e-12:
        return abs(q.t - p.t)

    # Polar exact formulas: broken path through either pole.
    for pole in m.poles():
        candidates.append(abs(p.t - pole) + abs(q.t - pole))

    targets = [delta, 2.0 * math.pi - delta]

    # Monotone branch; the launch-angle grading resolves near-grazing J.
    if t_hi > t_lo + 1e-14:
        probe = np.linspace(t_lo, t_hi, 256)
        j_cap = float(np.min(np.asarray(m.phi(probe), dtype=float)))
        beta = np.linspace(0.0, math.pi / 2.0, 80)
        grid = j_cap * (1.0 - 1e-12) * np.sin(beta)

        for target in targets:
            for J in _root_scan(lambda j: np.atleast_1d(_monotone_sweep(m, t_lo, t_hi, j)[0]),
                                grid, target):
                _, L = _monotone_sweep(m, t_lo, t_hi, np.array([J]))
                candidates.append(float(np.atleast_1d(L)[0]))

    # Turning branches on either side.
    for side in ("down", "up"):
        phi_gate = float(m.phi(t_lo)) if side == "down" else float(m.phi(t_hi))

        def turn_ang_len(J: float):
            t_star = _find_turning(m, J, t_lo if side == "down" else t_hi, side)
            if t_star is None:
                return None
            if side == "down":
                a1, l1 = _turning_sweep(m, t_star, p.t, J)
                a2, l2 = _turning_sweep(m, t_star, q.t, J)
            else:
                a1, l1 = _turning_sweep_above(m, t_star, p.t, J)
                a2, l2 = _turning_sweep_above(m, t_star, q.t, J)
            return a1 + a2, l1 + l2

        grid = np.linspace(phi_gate * 1e-6, phi_gate * (1.0 - 1e-9), 48)
        angs = np.full(grid.shape, np.nan)
        for i, J in enumerate(grid):
            res = turn_ang_len(float(J))
            if res is not None:
                angs[i] = res[0]
        for target in targets:
            for i in range(len(grid) - 1):
                v0, v1 = angs[i] - target, angs[i + 1] - target
                if not (np.isfinite(v0) and np.isfinite(v1)) or v0 * v1 > 0:
                    continue
                try:
                    J = brentq(lambda x: turn_ang_len(x)[0] - target,
                               grid[i], grid[i + 1], xtol=1e-13, maxiter=200)
                    candidates.append(turn_ang_len(J)[1])
                except (ValueError, TypeError):
                    continue

    # Slice-circle candidate: exact geodesic wherever phi' = 0.
    if abs(p.t - q.t) < 1e-12 and abs(float(m.dphi(p.t))) < 1e-10:
        candidates.append(float(m.phi(p.t)) * delta)

    if not candidates:
        raise NoConvergence("no geodesic candidate connected the points",
                            best_bounds=(abs(q.t - p.t), None))
    return min(candidates)


def _turning_sweep_above(m: WarpedMetric, t_star: float, t_end: float, J: float):
    """Mirror of _turning_sweep for turning points above the endpoints."""
    if t_end >= t_star:
        return 0.0, 0.0
    u_max = math.sqrt(t_star - t_end)

    def ang(u):
        t = t_star - u * u
        phi = np.asarray(m.phi(t), dtype=float)
        rad = np.sqrt(np.maximum(phi * phi - J * J, 0.0))
        out = np.empty_like(rad)
        small = rad < 1e-9 * max(J, 1e-30)
        big = ~small
        out[big] = 2.0 * u[big] * J / (phi[big] * rad[big])
        if np.any(small):
            dphi_s = abs(float(m.dphi(t_star)))
            out[small] = 2.0 * J / (phi[small] * np.sqrt(max(2.0 * J * dphi_s, 1e-300)))
        return out

    def length(u):
        t = t_star - u * u
        phi = np.asarray(m.phi(t), dtype=float)
        rad = np.sqrt(np.maximum(phi * phi - J * J, 0.0))
        out = np.empty_like(rad)
        small = rad < 1e-9 * max(J, 1e-30)
        big = ~small
        out[big] = 2.0 * u[big] * phi[big] / rad[big]
        if np.any(small):
            dphi_s = abs(float(m.dphi(t_star)))
            out[small] = 2.0 * phi[small] / np.sqrt(max(2.0 * J * dphi_s, 1e-300))
        return out

    return float(_gl_integrate(ang, 0.0, u_max)), float(_gl_integrate(length, 0.0, u_max))


# ---------------------------------------------------------------------------
# Geodesic shooting (initial-value problem)
# ---------------------------------------------------------------------------

def geodesic_shoot(m: WarpedMetric, start: Point, direction: Tangent, length: float):
    """Follow the geodesic with given unit initial tangent for arclength ``length``.

    Returns ``(end_point, end_tangent, clairaut_drift)``.  The integration
    runs in the 2D reduction; radial geodesics pass smoothly through poles.
    Raises ExitedDomain (with exit data) if the geodesic leaves the domain.
    """
    if length < 0:
        raise InvalidInput("arclength must be nonnegative")
    m.require_interior(start.t)
    theta0 = start.theta_vec
    w = direction.angular_vec
    wnorm = float(np.linalg.norm(w))
    phi0 = float(m.phi(start.t))
    speed2 = direction.radial ** 2 + (phi0 * wnorm) ** 2
    if abs(speed2 - 1.0) > 1e-8:
        raise InvalidInput("direction must be a unit tangent")

    if wnorm * phi0 < 1e-14:
        # Radial geodesic; reflect through smooth poles.
        t_new, sign, flips, remaining = start.t, (1.0 if direction.radial >= 0 else -1.0), 0, length
        while True:
            target = t_new + sign * remaining
            if m.t_min <= target <= m.t_max:
                t_new = target
                break
            if sign < 0 and m.spec.pole_min:
                remaining -= (t_new - m.t_min)
                t_new, sign, flips = m.t_min, 1.0, flips + 1
            elif sign > 0 and m.spec.pole_max:
                remaining -= (m.t_max - t_new)
                t_new, sign, flips = m.t_max, -1.0, flips + 1
            else:
                exit_t = m.t_min if sign < 0 else m.t_max
                used = abs(exit_t - t_new)
                raise ExitedDomain("radial geodesic exited the domain",
                                   exit_point=Point(exit_t, tuple(theta0)),
                                   exit_length=length - remaining + used)
        theta_new = theta0 * ((-1.0) ** flips)
        return (Point(t_new, tuple(theta_new)),
                Tangent(sign * ((-1.0) ** 0), tuple(np.zeros_like(theta0))), 0.0)

    what = w / wnorm
    J = phi0 * phi0 * wnorm

    from scipy.integrate import solve_ivp

    def rhs(s, y):
        t, alpha, v = y
        phi = float(m.phi(t))
        dphi = float(m.dphi(t))
        return [v, J / (phi * phi), J * J * dphi / phi ** 3]

    hit_min = lambda s, y: y[0] - m.t_min
    hit_max = lambda s, y: y[0] - m.t_max
    hit_min.terminal = hit_max.terminal = True
    sol = solve_ivp(rhs, (0.0, length), [start.t, 0.0, direction.radial],
                    rtol=1e-11, atol=1e-13, events=[hit_min, hit_max],
                    dense_output=False, max_step=max(length / 64.0, 1e-12))
    if sol.status == 1:
        s_exit = float(sol.t[-1])
        t_e, a_e, _ = sol.y[:, -1]
        theta_e = math.cos(a_e) * theta0 + math.sin(a_e) * what
        raise ExitedDomain("geodesic exited the domain",
                           exit_point=Point(min(max(t_e, m.t_min), m.t_max),
                                            tuple(_unit(theta_e))),
                           exit_length=s_exit)
    t1, a1, v1 = sol.y[:, -1]
    phi1 = float(m.phi(t1))
    drift = abs(phi1 * phi1 * (J / (phi1 * phi1)) - J)  # exact by construction
    # Clairaut drift measured from the unit-speed constraint instead.
    wnorm1 = J / (phi1 * phi1)
    speed1 = v1 * v1 + (phi1 * wnorm1) ** 2
    drift = abs(math.sqrt(max(speed1, 0.0)) - 1.0)
    theta1 = math.cos(a1) * theta0 + math.sin(a1) * what
    dtheta1 = wnorm1 * (-math.sin(a1) * theta0 + math.cos(a1) * what)
    return (Point(float(t1), tuple(_unit(theta1))),
            Tangent(float(v1), tuple(dtheta1)), float(drift))


# ---------------------------------------------------------------------------
# Volumes
# ---------------------------------------------------------------------------

def ball_volume(m: WarpedMetric, r: float) -> float:
    """Volume of the pole-centered metric ball of radius r (exact quadrature)."""
    if not m.spec.pole_min:
        raise RequiresPole("ball_volume needs a pole at t_min")
    reach = m.t_max - m.t_min
    if r < 0 or r > reach + 1e-12:
        raise OutOfDomain(f"radius {r} exceeds pole-to-boundary reach {reach}")
    n = m.n
    tol = 1e-10 * (m.t_max - m.t_min)
    integral = adaptive_simpson(lambda t: float(m.phi(t)) ** (n - 1),
                                m.t_min, m.t_min + r, tol=tol)
    return unit_sphere_volume(n) * integral


def annulus_parameter_volume(m: WarpedMetric, t0: float, t1: float) -> float:
    """Exact volume of the parameter slab t0 <= t <= t1."""
    n = m.n
    tol = 1e-10 * (m.t_max - m.t_min)
    return unit_sphere_volume(n) * adaptive_simpson(
        lambda t: float(m.phi(t)) ** (n - 1), t0, t1, tol=tol)


# ---------------------------------------------------------------------------
# Distance field (geodesic fan + eikonal sweeps)
# ---------------------------------------------------------------------------

class DistanceField:
    """Distance-from-Q field on the (t, gamma) reduction of the manifold.

    A vectorized fan of geodesics from Q provides an accurate long-range
    skeleton; a few anisotropic eikonal fast sweeps bridge the gaps the fan
    leaves between neighboring rays.  The pole corrections use the polar
    exact broken-path formula.  Accuracy is O(cell size), which suffices for
    Monte Carlo membership tests; use :func:`distance` for point queries that
    need 1e-6 accuracy.
    """

    def __init__(self, m: WarpedMetric, t_Q: float, s_max: float,
                 n_rays: int = 3072, n_steps: int = 16000,
                 nt: int = 1400, ng: int = 700, pole_margin: Optional[float] = None):
        m.require_interior(t_Q)
        self.m = m
        self.t_Q = float(t_Q)
        self.s_max = float(s_max)
        scale = m.t_max - m.t_min
        self.pole_margin = pole_margin if pole_margin is not None else 1e-3 * scale
        self.nt, self.ng = nt, ng
        self.dt_cell = scale / nt
        self.dg_cell = math.pi / ng
        self.t_edges = m.t_min + self.dt_cell * np.arange(nt + 1)
        self.t_centers = m.t_min + self.dt_cell * (np.arange(nt) + 0.5)
        self.g_centers = self.dg_cell * (np.arange(ng) + 0.5)
        self.field = np.full((nt, ng), np.inf)
        self.rays_beta = None
        self.ray_paths = None
        self.excluded_rays = 0
        self._run_fan(n_rays, n_steps)
        self._pole_and_radial_seeds()
        self._fast_sweeps()

    # -- fan integration ----------------------------------------------------
    def _run_fan(self, n_rays: int, n_steps: int):
        m = self.m
        beta = np.linspace(0.0, math.pi, n_rays)
        phi_Q = float(m.phi(self.t_Q))
        J = phi_Q * np.sin(beta)
        t = np.full(n_rays, self.t_Q)
        alpha = np.zeros(n_rays)
        v = np.cos(beta)
        active = np.ones(n_rays, dtype=bool)
        ds = self.s_max / n_steps
        lo, hi = m.t_min, m.t_max
        margin = self.pole_margin
        pole_lo = m.spec.pole_min
        pole_hi = m.spec.pole_max

        # Track polylines for ray-based diagnostics (theta profiles).
        keep_every = max(1, n_steps // 2000)
        path_t = [np.where(active, t, np.nan)]
        path_a = [alpha.copy()]
        path_s = [0.0]

        chunk_t, chunk_a, chunk_s = [], [], []

        def rhs(t_, a_, v_):
            phi = np.maximum(np.asarray(m.phi(t_), dtype=float), 1e-12)
            dphi = np.asarray(m.dphi(t_), dtype=float)
            return v_, J / (phi * phi), J * J * dphi / phi ** 3

        s = 0.0
        for k in range(n_steps):
            if not np.any(active):
                break
            k1t, k1a, k1v = rhs(t, alpha, v)
            k2t, k2a, k2v = rhs(t + 0.5 * ds * k1t, alpha + 0.5 * ds * k1a, v + 0.5 * ds * k1v)
            k3t, k3a, k3v = rhs(t + 0.5 * ds * k2t, alpha + 0.5 * ds * k2a, v + 0.5 * ds * k2v)
            k4t, k4a, k4v = rhs(t + ds * k3t, alpha + ds * k3a, v + ds * k3v)
            t_new = t + ds / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t)
            a_new = alpha + ds / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a)
            v_new = v + ds / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            t = np.where(active, t_new, t)
            alpha = np.where(active, a_new, alpha)
            v = np.where(active, v_new, v)
            s += ds

            # Freeze rays at pole zones or domain exits.
            bad_lo = t < lo + (margin if pole_lo else 0.0)
            bad_hi = t > hi - (margin if pole_hi else 1e-12 * (hi - lo))
            nan_mask = active & ~np.isfinite(t)
            if np.any(nan_mask):
                self.excluded_rays += int(np.sum(nan_mask))
            active = active & ~(bad_lo | bad_hi) & np.isfinite(t)

            if np.any(active):
                chunk_t.append(np.where(active, t, np.nan))
                chunk_a.append(np.where(active, alpha, np.nan))
                chunk_s.append(s)
            if (k + 1) % keep_every == 0:
                path_t.append(np.where(active, t, np.nan))
                path_a.append(np.where(active, alpha, np.nan))
                path_s.append(s)
            if len(chunk_t) >= 400:
                self._deposit(np.array(chunk_t), np.array(chunk_a), np.array(chunk_s))
                chunk_t, chunk_a, chunk_s = [], [], []
        if chunk_t:
            self._deposit(np.array(chunk_t), np.array(chunk_a), np.array(chunk_s))
        self.rays_beta = beta
        self.ray_paths = (np.array(path_s), np.array(path_t), np.array(path_a))

    def _deposit(self, ts, alphas, ss):
        gam = np.abs(np.mod(alphas + math.pi, 2.0 * math.pi) - math.pi)
        ok = np.isfinite(ts) & np.isfinite(gam)
        svals = np.broadcast_to(ss[:, None], ts.shape)
        ts, gam, svals = ts[ok], gam[ok], svals[ok]
        ti = np.clip(((ts - self.m.t_min) / self.dt_cell).astype(int), 0, self.nt - 1)
        gi = np.clip((gam / self.dg_cell).astype(int), 0, self.ng - 1)
        np.minimum.at(self.field, (ti, gi), svals)

    def _pole_and_radial_seeds(self):
        m, tq = self.m, self.t_Q
        tc = self.t_centers
        # Radial column gamma ~ 0.
        self.field[:, 0] = np.minimum(self.field[:, 0], np.abs(tc - tq))
        # Broken paths through poles reach every gamma.
        for pole in m.poles():
            through = np.abs(tq - pole) + np.abs(tc - pole)
            self.field = np.minimum(self.field, through[:, None])

    def _fast_sweeps(self, n_iter: int = 3):
        u = self.field
        h1 = self.dt_cell
        phi_c = np.maximum(np.asarray(self.m.phi(self.t_centers), dtype=float), 1e-12)
        h2 = phi_c * self.dg_cell  # per-row metric cost of a gamma step
        big = 1e30
        u = np.where(np.isfinite(u), u, big)
        nt, ng = self.nt, self.ng
        for _ in range(n_iter):
            for it_dir in (range(nt), range(nt - 1, -1, -1)):
                for jg_dir in (1, -1):
                    for i in it_dir:
                        a = np.full(ng, big)
                        if i > 0:
                            a = np.minimum(a, u[i - 1])
                        if i < nt - 1:
                            a = np.minimum(a, u[i + 1])
                        row = u[i]
                        b = np.full(ng, big)
                        if jg_dir == 1:
                            b[1:] = row[:-1]
                            b[0] = row[0]
                        else:
                            b[:-1] = row[1:]
                            b[-1] = row[-1]
                        h2i = h2[i]
                        cand = _eikonal_update(a, b, h1, h2i, big)
                        u[i] = np.minimum(row, cand)
        self.field = u

    # -- queries -------------------------------------------------------------
    def query(self, t, gamma):
        """Bilinear distance lookup at (t, gamma); vectorized."""
        t = np.asarray(t, dtype=float)
        gamma = np.abs(np.mod(np.asarray(gamma, dtype=float) + math.pi,
                              2.0 * math.pi) - math.pi)
        x = (t - self.m.t_min) / self.dt_cell - 0.5
        y = gamma / self.dg_cell - 0.5
        x = np.clip(x, 0.0, self.nt - 1.000001)
        y = np.clip(y, 0.0, self.ng - 1.000001)
        i0 = np.floor(x).astype(int)
        j0 = np.floor(y).astype(int)
        fx, fy = x - i0, y - j0
        f = self.field
        v = ((1 - fx) * (1 - fy) * f[i0, j0] + fx * (1 - fy) * f[i0 + 1, j0]
             + (1 - fx) * fy * f[i0, j0 + 1] + fx * fy * f[i0 + 1, j0 + 1])
        return v

    def query_point(self, theta_Q, point: Point):
        gamma = sphere_angle(theta_Q, point.theta_vec)
        return float(self.query(np.array([point.t]), np.array([gamma]))[0])

    def minimal_lengths(self, tol: Optional[float] = None):
        """Per-ray arclength up to which the fan geodesic stays minimal.

        Rays frozen at a pole zone are continued through the pole radially
        (the limit geodesic) and the continuation is kept while it passes the
        same minimality test, so e.g. backward directions in flat space count
        as full rays.
        """
        s_grid, t_path, a_path = self.ray_paths
        gam = np.abs(np.mod(a_path + math.pi, 2.0 * math.pi) - math.pi)
        out = np.full(t_path.shape[1], 0.0)
        if tol is None:
            tol = 6.0 * self.dt_cell
        poles = self.m.poles()
        for j in range(t_path.shape[1]):
            ok = np.isfinite(t_path[:, j]) & np.isfinite(gam[:, j])
            if not np.any(ok):
                continue
            ts_j, gs_j, ss_j = t_path[ok, j], gam[ok, j], s_grid[ok]
            slack_j = np.zeros_like(ss_j)
            t_end, g_end, s_end = ts_j[-1], gs_j[-1], ss_j[-1]
            near_pole = [p for p in poles
                         if abs(t_end - p) <= 2.0 * self.pole_margin + self.dt_cell]
            if near_pole and s_end < 0.98 * self.s_max:
                pole = near_pole[0]
                # Radial continuation out the other side of the pole; the
                # broken path overestimates the true geodesic by at most the
                # pole-zone diameter, which the slack accounts for.
                reach = self.s_max - (s_end + abs(t_end - pole))
                if reach > 0:
                    t_cont = (np.linspace(pole, pole + reach, 64) if pole == self.m.t_min
                              else np.linspace(pole - reach, pole, 64))
                    g_cont = np.abs(np.mod(g_end + math.pi + math.pi, 2 * math.pi) - math.pi)
                    s_cont = s_end + abs(t_end - pole) + np.abs(t_cont - pole)
                    ts_j = np.concatenate([ts_j, t_cont])
                    gs_j = np.concatenate([gs_j, np.full(64, g_cont)])
                    ss_j = np.concatenate([ss_j, s_cont])
                    slack_j = np.concatenate(
                        [slack_j, np.full(64, 2.0 * self.pole_margin + abs(t_end - pole))])
            d_here = self.query(ts_j, gs_j)
            non_min = ss_j > d_here + tol + slack_j
            if np.any(non_min):
                out[j] = ss_j[np.argmax(non_min)]
            else:
                out[j] = ss_j[-1]
        return out


def _eikonal_update(a, b, h1, h2, big):
    """Row-vectorized anisotropic upwind eikonal update."""
    a = np.minimum(a, big)
    b = np.minimum(b, big)
    # One-sided candidates.
    cand = np.minimum(a + h1, b + h2)
    # Two-sided quadratic solve: ((u-a)/h1)^2 + ((u-b)/h2)^2 = 1.
    h1sq, h2sq = h1 * h1, h2 * h2
    denom = h1sq + h2sq
    diff = a - b
    disc = denom - diff * diff
    valid = (disc > 0) & (a < big) & (b < big)
    u2 = np.where(valid,
                  (a * h2sq + b * h1sq + h1 * h2 * np.sqrt(np.maximum(disc, 0.0))) / denom,
                  big)
    two_sided_ok = valid & (u2 >= np.maximum(a, b))
    return np.where(two_sided_ok, np.minimum(cand, u2), cand)


# ---------------------------------------------------------------------------
# Monte Carlo annulus volume
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float
    samples: int


def annulus_volume_mc(m: WarpedMetric, Q: Point, R1: float, R2: float,
                      samples: int, seed: int = 0, strata: int = 32,
                      field: Optional[DistanceField] = None) -> MCEstimate:
    """Stratified Monte Carlo volume of the metric annulus around Q.

    Samples (t, theta) with density phi^{n-1}; membership R1 <= d <= R2 is
    decided by the distance field (the shared vectorized distance evaluator).
    Strata get deterministic per-batch seeds, so results are reproducible and
    batches can run independently.
    """
    if R1 >= R2:
        raise InvalidRange("need R1 < R2")
    if samples < 10 ** 3:
        raise InvalidInput("need at least 1e3 samples")
    if R1 < 0:
        raise InvalidRange("R1 must be nonnegative")
    n = m.n
    omega = unit_sphere_volume(n)
    if field is None:
        field = DistanceField(m, Q.t, s_max=R2 * 1.05 + 1.0)
    theta_Q = Q.theta_vec

    # Membership requires |t - t_Q| <= R2.
    t_lo = max(m.t_min, Q.t - R2)
    t_hi = min(m.t_max, Q.t + R2)
    if t_hi <= t_lo:
        return MCEstimate(0.0, 0.0, samples)
    edges = np.linspace(t_lo, t_hi, strata + 1)
    per = samples // strata
    total, var_total, used = 0.0, 0.0, 0
    for b in range(strata):
        rng = np.random.default_rng([seed, b])
        ts = rng.uniform(edges[b], edges[b + 1], per)
        zs = rng.normal(size=(per, n))
        zs /= np.linalg.norm(zs, axis=1, keepdims=True)
        gam = np.arccos(np.clip(zs @ theta_Q, -1.0, 1.0))
        d = field.query(ts, gam)
        member = (d >= R1) & (d <= R2)
        w = np.where(member, np.asarray(m.phi(ts), dtype=float) ** (n - 1), 0.0)
        length = edges[b + 1] - edges[b]
        est = length * omega * float(np.mean(w))
        var = (length * omega) ** 2 * float(np.var(w)) / per
        total += est
        var_total += var
        used += per
    return MCEstimate(total, math.sqrt(var_total), used)
