"""Neck certification on rotationally symmetric metrics.

A window [t0, t1] of a warped metric is reparametrized by the volume-
normalized coordinate ``z`` with ``dz = dt / phi``; in that coordinate the
metric is exactly ``r(z)^2 (dz^2 + g_sphere)`` with mean radius
``r(z) = phi(t(z))``, so the conformal deviation from the product cylinder
vanishes identically and the certified quantity is the sup of
``|d^j log r / dz^j|`` over the window for 1 <= j <= k.

The remaining normal-neck gauge conditions (constant mean curvature slices,
harmonic slice parametrizations, centered slices, Killing alignment) hold by
rotational symmetry and are recorded on the certificate rather than measured.

``epsilon_prime`` converts a target closeness for the fixed-scale (absolute)
inequalities into the sliding-scale tolerance that guarantees them; the order
constants C_k come from bounding derivatives of exp of a function with small
derivatives (complete Bell polynomial coefficient sums), regenerated
symbolically in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .errors import InvalidInput, InvalidWindow, OutOfDomain
from .warped import WarpedMetric, unit_sphere_volume

__all__ = [
    "NormalizedWindow",
    "NeckCertificate",
    "AbsoluteNeckCertificate",
    "ConversionReport",
    "normalize_parametrization",
    "certify_neck",
    "certify_absolute_neck",
    "epsilon_prime",
    "verify_absolute_conversion",
    "bell_numbers",
    "order_constants",
    "ORDER_CONSTANTS",
]

SYMMETRY_CONDITIONS = (
    "cmc_slices",
    "harmonic_slice_parametrization",
    "centered_slices",
    "killing_alignment",
)

MAX_ORDER = 6


def bell_numbers(kmax: int) -> list:
    """Bell numbers B_1..B_kmax (term counts of the exp derivative expansion)."""
    bells = [1]  # B_0
    for n in range(kmax):
        bells.append(sum(math.comb(n, i) * bells[i] for i in range(n + 1)))
    return bells[1:]


def order_constants(kmax: int = MAX_ORDER) -> dict:
    """C_k table for the fixed-scale conversion, one valid instantiation.

    With ratio q(z) = r(z)^2 / r_mid^2 = exp(R(z)), derivatives of exp(R)
    are bounded by Bell-number multiples of products of derivatives of R;
    combining the product-rule chain with the C^0 factor (1 + 4*eps'*L) and
    eps' <= 1/2 gives the bound eps' * (1 + 4L) * C_k with
    C_k = 1 + sum_{i<k} binom(k,i) * B_i + 2 * B_k.
    """
    bells = bell_numbers(kmax)
    table = {}
    best = 0
    for k in range(1, kmax + 1):
        ck = 1 + sum(math.comb(k, i) * bells[i - 1] for i in range(1, k)) + 2 * bells[k - 1]
        best = max(best, ck)
        table[k] = best
    return table


ORDER_CONSTANTS = order_constants()


# ---------------------------------------------------------------------------
# Normalized parametrization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalizedWindow:
    """Volume-normalized coordinate over a warp window.

    z runs over [a, b] with z = 0 at the t-midpoint of the window; r(z) is
    the mean radius of the slice at z.
    """

    a: float
    b: float
    z: np.ndarray
    t: np.ndarray
    r: np.ndarray

    @property
    def half_length(self) -> float:
        return 0.5 * (self.b - self.a)

    def volume_by_mean_radius(self, n: int, z0: Optional[float] = None,
                              z1: Optional[float] = None) -> float:
        """omega_{n-1} * integral of r(y)^n over [z0, z1] on the stored grid."""
        z0 = self.a if z0 is None else z0
        z1 = self.b if z1 is None else z1
        mask = (self.z >= z0 - 1e-15) & (self.z <= z1 + 1e-15)
        zs, rs = self.z[mask], self.r[mask]
        integral = float(cumulative_simpson(rs ** n, x=zs, initial=0.0)[-1])
        return unit_sphere_volume(n) * integral


def _fine_window(m: WarpedMetric, t0: float, t1: float, n_fine: int):
    ts = np.linspace(t0, t1, n_fine)
    phis = np.asarray(m.phi(ts), dtype=float)
    if np.any(phis <= 0.0):
        raise InvalidWindow("warp must be positive on the window")
    return ts, phis


def normalize_parametrization(m: WarpedMetric, t0: float, t1: float,
                              n_grid: int = 1024) -> NormalizedWindow:
    """Volume-normalized coordinate z with dz = dt/phi, anchored at the midpoint.

    In these coordinates the pulled-back metric is r(z)^2 (dz^2 + g_sphere),
    so slab volumes equal omega_{n-1} * integral r(y)^n dy exactly.
    """
    if not (m.t_min <= t0 < t1 <= m.t_max):
        raise OutOfDomain("window must lie inside the metric domain")
    n_fine = max(8 * n_grid, 4096) + 1
    ts, phis = _fine_window(m, t0, t1, n_fine)
    z_fine = cumulative_simpson(1.0 / phis, x=ts, initial=0.0)
    t_mid = 0.5 * (t0 + t1)
    z_mid = float(np.interp(t_mid, ts, z_fine))
    z_fine = z_fine - z_mid
    a, b = float(z_fine[0]), float(z_fine[-1])
    t_of_z = CubicSpline(z_fine, ts)
    z = np.linspace(a, b, n_grid)
    t = t_of_z(z)
    r = np.asarray(m.phi(t), dtype=float)
    return NormalizedWindow(a, b, z, t, r)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeckCertificate:
    a: float
    b: float
    k: int
    L: float
    z: np.ndarray
    r: np.ndarray
    eps_conformal: float
    eps_logr_by_order: tuple
    eps: float
    grid_points: int
    symmetry_conditions: tuple = SYMMETRY_CONDITIONS

    @property
    def eps_logr(self) -> float:
        return max(self.eps_logr_by_order) if self.eps_logr_by_order else 0.0

    def passes(self, eps_req: float, k_req: int, L_req: float) -> bool:
        """Monotone requirement check per the ordering on (eps, k, L)."""
        if k_req > self.k or L_req > self.L + 1e-15:
            return False
        worst = max(self.eps_logr_by_order[:k_req]) if k_req >= 1 else 0.0
        return max(worst, self.eps_conformal) <= eps_req

    def csv_row(self, eps_req=None, k_req=None, L_req=None):
        ok = ""
        if eps_req is not None:
            ok = "1" if self.passes(eps_req, k_req, L_req) else "0"
        return [repr(self.a), repr(self.b), str(self.k), repr(self.L),
                repr(self.eps_conformal), repr(self.eps_logr), repr(self.eps), ok]


@dataclass(frozen=True)
class AbsoluteNeckCertificate:
    a: float
    b: float
    k: int
    L: float
    eps_abs_by_order: tuple  # orders 0..k of the fixed-scale deviation
    eps_abs: float
    grid_points: int

    def passes(self, eps_req: float, k_req: int, L_req: float) -> bool:
        if k_req > self.k or L_req > self.L + 1e-15:
            return False
        return max(self.eps_abs_by_order[:k_req + 1]) <= eps_req


def _spline_derivative_cascade(z: np.ndarray, f: np.ndarray, orders: int):
    """Successive spline differentiation; returns list of arrays, one per order."""
    out = []
    cur = f
    for _ in range(orders):
        sp = CubicSpline(z, cur)
        cur = sp.derivative()(z)
        out.append(cur)
    return out


def _logr_sups(m: WarpedMetric, t0: float, t1: float, k: int, n_grid: int):
    win = normalize_parametrization(m, t0, t1, n_grid=n_grid)
    # d log r / dz = phi'(t(z)) exactly (chain rule through dz = dt/phi).
    f1 = np.asarray(m.dphi(win.t), dtype=float)
    sups = [float(np.max(np.abs(f1)))]
    if k > 1:
        higher = _spline_derivative_cascade(win.z, f1, k - 1)
        sups.extend(float(np.max(np.abs(g))) for g in higher)
    return win, sups


def certify_neck(m: WarpedMetric, t0: float, t1: float, k: int,
                 n_grid: int = 512, max_grid: int = 8192) -> NeckCertificate:
    """Certify the window as an (eps, k, L)-neck and report the achieved eps.

    For rotationally symmetric metrics the conformal deviation vanishes
    identically after the volume normalization, so eps is the sup over the
    z-grid of |d^j log r / dz^j| for 1 <= j <= k.  The grid is doubled until
    the certified eps moves by less than 1%.
    """
    if k < 1 or k > MAX_ORDER:
        raise InvalidInput(f"derivative order k must be in 1..{MAX_ORDER}")
    grid = max(n_grid, 512)
    win, sups = _logr_sups(m, t0, t1, k, grid)
    while grid < max_grid:
        grid *= 2
        win2, sups2 = _logr_sups(m, t0, t1, k, grid)
        prev, cur = max(sups), max(sups2)
        win, sups = win2, sups2
        if abs(cur - prev) <= 0.01 * max(cur, 1e-300):
            break
    eps = max(sups)
    return NeckCertificate(win.a, win.b, k, win.half_length, win.z, win.r,
                           0.0, tuple(sups), max(eps, 0.0), grid)


def certify_absolute_neck(m: WarpedMetric, t0: float, t1: float, k: int,
                          n_grid: int = 512, max_grid: int = 8192) -> AbsoluteNeckCertificate:
    """Fixed-scale certificate: deviation of r(z_mid)^{-2} g from the cylinder.

    The order-0 term is sqrt(n) * sup |r(z)^2/r_mid^2 - 1|; order j adds
    sqrt(n) * sup |d^j/dz^j (r^2/r_mid^2)|.
    """
    if k < 0 or k > MAX_ORDER:
        raise InvalidInput(f"derivative order k must be in 0..{MAX_ORDER}")
    sqrt_n = math.sqrt(m.n)

    def sups_at(grid):
        win = normalize_parametrization(m, t0, t1, n_grid=grid)
        z_mid = 0.5 * (win.a + win.b)
        r_mid = float(np.interp(z_mid, win.z, win.r))
        q = (win.r / r_mid) ** 2
        sups = [sqrt_n * float(np.max(np.abs(q - 1.0)))]
        if k >= 1:
            higher = _spline_derivative_cascade(win.z, q, k)
            sups.extend(sqrt_n * float(np.max(np.abs(g))) for g in higher)
        return win, sups

    grid = max(n_grid, 512)
    win, sups = sups_at(grid)
    while grid < max_grid:
        grid *= 2
        win2, sups2 = sups_at(grid)
        prev, cur = max(sups), max(sups2)
        win, sups = win2, sups2
        if abs(cur - prev) <= 0.01 * max(cur, 1e-300):
            break
    return AbsoluteNeckCertificate(win.a, win.b, k, win.half_length,
                                   tuple(sups), max(sups), grid)


# ---------------------------------------------------------------------------
# Sliding-to-fixed scale conversion
# ---------------------------------------------------------------------------

def epsilon_prime(eps: float, k: int, L: float, n: int = 3) -> float:
    """Sliding-scale tolerance guaranteeing the fixed-scale inequalities at eps.

    Returns min(1/2, ln2/(2L), eps/(C_k (1+4L)), eps/(1+8L sqrt(n))); always
    <= eps.
    """
    if eps <= 0 or L <= 0 or k < 1:
        raise InvalidInput("need eps > 0, k >= 1, L > 0")
    if k > MAX_ORDER:
        raise InvalidInput(f"order constants tabulated only up to k={MAX_ORDER}")
    ck = ORDER_CONSTANTS[k]
    return min(0.5,
               math.log(2.0) / (2.0 * L),
               eps / (ck * (1.0 + 4.0 * L)),
               eps / (1.0 + 8.0 * L * math.sqrt(n)))


@dataclass(frozen=True)
class ConversionReport:
    """Outcome of checking the sliding-to-fixed conversion on one window."""

    eps: float
    eps_prime: float
    neck_eps: float
    abs_eps: float
    applicable: bool   # neck certified at eps_prime?
    passed: bool       # abs_eps <= eps (vacuously true when not applicable)
    margin: float


def verify_absolute_conversion(m: WarpedMetric, t0: float, t1: float, k: int,
                               eps_targets: Sequence[float] = (0.5, 0.2, 0.1)) -> list:
    """Empirical soundness of the conversion lemma on one window.

    For each target eps: if the window certifies at eps' = epsilon_prime(eps),
    the fixed-scale certificate must come in at or below eps.
    """
    cert = certify_neck(m, t0, t1, k)
    abs_cert = certify_absolute_neck(m, t0, t1, k)
    out = []
    for eps in eps_targets:
        ep = epsilon_prime(eps, k, cert.L, n=m.n)
        applicable = cert.eps <= ep
        passed = (abs_cert.eps_abs <= eps) if applicable else True
        margin = eps - abs_cert.eps_abs if applicable else float("nan")
        out.append(ConversionReport(eps, ep, cert.eps, abs_cert.eps_abs,
                                    applicable, passed, margin))
    return out
