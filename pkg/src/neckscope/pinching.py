"""Curvature-operator eigenvalue algebra for 3-manifolds.

The curvature operator on 2-forms of a 3-manifold has eigenvalues
(lambda, mu, nu); the convention here ties the scalar curvature to their sum,
R = lambda + mu + nu, which is forced by compatibility of the pinching
inequality's proof hypothesis with the necklike deviation minimized at the
top eigenform.  Under this convention the round sphere of radius a carries
(2, 2, 2)/a^2 and the unit-radius round cylinder carries (2, 0, 0).

Quantities:

* ``P = lambda^2 (mu-nu)^2 + mu^2 (lambda-nu)^2 + nu^2 (lambda-mu)^2``,
  vanishing exactly at round and cylinder-type curvature;
* the necklike deviation delta* = min over unit 2-forms of
  |Rm - R (theta tensor theta)| / |Rm|, with closed form
  delta*^2 = (|Rm|^2 - 2 R lambda_max + R^2)/|Rm|^2;
* the decay quantities G and J driving the essential/necklike dichotomy;
* the reaction system lambda' = lambda^2 + mu nu (and cyclic), the spatially
  homogeneous shadow of the curvature evolution under the flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InvalidInput, RequiresPositiveScalar, UndefinedQuantity

__all__ = [
    "EigenTriple",
    "LemmaCResult",
    "DichotomyResult",
    "Trajectory",
    "p_quantity",
    "necklike_delta",
    "lemma_c_check",
    "g_quantity",
    "j_quantity",
    "dichotomy_check",
    "integrate_curvature_ode",
    "trajectory_g_report",
    "TrajectoryGReport",
    "eta_of_delta",
    "random_triples",
    "lemma_c_sweep",
    "dichotomy_sweep",
    "eigenvalues_from_sectional",
]


@dataclass(frozen=True)
class EigenTriple:
    """Eigenvalues of the curvature operator, sorted by |.| descending."""

    lam: float
    mu: float
    nu: float

    def __post_init__(self):
        vals = sorted((self.lam, self.mu, self.nu), key=abs, reverse=True)
        object.__setattr__(self, "lam", float(vals[0]))
        object.__setattr__(self, "mu", float(vals[1]))
        object.__setattr__(self, "nu", float(vals[2]))

    @property
    def R(self) -> float:
        return self.lam + self.mu + self.nu

    @property
    def norm2(self) -> float:
        """|Rm|^2 = lambda^2 + mu^2 + nu^2."""
        return self.lam ** 2 + self.mu ** 2 + self.nu ** 2

    @property
    def traceless_norm2(self) -> float:
        """|Rm0|^2 = (1/3)[(l-m)^2 + (l-n)^2 + (m-n)^2]."""
        return ((self.lam - self.mu) ** 2 + (self.lam - self.nu) ** 2
                + (self.mu - self.nu) ** 2) / 3.0

    def scaled(self, s: float) -> "EigenTriple":
        return EigenTriple(s * self.lam, s * self.mu, s * self.nu)

    def as_array(self) -> np.ndarray:
        return np.array([self.lam, self.mu, self.nu])


def eigenvalues_from_sectional(K_rad: float, K_sph: float) -> EigenTriple:
    """Curvature-operator eigenvalues of a rotationally symmetric 3-metric."""
    return EigenTriple(2.0 * K_sph, 2.0 * K_rad, 2.0 * K_rad)


def p_quantity(e: EigenTriple) -> float:
    return (e.lam ** 2 * (e.mu - e.nu) ** 2
            + e.mu ** 2 * (e.lam - e.nu) ** 2
            + e.nu ** 2 * (e.lam - e.mu) ** 2)


def necklike_delta(e: EigenTriple) -> float:
    """Minimal relative deviation of Rm from R (theta tensor theta).

    The minimum over unit 2-forms is attained at the top eigenform, giving
    delta*^2 = (|Rm|^2 - 2 R lambda_max + R^2) / |Rm|^2, which simplifies to
    the cancellation-free form 2(b^2 + c^2 + bc)/|Rm|^2 over the two
    non-maximal eigenvalues b, c -- exactly the quantity the pinching
    hypothesis bounds from below.  Scale invariant.
    """
    n2 = e.norm2
    if n2 <= 0.0:
        raise UndefinedQuantity("necklike deviation undefined at zero curvature")
    vals = sorted((e.lam, e.mu, e.nu))
    b, c = vals[0], vals[1]
    val = 2.0 * (b * b + c * c + b * c) / n2
    return math.sqrt(max(val, 0.0))


def eta_of_delta(delta: float) -> float:
    """Pinching constant delta / (96 (3 - delta)) from the quadratic estimate."""
    if not 0.0 < delta < 1.0:
        raise InvalidInput("delta must lie in (0, 1)")
    return delta / (96.0 * (3.0 - delta))


@dataclass(frozen=True)
class LemmaCResult:
    applicable: bool
    P: float
    rhs: float
    ratio: float
    passed: bool


def lemma_c_check(e: EigenTriple, delta: float) -> LemmaCResult:
    """P >= delta/(96(3-delta)) |Rm|^2 |Rm0|^2 under the proof hypothesis.

    The hypothesis (with |lambda| >= |mu| >= |nu|) is
    mu^2 + nu^2 + mu nu >= (delta/2)(lambda^2 + mu^2 + nu^2); when it fails
    the result is marked not applicable rather than asserted.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidInput("delta must lie in (0, 1)")
    hyp = e.mu ** 2 + e.nu ** 2 + e.mu * e.nu >= 0.5 * delta * e.norm2
    P = p_quantity(e)
    rhs = eta_of_delta(delta) * e.norm2 * e.traceless_norm2
    if not hyp:
        return LemmaCResult(False, P, rhs, math.inf if rhs == 0 else P / rhs, True)
    passed = P >= rhs * (1.0 - 1e-10) - 1e-300
    return LemmaCResult(True, P, rhs, math.inf if rhs == 0 else P / rhs, passed)


def _check_gj_args(e: EigenTriple, t: float, gamma: float, eps: float):
    if e.R <= 0.0:
        raise RequiresPositiveScalar("G and J require positive scalar curvature")
    if t >= 0.0:
        raise InvalidInput("ancient-time quantities require t < 0")
    if not 0.0 < eps <= 1.0:
        raise InvalidInput("eps must lie in (0, 1]")
    if gamma <= 0.0:
        raise InvalidInput("gamma must be positive")


def g_quantity(e: EigenTriple, t: float, gamma: float, eps: float) -> float:
    """G = |t|^(gamma eps / 2) |Rm0|^2 / R^(2 - eps)."""
    _check_gj_args(e, t, gamma, eps)
    return abs(t) ** (gamma * eps / 2.0) * e.traceless_norm2 / e.R ** (2.0 - eps)


def j_quantity(e: EigenTriple, t: float, gamma: float, eps: float) -> float:
    """J = |t|^(ge/2)/R^(3-e) [eps |Rm0|^2 (|Rm|^2 - gamma R/(4|t|)) - P]."""
    _check_gj_args(e, t, gamma, eps)
    inner = eps * e.traceless_norm2 * (e.norm2 - gamma * e.R / (4.0 * abs(t))) - p_quantity(e)
    return abs(t) ** (gamma * eps / 2.0) / e.R ** (3.0 - eps) * inner


@dataclass(frozen=True)
class DichotomyResult:
    classification: str       # "low_curvature" | "non_necklike" | "not_classified"
    J: float
    G: float
    bound: float              # the asserted upper bound for J (nan if unclassified)
    verified: bool
    delta_star: float
    rm_times_t: float


def dichotomy_check(e: EigenTriple, t: float, c: float, delta: float,
                    gamma: float, eps: float,
                    eta: Optional[float] = None) -> DichotomyResult:
    """Classify a point against the essential/necklike alternatives.

    Alternative 1 (low curvature): |Rm| |t| < c with c <= gamma/8 and
    nonnegative eigenvalues forces J <= -(gamma eps / (8|t|)) G.
    Alternative 2 (non-necklike): the squared relative deviation from every
    R(theta tensor theta) is at least delta, so the pinching estimate applies
    with eta(delta), and eps <= eta forces J <= -(gamma eps / (4|t|)) G.
    Neither holding is the valid "essential and necklike" outcome.
    """
    if eta is None:
        eta = eta_of_delta(delta)
    _check_gj_args(e, t, gamma, eps)
    if not 0.0 < delta < 1.0:
        raise InvalidInput("delta must lie in (0, 1)")
    rm = math.sqrt(e.norm2)
    J = j_quantity(e, t, gamma, eps)
    G = g_quantity(e, t, gamma, eps)
    d_star = necklike_delta(e)
    nonneg = min(e.lam, e.mu, e.nu) >= 0.0
    # Prefer the stronger (pinching) alternative when both apply.
    if d_star ** 2 >= delta and eps <= eta:
        bound = -gamma * eps / (4.0 * abs(t)) * G
        tol = 1e-12 * (abs(J) + abs(bound)) + 1e-300
        return DichotomyResult("non_necklike", J, G, bound, J <= bound + tol,
                               d_star, rm * abs(t))
    if rm * abs(t) < c and c <= gamma / 8.0 and nonneg:
        bound = -gamma * eps / (8.0 * abs(t)) * G
        tol = 1e-12 * (abs(J) + abs(bound)) + 1e-300
        return DichotomyResult("low_curvature", J, G, bound, J <= bound + tol,
                               d_star, rm * abs(t))
    return DichotomyResult("not_classified", J, G, float("nan"), True,
                           d_star, rm * abs(t))


# ---------------------------------------------------------------------------
# Reaction ODE
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    eigs: np.ndarray          # shape (len(t), 3)
    blown_up: bool
    blowup_estimate: Optional[float]

    def triple_at(self, i: int) -> EigenTriple:
        return EigenTriple(*self.eigs[i])


def _reaction_rhs(_t, y):
    lam, mu, nu = y
    return [lam * lam + mu * nu, mu * mu + lam * nu, nu * nu + lam * mu]


def integrate_curvature_ode(e0: EigenTriple, t_span, n_out: int = 400,
                            rtol: float = 1e-9, atol: float = 1e-12,
                            blowup: float = 1e12) -> Trajectory:
    """Integrate lambda' = lambda^2 + mu nu (and cyclic) over t_span.

    Stops at curvature blowup (max |eigenvalue| >= ``blowup``) and reports a
    rough blowup-time estimate from the dominant-eigenvalue growth law.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])

    def hit_blowup(_t, y):
        return blowup - float(np.max(np.abs(y)))

    hit_blowup.terminal = True
    sol = solve_ivp(_reaction_rhs, (t0, t1), list(e0.as_array()),
                    t_eval=np.linspace(t0, t1, n_out), rtol=rtol, atol=atol,
                    events=hit_blowup, dense_output=False)
    eigs = sol.y.T
    ts = sol.t
    blown = sol.status == 1
    est = None
    if blown and len(sol.t_events[0]):
        te = float(sol.t_events[0][0])
        lam_end = float(np.max(np.abs(sol.y_events[0][0])))
        est = te + 1.0 / lam_end
        ts = np.append(ts, te)
        eigs = np.vstack([eigs, sol.y_events[0][0]])
    return Trajectory(ts, eigs, blown, est)


@dataclass(frozen=True)
class TrajectoryGReport:
    t: np.ndarray
    G: np.ndarray
    classifications: tuple
    decay_violations: int
    all_classified: bool
    sup_G_nonincreasing: bool


def trajectory_g_report(traj: Trajectory, gamma: float, eps: float, c: float,
                        delta: float, eta: Optional[float] = None,
                        rel_tol: float = 1e-3) -> TrajectoryGReport:
    """Check the classified decay bound for G along an integrated trajectory.

    At steps classified low-curvature the secant slope of G must respect
    dG/dt <= -(gamma eps / (4|t|)) G, at non-necklike steps the stronger
    -(gamma eps / (2|t|)) G (both follow from dG/dt <= 2J and the per-class J
    bounds); unclassified steps are reported but not bounded.
    """
    ts, Gs, classes = [], [], []
    for i, t in enumerate(traj.t):
        trip = traj.triple_at(i)
        if t >= 0 or trip.R <= 0:
            continue
        res = dichotomy_check(trip, float(t), c, delta, gamma, eps, eta=eta)
        ts.append(float(t))
        Gs.append(g_quantity(trip, float(t), gamma, eps))
        classes.append(res.classification)
    ts = np.asarray(ts)
    Gs = np.asarray(Gs)
    violations = 0
    coef = {"low_curvature": gamma * eps / 4.0, "non_necklike": gamma * eps / 2.0}
    for i in range(len(ts) - 1):
        k = coef.get(classes[i])
        if k is None:
            continue
        dt = ts[i + 1] - ts[i]
        secant = (Gs[i + 1] - Gs[i]) / dt
        bound = -k / abs(ts[i]) * Gs[i]
        if secant > bound + rel_tol * abs(bound) + 1e-300:
            violations += 1
    sup_ok = bool(np.all(np.diff(Gs) <= 1e-12 * np.maximum(Gs[:-1], 1e-300)))
    return TrajectoryGReport(ts, Gs, tuple(classes), violations,
                             all(c != "not_classified" for c in classes), sup_ok)


# ---------------------------------------------------------------------------
# Vectorized randomized sweeps
# ---------------------------------------------------------------------------

def random_triples(count: int, seed: int = 0, scale: float = 1.0,
                   mixed_signs: bool = True) -> np.ndarray:
    """(count, 3) eigenvalue samples sorted by |.| descending per row."""
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0.0, scale, size=(count, 3))
    if mixed_signs:
        vals *= rng.choice([-1.0, 1.0], size=(count, 3))
    order = np.argsort(-np.abs(vals), axis=1)
    return np.take_along_axis(vals, order, axis=1)


def lemma_c_sweep(count: int = 10 ** 6, seed: int = 0):
    """Randomized falsification of the pinching inequality.

    Each sorted triple is tested at its maximal admissible delta (the largest
    delta in (0,1) satisfying the proof hypothesis); returns (tested,
    violations, worst_ratio).
    """
    v = random_triples(count, seed)
    lam, mu, nu = v[:, 0], v[:, 1], v[:, 2]
    norm2 = lam ** 2 + mu ** 2 + nu ** 2
    hyp_lhs = mu ** 2 + nu ** 2 + mu * nu
    with np.errstate(invalid="ignore", divide="ignore"):
        delta_max = 2.0 * hyp_lhs / norm2
    delta = np.minimum(delta_max, 1.0 - 1e-12)
    ok = (delta > 0) & (norm2 > 0)
    lam, mu, nu = lam[ok], mu[ok], nu[ok]
    delta, norm2 = delta[ok], norm2[ok]
    P = (lam ** 2 * (mu - nu) ** 2 + mu ** 2 * (lam - nu) ** 2
         + nu ** 2 * (lam - mu) ** 2)
    tr2 = ((lam - mu) ** 2 + (lam - nu) ** 2 + (mu - nu) ** 2) / 3.0
    rhs = delta / (96.0 * (3.0 - delta)) * norm2 * tr2
    bad = P < rhs * (1.0 - 1e-10) - 1e-300
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(rhs > 0, P / rhs, np.inf)
    worst = float(np.min(ratios)) if ratios.size else math.inf
    return int(ok.sum()), int(bad.sum()), worst


def dichotomy_sweep(count: int = 10 ** 4, seed: int = 0, gamma: float = 1.0,
                    eps: Optional[float] = None, c: Optional[float] = None,
                    delta: float = 0.1):
    """Randomized verification of the per-alternative J bounds.

    Returns (classified_count, violations, by_class dict).  Triples are drawn
    with mixed magnitudes and times; alternative 1 draws nonnegative triples
    scaled to low curvature, alternative 2 uses the squared-deviation test.
    """
    if c is None:
        c = gamma / 8.0
    eta = eta_of_delta(delta)
    if eps is None:
        eps = eta
    if eps > eta:
        raise InvalidInput("need eps <= eta(delta) for the pinching alternative")
    rng = np.random.default_rng(seed)
    classified = 0
    violations = 0
    by_class = {"low_curvature": 0, "non_necklike": 0, "not_classified": 0}
    # Vectorized generation; per-sample checks through the scalar API would
    # be slow, so the bound algebra is replicated with arrays here.
    v = random_triples(count, seed, mixed_signs=True)
    scales = 10.0 ** rng.uniform(-3, 3, count)
    v = v * scales[:, None]
    ts = -(10.0 ** rng.uniform(-2, 4, count))
    lam, mu, nu = v[:, 0], v[:, 1], v[:, 2]
    R = lam + mu + nu
    norm2 = lam ** 2 + mu ** 2 + nu ** 2
    tr2 = ((lam - mu) ** 2 + (lam - nu) ** 2 + (mu - nu) ** 2) / 3.0
    P = (lam ** 2 * (mu - nu) ** 2 + mu ** 2 * (lam - nu) ** 2
         + nu ** 2 * (lam - mu) ** 2)
    posR = R > 0
    sorted_vals = np.sort(v, axis=1)
    b, cc2 = sorted_vals[:, 0], sorted_vals[:, 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        dstar2 = 2.0 * (b * b + cc2 * cc2 + b * cc2) / norm2
        tpow = np.abs(ts) ** (gamma * eps / 2.0)
        G = tpow * tr2 / R ** (2.0 - eps)
        J = tpow / R ** (3.0 - eps) * (eps * tr2 * (norm2 - gamma * R / (4.0 * np.abs(ts))) - P)
    nonneg = np.min(v, axis=1) >= 0
    alt2 = posR & (dstar2 >= delta)
    alt1 = posR & ~alt2 & nonneg & (np.sqrt(norm2) * np.abs(ts) < c)
    rest = posR & ~alt1 & ~alt2
    tol1 = 1e-12 * (np.abs(J) + np.abs(G / np.abs(ts))) + 1e-300
    bad1 = alt1 & (J > -gamma * eps / (8.0 * np.abs(ts)) * G + tol1)
    bad2 = alt2 & (J > -gamma * eps / (4.0 * np.abs(ts)) * G + tol1)
    classified = int(alt1.sum() + alt2.sum())
    violations = int(bad1.sum() + bad2.sum())
    by_class["low_curvature"] = int(alt1.sum())
    by_class["non_necklike"] = int(alt2.sum())
    by_class["not_classified"] = int(rest.sum())
    return classified, violations, by_class
