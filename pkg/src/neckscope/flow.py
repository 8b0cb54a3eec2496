"""Rotationally symmetric Ricci flow in 3 dimensions.

The metric ansatz is g = psi(s,t)^2 ds^2 + phi(s,t)^2 g_{S^2} on a fixed
background coordinate s (no remeshing; the gauge coefficient psi evolves).
Writing derivatives in arclength r (dr = psi ds), the unmodified flow is

    phi_t = phi_rr - (1 - phi_r^2) / phi
    psi_t = 2 psi phi_rr / phi .

That system is only weakly parabolic (the psi direction is pure gauge) and
its fixed-coordinate discretization carries a grid-scale instability near
poles, so the integrator evolves the gauge-fixed form instead: the flow
composed with the diffeomorphisms generated by

    W = psi_s/psi^3 + 2 (rbar rbar_s - phi phi_s / psi^2) / phi^2,

where ds^2 + rbar(s)^2 g_{S^2} is a fixed background (the initial profile).
This adds phi_s W to phi_t and turns the psi equation parabolic; the psi_ss
coupling through phi cancels analytically and is implemented in cancelled
form.  Geometric diagnostics are unchanged (the solutions differ from the
unmodified flow by diffeomorphisms), W vanishes identically on round spheres
and cylinders with matching background, and the exactness anchors survive:
a(t)^2 = a0^2 - 4t for the round sphere, phi^2 = c^2 - 2t for the cylinder.

Space is discretized with 4th-order central differences (odd/even parity
ghosts across poles), time with explicit RK4 under the diffusive stability
bound dt <= cfl * min(psi h)^2.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import (
    InvalidInput,
    InvalidProfile,
    NotStored,
    SingularityReached,
    StepTooLarge,
)
from .necks import certify_neck
from .warped import WarpedMetric, make_metric, sampled_spec

__all__ = [
    "FlowState",
    "FlowHistory",
    "RescaledState",
    "NeckTrackPoint",
    "init_flow",
    "init_round_sphere",
    "init_dumbbell",
    "init_cylinder_segment",
    "init_flare",
    "init_capped_tube",
    "step",
    "run_flow",
    "rescale_at",
    "track_neck",
    "metric_from_state",
    "cfl_limit",
]

CFL_BOUND = 0.4
POLE_REGULARITY_TOL = 1e-4


@dataclass(frozen=True)
class FlowState:
    """Discretized warp/gauge profile at one time instant.

    ``background`` holds (rbar, rbar_s, rbar_ss) for the gauge-fixing vector
    field; ``None`` selects the unmodified (weakly parabolic) flow.
    """

    s: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    t: float
    topology: str             # "sphere" | "tube" | "noncompact"
    background: Optional[tuple] = None

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0])

    def poles(self):
        if self.topology == "sphere":
            return (0, len(self.s) - 1)
        if self.topology == "noncompact":
            return (0,)
        return ()

    # -- diagnostics ---------------------------------------------------------
    def curvatures(self):
        """(K_rad, K_sph) on interior nodes (poles excluded)."""
        phi_r, phi_rr = _arclength_derivs(self)
        inner = slice(1, -1) if self.topology != "tube" else slice(2, -2)
        phi = self.phi[inner]
        K_rad = -phi_rr[inner] / phi
        K_sph = (1.0 - phi_r[inner] ** 2) / phi ** 2
        return K_rad, K_sph

    def neck_phi(self) -> float:
        """Minimum warp over interior local minima (the waist); inf if none.

        Near-pole nodes decrease to zero by construction, so the bare grid
        minimum is meaningless for sphere-like topologies.
        """
        phi = self.phi
        inner = phi[2:-2]
        is_min = (inner <= phi[1:-3]) & (inner <= phi[3:-1])
        if self.topology == "tube":
            return float(np.min(phi))
        if not np.any(is_min):
            return math.inf
        return float(np.min(inner[is_min]))

    def diagnostics(self) -> dict:
        K_rad, K_sph = self.curvatures()
        R = 2.0 * (2.0 * K_rad + K_sph)
        K_sup = float(np.max(np.maximum(K_rad, K_sph)))
        out = {
            "t": self.t,
            "R_max": float(np.max(R)),
            "K_sup": K_sup,
            "min_phi": float(np.min(self.phi[self._interior()])),
            "neck_phi": self.neck_phi(),
            "inj_lower": math.pi / math.sqrt(K_sup) if K_sup > 0 else math.inf,
        }
        out["pole_regularity"] = self.pole_regularity()
        return out

    def _interior(self):
        return slice(1, -1) if self.topology != "tube" else slice(None)

    def pole_regularity(self) -> float:
        """max | |phi_r| - 1 | over poles (0 when there are none)."""
        worst = 0.0
        h = self.h
        for i in self.poles():
            if i == 0:
                d = (-25 * self.phi[0] + 48 * self.phi[1] - 36 * self.phi[2]
                     + 16 * self.phi[3] - 3 * self.phi[4]) / (12 * h)
                worst = max(worst, abs(abs(d / self.psi[0]) - 1.0))
            else:
                d = (25 * self.phi[-1] - 48 * self.phi[-2] + 36 * self.phi[-3]
                     - 16 * self.phi[-4] + 3 * self.phi[-5]) / (12 * h)
                worst = max(worst, abs(abs(d / self.psi[-1]) - 1.0))
        return worst

    def arclength(self) -> np.ndarray:
        return cumulative_simpson(self.psi, x=self.s, initial=0.0)


def _parity_extend(f: np.ndarray, topology: str, odd: bool):
    """Two ghost nodes on each side: parity across poles, reflection elsewhere.

    Non-pole ends hold a fixed Dirichlet band whose time derivatives are
    zeroed, so their ghost values never influence the evolution; plain
    reflection keeps the stencil arithmetic finite there.
    """
    n = len(f)
    g = np.empty(n + 4)
    g[2:-2] = f
    sign = -1.0 if odd else 1.0
    if topology in ("sphere", "noncompact"):
        g[0] = sign * f[2]
        g[1] = sign * f[1]
    else:
        g[0], g[1] = f[2], f[1]
    if topology == "sphere":
        g[-1] = sign * f[-3]
        g[-2] = sign * f[-2]
    else:
        g[-1], g[-2] = f[-3], f[-2]
    return g


def _derivs_4th(f: np.ndarray, h: float, topology: str, odd: bool):
    g = _parity_extend(f, topology, odd)
    fs = (-g[4:] + 8 * g[3:-1] - 8 * g[1:-3] + g[:-4]) / (12 * h)
    fss = (-g[4:] + 16 * g[3:-1] - 30 * g[2:-2] + 16 * g[1:-3] - g[:-4]) / (12 * h * h)
    return fs, fss


def _arclength_derivs(state: FlowState):
    h = state.h
    phi_s, phi_ss = _derivs_4th(state.phi, h, state.topology, odd=True)
    psi_s, _ = _derivs_4th(state.psi, h, state.topology, odd=False)
    psi = state.psi
    phi_r = phi_s / psi
    phi_rr = phi_ss / psi ** 2 - phi_s * psi_s / psi ** 3
    return phi_r, phi_rr


def _rhs(phi, psi, h, topology, background):
    phi_s, phi_ss = _derivs_4th(phi, h, topology, odd=True)
    psi_s, psi_ss = _derivs_4th(psi, h, topology, odd=False)
    phi_rr = phi_ss / psi ** 2 - phi_s * psi_s / psi ** 3
    phi_r2 = (phi_s / psi) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        phi_t = phi_rr - (1.0 - phi_r2) / phi
        if background is None:
            psi_t = 2.0 * psi * phi_rr / phi
        else:
            rb, rb_s, rb_ss = background
            W = psi_s / psi ** 3 + 2.0 * (rb * rb_s - phi * phi_s / psi ** 2) / phi ** 2
            phi_t = phi_t + phi_s * W
            # 2 psi phi_rr/phi + psi W_s with the phi_ss coupling cancelled
            # analytically (this is what makes the system parabolic).
            psi_t = (psi_ss / psi ** 2 - 3.0 * psi_s ** 2 / psi ** 3
                     + 2.0 * phi_s * psi_s / (phi * psi ** 2)
                     + 2.0 * phi_s ** 2 / (phi ** 2 * psi)
                     + psi_s * W
                     + 2.0 * psi * (rb_s ** 2 + rb * rb_ss) / phi ** 2
                     - 4.0 * psi * rb * rb_s * phi_s / phi ** 3)
    # Pole nodes: phi pinned at 0; psi_t by even extrapolation from interior.
    if topology in ("sphere", "noncompact"):
        phi_t[0] = 0.0
        psi_t[0] = (4.0 * psi_t[1] - psi_t[2]) / 3.0
    if topology == "sphere":
        phi_t[-1] = 0.0
        psi_t[-1] = (4.0 * psi_t[-2] - psi_t[-3]) / 3.0
    if topology in ("tube", "noncompact"):
        # Hold the outer boundary band fixed (Dirichlet far field).
        phi_t[-2:] = 0.0
        psi_t[-2:] = 0.0
        if topology == "tube":
            phi_t[:2] = 0.0
            psi_t[:2] = 0.0
    return phi_t, psi_t


def cfl_limit(state: FlowState) -> float:
    """Diffusive stability bound CFL_BOUND * min(psi h)^2."""
    return CFL_BOUND * float(np.min(state.psi) * state.h) ** 2


def step(state: FlowState, dt: float) -> FlowState:
    """One explicit RK4 step; raises StepTooLarge above the CFL bound and
    SingularityReached if the warp stops being positive in the interior."""
    if dt <= 0:
        raise InvalidInput("dt must be positive")
    if dt > cfl_limit(state) * (1.0 + 1e-12):
        raise StepTooLarge(f"dt={dt:g} exceeds CFL bound {cfl_limit(state):g}")
    h, topo, bg = state.h, state.topology, state.background
    p, q = state.phi, state.psi
    k1p, k1q = _rhs(p, q, h, topo, bg)
    k2p, k2q = _rhs(p + 0.5 * dt * k1p, q + 0.5 * dt * k1q, h, topo, bg)
    k3p, k3q = _rhs(p + 0.5 * dt * k2p, q + 0.5 * dt * k2q, h, topo, bg)
    k4p, k4q = _rhs(p + dt * k3p, q + dt * k3q, h, topo, bg)
    phi_new = p + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
    psi_new = q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
    interior = slice(1, -1) if topo != "tube" else slice(None)
    if not np.all(np.isfinite(phi_new)) or np.any(phi_new[interior] <= 0.0):
        loc = int(np.argmin(np.where(np.isfinite(phi_new), phi_new, -np.inf)))
        raise SingularityReached("warp collapsed", location=float(state.s[loc]),
                                 time=state.t + dt)
    return FlowState(state.s, psi_new, phi_new, state.t + dt, topo, bg)


# ---------------------------------------------------------------------------
# Initial profiles
# ---------------------------------------------------------------------------

def _validate_profile(state: FlowState) -> FlowState:
    if len(state.s) < 128:
        raise InvalidProfile("grid must have at least 128 nodes")
    interior = slice(1, -1) if state.topology != "tube" else slice(None)
    if np.any(state.phi[interior] <= 0.0):
        raise InvalidProfile("warp must be positive in the interior")
    if np.any(state.psi <= 0.0):
        raise InvalidProfile("gauge coefficient must be positive")
    for i in state.poles():
        if abs(state.phi[i]) > 1e-12:
            raise InvalidProfile("warp must vanish at poles")
    reg = state.pole_regularity()
    if reg > POLE_REGULARITY_TOL:
        raise InvalidProfile(f"pole regularity defect {reg:.2e} exceeds {POLE_REGULARITY_TOL}")
    return state


def init_round_sphere(a0: float = 1.0, grid: int = 512, deturck: bool = True) -> FlowState:
    s = np.linspace(0.0, math.pi, grid)
    bg = (np.sin(s), np.cos(s), -np.sin(s)) if deturck else None
    return _validate_profile(FlowState(s, np.full(grid, a0), a0 * np.sin(s), 0.0,
                                       "sphere", bg))


def init_dumbbell(A: float = 0.8, grid: int = 1024, deturck: bool = True) -> FlowState:
    """Pinched profile phi = sin(s) (1 - A sin^2 s); poles regular, waist 1 - A."""
    if not 0.0 < A < 1.0:
        raise InvalidProfile("dumbbell parameter must lie in (0, 1)")
    s = np.linspace(0.0, math.pi, grid)
    sn, cs = np.sin(s), np.cos(s)
    phi = sn * (1.0 - A * sn ** 2)
    dphi = cs * (1.0 - 3.0 * A * sn ** 2)
    d2phi = -sn * (1.0 - 3.0 * A * sn ** 2) - 6.0 * A * sn * cs ** 2
    bg = (phi.copy(), dphi, d2phi) if deturck else None
    return _validate_profile(FlowState(s, np.ones(grid), phi, 0.0, "sphere", bg))


def init_cylinder_segment(c: float = 1.0, length: float = 8.0, grid: int = 512,
                          deturck: bool = True) -> FlowState:
    s = np.linspace(0.0, length, grid)
    z = np.zeros(grid)
    bg = (np.full(grid, c), z, z) if deturck else None
    return _validate_profile(FlowState(s, np.ones(grid), np.full(grid, c), 0.0,
                                       "tube", bg))


def init_flare(sigma: float = 0.3, s_max: float = 30.0, grid: int = 1024,
               deturck: bool = True) -> FlowState:
    s = np.linspace(0.0, s_max, grid)
    phi = sigma * s + (1.0 - sigma) * (-np.expm1(-s))
    dphi = sigma + (1.0 - sigma) * np.exp(-s)
    d2phi = -(1.0 - sigma) * np.exp(-s)
    bg = (phi.copy(), dphi, d2phi) if deturck else None
    return _validate_profile(FlowState(s, np.ones(grid), phi, 0.0, "noncompact", bg))


def init_capped_tube(waist: float = 0.2, bulb: float = 0.5, tube_len: float = 3.0,
                     blend: float = 0.6, grid: int = 2048,
                     deturck: bool = True) -> FlowState:
    """Two spherical bulbs joined by a long thin tube (a long-neck dumbbell).

    The tube, being close to a round cylinder over many radii, shrinks like
    one while the fatter bulbs survive, so the rescaled waist certifies as a
    long neck at moderate curvature -- the signature the short dumbbell only
    reaches at astronomically large curvature.
    """
    p = 0.5 * math.pi * bulb
    S = 2.0 * (p + blend) + tube_len
    s = np.linspace(0.0, S, grid)

    def smoothstep(x):
        x = np.clip(x, 0.0, 1.0)
        return x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)

    phi = np.empty_like(s)
    left_cap = s <= p
    phi[left_cap] = bulb * np.sin(s[left_cap] / bulb)
    left_blend = (s > p) & (s <= p + blend)
    phi[left_blend] = bulb + (waist - bulb) * smoothstep((s[left_blend] - p) / blend)
    middle = (s > p + blend) & (s < S - p - blend)
    phi[middle] = waist
    right_blend = (s >= S - p - blend) & (s < S - p)
    phi[right_blend] = bulb + (waist - bulb) * smoothstep((S - p - s[right_blend]) / blend)
    right_cap = s >= S - p
    phi[right_cap] = bulb * np.sin((S - s[right_cap]) / bulb)

    h = s[1] - s[0]
    dphi = np.gradient(phi, h, edge_order=2)
    d2phi = np.gradient(dphi, h, edge_order=2)
    bg = (phi.copy(), dphi, d2phi) if deturck else None
    return _validate_profile(FlowState(s, np.ones(grid), phi, 0.0, "sphere", bg))


def init_flow(profile: str, grid: int = 512, **params) -> FlowState:
    """Factory keyed on profile name: round | dumbbell | cylinder | flare."""
    builders = {
        "round": lambda: init_round_sphere(params.get("a0", 1.0), grid),
        "dumbbell": lambda: init_dumbbell(params.get("A", 0.8), grid),
        "cylinder": lambda: init_cylinder_segment(params.get("c", 1.0),
                                                  params.get("length", 8.0), grid),
        "flare": lambda: init_flare(params.get("sigma", 0.3),
                                    params.get("s_max", 30.0), grid),
    }
    if profile not in builders:
        raise InvalidProfile(f"unknown profile {profile!r}")
    return builders[profile]()


# ---------------------------------------------------------------------------
# Runs and history
# ---------------------------------------------------------------------------

@dataclass
class FlowHistory:
    snapshots: list = field(default_factory=list)   # FlowState
    series: list = field(default_factory=list)      # diagnostics dicts
    stop_reason: str = ""

    def snapshot_at(self, t: float, tol: float = 1e-9) -> FlowState:
        for st in self.snapshots:
            if abs(st.t - t) <= tol * max(1.0, abs(t)):
                return st
        raise NotStored(f"no snapshot at t={t}")

    def times(self):
        return [st.t for st in self.snapshots]


def run_flow(state: FlowState, stop_rmax: float = math.inf,
             stop_minphi: float = 1e-3, max_steps: int = 2_000_000,
             cfl: float = 0.35, snapshot_every: int = 0,
             wall_clock: Optional[float] = None,
             callback: Optional[Callable] = None,
             diag_every: int = 25) -> FlowHistory:
    """Advance the flow until a stop criterion fires.

    Stop criteria: scalar curvature maximum, minimum warp threshold, step
    budget, or wall-clock budget.  Snapshots keep full states every
    ``snapshot_every`` steps (0 keeps only first/last); light diagnostics are
    appended every ``diag_every`` steps.
    """
    hist = FlowHistory()
    hist.snapshots.append(state)
    hist.series.append(state.diagnostics())
    t_start = _time.time()
    for k in range(max_steps):
        dt = cfl * float(np.min(state.psi) * state.h) ** 2
        try:
            state = step(state, dt)
        except SingularityReached:
            hist.stop_reason = "singularity"
            break
        if snapshot_every and (k + 1) % snapshot_every == 0:
            hist.snapshots.append(state)
        if (k + 1) % diag_every == 0:
            d = state.diagnostics()
            hist.series.append(d)
            if callback is not None:
                callback(state, d)
            if d["R_max"] >= stop_rmax:
                hist.stop_reason = "rmax"
                break
            if d["neck_phi"] <= stop_minphi:
                hist.stop_reason = "minphi"
                break
        if wall_clock is not None and _time.time() - t_start > wall_clock:
            hist.stop_reason = "wall_clock"
            break
    else:
        hist.stop_reason = "max_steps"
    if hist.snapshots[-1] is not state:
        hist.snapshots.append(state)
    hist.series.append(state.diagnostics())
    return hist


# ---------------------------------------------------------------------------
# Rescaling and neck tracking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RescaledState:
    state: FlowState
    base_index: int
    base_time: float
    factor: float             # R(x_i, t_i)

    @property
    def base_scalar_curvature(self) -> float:
        K_rad, K_sph = self.state.curvatures()
        R = 2.0 * (2.0 * K_rad + K_sph)
        i = min(max(self.base_index - 1, 0), len(R) - 1)
        return float(R[i])


def _scalar_curvature_at(state: FlowState, index: int) -> float:
    K_rad, K_sph = state.curvatures()
    R = 2.0 * (2.0 * K_rad + K_sph)
    return float(R[min(max(index - 1, 0), len(R) - 1)])


def rescale_at(history: FlowHistory, index: int, t_i: float) -> RescaledState:
    """Zoom the stored state at time t_i so R(base point) becomes 1.

    Metric coefficients are multiplied by sqrt(R); the rescaled state sits at
    time 0 of the reparametrized flow g_i(t) = R * g(t_i + t / R).
    """
    snap = history.snapshot_at(t_i)
    factor = _scalar_curvature_at(snap, index)
    if factor <= 0:
        raise InvalidInput("base scalar curvature must be positive to rescale")
    root = math.sqrt(factor)
    new = FlowState(snap.s, root * snap.psi, root * snap.phi, 0.0,
                    snap.topology, snap.background)
    return RescaledState(new, index, t_i, factor)


def metric_from_state(state: FlowState, pole_margin: int = 2) -> WarpedMetric:
    """Sampled warped metric in the arclength parameter of the state."""
    r = state.arclength()
    phi = state.phi
    pole_min = state.topology in ("sphere", "noncompact")
    pole_max = state.topology == "sphere"
    return make_metric(sampled_spec(r, phi, n=3, pole_min=pole_min, pole_max=pole_max))


@dataclass(frozen=True)
class NeckTrackPoint:
    t: float
    R_max: float
    center_s: float
    eps_at_L: Optional[float]     # certified eps on the +-L window (None if absent)
    L_at_eps: Optional[float]     # largest half-length reaching eps_target
    delta_star: float             # necklike deviation at the neck center


def _neck_center_index(state: FlowState) -> int:
    """Index of the waist: deepest interior local minimum of the warp.

    Ties (flat plateaus, symmetric profiles) break toward the grid middle;
    falls back to the interior argmin when no local minimum exists (round
    profiles, monotone flares).
    """
    phi = state.phi
    inner = phi[2:-2]
    is_min = (inner <= phi[1:-3]) & (inner <= phi[3:-1])
    if np.any(is_min):
        cand = np.nonzero(is_min)[0]
        best = np.min(inner[cand])
        near_best = cand[inner[cand] <= best * (1 + 1e-12)]
        mid = len(phi) // 2 - 2
        return int(near_best[np.argmin(np.abs(near_best - mid))] + 2)
    return int(np.argmin(phi[5:-5])) + 5


def track_neck(history: FlowHistory, k: int = 1, L_target: float = 10.0,
               eps_target: float = 0.1, max_snapshots: int = 40) -> list:
    """Certified neck quality at the minimum-warp point per stored snapshot.

    Each snapshot is rescaled at its neck center, the window of z-half-length
    L_target about the center is certified (None when it does not fit), and
    the largest half-length achieving eps_target is bisected.
    """
    from .pinching import eigenvalues_from_sectional, necklike_delta

    out = []
    snaps = history.snapshots
    if len(snaps) > max_snapshots:
        idx = np.unique(np.linspace(0, len(snaps) - 1, max_snapshots).astype(int))
        snaps = [snaps[i] for i in idx]
    for snap in snaps:
        diag = snap.diagnostics()
        ci = _neck_center_index(snap)
        R_ci = _scalar_curvature_at(snap, ci)
        if R_ci <= 0:
            out.append(NeckTrackPoint(snap.t, diag["R_max"], float(snap.s[ci]),
                                      None, None, float("nan")))
            continue
        root = math.sqrt(R_ci)
        resc = FlowState(snap.s, root * snap.psi, root * snap.phi, 0.0,
                         snap.topology, snap.background)
        m = metric_from_state(resc)
        r = resc.arclength()
        # z-coordinate about the center, on the pole-free interior (z has a
        # logarithmic divergence at poles, so pole nodes must stay out).
        sl = slice(None) if resc.topology == "tube" else slice(1, -1)
        s_in, r_in = resc.s[sl], r[sl]
        z = cumulative_simpson(resc.psi[sl] / resc.phi[sl], x=s_in, initial=0.0)
        z = z - float(np.interp(resc.s[ci], s_in, z))
        margin = 3
        z_lo, z_hi = float(z[margin]), float(z[-margin - 1])

        def window_for(L):
            if z_lo > -L or z_hi < L:
                return None
            t0 = float(np.interp(-L, z, r_in))
            t1 = float(np.interp(L, z, r_in))
            return t0, t1

        def eps_of(L):
            w = window_for(L)
            if w is None:
                return None
            try:
                return certify_neck(m, w[0], w[1], k).eps
            except Exception:
                return None

        eps_at_L = eps_of(L_target)
        # Largest half-length achieving eps_target.
        L_at_eps = None
        if eps_of(0.5) is not None and eps_of(0.5) <= eps_target:
            lo, hi = 0.5, 1.0
            while True:
                e = eps_of(hi)
                if e is None or e > eps_target:
                    break
                lo, hi = hi, 2.0 * hi
                if hi > 1e4:
                    break
            for _ in range(24):
                mid = 0.5 * (lo + hi)
                e = eps_of(mid)
                if e is not None and e <= eps_target:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 0.01 * hi:
                    break
            L_at_eps = lo
        K_rad, K_sph = resc.curvatures()
        i = min(max(ci - 1, 0), len(K_rad) - 1)
        trip = eigenvalues_from_sectional(float(K_rad[i]), float(K_sph[i]))
        try:
            dstar = necklike_delta(trip)
        except Exception:
            dstar = float("nan")
        out.append(NeckTrackPoint(snap.t, diag["R_max"], float(snap.s[ci]),
                                  eps_at_L, L_at_eps, dstar))
    return out
