import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import random_unit
from neckscope.errors import (
    ExitedDomain,
    InvalidInput,
    InvalidRange,
    InvalidSpec,
    OutOfDomain,
    RequiresPole,
)
from neckscope.warped import (
    DistanceField,
    Point,
    Tangent,
    annulus_volume_mc,
    ball_volume,
    curvature_arrays,
    curvature_at,
    cylinder_spec,
    distance,
    dumbbell_spec,
    flare_spec,
    flat_spec,
    geodesic_shoot,
    make_metric,
    sampled_spec,
    sampled_spec_from_csv,
    scale_metric,
    sphere_spec,
    unit_sphere_volume,
)


# ---------------------------------------------------------------------------
# make_metric
# ---------------------------------------------------------------------------

def test_cylinder_constant_warp():
    m = make_metric(cylinder_spec(1.0))
    ts = np.linspace(-10, 10, 7)
    assert np.allclose(m.phi(ts), 1.0)
    assert np.allclose(m.dphi(ts), 0.0)


def test_sphere_warp_closed_form():
    m = make_metric(sphere_spec(2.0))
    ts = np.linspace(0.1, 2 * math.pi - 0.1, 9)
    assert np.allclose(m.phi(ts), 2.0 * np.sin(ts / 2.0))


def test_sampled_cone_spline_matches_closed_form():
    t = np.linspace(1.0, 50.0, 120)
    spec = sampled_spec(t, 0.5 * t)
    m = make_metric(spec)
    probe = np.linspace(2.0, 49.0, 300)
    assert np.max(np.abs(m.phi(probe) - 0.5 * probe)) < 1e-6


def test_sampled_csv_roundtrip(tmp_path):
    t = np.linspace(1.0, 20.0, 40)
    path = tmp_path / "warp.csv"
    with open(path, "w") as fh:
        fh.write("t,phi\n")
        for ti in t:
            fh.write(f"{float(ti)!r},{float(0.5 * ti)!r}\n")
    m = make_metric(sampled_spec_from_csv(path))
    assert abs(float(m.phi(10.0)) - 5.0) < 1e-9


def test_invalid_specs():
    with pytest.raises(InvalidSpec):
        make_metric(sampled_spec(np.linspace(0, 1, 5), np.ones(5)))  # too few
    with pytest.raises(InvalidSpec):
        flare_spec(1.5)
    with pytest.raises(InvalidSpec):
        # Negative warp in the interior.
        t = np.linspace(0.0, 10.0, 30)
        make_metric(sampled_spec(t, np.sin(t)))


def test_derivative_consistency_finite_differences():
    # phi', phi'' consistent with phi to 1e-8 relative on smooth presets.
    h = 1e-5
    for spec in (flare_spec(0.3, t_max=100), sphere_spec(2.0), dumbbell_spec(0.8)):
        m = make_metric(spec)
        ts = np.linspace(m.t_min + 0.2, m.t_max - 0.2, 25)
        fd1 = (m.phi(ts + h) - m.phi(ts - h)) / (2 * h)
        fd2 = (m.phi(ts + h) - 2 * m.phi(ts) + m.phi(ts - h)) / h ** 2
        scale1 = np.max(np.abs(fd1)) + 1.0
        scale2 = np.max(np.abs(fd2)) + 1.0
        assert np.max(np.abs(fd1 - m.dphi(ts))) / scale1 < 1e-8
        assert np.max(np.abs(fd2 - m.d2phi(ts))) / scale2 < 1e-4  # fd2 noise floor


# ---------------------------------------------------------------------------
# curvature_at
# ---------------------------------------------------------------------------

def test_flat_curvature_zero(flat):
    cs = curvature_at(flat, 3.0)
    assert cs.K_rad == 0.0 and cs.K_sph == 0.0 and cs.R == 0.0


def test_cylinder_curvature(cyl):
    cs = curvature_at(cyl, 0.7)
    assert cs.K_rad == pytest.approx(0.0, abs=1e-15)
    assert cs.K_sph == pytest.approx(1.0, rel=1e-12)
    assert cs.R == pytest.approx(2.0, rel=1e-12)


def test_sphere_curvature_quarter():
    m = make_metric(sphere_spec(2.0))
    cs = curvature_at(m, 1.3)
    assert cs.K_rad == pytest.approx(0.25, rel=1e-10)
    assert cs.K_sph == pytest.approx(0.25, rel=1e-10)


def test_scalar_curvature_identity_n3(flare03):
    # R = 2 (2 K_rad + K_sph) for n = 3.
    for t in (0.5, 3.0, 17.0):
        cs = curvature_at(flare03, t)
        assert cs.R == pytest.approx(2 * (2 * cs.K_rad + cs.K_sph), rel=1e-12)


def test_pole_limit_values():
    # At a smooth pole both sectional curvatures agree (limit -phi'''(0)).
    m = make_metric(sphere_spec(1.0))
    cs = curvature_at(m, 0.0)
    assert cs.K_rad == pytest.approx(1.0, rel=1e-6)
    assert cs.K_sph == pytest.approx(1.0, rel=1e-6)


def test_curvature_out_of_domain(flat):
    with pytest.raises(OutOfDomain):
        curvature_at(flat, 101.0)


def test_positive_curvature_presets():
    for spec in (sphere_spec(2.0), flare_spec(0.3, t_max=200), flare_spec(0.05, t_max=200)):
        m = make_metric(spec)
        ts = np.linspace(m.t_min + 1e-3, m.t_max - 1e-3, 400)
        K_rad, K_sph, R = curvature_arrays(m, ts)
        assert np.all(K_rad > 0)
        assert np.all(K_sph > 0)
        # K <= R pointwise under nonnegative curvature.
        assert np.all(np.maximum(K_rad, K_sph) <= R + 1e-13)


# ---------------------------------------------------------------------------
# distance
# ---------------------------------------------------------------------------

def test_flat_radial_distance(flat):
    assert distance(flat, Point(1.0, (1, 0, 0)), Point(2.0, (1, 0, 0))) == pytest.approx(1.0)


def test_cylinder_product_distance(cyl):
    th1 = (1.0, 0.0, 0.0)
    g = 1.2
    th2 = (math.cos(g), math.sin(g), 0.0)
    d = distance(cyl, Point(0.0, th1), Point(2.5, th2))
    assert d == pytest.approx(math.hypot(2.5, g), rel=1e-9)


def test_sphere_antipodal_distance(sphere1):
    p = Point(0.7, (1, 0, 0))
    q = Point(math.pi - 0.7, (-1, 0, 0))
    assert distance(sphere1, p, q) == pytest.approx(math.pi, rel=1e-7)


def test_flat_law_of_cosines(flat):
    rng = np.random.default_rng(11)
    for _ in range(12):
        t1, t2 = rng.uniform(0.5, 40, 2)
        g = rng.uniform(0.05, math.pi - 0.05)
        d = distance(flat, Point(t1, (1, 0, 0)),
                     Point(t2, (math.cos(g), math.sin(g), 0)))
        exact = math.sqrt(t1 ** 2 + t2 ** 2 - 2 * t1 * t2 * math.cos(g))
        assert d == pytest.approx(exact, rel=1e-6)


def test_sphere_geodesic_distance_formula(sphere1):
    # Unit S^3: d = arccos(cos t1 cos t2 + sin t1 sin t2 cos g).
    rng = np.random.default_rng(3)
    for _ in range(10):
        t1, t2 = rng.uniform(0.3, math.pi - 0.3, 2)
        g = rng.uniform(0.1, math.pi - 0.1)
        d = distance(sphere1, Point(t1, (1, 0, 0)),
                     Point(t2, (math.cos(g), math.sin(g), 0)))
        exact = math.acos(max(-1, min(1, math.cos(t1) * math.cos(t2)
                                      + math.sin(t1) * math.sin(t2) * math.cos(g))))
        assert d == pytest.approx(exact, rel=1e-6, abs=1e-9)


def test_triangle_inequality_presets(flat, cyl, flare03):
    rng = np.random.default_rng(5)
    for m in (flat, cyl, flare03):
        lo = m.t_min + 0.1 * (m.t_max - m.t_min)
        hi = m.t_max - 0.1 * (m.t_max - m.t_min)
        pts = [Point(float(rng.uniform(lo, hi)), tuple(random_unit(rng)))
               for _ in range(12)]
        D = {}
        for i in range(12):
            for j in range(i + 1, 12):
                D[i, j] = D[j, i] = distance(m, pts[i], pts[j])
        count = 0
        for i in range(12):
            for j in range(12):
                for k in range(12):
                    if len({i, j, k}) < 3:
                        continue
                    assert D[i, k] <= D[i, j] + D[j, k] + 1e-5
                    count += 1
        assert count >= 1000


def test_distance_scaling_covariance(flare03):
    lam = 2.7
    m2 = scale_metric(flare03, lam)
    rng = np.random.default_rng(9)
    for _ in range(6):
        t1, t2 = rng.uniform(1, 150, 2)
        th1, th2 = random_unit(rng), random_unit(rng)
        d1 = distance(flare03, Point(t1, tuple(th1)), Point(t2, tuple(th2)))
        d2 = distance(m2, Point(lam * t1, tuple(th1)), Point(lam * t2, tuple(th2)))
        assert d2 == pytest.approx(lam * d1, rel=1e-6)


# ---------------------------------------------------------------------------
# geodesic_shoot
# ---------------------------------------------------------------------------

def test_radial_shoot(flat):
    p, tan, drift = geodesic_shoot(flat, Point(1.0, (1, 0, 0)), Tangent(1.0, (0, 0, 0)), 4.0)
    assert p.t == pytest.approx(5.0)
    assert drift == 0.0


def test_cylinder_angular_loop(cyl):
    # Purely angular launch closes up after arclength 2 pi c.
    w = (0.0, 1.0, 0.0)
    p, tan, drift = geodesic_shoot(cyl, Point(0.0, (1, 0, 0)), Tangent(0.0, w),
                                   2 * math.pi)
    assert p.t == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(p.theta_vec, [1, 0, 0], atol=1e-9)


def test_flare_clairaut_drift(flare03):
    phi0 = float(flare03.phi(5.0))
    w = 0.6 / phi0
    tangent = Tangent(0.8, (0.0, w, 0.0))
    length = 40.0
    _, _, drift = geodesic_shoot(flare03, Point(5.0, (1, 0, 0)), tangent, length)
    assert drift / length < 1e-9


def test_shoot_exits_domain(flat):
    with pytest.raises(ExitedDomain) as exc:
        geodesic_shoot(flat, Point(98.0, (1, 0, 0)), Tangent(1.0, (0, 0, 0)), 5.0)
    assert exc.value.exit_point.t == pytest.approx(100.0)
    assert exc.value.exit_length == pytest.approx(2.0)


def test_shoot_through_pole(flat):
    p, tan, _ = geodesic_shoot(flat, Point(1.0, (1, 0, 0)), Tangent(-1.0, (0, 0, 0)), 3.0)
    assert p.t == pytest.approx(2.0)
    assert np.allclose(p.theta_vec, [-1, 0, 0])


# ---------------------------------------------------------------------------
# volumes
# ---------------------------------------------------------------------------

def test_flat_ball_volume(flat):
    assert ball_volume(flat, 1.0) == pytest.approx(4 * math.pi / 3, rel=1e-10)


def test_cylinder_linear_volume_growth():
    # Pole-capped tube: volume grows linearly, AVR-style ratio to r^3 -> 0.
    t = np.linspace(0, 400, 3000)
    phi = np.minimum(t, 1.0)
    m = make_metric(sampled_spec(t, np.where(t < 1, t, 1.0), pole_min=True))
    v = ball_volume(m, 300.0)
    assert v == pytest.approx(4 * math.pi * 300, rel=0.02)
    assert v / 300 ** 3 < 1e-3


def test_flare_avr_integral():
    sigma = 0.4
    m = make_metric(flare_spec(sigma, t_max=4000))
    r = 3500.0
    v = ball_volume(m, r)
    assert v / r ** 3 == pytest.approx(4 * math.pi * sigma ** 2 / 3, rel=0.01)


def test_ball_volume_requires_pole(cyl):
    with pytest.raises(RequiresPole):
        ball_volume(cyl, 5.0)


def test_annulus_mc_flat_exact(flat):
    est = annulus_volume_mc(flat, Point(0.0, (1, 0, 0)), 1.0, 2.0, 20000, seed=3)
    exact = 28 * math.pi / 3
    assert abs(est.value - exact) <= 3 * est.std_error + 1e-9


def test_annulus_mc_half_tube_oracle():
    # Half-infinite tube: membership volume per slab from the product metric,
    # Vol = int 2 pi (cos a - cos b) over the feasible t (exact 1D oracle).
    m = make_metric(cylinder_spec(1.0, t_min=-5.0, t_max=60.0))
    Q = Point(0.0, (1, 0, 0))
    R1, R2 = 20.0, 30.0

    def cap_area(x):
        if x <= 0:
            return 0.0
        if x >= math.pi:
            return 4 * math.pi
        return 2 * math.pi * (1 - math.cos(x))

    def slab(t):
        hi = math.sqrt(max(R2 ** 2 - t ** 2, 0.0))
        lo = math.sqrt(max(R1 ** 2 - t ** 2, 0.0))
        return cap_area(hi) - cap_area(lo)

    exact = quad(slab, -5.0, 30.0, limit=300)[0]
    est = annulus_volume_mc(m, Q, R1, R2, 60000, seed=5)
    assert abs(est.value - exact) <= 3 * est.std_error + 0.02 * exact
    # and the asymptotic slab law from the product metric
    assert est.value == pytest.approx(4 * math.pi * (R2 - R1), rel=0.05)


def test_annulus_mc_invalid_range(flat):
    with pytest.raises(InvalidRange):
        annulus_volume_mc(flat, Point(0.0, (1, 0, 0)), 2.0, 1.0, 2000)
    with pytest.raises(InvalidInput):
        annulus_volume_mc(flat, Point(0.0, (1, 0, 0)), 1.0, 2.0, 10)


def test_distance_field_matches_bvp(flare03):
    fld = DistanceField(flare03, t_Q=5.0, s_max=60.0, n_rays=2048, n_steps=8000,
                        nt=900, ng=450)
    rng = np.random.default_rng(2)
    for _ in range(8):
        t = float(rng.uniform(1.0, 50.0))
        g = float(rng.uniform(0.0, math.pi))
        x = Point(t, (math.cos(g), math.sin(g), 0.0))
        d_exact = distance(flare03, Point(5.0, (1, 0, 0)), x)
        d_field = float(fld.query(np.array([t]), np.array([g]))[0])
        assert abs(d_field - d_exact) < 4.0 * max(fld.dt_cell, 0.02)


def test_point_validation():
    with pytest.raises(InvalidInput):
        Point(1.0, (1.0, 1.0, 0.0))


def test_unit_sphere_volume_values():
    assert unit_sphere_volume(3) == pytest.approx(4 * math.pi, rel=1e-14)
    assert unit_sphere_volume(5) == pytest.approx(8 * math.pi ** 2 / 3, rel=1e-14)
