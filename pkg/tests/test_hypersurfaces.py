import math

import numpy as np
import pytest

from neckscope.asymptotics import ascr_profile
from neckscope.errors import HypothesisFail, NotSmooth, OddDimensionOnly
from neckscope.hypersurfaces import (
    area_lower_bound_check,
    gauss_bonnet_integrand,
    gb_remainder_constant,
    parallel_surface,
    q_bound_check,
    weingarten_bound_check,
)
from neckscope.warped import flare_spec, flat_spec, make_metric, sphere_spec


def test_flat_parallel_sphere(flat):
    s = parallel_surface(flat, 1.0, 2.0)
    assert s.principal_curvature == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_sphere_equator_totally_geodesic(sphere1):
    s = parallel_surface(sphere1, 0.4, math.pi / 2 - 0.4)
    assert abs(s.principal_curvature) < 1e-12


def test_flare_offset_closed_form(flare03):
    s = parallel_surface(flare03, 2.0, 4.0, enforce_window=False)
    expect = float(flare03.dphi(6.0)) / float(flare03.phi(6.0))
    assert s.principal_curvature == pytest.approx(expect, rel=1e-14)


def test_smoothness_window_enforced(flare03):
    with pytest.raises(NotSmooth) as exc:
        parallel_surface(flare03, 2.0, 4.0)
    assert exc.value.eps_bound is not None


def test_weingarten_flat_sharp(flat):
    rep = weingarten_bound_check(flat, 0.0, 3.0)
    assert rep.passed
    assert rep.kappa == pytest.approx(rep.upper, rel=1e-14)  # equality case


def test_weingarten_sphere_strict(sphere1):
    rep = weingarten_bound_check(sphere1, 0.1, math.pi / 4)
    assert rep.passed
    assert rep.margin_lower > 0.01 and rep.margin_upper > 0.01


def test_weingarten_flare_sweep(flare03):
    rng = np.random.default_rng(0)
    for _ in range(100):
        r = float(rng.uniform(0.5, 30.0))
        eps_k = None
        # keep rho inside the guaranteed smooth window
        from neckscope.hypersurfaces import _curvature_sup_outside
        ek = _curvature_sup_outside(flare03, r)
        rho = float(rng.uniform(0.05, 0.95 * math.pi / (2 * ek)))
        if r + rho >= flare03.t_max:
            continue
        rep = weingarten_bound_check(flare03, r, rho)
        assert rep.passed


def test_weingarten_hypothesis_fail(sphere1):
    with pytest.raises(HypothesisFail):
        weingarten_bound_check(sphere1, 0.3, 0.2, eps_K=0.1)


def test_gb_flat_n3(flat):
    s = parallel_surface(flat, 0.0, 2.5)
    rep = gauss_bonnet_integrand(flat, s)
    assert rep.G == pytest.approx(1 / 2.5 ** 2, rel=1e-14)
    assert rep.detL == pytest.approx(1 / 2.5 ** 2, rel=1e-14)
    assert rep.Q == 0.0
    assert rep.integral == pytest.approx(4 * math.pi, rel=1e-14)


def test_gb_totality_n3_presets():
    for spec in (flare_spec(0.3, t_max=100), flare_spec(0.05, t_max=100),
                 sphere_spec(2.0)):
        m = make_metric(spec)
        for r, rho in ((0.0, 1.0), (1.0, 3.0), (2.0, 0.5)):
            if r + rho >= m.t_max:
                continue
            s = parallel_surface(m, r, rho, enforce_window=False)
            rep = gauss_bonnet_integrand(m, s)
            assert rep.relative_defect < 1e-10


def test_gb_flat_n5():
    m = make_metric(flat_spec(n=5, t_max=100))
    s = parallel_surface(m, 0.0, 3.0)
    rep = gauss_bonnet_integrand(m, s)
    assert rep.integral == pytest.approx(8 * math.pi ** 2 / 3, rel=1e-12)
    assert rep.G == pytest.approx(3.0 ** -4, rel=1e-12)


def test_gb_even_dimension_rejected():
    m = make_metric(flat_spec(n=4, t_max=10))
    s = parallel_surface(m, 0.0, 1.0)
    with pytest.raises(OddDimensionOnly):
        gauss_bonnet_integrand(m, s)


def test_remainder_constants():
    assert gb_remainder_constant(3) == 1.0
    assert gb_remainder_constant(5) == 2.0


def test_remainder_constant_regeneration_symbolic():
    # c(n) = max coefficient of (K + x^2)^m - x^(2m) over the K^p x^(2(m-p))
    # monomials, p >= 1.
    import sympy as sp

    K, x = sp.symbols("K x", positive=True)
    for n in (3, 5, 7):
        m = (n - 1) // 2
        expr = sp.expand((K + x ** 2) ** m - x ** (2 * m))
        coeffs = [abs(expr.coeff(K, p).coeff(x, 2 * (m - p)))
                  for p in range(1, m + 1)]
        assert gb_remainder_constant(n) == float(max(coeffs))


def test_q_bound_n3_is_ambient_curvature(flare03):
    prof = ascr_profile(make_metric(flare_spec(0.3, t_max=3000)),
                        np.geomspace(0.5, 2900, 60))
    m = make_metric(flare_spec(0.3, t_max=3000))
    r = 10.0
    rho = prof.rho_at(r - 0.5)
    rep = q_bound_check(m, r, rho, 0.5, prof.a_at)
    surf = parallel_surface(m, r, rho, enforce_window=False)
    assert rep.Q_abs == pytest.approx(surf.ambient_K_sph, rel=1e-12)
    assert rep.passed and rep.c_n == 1.0


def test_q_and_area_sweep_n3_n5():
    for n in (3, 5):
        for sigma in (0.3, 0.1):
            m = make_metric(flare_spec(sigma, n=n, t_max=3000))
            prof = ascr_profile(m, np.geomspace(0.5, 2900, 60))
            for r in np.linspace(1.0, 30.0, 8):
                rho = min(prof.rho_at(r - 0.5), (m.t_max - r) * 0.5)
                arep = area_lower_bound_check(m, r, rho, 0.5, prof.a_at)
                qrep = q_bound_check(m, r, rho, 0.5, prof.a_at)
                assert arep.passed and qrep.passed
                # consistency: q-bound constant implies the area constant
                assert qrep.fitted_c <= qrep.c_n * (1 + 1e-9)


def test_area_bound_flat_trivial(flat):
    rep = area_lower_bound_check(flat, 2.0, 5.0, 0.5, lambda r: 0.0)
    # Area = omega (r+rho)^2 >= omega rho^2 / 1.
    assert rep.passed
    assert rep.area == pytest.approx(4 * math.pi * 49, rel=1e-12)
    assert rep.area_bound == pytest.approx(4 * math.pi * 25, rel=1e-12)


def test_area_bound_capped_cylinder_sigma_sweep():
    # Unit-tube flares with small sigma push the curvature ratio up while the
    # tube keeps area ~ 4 pi; the bound must keep holding and the margins get
    # recorded across the sweep.
    margins = []
    for sigma in (0.05, 0.02, 0.01):
        base = make_metric(flare_spec(sigma, t_max=3000))
        prof = ascr_profile(base, np.geomspace(0.5, 2900, 60))
        r = 10.0  # inside the unit-tube region (phi ~ 1 until t ~ 1/sigma)
        rho = prof.rho_at(r - 0.5)
        rep = area_lower_bound_check(base, r, rho, 0.5, prof.a_at)
        assert rep.passed
        margins.append(rep.area_margin)
    assert all(m > 0 for m in margins)
