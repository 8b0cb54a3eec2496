import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neckscope.errors import (
    InvalidInput,
    RequiresPositiveScalar,
    UndefinedQuantity,
)
from neckscope.pinching import (
    EigenTriple,
    dichotomy_check,
    dichotomy_sweep,
    eigenvalues_from_sectional,
    eta_of_delta,
    g_quantity,
    integrate_curvature_ode,
    j_quantity,
    lemma_c_check,
    lemma_c_sweep,
    necklike_delta,
    p_quantity,
    random_triples,
    trajectory_g_report,
)

finite_eigs = st.floats(-100.0, 100.0, allow_nan=False)


# ---------------------------------------------------------------------------
# P quantity
# ---------------------------------------------------------------------------

def test_p_hand_cases():
    assert p_quantity(EigenTriple(1, 1, 1)) == 0.0
    assert p_quantity(EigenTriple(1, 0, 0)) == 0.0
    assert p_quantity(EigenTriple(1, 1, 0)) == 2.0


@settings(max_examples=300, deadline=None)
@given(finite_eigs, finite_eigs, finite_eigs)
def test_p_nonnegative(a, b, c):
    assert p_quantity(EigenTriple(a, b, c)) >= 0.0


def test_p_zero_characterization():
    # P = 0 iff round (l = m = n) or cylinder-type (two zeros).
    v = random_triples(10 ** 6, seed=8, scale=2.0)
    lam, mu, nu = v[:, 0], v[:, 1], v[:, 2]
    P = (lam ** 2 * (mu - nu) ** 2 + mu ** 2 * (lam - nu) ** 2
         + nu ** 2 * (lam - mu) ** 2)
    zero = P == 0.0
    round_pt = (lam == mu) & (mu == nu)
    cyl_pt = (np.abs(mu) == 0) & (np.abs(nu) == 0)
    assert np.array_equal(zero, round_pt | cyl_pt)
    # and explicit representatives
    assert p_quantity(EigenTriple(3.2, 3.2, 3.2)) == 0.0
    assert p_quantity(EigenTriple(-7.0, 0.0, 0.0)) == 0.0
    assert p_quantity(EigenTriple(2.0, 2.0, 1.9)) > 0.0


# ---------------------------------------------------------------------------
# necklike deviation
# ---------------------------------------------------------------------------

def test_necklike_hand_cases():
    assert necklike_delta(EigenTriple(1, 0, 0)) == 0.0
    assert necklike_delta(EigenTriple(1, 1, 1)) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert necklike_delta(EigenTriple(1, 1, 0)) == pytest.approx(1.0, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(finite_eigs, finite_eigs, finite_eigs,
       st.floats(1e-6, 1e6, allow_nan=False))
def test_necklike_scale_invariant(a, b, c, s):
    e = EigenTriple(a, b, c)
    if e.norm2 == 0.0:
        return
    d1 = necklike_delta(e)
    d2 = necklike_delta(e.scaled(s))
    assert d1 == pytest.approx(d2, rel=1e-12, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(finite_eigs, finite_eigs, finite_eigs, st.integers(-30, 30))
def test_necklike_scale_exact_for_binary_scales(a, b, c, k):
    e = EigenTriple(a, b, c)
    if e.norm2 == 0.0:
        return
    assert necklike_delta(e) == necklike_delta(e.scaled(2.0 ** k))


def test_necklike_zero_curvature_undefined():
    with pytest.raises(UndefinedQuantity):
        necklike_delta(EigenTriple(0, 0, 0))


# ---------------------------------------------------------------------------
# Pinching inequality
# ---------------------------------------------------------------------------

def test_lemma_c_hand_cases():
    r = lemma_c_check(EigenTriple(1, 1, 1), 1 - 1e-12)
    assert r.applicable and r.passed and r.P == 0.0 and r.rhs == pytest.approx(0.0)
    r = lemma_c_check(EigenTriple(1, 1, 0), 1 - 1e-12)
    assert r.applicable and r.passed
    assert r.P == 2.0
    assert r.rhs == pytest.approx((1 - 1e-12) / (96 * (3 - 1 + 1e-12)) * 2 * (2 / 3),
                                  rel=1e-6)
    assert r.rhs == pytest.approx(1 / 144, rel=1e-6)


def test_lemma_c_not_applicable():
    # (1, 0, 0): hypothesis fails for every delta in (0, 1).
    r = lemma_c_check(EigenTriple(1, 0, 0), 0.5)
    assert not r.applicable
    assert r.passed  # vacuously


def test_lemma_c_million_sweep():
    tested, violations, worst = lemma_c_sweep(10 ** 6, seed=3)
    assert violations == 0
    assert tested > 900_000
    assert worst >= 1.0


# ---------------------------------------------------------------------------
# G and J
# ---------------------------------------------------------------------------

def test_g_hand_case():
    assert g_quantity(EigenTriple(1, 1, 1), -1.0, 1.0, 0.5) == 0.0
    val = g_quantity(EigenTriple(1, 0, 0), -1.0, 1.0, 0.5)
    assert val == pytest.approx(2.0 / 3.0, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 10.0), st.floats(0.1, 0.9))
def test_g_homogeneity_in_scale(s, eps):
    e = EigenTriple(0.8, 0.5, 0.3)
    g1 = g_quantity(e, -2.0, 1.0, eps)
    g2 = g_quantity(e.scaled(s), -2.0, 1.0, eps)
    assert g2 == pytest.approx(s ** eps * g1, rel=1e-10)


def test_gj_preconditions():
    with pytest.raises(RequiresPositiveScalar):
        g_quantity(EigenTriple(-1, 0, 0), -1, 1, 0.5)
    with pytest.raises(InvalidInput):
        g_quantity(EigenTriple(1, 1, 1), 1.0, 1.0, 0.5)
    with pytest.raises(InvalidInput):
        j_quantity(EigenTriple(1, 1, 1), -1.0, 1.0, 1.5)


# ---------------------------------------------------------------------------
# dichotomy
# ---------------------------------------------------------------------------

def test_dichotomy_low_curvature_branch():
    gamma = 1.0
    c = gamma / 8.0
    e = EigenTriple(1.0, 0.0, 0.0).scaled(c / 2.0)  # |Rm| |t| = c/2 at t = -1
    res = dichotomy_check(e, -1.0, c, 0.5, gamma, eta_of_delta(0.5))
    assert res.classification == "low_curvature"
    assert res.verified


def test_dichotomy_round_branch():
    # Round points are maximally non-necklike at any scale.
    for s in (1e-3, 1.0, 1e3):
        e = EigenTriple(1.0, 1.0, 1.0).scaled(s)
        res = dichotomy_check(e, -1.0, 1.0 / 8.0, 0.9, 1.0, eta_of_delta(0.9))
        assert res.classification == "non_necklike"
        assert res.delta_star == pytest.approx(math.sqrt(2), rel=1e-12)
        assert res.verified


def test_dichotomy_essential_necklike_unclassified():
    # Near-cylinder, scaled so |Rm| |t| >= c: essential and necklike.
    gamma, delta = 1.0, 0.5
    e = EigenTriple(1.0, 0.05, 0.02)
    res = dichotomy_check(e, -1.0, gamma / 8.0, delta, gamma, eta_of_delta(delta))
    assert res.delta_star < math.sqrt(delta)
    assert res.rm_times_t >= gamma / 8.0
    assert res.classification == "not_classified"


def test_dichotomy_sweep_zero_violations():
    classified, violations, by_class = dichotomy_sweep(10 ** 4, seed=0)
    assert violations == 0
    assert classified >= 1000
    assert by_class["low_curvature"] > 0 and by_class["non_necklike"] > 0


# ---------------------------------------------------------------------------
# reaction ODE
# ---------------------------------------------------------------------------

def test_round_ode_law():
    tr = integrate_curvature_ode(EigenTriple(1, 1, 1), (0.0, 0.4))
    lam_exact = 1.0 / (1.0 - 2.0 * tr.t)
    rel = np.max(np.abs(tr.eigs[:, 0] - lam_exact) / lam_exact)
    assert rel < 1e-7
    assert np.allclose(tr.eigs[:, 0], tr.eigs[:, 1])


def test_cylinder_ode_invariant_ray():
    tr = integrate_curvature_ode(EigenTriple(1, 0, 0), (0.0, 0.9))
    lam_exact = 1.0 / (1.0 - tr.t)
    assert np.max(np.abs(tr.eigs[:, 0] - lam_exact) / lam_exact) < 1e-7
    assert np.max(np.abs(tr.eigs[:, 1:])) == 0.0


def test_blowup_detection():
    tr = integrate_curvature_ode(EigenTriple(1, 1, 1), (0.0, 2.0), blowup=1e10)
    assert tr.blown_up
    assert tr.blowup_estimate == pytest.approx(0.5, rel=1e-6)


def test_octant_preservation():
    rng = np.random.default_rng(4)
    for _ in range(10):
        e0 = EigenTriple(*rng.uniform(0.0, 1.0, 3))
        tr = integrate_curvature_ode(e0, (0.0, 0.3), blowup=1e8)
        assert np.all(tr.eigs >= -1e-10)


def test_trajectory_homogeneity():
    e0 = EigenTriple(0.3, 0.2, 0.1)
    s = 2.5
    tr_a = integrate_curvature_ode(e0, (0.0, 1.0), n_out=100)
    tr_b = integrate_curvature_ode(e0.scaled(s), (0.0, 1.0 / s), n_out=100)
    assert np.max(np.abs(tr_b.eigs - s * tr_a.eigs)) < 1e-6


def test_g_decay_low_curvature_trajectory():
    gamma, delta = 1.0, 0.1
    eta = eta_of_delta(delta)
    c = gamma / 8.0
    t0 = -1e4
    lam0 = c / (2.0 * abs(t0))
    traj = integrate_curvature_ode(EigenTriple(lam0, 1e-9 * lam0, 1e-9 * lam0),
                                   (t0, -1.0), n_out=600)
    rep = trajectory_g_report(traj, gamma, eta, c, delta)
    assert rep.all_classified
    assert rep.decay_violations == 0
    assert rep.sup_G_nonincreasing


def test_g_decay_near_round_trajectory():
    gamma, delta = 1.0, 0.1
    eta = eta_of_delta(delta)
    traj = integrate_curvature_ode(EigenTriple(1.05e-5, 1e-5, 0.95e-5),
                                   (-1e4, -100.0), n_out=600)
    rep = trajectory_g_report(traj, gamma, eta, gamma / 8.0, delta)
    assert rep.all_classified
    assert rep.decay_violations == 0
    assert rep.sup_G_nonincreasing


def test_eigenvalues_from_sectional_convention():
    # Round S^3 radius a: K = 1/a^2 everywhere, R = 6/a^2 = sum of operator
    # eigenvalues (2, 2, 2)/a^2.
    e = eigenvalues_from_sectional(0.25, 0.25)
    assert e.as_array() == pytest.approx([0.5, 0.5, 0.5])
    assert e.R == pytest.approx(6 * 0.25)
    # Unit cylinder: K_sph = 1, K_rad = 0 -> (2, 0, 0), R = 2.
    e = eigenvalues_from_sectional(0.0, 1.0)
    assert e.R == pytest.approx(2.0)
    assert necklike_delta(e) == 0.0
