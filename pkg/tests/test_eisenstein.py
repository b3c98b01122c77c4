import math

import numpy as np
import pytest

from shearlab.algebra import UTBPoint, compose, mobius_act
from shearlab.eisenstein import (ConvergenceError, EisensteinEvaluator,
                                 PairingError, completed_zeta,
                                 critical_exponent, eisenstein_sample,
                                 mu_eis, regularized_E1)
from shearlab.groups import PSL2Z, THIN4
from shearlab.measures import make_strip_bump

# mpmath, lattice sum with Kloosterman-free Fourier expansion, 30 digits
E_AT_I_S2 = 2.7842015453307912222


def test_dual_routes_hit_reference_value():
    four = eisenstein_sample(EisensteinEvaluator(route="fourier"), 1j, 2.0)
    coset = eisenstein_sample(
        EisensteinEvaluator(route="coset", max_height=2048.0), 1j, 2.0)
    assert four.route == "fourier" and coset.route == "coset"
    assert abs(four.value - E_AT_I_S2) < 1e-10
    assert abs(coset.value - E_AT_I_S2) < 1e-8
    assert abs(four.value - coset.value) < 1e-8


def test_auto_route_picks_by_group():
    lat = eisenstein_sample(EisensteinEvaluator(), 1j, 2.0)
    thin = eisenstein_sample(EisensteinEvaluator(spec=THIN4), 1j, 1.0)
    assert lat.route == "fourier"
    assert thin.route == "coset"


def test_constant_term_dominates_at_large_y():
    # all oscillating modes are Bessel-suppressed by e^(-2 pi y)
    y, s = 30.0, 2.0
    phi = completed_zeta(2.0 * s - 1.0) / completed_zeta(2.0 * s)
    want = y ** s + phi * y ** (1.0 - s)
    e = EisensteinEvaluator(route="fourier")
    got = e.value(complex(0.37, y), s)
    assert got == pytest.approx(want, rel=1e-13)


def test_lattice_automorphy():
    e = EisensteinEvaluator(route="fourier")
    gens = PSL2Z.gen_set()
    g = compose(gens[0], gens[1])
    for z in (0.31 + 1.2j, -0.05 + 0.77j):
        p = UTBPoint(z.real, z.imag, 0.0)
        q = mobius_act(g, p)
        assert e.value(q, 1.7) == pytest.approx(e.value(p, 1.7), abs=1e-8)


def test_thin_automorphy_within_reported_error():
    # the coset route's truncation floor dominates here: the partial-sum
    # doubling puts the value near 1e-4 of itself, and moving the point
    # by a generator redistributes mass across the cut
    e = EisensteinEvaluator(spec=THIN4, max_height=1024.0)
    g = THIN4.gen_set()[0]
    p = UTBPoint(0.21, 1.3, 0.0)
    a = eisenstein_sample(e, p, 1.0)
    b = eisenstein_sample(e, mobius_act(g, p), 1.0)
    assert a.est_error > 0.0
    assert abs(a.value - b.value) < 5e-4
    assert abs(a.value - b.value) < 10.0 * (a.est_error + b.est_error + 1e-9)


def test_thin_truncations_agree_at_reported_scale():
    e_lo = EisensteinEvaluator(spec=THIN4, max_height=512.0)
    e_hi = EisensteinEvaluator(spec=THIN4, max_height=1024.0)
    z = 0.3 + 1.1j
    a = eisenstein_sample(e_lo, z, 1.0)
    b = eisenstein_sample(e_hi, z, 1.0)
    assert abs(a.value - b.value) < 1e-3
    assert abs(a.value - b.value) < 10.0 * (a.est_error + b.est_error)


def test_thin_gate_tracks_critical_exponent():
    delta = critical_exponent(THIN4)
    assert delta == pytest.approx(0.7331, abs=0.02)
    assert critical_exponent(PSL2Z) == 1.0
    e = EisensteinEvaluator(spec=THIN4)
    with pytest.raises(ConvergenceError):
        eisenstein_sample(e, 1j, delta)  # below the +0.1 margin


def test_route_guards():
    e = EisensteinEvaluator(route="fourier")
    with pytest.raises(ConvergenceError):
        eisenstein_sample(e, 1j, 1.0)  # pole
    with pytest.raises(ConvergenceError):
        eisenstein_sample(e, 1j, 0.4)
    with pytest.raises(ConvergenceError):
        eisenstein_sample(EisensteinEvaluator(route="coset"), 1j, 1.0)
    with pytest.raises(ValueError):
        EisensteinEvaluator(route="spectral")
    with pytest.raises(IndexError):
        EisensteinEvaluator(cusp_index=5)
    with pytest.raises(ValueError):
        EisensteinEvaluator(max_height=8.0)
    with pytest.raises(ValueError):
        eisenstein_sample(e, 0.5 - 1.0j, 2.0)


def test_mode_cap_failure_is_loud():
    e = EisensteinEvaluator(route="fourier", max_mode=3)
    with pytest.raises(ConvergenceError):
        eisenstein_sample(e, 0.3 + 0.05j, 0.9)


# -- the regularized value at s = 1 ------------------------------------------


def test_regularized_value_is_invariant():
    gens = PSL2Z.gen_set()
    g = compose(gens[1], gens[0])
    for z in (0.2 + 1.5j, -0.4 + 0.9j, 0.05 + 3.0j):
        p = UTBPoint(z.real, z.imag, 0.0)
        assert regularized_E1(mobius_act(g, p)) == pytest.approx(
            regularized_E1(p), abs=1e-10)


def test_regularized_value_matches_pole_subtraction():
    # E(z, 1 + eps) = (3/pi)/eps + E~(z) + O(eps); a 2:1 Richardson pair
    # cancels the linear term
    e = EisensteinEvaluator(route="fourier")

    def reg_estimate(z, eps):
        f1 = e.value(z, 1.0 + eps) - 3.0 / (math.pi * eps)
        f2 = e.value(z, 1.0 + 0.5 * eps) - 3.0 / (math.pi * 0.5 * eps)
        return 2.0 * f2 - f1

    for z in (1j, 0.3 + 1.4j):
        assert reg_estimate(z, 1e-3) == pytest.approx(regularized_E1(z),
                                                      abs=1e-5)


def test_pole_residue():
    e = EisensteinEvaluator(route="fourier")
    for eps in (1e-3, 1e-4):
        f1 = eps * e.value(0.1 + 1.3j, 1.0 + eps)
        f2 = 0.5 * eps * e.value(0.1 + 1.3j, 1.0 + 0.5 * eps)
        assert 2.0 * f2 - f1 == pytest.approx(3.0 / math.pi, abs=1e-6)


def test_regularized_value_grows_linearly_up_the_cusp():
    # log|eta(iy)| ~ -pi y / 12 makes the regularized value ~ y + O(log y)
    ys = np.array([10.0, 20.0, 40.0, 80.0])
    vals = np.array([regularized_E1(complex(0.0, y)) for y in ys])
    slope = np.polyfit(ys, vals, 1)[0]
    assert abs(slope - 1.0) < 0.05


# -- pairings ----------------------------------------------------------------


def test_mu_eis_lattice_box(lattice_bump):
    assert mu_eis(lattice_bump, regularized=True) == pytest.approx(
        0.127459, abs=2e-5)


def test_mu_eis_thin_box(thin_bump):
    assert mu_eis(thin_bump, regularized=False) == pytest.approx(
        0.054831, abs=2e-5)


def test_mu_eis_guards(lattice_bump, thin_bump):
    with pytest.raises(PairingError):
        mu_eis(lattice_bump, regularized=False)
    with pytest.raises(PairingError):
        mu_eis(thin_bump, regularized=True)
    with pytest.raises(PairingError):
        mu_eis(make_strip_bump(), regularized=True)
