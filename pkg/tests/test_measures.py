import dataclasses
import math

import numpy as np
import pytest
from scipy import integrate

from shearlab.algebra import UTBPoint, compose, mobius_act
from shearlab.groups import PSL2Z, THIN4
from shearlab import measures
from shearlab.measures import (RegistrationError, bump_profile,
                               equidistribution_regression,
                               fourier_coefficient, haar_mean,
                               horocycle_average, make_strip_bump, mu_T,
                               mu_T_strip)


def test_bump_profile_shape():
    assert bump_profile(0.0) == pytest.approx(1.0)
    assert bump_profile(1.0) == 0.0 == bump_profile(-1.0)
    assert bump_profile(3.7) == 0.0
    t = np.linspace(-0.99, 0.99, 101)
    v = bump_profile(t)
    assert np.all(v > 0) and np.all(v <= 1.0)
    assert np.allclose(v, v[::-1])  # even


def test_lattice_bump_is_automorphic(lattice_bump):
    rng = np.random.default_rng(7)
    gens = PSL2Z.gen_set()
    for _ in range(200):
        g = compose(gens[rng.integers(len(gens))],
                    gens[rng.integers(len(gens))])
        p = UTBPoint(rng.uniform(-2, 2), math.exp(rng.uniform(-2, 2)), 0.1)
        assert lattice_bump.evaluator(mobius_act(g, p)) == pytest.approx(
            lattice_bump.evaluator(p), abs=1e-12)


def test_thin_bump_is_automorphic(thin_bump):
    rng = np.random.default_rng(8)
    gens = THIN4.gen_set()
    for _ in range(200):
        g = gens[rng.integers(len(gens))]
        p = UTBPoint(rng.uniform(-2, 2), math.exp(rng.uniform(-1.5, 1.5)), 0.0)
        assert thin_bump.evaluator(mobius_act(g, p)) == pytest.approx(
            thin_bump.evaluator(p), abs=1e-9)


def test_registration_rejects_non_automorphic():
    fake = measures.TestFunction("broken", "lattice",
                                 evaluator=lambda p: p.x,
                                 batch=lambda x, y: np.asarray(x))
    with pytest.raises(RegistrationError):
        measures._register(fake)


def test_batch_matches_evaluator(lattice_bump):
    xs = np.array([0.1, -0.15, 0.3, 2.3])
    ys = np.array([1.5, 1.8, 0.4, 1.6])
    vals = lattice_bump.batch(xs, ys)
    for i in range(len(xs)):
        assert vals[i] == pytest.approx(
            lattice_bump.evaluator(UTBPoint(xs[i], ys[i], 0.0)), abs=1e-13)


def test_spec_attachment(lattice_bump, thin_bump):
    assert lattice_bump.spec() is PSL2Z
    assert thin_bump.spec() is THIN4
    strip = make_strip_bump()
    with pytest.raises(ValueError):
        strip.spec()


# -- shear integrals ---------------------------------------------------------


def test_mu_T_routes_agree(lattice_bump):
    # the spike engine takes over at |T| >= 8; force the generic panel
    # integrator on the same function and compare
    generic_only = dataclasses.replace(lattice_bump, profiles=None)
    for t in (12.0, 35.0):
        a = mu_T(lattice_bump, t, tol=1e-7)
        b = mu_T(generic_only, t, tol=1e-9)
        assert a.route == "unfolded" and b.route == "generic"
        assert b.tol_met and a.est_error < 1e-6
        assert a.value == pytest.approx(b.value, abs=5e-7)


def test_mu_T_routes_agree_thin(thin_bump):
    generic_only = dataclasses.replace(thin_bump, profiles=None)
    a = mu_T(thin_bump, 12.0, tol=1e-9)
    b = mu_T(generic_only, 12.0, tol=1e-9)
    assert a.value == pytest.approx(b.value, abs=1e-7)


def test_mu_T_small_radius_uses_generic(lattice_bump):
    s = mu_T(lattice_bump, 4.0)
    assert s.route == "generic"
    assert s.n_nodes > 0 and s.tol_met


def test_mu_T_stable_under_tolerance(lattice_bump):
    loose = mu_T(lattice_bump, 30.0, tol=1e-6).value
    tight = mu_T(lattice_bump, 30.0, tol=1e-10).value
    assert abs(loose - tight) < 1e-6


def test_mu_T_strip_routes_agree(lattice_bump):
    auto = mu_T_strip(lattice_bump, 20.0)
    direct = mu_T_strip(lattice_bump, 20.0, route="direct")
    assert auto == pytest.approx(direct, abs=1e-6)
    with pytest.raises(ValueError):
        mu_T_strip(lattice_bump, 20.0, route="bogus")


def test_mu_T_strip_on_strip_function():
    strip = make_strip_bump()
    v = mu_T_strip(strip, 15.0)
    assert v == pytest.approx(mu_T_strip(strip, 15.0, route="direct"))
    assert v > 0.0


# -- horocycle and Fourier data ----------------------------------------------


def test_fourier_zero_mode_is_horocycle_average(lattice_bump):
    for y in (1.5, 1.9):
        a0 = fourier_coefficient(lattice_bump, 0, y)
        assert isinstance(a0, float)
        assert a0 == pytest.approx(
            horocycle_average(lattice_bump, y, (0.0, 1.0)), abs=1e-9)


def test_fourier_against_dense_fft(lattice_bump):
    y = 1.6
    n = 1 << 14
    xs = (np.arange(n) + 0.5) / n
    vals = lattice_bump.batch(xs, np.full(n, y))
    spec = np.fft.fft(vals * np.exp(-2j * np.pi * xs * 0)) / n  # dc term
    ref1 = np.mean(vals * np.exp(-2j * np.pi * xs))
    assert fourier_coefficient(lattice_bump, 0, y) == pytest.approx(
        float(spec[0].real), abs=1e-10)
    got1 = fourier_coefficient(lattice_bump, 1, y)
    assert isinstance(got1, complex)
    assert abs(got1 - ref1) < 1e-10


def test_fourier_modes_decay(lattice_bump):
    y = 1.6
    mags = [abs(fourier_coefficient(lattice_bump, m, y)) for m in (1, 3, 6)]
    assert mags[2] < mags[1] < mags[0]
    # smooth bump: roughly exp(-c sqrt(m)), so the drop is real but slow
    assert mags[2] < 0.1 * mags[0]


def test_horocycle_average_periodic(lattice_bump):
    a = horocycle_average(lattice_bump, 1.5, (0.0, 1.0))
    b = horocycle_average(lattice_bump, 1.5, (3.0, 4.0))
    assert a == pytest.approx(b, abs=1e-9)
    with pytest.raises(ValueError):
        horocycle_average(lattice_bump, 1.5, (1.0, 1.0))


# -- Haar mean ---------------------------------------------------------------


def test_haar_mean_against_direct_quadrature(lattice_bump):
    # support sits inside the standard domain, so the folded sum equals
    # the single translate there and a plain 2-d quadrature is an
    # independent check of the product-profile route
    x_lo, x_hi, y_lo, y_hi = lattice_bump.support
    val, err = integrate.dblquad(
        lambda y, x: lattice_bump.batch(np.array([x]), np.array([y]))[0]
        / (y * y),
        x_lo, x_hi, y_lo, y_hi, epsabs=1e-12, epsrel=1e-11)
    assert err < 1e-9
    assert haar_mean(lattice_bump) == pytest.approx(3.0 / math.pi * val,
                                                    abs=1e-9)


def test_haar_mean_default_box_value(lattice_bump):
    assert haar_mean(lattice_bump) == pytest.approx(0.059321, abs=5e-6)


def test_haar_mean_rejects_thin(thin_bump):
    with pytest.raises(ValueError):
        haar_mean(thin_bump)


# -- regression --------------------------------------------------------------


def test_regression_guards(lattice_bump):
    with pytest.raises(ValueError):
        equidistribution_regression(lattice_bump, (10.0, 30.0))
    with pytest.raises(ValueError):
        equidistribution_regression(lattice_bump, (10.0, 20.0, 30.0))


def test_regression_slope_tracks_haar_mean(lattice_bump):
    res = equidistribution_regression(lattice_bump, (10.0, 30.0, 100.0, 400.0))
    target = haar_mean(lattice_bump)
    assert res.slope == pytest.approx(target, rel=0.10)
    assert res.decay_exponent > 0.1
    assert len(res.values) == 4 == len(res.residuals)
