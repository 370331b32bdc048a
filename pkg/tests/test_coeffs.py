import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pflab import coeffs

# Continuum values at lam = 1 from scipy.integrate.nquad (epsabs 1e-13) on the reduced kernels
# (scripts/oracle_two_photon.py); frozen here.
FROZEN_LAM1 = {
    "dd": 0.035274980881,
    "eeee": 0.006926998422,
    "epd": 0.001284895931,
    "eedd": 0.002336465892,
    "e2": -0.027549146470,
}


def test_e1_closed_values():
    assert coeffs.e1_closed(0) == 0.0
    assert np.isclose(coeffs.e1_closed(1), 2 / np.pi * (1 - np.log(2)), rtol=1e-15)
    assert np.isclose(coeffs.e1_closed(10), 2 / np.pi * (10 - np.log(11)), rtol=1e-15)
    with pytest.raises(ValueError):
        coeffs.e1_closed(-1)


def test_e1_small_cutoff_asymptotics():
    lam = 1e-3
    assert abs(coeffs.e1_closed(lam) / lam**2 * np.pi - 1) < 1e-3


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 20.0))
def test_first_order_identity(lam):
    q = coeffs.iee(lam)
    assert abs(lam * lam / np.pi - q.value - coeffs.e1_closed(lam)) <= 1e-8 * max(1.0, lam**2)


@given(st.floats(0.01, 10.0), st.floats(0.01, 10.0))
def test_e1_monotone(a, b):
    lo, hi = sorted((a, b))
    assert coeffs.e1_closed(lo) <= coeffs.e1_closed(hi)


def test_one_photon_closed_forms():
    assert abs(coeffs.iee(1).value - (2 * np.log(2) - 1) / np.pi) < 1e-12
    assert abs(coeffs.n1(1).value - 2 / np.pi * (np.log(2) - 0.5)) < 1e-12
    assert coeffs.iee(0).value == 0.0


def test_two_photon_quadrature_matches_frozen_values():
    for name in coeffs.TWO_PHOTON:
        q, mc = coeffs.vev2(name, 1.0, tol=1e-8, n_samples=None)
        assert mc is None
        assert abs(q.value - FROZEN_LAM1[name]) < 2e-9


def test_e2_total_quadrature_route():
    c = coeffs.e2_total(1.0, tol=1e-8, n_samples=None)
    assert abs(c.e2 - FROZEN_LAM1["e2"]) < 1e-8
    vals = {n: c.breakdown[n][0].value for n in c.breakdown}
    manual = -(vals["dd"] + vals["eeee"] + 4 * vals["epd"] - 2 * vals["eedd"] - vals["iee"] * vals["n1"])
    assert c.e2 == pytest.approx(manual, abs=1e-16)


def test_zero_cutoff_gives_zero_coefficients():
    c = coeffs.e2_total(0.0, n_samples=10**4)
    assert c.e1 == 0.0 and c.e2 == 0.0 and c.e2_mc == 0.0


def test_epd_nonnegative_and_mc_agrees():
    q, mc = coeffs.vev2("epd", 1.0, n_samples=2 * 10**5, seed=11)
    assert q.value >= 0
    assert abs(q.value - mc.mean) <= 3 * mc.std_error


def test_e2_mc_route_within_three_sigma():
    c = coeffs.e2_total(1.0, n_samples=2 * 10**5, seed=5)
    assert abs(c.e2 - c.e2_mc) <= 3 * c.e2_mc_error


def test_commuting_variant_shifts_e2():
    exact = coeffs.e2_total(1.0, n_samples=None)
    commuting = coeffs.e2_total(1.0, n_samples=None, variant="commuting")
    assert abs(exact.e2 - commuting.e2) > 1e-4


def test_unknown_two_photon_name():
    with pytest.raises(ValueError):
        coeffs.vev2("iee", 1.0)


def test_sigma_prediction():
    c = coeffs.e2_total(1.0, n_samples=None)
    p = coeffs.sigma_prediction(1.0, 1e-3, c)
    assert p.sigma == pytest.approx(1e-3 * c.e1 + 1e-6 * c.e2, rel=1e-15)
    assert "alpha^(5/2)" in p.error_order_note
    small = coeffs.sigma_prediction(1.0, 1e-8, c)
    assert abs(small.sigma / 1e-8 - c.e1) < 1e-9
    with pytest.raises(ValueError):
        coeffs.sigma_prediction(1.0, 0.0, c)


def test_tolerance_refinement_is_consistent():
    coarse = coeffs.vev2("dd", 1.0, tol=1e-5, n_samples=None)[0]
    fine = coeffs.vev2("dd", 1.0, tol=1e-6, n_samples=None)[0]
    assert abs(coarse.value - fine.value) <= coarse.error_estimate
