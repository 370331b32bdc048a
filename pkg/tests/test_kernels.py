import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pflab import kernels

unit = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-3)
radius = st.floats(1e-3, 1.0)


def _vec(v, r):
    v = np.asarray(v, dtype=float)
    return r * v / np.linalg.norm(v)


@given(unit, radius, st.floats(0, 2 * np.pi))
def test_frame_is_orthonormal_and_transverse(v, r, rot):
    k = _vec(v, r)
    e1, e2 = kernels.polarization_frame(k, rot)
    khat = k / r
    assert abs(e1 @ e1 - 1) < 1e-12 and abs(e2 @ e2 - 1) < 1e-12
    assert abs(e1 @ e2) < 1e-12 and abs(e1 @ khat) < 1e-12 and abs(e2 @ khat) < 1e-12
    assert np.allclose(np.cross(khat, e1), e2, atol=1e-12)


def test_frame_along_z_uses_ex():
    e1, e2 = kernels.polarization_frame(np.array([0.0, 0.0, 0.5]))
    assert np.allclose(e1, [1, 0, 0]) and np.allclose(e2, [0, 1, 0])


def test_frame_rejects_zero_momentum():
    with pytest.raises(ValueError):
        kernels.polarization_frame(np.zeros(3))


@given(unit, radius, st.floats(0, 2 * np.pi))
def test_polarization_sums_match_projector(v, r, rot):
    k = _vec(v, r)
    g = kernels.g_amplitude(k, 1.0, rot)
    gg = np.einsum("li,lj->ij", g, g)
    assert np.allclose(gg, kernels.pol_sum_gg(k, 1.0), atol=1e-13)
    b = kernels.h_amplitude(k, 1.0, rot)
    assert np.isclose(np.sum(b * b), kernels.pol_sum_hh(k, 1.0), rtol=1e-12)


def test_cutoff_zeroes_amplitudes_outside():
    k = np.array([0.0, 0.9, 0.9])
    assert np.all(kernels.g_amplitude(k, 1.0) == 0)
    assert kernels.pol_sum_hh(k, 1.0) == 0


@given(st.floats(-1, 1))
def test_projector_trace_product(t):
    k1 = np.array([0.0, 0.0, 1.0])
    k2 = np.array([np.sqrt(1 - t * t), 0.0, t])
    tr = np.trace(kernels.transverse_projector(k1) @ kernels.transverse_projector(k2))
    assert np.isclose(tr, kernels.projector_trace_product(t), atol=1e-13)


def test_projector_trace_rejects_bad_cosine():
    with pytest.raises(ValueError):
        kernels.projector_trace_product(1.5)


def test_cutoff_validation():
    with pytest.raises(ValueError):
        kernels.Cutoff(-1.0)
    assert kernels.Cutoff(2.0).chi(1.5) == 1.0


def test_unknown_kernel_raises():
    with pytest.raises(ValueError):
        kernels.reduced_kernel("xx", 0.5, 0.5, 0.0, 1.0)


def test_kernels_vanish_outside_cutoff():
    for name in ("dd", "eeee", "epd", "eedd"):
        assert kernels.reduced_kernel(name, 1.2, 0.5, 0.1, 1.0) == 0
    assert kernels.reduced_kernel("iee", 0.0, None, None, 1.0) == 0


def test_one_photon_kernels_closed_form():
    r = np.linspace(0.05, 1.0, 7)
    assert np.allclose(kernels.reduced_kernel("iee", r, None, None, 1.0), 2 / np.pi * r * r / (1 + r))
    assert np.allclose(kernels.reduced_kernel("n1", r, None, None, 1.0), 2 / np.pi * r / (1 + r) ** 2)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["dd", "eeee", "epd", "eedd", "iee", "n1"]), st.floats(0.05, 0.99), st.floats(0.05, 0.99),
       st.floats(-0.99, 0.99))
def test_reduced_kernel_equals_angular_integration(name, r1, r2, t):
    direct = kernels.angular_reduce(name, r1, r2, t, 1.0)
    reduced = float(kernels.reduced_kernel(name, r1, r2, t, 1.0))
    assert abs(direct - reduced) <= 1e-10 * max(abs(reduced), 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.floats(-0.99, 0.99))
def test_kernels_symmetric_in_radii(r1, r2, t):
    for name in ("dd", "eeee", "epd", "eedd"):
        a = kernels.reduced_kernel(name, r1, r2, t, 1.0)
        b = kernels.reduced_kernel(name, r2, r1, t, 1.0)
        assert np.isclose(a, b, rtol=1e-12, atol=0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.floats(-0.99, 0.99))
def test_squared_norm_kernels_nonnegative(r1, r2, t):
    for name in ("dd", "eeee", "epd"):
        assert kernels.reduced_kernel(name, r1, r2, t, 1.0) >= 0


def test_commuting_variant_differs_from_exact():
    a = kernels.reduced_kernel("eeee", 0.4, 0.7, 0.3, 1.0)
    b = kernels.reduced_kernel("eeee", 0.4, 0.7, 0.3, 1.0, variant="commuting")
    assert abs(a - b) > 1e-4 * abs(a)
    with pytest.raises(ValueError):
        kernels.reduced_kernel("dd", 0.4, 0.7, 0.3, 1.0, variant="commuting")


def test_vector_integrand_cross_and_imaginary_parts():
    rng = np.random.default_rng(3)
    k1 = rng.uniform(-0.5, 0.5, size=(50, 3))
    k2 = rng.uniform(-0.5, 0.5, size=(50, 3))
    for name in ("dd", "eeee", "epd"):
        _, imag, cross = kernels.vector_integrand_parts(name, k1, k2, 1.0)
        assert np.max(np.abs(imag)) < 1e-14
        assert np.max(np.abs(cross)) < 1e-14


def test_sigma_dot_anticommutator():
    a, b = np.array([0.3, -1.0, 0.5]), np.array([1.2, 0.1, -0.4])
    sa, sb = kernels.sigma_dot(a), kernels.sigma_dot(b)
    assert np.allclose(sa @ sb + sb @ sa, 2 * (a @ b) * np.eye(2))
