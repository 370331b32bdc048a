import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dense_oracle import dense_operator, to_flat_permutation
from pflab import fock


def tiny_grid(seed=0, nodes=3, lam=1.0, symmetric=False):
    rng = np.random.default_rng(seed)
    k = rng.uniform(-0.5, 0.5, size=(nodes, 3))
    w = rng.uniform(0.05, 0.2, size=nodes)
    if symmetric:
        k = np.concatenate([k, -k])
        w = np.concatenate([w, w])
    return fock.grid_from_modes(k, w, lam)


def dense_matrix(op):
    return np.column_stack([op.apply(e) for e in np.eye(op.dim, dtype=complex)])


@pytest.fixture(scope="module")
def small_grid():
    return fock.build_grid(1.0, 3, 2, 4)


@pytest.mark.parametrize("ell", [(0.0, 0.0, 0.0), (0.1, -0.2, 0.05)])
def test_matches_dense_second_quantized_operator(ell):
    grid = tiny_grid(seed=4, nodes=2)
    op = fock.assemble(grid, 0.07, ell)
    ref, kept = dense_operator(grid, 0.07, ell)
    perm = to_flat_permutation(grid.size, kept)
    assert np.max(np.abs(dense_matrix(op) - ref[np.ix_(perm, perm)])) < 1e-13


def test_build_grid_counts_and_vacuum_constant():
    g = fock.build_grid(1.0, 8, 6, 6)
    assert g.size == 576
    assert abs(g.vacuum_constant - 1 / np.pi) < 0.02 / np.pi
    finer = fock.build_grid(1.0, 16, 12, 12)
    # Gauss-Legendre in r is exact for this integrand: both sit at roundoff
    assert abs(finer.vacuum_constant - 1 / np.pi) <= 1e-14


def test_build_grid_validation_and_empty():
    assert fock.build_grid(0.0, 2, 2, 4).size == 0
    for bad in [(1, 2, 4), (2, 1, 4), (2, 2, 3), (2, 2, 2)]:
        with pytest.raises(ValueError):
            fock.build_grid(1.0, *bad)


def test_grid_symmetric_under_inversion(small_grid):
    k = small_grid.k
    for q in k[::7]:
        assert np.min(np.linalg.norm(k + q, axis=1)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_self_adjoint_random_pairs(seed):
    grid = fock.build_grid(1.0, 2, 2, 4)
    op = fock.assemble(grid, 0.01, (0.05, 0.0, -0.1))
    rng = np.random.default_rng(seed)
    for _ in range(5):
        u, v = op.basis.random_state(rng), op.basis.random_state(rng)
        assert abs(np.vdot(u, op.apply(v)) - np.vdot(op.apply(u), v)) <= 1e-12


def test_zero_coupling_ground_state(small_grid):
    op = fock.assemble(small_grid, 0.0)
    res = fock.ground_state(op)
    assert abs(res.energy) < 1e-14 and res.residual < 1e-11


def test_vacuum_expectation(small_grid):
    ell = np.array([0.1, 0.2, -0.3])
    op = fock.assemble(small_grid, 0.01, ell)
    v = np.zeros(op.dim, complex)
    v[0] = 1
    assert np.vdot(v, op.apply(v)).real == pytest.approx(ell @ ell + 0.01 * small_grid.vacuum_constant, rel=1e-14)


def test_energy_even_in_total_momentum():
    grid = tiny_grid(seed=2, nodes=2, symmetric=True)
    ell = np.array([0.05, -0.02, 0.03])
    e_plus = np.linalg.eigvalsh(dense_matrix(fock.assemble(grid, 0.02, ell)))[0]
    e_minus = np.linalg.eigvalsh(dense_matrix(fock.assemble(grid, 0.02, -ell)))[0]
    assert abs(e_plus - e_minus) < 1e-13


def test_ground_state_below_vacuum_and_trials(small_grid):
    a = 1e-3
    op = fock.assemble(small_grid, a)
    res = fock.ground_state(op)
    assert res.energy < a * small_grid.vacuum_constant
    q2 = fock.rayleigh_quotient(op, fock.trial_state(op, "tf2"))
    q1 = fock.rayleigh_quotient(op, fock.trial_state(op, "tf1"))
    assert res.energy <= q2 <= q1
    assert res.pair_splitting < 1e-12
    assert res.degeneracy_gap > 1e-3


def test_ground_state_matches_dense_diagonalisation():
    grid = tiny_grid(seed=9, nodes=3)
    op = fock.assemble(grid, 0.01)
    ref = np.linalg.eigvalsh(dense_matrix(op))
    res = fock.ground_state(op)
    assert abs(res.energy - ref[0]) < 1e-12


def test_gauge_frame_independence(small_grid):
    rotated = fock.build_grid(1.0, 3, 2, 4, rotation=0.7)
    e0 = fock.ground_state(fock.assemble(small_grid, 5e-3)).energy
    e1 = fock.ground_state(fock.assemble(rotated, 5e-3)).energy
    assert abs(e0 - e1) <= 1e-10


def test_single_mode_discrete_first_order():
    k = np.array([[0.3, -0.2, 0.4]])
    grid = fock.grid_from_modes(k, [0.5], 1.0)
    r = np.linalg.norm(k)
    g2 = 2 * 0.5 / (4 * np.pi**2 * r)
    h2 = r * r * g2
    assert fock.discrete_coeffs(grid).e1 == pytest.approx(g2 - h2 / (r * r + r), rel=1e-13)


@pytest.mark.parametrize("symmetric", [False, True])
def test_discrete_coefficients_are_exact_taylor_coefficients(symmetric):
    grid = tiny_grid(seed=5, nodes=3, symmetric=symmetric)
    dc = fock.discrete_coeffs(grid)
    gaps = []
    for a in (2e-3, 1e-3):
        e = np.linalg.eigvalsh(dense_matrix(fock.assemble(grid, a)))[0]
        gaps.append(e - a * dc.e1 - a * a * dc.e2)
    # the remainder is O(alpha^3)
    assert 6 < gaps[0] / gaps[1] < 10


def test_named_combination_equals_exact_on_symmetric_grid(small_grid):
    dc = fock.discrete_coeffs(small_grid)
    b = dc.breakdown
    assert max(abs(b["cross_ep"]), abs(b["pd_dd"]), abs(b["d_phi1"])) < 1e-15
    assert dc.e2 == pytest.approx(b["e2_named"], abs=1e-15)


def test_fit_expansion_validation(small_grid):
    with pytest.raises(ValueError):
        fock.fit_expansion(small_grid, [1e-3] * 4)
    with pytest.raises(ValueError):
        fock.fit_expansion(small_grid, [1e-3, 2e-3, 4e-3, 2e-2])


def test_trial_state_validation(small_grid):
    op = fock.assemble(small_grid, 1e-3, (0.1, 0, 0))
    with pytest.raises(ValueError):
        fock.trial_state(op)
    with pytest.raises(ValueError):
        fock.trial_state(fock.assemble(small_grid, 1e-3), "sepp")
    zero = fock.assemble(small_grid, 0.0)
    assert fock.rayleigh_quotient(zero, fock.trial_state(zero, "tf2")) == 0.0
    with pytest.raises(ValueError):
        fock.rayleigh_quotient(zero, np.zeros(zero.dim))


def test_literal_sign_trial_is_worse(small_grid):
    op = fock.assemble(small_grid, 4e-3)
    good = fock.rayleigh_quotient(op, fock.trial_state(op, "tf2"))
    literal = fock.rayleigh_quotient(op, fock.trial_state(op, "tf2", literal_sign=True))
    assert literal > good


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.0, 0.1))
def test_energy_decompositions_random_states(seed, a):
    grid = fock.build_grid(1.0, 2, 2, 4)
    op = fock.assemble(grid, a)
    v = op.basis.random_state(np.random.default_rng(seed))
    direct = np.vdot(v, op.apply(v)).real
    assert fock.sector_energy(op, v) == pytest.approx(direct, rel=1e-10)
    assert fock.completed_square_energy(op, v) == pytest.approx(direct, rel=1e-10)


def test_remainder_diagnostics_zero_coupling(small_grid):
    op = fock.assemble(small_grid, 0.0)
    rep = fock.remainder_diagnostics(op, fock.ground_state(op))
    assert rep.h_energy == 0.0 and rep.momentum_norm == 0.0


def test_infrared_shift_only_on_two_photons(small_grid):
    a = 5e-3
    plain = fock.assemble(small_grid, a)
    shifted = fock.assemble(small_grid, a, infrared_shift=True)
    assert np.allclose(plain.d1, shifted.d1)
    assert np.allclose(shifted.d2 - plain.d2, a**3)


def test_photon_density_basis_vectors(small_grid):
    op = fock.assemble(small_grid, 0.01)
    M = small_grid.size
    v = np.zeros(op.dim, complex)
    v[2 + 5] = 1.0  # spin up, one photon in mode 5
    rho = fock.photon_density(op, v, 1)
    assert rho[5] == 1.0 and rho.sum() == 1.0
    c2 = np.zeros((2, op.basis.P), complex)
    pair = np.flatnonzero((op.basis.pi == 3) & (op.basis.pj == 8))[0]
    c2[0, pair] = 1.0
    v = op.basis.join(np.zeros(2, complex), np.zeros((2, M), complex), c2)
    rho = fock.photon_density(op, v, 2)
    assert rho[3] == pytest.approx(1.0) and rho[8] == pytest.approx(1.0) and rho.sum() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        fock.photon_density(op, v, 3)


def test_photon_density_identity_random(small_grid):
    op = fock.assemble(small_grid, 0.01)
    v = op.basis.random_state(np.random.default_rng(0))
    for n in (1, 2):
        rho = fock.photon_density(op, v, n)
        assert abs(rho @ small_grid.omega - op.hf_expectation(v, n)) <= 1e-12


def test_epstens_residual(small_grid):
    assert fock.check_epstens(small_grid) <= 1e-12
    assert fock.check_epstens(fock.build_grid(1.0, 3, 2, 4, t_shift=0.05)) > 1e-6
    assert fock.check_epstens(fock.build_grid(0.0, 3, 2, 4)) == 0.0


def test_auxiliary_bounds_hold(small_grid):
    rep = fock.check_auxiliary_bounds(small_grid, 0.01)
    assert rep["D"]["holds"] and rep["E"]["holds"]
    assert rep["D"]["exact_ratio"] == pytest.approx(2 / np.pi, rel=1e-13)
    assert rep["E"]["exact_ratio"] == pytest.approx(2 / (3 * np.pi), rel=1e-13)
    with pytest.raises(ValueError):
        fock.check_auxiliary_bounds(fock.build_grid(0.0, 2, 2, 4), 0.01)


def test_e_bound_fails_beyond_pi():
    # sum e^2/omega = 2 lam^3/(3 pi) exceeds (2 pi/3) lam once lam > pi
    rep = fock.check_auxiliary_bounds(fock.build_grid(5.0, 3, 2, 4), 0.01)
    assert rep["D"]["holds"] and not rep["E"]["holds"]


def test_commutator_is_identity_multiple(small_grid):
    c = fock.commutator_constant(small_grid, 0.0)
    assert c["diag_spread"] < 1e-12 and c["off_diagonal"] < 1e-12
    assert c["constant"] == pytest.approx(2 / np.pi, rel=1e-12)
    assert c["quadrature"] == pytest.approx(2 / np.pi, rel=1e-12)


def test_commutator_constant_sign_flag(small_grid):
    a = 0.1
    c = fock.commutator_constant(small_grid, a)
    assert abs(c["sign_flipped_formula"] - c["quadrature"]) < 1e-10
    assert abs(c["displayed_formula"] - c["quadrature"]) > 1e-3


def test_memory_estimate_grows_quadratically():
    assert fock.estimated_memory_bytes(200) > 3.9 * fock.estimated_memory_bytes(100)
