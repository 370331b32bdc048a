"""Discretised photon modes and the transformed Pauli-Fierz operator on n <= 2 photons.

A state is a flat complex vector holding, in order, the vacuum spinor
psi0 (2,), the one-photon amplitudes psi1 (2, M) and the two-photon
amplitudes c2 (2, P) over unordered mode pairs. The pair coordinates are
chosen so that c -> X (symmetric matrix, X[m, m'] = c/sqrt2 off the
diagonal and X[m, m] = c) is an isometry; internally every two-photon
operation runs on X.

With mode amplitudes g_m = G(k_m) sqrt(w_m) and b_m = k_m ^ g_m the
operator at total momentum ell is

    T = (ell - P_f)^2 + H_f + alpha c0 + 2 alpha D*D + alpha (D*D* + DD)
        + sqrt(alpha) (F* + F),   F* = 2 (ell - P_f).D* + sigma.E*,

with c0 = sum |g_m|^2 and sigma.E* creating mode m with -i sigma.b_m.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as sla

from . import kernels
from .integrate import quad_1d

SQ2 = np.sqrt(2.0)


@dataclass(frozen=True)
class ModeGrid:
    lam: float
    n_r: int
    n_t: int
    n_phi: int
    k: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    pol: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.w)

    @property
    def omega(self) -> np.ndarray:
        return np.linalg.norm(self.k, axis=1)

    @property
    def vacuum_constant(self) -> float:
        return float(np.sum(self.g * self.g))


def grid_from_modes(k, w, lam: float, rotation: float = 0.0, n_r: int = 0, n_t: int = 0, n_phi: int = 0) -> ModeGrid:
    """Both polarizations at each node k with quadrature weight w."""
    k = np.asarray(k, dtype=float).reshape(-1, 3)
    w = np.asarray(w, dtype=float).reshape(-1)
    if len(k) == 0:
        z = np.zeros((0, 3))
        return ModeGrid(lam, n_r, n_t, n_phi, z, np.zeros(0), np.zeros(0, int), z, z)
    amp = kernels.g_amplitude(k, lam, rotation)  # (N, 2, 3)
    kk = np.repeat(k, 2, axis=0)
    ww = np.repeat(w, 2)
    g = amp.reshape(-1, 3) * np.sqrt(ww)[:, None]
    b = np.cross(kk, g)
    pol = np.tile([1, 2], len(k))
    return ModeGrid(lam, n_r, n_t, n_phi, kk, ww, pol, g, b)


def build_grid(lam: float, n_r: int, n_t: int, n_phi: int, rotation: float = 0.0,
               t_shift: float = 0.0) -> ModeGrid:
    """Gauss-Legendre in |k| and cos(theta), equally spaced phi, both polarizations.

    Nodes: r on (0, lam], t symmetric about 0, phi_j = 2 pi (j + 1/2)/n_phi,
    so the node set is closed under k -> -k. `t_shift` moves every t node
    (clipped into (-1, 1)) and breaks that symmetry; it exists only as a
    negative control.
    """
    if n_r < 2 or n_t < 2:
        raise ValueError("n_r and n_t must be >= 2")
    if n_phi < 4 or n_phi % 2:
        raise ValueError("n_phi must be even and >= 4")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if lam == 0:
        return grid_from_modes(np.zeros((0, 3)), np.zeros(0), 0.0, n_r=n_r, n_t=n_t, n_phi=n_phi)
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * lam * (xr + 1)
    wr = 0.5 * lam * wr
    t, wt = np.polynomial.legendre.leggauss(n_t)
    t = np.clip(t + t_shift, -1 + 1e-12, 1 - 1e-12)
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    wphi = np.full(n_phi, 2 * np.pi / n_phi)
    R, T, PHI = np.meshgrid(r, t, phi, indexing="ij")
    W = np.einsum("i,j,k->ijk", wr * r * r, wt, wphi)
    st = np.sqrt(1 - T * T)
    k = np.stack([R * st * np.cos(PHI), R * st * np.sin(PHI), R * T], axis=-1).reshape(-1, 3)
    return grid_from_modes(k, W.reshape(-1), lam, rotation, n_r, n_t, n_phi)


class FockBasis:
    """Index bookkeeping for spin x (vacuum + one photon + two photons)."""

    def __init__(self, n_modes: int, diagonal_pairs: bool = True):
        self.M = n_modes
        self.diagonal_pairs = diagonal_pairs
        self.pi, self.pj = np.triu_indices(n_modes, k=0 if diagonal_pairs else 1)
        self.P = len(self.pi)
        diag = self.pi == self.pj
        self._to_x = np.where(diag, 1.0, 1 / SQ2)
        self._from_x = np.where(diag, 1.0, 1 / SQ2)
        self._diag = diag
        self.dims = (2, 2 * self.M, 2 * self.P)
        self.dim = sum(self.dims)

    def split(self, v):
        v = np.asarray(v)
        psi0 = v[:2]
        psi1 = v[2:2 + 2 * self.M].reshape(2, self.M)
        c2 = v[2 + 2 * self.M:].reshape(2, self.P)
        return psi0, psi1, c2

    def join(self, psi0, psi1, c2):
        return np.concatenate([np.asarray(psi0, complex).ravel(), np.asarray(psi1, complex).ravel(),
                               np.asarray(c2, complex).ravel()])

    def to_matrix(self, c2):
        X = np.zeros((2, self.M, self.M), dtype=complex)
        vals = c2 * self._to_x
        X[:, self.pi, self.pj] = vals
        X[:, self.pj, self.pi] = vals
        return X

    def from_matrix(self, X):
        # adjoint of to_matrix
        upper = X[:, self.pi, self.pj]
        lower = X[:, self.pj, self.pi]
        return np.where(self._diag, upper, (upper + lower) * self._from_x)

    def random_state(self, rng: np.random.Generator):
        v = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        return v / np.linalg.norm(v)


class FockOperator:
    """Matrix-free T on the n <= 2 space. Immutable after construction."""

    def __init__(self, grid: ModeGrid, alpha: float, ell=(0.0, 0.0, 0.0), infrared_shift: bool = False,
                 diagonal_pairs: bool = True):
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        self.grid = grid
        self.alpha = float(alpha)
        self.sa = np.sqrt(self.alpha)
        self.ell = np.asarray(ell, dtype=float)
        self.basis = FockBasis(grid.size, diagonal_pairs)
        # the alpha^3 shift of the free energy is applied on n >= 2, see decisions ledger
        self.shift = self.alpha**3 if infrared_shift else 0.0
        k, g, b = grid.k, grid.g, grid.b
        om = grid.omega
        self.c0 = grid.vacuum_constant
        self.S = -1j * kernels.sigma_dot(b)  # (M, 2, 2), amplitude of sigma.E*
        lg = g @ self.ell
        self.A = 2 * lg[:, None, None] * np.eye(2) + self.S  # F* from the vacuum
        p1 = self.ell - k
        self.d1 = np.sum(p1 * p1, axis=1) + om
        p2 = self.ell[None, None, :] - k[:, None, :] - k[None, :, :]
        self.d2 = np.sum(p2 * p2, axis=-1) + om[:, None] + om[None, :] + self.shift
        self.W = p1 @ g.T  # W[m2, m1] = (ell - k_m2) . g_m1
        self.d0 = float(self.ell @ self.ell)

    @property
    def dim(self) -> int:
        return self.basis.dim

    # sector blocks ------------------------------------------------------
    def f_create0(self, psi0):
        return np.einsum("mst,t->sm", self.A, psi0)

    def f_annihilate1(self, psi1):
        return np.einsum("mts,tm->s", self.A.conj(), psi1)

    def f_create1(self, psi1):
        S = self.S
        # Z[s, a, b] = 2 W[b, a] psi1[s, b] + sum_t S[a, s, t] psi1[t, b]
        Z = 2 * self.W.T[None, :, :] * psi1[:, None, :]
        Z += S[:, :, 0].T[:, :, None] * psi1[0][None, None, :] + S[:, :, 1].T[:, :, None] * psi1[1][None, None, :]
        return (Z + np.swapaxes(Z, 1, 2)) / SQ2

    def f_annihilate2(self, X):
        Sc = self.S.conj()
        out = 2 * np.einsum("ba,sab->sb", self.W, X, optimize=True)
        # sum_{t, m} conj(S[m, t, s]) X[t, m, b]
        out += Sc[:, 0, :].T @ X[0] + Sc[:, 1, :].T @ X[1]
        return SQ2 * out

    def dd_create0(self, psi0):
        G = self.grid.g @ self.grid.g.T
        return SQ2 * G[None, :, :] * psi0[:, None, None]

    def dd_annihilate2(self, X):
        g = self.grid.g
        return SQ2 * np.einsum("ia,sab,ib->s", g.T, X, g.T, optimize=True)

    def ddd1(self, psi1):
        g = self.grid.g
        return (psi1 @ g) @ g.T

    def ddd2(self, X):
        g = self.grid.g
        GX = g @ (g.T @ X)
        return GX + np.swapaxes(GX, 1, 2)

    # full application ---------------------------------------------------
    def apply(self, v):
        basis = self.basis
        psi0, psi1, c2 = basis.split(v)
        X = basis.to_matrix(c2)
        a, sa = self.alpha, self.sa
        out0 = (self.d0 + a * self.c0) * psi0 + sa * self.f_annihilate1(psi1) + a * self.dd_annihilate2(X)
        out1 = ((self.d1 + a * self.c0) * psi1 + 2 * a * self.ddd1(psi1) + sa * self.f_create0(psi0)
                + sa * self.f_annihilate2(X))
        Y = ((self.d2 + a * self.c0)[None] * X + 2 * a * self.ddd2(X) + sa * self.f_create1(psi1)
             + a * self.dd_create0(psi0))
        return basis.join(out0, out1, basis.from_matrix(Y))

    def linear_operator(self) -> sla.LinearOperator:
        return sla.LinearOperator((self.dim, self.dim), matvec=self.apply, dtype=complex)

    def hf_expectation(self, v, sector: int) -> float:
        """(psi_n, H_f psi_n) from the mode energies."""
        psi0, psi1, c2 = self.basis.split(v)
        om = self.grid.omega
        if sector == 1:
            return float(np.sum(om * np.abs(psi1) ** 2))
        X = self.basis.to_matrix(c2)
        return float(np.sum((om[:, None] + om[None, :]) * np.sum(np.abs(X) ** 2, axis=0)))


def assemble(grid: ModeGrid, alpha: float, ell=(0.0, 0.0, 0.0), infrared_shift: bool = False,
             diagonal_pairs: bool = True) -> FockOperator:
    return FockOperator(grid, alpha, ell, infrared_shift, diagonal_pairs)


def estimated_memory_bytes(n_modes: int, ncv: int = 40) -> int:
    dim = n_modes * n_modes + 3 * n_modes + 2
    return 16 * dim * (ncv + 12) + 8 * 2 * n_modes * n_modes


# ---------------------------------------------------------------------------
# ground state

@dataclass
class GroundStateResult:
    energy: float
    state: np.ndarray = field(repr=False)
    residual: float
    degeneracy_gap: float
    pair_splitting: float
    eigenvalues: np.ndarray
    alpha: float


class EigenNonConvergence(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual


def _diagonal(op: FockOperator) -> np.ndarray:
    b = op.basis
    a = op.alpha * op.c0
    return np.concatenate([np.full(2, op.d0 + a), np.tile(op.d1 + a, 2),
                           np.tile(op.d2[b.pi, b.pj] + a, 2)]).astype(complex)


def _block_operator(op: FockOperator) -> sla.LinearOperator:
    def mm(X):
        X = np.asarray(X)
        if X.ndim == 1:
            return op.apply(X)
        return np.column_stack([op.apply(x) for x in X.T])

    return sla.LinearOperator((op.dim, op.dim), matvec=mm, matmat=mm, dtype=complex)


def _preconditioner(op: FockOperator) -> sla.LinearOperator:
    # inverse of the diagonal, shifted to the vacuum level and kept positive
    inv = 1.0 / (_diagonal(op) - op.d0 - op.alpha * op.c0 + max(op.alpha, 1e-8))

    def pre(X):
        X = np.asarray(X)
        return X * (inv if X.ndim == 1 else inv[:, None])

    return sla.LinearOperator((op.dim, op.dim), matvec=pre, matmat=pre, dtype=complex)


def ground_state(op: FockOperator, tol: float = 1e-11, max_iter: int = 400, seed: int = 0,
                 method: str = "lobpcg", gap_tol: float = 1e-6) -> GroundStateResult:
    """Lowest Kramers pair and the distance to the next level.

    method="lobpcg" (default): block size 2, started from the two vacuum
    spinors, diagonal preconditioner; the gap comes from a second, loosely
    converged block constrained orthogonal to the pair.
    method="arpack": implicitly restarted Lanczos for the lowest 4 values;
    practical only for small grids.
    The returned state is the combination inside the pair whose vacuum
    spinor points along spin up, with a real positive up component.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    dim = op.dim
    if dim <= 16:
        dense = np.column_stack([op.apply(e) for e in np.eye(dim, dtype=complex)])
        vals, vecs = np.linalg.eigh(dense)
    elif method == "arpack":
        rng = np.random.default_rng(seed)
        v0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v0[:2] += 10.0 * np.sqrt(dim)
        try:
            vals, vecs = sla.eigsh(op.linear_operator(), k=4, which="SA", tol=tol, maxiter=max_iter, v0=v0,
                                   ncv=min(dim - 1, 40))
        except sla.ArpackNoConvergence as exc:
            best = np.inf
            for lam_, vec in zip(exc.eigenvalues, exc.eigenvectors.T):
                best = min(best, float(np.linalg.norm(op.apply(vec) - lam_ * vec)))
            raise EigenNonConvergence("ground_state: Lanczos did not converge", best) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    elif method == "lobpcg":
        A = _block_operator(op)
        M = _preconditioner(op)
        X0 = np.zeros((dim, 2), dtype=complex)
        X0[0, 0] = X0[1, 1] = 1.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            pair_vals, pair = sla.lobpcg(A, X0, M=M, tol=tol, maxiter=max_iter, largest=False)
            rng = np.random.default_rng(seed)
            X1 = rng.normal(size=(dim, 2)) + 0j
            upper, _ = sla.lobpcg(A, X1, M=M, Y=pair, tol=gap_tol, maxiter=100, largest=False)
        vals = np.concatenate([pair_vals, np.sort(upper)])
        vecs = pair
    else:
        raise ValueError(f"unknown method {method!r}")
    pair = vecs[:, :2]
    C = pair[:2, :]  # vacuum spinors of the two vectors
    if abs(np.linalg.det(C)) > 1e-14:
        psi = pair @ np.linalg.solve(C, np.array([1.0, 0.0]))
    else:
        psi = pair[:, 0]
    psi = psi / np.linalg.norm(psi)
    if abs(psi[0]) > 0:
        psi = psi * (abs(psi[0]) / psi[0])
    Tpsi = op.apply(psi)
    energy = float(np.real(np.vdot(psi, Tpsi)))
    residual = float(np.linalg.norm(Tpsi - energy * psi))
    if residual > tol * max(1.0, abs(energy)) * 10:
        raise EigenNonConvergence("ground_state: residual above tolerance", residual)
    gap = float(vals[2] - vals[0]) if len(vals) > 2 else float("inf")
    return GroundStateResult(energy, psi, residual, gap, float(vals[1] - vals[0]), np.asarray(vals), op.alpha)


# ---------------------------------------------------------------------------
# perturbation coefficients of the discrete operator

@dataclass
class DiscreteCoefficients:
    e1: float
    e2: float
    breakdown: dict


def _free_pair_energy(grid: ModeGrid):
    k, om = grid.k, grid.omega
    p = k[:, None, :] + k[None, :, :]
    return np.sum(p * p, axis=-1) + om[:, None] + om[None, :]


def _pair_amplitudes(grid: ModeGrid):
    """phi1 = A^-1 sigma.E* up and the two-photon pieces built on it (ell = 0)."""
    om = grid.omega
    q = om * om + om
    S = -1j * kernels.sigma_dot(grid.b)
    up = np.array([1.0 + 0j, 0.0])
    phi1 = np.einsum("mst,t->sm", S, up) / q[None, :]
    Z = np.einsum("ast,tb->sab", S, phi1)
    y_ee = (Z + np.swapaxes(Z, 1, 2)) / SQ2
    kg = grid.k @ grid.g.T  # kg[b, a] = k_b . g_a
    Zp = kg.T[None, :, :] * phi1[:, None, :]
    y_pd = (Zp + np.swapaxes(Zp, 1, 2)) / SQ2
    G = grid.g @ grid.g.T
    x_dd = np.zeros_like(y_ee)
    x_dd[0] = SQ2 * G
    return phi1, y_ee, y_pd, x_dd


def discrete_coeffs(grid: ModeGrid, diagonal_pairs: bool = True) -> DiscreteCoefficients:
    """Mode-sum analogues of the first and second order coefficients at ell = 0.

    e2 is the exact second-order Rayleigh-Schroedinger coefficient of the
    truncated discrete operator. The breakdown also carries the three
    pieces that vanish by the angular symmetry of the grid (E/P cross
    overlap, P.D*/D*D* overlap, |D phi1|^2) and `e2_named`, the five-term
    combination without them.
    """
    if grid.size == 0:
        zero = {n: 0.0 for n in ("dd", "eeee", "epd", "eedd", "iee", "n1", "cross_ep", "pd_dd", "d_phi1",
                                  "c0", "e2_named")}
        return DiscreteCoefficients(0.0, 0.0, zero)
    om = grid.omega
    q = om * om + om
    bb = np.sum(grid.b * grid.b, axis=1)
    c0 = grid.vacuum_constant
    iee = float(np.sum(bb / q))
    n1 = float(np.sum(bb / q**2))
    phi1, y_ee, y_pd, x_dd = _pair_amplitudes(grid)
    q12 = _free_pair_energy(grid)
    if not diagonal_pairs:
        off = ~np.eye(grid.size, dtype=bool)
        y_ee, y_pd, x_dd = y_ee * off, y_pd * off, x_dd * off

    def ip(x, y):
        return complex(np.sum(np.conj(x) * y / q12[None]))

    dd = ip(x_dd, x_dd).real
    eeee = ip(y_ee, y_ee).real
    epd = ip(y_pd, y_pd).real
    eedd = ip(y_ee, x_dd).real
    cross = ip(y_ee, y_pd).real
    pddd = ip(y_pd, x_dd).real
    dphi = float(np.sum(np.abs(phi1 @ grid.g) ** 2))
    # F* phi1 = (sigma.E* - 2 P_f.D*) phi1 at ell = 0
    e2 = -dd - (eeee + 4 * epd - 4 * cross) + 2 * (eedd - 2 * pddd) + iee * n1 + 2 * dphi
    named = -(dd + eeee + 4 * epd - 2 * eedd - iee * n1)
    breakdown = dict(dd=dd, eeee=eeee, epd=epd, eedd=eedd, iee=iee, n1=n1, cross_ep=cross, pd_dd=pddd,
                     d_phi1=dphi, c0=c0, e2_named=named)
    return DiscreteCoefficients(c0 - iee, float(e2), breakdown)


# ---------------------------------------------------------------------------
# fit of E(alpha)

@dataclass
class ExpansionFit:
    c1: float
    c2: float
    fit_residual: float
    alphas: np.ndarray
    energies: np.ndarray
    results: list = field(repr=False)


def fit_expansion(grid: ModeGrid, alphas, tol: float = 1e-11, seed: int = 0, **op_kwargs) -> ExpansionFit:
    """Least-squares fit E(alpha) = c1 alpha + c2 alpha^2 over ground energies.

    The fit is done on E/alpha = c1 + c2 alpha, i.e. with relative weights,
    so the small-alpha points are not swamped by the largest one.
    """
    alphas = np.asarray(sorted(float(a) for a in alphas))
    if len(np.unique(alphas)) < 4:
        raise ValueError("fit_expansion needs at least 4 distinct alpha values")
    if np.any(alphas <= 0) or np.any(alphas > 1e-2):
        raise ValueError("alpha values must lie in (0, 1e-2]")
    results = [ground_state(assemble(grid, a, **op_kwargs), tol=tol, seed=seed) for a in alphas]
    energies = np.array([r.energy for r in results])
    design = np.column_stack([np.ones_like(alphas), alphas])
    coef, *_ = np.linalg.lstsq(design, energies / alphas, rcond=None)
    resid = float(np.linalg.norm(design @ coef * alphas - energies))
    return ExpansionFit(float(coef[0]), float(coef[1]), resid, alphas, energies, results)


# ---------------------------------------------------------------------------
# trial states and energy decompositions

@dataclass
class TrialState:
    kind: str
    vector: np.ndarray = field(repr=False)
    alpha: float


def trial_state(op: FockOperator, kind: str = "tf2", literal_sign: bool = False) -> TrialState:
    """Perturbative trial states at ell = 0.

    kind="tf1": up + one-photon cloud -sqrt(alpha) A^-1 sigma.E* up.
    kind="tf2": adds alpha A^-1 (sigma.E* + 2 (ell - P_f).D*) A^-1 sigma.E* up
    - alpha A^-1 D*D* up. With literal_sign=True the middle term uses
    +2 P_f.D* instead, which is not the first-order state (negative control).
    """
    if kind not in ("tf1", "tf2"):
        raise ValueError(f"unknown trial kind {kind!r}")
    if np.any(op.ell != 0):
        raise ValueError("trial states are defined at ell = 0")
    grid, basis, a = op.grid, op.basis, op.alpha
    psi0 = np.array([1.0 + 0j, 0.0])
    if grid.size == 0:
        return TrialState(kind, basis.join(psi0, np.zeros((2, 0)), np.zeros((2, 0))), a)
    phi1, y_ee, y_pd, x_dd = _pair_amplitudes(grid)
    psi1 = -np.sqrt(a) * phi1
    X = np.zeros((2, grid.size, grid.size), dtype=complex)
    if kind == "tf2":
        q12 = _free_pair_energy(grid) + op.shift
        sign = 2.0 if literal_sign else -2.0
        X = a * (y_ee + sign * y_pd - x_dd) / q12[None]
    return TrialState(kind, basis.join(psi0, psi1, basis.from_matrix(X)), a)


def rayleigh_quotient(op: FockOperator, trial) -> float:
    """<psi, T psi>/<psi, psi>, checked against the sector decomposition."""
    v = trial.vector if isinstance(trial, TrialState) else np.asarray(trial)
    norm2 = float(np.real(np.vdot(v, v)))
    if norm2 == 0:
        raise ValueError("zero-norm trial state")
    direct = float(np.real(np.vdot(v, op.apply(v))))
    sectors = sector_energy(op, v)
    if abs(direct - sectors) > 1e-10 * max(1.0, abs(direct)):
        raise ArithmeticError(f"sector decomposition mismatch: {direct!r} vs {sectors!r}")
    return direct / norm2


def sector_energy(op: FockOperator, v) -> float:
    """<psi, T psi> summed sector by sector: diagonal parts plus 2 Re of the couplings."""
    basis = op.basis
    psi0, psi1, c2 = basis.split(v)
    X = basis.to_matrix(c2)
    a, sa = op.alpha, op.sa
    norm2 = sum(float(np.sum(np.abs(x) ** 2)) for x in (psi0, psi1, X))
    e = a * op.c0 * norm2
    e += op.d0 * float(np.sum(np.abs(psi0) ** 2))
    e += float(np.sum(op.d1 * np.abs(psi1) ** 2)) + float(np.sum(op.d2[None] * np.abs(X) ** 2))
    e += 2 * a * float(np.real(np.vdot(psi1, op.ddd1(psi1)) + np.vdot(X, op.ddd2(X))))
    e += 2 * sa * float(np.real(np.vdot(psi1, op.f_create0(psi0)) + np.vdot(X, op.f_create1(psi1))))
    e += 2 * a * float(np.real(np.vdot(X, op.dd_create0(psi0))))
    return e


@dataclass
class RemainderReport:
    h1: np.ndarray = field(repr=False)
    h2: np.ndarray = field(repr=False)
    h_energy: float
    h_energy_sectors: tuple
    ratio_alpha2: float
    ratio_alpha3: float
    momentum_norm: float
    infrared_bookkeeping: float


def remainder_parts(op: FockOperator, v):
    """h1 = psi1 + sqrt(a) L^-1 F* psi0 and h2 = psi2 + sqrt(a) L^-1 F* psi1 + a L^-1 D*D* psi0."""
    basis = op.basis
    psi0, psi1, c2 = basis.split(v)
    X = basis.to_matrix(c2)
    src1 = op.sa * op.f_create0(psi0)
    src2 = op.sa * op.f_create1(psi1) + op.alpha * op.dd_create0(psi0)
    h1 = psi1 + src1 / op.d1[None]
    h2 = X + src2 / op.d2[None]
    if not op.basis.diagonal_pairs:
        h2 = h2 * ~np.eye(op.grid.size, dtype=bool)
        src2 = src2 * ~np.eye(op.grid.size, dtype=bool)
    return h1, h2, src1, src2


def completed_square_energy(op: FockOperator, v) -> float:
    """<psi, T psi> after completing the square in the photon sectors.

    = a c0 |psi|^2 + d0 |psi0|^2 + 2a sum (psi_n, D*D psi_n) - |L^-1/2 sqrt(a) F* psi0|^2
      - |L^-1/2 (sqrt(a) F* psi1 + a D*D* psi0)|^2 + (h1, L h1) + (h2, L h2)
    """
    basis = op.basis
    psi0, psi1, c2 = basis.split(v)
    X = basis.to_matrix(c2)
    h1, h2, src1, src2 = remainder_parts(op, v)
    norm2 = sum(float(np.sum(np.abs(x) ** 2)) for x in (psi0, psi1, X))
    e = op.alpha * op.c0 * norm2 + op.d0 * float(np.sum(np.abs(psi0) ** 2))
    e += 2 * op.alpha * float(np.real(np.vdot(psi1, op.ddd1(psi1)) + np.vdot(X, op.ddd2(X))))
    e -= float(np.sum(np.abs(src1) ** 2 / op.d1[None]))
    e -= float(np.sum(np.abs(src2) ** 2 / op.d2[None]))
    e += float(np.sum(op.d1[None] * np.abs(h1) ** 2)) + float(np.sum(op.d2[None] * np.abs(h2) ** 2))
    return e


def remainder_diagnostics(op: FockOperator, result: GroundStateResult) -> RemainderReport:
    v = result.state / np.linalg.norm(result.state)
    h1, h2, _, _ = remainder_parts(op, v)
    e1 = float(np.sum(op.d1[None] * np.abs(h1) ** 2))
    e2 = float(np.sum(op.d2[None] * np.abs(h2) ** 2))
    total = e1 + e2
    a = op.alpha
    psi0, _, c2 = op.basis.split(v)
    mom = float(np.linalg.norm(op.ell) * np.linalg.norm(psi0))
    ir = op.shift * float(np.sum(np.abs(c2) ** 2))
    r2 = total / a**2 if a > 0 else 0.0
    r3 = total / a**3 if a > 0 else 0.0
    return RemainderReport(h1, h2, total, (e1, e2), r2, r3, mom, ir)


# ---------------------------------------------------------------------------
# structural diagnostics

def photon_density(op: FockOperator, v, sector: int) -> np.ndarray:
    """Discrete one-photon density rho(m) of sector 1 or 2; checks sum rho |k| = <H_f>."""
    if sector not in (1, 2):
        raise ValueError("sector must be 1 or 2")
    _, psi1, c2 = op.basis.split(v)
    if sector == 1:
        rho = np.sum(np.abs(psi1) ** 2, axis=0)
    else:
        X = op.basis.to_matrix(c2)
        rho = 2 * np.sum(np.abs(X) ** 2, axis=(0, 2))
    lhs = float(np.dot(rho, op.grid.omega))
    rhs = op.hf_expectation(v, sector)
    if abs(lhs - rhs) > 1e-12 * max(1.0, abs(rhs)):
        raise ArithmeticError(f"photon density identity violated: {lhs!r} vs {rhs!r}")
    return rho


def check_epstens(grid: ModeGrid) -> float:
    """Norm of D A^-1 sigma.E* (up x vacuum); zero on a k -> -k symmetric grid."""
    if grid.size == 0:
        return 0.0
    phi1, *_ = _pair_amplitudes(grid)
    return float(np.linalg.norm(phi1 @ grid.g))


def _scalar_create(f, sector_vec, M, pi, pj, to_x):
    """a*(f) on spinless sectors: 0 -> 1 takes a scalar, 1 -> 2 returns pair coordinates."""
    if np.ndim(sector_vec) == 0:
        return f * sector_vec
    X = (np.outer(f, sector_vec) + np.outer(sector_vec, f)) / SQ2
    upper, lower = X[pi, pj], X[pj, pi]
    return np.where(pi == pj, upper, (upper + lower) / SQ2)


def commutator_constant(grid: ModeGrid, alpha: float) -> dict:
    """[|X|, |X|*] on the one-photon sector, built from explicit a and a*.

    Returns the diagonal constant, the spread of the diagonal and the size
    of the off-diagonal part (both zero for a multiple of the identity),
    the value on the vacuum, the direct quadrature (2/pi) int r/(r + a^3)
    and the displayed closed form with +3 a^3 ln(1/a).
    """
    M = grid.size
    lam = grid.lam
    a3 = alpha**3
    out = {}
    if M:
        x = np.sqrt(grid.w) / (2 * np.pi * np.sqrt(grid.omega) * np.sqrt(grid.omega + a3))
        pi, pj = np.triu_indices(M)
        # a*(x) from sector 1 to sector 2 as an explicit matrix, then a(x) = its adjoint
        cre = np.column_stack([_scalar_create(x, e, M, pi, pj, None) for e in np.eye(M)])
        ann = cre.T
        # on sector 1: |X||X|* - |X|*|X| = ann cre - outer(x, x)
        comm = ann @ cre - np.outer(x, x)
        diag = np.diag(comm)
        out.update(constant=float(np.mean(diag)), diag_spread=float(np.ptp(diag)),
                   off_diagonal=float(np.max(np.abs(comm - np.diag(diag)))),
                   vacuum=float(x @ x))
    else:
        out.update(constant=0.0, diag_spread=0.0, off_diagonal=0.0, vacuum=0.0)
    if lam > 0:
        quad = quad_1d(lambda r: r / (r + a3), 0.0, lam, 1e-12).value * 2 / np.pi
    else:
        quad = 0.0
    if alpha > 0:
        displayed = 2 / np.pi * (lam + 3 * a3 * np.log(1 / alpha) - a3 * np.log(lam + a3))
        corrected = 2 / np.pi * (lam - 3 * a3 * np.log(1 / alpha) - a3 * np.log(lam + a3))
    else:
        displayed = corrected = 2 / np.pi * lam
    out.update(quadrature=float(quad), displayed_formula=float(displayed), sign_flipped_formula=float(corrected))
    return out


def _one_body_min_pair(A: np.ndarray, tol: float = 1e-12) -> float:
    """Lowest eigenvalue of A x 1 + 1 x A on symmetric two-mode functions, via Lanczos."""
    M = len(A)
    pi, pj = np.triu_indices(M)
    diag = pi == pj
    scale = np.where(diag, 1.0, 1 / SQ2)

    def mv(c):
        X = np.zeros((M, M), dtype=float)
        X[pi, pj] = c * scale
        X[pj, pi] = c * scale
        Y = A @ X + X @ A
        upper, lower = Y[pi, pj], Y[pj, pi]
        return np.where(diag, upper, (upper + lower) * scale)

    P = len(pi)
    if P <= 8:
        dense = np.column_stack([mv(e) for e in np.eye(P)])
        return float(np.linalg.eigvalsh(dense)[0])
    op = sla.LinearOperator((P, P), matvec=mv, dtype=float)
    v0 = np.ones(P)
    return float(sla.eigsh(op, k=1, which="SA", tol=tol, v0=v0, maxiter=20000)[0][0])


def check_auxiliary_bounds(grid: ModeGrid, alpha: float, tol: float = 1e-10) -> dict:
    """Appendix-type operator inequalities on the discrete sectors n = 1, 2.

    For scalar amplitudes d_m = |g_m| and e_m = |k_m| |g_m| checks
    (2/pi) lam H_f - |D|*|D| >= 0 and (2 pi/3) lam H_f - |E|*|E| >= 0,
    and evaluates the [|X|, |X|*] constant.
    """
    if grid.size < 2:
        raise ValueError("need at least 2 modes")
    lam = grid.lam
    om = grid.omega
    d = np.linalg.norm(grid.g, axis=1)
    e = om * d
    report = {}
    for name, amp, const in (("D", d, 2 / np.pi * lam), ("E", e, 2 * np.pi / 3 * lam)):
        A = const * np.diag(om) - np.outer(amp, amp)
        one = float(np.linalg.eigvalsh(A)[0])
        two = _one_body_min_pair(A)
        report[name] = dict(constant=const, sector1_min=one, sector2_min=two,
                            sector2_from_sector1=2 * one,
                            exact_ratio=float(np.sum(amp * amp / om)),
                            holds=bool(min(one, two) >= -tol))
    report["X"] = commutator_constant(grid, alpha)
    return report
