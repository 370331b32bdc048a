"""Photon form factors, polarization sums and scalar kernels.

Units: hbar = c = 1, electron mass 1/2. The ultraviolet cutoff is the sharp
indicator chi(|k|) = 1 for |k| <= lam and 0 otherwise.

Every two-photon kernel is a function of (r1, r2, t) with t the cosine of
the angle between the photon momenta, normalised so that the corresponding
vacuum expectation value is the plain integral over (0, lam]^2 x [-1, 1].
The one-photon kernels (iee, n1) depend on r1 only.

The unreduced integrands in `vector_integrand` use explicit polarization
frames and 2x2 Pauli algebra and are the reference for the reductions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KERNEL_NAMES = ("dd", "eeee", "epd", "eedd", "iee", "n1")
ONE_PHOTON = ("iee", "n1")

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
SPIN_UP = np.array([1.0 + 0j, 0.0])


@dataclass(frozen=True)
class Cutoff:
    lam: float

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"cutoff must be finite and >= 0, got {self.lam}")

    def chi(self, r):
        return (np.asarray(r) <= self.lam).astype(float)


def _lam(lam) -> float:
    return lam.lam if isinstance(lam, Cutoff) else float(lam)


def polarization_frame(k, rotation: float = 0.0):
    """Return (eps1, eps2) for momenta k of shape (..., 3).

    eps1 = e_z ^ k / |e_z ^ k| (e_x when k is parallel to e_z) and
    eps2 = khat ^ eps1. A nonzero `rotation` turns the pair by that angle
    about khat, which keeps eps2 = khat ^ eps1.
    """
    k = np.asarray(k, dtype=float)
    r = np.linalg.norm(k, axis=-1, keepdims=True)
    if np.any(r == 0):
        raise ValueError("polarization frame undefined at k = 0")
    khat = k / r
    ez = np.array([0.0, 0.0, 1.0])
    e1 = np.cross(ez, khat)
    n1 = np.linalg.norm(e1, axis=-1, keepdims=True)
    parallel = n1[..., 0] < 1e-14
    e1 = np.where(parallel[..., None], np.array([1.0, 0.0, 0.0]), e1 / np.where(n1 == 0, 1.0, n1))
    e2 = np.cross(khat, e1)
    if rotation:
        c, s = np.cos(rotation), np.sin(rotation)
        e1, e2 = c * e1 + s * e2, c * e2 - s * e1
    return e1, e2


def g_amplitude(k, lam, rotation: float = 0.0):
    """G^lambda(k) as an array of shape (..., 2, 3); axis -2 is the polarization."""
    k = np.asarray(k, dtype=float)
    r = np.linalg.norm(k, axis=-1)
    e1, e2 = polarization_frame(k, rotation)
    pref = (r <= _lam(lam)) / (2 * np.pi * np.sqrt(r))
    return pref[..., None, None] * np.stack([e1, e2], axis=-2)


def h_amplitude(k, lam, rotation: float = 0.0):
    """Real part b of H^lambda(k) = -i b, with b = k ^ G^lambda(k)."""
    k = np.asarray(k, dtype=float)
    g = g_amplitude(k, lam, rotation)
    return np.cross(k[..., None, :], g)


def transverse_projector(k):
    k = np.asarray(k, dtype=float)
    r2 = np.sum(k * k, axis=-1)
    return np.eye(3) - k[..., :, None] * k[..., None, :] / r2[..., None, None]


def pol_sum_gg(k, lam) -> np.ndarray:
    """sum_lambda G_i G_j = chi^2/(4 pi^2 |k|) (delta_ij - k_i k_j/|k|^2)."""
    k = np.asarray(k, dtype=float)
    r = np.linalg.norm(k, axis=-1)
    if np.any(r == 0):
        raise ValueError("pol_sum_gg undefined at k = 0")
    s = (r <= _lam(lam)) / (4 * np.pi**2 * r)
    return s[..., None, None] * transverse_projector(k)


def pol_sum_hh(k, lam):
    """sum_lambda |H|^2 = chi^2 |k| / (2 pi^2)."""
    r = np.linalg.norm(np.asarray(k, dtype=float), axis=-1)
    return (r <= _lam(lam)) * r / (2 * np.pi**2)


def projector_trace_product(t):
    """tr[P(k1) P(k2)] for unit vectors with cosine t."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1):
        raise ValueError("|t| must be <= 1")
    return 1.0 + t * t


def _denominators(r1, r2, t):
    q1 = r1 * r1 + r1
    q2 = r2 * r2 + r2
    q12 = r1 * r1 + r2 * r2 + 2 * r1 * r2 * t + r1 + r2
    return q1, q2, q12


def _k_dd(r1, r2, t):
    _, _, q12 = _denominators(r1, r2, t)
    return r1 * r2 * (1 + t * t) / (np.pi**2 * q12)


def _k_eeee(r1, r2, t):
    q1, q2, q12 = _denominators(r1, r2, t)
    # spin exchange: Re<up|s.b2 s.b1 s.b2 s.b1|up> = 2(b1.b2)^2 - |b1|^2|b2|^2
    bracket = 2 / q1**2 + 2 / q2**2 - 2 * (1 - t * t) / (q1 * q2)
    return (r1 * r2) ** 3 * bracket / (2 * np.pi**2 * q12)


def _k_epd(r1, r2, t):
    q1, q2, q12 = _denominators(r1, r2, t)
    a, b = r1**2 / q1, r2**2 / q2
    return r1 * r2 * (1 - t * t) * (a * a + b * b - a * b) / (2 * np.pi**2 * q12)


def _k_eedd(r1, r2, t):
    q1, q2, q12 = _denominators(r1, r2, t)
    return -((r1 * r2) ** 2) * t * (1 / q1 + 1 / q2) / (np.pi**2 * q12)


def _k_iee(r1, r2=None, t=None):
    return 2 / np.pi * r1 * r1 / (1 + r1)


def _k_n1(r1, r2=None, t=None):
    return 2 / np.pi * r1 / (1 + r1) ** 2


# The same two terms with the spin matrices treated as commuting numbers:
# both orderings collapse onto the r1 denominator. Kept as a diagnostic.
def _k_eeee_commuting(r1, r2, t):
    q1, q2, q12 = _denominators(r1, r2, t)
    return (r1 * r2) ** 3 * (4 / (q12 * q1**2) + 4 / (q12 * q1 * q2)) / (2 * np.pi**2)


def _k_epd_commuting(r1, r2, t):
    q1, q2, q12 = _denominators(r1, r2, t)
    return r1 * r2 * 2 * r1**4 * (1 - t * t) * (1 / (q12 * q1**2) + 1 / (q12 * q1 * q2)) / (2 * np.pi**2)


_KERNELS = {
    "dd": _k_dd,
    "eeee": _k_eeee,
    "epd": _k_epd,
    "eedd": _k_eedd,
    "iee": _k_iee,
    "n1": _k_n1,
}
_COMMUTING = {"eeee": _k_eeee_commuting, "epd": _k_epd_commuting}


def reduced_kernel(name: str, r1, r2, t, lam, variant: str = "exact"):
    """Scalar kernel whose integral over (0,lam]^2 x [-1,1] (or (0,lam]) is the named VEV.

    variant="commuting" returns the eeee/epd forms obtained by commuting
    the Pauli matrices; it is not the expectation value of the operator.
    """
    if name not in _KERNELS:
        raise ValueError(f"unknown kernel {name!r}; expected one of {KERNEL_NAMES}")
    lam = _lam(lam)
    r1 = np.asarray(r1, dtype=float)
    if variant == "commuting":
        if name not in _COMMUTING:
            raise ValueError(f"no commuting variant for {name!r}")
        fn = _COMMUTING[name]
    elif variant == "exact":
        fn = _KERNELS[name]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if name in ONE_PHOTON:
        inside = (r1 > 0) & (r1 <= lam)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = fn(r1)
        return np.where(inside, val, 0.0)
    r2 = np.asarray(r2, dtype=float)
    t = np.asarray(t, dtype=float)
    inside = (r1 > 0) & (r2 > 0) & (r1 <= lam) & (r2 <= lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = fn(r1, r2, t)
    return np.where(inside, val, 0.0)


def sigma_dot(v):
    """sigma . v for real or complex v of shape (..., 3) -> (..., 2, 2)."""
    return np.einsum("...i,iab->...ab", np.asarray(v), PAULI)


def vector_integrand(name: str, k1, k2, lam):
    """Polarization-summed integrand of the named VEV, built from explicit frames.

    k1, k2 have shape (N, 3); k2 is ignored for one-photon names. The
    two-photon integrands are squared norms (or overlaps) of the spin-up
    two-photon amplitudes, divided by the free energy of the pair.
    Returns the real part; `vector_integrand_parts` also exposes the
    imaginary part (zero for the norms, not for the eedd overlap) and the
    real part of the E/P cross overlap.
    """
    return vector_integrand_parts(name, k1, k2, lam)[0]


def vector_integrand_parts(name: str, k1, k2, lam):
    if name not in _KERNELS:
        raise ValueError(f"unknown kernel {name!r}; expected one of {KERNEL_NAMES}")
    k1 = np.atleast_2d(np.asarray(k1, dtype=float))
    r1 = np.linalg.norm(k1, axis=-1)
    q1 = r1 * r1 + r1
    b1 = h_amplitude(k1, lam)  # (N, 2, 3)
    if name in ONE_PHOTON:
        hh = np.sum(b1 * b1, axis=(-1, -2))
        val = hh / q1 if name == "iee" else hh / q1**2
        return val, np.zeros_like(val), np.zeros_like(val)

    k2 = np.atleast_2d(np.asarray(k2, dtype=float))
    r2 = np.linalg.norm(k2, axis=-1)
    q2 = r2 * r2 + r2
    q12 = np.sum((k1 + k2) ** 2, axis=-1) + r1 + r2
    g1 = g_amplitude(k1, lam)
    g2 = g_amplitude(k2, lam)
    b2 = h_amplitude(k2, lam)

    # one-photon states sigma.H(k) up / Q(k) with H = -i b, indexed [N, lam, spin];
    # sigma.b acting on spin-up is its first column
    def up_column(b):
        return np.stack([b[..., 2], b[..., 0] + 1j * b[..., 1]], axis=-1)

    def spin_op(b, v):
        # (sigma.b) v for b [N, l, 3] and v [N, m, 2] -> [N, l, m, 2]
        bz = b[:, :, None, 2]
        bm = (b[..., 0] - 1j * b[..., 1])[:, :, None]
        bp = (b[..., 0] + 1j * b[..., 1])[:, :, None]
        return np.stack([bz * v[:, None, :, 0] + bm * v[:, None, :, 1],
                         bp * v[:, None, :, 0] - bz * v[:, None, :, 1]], axis=-1)

    need_ee = name in ("eeee", "eedd")
    need_pd = name == "epd"
    phi1 = -1j * up_column(b1) / q1[:, None, None]
    phi2 = -1j * up_column(b2) / q2[:, None, None]

    def inner(x, y):
        return np.sum(np.conj(x) * y, axis=(1, 2, 3)) / q12

    ee = pd = None
    if need_ee or need_pd:
        # two-photon amplitudes [N, lam1, lam2, spin]
        ee = -1j * (spin_op(b1, phi2) + np.swapaxes(spin_op(b2, phi1), 1, 2)) / np.sqrt(2)
        k2g1 = np.einsum("ni,nli->nl", k2, g1)
        k1g2 = np.einsum("ni,nmi->nm", k1, g2)
        pd = (k2g1[:, :, None, None] * phi2[:, None, :, :] + k1g2[:, None, :, None] * phi1[:, :, None, :]) / np.sqrt(2)
    if name in ("dd", "eedd"):
        gg = np.einsum("nli,nmi->nlm", g1, g2)
        dd = np.sqrt(2) * gg[..., None] * SPIN_UP

    if name == "dd":
        v = inner(dd, dd)
    elif name == "eeee":
        v = inner(ee, ee)
    elif name == "epd":
        v = inner(pd, pd)
    else:
        v = inner(ee, dd)
    cross = np.real(inner(ee, pd)) if ee is not None else np.zeros_like(q12)
    return np.real(v), np.imag(v), cross


def _rotation_to(axis):
    """Rotation matrix taking e_z to the unit vector `axis`."""
    z = np.array([0.0, 0.0, 1.0])
    v = np.cross(z, axis)
    c = float(np.dot(z, axis))
    if np.linalg.norm(v) < 1e-15:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx / (1 + c)


def angular_reduce(name: str, r1: float, r2: float, t: float, lam, n_theta: int = 6, n_psi: int = 6,
                   phi1: float = 0.3):
    """Direct angular integration of `vector_integrand` at fixed (r1, r2, t).

    Integrates over the polar angle of k1 and the azimuth of k2 about k1
    by Gauss-Legendre x trapezoid, with the remaining azimuth of k1 fixed
    at `phi1` and contributing 2 pi. Includes the radial measure r1^2 r2^2,
    so the result is directly comparable to `reduced_kernel`.
    """
    if name in ONE_PHOTON:
        x, w = np.polynomial.legendre.leggauss(n_theta)
        k = r1 * np.stack([np.sqrt(1 - x**2) * np.cos(phi1), np.sqrt(1 - x**2) * np.sin(phi1), x], axis=-1)
        vals = vector_integrand(name, k, None, lam)
        return float(2 * np.pi * r1 * r1 * np.dot(w, vals))
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    psi = 2 * np.pi * (np.arange(n_psi) + 0.5) / n_psi
    st = np.sqrt(1 - t * t)
    k1s, k2s, ws = [], [], []
    for xi, wi in zip(x, wx):
        sx = np.sqrt(1 - xi * xi)
        u1 = np.array([sx * np.cos(phi1), sx * np.sin(phi1), xi])
        rot = _rotation_to(u1)
        for p in psi:
            u2 = rot @ np.array([st * np.cos(p), st * np.sin(p), t])
            k1s.append(r1 * u1)
            k2s.append(r2 * u2)
            ws.append(wi * 2 * np.pi / n_psi)
    vals = vector_integrand(name, np.array(k1s), np.array(k2s), lam)
    return float(2 * np.pi * (r1 * r2) ** 2 * np.dot(ws, vals))
