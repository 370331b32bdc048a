"""Zero-energy resonance of a radial well, its truncation at |x| ~ 1/alpha, and the binding margin.

Radial functions are handled through U(r) = r psi(r). For a radial psi
with U(0) = 0:

    |psi|^2     = 4 pi int U^2,
    |p psi|^2   = 4 pi int U'^2,
    |p^2 psi|^2 = 4 pi int U''^2.

Inside the well U solves U'' = g V U by fixed-step RK4, with the needed
integrals carried as extra ODE components. Outside the well the
resonance is U = C, so the truncated state is C u_cut(eps alpha r) and
every exterior integral reduces to an integral of the cutoff pair on [1, 2].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .integrate import quad_1d, quad_3d_box


@dataclass(frozen=True)
class RadialPotential:
    v: Callable
    r0: float
    g: float = 1.0
    name: str = "custom"

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.r0, self.g * self.v(r), 0.0)


def square_well(r0: float = 1.0) -> RadialPotential:
    return RadialPotential(lambda r: -np.ones_like(r), r0, 1.0, "square_well")


def smooth_bump(r0: float = 1.0) -> RadialPotential:
    return RadialPotential(lambda r: -(1 - (r / r0) ** 2) ** 2, r0, 1.0, "smooth_bump")


POTENTIALS = {"square_well": square_well, "smooth_bump": smooth_bump}


# state layout: u, u', int gVu s, int gVu, int u'^2, int (gVu)^2, int (u'^2 + gVu^2), int u^2
def _rhs(r, y, gv):
    u, up = y[0], y[1]
    f = gv(r) * u
    return np.array([up, f, f * r, f, up * up, f * f, up * up + f * u, u * u])


@dataclass
class ShootResult:
    r: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    u_prime_at_r0: float

    @property
    def u(self):
        return self.y[:, 0]


def radial_shoot(potential: RadialPotential, g: float, n_steps: int = 4000) -> ShootResult:
    """RK4 for u'' = g V u on [0, r0], u(0) = 0, u'(0) = 1, with running integrals."""
    if g < 0:
        raise ValueError("g must be >= 0")
    h = potential.r0 / n_steps
    if h <= 1e-300 or not np.isfinite(h):
        raise FloatingPointError("step size underflow")

    def gv(r):
        return g * potential.v(np.asarray(r, dtype=float))

    y = np.zeros(8)
    y[1] = 1.0
    ys = np.empty((n_steps + 1, 8))
    ys[0] = y
    r = 0.0
    for i in range(n_steps):
        k1 = _rhs(r, y, gv)
        k2 = _rhs(r + h / 2, y + h / 2 * k1, gv)
        k3 = _rhs(r + h / 2, y + h / 2 * k2, gv)
        k4 = _rhs(r + h, y + h * k3, gv)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        r = (i + 1) * h
        ys[i + 1] = y
    return ShootResult(np.linspace(0.0, potential.r0, n_steps + 1), ys, float(y[1]))


@dataclass
class ResonanceResult:
    g_star: float
    potential: RadialPotential = field(repr=False)
    shoot: ShootResult = field(repr=False)
    shoot_residual: float
    integral_equation_residual: float
    tail_deviation: float
    bracket: tuple

    @property
    def tail_constant(self) -> float:
        return float(self.shoot.u[-1])

    def psi(self, r):
        """psi(r) = u(r)/r, continued as the straight line u(r0) + u'(r0)(r - r0) outside."""
        r = np.asarray(r, dtype=float)
        sh = self.shoot
        u_in = np.interp(r, sh.r, sh.u)
        u_out = sh.u[-1] + sh.u_prime_at_r0 * (r - self.potential.r0)
        return np.where(r <= self.potential.r0, u_in, u_out) / r


class NoResonanceError(ValueError):
    pass


def integral_equation_residual(res: ShootResult, potential: RadialPotential, g: float, n_check: int = 200) -> float:
    """Max relative residual of psi = -(1/4 pi) int gV psi / |x - y| at check points in (0, 2 r0].

    The Newton kernel averages to (1/r) int_0^r f s^2 ds + int_r^inf f s ds
    for radial f; with f = gV psi = gV u / s both pieces are running
    integrals from the shooting run.
    """
    n = len(res.r) - 1
    if n % n_check:
        raise ValueError("n_steps must be a multiple of n_check")
    idx = np.arange(n // n_check, n + 1, n // n_check)
    r = res.r[idx]
    y = res.y[idx]
    i1, i2 = y[:, 2], y[:, 3]
    i2_end = res.y[-1, 3]
    psi_rhs = -(i1 / r + (i2_end - i2))
    psi = y[:, 0] / r
    rel = np.abs(psi_rhs - psi) / np.abs(psi)
    # outside the support the equation gives -I1(r0)/r; compare with u(r0) + u'(r0)(r - r0)
    r_out = potential.r0 * (1 + np.arange(1, n_check // 2 + 1) / (n_check // 2))
    u_out = res.y[-1, 0] + res.u_prime_at_r0 * (r_out - potential.r0)
    rel_out = np.abs(-res.y[-1, 2] - u_out) / np.abs(u_out)
    return float(max(rel.max(), rel_out.max()))


def find_resonance_coupling(potential: RadialPotential, bracket=(0.1, 20.0), tol: float = 1e-12,
                            n_steps: int = 4000, max_iter: int = 200) -> ResonanceResult:
    """Bisection on g -> u'(r0; g) to the first sign change from + to -.

    The returned g_star is the lower end of the final bracket, so
    u'(r0) >= 0 there: the well is at, not past, the threshold.
    """
    lo, hi = map(float, bracket)
    f_lo = radial_shoot(potential, lo, n_steps).u_prime_at_r0
    f_hi = radial_shoot(potential, hi, n_steps).u_prime_at_r0
    if not (f_lo > 0 > f_hi):
        raise NoResonanceError(f"no sign change of u'(r0) on [{lo}, {hi}]: {f_lo:.3e}, {f_hi:.3e}")
    best = radial_shoot(potential, lo, n_steps)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        sh = radial_shoot(potential, mid, n_steps)
        if sh.u_prime_at_r0 >= 0:
            lo, best = mid, sh
        else:
            hi = mid
        if abs(best.u_prime_at_r0) <= tol:
            break
    resid = integral_equation_residual(best, potential, lo)
    r0 = potential.r0
    u0 = best.u[-1]
    tail = abs(best.u_prime_at_r0) * 2 * r0 / abs(u0)  # max |u(r) - u(r0)|/u(r0) on [r0, 3 r0]
    return ResonanceResult(lo, potential, best, best.u_prime_at_r0, resid, tail, (lo, hi))


def scan_bracket(potential: RadialPotential, g_max: float = 200.0, n: int = 400, n_steps: int = 400):
    """First interval [g_k, g_k+1] on a uniform grid where u'(r0) turns negative."""
    gs = np.linspace(g_max / n, g_max, n)
    prev = gs[0]
    if radial_shoot(potential, prev, n_steps).u_prime_at_r0 <= 0:
        raise NoResonanceError("u'(r0) already negative at the smallest coupling")
    for g in gs[1:]:
        if radial_shoot(potential, g, n_steps).u_prime_at_r0 < 0:
            return prev, g
        prev = g
    raise NoResonanceError(f"no resonance below g = {g_max}")


# ---------------------------------------------------------------------------
# C^2 partition of unity on [1, 2]

def _smoothstep(t):
    s = np.clip(np.asarray(t, dtype=float) - 1.0, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s * s)


def _smoothstep_d1(t):
    s = np.clip(np.asarray(t, dtype=float) - 1.0, 0.0, 1.0)
    return 30 * s * s * (1 - s) ** 2


def _smoothstep_d2(t):
    s = np.clip(np.asarray(t, dtype=float) - 1.0, 0.0, 1.0)
    return 60 * s * (1 - s) * (1 - 2 * s)


def u_cut(t):
    s = _smoothstep(t)
    return np.where(s >= 1.0, 0.0, np.cos(0.5 * np.pi * s))


def v_cut(t):
    return np.sin(0.5 * np.pi * _smoothstep(t))


def u_cut_d1(t):
    return -0.5 * np.pi * np.sin(0.5 * np.pi * _smoothstep(t)) * _smoothstep_d1(t)


def v_cut_d1(t):
    return 0.5 * np.pi * np.cos(0.5 * np.pi * _smoothstep(t)) * _smoothstep_d1(t)


def u_cut_d2(t):
    a = 0.5 * np.pi * _smoothstep(t)
    return -0.5 * np.pi * (np.cos(a) * 0.5 * np.pi * _smoothstep_d1(t) ** 2 + np.sin(a) * _smoothstep_d2(t))


def _cut_integrals(tol: float = 1e-13) -> dict:
    f = {
        "u2": lambda t: u_cut(t) ** 2,
        "u1sq": lambda t: u_cut_d1(t) ** 2,
        "v1sq": lambda t: v_cut_d1(t) ** 2,
        "u2sq": lambda t: u_cut_d2(t) ** 2,
    }
    return {k: quad_1d(fn, 1.0, 2.0, tol).value for k, fn in f.items()}


# ---------------------------------------------------------------------------

@dataclass
class TruncatedState:
    epsilon: float
    alpha: float
    r: np.ndarray = field(repr=False)
    psi_eps: np.ndarray = field(repr=False)
    norm2: float
    p_norm2: float
    p2_norm2: float
    p_norm2_untruncated: float
    c1: float
    c2: float
    partition_error: float


def truncate_state(res: ResonanceResult, alpha: float, epsilon: float) -> TruncatedState:
    """psi_eps(x) = psi(x) u_cut(eps alpha |x|) and its three norms.

    alpha = 0 means no truncation; then |psi_eps|^2 is infinite.
    """
    if alpha < 0 or epsilon <= 0:
        raise ValueError("need alpha >= 0 and epsilon > 0")
    pot = res.potential
    r0 = pot.r0
    ea = epsilon * alpha
    if ea > 0 and 1 / ea < 2 * r0:
        raise ValueError(f"1/(eps alpha) = {1 / ea} is below 2 r0 = {2 * r0}")
    sh = res.shoot
    inner = sh.y[-1]
    C = inner[0]
    cut = _cut_integrals()
    four_pi = 4 * np.pi
    p_in = inner[4]
    p2_in = inner[5]
    if ea > 0:
        R = 1 / ea
        norm2 = four_pi * (inner[7] + C * C * (R - r0) + C * C * R * cut["u2"])
        p_norm2 = four_pi * (p_in + C * C * ea * cut["u1sq"])
        p2_norm2 = four_pi * (p2_in + C * C * ea**3 * cut["u2sq"])
        r_out = np.concatenate([r0 + (R - r0) * 0.5 * (1 - np.cos(np.linspace(0, np.pi, 64)[1:])),
                                R * (1.5 - 0.5 * np.cos(np.linspace(0, np.pi, 64)[1:]))])
        psi_out = C * u_cut(ea * r_out) / r_out
    else:
        norm2 = float("inf")
        p_norm2 = four_pi * p_in
        p2_norm2 = four_pi * p2_in
        r_out = r0 * (1 + np.linspace(0, 2, 64)[1:])
        psi_out = C / r_out
    r_tab = np.concatenate([sh.r[1:], r_out])
    psi_tab = np.concatenate([sh.u[1:] / sh.r[1:], psi_out])
    t = np.linspace(0.0, 3.0, 301)
    partition = float(np.max(np.abs(u_cut(t) ** 2 + v_cut(t) ** 2 - 1)))
    c1 = p2_norm2 / p_norm2
    c2 = p_norm2 / (ea * norm2) if ea > 0 else float("nan")
    return TruncatedState(epsilon, alpha, r_tab, psi_tab, float(norm2), float(p_norm2), float(p2_norm2),
                          float(four_pi * p_in), float(c1), float(c2), partition)


def closed_form_pd(lam) -> float:
    """(2/(3 pi)) ln(1 + lam): the ratio (psi, p.D A^-1 p.D* psi)/|p psi|^2."""
    return 2 / (3 * np.pi) * np.log1p(kernels._lam(lam))


def pd_quadrature(lam, direction=(0.3, -0.5, 0.8), tol: float = 1e-12) -> float:
    """sum_lambda int [G(p).l]^2/(|p|^2 + |p|) d^3p for a unit vector l, with explicit frames.

    Spherical coordinates about e_z; the azimuth is carried on the second
    radial axis of the box cubature.
    """
    lam = kernels._lam(lam)
    if lam == 0:
        return 0.0
    ell = np.asarray(direction, dtype=float)
    ell = ell / np.linalg.norm(ell)

    def f(r, s, x):
        phi = 2 * np.pi * s / lam
        st = np.sqrt(np.clip(1 - x * x, 0.0, None))
        p = np.stack([r * st * np.cos(phi), r * st * np.sin(phi), r * x], axis=-1)
        shape = p.shape[:-1]
        g = kernels.g_amplitude(p.reshape(-1, 3), lam)
        proj = np.einsum("nli,i->nl", g, ell)
        val = np.sum(proj * proj, axis=1).reshape(shape)
        return val / (r * r + r) * r * r * (2 * np.pi / lam)

    return quad_3d_box(f, lam, tol, max_boxes=20000).value


@dataclass
class BindingReport:
    lam: float
    alpha: float
    epsilon: float
    d: float
    margin: float
    delta: float
    nu: float
    kinetic_truncated: float
    field_gain: float
    localization_terms: dict
    state: TruncatedState = field(repr=False)

    @property
    def binds(self) -> bool:
        return self.margin < 0


def binding_margin(res: ResonanceResult, lam, alpha: float, epsilon: float) -> BindingReport:
    """margin = (psi_eps, [p^2 + V] psi_eps) - alpha ln(1 + lam)/(6 pi (C1 + 1)) |p psi_eps|^2.

    The kinetic term is computed directly and through the IMS split
    (psi,[p^2+V]psi) - (psi v,[p^2+V] psi v) + (psi, [|grad v|^2 + |grad u|^2] psi);
    the two are required to agree to 1e-8 relative.
    """
    lam = kernels._lam(lam)
    st = truncate_state(res, alpha, epsilon)
    ea = epsilon * alpha
    four_pi = 4 * np.pi
    inner = res.shoot.y[-1]
    C = inner[0]
    r0 = res.potential.r0
    # direct: inner energy integral plus the exterior gradient in r
    direct = four_pi * inner[6]
    if ea > 0:
        R = 1 / ea
        ext = quad_1d(lambda r: (C * ea * u_cut_d1(ea * r)) ** 2, R, 2 * R, 1e-14 * max(1.0, C * C * ea)).value
        direct += four_pi * ext
    cut = _cut_integrals()
    first = four_pi * inner[0] * inner[1]
    second = four_pi * C * C * ea * cut["v1sq"]
    third = four_pi * C * C * ea * (cut["u1sq"] + cut["v1sq"])
    ims = first - second + third
    scale = max(abs(direct), abs(ims), 1e-300)
    ims_rel = abs(direct - ims) / scale
    if ims_rel > 1e-8 and abs(direct - ims) > 1e-10:
        raise ArithmeticError(f"IMS split mismatch: {direct!r} vs {ims!r}")
    d = 1 / (2 * (st.c1 + 1))
    gain = alpha * np.log1p(lam) / (6 * np.pi * (st.c1 + 1)) * st.p_norm2
    margin = direct - gain
    delta = -margin / (alpha**2 * st.norm2) if alpha > 0 and np.isfinite(st.norm2) else 0.0
    nu = -margin / (alpha * st.p_norm2_untruncated) if alpha > 0 else 0.0
    terms = dict(direct=direct, ims_total=ims, resonance_term=first, outer_term=second, gradient_term=third,
                 ims_relative_mismatch=ims_rel, r0=r0)
    return BindingReport(lam, alpha, epsilon, d, float(margin), float(delta), float(nu), float(direct), float(gain),
                         terms, st)


def epsilon_scan(res: ResonanceResult, lam, alpha: float, j_max: int = 12) -> list:
    """binding_margin over eps = 2^-j, j = 0..j_max, skipping eps that violate 1/(eps alpha) >= 2 r0."""
    out = []
    for j in range(j_max + 1):
        eps = 2.0**-j
        if alpha > 0 and 1 / (eps * alpha) < 2 * res.potential.r0:
            continue
        out.append(binding_margin(res, lam, alpha, eps))
    return out


def best_margin(reports: list) -> BindingReport:
    return min(reports, key=lambda rep: rep.margin)
