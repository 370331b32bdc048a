"""Adaptive Gauss-Kronrod quadrature (1D and 3D boxes) and seeded Monte Carlo."""
from __future__ import annotations

import heapq
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels

# Kronrod 15-point nodes on [-1, 1]; the odd-indexed ones are the Gauss 7-point nodes.
_XK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144845693013,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int


class NonConvergenceError(RuntimeError):
    def __init__(self, message: str, partial: QuadratureResult):
        super().__init__(f"{message} (value={partial.value!r}, error={partial.error_estimate:.3e})")
        self.partial = partial


def _gk_panel(f, a: float, b: float):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    y = np.asarray(f(c + h * _XK), dtype=float)
    k = h * np.dot(_WK, y)
    g = h * np.dot(_WG, y)
    return k, abs(k - g)


def quad_1d(f: Callable, a: float, b: float, tol: float = 1e-9, max_panels: int = 2000,
            substitute: bool = False) -> QuadratureResult:
    """Globally adaptive GK 7/15 quadrature of a vectorised f over [a, b].

    The panel with the largest error estimate is bisected until the summed
    estimate drops below tol. With substitute=True the integral is taken
    in s where x = a + (b - a) s^2, which regularises x^p singularities at a.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if b < a:
        raise ValueError("require a <= b")
    if a == b:
        return QuadratureResult(0.0, 0.0, 1)
    g = f
    lo, hi = a, b
    if substitute:
        span = b - a

        def g(s):
            return np.asarray(f(a + span * s * s), dtype=float) * (2 * span * s)

        lo, hi = 0.0, 1.0
    val, err = _gk_panel(g, lo, hi)
    heap = [(-err, lo, hi, val)]
    total_val, total_err, nev = val, err, 15
    while total_err > tol:
        if len(heap) >= max_panels:
            raise NonConvergenceError("quad_1d: panel limit reached", QuadratureResult(total_val, total_err, nev))
        neg_err, p, q, v = heapq.heappop(heap)
        m = 0.5 * (p + q)
        v1, e1 = _gk_panel(g, p, m)
        v2, e2 = _gk_panel(g, m, q)
        nev += 30
        total_val += v1 + v2 - v
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, p, m, v1))
        heapq.heappush(heap, (-e2, m, q, v2))
    # resum in a fixed order to shed accumulated update roundoff
    panels = sorted(heap, key=lambda item: item[1])
    value = float(sum(item[3] for item in panels))
    error = float(sum(-item[0] for item in panels))
    return QuadratureResult(value, error, nev)


_K3 = np.einsum("i,j,k->ijk", _WK, _WK, _WK)


def _gk_box(f, lo, hi):
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    x = [c[d] + h[d] * _XK for d in range(3)]
    X, Y, Z = np.meshgrid(*x, indexing="ij")
    y = np.asarray(f(X, Y, Z), dtype=float)
    vol = h[0] * h[1] * h[2]
    k = vol * np.einsum("ijk,ijk->", _K3, y)
    errs = np.empty(3)
    for d in range(3):
        w = [_WK, _WK, _WK]
        w[d] = _WG
        errs[d] = abs(k - vol * np.einsum("i,j,k,ijk->", w[0], w[1], w[2], y))
    return k, errs


def quad_3d_box(f: Callable, lam, tol: float = 1e-6, max_boxes: int = 4000,
                substitute: bool = True) -> QuadratureResult:
    """Adaptive tensor GK 7/15 cubature of f(r1, r2, t) over (0, lam]^2 x [-1, 1].

    Each box carries one error estimate per axis (Gauss rule on that axis,
    Kronrod on the others); the box with the largest total is halved along
    its worst axis. With substitute=True the radial axes use r = lam s^2.
    """
    lam = kernels._lam(lam)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if lam == 0:
        return QuadratureResult(0.0, 0.0, 1)
    g = f
    rmax = lam
    if substitute:
        def g(s1, s2, t):
            return np.asarray(f(lam * s1 * s1, lam * s2 * s2, t), dtype=float) * (4 * lam * lam * s1 * s2)

        rmax = 1.0
    lo0 = np.array([0.0, 0.0, -1.0])
    hi0 = np.array([rmax, rmax, 1.0])
    val, errs = _gk_box(g, lo0, hi0)
    counter = 0
    heap = [(-errs.sum(), counter, lo0, hi0, val, errs)]
    total_val, total_err, nev = val, errs.sum(), 15**3
    while total_err > tol:
        if len(heap) >= max_boxes:
            raise NonConvergenceError("quad_3d_box: box limit reached", QuadratureResult(total_val, total_err, nev))
        neg_err, _, lo, hi, v, e = heapq.heappop(heap)
        d = int(np.argmax(e))
        mid = 0.5 * (lo[d] + hi[d])
        hi_a = hi.copy()
        hi_a[d] = mid
        lo_b = lo.copy()
        lo_b[d] = mid
        total_val -= v
        total_err += neg_err
        for a, b in ((lo, hi_a), (lo_b, hi)):
            vv, ee = _gk_box(g, a, b)
            nev += 15**3
            counter += 1
            total_val += vv
            total_err += ee.sum()
            heapq.heappush(heap, (-ee.sum(), counter, a, b, vv, ee))
    boxes = sorted(heap, key=lambda item: item[1])
    value = float(sum(item[4] for item in boxes))
    error = float(sum(-item[0] for item in boxes))
    return QuadratureResult(value, error, nev)


def _sample_ball(rng: np.random.Generator, n: int, lam: float) -> np.ndarray:
    """n points uniform in the ball of radius lam, by rejection from the cube."""
    out = np.empty((0, 3))
    while len(out) < n:
        m = int(1.25 * (n - len(out))) + 16
        pts = rng.uniform(-lam, lam, size=(m, 3))
        pts = pts[np.einsum("ij,ij->i", pts, pts) <= lam * lam]
        out = np.concatenate([out, pts])
    return out[:n]


def _mc_block(name: str, lam: float, n: int, seed_seq: np.random.SeedSequence):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    k1 = _sample_ball(rng, n, lam)
    k2 = None if name in kernels.ONE_PHOTON else _sample_ball(rng, n, lam)
    vals, imag, cross = kernels.vector_integrand_parts(name, k1, k2, lam)
    scale = np.max(np.abs(vals)) if len(vals) else 0.0
    # the eedd overlap is complex pointwise; only its real part enters
    if name != "eedd" and np.max(np.abs(imag), initial=0.0) > 1e-12 * max(scale, 1e-300):
        raise ArithmeticError(f"{name}: imaginary part did not cancel")
    if np.max(np.abs(cross), initial=0.0) > 1e-12 * max(scale, 1e-300):
        raise ArithmeticError(f"{name}: real E/P cross overlap did not vanish")
    return float(np.sum(vals)), float(np.sum(vals * vals))


def default_threads() -> int:
    return max(1, int(os.environ.get("PFLAB_THREADS", "1")))


def mc_vev(name: str, lam, n_samples: int = 10**7, seed: int = 0, block: int = 1 << 16,
           threads: int | None = None) -> MCEstimate:
    """Plain Monte Carlo for the named VEV with uniform samples in the cutoff ball(s).

    Samples are drawn in fixed-size blocks, block i seeded from
    SeedSequence(seed).spawn; block sums are combined in block order, so
    the result does not depend on the thread count.
    """
    if name not in kernels.KERNEL_NAMES:
        raise ValueError(f"unknown integral {name!r}")
    if n_samples < 10**4:
        raise ValueError("n_samples must be >= 1e4")
    lam = kernels._lam(lam)
    if lam == 0:
        return MCEstimate(0.0, 0.0, n_samples, seed)
    sizes = [block] * (n_samples // block)
    if n_samples % block:
        sizes.append(n_samples % block)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    threads = threads or default_threads()
    jobs = list(zip(sizes, seqs))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda j: _mc_block(name, lam, j[0], j[1]), jobs))
    else:
        parts = [_mc_block(name, lam, n, s) for n, s in jobs]
    s1 = 0.0
    s2 = 0.0
    for a, b in parts:
        s1 += a
        s2 += b
    n = n_samples
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    volume = (4 * np.pi / 3 * lam**3) ** (1 if name in kernels.ONE_PHOTON else 2)
    return MCEstimate(float(volume * mean), float(volume * np.sqrt(var / n)), n_samples, seed)
