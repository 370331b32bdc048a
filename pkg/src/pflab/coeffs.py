"""Self-energy coefficients: closed-form e1, the second-order vacuum expectation values, e2."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .integrate import NonConvergenceError, QuadratureResult, mc_vev, quad_1d, quad_3d_box

TWO_PHOTON = ("dd", "eeee", "epd", "eedd")
# e2 = -(dd + eeee + 4 epd - 2 eedd - iee * n1)
E2_WEIGHTS = {"dd": -1.0, "eeee": -1.0, "epd": -4.0, "eedd": 2.0}


@dataclass
class SelfEnergyCoefficients:
    lam: float
    e1: float
    e2: float
    breakdown: dict
    e2_mc: float | None = None
    e2_mc_error: float | None = None


@dataclass
class SelfEnergyPrediction:
    alpha: float
    sigma: float
    error_order_note: str = "neglected remainder O(alpha^(5/2) ln(1/alpha))"


class CoefficientError(RuntimeError):
    def __init__(self, message: str, partial: dict):
        super().__init__(message)
        self.partial = partial


def e1_closed(lam) -> float:
    """(2/pi)(lam - ln(1 + lam)), computed with log1p for small lam."""
    lam = kernels._lam(lam)
    if lam < 0:
        raise ValueError("lam must be >= 0")
    return 2 / np.pi * (lam - np.log1p(lam))


def _one_photon_quad(name: str, lam: float, tol: float) -> QuadratureResult:
    if lam == 0:
        return QuadratureResult(0.0, 0.0, 1)
    return quad_1d(lambda r: kernels.reduced_kernel(name, r, None, None, lam), 0.0, lam, tol)


def iee(lam, tol: float = 1e-9) -> QuadratureResult:
    """<0|E A^-1 E*|0> = (2/pi) int_0^lam r^2/(1 + r) dr."""
    return _one_photon_quad("iee", kernels._lam(lam), tol)


def n1(lam, tol: float = 1e-9) -> QuadratureResult:
    """|A^-1 E*|0>|^2 = (2/pi) int_0^lam r/(1 + r)^2 dr."""
    return _one_photon_quad("n1", kernels._lam(lam), tol)


def vev2(name: str, lam, tol: float = 1e-6, n_samples: int | None = 10**7, seed: int = 0,
         variant: str = "exact", threads: int | None = None):
    """Quadrature and Monte Carlo values of a two-photon vacuum expectation value.

    n_samples=None skips the Monte Carlo route and returns (quad, None).
    """
    if name not in TWO_PHOTON:
        raise ValueError(f"unknown two-photon term {name!r}")
    lam = kernels._lam(lam)
    q = quad_3d_box(lambda a, b, c: kernels.reduced_kernel(name, a, b, c, lam, variant), lam, tol)
    mc = None if n_samples is None else mc_vev(name, lam, n_samples, seed, threads=threads)
    return q, mc


def one_photon(name: str, lam, tol: float = 1e-9, n_samples: int | None = 10**7, seed: int = 0,
               threads: int | None = None):
    lam = kernels._lam(lam)
    q = _one_photon_quad(name, lam, tol)
    mc = None if n_samples is None else mc_vev(name, lam, n_samples, seed, threads=threads)
    return q, mc


def combine_e2(values: dict) -> float:
    return sum(w * values[n] for n, w in E2_WEIGHTS.items()) + values["iee"] * values["n1"]


def e2_total(lam, tol: float = 1e-6, tol_1d: float = 1e-9, n_samples: int | None = 10**7, seed: int = 0,
             variant: str = "exact", threads: int | None = None) -> SelfEnergyCoefficients:
    """e1, e2 and the per-term breakdown {name: (QuadratureResult, MCEstimate | None)}.

    variant="commuting" swaps in the eeee/epd forms with commuting spin
    matrices (a diagnostic; the MC route always uses the exact integrand).
    """
    lam = kernels._lam(lam)
    breakdown: dict = {}
    try:
        for name in ("iee", "n1"):
            breakdown[name] = one_photon(name, lam, tol_1d, n_samples, seed, threads)
        for name in TWO_PHOTON:
            v = variant if name in ("eeee", "epd") else "exact"
            breakdown[name] = vev2(name, lam, tol, n_samples, seed, v, threads)
    except NonConvergenceError as exc:
        raise CoefficientError(f"e2_total: {exc}", breakdown) from exc
    quad_vals = {n: breakdown[n][0].value for n in breakdown}
    e1 = e1_closed(lam)
    e2 = combine_e2(quad_vals)
    e2_mc = e2_err = None
    if n_samples is not None:
        mc_vals = {n: breakdown[n][1].mean for n in breakdown}
        e2_mc = combine_e2(mc_vals)
        # linear propagation; the two one-photon means share their samples
        e2_err = sum(abs(w) * breakdown[n][1].std_error for n, w in E2_WEIGHTS.items())
        e2_err += abs(mc_vals["n1"]) * breakdown["iee"][1].std_error + abs(mc_vals["iee"]) * breakdown["n1"][1].std_error
    return SelfEnergyCoefficients(lam, e1, e2, breakdown, e2_mc, e2_err)


def sigma_prediction(lam, alpha: float, coefficients: SelfEnergyCoefficients | None = None,
                     tol: float = 1e-6) -> SelfEnergyPrediction:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    c = coefficients or e2_total(lam, tol=tol, n_samples=None)
    return SelfEnergyPrediction(alpha, alpha * c.e1 + alpha * alpha * c.e2)
