"""Closed-form formulas and asymptotics for the diluted contact process.

Subcritical cluster-size law, the oriented-model decay integral and its
Laplace-method asymptotics, the saddle-point power law on diluted random
graphs, the largest-cluster size, and the named scaling predictions for each
regime. Rate constants that the theory does not fix numerically (the 1D
exponential survival rate and the Arrhenius rate) are always passed in,
never hard-coded.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate


class TheoryError(ValueError):
    pass


def alpha_nu(nu: float) -> float:
    """Cluster-tail rate nu - 1 - ln(nu); zero exactly at nu = 1."""
    if nu <= 0:
        raise TheoryError("nu must be positive")
    return float(nu - 1.0 - math.log(nu))


def cluster_pmf(s: int, nu: float) -> float:
    """Asymptotic subcritical cluster-size density (not normalized).

    (1 / (nu sqrt(2 pi))) s^(-3/2) exp(-s alpha(nu)); valid for nu in (0, 1).
    """
    if not 0 < nu < 1:
        raise TheoryError("cluster_pmf is subcritical only: nu in (0, 1)")
    if s < 1:
        raise TheoryError("s must be a positive integer")
    return float(s ** -1.5 * math.exp(-s * alpha_nu(nu)) / (nu * math.sqrt(2 * math.pi)))


def noest_u_integral(t: float, a: float, b: float, rtol: float = 1e-8) -> float:
    """Quadrature of  integral_0^inf x exp(-b x - t exp(-a x)) dx.

    Computed after substituting y = t exp(-a x), which maps the integral to
    t^(-b/a) a^(-2) integral_0^t (log t - log y) y^(b/a - 1) exp(-y) dy; the
    transformed integrand is a smooth gamma-type peak, so adaptive quadrature
    stays accurate even when the original double-exponential wall at large t
    would make it miss the peak or underflow.
    """
    if a <= 0 or b <= 0 or t < 0:
        raise TheoryError("need a > 0, b > 0, t >= 0")
    if t == 0:
        return float(1.0 / b ** 2)
    z = b / a
    logt = math.log(t)

    def integrand(y):
        return (logt - math.log(y)) * y ** (z - 1.0) * math.exp(-y)

    hi = min(t, 750.0)  # exp(-y) underflows past this point
    bounds = sorted({0.0, min(z, hi), hi})
    total, err = 0.0, 0.0
    for lo, up in zip(bounds, bounds[1:]):
        val, e = scipy.integrate.quad(integrand, lo, up, epsrel=rtol, limit=200)
        total += val
        err += e
    if total > 0 and err > max(1e-6 * total, 1e-300):
        raise TheoryError(f"quadrature did not converge: value={total}, err={err}")
    return float(t ** -z / a ** 2 * total)


def noest_saddle_location(t: float, a: float, b: float) -> float:
    """Maximizer x* = (1/a) log(a t / b) of the integrand's exponent."""
    if a * t <= b:
        raise TheoryError("asymptotic regime needs a*t/b > 1")
    return float(math.log(a * t / b) / a)


def noest_u_asymptotic(t: float, a: float, b: float) -> float:
    """Laplace-method value of the decay integral, Gaussian correction included.

    exp(-b/a) (a t / b)^(-b/a) x* sqrt(2 pi / (a b)) with x* the exponent's
    maximizer; the leading log-log slope in t is -b/a.
    """
    xstar = noest_saddle_location(t, a, b)
    return float(math.exp(-b / a) * (a * t / b) ** (-b / a)
                 * xstar * math.sqrt(2 * math.pi / (a * b)))


def er_u_saddle(t: float, nu: float, A: float) -> float:
    """Leading saddle-point decay t^(-theta) with theta = alpha(nu) / A."""
    if not 0 < nu < 1:
        raise TheoryError("nu must lie in (0, 1)")
    if A <= 0:
        raise TheoryError("A must be positive")
    if t <= 0:
        raise TheoryError("t must be positive")
    return float(t ** (-alpha_nu(nu) / A))


def er_saddle_location(t: float, nu: float, A: float) -> float:
    """Dominant cluster size s0 = log(t A / alpha) / A of the decay integral."""
    alpha = alpha_nu(nu)
    if t * A <= alpha:
        raise TheoryError("asymptotic regime needs t A / alpha > 1")
    return float(math.log(t * A / alpha) / A)


def er_u_laplace(t: float, nu: float, A: float) -> float:
    """Full Laplace evaluation of the cluster-sum decay integral.

    Includes the s0^(-1/2) prefactor and the Gaussian width sqrt(2 pi/(alpha A)),
    so its local log-log slope carries the same O(1/log t) correction as the
    quadrature; er_u_saddle keeps only the leading power.
    """
    alpha = alpha_nu(nu)
    s0 = er_saddle_location(t, nu, A)
    peak = math.exp(-s0 * alpha - alpha / A)
    return float(s0 ** -0.5 * peak * math.sqrt(2 * math.pi / (alpha * A))
                 / (nu * math.sqrt(2 * math.pi)))


def er_u_quadrature(t: float, nu: float, A: float, rtol: float = 1e-8) -> float:
    """Quadrature of  integral s P(s) exp(-t exp(-A s)) ds  with P the cluster law."""
    if not 0 < nu < 1:
        raise TheoryError("nu must lie in (0, 1)")
    if A <= 0 or t < 0:
        raise TheoryError("need A > 0, t >= 0")
    alpha = alpha_nu(nu)
    pref = 1.0 / (nu * math.sqrt(2 * math.pi))

    def integrand(s):
        return pref * s ** -0.5 * math.exp(-s * alpha - t * math.exp(-A * s))

    pieces = []
    if t * A > alpha:
        s0 = math.log(t * A / alpha) / A
        pieces = [(1e-12, s0), (s0, math.inf)]
    else:
        pieces = [(1e-12, math.inf)]
    total = 0.0
    for lo, hi in pieces:
        val, _ = scipy.integrate.quad(integrand, lo, hi, epsrel=rtol, limit=200)
        total += val
    return float(total)


def largest_cluster_asymptotic(N: int, nu: float) -> float:
    """(1/alpha(nu)) (log N - (5/2) log log N), the subcritical largest cluster."""
    if not 0 < nu < 1:
        raise TheoryError("nu must lie in (0, 1)")
    if N < 16:
        raise TheoryError("N must be at least 16")
    return float((math.log(N) - 2.5 * math.log(math.log(N))) / alpha_nu(nu))


REGIMES = ("griffiths_1d", "griffiths_er", "griffiths_2d",
           "supercrit_er", "supercrit_2d", "critical_er", "critical_2d")


@dataclass(frozen=True)
class AsymptoticPrediction:
    """A named decay/survival law with its constants.

    form: "power_law" (survival time N^exponent / density t^-exponent),
    "exp_linear" (survival time exp(rate * N) up to slowly varying factors),
    or "stretched" (survival time exp(c N^exponent)).
    """

    regime: str
    form: str
    constants: dict = field(default_factory=dict)
    formula_text: str = ""

    def to_json(self) -> str:
        return json.dumps({"regime": self.regime, "form": self.form,
                           "constants": self.constants,
                           "formula_text": self.formula_text})


def _need(params, *names):
    missing = [k for k in names if params.get(k) is None]
    if missing:
        raise TheoryError("missing constants: " + ", ".join(missing)
                          + " (these must be estimated, not assumed)")
    return [float(params[k]) for k in names]


def scaling_predictions(regime: str, params: dict) -> AsymptoticPrediction:
    """Symbolic survival-time/decay prediction for a named regime.

    Required constants (gamma2, eta coefficients, p, nu) must be supplied by
    the caller; estimated rates are never assumed.
    """
    if regime not in REGIMES:
        raise TheoryError(f"unknown regime {regime!r}; one of {REGIMES}")
    if regime == "griffiths_1d":
        gamma2, p = _need(params, "gamma2", "p")
        if not 0 < p < 1:
            raise TheoryError("p must lie in (0, 1)")
        expo = gamma2 / math.log(1.0 / p)
        return AsymptoticPrediction(regime, "power_law",
                                    {"exponent": expo, "gamma2": gamma2, "p": p},
                                    "sigma_N >= N^(gamma2/log(1/p)); u(t) ~ t^(-gamma2/log(1/p))")
    if regime == "griffiths_er":
        gamma2, nu = _need(params, "gamma2", "nu")
        if not 0 < nu < 1:
            raise TheoryError("nu must lie in (0, 1)")
        expo = gamma2 / math.log(1.0 / nu)
        return AsymptoticPrediction(regime, "power_law",
                                    {"exponent": expo, "gamma2": gamma2, "nu": nu},
                                    "sigma_N >= N^(gamma2/log(1/nu))")
    if regime == "griffiths_2d":
        gamma2, eta2 = _need(params, "gamma2", "eta2")
        return AsymptoticPrediction(regime, "power_law",
                                    {"exponent": eta2 * gamma2, "gamma2": gamma2,
                                     "eta2": eta2},
                                    "sigma_N >= N^(eta2(p) gamma2)")
    if regime == "supercrit_er":
        gamma2, eta_er = _need(params, "gamma2", "eta_er")
        return AsymptoticPrediction(regime, "exp_linear",
                                    {"rate": gamma2 * eta_er, "gamma2": gamma2,
                                     "eta_er": eta_er},
                                    "sigma_N >= exp(gamma2 eta_ER(nu) N)")
    if regime == "supercrit_2d":
        gamma2, eta2 = _need(params, "gamma2", "eta2")
        return AsymptoticPrediction(regime, "exp_linear",
                                    {"rate": gamma2 * eta2, "gamma2": gamma2,
                                     "eta2": eta2, "log_correction": 1.0},
                                    "sigma_N >= exp(gamma2 eta2(p) N / log N)")
    if regime == "critical_er":
        return AsymptoticPrediction(regime, "stretched", {"exponent": 1.0 / 3.0},
                                    "longest path ~ N^(1/3); sigma_N ~ exp(c N^(1/3))")
    return AsymptoticPrediction(regime, "stretched", {"exponent": 0.5},
                                "longest path ~ N^(1/2); sigma_N ~ exp(c N^(1/2))")
