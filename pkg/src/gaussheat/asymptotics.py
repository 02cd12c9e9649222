"""Small-time predictors, exponential error bounds and weak-convergence diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .covariance import (
    MU_B,
    ProcessSpec,
    TimeChangedBM,
    cov,
    mu_closed_form,
    sigma_sq,
    slowly_varying_bounds,
    variance,
)
from .errors import RangeError, UnsupportedTimeChange, ValidityError
from .geometry import Ball, Domain, Interval, inner_volume, surface_area

SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass
class AsymptoticPrediction:
    deficit_prediction: float
    rate_value: float
    limit_constant: float
    error_bound: Optional[float] = None
    # natural log of error_bound; finite even when the bound underflows
    log_error_bound: Optional[float] = None
    validity: dict = field(default_factory=dict)


def predict_rhc(spec: ProcessSpec, domain: Domain, t: float) -> AsymptoticPrediction:
    """|D| - H_D(t) ~ |dD| sqrt(R_t) / sqrt(2 pi), with the 1D exponential error bound."""
    r = variance(spec, t)
    if not r > 0:
        raise RangeError(f"variance at t={t} is not positive")
    sd = math.sqrt(r)
    const = surface_area(domain) / SQRT_2PI
    bound = log_bound = None
    if isinstance(domain, Interval):
        L = domain.length
        log_bound = math.log(2 * r ** 1.5 / (L * L * SQRT_2PI)) - L * L / (2 * r)
        bound = math.exp(log_bound)
    return AsymptoticPrediction(const * sd, sd, const, bound, log_bound,
                                {"variance_positive": True})


def predict_shc_1d(spec: ProcessSpec, domain: Interval, t: float,
                   mu_t: Optional[float] = None, strict: bool = False) -> AsymptoticPrediction:
    """|D| - Q_D(t) = 2 mu_t - Error_Q(t) for mu_t < |D|/2.

    ``mu_t`` defaults to the closed form.  When ``mu_t >= |D|/2`` the
    prediction is still returned, flagged invalid and without a bound, unless
    ``strict`` is set.
    """
    if not isinstance(domain, Interval):
        raise RangeError("predict_shc_1d needs an interval")
    if mu_t is None:
        mu_t = mu_closed_form(spec, t)
        if mu_t is None:
            raise RangeError(f"no closed-form mu_t for {spec.label}; pass an estimate")
    L = domain.length
    valid = mu_t < L / 2
    if not valid and strict:
        raise ValidityError(f"mu_t = {mu_t:g} >= |D|/2 = {L / 2:g}")
    bound = log_bound = None
    if valid:
        s2 = sigma_sq(spec, t)
        s = math.sqrt(s2)
        terms = [math.log(4 * s2 / (gap)) - 0.5 * (gap / s) ** 2
                 for gap in (L - mu_t, L / 2 - mu_t)]
        log_bound = float(np.logaddexp(*terms))
        bound = math.exp(log_bound)
    return AsymptoticPrediction(2 * mu_t, mu_t, 2.0, bound, log_bound,
                                {"mu_below_half_length": bool(valid)})


def shc_upper_bound_multid(spec: ProcessSpec, domain: Ball, t: float, a: float, mu_t: float,
                           sigma_t_sq: Optional[float] = None) -> float:
    """d^{3/2} 2^d |dD| mu_t + 4 d |D_a| exp(-(a/sqrt(d) - mu_t)^2 / (2 sigma_t^2))."""
    d = domain.dim
    if not 0 < a <= domain.ball_radius / 2:
        raise ValidityError(f"need 0 < a <= R/2, got a={a}")
    if not mu_t < a / math.sqrt(d):
        raise ValidityError(f"need mu_t < a/sqrt(d) = {a / math.sqrt(d):g}, got {mu_t:g}")
    s2 = sigma_sq(spec, t) if sigma_t_sq is None else sigma_t_sq
    first = d ** 1.5 * 2 ** d * surface_area(domain) * mu_t
    second = 4 * d * inner_volume(domain, a) * math.exp(
        -((a / math.sqrt(d) - mu_t) ** 2) / (2 * s2))
    return first + second


def predict_shc_multid(domain: Domain, mu_t: float, sup_Y: float) -> AsymptoticPrediction:
    """|D| - Q_D(t) ~ |dD| E[sup Y] mu_t."""
    if not 0 < sup_Y <= 1:
        raise RangeError(f"E[sup Y] must lie in (0, 1], got {sup_Y}")
    const = surface_area(domain) * sup_Y
    return AsymptoticPrediction(const * mu_t, mu_t, const, None, None, {"sup_Y": sup_Y})


def borell_tis_tail(x: float, mu_t: float, sigma_t: float) -> float:
    """Upper bound min(1, 2 exp(-(x - mu_t)^2 / (2 sigma_t^2))) on P(sup > x)."""
    if not x > mu_t:
        raise RangeError("Borell-TIS bound needs x > mu_t")
    if not sigma_t > 0:
        raise RangeError("sigma_t must be positive")
    return min(1.0, 2 * math.exp(-((x - mu_t) ** 2) / (2 * sigma_t ** 2)))


def _time_changed(spec):
    if not isinstance(spec, TimeChangedBM):
        raise UnsupportedTimeChange("diagnostic is defined for time-changed BM only")
    return spec.time_change


def scaled_covariance_diag(spec: TimeChangedBM, t: float, s: float, r: float):
    """(cov(ts, tr) / mu_t^2, (s ^ r)^rho / mu_B^2)."""
    tc = _time_changed(spec)
    mu = mu_closed_form(spec, t)
    measured = cov(spec, t * s, t * r) / mu ** 2
    limit = min(s, r) ** tc.index / MU_B ** 2
    return measured, limit


def moment_condition_diag(spec: TimeChangedBM, t: float, r: float, s: float, u: float):
    """Both sides of the scaled fourth-moment tightness condition with kappa = 2.

    lhs = (alpha(tu) - alpha(ts)) (alpha(ts) - alpha(tr)) / (mu_B^4 alpha(t)^2)
    rhs = ((H(u) + M u^rho) - (H(r) + M r^rho))^2 / (m^2 mu_B^4)
    """
    tc = _time_changed(spec)
    if not 0 <= r <= s <= u <= 1:
        raise RangeError("need 0 <= r <= s <= u <= 1")
    m, M, H = slowly_varying_bounds(tc)
    rho = tc.index
    at = float(tc(t))
    lhs = (float(tc(t * u)) - float(tc(t * s))) * (float(tc(t * s)) - float(tc(t * r)))
    lhs /= MU_B ** 4 * at ** 2
    g = float(H(u)) + M * u ** rho - (float(H(r)) + M * r ** rho)
    rhs = g * g / (m * m * MU_B ** 4)
    return lhs, rhs


def quasi_helix_mu_bounds(C1: float, C2: float, H1: float, H2: float, t: float):
    """Two-sided bounds on mu_t for a process with C1|s-r|^H1 <= sd(X_s - X_r) <= C2|s-r|^H2."""
    if not (0 < H1 < 1 and 0 < H2 < 1):
        raise RangeError("need 0 < H1, H2 < 1")
    if not (C1 > 0 and C2 > 0):
        raise RangeError("need C1, C2 > 0")
    if not 0 < t <= 1:
        raise RangeError("need t in (0, 1]")
    lower = C1 / (5 * math.sqrt(H1)) * t ** H1
    upper = 16.3 * C2 / math.sqrt(H2) * t ** H2
    return lower, upper
