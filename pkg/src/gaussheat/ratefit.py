"""Power-law fits and convergence of deficit / rate ratios over a t-sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InsufficientData, NonPositiveValue


@dataclass
class RateFitResult:
    exponent: float
    log_constant: float
    r_squared: float
    n_points: int

    @property
    def constant(self) -> float:
        return math.exp(self.log_constant)


def fit_power_law(points, weights=None) -> RateFitResult:
    """Least-squares line through (log t, log y).

    Parameters
    ----------
    points : sequence of (t, y) pairs, t and y positive, t distinct, at least 3.
    weights : optional per-point weights for the log-space residuals, e.g.
        (y / stderr)**2 for Monte Carlo sweeps.  Unweighted by default.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise InsufficientData("need at least 3 (t, y) points")
    t, y = pts[:, 0], pts[:, 1]
    if np.any(t <= 0) or np.any(y <= 0):
        raise NonPositiveValue("power-law fit needs positive t and y")
    if np.unique(t).size != t.size:
        raise InsufficientData("t values must be distinct")
    x, z = np.log(t), np.log(y)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    sw = w.sum()
    xm, zm = (w * x).sum() / sw, (w * z).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    slope = (w * (x - xm) * (z - zm)).sum() / sxx
    intercept = zm - slope * xm
    ss_res = (w * (z - intercept - slope * x) ** 2).sum()
    ss_tot = (w * (z - zm) ** 2).sum()
    if ss_tot <= 1e-28 * max(1.0, (w * z * z).sum()):
        r2 = 1.0 if ss_res <= 1e-24 * max(1.0, (w * z * z).sum()) else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFitResult(float(slope), float(intercept), float(r2), int(t.size))


def ratio_convergence(times, deficits, rates, rate_stderrs=None):
    """(t, deficit / rate, stderr) triples.

    ``deficits`` are :class:`~gaussheat.estimators.EstimateWithCI` (or plain
    floats, treated as exact).  Rates without a stderr are treated as exact;
    otherwise relative errors are combined in quadrature.
    """
    times = list(times)
    deficits = list(deficits)
    rates = list(rates)
    if not len(times) == len(deficits) == len(rates):
        raise DimensionMismatch("times, deficits and rates must align")
    if rate_stderrs is None:
        rate_stderrs = [0.0] * len(rates)
    elif len(rate_stderrs) != len(rates):
        raise DimensionMismatch("rate_stderrs must align with rates")
    out = []
    for t, d, r, rse in zip(times, deficits, rates, rate_stderrs):
        if not r > 0:
            raise NonPositiveValue("rates must be positive")
        value = getattr(d, "value", d)
        dse = getattr(d, "stderr", 0.0)
        ratio = value / r
        if rse:
            se = math.hypot(dse / r, ratio * rse / r)
        else:
            se = dse / r
        out.append((float(t), float(ratio), float(se)))
    return out
