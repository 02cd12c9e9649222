"""Gaussian process families and their second-order structure.

Each family is a frozen dataclass.  The module-level functions (:func:`cov`,
:func:`variance`, :func:`sigma_sq`, :func:`mu_closed_form`) validate their
time arguments and dispatch to the family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConvergenceError,
    DomainError,
    NotBridgeCorrectable,
    RangeError,
    UnsupportedCovariance,
    UnsupportedTimeChange,
)

# E[sup_{u<=1} B_u] for a standard Brownian motion
MU_B = math.sqrt(2.0 / math.pi)


# ---------------------------------------------------------------------------
# Time changes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLog:
    """alpha(t) = t**rho * log(t + c), c > 1."""

    rho: float
    c: float

    def __post_init__(self):
        if not self.rho > 0:
            raise RangeError(f"PowerLog needs rho > 0, got {self.rho}")
        if not self.c > 1:
            raise RangeError(f"PowerLog needs c > 1, got {self.c}")

    @property
    def index(self) -> float:
        return self.rho

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t ** self.rho * np.log(t + self.c)

    def slowly_varying_bounds(self):
        # l(t) = log(t + c): log c <= l <= log(1 + c), and l' <= 1/c gives
        # l(tu) - l(tr) <= (u - r)/c for t <= 1
        c = self.c
        return math.log(c), math.log1p(c), (lambda u: np.asarray(u, dtype=float) / c)

    def describe(self) -> str:
        return f"t^{self.rho:g}*log(t+{self.c:g})"


@dataclass(frozen=True)
class PolySum:
    """alpha(t) = sum_k c_k t**eta_k with c_0 > 0, c_k >= 0, 0 < eta_0 < eta_1 < ..."""

    coefficients: tuple
    exponents: tuple

    def __post_init__(self):
        cs = tuple(float(c) for c in self.coefficients)
        es = tuple(float(e) for e in self.exponents)
        object.__setattr__(self, "coefficients", cs)
        object.__setattr__(self, "exponents", es)
        if len(cs) == 0 or len(cs) != len(es):
            raise RangeError("PolySum needs equally many coefficients and exponents")
        if not cs[0] > 0 or any(c < 0 for c in cs[1:]):
            raise RangeError("PolySum needs c_0 > 0 and c_k >= 0")
        if not es[0] > 0 or any(b <= a for a, b in zip(es, es[1:])):
            raise RangeError("PolySum exponents must satisfy 0 < eta_0 < eta_1 < ...")

    @property
    def index(self) -> float:
        return self.exponents[0]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return sum(c * t ** e for c, e in zip(self.coefficients, self.exponents))

    def slowly_varying_bounds(self):
        cs, es = self.coefficients, self.exponents
        e0 = es[0]

        def h(u):
            u = np.asarray(u, dtype=float)
            return sum(c * u ** (e - e0) for c, e in zip(cs, es))

        return cs[0], float(sum(cs)), h

    def describe(self) -> str:
        return "+".join(f"{c:g}*t^{e:g}" for c, e in zip(self.coefficients, self.exponents))


TimeChangeSpec = PowerLog | PolySum


# ---------------------------------------------------------------------------
# Process families
# ---------------------------------------------------------------------------

class ProcessSpec:
    """Base class of the zero-mean Gaussian process families."""

    has_covariance = True
    monotone_variance = True
    # increments between grid points are conditionally Brownian
    bm_like = False

    @property
    def label(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError

    def _variance(self, t):
        return self._cov(t, t)

    def _cov(self, s, t):
        raise UnsupportedCovariance(f"{self.label} has no covariance function")

    def bridge_variance(self, t0, t1):
        """Conditional variance scale of the increment over ``[t0, t1]``."""
        raise NotBridgeCorrectable(f"{self.label} does not have Brownian increments")

    def markov_representation(self, times):
        """``(q, r)`` with cov(s, t) = q(s) q(t) r(min(s, t)), r increasing; else None."""
        return None


@dataclass(frozen=True)
class BrownianMotion(ProcessSpec):
    variance_rate: float = 1.0

    bm_like = True

    def __post_init__(self):
        if not self.variance_rate > 0:
            raise RangeError("variance_rate must be positive")

    @property
    def label(self):
        return f"BM(v={self.variance_rate:g})"

    def _variance(self, t):
        return self.variance_rate * np.asarray(t, dtype=float)

    def _cov(self, s, t):
        return self.variance_rate * np.minimum(s, t)

    def bridge_variance(self, t0, t1):
        return self.variance_rate * (np.asarray(t1) - np.asarray(t0))

    def markov_representation(self, times):
        times = np.asarray(times, dtype=float)
        return np.ones_like(times), self.variance_rate * times


@dataclass(frozen=True)
class BiFractionalBM(ProcessSpec):
    """Bi-fractional Brownian motion; K = 1 is fractional BM with Hurst index H."""

    hurst: float
    k: float = 1.0

    def __post_init__(self):
        if not 0 < self.hurst < 1:
            raise RangeError("BiFractionalBM needs 0 < H < 1")
        if not 0 < self.k <= 1:
            raise RangeError("BiFractionalBM needs 0 < K <= 1")

    @property
    def bm_like(self):
        return self.hurst == 0.5 and self.k == 1.0

    @property
    def label(self):
        if self.k == 1.0:
            return f"fBm(H={self.hurst:g})"
        return f"biFBM(H={self.hurst:g},K={self.k:g})"

    def _variance(self, t):
        return np.asarray(t, dtype=float) ** (2 * self.hurst * self.k)

    def _cov(self, s, t):
        h2 = 2 * self.hurst
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        return ((s ** h2 + t ** h2) ** self.k - np.abs(s - t) ** (h2 * self.k)) / 2 ** self.k

    def bridge_variance(self, t0, t1):
        if not self.bm_like:
            return super().bridge_variance(t0, t1)
        return np.asarray(t1) - np.asarray(t0)

    def markov_representation(self, times):
        if not self.bm_like:
            return None
        times = np.asarray(times, dtype=float)
        return np.ones_like(times), times


@dataclass(frozen=True)
class TimeChangedBM(ProcessSpec):
    """Standard BM run on a deterministic clock: X_t = B_{alpha(t)}."""

    time_change: TimeChangeSpec

    bm_like = True

    @property
    def label(self):
        return f"TCBM({self.time_change.describe()})"

    @property
    def index(self) -> float:
        return self.time_change.index

    def _variance(self, t):
        return self.time_change(t)

    def _cov(self, s, t):
        return self.time_change(np.minimum(s, t))

    def bridge_variance(self, t0, t1):
        return self.time_change(t1) - self.time_change(t0)

    def markov_representation(self, times):
        times = np.asarray(times, dtype=float)
        return np.ones_like(times), self.time_change(times)


@dataclass(frozen=True)
class OrnsteinUhlenbeck(ProcessSpec):
    """OU started at 0, represented as U_t = exp(-a t) B((exp(2 a t) - 1) / (2 a))."""

    a: float

    bm_like = True

    def __post_init__(self):
        if not self.a > 0:
            raise RangeError("OrnsteinUhlenbeck needs a > 0")

    @property
    def label(self):
        return f"OU(a={self.a:g})"

    def _variance(self, t):
        t = np.asarray(t, dtype=float)
        return -np.expm1(-2 * self.a * t) / (2 * self.a)

    def _cov(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        a = self.a
        return (np.exp(-a * np.abs(s - t)) - np.exp(-a * (s + t))) / (2 * a)

    def bridge_variance(self, t0, t1):
        # transition variance over the step; first-order bridge approximation
        dt = np.asarray(t1) - np.asarray(t0)
        return -np.expm1(-2 * self.a * dt) / (2 * self.a)

    def markov_representation(self, times):
        times = np.asarray(times, dtype=float)
        a = self.a
        return np.exp(-a * times), np.expm1(2 * a * times) / (2 * a)


@dataclass(frozen=True)
class FractionalOU(ProcessSpec):
    """Fractional OU driven by fBm with H > 1/2.  Variance only."""

    a: float
    hurst: float
    tol: float = 1e-10

    has_covariance = False

    def __post_init__(self):
        if not self.a > 0:
            raise RangeError("FractionalOU needs a > 0")
        if not 0.5 < self.hurst < 1:
            raise RangeError("FractionalOU needs 1/2 < H < 1")

    @property
    def label(self):
        return f"fOU(a={self.a:g},H={self.hurst:g})"

    def _variance(self, t):
        t = np.asarray(t, dtype=float)
        flat = [0.0 if x == 0 else fou_variance(self.a, self.hurst, float(x), self.tol)
                for x in t.ravel()]
        out = np.array(flat).reshape(t.shape)
        return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _check_times(*ts):
    for t in ts:
        arr = np.asarray(t, dtype=float)
        if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
            raise DomainError(f"time outside [0, 1]: {t!r}")


def _as_output(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def cov(spec: ProcessSpec, s, t):
    """Covariance E[X_s X_t]; accepts scalars or broadcastable arrays."""
    if not spec.has_covariance:
        raise UnsupportedCovariance(f"{spec.label} has no covariance function")
    _check_times(s, t)
    return _as_output(spec._cov(np.asarray(s, dtype=float), np.asarray(t, dtype=float)))


def variance(spec: ProcessSpec, t):
    """Variance function R_t = E[X_t^2]."""
    _check_times(t)
    return _as_output(spec._variance(np.asarray(t, dtype=float)))


def cov_matrix(spec: ProcessSpec, times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    return np.asarray(cov(spec, times[:, None], times[None, :]), dtype=float)


def fou_variance(a: float, H: float, t: float, tol: float = 1e-10,
                 max_intervals: int = 200_000) -> float:
    """Variance of the fractional OU process at time ``t``.

    Uses the representation over the triangle 0 <= x < y <= 1 with the
    difference w = y - x.  The x-integral of the exponential is done in
    closed form; the remaining singular weight w**(2H-2) is removed by
    w = s**(1/(2H-1)), leaving a smooth integrand on [0, 1] that is
    integrated by adaptive Simpson bisection with Richardson stopping.

    Raises
    ------
    ConvergenceError
        If ``tol`` (absolute, on the returned variance) cannot be met within
        ``max_intervals`` subintervals.
    """
    if not a >= 0:
        raise RangeError("fou_variance needs a >= 0")
    if not 0.5 < H < 1:
        raise RangeError("fou_variance needs 1/2 < H < 1")
    if not 0 < t <= 1:
        raise DomainError(f"time outside (0, 1]: {t!r}")
    if not tol > 0:
        raise RangeError("tol must be positive")

    b = a * t
    p = 1.0 / (2 * H - 1)
    scale = 2 * H * t ** (2 * H)

    def f(s):
        w = s ** p
        if b == 0:
            return 1.0 - w
        return math.exp(-b * w) * (-math.expm1(-2 * b * (1 - w))) / (2 * b)

    integral = _adaptive_simpson(f, 0.0, 1.0, tol / scale, max_intervals)
    return scale * integral


def _adaptive_simpson(f, lo, hi, tol, max_intervals):
    flo, fhi = f(lo), f(hi)
    mid = 0.5 * (lo + hi)
    fmid = f(mid)
    whole = (hi - lo) * (flo + 4 * fmid + fhi) / 6
    stack = [(lo, hi, flo, fmid, fhi, whole, tol)]
    total = 0.0
    n_intervals = 1
    while stack:
        lo, hi, flo, fmid, fhi, whole, eps = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) * (flo + 4 * flm + fmid) / 6
        right = (hi - mid) * (fmid + 4 * frm + fhi) / 6
        delta = left + right - whole
        if abs(delta) <= 15 * eps or hi - lo < 1e-14:
            total += left + right + delta / 15
            continue
        n_intervals += 1
        if n_intervals > max_intervals:
            raise ConvergenceError(
                f"adaptive Simpson exceeded {max_intervals} subintervals")
        stack.append((lo, mid, flo, flm, fmid, left, eps / 2))
        stack.append((mid, hi, fmid, frm, fhi, right, eps / 2))
    return total


@lru_cache(maxsize=256)
def _monotone_on_grid(spec: ProcessSpec, n: int = 1024) -> bool:
    grid = np.linspace(0.0, 1.0, n)
    r = np.asarray(variance(spec, grid))
    return bool(np.all(np.diff(r) >= -1e-14 * max(1.0, float(r.max()))))


def sigma_sq(spec: ProcessSpec, t: float, grid_points: int = 64) -> float:
    """Supremum variance sup_{s <= t} R_s."""
    if grid_points < 2:
        raise RangeError("grid_points must be at least 2")
    _check_times(t)
    if spec.monotone_variance:
        if not isinstance(spec, FractionalOU):
            assert _monotone_on_grid(spec), f"{spec.label} flagged monotone but is not"
        return float(variance(spec, t))
    geo = t * np.geomspace(1e-6, 1.0, grid_points)
    uni = np.linspace(0.0, t, grid_points)
    return float(np.max(variance(spec, np.union1d(geo, uni))))


def mu_closed_form(spec: ProcessSpec, t: float) -> Optional[float]:
    """E[sup_{s<=t} X_s] when it is known in closed form, else None."""
    _check_times(t)
    if isinstance(spec, BrownianMotion):
        return math.sqrt(2 * spec.variance_rate * t / math.pi)
    if isinstance(spec, TimeChangedBM):
        return math.sqrt(2 * float(spec.time_change(t)) / math.pi)
    if isinstance(spec, BiFractionalBM) and spec.bm_like:
        return math.sqrt(2 * t / math.pi)
    return None


def slowly_varying_bounds(tc: TimeChangeSpec) -> tuple[float, float, Callable]:
    """(m, M, H) with m <= l(t) <= M and l(tu) - l(tr) <= H(u) - H(r)."""
    try:
        return tc.slowly_varying_bounds()
    except AttributeError:
        raise UnsupportedTimeChange(f"no slowly varying bounds for {tc!r}") from None
