"""Monte Carlo estimators of heat content and expected running suprema.

Spectral heat content is estimated by pairing each uniform starting point
with one path (no product over starts and paths), so the per-path survival
values are i.i.d. and the standard error is the plain sample standard
deviation over root-n.  Survival is monitored on the grid; the discrete
monitoring bias is controlled either by Brownian-bridge crossing
probabilities (1D, processes with Brownian increments) or by reporting the
change between the full grid and its every-other-point subgrid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import erfcx, ndtr

from . import rng
from .covariance import FractionalOU, ProcessSpec, mu_closed_form, variance
from .errors import (
    DegenerateScale,
    DimensionMismatch,
    NotBridgeCorrectable,
    RangeError,
    UnsupportedCovariance,
)
from .geometry import Domain, Interval, sample_uniform, volume
from .sampler import (
    CholeskyFactor,
    PathEnsemble,
    TimeGrid,
    build_factor,
    iter_ensemble,
)

BIAS_MODES = ("none", "bridge", "refine")
_LOG_PHI0 = -0.5 * math.log(2 * math.pi)


@dataclass
class EstimateWithCI:
    value: float
    stderr: float
    n_effective: int
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, samples, scale=1.0, **metadata):
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        sd = samples.std(ddof=1) if n > 1 else 0.0
        return cls(float(scale * samples.mean()), float(abs(scale) * sd / math.sqrt(n)),
                   n, metadata)


@dataclass
class HeatCurve:
    times: np.ndarray
    q_estimates: Optional[list] = None
    h_estimates: Optional[list] = None
    refine_delta: Optional[list] = None
    metadata: dict = field(default_factory=dict)

    def q_values(self):
        return np.array([e.value for e in self.q_estimates])

    def q_stderrs(self):
        return np.array([e.stderr for e in self.q_estimates])

    def is_monotone(self, slack=2.0) -> bool:
        """Q-hat non-increasing in t up to ``slack * (se_i + se_j)``."""
        q, se = self.q_values(), self.q_stderrs()
        for i in range(len(q)):
            for j in range(i + 1, len(q)):
                if q[j] > q[i] + slack * (se[i] + se[j]):
                    return False
        return True

    def is_dominated(self, k=4.0) -> bool:
        """Q-hat <= H-hat + k * combined stderr at every time."""
        for q, h in zip(self.q_estimates, self.h_estimates):
            if q.value > h.value + k * math.hypot(q.stderr, h.stderr):
                return False
        return True


# ---------------------------------------------------------------------------
# Regular heat content
# ---------------------------------------------------------------------------

def _phi(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)


def _require_interval(domain):
    if not isinstance(domain, Interval):
        raise DimensionMismatch("exact regular heat content is only available for intervals")


def rhc_deficit_1d(spec: ProcessSpec, domain: Interval, t: float) -> float:
    """|D| - H_D(t), evaluated without cancellation."""
    _require_interval(domain)
    sigma = math.sqrt(variance(spec, t))
    L = domain.length
    A = L / sigma
    # 2 int_0^L P(X_t > u) du = 2 sigma [A Phibar(A) + phi(0) - phi(A)]
    return 2 * (L * float(ndtr(-A)) + sigma * (_phi(0.0) - _phi(A)))


def rhc_exact_1d(spec: ProcessSpec, domain: Interval, t: float) -> float:
    """Regular heat content H_D(t) of a 1D Gaussian process on an interval."""
    deficit = rhc_deficit_1d(spec, domain, t)
    return domain.length - deficit


def rhc_error_1d(spec: ProcessSpec, domain: Interval, t: float) -> tuple[float, float]:
    """``(value, log value)`` of sqrt(2 R_t / pi) - (|D| - H_D(t)).

    The difference equals 2 sigma [phi(A) - A Phibar(A)] with A = |D|/sigma
    and is evaluated in log space, so it stays meaningful long after it
    underflows as a float.
    """
    _require_interval(domain)
    sigma = math.sqrt(variance(spec, t))
    A = domain.length / sigma
    if A > 100:
        inv = 1.0 / (A * A)
        one_minus = inv * (1 - 3 * inv + 15 * inv ** 2 - 105 * inv ** 3)
    else:
        one_minus = 1.0 - A * math.sqrt(math.pi / 2) * float(erfcx(A / math.sqrt(2)))
    log_val = math.log(2 * sigma) + _LOG_PHI0 - 0.5 * A * A + math.log(one_minus)
    return math.exp(log_val), log_val


def estimate_rhc(spec: ProcessSpec, domain: Domain, t: float, n_x: int, n_gauss: int,
                 seed: int, block: int = 4096) -> EstimateWithCI:
    """Monte Carlo estimate of H_D(t); needs only the marginal law of X_t."""
    if isinstance(spec, FractionalOU):
        raise UnsupportedCovariance("fractional OU is variance-only and is not simulated")
    if n_x < 1 or n_gauss < 1:
        raise RangeError("n_x and n_gauss must be at least 1")
    sd = math.sqrt(variance(spec, t))
    d = domain.dim
    starts = sample_uniform(domain, n_x, rng.derive_seed(seed, "rhc-starts"))
    per_start = np.empty(n_x)
    for b, lo in enumerate(range(0, n_x, block)):
        hi = min(lo + block, n_x)
        g = rng.stream(seed, b, 0, rng.GAUSS)
        if isinstance(domain, Interval):
            z = g.standard_normal((hi - lo, n_gauss))
            pos = starts[lo:hi, None] + sd * z
            inside = (pos > domain.a) & (pos < domain.b)
        else:
            z = g.standard_normal((hi - lo, n_gauss, d))
            pos = starts[lo:hi, None, :] + sd * z
            r2 = np.sum((pos - np.asarray(domain.center)) ** 2, axis=-1)
            inside = r2 < domain.radius ** 2
        per_start[lo:hi] = inside.mean(axis=1)
    return EstimateWithCI.from_samples(
        per_start, volume(domain), t=t, n_x=n_x, n_gauss=n_gauss, seed=seed,
        grid_size=0, bias_control="none")


# ---------------------------------------------------------------------------
# Bridge crossing
# ---------------------------------------------------------------------------

def bridge_crossing_probability(delta1, delta2, var):
    """P(Brownian bridge crosses a level) given endpoint distances to it.

    ``exp(-2 delta1 delta2 / var)`` when both endpoints are strictly on the
    inside, 1 otherwise.
    """
    delta1 = np.asarray(delta1, dtype=float)
    delta2 = np.asarray(delta2, dtype=float)
    var = np.asarray(var, dtype=float)
    inside = (delta1 > 0) & (delta2 > 0)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        p = np.exp(-2.0 * np.where(inside, delta1 * delta2, 0.0) / var)
    p = np.where(inside, p, 1.0)
    return float(p) if p.ndim == 0 else p


# crossing probabilities below exp(-2 * _FAR) are treated as 0
_FAR = 25.0


def _step_survival(domain: Interval, positions, step_var):
    """Per-step probability that the bridge stays inside, shape (n, m)."""
    n, m1 = positions.shape
    surv = np.ones((n, m1 - 1))
    var = np.broadcast_to(step_var, surv.shape)
    for dist in (domain.b - positions, positions - domain.a):
        d1, d2 = dist[:, :-1], dist[:, 1:]
        near = d1 * d2 < _FAR * var
        p = bridge_crossing_probability(d1[near], d2[near], var[near])
        surv[near] *= 1.0 - p
    return np.clip(surv, 0.0, 1.0)


def _bridge_var(spec: ProcessSpec, grid: TimeGrid):
    if not spec.bm_like:
        raise NotBridgeCorrectable(
            f"{spec.label} has no Brownian increments; use grid refinement instead")
    tz = grid.with_zero()
    return np.asarray(spec.bridge_variance(tz[:-1], tz[1:]), dtype=float)


def bridge_correct_exit(domain: Domain, spec: ProcessSpec, positions, grid: TimeGrid,
                        seed: int = 0, path_offset: int = 0) -> np.ndarray:
    """Exit indicators with continuous-time crossings between grid points.

    ``positions`` has shape ``(n, len(grid) + 1)`` and includes the start
    point at time 0.  Returns a boolean ``(n, len(grid))`` array that is True
    from the first step in which the path left the interval, either at a
    grid point or by a sampled bridge crossing in between.
    """
    if not isinstance(domain, Interval):
        raise NotBridgeCorrectable("bridge correction is implemented for intervals only")
    step_var = _bridge_var(spec, grid)
    positions = np.asarray(positions, dtype=float)
    survive = _step_survival(domain, positions, step_var)
    n, m = survive.shape
    u = rng.uniforms(seed, path_offset, n, 1, m)[:, 0, :]
    return np.logical_or.accumulate(u >= survive, axis=1)


# ---------------------------------------------------------------------------
# Spectral heat content
# ---------------------------------------------------------------------------

def _eval_indices(grid: TimeGrid, eval_times):
    idx = np.array([grid.index_of(t) for t in eval_times], dtype=int)
    if np.any(np.diff(idx) <= 0):
        raise RangeError("eval_times must be strictly increasing")
    return idx


def shc_samples(ens: PathEnsemble, domain: Domain, eval_idx, starts,
                bias_control: str = "none") -> dict:
    """Per-path survival (q), in-domain (h) and coarse-grid survival samples.

    Each path ``i`` of the ensemble is started from ``starts[i]``.  Returned
    arrays have shape ``(n_paths, len(eval_idx))``.
    """
    if bias_control not in BIAS_MODES:
        raise RangeError(f"bias_control must be one of {BIAS_MODES}")
    if ens.dims != domain.dim:
        raise DimensionMismatch(
            f"ensemble has {ens.dims} components but the domain is {domain.dim}-dimensional")
    starts = np.asarray(starts, dtype=float)
    n = ens.n_paths
    if starts.shape[0] != n:
        raise DimensionMismatch("need exactly one start per path")
    eval_idx = np.asarray(eval_idx, dtype=int)
    m = len(ens.grid)

    if isinstance(domain, Interval):
        pos = starts[:, None] + ens.values[:, 0, :]
        inside = (pos > domain.a) & (pos < domain.b)
    else:
        pos = starts[:, :, None] + ens.values
        r2 = np.sum((pos - np.asarray(domain.center)[None, :, None]) ** 2, axis=1)
        inside = r2 < domain.radius ** 2

    alive = np.logical_and.accumulate(inside, axis=1)
    out = {"h": inside[:, eval_idx].astype(float)}
    if bias_control == "bridge":
        if not isinstance(domain, Interval):
            raise NotBridgeCorrectable("bridge correction is implemented for intervals only")
        step_var = _bridge_var(ens.spec, ens.grid)
        full = np.concatenate([starts[:, None], pos], axis=1)
        weight = np.cumprod(_step_survival(domain, full, step_var), axis=1)
        out["q"] = (weight * alive)[:, eval_idx]
    else:
        out["q"] = alive[:, eval_idx].astype(float)

    if bias_control == "refine":
        monitored = (np.arange(m) % 2) == 1
        coarse = np.logical_and.accumulate(inside | ~monitored, axis=1)
        out["q_coarse"] = (coarse[:, eval_idx] & inside[:, eval_idx]).astype(float)
    return out


def _curve(times, vol, parts, meta):
    q = [EstimateWithCI.from_samples(parts["q"][:, k], vol, t=float(t), **meta)
         for k, t in enumerate(times)]
    h = [EstimateWithCI.from_samples(parts["h"][:, k], vol, t=float(t), **meta)
         for k, t in enumerate(times)]
    delta = None
    if "q_coarse" in parts:
        diff = parts["q_coarse"] - parts["q"]
        delta = [EstimateWithCI.from_samples(diff[:, k], vol, t=float(t), **meta)
                 for k, t in enumerate(times)]
    return HeatCurve(np.asarray(times, dtype=float), q, h, delta, dict(meta))


def estimate_shc(ensemble: PathEnsemble, domain: Domain, eval_times, n_x: Optional[int] = None,
                 seed: int = 0, bias_control: str = "none", starts=None) -> HeatCurve:
    """Spectral (and regular) heat content curve from one ensemble.

    Start ``i`` is paired with path ``i``; ``n_x`` (default: all paths) uses
    the first ``n_x`` paths.
    """
    n_x = ensemble.n_paths if n_x is None else n_x
    if not 1 <= n_x <= ensemble.n_paths:
        raise RangeError("n_x must be between 1 and the number of paths")
    if starts is None:
        starts = sample_uniform(domain, n_x, rng.derive_seed(seed, "shc-starts"))
    sub = ensemble
    if n_x < ensemble.n_paths:
        sub = PathEnsemble(ensemble.spec, ensemble.grid, ensemble.dims, n_x,
                           ensemble.values[:n_x], ensemble.seed, ensemble.jitter_used,
                           ensemble.path_offset)
    eval_idx = _eval_indices(ensemble.grid, eval_times)
    parts = shc_samples(sub, domain, eval_idx, starts, bias_control)
    meta = dict(grid_size=len(ensemble.grid), n_paths=ensemble.n_paths, n_x=n_x,
                seed=seed, path_seed=ensemble.seed, bias_control=bias_control,
                jitter_used=ensemble.jitter_used, pairing="start i <-> path i")
    return _curve(ensemble.grid.times[eval_idx], volume(domain), parts, meta)


def run_shc(spec: ProcessSpec, domain: Domain, grid: TimeGrid, eval_times, n_paths: int,
            seed: int, bias_control: str = "none", chunk_size: int = 1024,
            threads: int = 1, factor: Optional[CholeskyFactor] = None) -> HeatCurve:
    """Streaming version of :func:`estimate_shc` for ensembles too large to hold."""
    factor = factor or build_factor(spec, grid)
    eval_idx = _eval_indices(grid, eval_times)
    starts = sample_uniform(domain, n_paths, rng.derive_seed(seed, "shc-starts"))
    pieces = []
    for ens in iter_ensemble(factor, domain.dim, n_paths, seed, chunk_size, threads):
        lo = ens.path_offset
        pieces.append(shc_samples(ens, domain, eval_idx, starts[lo:lo + ens.n_paths],
                                  bias_control))
    parts = {k: np.concatenate([p[k] for p in pieces]) for k in pieces[0]}
    meta = dict(grid_size=len(grid), n_paths=n_paths, n_x=n_paths, seed=seed,
                path_seed=seed, bias_control=bias_control, jitter_used=factor.jitter_used,
                pairing="start i <-> path i")
    return _curve(grid.times[eval_idx], volume(domain), parts, meta)


# ---------------------------------------------------------------------------
# Expected running supremum
# ---------------------------------------------------------------------------

def running_sup(ens: PathEnsemble, eval_idx, bridge: bool = False) -> np.ndarray:
    """sup_{s <= t_k} X_s of the first component, shape ``(n_paths, len(eval_idx))``.

    With ``bridge`` the maximum of each Brownian-bridge segment between grid
    points is sampled exactly, which removes the discrete-monitoring bias for
    processes with Brownian increments.
    """
    x = ens.with_zero()[:, 0, :]
    if bridge:
        step_var = _bridge_var(ens.spec, ens.grid)
        u = rng.uniforms(ens.seed, ens.path_offset, ens.n_paths, 1, len(ens.grid))[:, 0, :]
        y0, y1 = x[:, :-1], x[:, 1:]
        seg = 0.5 * (y0 + y1 + np.sqrt((y1 - y0) ** 2 - 2.0 * step_var * np.log1p(-u)))
        peak = np.maximum.accumulate(seg, axis=1)
        peak = np.maximum(peak, 0.0)
    else:
        peak = np.maximum.accumulate(x, axis=1)[:, 1:]
    return peak[:, np.asarray(eval_idx, dtype=int)]


def estimate_mu(ensemble: PathEnsemble, eval_times, bridge: bool = False) -> list:
    """mu_t = E[sup_{s<=t} X_s] at each eval time, one estimate per time."""
    if ensemble.dims != 1:
        raise DimensionMismatch("estimate_mu expects a one-component ensemble")
    idx = _eval_indices(ensemble.grid, eval_times)
    sups = running_sup(ensemble, idx, bridge)
    return [EstimateWithCI.from_samples(sups[:, k], t=float(ensemble.grid.times[i]),
                                        grid_size=len(ensemble.grid),
                                        n_paths=ensemble.n_paths, seed=ensemble.seed,
                                        bias_control="bridge" if bridge else "none")
            for k, i in enumerate(idx)]


def simulate_sup(spec: ProcessSpec, grid: TimeGrid, eval_times, n_paths: int, seed: int,
                 bridge: bool = False, chunk_size: int = 1024, threads: int = 1,
                 factor: Optional[CholeskyFactor] = None) -> np.ndarray:
    """Running-supremum samples ``(n_paths, len(eval_times))``, streamed in chunks."""
    factor = factor or build_factor(spec, grid)
    idx = _eval_indices(grid, eval_times)
    out = [running_sup(ens, idx, bridge)
           for ens in iter_ensemble(factor, 1, n_paths, seed, chunk_size, threads)]
    return np.concatenate(out)


def run_mu(spec: ProcessSpec, grid: TimeGrid, eval_times, n_paths: int, seed: int,
           bridge: bool = False, chunk_size: int = 1024, threads: int = 1) -> list:
    sups = simulate_sup(spec, grid, eval_times, n_paths, seed, bridge, chunk_size, threads)
    return [EstimateWithCI.from_samples(sups[:, k], t=float(t), grid_size=len(grid),
                                        n_paths=n_paths, seed=seed,
                                        bias_control="bridge" if bridge else "none")
            for k, t in enumerate(eval_times)]


def estimate_sup_Y(spec: ProcessSpec, t: float, grid: TimeGrid, n_paths: int, seed: int,
                   bridge: Optional[bool] = None, chunk_size: int = 1024) -> EstimateWithCI:
    """E[sup_{u<=1} Y_u] for the scaled process Y_u = X_{tu} / mu_t.

    The supremum over [0, t] is estimated on ``grid`` (which must end at
    ``t``) and divided by mu_t: the closed form when one exists, otherwise an
    estimate from an independent ensemble.
    """
    if not math.isclose(grid.horizon, t, rel_tol=1e-12):
        raise RangeError("grid must end at t")
    bridge = spec.bm_like if bridge is None else bridge
    sups = simulate_sup(spec, grid, [t], n_paths, seed, bridge, chunk_size)[:, 0]
    num = EstimateWithCI.from_samples(sups)
    mu = mu_closed_form(spec, t)
    if mu is not None:
        value, se, mu_se = num.value / mu, num.stderr / mu, 0.0
    else:
        indep = simulate_sup(spec, grid, [t], n_paths, rng.derive_seed(seed, "mu"),
                             bridge, chunk_size)[:, 0]
        den = EstimateWithCI.from_samples(indep)
        if den.value <= 2 * den.stderr:
            raise DegenerateScale(f"mu_t estimate {den.value:g} is not resolved from 0")
        mu, mu_se = den.value, den.stderr
        value = num.value / mu
        se = abs(value) * math.hypot(num.stderr / num.value, mu_se / mu)
    if value <= 2 * se:
        raise DegenerateScale(f"sup_Y estimate {value:g} is not resolved from 0")
    return EstimateWithCI(value, se, n_paths, dict(
        t=t, grid_size=len(grid), n_paths=n_paths, seed=seed, mu_t=mu, mu_stderr=mu_se,
        bias_control="bridge" if bridge else "none",
        within_unit_bound=bool(value <= 1 + 2 * se)))
