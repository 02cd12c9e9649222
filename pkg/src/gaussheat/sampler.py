"""Exact Gaussian path sampling on a shared time grid.

A covariance matrix over the grid is factorized once; each component path is
then ``L @ z`` with ``z`` drawn from the counter-based stream keyed by
``(seed, path index, component index)``.  Output therefore does not depend on
chunk size or thread count.
"""

from __future__ import annotations

import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Iterator, Optional

import numpy as np

from . import rng
from .covariance import ProcessSpec, cov_matrix
from .errors import FactorizationError, RangeError, UnsupportedCovariance

MAX_GRID = 8192
JITTER_LADDER = (1e-12, 1e-10, 1e-8)


@dataclass(eq=False)
class TimeGrid:
    """Strictly increasing times in (0, 1]; the value at time 0 is implicit."""

    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        if times.size == 0:
            raise RangeError("empty time grid")
        if times[0] <= 0 or times[-1] > 1 or np.any(np.diff(times) <= 0):
            raise RangeError("grid times must be strictly increasing in (0, 1]")
        self.times = times

    @classmethod
    def uniform(cls, t_max: float, m: int) -> "TimeGrid":
        """``m`` equally spaced points ending at ``t_max``."""
        return cls(t_max * np.arange(1, m + 1) / m)

    def __len__(self):
        return self.times.size

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def with_zero(self) -> np.ndarray:
        return np.concatenate([[0.0], self.times])

    def index_of(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[i], t, rtol=1e-12, atol=0.0):
            raise RangeError(f"time {t!r} is not on the grid")
        return i


@dataclass(eq=False)
class CholeskyFactor:
    """Lower factor of the grid covariance.

    ``markov`` holds ``(q, w)`` when the factor is rank-1 semiseparable,
    ``L[i, j] = q[i] * w[j]`` for ``j <= i``; ``L @ z`` is then computed as
    ``q * cumsum(w * z)``.
    """

    spec: ProcessSpec
    grid: TimeGrid
    lower: np.ndarray
    jitter_used: float = 0.0
    markov: Optional[tuple] = None

    def apply(self, z: np.ndarray) -> np.ndarray:
        """``L @ z`` along the last axis of ``z``."""
        if self.markov is not None:
            q, w = self.markov
            return q * np.cumsum(w * z, axis=-1)
        m = z.shape[-1]
        return (z.reshape(-1, m) @ self.lower.T).reshape(z.shape)

    def reconstruction_error(self) -> float:
        """Relative Frobenius error of L L^T against the unjittered covariance."""
        c = cov_matrix(self.spec, self.grid.times)
        return float(np.linalg.norm(self.lower @ self.lower.T - c) / np.linalg.norm(c))


@dataclass(eq=False)
class PathEnsemble:
    spec: ProcessSpec
    grid: TimeGrid
    dims: int
    n_paths: int
    values: np.ndarray  # (n_paths, dims, len(grid))
    seed: int
    jitter_used: float = 0.0
    path_offset: int = 0
    meta: dict = field(default_factory=dict)

    def with_zero(self) -> np.ndarray:
        """Values with the origin prepended along the time axis."""
        z = np.zeros(self.values.shape[:2] + (1,))
        return np.concatenate([z, self.values], axis=2)


def build_factor(spec: ProcessSpec, grid: TimeGrid) -> CholeskyFactor:
    """Cholesky factor of the grid covariance, with bounded jitter escalation."""
    if not spec.has_covariance:
        raise UnsupportedCovariance(f"{spec.label} cannot be sampled")
    m = len(grid)
    if m > MAX_GRID:
        raise RangeError(f"grid of {m} points exceeds the cap of {MAX_GRID}")
    c = cov_matrix(spec, grid.times)
    try:
        lower = np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        pass
    else:
        return CholeskyFactor(spec, grid, lower, 0.0, _markov_factor(spec, grid))
    scale = np.trace(c) / m
    for eps in JITTER_LADDER:
        jitter = eps * scale
        try:
            lower = np.linalg.cholesky(c + jitter * np.eye(m))
        except np.linalg.LinAlgError:
            continue
        return CholeskyFactor(spec, grid, lower, jitter)
    raise FactorizationError(
        f"covariance of {spec.label} on {m} points is not positive definite "
        f"even with jitter {JITTER_LADDER[-1]:g}*trace/m")


def _markov_factor(spec, grid):
    rep = spec.markov_representation(grid.times)
    if rep is None:
        return None
    q, r = rep
    dr = np.diff(np.concatenate([[0.0], r]))
    if np.any(dr < 0):
        return None
    return q, np.sqrt(dr)


def sample_ensemble(factor: CholeskyFactor, dims: int, n_paths: int, seed: int,
                    path_offset: int = 0) -> PathEnsemble:
    """Draw ``n_paths`` paths of ``dims`` i.i.d. components."""
    if n_paths < 1 or dims < 1:
        raise RangeError("n_paths and dims must be at least 1")
    m = len(factor.grid)
    z = rng.normals(seed, path_offset, n_paths, dims, m)
    values = factor.apply(z)
    return PathEnsemble(factor.spec, factor.grid, dims, n_paths, values, seed,
                        factor.jitter_used, path_offset)


def sample_ou_exact(a: float, grid: TimeGrid, dims: int, n_paths: int, seed: int,
                    path_offset: int = 0) -> PathEnsemble:
    """OU paths from the exact Gaussian transition recursion."""
    from .covariance import OrnsteinUhlenbeck

    spec = OrnsteinUhlenbeck(a)
    if n_paths < 1 or dims < 1:
        raise RangeError("n_paths and dims must be at least 1")
    dt = np.diff(grid.with_zero())
    decay = np.exp(-a * dt)
    sd = np.sqrt(-np.expm1(-2 * a * dt) / (2 * a))
    z = rng.normals(seed, path_offset, n_paths, dims, len(grid))
    values = np.empty_like(z)
    x = np.zeros(z.shape[:2])
    for i in range(len(grid)):
        x = decay[i] * x + sd[i] * z[:, :, i]
        values[:, :, i] = x
    return PathEnsemble(spec, grid, dims, n_paths, values, seed, 0.0, path_offset,
                        {"sampler": "ou-exact"})


def iter_ensemble(factor: CholeskyFactor, dims: int, n_paths: int, seed: int,
                  chunk_size: int = 1024, threads: int = 1) -> Iterator[PathEnsemble]:
    """Yield consecutive chunks of the ensemble ``(factor, dims, n_paths, seed)``.

    Chunks arrive in path order regardless of ``threads``.
    """
    starts = list(range(0, n_paths, chunk_size))

    def work(start):
        return sample_ensemble(factor, dims, min(chunk_size, n_paths - start), seed, start)

    if threads <= 1:
        for s in starts:
            yield work(s)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # bounded lookahead keeps memory at ~2*threads chunks
        pending = []
        for s in starts:
            pending.append(pool.submit(work, s))
            if len(pending) >= 2 * threads:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


# ---------------------------------------------------------------------------
# Binary dump
#
#   8 bytes   magic b"GHCENS01"
#   4 bytes   little-endian uint32 header length n
#   n bytes   UTF-8 JSON header: label, spec, grid, dims, n_paths, seed,
#             jitter_used, path_offset
#   rest      values, float64 little-endian, row-major (n_paths, dims, m)
# ---------------------------------------------------------------------------

MAGIC = b"GHCENS01"


def spec_to_dict(spec) -> dict:
    """JSON-ready description of a process spec, nested time changes included."""
    out = {"family": type(spec).__name__}
    for f in fields(spec):
        v = getattr(spec, f.name)
        if is_dataclass(v):
            v = {"form": type(v).__name__,
                 **{g.name: _plain(getattr(v, g.name)) for g in fields(v)}}
        out[f.name] = _plain(v)
    return out


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def save_ensemble(ens: PathEnsemble, path) -> None:
    header = {
        "label": ens.spec.label,
        "spec": spec_to_dict(ens.spec),
        "grid": [float(t) for t in ens.grid.times],
        "dims": ens.dims,
        "n_paths": ens.n_paths,
        "seed": int(ens.seed),
        "jitter_used": float(ens.jitter_used),
        "path_offset": ens.path_offset,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(ens.values, dtype="<f8").tobytes())


def load_ensemble(path):
    """Return ``(header, values)`` from a file written by :func:`save_ensemble`."""
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError(f"{path} is not an ensemble dump")
        (n,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(n).decode())
        data = np.frombuffer(fh.read(), dtype="<f8")
    shape = (header["n_paths"], header["dims"], len(header["grid"]))
    return header, data.reshape(shape).astype(float)
