"""Intervals and balls: volume, boundary measure, boundary distance, sampling.

Both shapes are C^{1,1} with a known interior/exterior ball radius R (the
radius for a ball, half the length for an interval), so every geometric
quantity that enters the heat content bounds is available in closed form.
An interval's boundary measure is the counting measure of its two endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import OutsideDomain, RangeError


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise RangeError(f"Interval needs a < b, got ({self.a}, {self.b})")

    dim = 1

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def ball_radius(self) -> float:
        return self.length / 2

    # C^{1,1} Lipschitz constant of the boundary charts; unused by the bounds
    lipschitz = 0.0

    def describe(self):
        return f"({self.a:g},{self.b:g})"


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(x) for x in self.center)
        object.__setattr__(self, "center", c)
        if len(c) < 2:
            raise RangeError("Ball needs dimension d >= 2; use Interval for d = 1")
        if not self.radius > 0:
            raise RangeError("Ball radius must be positive")

    @classmethod
    def centered(cls, d: int, radius: float = 1.0) -> "Ball":
        return cls((0.0,) * d, radius)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def ball_radius(self) -> float:
        return self.radius

    lipschitz = 0.0

    def describe(self):
        return f"B(d={self.dim},r={self.radius:g})"


Domain = Interval | Ball


def volume(domain: Domain) -> float:
    if isinstance(domain, Interval):
        return domain.length
    return unit_ball_volume(domain.dim) * domain.radius ** domain.dim


def surface_area(domain: Domain) -> float:
    if isinstance(domain, Interval):
        return 2.0
    d = domain.dim
    return d * unit_ball_volume(d) * domain.radius ** (d - 1)


def contains(domain: Domain, x) -> np.ndarray | bool:
    """Open-set membership; ``x`` has trailing axis of length d (omitted for intervals)."""
    x = np.asarray(x, dtype=float)
    if isinstance(domain, Interval):
        out = (x > domain.a) & (x < domain.b)
    else:
        r2 = np.sum((x - np.asarray(domain.center)) ** 2, axis=-1)
        out = r2 < domain.radius ** 2
    return bool(out) if np.ndim(out) == 0 else out


def delta_D(domain: Domain, x) -> float:
    """Distance from ``x`` to the boundary."""
    x = np.asarray(x, dtype=float)
    if isinstance(domain, Interval):
        if not domain.a <= float(x) <= domain.b:
            raise OutsideDomain(f"{float(x)} not in [{domain.a}, {domain.b}]")
        return float(min(x - domain.a, domain.b - x))
    if x.shape != (domain.dim,):
        raise RangeError(f"point must have shape ({domain.dim},)")
    rho = float(np.linalg.norm(x - np.asarray(domain.center)))
    if rho > domain.radius:
        raise OutsideDomain(f"point at distance {rho} from center lies outside the ball")
    return domain.radius - rho


def inner_volume(domain: Domain, a: float) -> float:
    """|D_a|, the volume of {x in D : delta_D(x) > a}, for 0 < a <= R/2."""
    if not 0 < a <= domain.ball_radius / 2:
        raise RangeError(f"need 0 < a <= R/2 = {domain.ball_radius / 2}, got {a}")
    if isinstance(domain, Interval):
        return max(domain.length - 2 * a, 0.0)
    return unit_ball_volume(domain.dim) * (domain.radius - a) ** domain.dim


def surface_area_inner(domain: Domain, u: float) -> float:
    """|dD_u|, the boundary measure of D_u, for 0 <= u < R."""
    if not 0 <= u < domain.ball_radius:
        raise RangeError(f"need 0 <= u < R = {domain.ball_radius}, got {u}")
    if isinstance(domain, Interval):
        return 2.0
    d = domain.dim
    return d * unit_ball_volume(d) * (domain.radius - u) ** (d - 1)


def sample_uniform(domain: Domain, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. uniform points; shape ``(n,)`` for intervals, ``(n, d)`` for balls."""
    if n < 1:
        raise RangeError("n must be at least 1")
    g = rng.stream(seed, 0, 0, rng.STARTS)
    if isinstance(domain, Interval):
        return domain.a + domain.length * g.random(n)
    d = domain.dim
    direction = g.standard_normal((n, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = domain.radius * g.random(n) ** (1.0 / d)
    return np.asarray(domain.center) + direction * radius[:, None]
