"""Poincare half-space geometry and the transition densities of the
uncorrelated two-asset model.

The state space is the upper half space {(x, y, a): a > 0} carrying the
metric ds^2 = (dx^2 + dy^2 + da^2) / a^2, which is the natural geometry of
the lognormal-vol generator.  Everything here is a pure function; density
evaluations are done in log space because the exponents at short maturity
are far beyond float64 range.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG_TWO_PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class HPoint:
    """A point (x, y, a) in the upper half space, a > 0."""

    x: float
    y: float
    a: float

    def __post_init__(self):
        if not (self.a > 0.0) or not np.isfinite(self.a):
            raise ValueError(f"HPoint requires a > 0, got a={self.a}")


@dataclass(frozen=True)
class UncorrParams:
    """Uncorrelated model: unit vol scales, initial volatility a0 > 0.

    The log-prices start at zero; only a0 is free.
    """

    a0: float = 1.0

    def __post_init__(self):
        if not (self.a0 > 0.0) or not np.isfinite(self.a0):
            raise ValueError(f"a0 must be positive, got {self.a0}")


def acosh1p(u):
    """acosh(1 + u) for u >= 0 without cancellation near u = 0."""
    u = np.asarray(u, dtype=float)
    return np.log1p(u + np.sqrt(u * (2.0 + u)))


def geodesic_distance_xyz(x0, y0, a0, x, y, a):
    """Hyperbolic distance between (x0,y0,a0) and (x,y,a); broadcasts."""
    u = ((x - x0) ** 2 + (y - y0) ** 2 + (a - a0) ** 2) / (2.0 * a0 * a)
    return acosh1p(u)


def geodesic_distance(p: HPoint, q: HPoint) -> float:
    return float(geodesic_distance_xyz(p.x, p.y, p.a, q.x, q.y, q.a))


def log_sinhc_ratio(rho):
    """log(rho / sinh rho), the heat-kernel prefactor, stable at both ends.

    Series 1 - rho^2/6 + 7 rho^4/360 below 1e-4; log-space above to avoid
    sinh overflow for large rho.
    """
    rho = np.asarray(rho, dtype=float)
    out = np.empty_like(rho)
    small = rho < 1e-4
    rs = rho[small]
    out[small] = np.log1p(-rs**2 / 6.0 + 7.0 * rs**4 / 360.0)
    rb = rho[~small]
    # log sinh(r) = r + log1p(-exp(-2r)) - log 2
    out[~small] = np.log(rb) - (rb + np.log1p(-np.exp(-2.0 * rb)) - np.log(2.0))
    return out


def log_heat_kernel_h3(rho, t):
    """log of the exact half-space heat kernel at distance rho, time t."""
    rho = np.asarray(rho, dtype=float)
    return (-1.5 * (LOG_TWO_PI + np.log(t)) + log_sinhc_ratio(rho)
            - 0.5 * t - rho**2 / (2.0 * t))


def heat_kernel_h3(rho, t):
    """Exact heat kernel on the half space (w.r.t. the hyperbolic volume)."""
    if t <= 0:
        raise ValueError("t must be positive")
    return np.exp(log_heat_kernel_h3(rho, t))


def drift_functional(p0: HPoint, p: HPoint) -> float:
    """Line integral of the generator's first-order part along the geodesic.

    Depends on the endpoints only: -(x-x0)/2 - (y-y0)/2 + log(a/a0)/2.
    """
    return float(-0.5 * (p.x - p0.x) - 0.5 * (p.y - p0.y) + 0.5 * np.log(p.a / p0.a))


def log_density_uncorr_leading(x, y, a, t, params: UncorrParams):
    """log of the leading-order transition density of (X_t, Y_t, a_t).

    Density w.r.t. dx dy da, started from (0, 0, a0).
    """
    a0 = params.a0
    rho = geodesic_distance_xyz(0.0, 0.0, a0, x, y, a)
    return (-0.5 * np.log(a0) - 2.5 * np.log(a) - 0.5 * (x + y)
            - 1.5 * (LOG_TWO_PI + np.log(t)) + log_sinhc_ratio(rho)
            - rho**2 / (2.0 * t))


def density_uncorr_leading(x, y, a, t, params: UncorrParams):
    if t <= 0:
        raise ValueError("t must be positive")
    return np.exp(log_density_uncorr_leading(x, y, a, t, params))


def log_density_uncorr_bound(x, y, a, t, params: UncorrParams):
    """log of the global upper bound: the leading density times e^{-t/8}."""
    return log_density_uncorr_leading(x, y, a, t, params) - t / 8.0


def density_uncorr_bound(x, y, a, t, params: UncorrParams):
    if t <= 0:
        raise ValueError("t must be positive")
    return np.exp(log_density_uncorr_bound(x, y, a, t, params))
