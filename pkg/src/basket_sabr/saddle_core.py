"""One-dimensional Laplace-method utilities.

Covers the double-log strike function hbar and its minimizer classification
(the phase transition at K* = 2e), the two time-integral families that close
the Tanaka representation (power -1/2 generic, power -3/4 at the degenerate
strike), the quartic Gaussian constant, and generic bracketed minimization
with finite-difference curvature.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar
from scipy.special import erfcx, gamma as gamma_fn, gammaincc

K_CRITICAL = 2.0 * math.e
GAMMA_QUARTER = gamma_fn(0.25)
GAMMA_3_4 = gamma_fn(0.75)


class MinimizerKind(enum.Enum):
    UNIQUE_CENTER = "unique_center"
    DEGENERATE_QUARTIC = "degenerate_quartic"
    SYMMETRIC_PAIR = "symmetric_pair"


@dataclass(frozen=True)
class MinimizerClass:
    kind: MinimizerKind
    minimizers: tuple[float, ...]
    min_value: float


@dataclass
class LaplacePoint:
    """Interior minimum of a 1-d exponent: location, value, curvature."""

    x_star: float
    value: float
    second_deriv: float
    degenerate: bool = False
    quartic_coeff: float | None = None


# ---------------------------------------------------------------------------
# hbar and the K* = 2e classification
# ---------------------------------------------------------------------------

def hbar(z: float, K: float) -> float:
    """(log z)^2 + (log(K - z))^2 on (0, K)."""
    if not (0.0 < z < K):
        raise ValueError(f"hbar requires 0 < z < K, got z={z}, K={K}")
    return math.log(z) ** 2 + math.log(K - z) ** 2


def hbar_d1(z: float, K: float) -> float:
    return 2.0 * math.log(z) / z - 2.0 * math.log(K - z) / (K - z)


def hbar_d2(z: float, K: float) -> float:
    return 2.0 * (1.0 - math.log(z)) / z**2 + 2.0 * (1.0 - math.log(K - z)) / (K - z) ** 2


def hbar_d4_center(K: float) -> float:
    """Fourth derivative of hbar at z = K/2 (used near the quartic strike)."""
    c = K / 2.0
    # d2/dz2 of 2(1-log z)/z^2 is (22 - 12 log z)/z^4; doubled for the two halves
    return 2.0 * 2.0 * (11.0 - 6.0 * math.log(c)) / c**4


def classify_minimizers(K: float, tol: float = 1e-12) -> MinimizerClass:
    """Global minimizer(s) of hbar(., K): one at K/2 below K* = 2e, a
    symmetric pair above, and a quartic degenerate center at K*.

    The branch is decided by the sign of 1 - log(K/2) (the curvature sign
    at the center), which is exact at the transition; |K - 2e| < tol takes
    the degenerate branch.
    """
    if not (K > 0.0):
        raise ValueError(f"K must be positive, got {K}")
    if abs(K - K_CRITICAL) < tol:
        return MinimizerClass(MinimizerKind.DEGENERATE_QUARTIC, (math.e,),
                              hbar(math.e, K))
    center = K / 2.0
    if math.log(center) < 1.0:  # hbar''(K/2) > 0: unique central minimum
        return MinimizerClass(MinimizerKind.UNIQUE_CENTER, (center,), hbar(center, K))
    z = _solve_pair_minimizer(K)
    return MinimizerClass(MinimizerKind.SYMMETRIC_PAIR, (z, K - z), hbar(z, K))


def _solve_pair_minimizer(K: float) -> float:
    """The left minimizer z* in (0, K/2) for K > 2e."""
    center = K / 2.0
    rel = (K - K_CRITICAL) / K_CRITICAL
    if rel < 1e-6:
        # quartic balance: hbar' ~ h2 (z-c) + h4/6 (z-c)^3 = 0
        h2 = hbar_d2(center, K)
        h4 = hbar_d4_center(K)
        z = center - math.sqrt(max(-6.0 * h2 / h4, 0.0))
    else:
        hi = center * (1.0 - 1e-12)
        if hbar_d1(hi, K) <= 0.0:  # curvature too flat to see the sign at hi
            h2 = hbar_d2(center, K)
            h4 = hbar_d4_center(K)
            return center - math.sqrt(max(-6.0 * h2 / h4, 0.0))
        z = brentq(hbar_d1, 0.5, hi, args=(K,), xtol=1e-14, rtol=8.9e-16)
    # Newton polish against the analytic gradient
    for _ in range(3):
        d1, d2 = hbar_d1(z, K), hbar_d2(z, K)
        if d2 <= 0.0:
            break
        step = d1 / d2
        if not math.isfinite(step):
            break
        z = min(max(z - step, 1e-300), center * (1.0 - 1e-15))
    return z


# ---------------------------------------------------------------------------
# time-integral family
# ---------------------------------------------------------------------------

def log_upsilon_exact(k: float, t: float) -> float:
    """log of int_0^t u^{-1/2} exp(-k^2/(2u)) du via the closed Erf form.

    Computed as exp(-z^2) * (2 sqrt(t) - k sqrt(2 pi) erfcx(z)), z = k/sqrt(2t);
    the erfcx form keeps the large-z cancellation at the 1/(2z^2) level
    instead of exp(-z^2).
    """
    if k <= 0 or t <= 0:
        raise ValueError("upsilon requires k > 0, t > 0")
    z = k / math.sqrt(2.0 * t)
    bracket = 2.0 * math.sqrt(t) - k * math.sqrt(2.0 * math.pi) * float(erfcx(z))
    if bracket <= 0.0:  # only reachable by rounding at extreme z
        return math.log(2.0 * t**1.5 / k**2) - z * z + math.log1p(-3.0 * t / k**2)
    return -z * z + math.log(bracket)


def upsilon_exact(k: float, t: float) -> float:
    return math.exp(log_upsilon_exact(k, t))


def gamma_upper_neg_quarter(x: float, scaled: bool = False) -> float:
    """Upper incomplete gamma at parameter -1/4.

    Strategy: direct quadrature of the defining integral for x < 0.1, the
    one-step recurrence from the parameter 3/4 for moderate x, and the
    exponentially scaled asymptotic series for x > 30 (where the recurrence
    cancels badly).  With scaled=True returns e^x * Gamma(-1/4, x).
    """
    if x <= 0:
        raise ValueError("x must be positive")
    if x < 0.1:
        val, _ = quad(lambda s: s**-1.25 * math.exp(-s), x, 1.0, epsabs=0, epsrel=1e-13)
        val += 4.0 * (math.exp(-1.0) - GAMMA_3_4 * float(gammaincc(0.75, 1.0)))
        return val * math.exp(x) if scaled else val
    if x <= 30.0:
        scaled_val = 4.0 * (x**-0.25 - math.exp(x) * GAMMA_3_4 * float(gammaincc(0.75, x)))
        return scaled_val if scaled else scaled_val * math.exp(-x)
    # Gamma(s, x) ~ x^{s-1} e^{-x} sum_n prod_{j<=n} (s - j) / x^n, s = -1/4
    s = -0.25
    term, acc = 1.0, 1.0
    for n in range(1, 30):
        term *= (s - n) / x
        acc += term
        if abs(term) < 1e-17 * abs(acc):
            break
    scaled_val = x ** (s - 1.0) * acc
    return scaled_val if scaled else scaled_val * math.exp(-x)


def log_upsilon_quartic_exact(k: float, t: float) -> float:
    """log of int_0^t u^{-3/4} exp(-k^2/(2u)) du."""
    if k <= 0 or t <= 0:
        raise ValueError("upsilon_quartic requires k > 0, t > 0")
    x = k * k / (2.0 * t)
    g_scaled = gamma_upper_neg_quarter(x, scaled=True)
    return 0.5 * math.log(k) - 0.25 * math.log(2.0) + math.log(g_scaled) - x


def upsilon_quartic_exact(k: float, t: float) -> float:
    return math.exp(log_upsilon_quartic_exact(k, t))


def quartic_gaussian_constant(zeta: float) -> float:
    """Full-line integral of exp(-zeta x^4): Gamma(1/4) / (2 zeta^{1/4})."""
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    return GAMMA_QUARTER / (2.0 * zeta**0.25)


# ---------------------------------------------------------------------------
# generic 1-d minimization with curvature
# ---------------------------------------------------------------------------

def second_derivative(f: Callable[[float], float], x: float, scale: float = 1.0,
                      step: float | None = None) -> float:
    """Fourth-order central f'' with one Richardson step, adaptive in scale.

    The base step balances the h^6 extrapolated truncation error against the
    eps/h^2 rounding floor (~1e-11 relative for well-scaled f).  Pass an
    explicit ``step`` when the feature being probed is narrower than the
    coordinate scale (nearly-merged minima).
    """
    h = step if step is not None else 8.0e-3 * max(abs(x), scale)

    def d2(hh):
        return (-f(x - 2 * hh) + 16 * f(x - hh) - 30 * f(x)
                + 16 * f(x + hh) - f(x + 2 * hh)) / (12.0 * hh * hh)

    coarse, fine = d2(h), d2(h / 2.0)
    return (16.0 * fine - coarse) / 15.0


def fourth_derivative(f: Callable[[float], float], x: float, scale: float = 1.0) -> float:
    h = 8.0e-3 * max(abs(x), scale)
    return (f(x - 2 * h) - 4 * f(x - h) + 6 * f(x) - 4 * f(x + h) + f(x + 2 * h)) / h**4


def find_global_minima_1d(f: Callable[[float], float], bracket: tuple[float, float],
                          n_starts: int = 200, cluster_tol: float = 1e-6,
                          value_tol: float = 1e-10, xatol: float = 1e-12,
                          ) -> list[LaplacePoint]:
    """All global minimizers of f on the bracket via a multi-start scan.

    Equispaced scan, bounded refinement of every descent triple, clustering
    of nearby refinements, then filtering to the global level set.  The
    degenerate flag is set when |f''| drops below 1e-6 * max(1, |f|), in
    which case the quartic coefficient is attached.
    """
    lo, hi = bracket
    xs = np.linspace(lo, hi, n_starts)
    fs = np.array([f(x) for x in xs])
    span = hi - lo
    cands: list[tuple[float, float]] = []
    for i in range(1, n_starts - 1):
        if fs[i] < fs[i - 1] and fs[i] <= fs[i + 1]:
            res = minimize_scalar(f, bounds=(xs[i - 1], xs[i + 1]), method="bounded",
                                  options={"xatol": xatol})
            x, v = float(res.x), float(res.fun)
            # one guarded Newton step on the finite-difference gradient
            h = 1e-6 * max(abs(x), 1e-3 * span)
            d1 = (f(x + h) - f(x - h)) / (2.0 * h)
            d2 = (f(x + h) - 2.0 * v + f(x - h)) / (h * h)
            if d2 > 0.0:
                xn = x - d1 / d2
                if xs[i - 1] < xn < xs[i + 1]:
                    vn = f(xn)
                    if vn <= v:
                        x, v = xn, vn
            cands.append((x, v))
    if not cands:
        raise ValueError("no interior minimum found in bracket")
    best = min(v for _, v in cands)
    out: list[LaplacePoint] = []
    for x, v in sorted(cands):
        if v > best + value_tol * max(1.0, abs(best)):
            continue
        if any(abs(x - p.x_star) < cluster_tol * max(1.0, span) for p in out):
            continue
        d2 = second_derivative(f, x, scale=1e-3 * span)
        degen = abs(d2) < 1e-6 * max(1.0, abs(v))
        q4 = fourth_derivative(f, x, scale=1e-3 * span) / 24.0 if degen else None
        out.append(LaplacePoint(x, v, d2, degen, q4))
    return out


def minimize_1d(f: Callable[[float], float], bracket: tuple[float, float],
                tol: float = 1e-12) -> LaplacePoint:
    """Lowest interior minimum of f on the bracket (leftmost on a tie)."""
    return find_global_minima_1d(f, bracket, xatol=tol)[0]
