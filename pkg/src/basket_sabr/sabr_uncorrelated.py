"""Small-time basket-call asymptotics for the uncorrelated unit-scale model.

Strike domain is K > 2 (out of the money for two unit spots).  The rate
function has a closed form up to the critical strike K* = 2e; above it the
minimizer splits into a symmetric pair and the prefactor doubles; at K*
itself the saddle is quartic and the price follows a t^{5/4} law instead of
t^{3/2}.  In-the-money strikes (K <= 2) are refused here: price those with
the quadrature oracle.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .hyperbolic import acosh1p, log_sinhc_ratio
from .results import PriceResult
from .saddle_core import (K_CRITICAL, GAMMA_QUARTER, MinimizerKind,
                          classify_minimizers, log_upsilon_exact,
                          log_upsilon_quartic_exact)

LOG_TWO_PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class UncorrSaddle:
    """Saddlepoint data at a strike: constrained minimizer and curvatures."""

    x_star: float
    y_star: float
    a_star: float
    Hbar: float
    phi: float
    psi2: float      # Psi''(x*) along the strike constraint
    phi_aa: float    # second a-derivative of (1/2) rho^2 at a*
    n_minima: int


def a_star(x, y, a0: float):
    """In-fiber minimizer of the distance: sqrt(a0^2 + x^2 + y^2)."""
    return np.sqrt(a0 * a0 + np.asarray(x, float) ** 2 + np.asarray(y, float) ** 2)


def rho_star(x, y, a0: float):
    """Distance from (0,0,a0) to the fiber over (x, y), i.e. at a = a*."""
    r2 = (np.asarray(x, float) ** 2 + np.asarray(y, float) ** 2) / (a0 * a0)
    # acosh(sqrt(1 + r2)) = acosh1p(sqrt(1+r2) - 1), cancellation-free form
    w = np.sqrt(1.0 + r2)
    return acosh1p(r2 / (1.0 + w))


def phi_aa(x, y, a0: float):
    """Analytic second a-derivative of Phi = rho^2/2 at the in-fiber minimum.

    Equals (rho*/sinh rho*) / (a0 a*); the sinhc form is smooth through
    x = y = 0 where it reduces to 1/a0^2.
    """
    rs = rho_star(x, y, a0)
    return np.exp(log_sinhc_ratio(rs)) / (a0 * a_star(x, y, a0))


def y_K(x, K: float):
    return np.log(K - np.exp(x))


def Hbar_K(x, K: float, a0: float):
    """Distance to the strike constraint as a function of the first log-price."""
    return rho_star(x, y_K(x, K), a0)


def psi_exponent(x, K: float, a0: float):
    """Psi(x) = Hbar_K(x)^2 / 2, the 1-d exponent along the constraint."""
    return 0.5 * Hbar_K(x, K, a0) ** 2


def psi_exponent_d2(x: float, K: float, a0: float) -> float:
    """Analytic Psi''(x): exact chain rule through acosh(sqrt(u)).

    Stays accurate arbitrarily close to the critical strike, where finite
    differences cannot separate the nearly-merged minima.
    """
    y = math.log(K - math.exp(x))
    yp = -math.exp(x - y)
    ypp = yp * (1.0 - yp)
    h = x * x + y * y
    hp = 2.0 * x + 2.0 * y * yp
    hpp = 2.0 + 2.0 * yp * yp + 2.0 * y * ypp
    v = h / (a0 * a0)  # u - 1, carried exactly: near the money 1 + v rounds to 1
    up = hp / (a0 * a0)
    upp = hpp / (a0 * a0)
    if v < 1e-8:
        # flat-metric limit: Psi ~ h/(2 a0^2), relative error O(v)
        return 0.5 * upp
    q = (1.0 + v) * v
    g = 0.5 / math.sqrt(q)
    gp = -(1.0 + 2.0 * v) / (4.0 * q**1.5)
    H = float(rho_star(x, y, a0))
    Hp = up * g
    Hpp = upp * g + up * up * gp
    return Hp * Hp + H * Hpp


def _saddle_for(K: float, a0: float) -> UncorrSaddle:
    cls = classify_minimizers(K)
    if cls.kind is MinimizerKind.SYMMETRIC_PAIR:
        x_star = math.log(cls.minimizers[0])
        n = 2
    else:
        x_star = math.log(K / 2.0)
        n = 1
    ys = float(y_K(x_star, K))
    a_s = float(a_star(x_star, ys, a0))
    H = float(Hbar_K(x_star, K, a0))
    psi2 = psi_exponent_d2(x_star, K, a0)
    return UncorrSaddle(x_star, ys, a_s, H, 0.5 * H * H, psi2,
                        float(phi_aa(x_star, ys, a0)), n)


def phi_rate(K: float, a0: float = 1.0) -> tuple[float, UncorrSaddle]:
    """Rate function phi(k) with the saddle report.

    Closed form for K in (2, 2e]: phi = acosh(sqrt(1 + 2(k - log 2)^2/a0^2))^2 / 2.
    Above 2e the left minimizer comes from the hbar classification and the
    closed form no longer applies.
    """
    if not (K > 2.0):
        raise ValueError(f"asymptotic branch requires K > 2, got K={K}")
    saddle = _saddle_for(K, a0)
    if saddle.n_minima == 1:
        s = (math.log(K) - math.log(2.0)) / a0
        w = math.sqrt(1.0 + 2.0 * s * s)
        phi = 0.5 * float(acosh1p(2.0 * s * s / (1.0 + w))) ** 2
    else:
        phi = saddle.phi
    return phi, saddle


def log_psi_prefactor(K: float, a0: float = 1.0, saddle: UncorrSaddle | None = None) -> float:
    """log psi(k), the t^{3/2} coefficient of the basket call price."""
    s = saddle or _saddle_for(K, a0)
    xs, ys = s.x_star, s.y_star
    w = math.log(math.exp(2 * xs) + math.exp(2 * ys)) - ys
    # 1/(H sinh H) = sinhc(H) / H^2 with sinhc = H/sinh H
    return (math.log(s.n_minima) + w - 0.5 * (xs + ys)
            - 0.5 * math.log(a0 * s.a_star)
            - 0.5 * (LOG_TWO_PI + math.log(s.phi_aa * s.psi2))
            + float(log_sinhc_ratio(s.Hbar)) - 2.0 * math.log(s.Hbar))


def price_uncorr(K: float, t: float, a0: float = 1.0,
                 mode: str = "asymptotic") -> PriceResult:
    """Basket call price, generic strike branch.

    mode="asymptotic" gives psi(k) t^{3/2} e^{-phi/t}; mode="upsilon_exact"
    closes the final time integral with the exact Erf form instead of its
    t -> 0 limit (materially better near the money, where t/Hbar^2 is not
    small).  Strikes within 1e-12 of 2e are redirected to the degenerate
    branch; within 0.1% of 2e the generic prefactor is already inflating
    (Psi'' -> 0) and a warning plus both values are attached.
    """
    if not (K > 2.0):
        raise ValueError(f"asymptotic branch requires K > 2, got K={K}")
    if t <= 0:
        raise ValueError("t must be positive")
    if abs(K - K_CRITICAL) < 1e-12:
        return price_uncorr_degenerate(t, a0, mode=mode)
    phi, saddle = phi_rate(K, a0)
    lpsi = log_psi_prefactor(K, a0, saddle)
    H = saddle.Hbar
    if mode == "asymptotic":
        lp = lpsi + 1.5 * math.log(t) - phi / t
    elif mode == "upsilon_exact":
        # 1/2 * C_J1 * Upsilon(Hbar, t) with C_J1 = psi * Hbar^2
        lp = lpsi + 2.0 * math.log(H) - math.log(2.0) + log_upsilon_exact(H, t)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    diag = {"saddle": saddle, "phi": phi, "log_psi": lpsi}
    if abs(K - K_CRITICAL) / K_CRITICAL < 1e-3:
        degen = price_uncorr_degenerate(t, a0, mode=mode)
        diag["near_degenerate_warning"] = (
            "Psi''(x*) is near zero; the generic prefactor is unreliable this "
            "close to K* = 2e")
        diag["log_price_degenerate_branch"] = degen.log_price
        warnings.warn(diag["near_degenerate_warning"], RuntimeWarning, stacklevel=2)
    return PriceResult(lp, mode, diagnostics=diag)


def degenerate_constants(a0: float) -> dict[str, float]:
    """Geometry at the critical strike: x* = y* = 1."""
    Hbar = float(acosh1p(2.0 / (a0 * a0) / (1.0 + math.sqrt(1.0 + 2.0 / a0**2))))
    abar = math.sqrt(a0 * a0 + 2.0)  # a*(1, 1)
    xi = 5.0 / (24.0 * math.sqrt(1.0 + a0 * a0 / 2.0))
    paa = float(phi_aa(1.0, 1.0, a0))
    return {"Hbar": Hbar, "abar": abar, "xi": xi, "phi_aa": paa}


def price_uncorr_degenerate(t: float, a0: float = 1.0,
                            mode: str = "asymptotic") -> PriceResult:
    """Basket call price at the critical strike K = 2e (t^{5/4} law).

    Composed from the quartic Laplace step and the power -3/4 time integral;
    the constant works out to twice the published closed form, which the
    oracle ratio confirms.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    c = degenerate_constants(a0)
    H, xi = c["Hbar"], c["xi"]
    # C_q: coefficient of u^{-3/4} e^{-H^2/(2u)} in the local-time integrand
    log_cq = (-0.5 * math.log(a0 * c["abar"]) - math.log(2.0 * math.pi)
              - 0.5 * math.log(c["phi_aa"]) + math.log(GAMMA_QUARTER)
              - 0.25 * math.log(xi * H) + float(log_sinhc_ratio(H)))
    if mode == "asymptotic":
        lp = log_cq - 2.0 * math.log(H) + 1.25 * math.log(t) - H * H / (2.0 * t)
    elif mode == "upsilon_exact":
        lp = log_cq - math.log(2.0) + log_upsilon_quartic_exact(H, t)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return PriceResult(lp, mode, diagnostics={"constants": c})


def log_density_sum_uncorr(K: float, t: float, a0: float = 1.0) -> float:
    """log of the saddlepoint density of S^1_t + S^2_t at K, for K in (2, 2e).

    Carries the drift factor e^{-(x*+y*)/2} from the kernel expansion; the
    oracle comparison pins it (the published display lost it).
    """
    if not (2.0 < K < K_CRITICAL):
        raise ValueError(f"density branch requires K in (2, 2e), got K={K}")
    if t <= 0:
        raise ValueError("t must be positive")
    phi, s = phi_rate(K, a0)
    return (-s.y_star - 0.5 * (s.x_star + s.y_star)
            - 0.5 * math.log(a0) - 2.5 * math.log(s.a_star)
            - 0.5 * (LOG_TWO_PI + math.log(t)) - 0.5 * math.log(s.phi_aa * s.psi2)
            + float(log_sinhc_ratio(s.Hbar)) - phi / t)


def density_sum_uncorr(K: float, t: float, a0: float = 1.0) -> float:
    return math.exp(log_density_sum_uncorr(K, t, a0))
