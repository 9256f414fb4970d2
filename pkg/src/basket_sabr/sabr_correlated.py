"""General three-correlation model: geometry, leading density, pricing,
and the implied-volatility expansion.

The triangular factor Sigma of the Brownian correlation matrix turns the
model into a drifted hyperbolic Brownian motion in transformed coordinates
(x_hat, y_hat, a); all distances below are half-space distances between
transformed points.  Transformed displacements are affine in a, which gives
closed forms for the in-fiber volatility minimizer a*(x, y) and for the
fiber curvature Phi_aa.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .hyperbolic import acosh1p, log_sinhc_ratio
from .results import PriceResult
from .saddle_core import log_upsilon_exact, second_derivative

LOG_TWO_PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class CorrParams:
    """Correlated model parameters.

    sigma_x, sigma_y scale the two asset vols, alpha is the (common)
    vol-of-vol, and the three rho's correlate the driving Brownians.  The
    correlation triple must keep the 3x3 Brownian covariance strictly
    positive definite.
    """

    sigma_x: float
    sigma_y: float
    alpha: float
    rho_xy: float = 0.0
    rho_xa: float = 0.0
    rho_ya: float = 0.0
    a0: float = 1.0

    def __post_init__(self):
        for name in ("sigma_x", "sigma_y", "alpha", "a0"):
            v = getattr(self, name)
            if not (v > 0.0) or not np.isfinite(v):
                raise ValueError(f"{name} must be positive, got {v}")
        for name in ("rho_xy", "rho_xa", "rho_ya"):
            if not abs(getattr(self, name)) < 1.0:
                raise ValueError(f"|{name}| must be < 1")
        g = (self.rho_xy**2 + self.rho_xa**2 + self.rho_ya**2
             - 2.0 * self.rho_xy * self.rho_xa * self.rho_ya)
        if not g < 1.0:
            raise ValueError("correlation triple is not positive definite")

    def correlation_matrix(self) -> np.ndarray:
        return np.array([[1.0, self.rho_xy, self.rho_xa],
                         [self.rho_xy, 1.0, self.rho_ya],
                         [self.rho_xa, self.rho_ya, 1.0]])


@dataclass(frozen=True)
class CorrGeometry:
    """Derived correlation algebra: the triangular factor and its inverse."""

    beta: float
    gamma: float
    xi: float
    rbar_ya: float
    Sigma: np.ndarray
    SigmaInv: np.ndarray
    detSigma: float


def corr_geometry(params: CorrParams) -> CorrGeometry:
    rbar_ya = math.sqrt(1.0 - params.rho_ya**2)
    gamma = params.rho_xy - params.rho_xa * params.rho_ya
    beta_sq = (1.0 - params.rho_xa**2) - gamma**2 / rbar_ya**2
    if not beta_sq > 0.0:
        raise ValueError("correlation triple is not positive definite (beta^2 <= 0)")
    beta = math.sqrt(beta_sq)
    xi = params.rho_xy * params.rho_ya - params.rho_xa
    Sigma = np.array([[beta, gamma / rbar_ya, params.rho_xa],
                      [0.0, rbar_ya, params.rho_ya],
                      [0.0, 0.0, 1.0]])
    SigmaInv = np.array([[1.0 / beta, -gamma / (rbar_ya**2 * beta), xi / (rbar_ya**2 * beta)],
                         [0.0, 1.0 / rbar_ya, -params.rho_ya / rbar_ya],
                         [0.0, 0.0, 1.0]])
    return CorrGeometry(beta, gamma, xi, rbar_ya, Sigma, SigmaInv, beta * rbar_ya)


class CorrModel:
    """Parameters plus cached geometry; the working object of this module."""

    def __init__(self, params: CorrParams):
        self.params = params
        self.geom = corr_geometry(params)
        p, g = params, self.geom
        # transformed displacement is affine in a: (A + B(a-a0), C + D(a-a0), a-a0)
        self._B = g.xi / (g.rbar_ya**2 * g.beta)
        self._D = -p.rho_ya / g.rbar_ya
        self._q2 = self._B**2 + self._D**2 + 1.0
        self._Ahat_cx = -0.5 * (p.sigma_x / (g.beta * p.alpha)
                                - g.gamma * p.sigma_y / (g.rbar_ya**2 * g.beta * p.alpha))
        self._Ahat_cy = -p.sigma_y / (2.0 * p.alpha * g.rbar_ya)

    # -- geometry ----------------------------------------------------------
    def scaled_coords(self, x, y):
        p = self.params
        return p.alpha * np.asarray(x, float) / p.sigma_x, \
            p.alpha * np.asarray(y, float) / p.sigma_y

    def displacement(self, x, y, a):
        """Transformed displacement from the transformed origin; affine in a."""
        p, g = self.params, self.geom
        xs, ys = self.scaled_coords(x, y)
        da = np.asarray(a, float) - p.a0
        dxh = xs / g.beta - g.gamma * ys / (g.rbar_ya**2 * g.beta) + self._B * da
        dyh = ys / g.rbar_ya + self._D * da
        return dxh, dyh, da

    def d(self, x, y, a):
        """Half-space distance between the transformed points."""
        dxh, dyh, da = self.displacement(x, y, a)
        u = (dxh**2 + dyh**2 + da**2) / (2.0 * self.params.a0 * np.asarray(a, float))
        return acosh1p(u)

    def _q0(self, x, y):
        """Constant coefficient of |displacement|^2 as a quadratic in a."""
        p, g = self.params, self.geom
        xs, ys = self.scaled_coords(x, y)
        A = xs / g.beta - g.gamma * ys / (g.rbar_ya**2 * g.beta)
        C = ys / g.rbar_ya
        a0 = p.a0
        return (A - self._B * a0) ** 2 + (C - self._D * a0) ** 2 + a0 * a0

    def a_star(self, x, y):
        """Closed-form argmin over a of d(x, y, .): sqrt(q0 / q2).

        With |displacement|^2 = q2 a^2 + q1 a + q0, minimizing
        (quadratic in a) / a lands at sqrt(q0/q2).
        """
        return np.sqrt(self._q0(x, y) / self._q2)

    def phi_aa(self, x, y, a_s=None):
        """Analytic curvature of Phi(a) = d^2/2 at the in-fiber minimum.

        Phi_aa = (d*/sinh d*) q0 / (a0 a*^3); smooth through d* = 0.
        """
        if a_s is None:
            a_s = self.a_star(x, y)
        ds = self.d(x, y, a_s)
        return np.exp(log_sinhc_ratio(ds)) * self._q0(x, y) / (self.params.a0 * a_s**3)

    def A_hat(self, xh_disp, yh_disp, a):
        """Drift functional on transformed displacements plus the vol ratio."""
        return (self._Ahat_cx * xh_disp + self._Ahat_cy * yh_disp
                + 0.5 * np.log(np.asarray(a, float) / self.params.a0))

    def d_and_grad(self, x, y, a):
        """d plus its partials in (x, y) at fixed a (for saddle polishing)."""
        p, g = self.params, self.geom
        dxh, dyh, da = self.displacement(x, y, a)
        dd = self.d(x, y, a)
        sinh_d = np.sinh(dd)
        denom = p.a0 * np.asarray(a, float) * np.where(sinh_d == 0.0, np.inf, sinh_d)
        # columns of the displacement Jacobian in x and y
        jx_x = p.alpha / (p.sigma_x * g.beta)
        jx_y = -g.gamma * p.alpha / (p.sigma_y * g.rbar_ya**2 * g.beta)
        jy_y = p.alpha / (p.sigma_y * g.rbar_ya)
        d_x = dxh * jx_x / denom
        d_y = (dxh * jx_y + dyh * jy_y) / denom
        return dd, d_x, d_y


def d_corr(x, y, a, params: CorrParams):
    return CorrModel(params).d(x, y, a)


def a_star_corr(x, y, params: CorrParams):
    return CorrModel(params).a_star(x, y)


def A_hat(x_hat_disp, y_hat_disp, a, params: CorrParams):
    return CorrModel(params).A_hat(x_hat_disp, y_hat_disp, a)


def log_p_hat1(x, y, a, t, params: CorrParams, model: CorrModel | None = None):
    """log of the leading-order density of (X_t, Y_t, a_t) w.r.t. dx dy da.

    Includes the coordinate Jacobian alpha^2/(sigma_x sigma_y) and 1/det
    Sigma, so this is a bona fide density (integrates to 1 + O(t)); the
    volume factor is a^{-3} because the third transformed coordinate is a
    itself.
    """
    m = model or CorrModel(params)
    p = m.params
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    a = np.asarray(a, float)
    dxh, dyh, _ = m.displacement(x, y, a)
    dd = m.d(x, y, a)
    al2t = p.alpha**2 * t
    return (-3.0 * np.log(a) + m.A_hat(dxh, dyh, a)
            - 1.5 * (LOG_TWO_PI + np.log(al2t)) + log_sinhc_ratio(dd)
            - dd**2 / (2.0 * al2t)
            - math.log(m.geom.detSigma) + math.log(p.alpha**2 / (p.sigma_x * p.sigma_y)))


def p_hat1(x, y, a, t, params: CorrParams):
    if t <= 0:
        raise ValueError("t must be positive")
    return np.exp(log_p_hat1(x, y, a, t, params))


# ---------------------------------------------------------------------------
# saddle search along the strike constraint
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrMinimizer:
    x_star: float
    y_star: float
    a_star: float
    d: float
    psi2: float
    phi_aa: float


@dataclass(frozen=True)
class CorrSaddle:
    minimizers: tuple[CorrMinimizer, ...]
    Lambda: float
    rate: float      # Lambda^2 / (2 alpha^2)
    n: int


class DegenerateSaddleError(ValueError):
    pass


def _constraint_distance(m: CorrModel, K: float):
    def H(x):
        y = np.log(K - np.exp(x))
        return m.d(x, y, m.a_star(x, y))
    return H


def _constraint_distance_grad(m: CorrModel, K: float):
    """Analytic H'(x) along the constraint (envelope in a)."""
    def Hp(x):
        y = float(np.log(K - math.exp(x)))
        a_s = float(m.a_star(x, y))
        _, d_x, d_y = m.d_and_grad(x, y, a_s)
        return float(d_x - d_y * math.exp(x - y))
    return Hp


def find_saddles_corr(K: float, params: CorrParams, model: CorrModel | None = None,
                      n_starts: int = 400, window: float = 15.0,
                      psi2_tol: float = 1e-9,
                      require_nondegenerate: bool = True) -> CorrSaddle:
    """All global minimizers of the constrained distance for strike K.

    Multi-start scan over x in [log K - window, log K), gradient-bracketed
    refinement to machine precision, clustering, and per-minimizer
    curvature (Psi'' by Richardson finite differences, Phi_aa analytic).
    A vanishing Psi'' raises unless require_nondegenerate is off (the
    quadrature oracle only needs locations, not curvatures).
    """
    if not (K > 2.0):
        raise ValueError(f"saddle search requires K > 2, got K={K}")
    m = model or CorrModel(params)
    logK = math.log(K)
    H = _constraint_distance(m, K)
    Hp = _constraint_distance_grad(m, K)
    xs = np.linspace(logK - window, logK - 1e-6, n_starts)
    Hs = np.array(H(xs))
    cands: list[float] = []
    for i in range(1, n_starts - 1):
        if Hs[i] < Hs[i - 1] and Hs[i] <= Hs[i + 1]:
            lo, hi = xs[i - 1], xs[i + 1]
            try:
                cands.append(brentq(Hp, lo, hi, xtol=1e-14, rtol=8.9e-16))
            except ValueError:
                r = minimize_scalar(H, bounds=(lo, hi), method="bounded",
                                    options={"xatol": 1e-13})
                cands.append(float(r.x))
    if not cands:
        raise ValueError("no interior minimizer found; widen the search window")
    vals = [float(H(np.asarray(x))) for x in cands]
    best = min(vals)
    alpha = m.params.alpha

    def Psi(x):
        return float(H(np.asarray(x))) ** 2 / (2.0 * alpha**2)

    mins: list[CorrMinimizer] = []
    for x, v in sorted(zip(cands, vals)):
        if v > best + 1e-10 * max(1.0, best):
            continue
        if any(abs(x - q.x_star) < 1e-6 for q in mins):
            continue
        y = float(np.log(K - math.exp(x)))
        a_s = float(m.a_star(x, y))
        # shrink the stencil when another critical point sits nearby
        sep = min((abs(x - o) for o in cands if abs(x - o) > 1e-12),
                  default=math.inf)
        step = min(8.0e-3 * max(abs(x), 1e-2), sep / 8.0) if np.isfinite(sep) else None
        psi2 = second_derivative(Psi, x, scale=1e-2, step=step)
        if require_nondegenerate and not psi2 > psi2_tol:
            raise DegenerateSaddleError(
                f"Psi''(x*) = {psi2:.3e} at x* = {x:.6f}: degenerate saddle, the "
                "generic correlated formula does not apply")
        mins.append(CorrMinimizer(x, y, a_s, v, psi2, float(m.phi_aa(x, y, a_s))))
    Lam = mins[0].d
    return CorrSaddle(tuple(mins), Lam, Lam**2 / (2.0 * alpha**2), len(mins))


# ---------------------------------------------------------------------------
# pricing
# ---------------------------------------------------------------------------

def log_psi_corr(K: float, params: CorrParams, model: CorrModel | None = None,
                 saddle: CorrSaddle | None = None) -> tuple[float, CorrSaddle]:
    """log of the t^{3/2} price coefficient (sum over global minimizers)."""
    m = model or CorrModel(params)
    s = saddle or find_saddles_corr(K, params, model=m)
    p = m.params
    terms = []
    for q in s.minimizers:
        dxh, dyh, _ = m.displacement(q.x_star, q.y_star, q.a_star)
        chi = float(m.A_hat(dxh, dyh, q.a_star))
        w = (p.sigma_x**2 * math.exp(2.0 * q.x_star)
             + p.sigma_y**2 * math.exp(2.0 * q.y_star))
        terms.append(
            2.0 * math.log(q.a_star) + math.log(w) - q.y_star
            - 3.0 * math.log(q.a_star) + chi
            + 2.0 * math.log(p.alpha) - math.log(p.sigma_x * p.sigma_y * m.geom.detSigma)
            - 0.5 * (LOG_TWO_PI + math.log(q.phi_aa * q.psi2))
            + float(log_sinhc_ratio(q.d)) - 2.0 * math.log(q.d))
    return float(np.logaddexp.reduce(terms)), s


def _bracket_cross_factor(params: CorrParams, s: CorrSaddle) -> float:
    """Multiplicative adjustment the exact local-time bracket would apply.

    The prefactor weighs the saddle by sigma_x^2 e^{2x*} + sigma_y^2 e^{2y*};
    the exact quadratic variation of the basket adds the cross term
    2 rho_xy sigma_x sigma_y e^{x*+y*}.  At |rho_xy| = 0.01 this is a 1%
    effect; reported in diagnostics so large-correlation users can see it.
    """
    p = params
    num = den = 0.0
    for q in s.minimizers:
        w = (p.sigma_x**2 * math.exp(2 * q.x_star)
             + p.sigma_y**2 * math.exp(2 * q.y_star))
        c = 2.0 * p.rho_xy * p.sigma_x * p.sigma_y \
            * math.exp(q.x_star + q.y_star) / w
        num += w * (1.0 + c)
        den += w
    return num / den


def price_corr(K: float, t: float, params: CorrParams, mode: str = "asymptotic",
               model: CorrModel | None = None) -> PriceResult:
    """Basket call price under the correlated model.

    mode="asymptotic": psi(k) t^{3/2} exp(-Lambda^2/(2 alpha^2 t)).
    mode="upsilon_exact": the final time integral is closed with the exact
    Erf form at kappa = Lambda/alpha, i.e. (psi kappa^2 / 2) Upsilon(kappa, t).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    m = model or CorrModel(params)
    lpsi, s = log_psi_corr(K, params, model=m)
    kappa = s.Lambda / params.alpha
    if mode == "asymptotic":
        lp = lpsi + 1.5 * math.log(t) - s.rate / t
    elif mode == "upsilon_exact":
        lp = lpsi + 2.0 * math.log(kappa) - math.log(2.0) + log_upsilon_exact(kappa, t)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return PriceResult(lp, mode, diagnostics={
        "saddle": s, "log_psi": lpsi,
        "bracket_cross_adjustment": _bracket_cross_factor(params, s)})


def log_density_corr(K: float, t: float, params: CorrParams,
                     model: CorrModel | None = None) -> float:
    """log of the saddlepoint density of S^1_t + S^2_t at K (correlated)."""
    if t <= 0:
        raise ValueError("t must be positive")
    m = model or CorrModel(params)
    s = find_saddles_corr(K, params, model=m)
    p = m.params
    # the alpha^2 Jacobian cancels against the a-Laplace width here
    terms = []
    for q in s.minimizers:
        dxh, dyh, _ = m.displacement(q.x_star, q.y_star, q.a_star)
        chi = float(m.A_hat(dxh, dyh, q.a_star))
        terms.append(
            -q.y_star - 3.0 * math.log(q.a_star) + chi
            - math.log(p.sigma_x * p.sigma_y * m.geom.detSigma)
            - 0.5 * (LOG_TWO_PI + math.log(t)) - 0.5 * math.log(q.phi_aa * q.psi2)
            + float(log_sinhc_ratio(q.d)) - s.rate / t)
    return float(np.logaddexp.reduce(terms))


def implied_vol_expansion(K: float, t: float, params: CorrParams,
                          model: CorrModel | None = None) -> tuple[float, float, float]:
    """(sigma0, a, sigma_t): the short-maturity implied-vol expansion.

    sigma0 = |x1| alpha / Lambda with x1 = log(K/2); the slope a matches the
    price prefactor to the Black-Scholes small-time expansion; sigma_t =
    sqrt(sigma0^2 + a t).
    """
    if not (K > 2.0):
        raise ValueError(f"implied-vol expansion requires K > 2, got K={K}")
    m = model or CorrModel(params)
    lpsi, s = log_psi_corr(K, params, model=m)
    x1 = math.log(K / 2.0)
    sigma0 = abs(x1) * params.alpha / s.Lambda
    # A_BS(x1, sigma) = sigma^3 e^{x1/2} / x1^2; psi_bar = sqrt(2 pi) psi
    log_abs = 3.0 * math.log(sigma0) + 0.5 * x1 - 2.0 * math.log(abs(x1))
    log_half_psibar = -math.log(2.0) + 0.5 * LOG_TWO_PI + lpsi
    a_slope = 2.0 * sigma0**4 / x1**2 * (log_half_psibar - log_abs)
    sigma_t_sq = sigma0**2 + a_slope * t
    if sigma_t_sq <= 0:
        warnings.warn("implied-vol expansion turned negative at this maturity",
                      RuntimeWarning, stacklevel=2)
        sigma_t = float("nan")
    else:
        sigma_t = math.sqrt(sigma_t_sq)
    return sigma0, a_slope, sigma_t
