"""Small-time asymptotics for two-asset basket calls under lognormal SABR.

Asymptotic saddlepoint prices, basket densities and implied-vol expansions,
with an independent adaptive-quadrature oracle over the leading-order
transition density for validation.
"""
from .hyperbolic import (HPoint, UncorrParams, density_uncorr_bound,
                         density_uncorr_leading, drift_functional,
                         geodesic_distance, heat_kernel_h3)
from .oracle import (QuadratureSpec, bs_call, bs_implied_vol, numint_density,
                     numint_price)
from .results import PriceResult
from .sabr_correlated import (CorrGeometry, CorrModel, CorrParams, a_star_corr,
                              corr_geometry, d_corr, find_saddles_corr,
                              implied_vol_expansion, p_hat1, price_corr)
from .sabr_uncorrelated import (UncorrSaddle, a_star, density_sum_uncorr, phi_aa,
                                phi_rate, price_uncorr, price_uncorr_degenerate,
                                rho_star)
from .saddle_core import (K_CRITICAL, LaplacePoint, MinimizerClass, MinimizerKind,
                          classify_minimizers, hbar, minimize_1d,
                          quartic_gaussian_constant, upsilon_exact,
                          upsilon_quartic_exact)

__all__ = [
    "HPoint", "UncorrParams", "CorrParams", "CorrGeometry", "CorrModel",
    "PriceResult", "QuadratureSpec", "MinimizerClass", "MinimizerKind",
    "LaplacePoint", "K_CRITICAL",
    "geodesic_distance", "heat_kernel_h3", "drift_functional",
    "density_uncorr_leading", "density_uncorr_bound",
    "hbar", "classify_minimizers", "upsilon_exact", "upsilon_quartic_exact",
    "quartic_gaussian_constant", "minimize_1d",
    "a_star", "rho_star", "phi_rate", "phi_aa", "price_uncorr",
    "price_uncorr_degenerate", "density_sum_uncorr",
    "corr_geometry", "d_corr", "a_star_corr", "p_hat1", "find_saddles_corr",
    "price_corr", "implied_vol_expansion",
    "numint_price", "numint_density", "bs_call", "bs_implied_vol",
]

__version__ = "0.1.0"
