"""Named parameter presets for the table and smile runs.

The published tables state the vol scales as 1/sqrt(10) but never the
initial volatility; every preset here uses a0 = 1, which reproduces the
sigma_0 columns to all printed digits.  Ratio columns are insensitive to
this convention.
"""
from __future__ import annotations

import math

INV_SQRT_10 = 1.0 / math.sqrt(10.0)

PRESETS: dict[str, dict] = {
    "table1": {
        "model": {"sigma_x": INV_SQRT_10, "sigma_y": INV_SQRT_10, "alpha": INV_SQRT_10,
                  "rho_xy": 0.01, "rho_xa": 0.02, "rho_ya": -0.05, "a0": 1.0},
        "strikes": [2.1, 2.3, 2.5, 2.7, 2.9, 3.1, 3.3],
        "maturities": [0.003],
        "mode": "all",
    },
    "table2": {
        "model": {"sigma_x": INV_SQRT_10, "sigma_y": INV_SQRT_10, "alpha": INV_SQRT_10,
                  "rho_xy": 0.01, "rho_xa": 0.2, "rho_ya": 0.05, "a0": 1.0},
        "strikes": [2.05, 2.1, 2.15, 2.2, 2.25, 2.3, 2.35, 2.4],
        "maturities": [0.02],
        "mode": "all",
    },
    "fig3a": {
        "model": {"sigma_x": 1.1 * INV_SQRT_10, "sigma_y": INV_SQRT_10,
                  "alpha": INV_SQRT_10, "rho_xy": 0.0, "rho_xa": 0.0, "rho_ya": 0.0,
                  "a0": 1.0},
        "strikes": [round(2.02 + 0.04 * i, 2) for i in range(13)],
        "maturities": [0.01],
        "mode": "all",
    },
    "fig3b": {
        "model": {"sigma_x": 1.1 * INV_SQRT_10, "sigma_y": INV_SQRT_10,
                  "alpha": INV_SQRT_10, "rho_xy": 0.0, "rho_xa": 0.02, "rho_ya": 0.03,
                  "a0": 1.0},
        "strikes": [round(2.02 + 0.04 * i, 2) for i in range(13)],
        "maturities": [0.01],
        "mode": "all",
    },
    "fig3c": {
        "model": {"sigma_x": 1.1 * INV_SQRT_10, "sigma_y": INV_SQRT_10,
                  "alpha": INV_SQRT_10, "rho_xy": 0.0, "rho_xa": 0.03, "rho_ya": -0.02,
                  "a0": 1.0},
        "strikes": [round(2.02 + 0.04 * i, 2) for i in range(13)],
        "maturities": [0.01],
        "mode": "all",
    },
    "uncorr": {
        "model": {"a0": 1.0},
        "strikes": [2.1, 2.3, 2.5, 2.7, 2.9, 3.1, 3.3],
        "maturities": [0.003],
        "mode": "all",
    },
}
