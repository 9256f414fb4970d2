"""Result containers shared across pricing backends."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any
import math


@dataclass
class PriceResult:
    """A price plus the method that produced it.

    ``log_price`` is the primary quantity: deep out-of-the-money prices
    underflow float64 (Table-1-style runs reach exponents below -700),
    in which case ``price`` is 0.0 and only ``log_price`` is meaningful.
    """

    log_price: float
    method: str  # "asymptotic" | "upsilon_exact" | "oracle"
    rel_error: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def price(self) -> float:
        try:
            return math.exp(self.log_price)
        except OverflowError:
            return math.inf

    def ratio_to(self, other: "PriceResult") -> float:
        return math.exp(self.log_price - other.log_price)
