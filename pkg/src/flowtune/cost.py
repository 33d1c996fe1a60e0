"""Decoupled pricing: runtime x (vCPU price x cpu + GB price x mem_GB) + request price."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graph import ResourceConfig

MB_PER_GB = 1024


@dataclass(frozen=True)
class PricingParams:
    mu0: float = 0.512  # per vCPU-second
    mu1: float = 0.001  # per GB-second
    mu2: float = 0.0  # per request

    def __post_init__(self):
        if min(self.mu0, self.mu1, self.mu2) < 0:
            raise ValueError("prices must be non-negative")


DEFAULT_PRICING = PricingParams()


def function_cost(runtime: float, config: ResourceConfig, pricing: PricingParams = DEFAULT_PRICING) -> float:
    return runtime * (pricing.mu0 * config.cpu + pricing.mu1 * config.mem / MB_PER_GB) + pricing.mu2


def aggregate_cost(
    entries: Iterable[tuple[float, ResourceConfig]], pricing: PricingParams = DEFAULT_PRICING
) -> float:
    total = 0.0
    for runtime, config in entries:
        total += function_cost(runtime, config, pricing)
    return total
