"""Reference-price rules for offering a bundle against its unbundled parts.

Two cases:

* the bundle is just the sum of its parts: it should cost no more than the
  parts bought separately;
* the bundle adds a component not sold separately: it may cost more, up to
  the customer's reference price for that component, and only if the value
  is communicated. A reference price of R0.00 means customers will likely
  stick with the unbundled option.

The rules are deterministic; no purchase probabilities are modelled.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Recommendation(enum.IntEnum):
    # ordered from least to most favourable to the bundle
    PREFER_UNBUNDLED_LIKELY = 0
    BUNDLE_VIABLE_IF_VALUE_COMMUNICATED = 1
    BUNDLE_VIABLE = 2

    @property
    def code(self):
        return {0: "PreferUnbundledLikely", 1: "BundleViableIfValueCommunicated",
                2: "BundleViable"}[int(self)]


@dataclass(frozen=True)
class OfferScenario:
    component_prices: tuple
    bundle_price: float
    value_add_present: bool = False
    value_add_reference_price: float = 0.0

    def __post_init__(self):
        prices = tuple(float(p) for p in (
            self.component_prices.values() if isinstance(self.component_prices, dict)
            else self.component_prices))
        object.__setattr__(self, "component_prices", prices)
        for p in (*prices, self.bundle_price, self.value_add_reference_price):
            if not (math.isfinite(p) and p >= 0):
                raise ValueError(f"prices must be finite and >= 0, got {p}")

    @property
    def components_total(self):
        return math.fsum(self.component_prices)


@dataclass(frozen=True)
class PricingGuidance:
    max_recommended_bundle_price: float
    recommendation: Recommendation
    rationale: str

    def to_dict(self):
        return {
            "max_recommended_bundle_price": self.max_recommended_bundle_price,
            "recommendation": self.recommendation.code,
            "rationale": self.rationale,
        }


def evaluate_offer(s: OfferScenario) -> PricingGuidance:
    total = s.components_total
    if not s.value_add_present:
        if s.bundle_price <= total:
            return PricingGuidance(total, Recommendation.BUNDLE_VIABLE,
                                   "bundle priced at or below the sum of its components")
        return PricingGuidance(total, Recommendation.PREFER_UNBUNDLED_LIKELY,
                               "bundle adds nothing but costs more than its components")

    ref = s.value_add_reference_price
    cap = total + ref
    if s.bundle_price <= total:
        return PricingGuidance(cap, Recommendation.BUNDLE_VIABLE,
                               "bundle no dearer than its components, new component included free")
    if ref <= 0:
        return PricingGuidance(cap, Recommendation.PREFER_UNBUNDLED_LIKELY,
                               "new component has a R0.00 reference price; the premium will not be paid")
    if s.bundle_price <= cap:
        return PricingGuidance(cap, Recommendation.BUNDLE_VIABLE_IF_VALUE_COMMUNICATED,
                               "premium within the new component's reference price; "
                               "viable only if its value is made clear")
    return PricingGuidance(cap, Recommendation.PREFER_UNBUNDLED_LIKELY,
                           "premium exceeds the new component's reference price")
