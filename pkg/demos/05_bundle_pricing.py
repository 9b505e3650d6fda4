# %% [markdown]
# Pricing a bundle against its unbundled parts
#
# The recommendation depends on whether the bundle adds something new and on
# the customer's reference price for that addition.

# %%
from qsrisk import OfferScenario, evaluate_offer

parts = (300.0, 500.0, 200.0)
cases = [
    ("sum of parts, priced at the sum", OfferScenario(parts, 1000.0)),
    ("sum of parts, priced above", OfferScenario(parts, 1080.0)),
    ("new component, reference price R150", OfferScenario(parts, 1100.0, True, 150.0)),
    ("new component, reference price R0", OfferScenario(parts, 1100.0, True, 0.0)),
]
for name, scenario in cases:
    g = evaluate_offer(scenario)
    print(f"{name:38s} -> {g.recommendation.code:32s} max {g.max_recommended_bundle_price:.0f}")
