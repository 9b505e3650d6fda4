import itertools

import pytest
from hypothesis import given, strategies as st

from qsrisk.pricing import OfferScenario, Recommendation, evaluate_offer


def test_sum_of_parts_boundary():
    g = evaluate_offer(OfferScenario((300, 500, 200), 1000))
    assert g.max_recommended_bundle_price == 1000
    assert g.recommendation is Recommendation.BUNDLE_VIABLE


def test_sum_of_parts_above():
    g = evaluate_offer(OfferScenario((300, 500, 200), 1000.01))
    assert g.recommendation is Recommendation.PREFER_UNBUNDLED_LIKELY


def test_zero_reference_price():
    g = evaluate_offer(OfferScenario((300, 500, 200), 1050, True, 0.0))
    assert g.recommendation is Recommendation.PREFER_UNBUNDLED_LIKELY


def test_value_add_with_reference_price():
    g = evaluate_offer(OfferScenario((300, 500, 200), 1100, True, 150))
    assert g.max_recommended_bundle_price == 1150
    assert g.recommendation is Recommendation.BUNDLE_VIABLE_IF_VALUE_COMMUNICATED
    assert g.to_dict()["recommendation"] == "BundleViableIfValueCommunicated"


def test_value_add_priced_over_reference():
    g = evaluate_offer(OfferScenario((300, 500, 200), 1200, True, 150))
    assert g.recommendation is Recommendation.PREFER_UNBUNDLED_LIKELY


def test_invalid_prices():
    with pytest.raises(ValueError):
        OfferScenario((100, -1), 50)
    with pytest.raises(ValueError):
        OfferScenario((100,), float("inf"))


prices = st.floats(0, 1e5, allow_nan=False)


@given(st.lists(prices, min_size=1, max_size=4), prices, prices, prices)
def test_monotone_in_reference_price(components, bundle, ref_a, ref_b):
    lo, hi = sorted((ref_a, ref_b))
    a = evaluate_offer(OfferScenario(tuple(components), bundle, True, lo))
    b = evaluate_offer(OfferScenario(tuple(components), bundle, True, hi))
    assert b.recommendation >= a.recommendation


@given(st.lists(prices, min_size=1, max_size=4), prices, st.booleans(), prices)
def test_total_and_deterministic(components, bundle, value_add, ref):
    s = OfferScenario(tuple(components), bundle, value_add, ref)
    assert evaluate_offer(s) == evaluate_offer(s)
    assert isinstance(evaluate_offer(s).recommendation, Recommendation)
