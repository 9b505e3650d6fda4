from dataclasses import replace

import numpy as np
import pytest

from qsrisk.core import LOSS_TYPES, NCD_LEVELS, emit_csv, losses_by_type
from qsrisk.frequency import ResponseKind, ncd_sample_means
from qsrisk.risk import cte_empirical
from qsrisk.synthgen import (
    ConfigError,
    GenConfig,
    SeveritySpec,
    claim_counts,
    default_config,
    generate_portfolio,
)

TPI, OD, TPP = LOSS_TYPES


def test_default_config():
    cfg = default_config()
    assert cfg.n_policyholders == 22000
    assert cfg.freq_ncd_slope < 0
    assert GenConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("overrides", [
    {"n_policyholders": 0},
    {"ncd_mix": (0.5, 0.5, 0.1, 0, 0, 0)},
    {"ncd_mix": (0.5, 0.5)},
    {"freq_base_mean": 0.0},
    {"dispersion_r": -1.0},
    {"seed": -1},
])
def test_invalid_config_rejected(overrides):
    with pytest.raises(ConfigError):
        default_config(**overrides)


def test_invalid_inclusion_probs():
    cfg = default_config()
    with pytest.raises(ConfigError):
        replace(cfg, type_inclusion_probs={TPI: 1.5, OD: 0.1, TPP: 0.1})
    with pytest.raises(ConfigError):
        replace(cfg, type_inclusion_probs={TPI: 0.0, OD: 0.0, TPP: 0.0})


def test_severity_spec_validation():
    with pytest.raises(ConfigError):
        SeveritySpec("weibull", (1.0, 1.0))
    with pytest.raises(ConfigError):
        SeveritySpec("lognormal", (1.0, 0.0))
    with pytest.raises(ConfigError):
        SeveritySpec("gamma", (-1.0, 1.0))


def test_determinism():
    cfg = default_config(n_policyholders=3000, seed=5)
    a, b = generate_portfolio(cfg), generate_portfolio(cfg)
    assert a == b
    assert emit_csv(a) == emit_csv(b)
    assert emit_csv(generate_portfolio(default_config(n_policyholders=3000, seed=6))) != emit_csv(a)


def test_generated_events_are_valid(small_portfolio):
    ids = {ph.id for ph in small_portfolio.policyholders}
    for ev in small_portfolio.events:
        assert ev.losses
        assert ev.policyholder_id in ids
    assert all(ph.ncd_level in NCD_LEVELS for ph in small_portfolio.policyholders)


def test_single_type_forced():
    cfg = replace(default_config(n_policyholders=2000),
                  type_inclusion_probs={TPI: 0.0, OD: 1.0, TPP: 0.0})
    p = generate_portfolio(cfg)
    assert losses_by_type(p, TPI).n == 0
    assert losses_by_type(p, OD).n == len(p.events)


def test_other_families_generate():
    cfg = replace(default_config(n_policyholders=3000, severity_ncd_slope=0.0), severity_params={
        TPI: SeveritySpec("pareto", (500.0, 2.5)),
        OD: SeveritySpec("gamma", (2.0, 150.0)),
        TPP: SeveritySpec("lognormal", (6.0, 0.5)),
    })
    p = generate_portfolio(cfg)
    assert losses_by_type(p, TPI).values.min() >= 500.0


def test_claim_counts_non_increasing_across_ncd(default_portfolio):
    counts = claim_counts(default_portfolio)
    means = []
    for lvl in NCD_LEVELS:
        c = [counts[ph.id] for ph in default_portfolio.policyholders if ph.ncd_level == lvl]
        means.append(np.mean(c))
    assert all(b <= a for a, b in zip(means, means[1:])), means


def test_aggregate_losses_decrease_with_ncd(default_portfolio):
    # mean aggregate loss per policyholder, computed straight from the events
    agg = {ph.id: 0.0 for ph in default_portfolio.policyholders}
    for ev in default_portfolio.events:
        agg[ev.policyholder_id] += ev.total
    means = [np.mean([agg[ph.id] for ph in default_portfolio.policyholders
                      if ph.ncd_level == lvl]) for lvl in NCD_LEVELS]
    assert all(b < a for a, b in zip(means, means[1:])), means


def test_event_level_means_reported(default_portfolio):
    means = ncd_sample_means(default_portfolio, ResponseKind.SUM_BY_EVENT)
    assert len(means) == 6 and all(m > 0 for m in means)


def test_default_cte99_ordering(default_portfolio):
    cte = {t: cte_empirical(losses_by_type(default_portfolio, t), 0.99) for t in LOSS_TYPES}
    assert cte[TPI] > cte[TPP] > cte[OD]
