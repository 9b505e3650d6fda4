# %% [markdown]
# Loss severity by coverage
#
# Fit lognormal, gamma and Pareto to each coverage, keep the minimum-AIC
# family, and compare how much probability each coverage puts on losses up
# to 5000.

# %%
from qsrisk import LossType, best_fit, default_config, fit_severity, generate_portfolio, losses_by_type
from qsrisk.severity import FAMILY_ORDER, tail_loss_probability

portfolio = generate_portfolio(default_config())
n_events = len(portfolio.events)

for t in LossType:
    sample = losses_by_type(portfolio, t)
    aics = {f.value: round(fit_severity(sample, f).aic, 1) for f in FAMILY_ORDER}
    fit = best_fit(sample)
    share = sample.n / n_events
    p5000 = tail_loss_probability(fit, 5000.0)
    print(f"{t.label:22s} n={sample.n:5d} best={fit.family.value:9s} {fit.param_dict()}")
    print(f"{'':22s} AIC {aics}")
    print(f"{'':22s} P(loss occurs and <= 5000) = {share * p5000:.3f}")
