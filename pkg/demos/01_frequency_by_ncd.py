# %% [markdown]
# Predicted mean loss by No-Claims-Discount level
#
# Fit a negative binomial regression (log link, NCD/10 as the only covariate)
# to three responses and print the predicted-mean grid plus the change
# between adjacent NCD levels.

# %%
import numpy as np

from qsrisk import ResponseKind, default_config, generate_portfolio
from qsrisk.frequency import fit_ncd_regression, mean_change_series, ncd_sample_means, predicted_mean_grid

portfolio = generate_portfolio(default_config())
print(f"{len(portfolio.policyholders)} policyholders, {len(portfolio.events)} claim events")

# %%
models = [fit_ncd_regression(portfolio, kind) for kind in ResponseKind]
for m in models:
    print(f"{m.response_kind.label:22s} intercept={m.intercept:.3f} slope={m.slope:.4f} r={m.r:.3f}")

grid = predicted_mean_grid(models)
print()
print(grid.to_csv())

# %% [markdown]
# Raw per-level means, for comparison with the smooth log-linear fit.

# %%
for kind in ResponseKind:
    means = ncd_sample_means(portfolio, kind)
    print(f"{kind.label:22s}", np.round(means, 1))

# %% [markdown]
# Equal 10-point steps in NCD give unequal changes in the predicted mean.

# %%
for kind, diffs in mean_change_series(grid).items():
    print(f"{kind.label:22s}", np.round(diffs, 2))
