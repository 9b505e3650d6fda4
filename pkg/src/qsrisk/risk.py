"""Empirical VaR / CTE and the bundled versus unbundled risk report.

Both estimators use the same tail count ``m = max(1, ceil((1 - p) * n))``:
VaR is the m-th largest loss, CTE the mean of the m largest. With that
convention CTE is subadditive on aligned samples, so the bundled CTE can
never exceed the sum of the coverage CTEs.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import LOSS_TYPES, EmpiricalSample, Portfolio, aligned_losses, event_totals, losses_by_type

DEFAULT_PERCENTILES = (0.90, 0.95, 0.99)
SUM_LABEL = "Sum of Unbundled Coverage's"
SUM_INDEPENDENT_LABEL = "Sum of Unbundled Coverage's (independent)"
BUNDLED_LABEL = "Bundled (Comprehensive) Coverage"
EMPTY_MARKER = "n=0"


class EmptySampleError(ValueError):
    pass


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise ValueError(f"percentile must lie in (0, 1), got {p}")


def tail_count(n, p):
    """Number of upper order statistics in the p-tail of n losses."""
    _check_p(p)
    # rounding to 9 places absorbs binary noise such as (1 - 0.99) * 100 = 1.0000000000000009
    return max(1, math.ceil(round((1.0 - p) * n, 9)))


def _sorted_values(sample):
    if isinstance(sample, EmpiricalSample):
        return sample.values
    return np.sort(np.asarray(sample, dtype=float))


def var_empirical(sample, p) -> float:
    x = _sorted_values(sample)
    n = x.size
    if n == 0:
        raise EmptySampleError("VaR of an empty sample")
    return float(x[n - tail_count(n, p)])


def _tail_sum(x, p):
    n = x.size
    m = tail_count(n, p)
    return math.fsum(x[n - m:].tolist()), m


def cte_empirical(sample, p) -> float:
    x = _sorted_values(sample)
    if x.size == 0:
        raise EmptySampleError("CTE of an empty sample")
    total, m = _tail_sum(x, p)
    return total / m


@dataclass(frozen=True)
class RiskRow:
    label: str
    var: dict  # p -> float, or None when the sample is empty
    cte: dict
    n: int | None
    # p -> (sum of the m largest losses, m); lets sums of CTEs round only once
    tail: dict | None = field(default=None, repr=False, compare=False)

    @property
    def empty(self):
        return self.n == 0

    def cells(self, percentiles):
        return ([self.var[p] for p in percentiles], [self.cte[p] for p in percentiles])


def risk_row(label, sample, percentiles):
    x = _sorted_values(sample)
    if x.size == 0:
        return RiskRow(label, {p: None for p in percentiles}, {p: None for p in percentiles}, 0)
    tail = {p: _tail_sum(x, p) for p in percentiles}
    return RiskRow(label, {p: var_empirical(x, p) for p in percentiles},
                   {p: s / m for p, (s, m) in tail.items()}, int(x.size), tail)


def _sum_rows(label, rows, percentiles):
    live = [r for r in rows if not r.empty]
    var = {p: math.fsum(r.var[p] for r in live) for p in percentiles}
    cte = {}
    for p in percentiles:
        if all(r.tail for r in live):
            exact = sum((Fraction(r.tail[p][0]) / r.tail[p][1] for r in live), Fraction(0))
            cte[p] = float(exact)
        else:
            cte[p] = math.fsum(r.cte[p] for r in live)
    return RiskRow(label, var, cte, None)


@dataclass(frozen=True)
class RiskReport:
    percentiles: tuple
    coverages: tuple  # three RiskRow, in coverage order
    sum_arithmetic: RiskRow
    bundled: RiskRow
    sum_independent: RiskRow | None = None
    mc_draws: int = 0
    mc_seed: int | None = None
    workers: int = 1

    @property
    def rows(self):
        """Report layout: three coverages, arithmetic sum, bundled."""
        return (*self.coverages, self.sum_arithmetic, self.bundled)

    def row(self, label):
        for r in (*self.rows, self.sum_independent):
            if r is not None and r.label == label:
                return r
        raise KeyError(label)

    def var_subadditivity(self):
        """Whether bundled VaR stayed below the arithmetic sum, per percentile."""
        return {p: self.bundled.var[p] <= self.sum_arithmetic.var[p] for p in self.percentiles}

    def to_csv(self):
        ps = self.percentiles
        tags = [_ptag(p) for p in ps]
        lines = ["coverage," + ",".join(f"var_{t}" for t in tags) + ","
                 + ",".join(f"cte_{t}" for t in tags) + ",n"]
        for r in self.rows:
            if r.empty:
                cells = [EMPTY_MARKER] * (2 * len(ps))
            else:
                v, c = r.cells(ps)
                cells = [repr(float(x)) for x in v + c]
            n = "" if r.n is None else str(r.n)
            lines.append(",".join([_csv_field(r.label)] + cells + [n]))
        return "\n".join(lines) + "\n"

    def to_dict(self):
        def row(r):
            if r is None:
                return None
            return {
                "label": r.label,
                "n": r.n,
                "var": {_ptag(p): r.var[p] for p in self.percentiles},
                "cte": {_ptag(p): r.cte[p] for p in self.percentiles},
            }
        return {
            "percentiles": list(self.percentiles),
            "coverages": [row(r) for r in self.coverages],
            "sum_of_unbundled": {
                "arithmetic": row(self.sum_arithmetic),
                "independent_resampling": row(self.sum_independent),
            },
            "bundled": row(self.bundled),
            "economic_capital_gap": {
                _ptag(p): economic_capital_gap(self, p) for p in self.percentiles
            },
            "var_subadditive": {_ptag(p): v for p, v in self.var_subadditivity().items()},
            "monte_carlo": {"draws": self.mc_draws, "seed": self.mc_seed,
                            "workers": self.workers},
        }


def _ptag(p):
    return f"{round(p * 100, 6):g}"


def _csv_field(s):
    return f'"{s}"' if "," in s or '"' in s else s


def independent_sum_sample(columns, draws, seed, workers=1):
    """Monte Carlo sample of the per-event sum with coverages resampled independently.

    ``columns`` is a list of per-event arrays (zero-filled, aligned). Draws are
    split into ``workers`` shards whose generators are spawned from ``seed``,
    so the result is reproducible for a fixed worker count.
    """
    workers = max(1, int(workers))
    sizes = [draws // workers + (1 if i < draws % workers else 0) for i in range(workers)]
    children = np.random.SeedSequence(seed).spawn(workers)
    cols = [np.asarray(c, dtype=float) for c in columns]

    def shard(i):
        rng = np.random.Generator(np.random.PCG64(children[i]))
        out = np.zeros(sizes[i])
        for c in cols:
            out += c[rng.integers(0, c.size, sizes[i])]
        return out

    if workers == 1:
        parts = [shard(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(shard, range(workers)))
    return np.concatenate(parts)


def default_workers():
    env = os.environ.get("QSR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def risk_table(portfolio: Portfolio, percentiles=DEFAULT_PERCENTILES, *,
               mc_draws=1_000_000, mc_seed=0, workers=None) -> RiskReport:
    if not portfolio.events:
        raise EmptySampleError("empty portfolio: no claim events")
    percentiles = tuple(float(p) for p in percentiles)
    for p in percentiles:
        _check_p(p)
    workers = default_workers() if workers is None else workers
    coverages = tuple(risk_row(t.label, losses_by_type(portfolio, t), percentiles)
                      for t in LOSS_TYPES)
    bundled = risk_row(BUNDLED_LABEL, event_totals(portfolio), percentiles)
    arith = _sum_rows(SUM_LABEL, coverages, percentiles)
    indep = None
    if mc_draws:
        aligned = aligned_losses(portfolio)
        sample = independent_sum_sample([aligned[:, j] for j in range(aligned.shape[1])],
                                        mc_draws, mc_seed, workers)
        indep = risk_row(SUM_INDEPENDENT_LABEL, sample, percentiles)
        indep = RiskRow(indep.label, indep.var, indep.cte, None, indep.tail)
    return RiskReport(percentiles, coverages, arith, bundled, indep,
                      mc_draws, mc_seed if mc_draws else None, workers)


def economic_capital_gap(report: RiskReport, p) -> float:
    """Capital released by bundling: arithmetic-sum CTE minus bundled CTE."""
    s, b = report.sum_arithmetic, report.bundled
    if s is None or b is None:
        raise KeyError("report lacks the sum or bundled row")
    if p not in s.cte or p not in b.cte:
        raise KeyError(f"percentile {p} not in report")
    if b.cte[p] is None:
        raise EmptySampleError("bundled row is empty")
    return s.cte[p] - b.cte[p]
