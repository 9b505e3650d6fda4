"""Quota-share reinsurance on loss samples.

A quota is the fraction of every loss the ceding insurer keeps; the
reinsurer pays the rest.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EmpiricalSample
from .risk import cte_empirical, var_empirical

FIG2_QUOTAS = (0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class QuotaShare:
    quota: float

    def __post_init__(self):
        if not 0.0 < self.quota <= 1.0:
            raise ValueError(f"quota must lie in (0, 1], got {self.quota}")


def _q(q):
    return q if isinstance(q, QuotaShare) else QuotaShare(float(q))


def retained_losses(sample: EmpiricalSample, q) -> EmpiricalSample:
    q = _q(q)
    # multiplying by a positive constant keeps the sort order
    return EmpiricalSample._from_sorted(sample.values * q.quota)


def ceded_losses(sample: EmpiricalSample, q) -> EmpiricalSample:
    q = _q(q)
    return EmpiricalSample._from_sorted(sample.values * (1.0 - q.quota))


def retained_moments(mean, variance, q):
    if variance < 0:
        raise ValueError("variance must be >= 0")
    q = _q(q).quota
    return q * mean, q * q * variance


@dataclass(frozen=True)
class QuotaSummary:
    quota: float
    mean: float
    variance: float
    var95: float
    cte95: float


def quota_sweep(sample: EmpiricalSample, quotas=FIG2_QUOTAS):
    """Retained sample and summary statistics for each quota, ascending."""
    if not len(quotas):
        raise ValueError("no quotas given")
    shares = sorted({_q(q).quota for q in quotas})
    retained = {}
    rows = []
    for q in shares:
        r = retained_losses(sample, q)
        retained[q] = r
        rows.append(QuotaSummary(q, r.mean(), r.variance(), var_empirical(r, 0.95),
                                 cte_empirical(r, 0.95)))
    return retained, rows


def summary_csv(rows):
    lines = ["quota,mean,variance,var95,cte95"]
    for s in rows:
        lines.append(",".join(repr(float(v)) for v in
                              (s.quota, s.mean, s.variance, s.var95, s.cte95)))
    return "\n".join(lines) + "\n"


def skewness(x):
    x = np.asarray(getattr(x, "values", x), dtype=float)
    d = x - x.mean()
    return float(np.mean(d ** 3) / np.mean(d ** 2) ** 1.5)
