"""Negative binomial frequency models with NCD level as the single covariate.

The NB is parameterized by dispersion ``r`` and mean ``mu``::

    P(k) = C(k + r - 1, k) (r / (r + mu))**r (mu / (r + mu))**k

so that ``Var = mu + mu**2 / r``.
"""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, gammaln, polygamma

from .core import LOSS_TYPES, NCD_LEVELS, Portfolio


class DegenerateSampleError(ValueError):
    pass


class UnderdispersedError(ValueError):
    """Sample variance does not exceed the mean, so the MLE of r is infinite.

    Callers should fall back to the Poisson limit.
    """


class ConvergenceError(RuntimeError):
    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ResponseKind(enum.Enum):
    INDIVIDUAL_LOSS = "indl"
    SUM_BY_TYPE = "type"
    SUM_BY_EVENT = "event"

    @property
    def label(self):
        return {
            ResponseKind.INDIVIDUAL_LOSS: "Indl. Loss",
            ResponseKind.SUM_BY_TYPE: "Sum Losses-Type",
            ResponseKind.SUM_BY_EVENT: "Sum Losses-Sp. Event",
        }[self]


@dataclass(frozen=True)
class NegBinParams:
    r: float
    mu: float

    def __post_init__(self):
        if not (self.r > 0 and self.mu > 0):
            raise ValueError("NegBinParams requires r > 0 and mu > 0")

    @property
    def variance(self):
        return self.mu + self.mu ** 2 / self.r


def negbin_logpmf(k, p: NegBinParams):
    k = np.asarray(k, dtype=float)
    r, mu = p.r, p.mu
    # log(r/(r+mu)) and log(mu/(r+mu)) via log1p keep precision at the extremes
    return (gammaln(k + r) - gammaln(r) - gammaln(k + 1.0)
            - r * np.log1p(mu / r) - k * np.log1p(r / mu))


def negbin_pmf(k, p: NegBinParams):
    """Probability of ``k`` counts, evaluated in log space."""
    out = np.exp(negbin_logpmf(k, p))
    return float(out) if np.ndim(out) == 0 else out


def nb_loglik(counts, r, mu):
    """Log-likelihood of iid NB(r, mu) counts."""
    return float(np.sum(negbin_logpmf(counts, NegBinParams(r, mu))))


def nb_loglik_grad(counts, r, mu):
    """Analytic gradient of :func:`nb_loglik` with respect to (r, mu)."""
    y = np.asarray(counts, dtype=float)
    n = y.size
    d_r = (np.sum(digamma(y + r)) - n * digamma(r)
           + n * math.log(r / (r + mu)) + np.sum(mu - y) / (r + mu))
    d_mu = np.sum(y / mu - (y + r) / (r + mu))
    return np.array([d_r, d_mu])


def _profile_terms(values, freq, r, mu, n):
    """Profile score in r at fixed mu, and its derivative."""
    score = (np.dot(freq, digamma(values + r)) - n * digamma(r)
             + n * (math.log(r) - math.log(r + mu)))
    dscore = (np.dot(freq, polygamma(1, values + r)) - n * polygamma(1, r)
              + n * (1.0 / r - 1.0 / (r + mu)))
    return score, dscore


def profile_score(counts, r):
    """Score for r with mu fixed at the sample mean. Zero at the MLE."""
    y = np.asarray(counts)
    values, freq = np.unique(y, return_counts=True)
    return float(_profile_terms(values.astype(float), freq.astype(float), r,
                                float(y.mean()), y.size)[0])


def fit_negbin(counts, max_iter=100, tol=1e-10) -> NegBinParams:
    """Maximum-likelihood NB fit.

    ``mu`` is the sample mean. ``r`` comes from Newton iterations on the
    profile likelihood in ``log r``, started at the method-of-moments value.
    """
    y = np.asarray(counts)
    if y.ndim != 1 or y.size < 2:
        raise DegenerateSampleError("need at least two counts")
    if np.any(y < 0) or not np.all(np.equal(np.mod(y, 1), 0)):
        raise ValueError("counts must be non-negative integers")
    if np.all(y == y[0]):
        raise DegenerateSampleError("all counts equal; r is not identifiable")
    n = y.size
    mu = float(np.mean(y))
    var = float(np.var(y))
    if var <= mu:
        raise UnderdispersedError(
            f"sample variance {var:.6g} <= mean {mu:.6g}: no finite r estimate")

    values, freq = np.unique(y, return_counts=True)
    values = values.astype(float)
    freq = freq.astype(float)

    s = math.log(mu * mu / (var - mu))
    for _ in range(max_iter):
        r = math.exp(s)
        g, h = _profile_terms(values, freq, r, mu, n)
        # derivatives in s = log r
        gs = r * g
        hs = r * r * h + r * g
        step = -gs / hs if hs < 0 else math.copysign(1.0, gs)
        step = max(min(step, 5.0), -5.0)
        s_new = s + step
        if abs(step) < tol:
            s = s_new
            break
        s = s_new
    else:
        raise ConvergenceError("profile Newton did not converge",
                               last_iterate=NegBinParams(math.exp(s), mu))
    return NegBinParams(math.exp(s), mu)


# --- NCD regression ---------------------------------------------------------

@dataclass(frozen=True)
class NcdRegressionModel:
    intercept: float
    slope: float
    r: float
    response_kind: ResponseKind
    n: int = 0
    loglik: float = float("nan")
    iterations: int = 0

    def predict(self, ncd_level):
        return math.exp(self.intercept + self.slope * ncd_level / 10.0)


def ncd_observations(portfolio: Portfolio, kind: ResponseKind):
    """Response amounts and NCD levels for one response kind.

    ``INDIVIDUAL_LOSS`` gives one row per (event, loss type) amount.
    ``SUM_BY_TYPE`` gives one row per (policyholder, loss type) pair with at
    least one loss, summing that type over the policyholder's events.
    ``SUM_BY_EVENT`` gives one row per event total.
    """
    ys, ds = [], []
    events = portfolio.sorted_events
    if kind is ResponseKind.INDIVIDUAL_LOSS:
        for ev in events:
            d = portfolio.ncd_of(ev)
            for _, a in ev.losses:
                ys.append(a)
                ds.append(d)
    elif kind is ResponseKind.SUM_BY_EVENT:
        for ev in events:
            ys.append(ev.total)
            ds.append(portfolio.ncd_of(ev))
    else:
        sums = defaultdict(float)
        for ev in events:
            for t, a in ev.losses:
                sums[(ev.policyholder_id, t)] += a
        order = {t: i for i, t in enumerate(LOSS_TYPES)}
        for (pid, t) in sorted(sums, key=lambda k: (k[0], order[k[1]])):
            ys.append(sums[(pid, t)])
            ds.append(portfolio.by_id[pid].ncd_level)
    return np.asarray(ys, dtype=float), np.asarray(ds, dtype=float)


def _nb_reg_loglik(beta0, beta1, r, y, x):
    eta = beta0 + beta1 * x
    mu = np.exp(eta)
    return float(np.sum(gammaln(y + r) - gammaln(r) - gammaln(y + 1.0)
                        + r * (math.log(r) - np.log(r + mu))
                        + y * (eta - np.log(r + mu))))


def _nb_reg_derivs(theta, y, x):
    b0, b1, s = theta
    r = math.exp(s)
    mu = np.exp(b0 + b1 * x)
    rm = r + mu
    d_eta = r * (y - mu) / rm
    d_r = digamma(y + r) - digamma(r) + math.log(r) - np.log(rm) + (mu - y) / rm
    h_ee = -r * (y + r) * mu / rm ** 2
    h_er = mu * (y - mu) / rm ** 2
    h_rr = (polygamma(1, y + r) - polygamma(1, r) + 1.0 / r - 1.0 / rm
            - (mu - y) / rm ** 2)
    grad = np.array([d_eta.sum(), (d_eta * x).sum(), r * d_r.sum()])
    hess = np.empty((3, 3))
    hess[0, 0] = h_ee.sum()
    hess[0, 1] = hess[1, 0] = (h_ee * x).sum()
    hess[1, 1] = (h_ee * x * x).sum()
    hess[0, 2] = hess[2, 0] = r * h_er.sum()
    hess[1, 2] = hess[2, 1] = r * (h_er * x).sum()
    hess[2, 2] = r * r * h_rr.sum() + r * d_r.sum()
    return grad, hess


def fit_nb_regression(y, ncd, kind=ResponseKind.SUM_BY_EVENT, max_iter=100, tol=1e-10):
    """NB regression ``log E[y] = b0 + b1 * ncd/10`` by damped Newton on (b0, b1, log r)."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(ncd, dtype=float) / 10.0
    if np.unique(x).size < 2:
        raise DegenerateSampleError("need responses at two or more NCD levels")
    if np.any(y < 0):
        raise ValueError("responses must be non-negative")
    m = y.mean()
    if m <= 0:
        raise DegenerateSampleError("all responses are zero")
    v = y.var()
    r0 = m * m / (v - m) if v > m else 1e3
    # least squares on the log of per-level means for the starting slope
    lv = np.unique(x)
    lm = np.array([y[x == u].mean() for u in lv])
    ok = lm > 0
    b1 = np.polyfit(lv[ok], np.log(lm[ok]), 1)[0] if ok.sum() >= 2 else 0.0
    b0 = math.log(m) - b1 * x.mean()
    theta = np.array([b0, b1, math.log(r0)])

    def ll(th):
        return _nb_reg_loglik(th[0], th[1], math.exp(th[2]), y, x)

    cur = ll(theta)
    for it in range(1, max_iter + 1):
        grad, hess = _nb_reg_derivs(theta, y, x)
        try:
            step = -np.linalg.solve(hess, grad)
            if np.dot(step, grad) <= 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = grad / (np.abs(np.diag(hess)).max() + 1.0)
        t = 1.0
        while t > 1e-12:
            cand = theta + t * step
            new = ll(cand)
            if np.isfinite(new) and new >= cur - 1e-12 * abs(cur):
                break
            t *= 0.5
        else:
            # no ascent possible at working precision
            break
        theta, cur = cand, new
        if np.max(np.abs(t * step)) < tol:
            break
    else:
        model = NcdRegressionModel(theta[0], theta[1], math.exp(theta[2]), kind,
                                   y.size, cur, max_iter)
        raise ConvergenceError("NB regression did not converge", last_iterate=model)
    return NcdRegressionModel(float(theta[0]), float(theta[1]), float(math.exp(theta[2])),
                              kind, int(y.size), cur, it)


def fit_ncd_regression(portfolio: Portfolio, kind: ResponseKind) -> NcdRegressionModel:
    """Fit the NB log-link regression of one response kind on NCD level.

    Amounts are rounded to whole currency units before fitting, since the
    NB is a count model.
    """
    y, d = ncd_observations(portfolio, kind)
    if y.size == 0 or np.unique(d).size < 2:
        raise DegenerateSampleError("need events in at least two distinct NCD levels")
    return fit_nb_regression(np.rint(y), d, kind)


@dataclass(frozen=True)
class PredictedMeanGrid:
    rows: dict  # ResponseKind -> tuple of 6 means, NCD 0..50
    levels: tuple = NCD_LEVELS

    def to_csv(self):
        lines = ["response_kind," + ",".join(f"ncd_{d}" for d in self.levels)]
        for kind, vals in self.rows.items():
            lines.append(kind.value + "," + ",".join(repr(float(v)) for v in vals))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text):
        lines = [ln for ln in text.strip().splitlines() if ln]
        header = lines[0].split(",")
        levels = tuple(int(h.removeprefix("ncd_")) for h in header[1:])
        rows = {}
        for ln in lines[1:]:
            parts = ln.split(",")
            rows[ResponseKind(parts[0])] = tuple(float(v) for v in parts[1:])
        return cls(rows, levels)


def predicted_mean_grid(models) -> PredictedMeanGrid:
    rows = {}
    for m in models:
        rows[m.response_kind] = tuple(m.predict(d) for d in NCD_LEVELS)
    order = list(ResponseKind)
    return PredictedMeanGrid({k: rows[k] for k in order if k in rows})


def mean_change_series(grid: PredictedMeanGrid) -> dict:
    """Successive differences mean(d + 10) - mean(d) for each row."""
    return {k: tuple(float(b - a) for a, b in zip(v[:-1], v[1:]))
            for k, v in grid.rows.items()}


def ncd_sample_means(portfolio: Portfolio, kind: ResponseKind) -> tuple:
    """Raw per-level means of the response, NaN for empty levels."""
    y, d = ncd_observations(portfolio, kind)
    return tuple(float(y[d == lvl].mean()) if np.any(d == lvl) else float("nan")
                 for lvl in NCD_LEVELS)
