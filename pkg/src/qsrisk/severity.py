"""Per-coverage severity fitting (lognormal, gamma, Pareto) and Gaussian KDE."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, gammainc, gammaln, ndtr, polygamma

from .core import EmpiricalSample


class SeverityFitError(ValueError):
    pass


class Family(enum.Enum):
    LOGNORMAL = "lognormal"
    GAMMA = "gamma"
    PARETO = "pareto"


# Tie-break order for AIC selection.
FAMILY_ORDER = (Family.LOGNORMAL, Family.GAMMA, Family.PARETO)

PARAM_NAMES = {
    Family.LOGNORMAL: ("mu", "sigma"),
    Family.GAMMA: ("shape", "scale"),
    Family.PARETO: ("x_m", "alpha"),
}


@dataclass(frozen=True)
class SeverityFit:
    family: Family
    params: tuple[float, float]
    loglik: float
    n: int
    zeros_excluded: int = 0

    n_params = 2

    @property
    def aic(self):
        return 2 * self.n_params - 2 * self.loglik

    def param_dict(self):
        return dict(zip(PARAM_NAMES[self.family], self.params))

    def to_dict(self):
        return {
            "family": self.family.value,
            "params": self.param_dict(),
            "loglik": self.loglik,
            "aic": self.aic,
            "n": self.n,
            "zeros_excluded": self.zeros_excluded,
        }

    def cdf(self, x):
        return severity_cdf(self.family, self.params, x)


def loglik(family, params, x):
    x = np.asarray(x, dtype=float)
    a, b = params
    if family is Family.LOGNORMAL:
        z = (np.log(x) - a) / b
        return float(np.sum(-np.log(x) - math.log(b) - 0.5 * math.log(2 * math.pi) - 0.5 * z * z))
    if family is Family.GAMMA:
        return float(np.sum((a - 1) * np.log(x) - x / b - gammaln(a) - a * math.log(b)))
    if np.any(x < a):
        return -math.inf
    return float(x.size * (math.log(b) + b * math.log(a)) - (b + 1) * np.sum(np.log(x)))


def loglik_grad(family, params, x):
    """Gradient of the log-likelihood in the free parameters.

    For Pareto only ``alpha`` is free; ``x_m`` sits on the boundary of the
    support, so its partial derivative is returned as 0.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    a, b = params
    if family is Family.LOGNORMAL:
        z = np.log(x) - a
        return np.array([z.sum() / b ** 2, -n / b + np.sum(z * z) / b ** 3])
    if family is Family.GAMMA:
        return np.array([np.sum(np.log(x)) - n * digamma(a) - n * math.log(b),
                         np.sum(x) / b ** 2 - n * a / b])
    return np.array([0.0, n / b + n * math.log(a) - np.sum(np.log(x))])


def severity_cdf(family, params, x):
    x = np.asarray(x, dtype=float)
    a, b = params
    with np.errstate(divide="ignore"):
        if family is Family.LOGNORMAL:
            out = np.where(x > 0, ndtr((np.log(np.maximum(x, 1e-300)) - a) / b), 0.0)
        elif family is Family.GAMMA:
            out = gammainc(a, np.maximum(x, 0.0) / b)
        else:
            out = np.where(x >= a, 1.0 - (a / np.maximum(x, a)) ** b, 0.0)
    return float(out) if out.ndim == 0 else out


def _positive(sample):
    vals = sample.values if isinstance(sample, EmpiricalSample) else np.sort(np.asarray(sample, float))
    pos = vals[vals > 0]
    return pos, int(vals.size - pos.size)


def _gamma_shape(log_mean_ratio, max_iter=100):
    # Solve log(k) - digamma(k) = s with Newton in log k; s > 0 by Jensen.
    s = log_mean_ratio
    k = (3 - s + math.sqrt((s - 3) ** 2 + 24 * s)) / (12 * s)
    for _ in range(max_iter):
        f = math.log(k) - digamma(k) - s
        df = 1.0 / k - polygamma(1, k)
        step = f / (df * k)
        lk = math.log(k) - max(min(step, 2.0), -2.0)
        k_new = math.exp(lk)
        if abs(k_new - k) <= 1e-14 * k:
            return k_new
        k = k_new
    return k


def fit_severity(sample, family) -> SeverityFit:
    """Maximum-likelihood fit of one family to the positive part of ``sample``."""
    family = Family(family)
    x, zeros = _positive(sample)
    n = x.size
    if n < 3:
        raise SeverityFitError(f"need at least 3 positive values, got {n}")
    if x[0] == x[-1]:
        raise SeverityFitError("all values identical; distribution is degenerate")
    logs = np.log(x)
    if family is Family.LOGNORMAL:
        mu = float(np.mean(logs))
        sigma = float(np.sqrt(np.mean((logs - mu) ** 2)))
        if sigma <= 0:
            raise SeverityFitError("zero log-variance; distribution is degenerate")
        params = (mu, sigma)
    elif family is Family.GAMMA:
        m = float(np.mean(x))
        s = math.log(m) - float(np.mean(logs))
        if s <= 0:
            raise SeverityFitError("degenerate sample for gamma fit")
        k = _gamma_shape(s)
        params = (k, m / k)
    else:
        xm = float(x[0])
        denom = float(np.sum(logs - math.log(xm)))
        if denom <= 0:
            raise SeverityFitError("degenerate sample for Pareto fit")
        params = (xm, n / denom)
    ll = loglik(family, params, x)
    if not math.isfinite(ll):
        raise SeverityFitError(f"non-finite log-likelihood for {family.value}")
    return SeverityFit(family, params, ll, n, zeros)


def best_fit(sample) -> SeverityFit:
    """Minimum-AIC fit over lognormal, gamma and Pareto."""
    x, _ = _positive(sample)
    if x.size < 10:
        raise SeverityFitError(f"best_fit needs at least 10 positive values, got {x.size}")
    fits = []
    for fam in FAMILY_ORDER:
        try:
            fits.append(fit_severity(sample, fam))
        except SeverityFitError:
            continue
    if not fits:
        raise SeverityFitError("all severity fits failed")
    # min() keeps the first of equal keys, which is the family order
    return min(fits, key=lambda f: f.aic)


def tail_loss_probability(fit: SeverityFit, threshold) -> float:
    """P(X <= threshold) under the fitted family."""
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    return float(fit.cdf(threshold))


def silverman_bandwidth(x):
    x = np.asarray(x, dtype=float)
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * x.size ** (-0.2)


def kde_density(sample, grid, bandwidth=None):
    """Gaussian kernel density estimate of ``sample`` evaluated on ``grid``."""
    x = sample.values if isinstance(sample, EmpiricalSample) else np.asarray(sample, float)
    if x.size < 2:
        raise ValueError("KDE needs at least two points")
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise ValueError("zero bandwidth (constant sample)")
    g = np.asarray(grid, dtype=float)
    flat = g.ravel()
    out = np.empty(flat.size)
    norm = 1.0 / (x.size * h * math.sqrt(2 * math.pi))
    chunk = max(1, 4_000_000 // x.size)
    for i in range(0, flat.size, chunk):
        z = (flat[i:i + chunk, None] - x[None, :]) / h
        out[i:i + chunk] = np.exp(-0.5 * z * z).sum(axis=1) * norm
    return out.reshape(g.shape)
