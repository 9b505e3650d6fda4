"""Seeded synthetic motor portfolio generator.

All randomness flows through one ``numpy.random.Generator`` backed by PCG64
(O'Neill's permuted congruential generator, 128-bit state), seeded from the
config's 64-bit seed. Claim counts follow a gamma-Poisson mixture, i.e. a
negative binomial with mean ``mu`` and dispersion ``r``.

The shipped calibration is synthetic. It only encodes qualitative shapes:
claim frequency and severity fall with NCD level, third-party injury is the
heaviest-tailed coverage and own damage the lightest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    LOSS_TYPES,
    NCD_LEVELS,
    ClaimEvent,
    Gender,
    LossType,
    PolicyHolder,
    Portfolio,
)

FAMILIES = ("lognormal", "gamma", "pareto")
VEHICLE_TYPES = ("hatchback", "sedan", "suv", "bakkie", "minibus")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SeveritySpec:
    """Severity family and its two parameters.

    lognormal: (mu, sigma) of log-loss; gamma: (shape, scale);
    pareto: (x_m, alpha).
    """

    family: str
    params: tuple[float, float]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown severity family {self.family!r}")
        if len(self.params) != 2 or not all(math.isfinite(p) for p in self.params):
            raise ConfigError(f"{self.family}: need two finite parameters")
        a, b = self.params
        if self.family == "lognormal":
            if b <= 0:
                raise ConfigError("lognormal sigma must be > 0")
        elif a <= 0 or b <= 0:
            raise ConfigError(f"{self.family} parameters must be > 0")

    def draw(self, rng, size):
        a, b = self.params
        if self.family == "lognormal":
            return rng.lognormal(a, b, size)
        if self.family == "gamma":
            return rng.gamma(a, b, size)
        # numpy's pareto is Lomax; shift to classical Pareto(x_m, alpha)
        return a * (1.0 + rng.pareto(b, size))


@dataclass(frozen=True)
class GenConfig:
    n_policyholders: int = 22000
    seed: int = 12345
    ncd_mix: tuple[float, ...] = (0.15, 0.15, 0.15, 0.15, 0.15, 0.25)
    freq_base_mean: float = 0.3
    freq_ncd_slope: float = -0.12
    dispersion_r: float = 1.5
    severity_params: dict = field(default_factory=lambda: {
        LossType.THIRD_PARTY_INJURY: SeveritySpec("lognormal", (6.0, 1.6)),
        LossType.OWN_DAMAGE: SeveritySpec("lognormal", (5.0, 0.5)),
        LossType.THIRD_PARTY_PROPERTY: SeveritySpec("lognormal", (6.2, 0.7)),
    })
    type_inclusion_probs: dict = field(default_factory=lambda: {
        LossType.THIRD_PARTY_INJURY: 0.7,
        LossType.OWN_DAMAGE: 0.3,
        LossType.THIRD_PARTY_PROPERTY: 0.5,
    })
    # Multiplies every loss by exp(slope * ncd/10); 0 gives NCD-free severities.
    severity_ncd_slope: float = -0.1

    def __post_init__(self):
        if not isinstance(self.n_policyholders, (int, np.integer)) or self.n_policyholders <= 0:
            raise ConfigError("n_policyholders must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        mix = tuple(float(p) for p in self.ncd_mix)
        if len(mix) != len(NCD_LEVELS):
            raise ConfigError(f"ncd_mix needs {len(NCD_LEVELS)} entries")
        if any(not 0.0 <= p <= 1.0 for p in mix) or abs(math.fsum(mix) - 1.0) > 1e-12:
            raise ConfigError("ncd_mix must be a probability vector")
        object.__setattr__(self, "ncd_mix", mix)
        if not (self.freq_base_mean > 0 and math.isfinite(self.freq_base_mean)):
            raise ConfigError("freq_base_mean must be > 0")
        if not math.isfinite(self.freq_ncd_slope) or not math.isfinite(self.severity_ncd_slope):
            raise ConfigError("slopes must be finite")
        if not (self.dispersion_r > 0 and math.isfinite(self.dispersion_r)):
            raise ConfigError("dispersion_r must be > 0")
        if set(self.severity_params) != set(LOSS_TYPES):
            raise ConfigError("severity_params must cover every loss type")
        for spec in self.severity_params.values():
            if not isinstance(spec, SeveritySpec):
                raise ConfigError("severity_params values must be SeveritySpec")
        if set(self.type_inclusion_probs) != set(LOSS_TYPES):
            raise ConfigError("type_inclusion_probs must cover every loss type")
        probs = [self.type_inclusion_probs[t] for t in LOSS_TYPES]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ConfigError("type inclusion probabilities must lie in [0, 1]")
        if not any(p > 0 for p in probs):
            raise ConfigError("at least one loss type needs positive inclusion probability")

    def claim_mean(self, ncd_level):
        return math.exp(math.log(self.freq_base_mean) + self.freq_ncd_slope * ncd_level / 10)

    def to_dict(self):
        return {
            "n_policyholders": int(self.n_policyholders),
            "seed": int(self.seed),
            "ncd_mix": list(self.ncd_mix),
            "freq_base_mean": self.freq_base_mean,
            "freq_ncd_slope": self.freq_ncd_slope,
            "dispersion_r": self.dispersion_r,
            "severity_params": {
                t.value: {"family": s.family, "params": list(s.params)}
                for t, s in ((t, self.severity_params[t]) for t in LOSS_TYPES)
            },
            "type_inclusion_probs": {t.value: self.type_inclusion_probs[t] for t in LOSS_TYPES},
            "severity_ncd_slope": self.severity_ncd_slope,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["ncd_mix"] = tuple(d["ncd_mix"])
        d["severity_params"] = {
            LossType(k): SeveritySpec(v["family"], tuple(v["params"]))
            for k, v in d["severity_params"].items()
        }
        d["type_inclusion_probs"] = {LossType(k): v for k, v in d["type_inclusion_probs"].items()}
        return cls(**d)


def default_config(**overrides) -> GenConfig:
    """Shipped synthetic calibration, optionally with fields replaced."""
    cfg = GenConfig()
    return replace(cfg, **overrides) if overrides else cfg


def sample_negbin(rng, r, mu, size):
    """Negative binomial counts with mean ``mu`` and dispersion ``r`` via gamma-Poisson."""
    lam = rng.gamma(r, np.asarray(mu, dtype=float) / r, size)
    return rng.poisson(lam)


def _draw_type_sets(rng, n, probs):
    inc = rng.random((n, len(probs))) < probs
    empty = ~inc.any(axis=1)
    while empty.any():
        k = int(empty.sum())
        inc[empty] = rng.random((k, len(probs))) < probs
        empty = ~inc.any(axis=1)
    return inc


def generate_portfolio(cfg: GenConfig) -> Portfolio:
    rng = np.random.Generator(np.random.PCG64(int(cfg.seed)))
    n = int(cfg.n_policyholders)
    levels = np.asarray(NCD_LEVELS)

    ncd = levels[rng.choice(len(levels), size=n, p=np.asarray(cfg.ncd_mix))]
    age = rng.integers(18, 81, size=n)
    experience = np.floor(rng.random(n) * (age - 16 + 1)).astype(int)
    gender_idx = rng.choice(3, size=n, p=[0.55, 0.43, 0.02])
    vtype = rng.integers(0, len(VEHICLE_TYPES), size=n)
    vage = rng.integers(0, 21, size=n)

    mu = cfg.freq_base_mean * np.exp(cfg.freq_ncd_slope * ncd / 10.0)
    counts = sample_negbin(rng, cfg.dispersion_r, mu, n)

    owner = np.repeat(np.arange(n), counts)
    n_events = owner.size
    probs = np.array([cfg.type_inclusion_probs[t] for t in LOSS_TYPES])
    inc = _draw_type_sets(rng, n_events, probs)
    scale = np.exp(cfg.severity_ncd_slope * ncd[owner] / 10.0)
    amounts = np.zeros((n_events, len(LOSS_TYPES)))
    for j, t in enumerate(LOSS_TYPES):
        amounts[:, j] = cfg.severity_params[t].draw(rng, n_events) * scale
    amounts = np.round(amounts, 2)

    genders = list(Gender)
    width = max(6, len(str(n)))
    holders = [
        PolicyHolder(f"P{i:0{width}d}", int(age[i]), genders[gender_idx[i]],
                     VEHICLE_TYPES[vtype[i]], int(vage[i]), int(experience[i]), int(ncd[i]))
        for i in range(n)
    ]
    ewidth = max(7, len(str(n_events)))
    events = []
    for k in range(n_events):
        losses = tuple((t, float(amounts[k, j]))
                       for j, t in enumerate(LOSS_TYPES) if inc[k, j])
        events.append(ClaimEvent(f"E{k:0{ewidth}d}", holders[owner[k]].id, losses))
    return Portfolio(tuple(holders), tuple(events))


def claim_counts(portfolio: Portfolio) -> dict:
    """Claim count per policyholder id (zeros included)."""
    out = {ph.id: 0 for ph in portfolio.policyholders}
    for ev in portfolio.events:
        out[ev.policyholder_id] += 1
    return out
