"""Portfolio data model: policyholders, claim events, typed losses.

Also holds CSV ingestion/emission and the two sample extractors used by every
downstream stage (per-coverage losses and per-event totals).
"""
from __future__ import annotations

import csv
import enum
import io
import math
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

NCD_LEVELS = (0, 10, 20, 30, 40, 50)

POLICY_HEADER = ["id", "age", "gender", "vehicle_type", "vehicle_age",
                 "prior_experience", "ncd_level"]
CLAIMS_HEADER = ["event_id", "policyholder_id", "loss_type", "amount"]


class ValidationError(ValueError):
    """Raised when input data violates the portfolio invariants."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LossType(enum.Enum):
    THIRD_PARTY_INJURY = "TPI"
    OWN_DAMAGE = "OD"
    THIRD_PARTY_PROPERTY = "TPP"

    @property
    def label(self):
        return _LABELS[self]

    @classmethod
    def from_code(cls, code):
        try:
            return cls(code.strip().upper())
        except ValueError:
            raise ValidationError(f"unknown loss type code {code!r}") from None


# Declaration order doubles as the canonical loss-type order for summation.
LOSS_TYPES = tuple(LossType)
_ORDER = {t: i for i, t in enumerate(LOSS_TYPES)}
_LABELS = {
    LossType.THIRD_PARTY_INJURY: "Third party injury",
    LossType.OWN_DAMAGE: "Own damage",
    LossType.THIRD_PARTY_PROPERTY: "Third party property",
}


class Gender(enum.Enum):
    MALE = "M"
    FEMALE = "F"
    UNSPECIFIED = "U"


@dataclass(frozen=True)
class PolicyHolder:
    id: str
    age: int
    gender: Gender
    vehicle_type: str
    vehicle_age: int
    prior_experience: int
    ncd_level: int

    def __post_init__(self):
        if not self.id:
            raise ValidationError("empty policyholder id")
        if self.age < 16:
            raise ValidationError(f"policyholder {self.id}: age {self.age} < 16")
        if self.vehicle_age < 0:
            raise ValidationError(f"policyholder {self.id}: negative vehicle_age")
        if self.prior_experience < 0 or self.prior_experience > self.age - 16:
            raise ValidationError(
                f"policyholder {self.id}: prior_experience {self.prior_experience} "
                f"outside [0, age - 16]")
        if self.ncd_level not in NCD_LEVELS:
            raise ValidationError(
                f"policyholder {self.id}: ncd_level {self.ncd_level} not in {NCD_LEVELS}")


@dataclass(frozen=True)
class ClaimEvent:
    """One accident. ``losses`` holds at most one amount per loss type."""

    event_id: str
    policyholder_id: str
    losses: tuple[tuple[LossType, float], ...]

    def __post_init__(self):
        if not self.losses:
            raise ValidationError(f"event {self.event_id}: no losses")
        seen = set()
        for t, amount in self.losses:
            if t in seen:
                raise ValidationError(f"event {self.event_id}: duplicate {t.value} entry")
            seen.add(t)
            if not math.isfinite(amount) or amount < 0:
                raise ValidationError(
                    f"event {self.event_id}: invalid amount {amount!r} for {t.value}")
        canon = tuple(sorted(self.losses, key=lambda e: _ORDER[e[0]]))
        object.__setattr__(self, "losses", canon)

    def amount(self, t):
        for lt, a in self.losses:
            if lt is t:
                return a
        return None

    @property
    def total(self):
        s = 0.0
        for _, a in self.losses:
            s += a
        return s


@dataclass(frozen=True)
class Portfolio:
    policyholders: tuple[PolicyHolder, ...]
    events: tuple[ClaimEvent, ...]

    def __post_init__(self):
        object.__setattr__(self, "policyholders", tuple(self.policyholders))
        object.__setattr__(self, "events", tuple(self.events))
        ids = set()
        for ph in self.policyholders:
            if ph.id in ids:
                raise ValidationError(f"duplicate policyholder id {ph.id!r}")
            ids.add(ph.id)
        eids = set()
        for ev in self.events:
            if ev.event_id in eids:
                raise ValidationError(f"duplicate event id {ev.event_id!r}")
            eids.add(ev.event_id)
            if ev.policyholder_id not in ids:
                raise ValidationError(
                    f"event {ev.event_id} references unknown policyholder "
                    f"{ev.policyholder_id!r}")

    @cached_property
    def by_id(self):
        return {ph.id: ph for ph in self.policyholders}

    @cached_property
    def sorted_events(self):
        return tuple(sorted(self.events, key=lambda e: e.event_id))

    def ncd_of(self, event):
        return self.by_id[event.policyholder_id].ncd_level


class EmpiricalSample:
    """Sorted, read-only multiset of non-negative finite losses."""

    __slots__ = ("_values",)

    def __init__(self, values: Iterable[float] = ()):
        arr = np.array(values, dtype=float).ravel()
        if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0):
            raise ValueError("sample values must be finite and non-negative")
        arr = np.sort(arr, kind="stable")
        arr.flags.writeable = False
        self._values = arr

    @classmethod
    def _from_sorted(cls, arr):
        obj = cls.__new__(cls)
        arr = np.asarray(arr, dtype=float)
        arr.flags.writeable = False
        obj._values = arr
        return obj

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return int(self._values.size)

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self._values.tolist())

    def __eq__(self, other):
        if not isinstance(other, EmpiricalSample):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __repr__(self):
        return f"EmpiricalSample(n={self.n})"

    def total(self) -> float:
        """Correctly rounded sum of the values."""
        return math.fsum(self._values.tolist())

    def mean(self):
        return float(np.mean(self._values))

    def variance(self, ddof=1):
        return float(np.var(self._values, ddof=ddof))


def losses_by_type(portfolio: Portfolio, t: LossType) -> EmpiricalSample:
    """One value per event carrying a loss of type ``t``."""
    vals = [a for ev in portfolio.sorted_events
            if (a := ev.amount(t)) is not None]
    return EmpiricalSample(vals)


def event_totals(portfolio: Portfolio) -> EmpiricalSample:
    """Bundled (comprehensive) loss per event."""
    return EmpiricalSample([ev.total for ev in portfolio.sorted_events])


def aligned_losses(portfolio: Portfolio) -> np.ndarray:
    """Matrix of shape (n_events, 3), rows ordered by event id, zeros for absent types."""
    out = np.zeros((len(portfolio.events), len(LOSS_TYPES)))
    for i, ev in enumerate(portfolio.sorted_events):
        for t, a in ev.losses:
            out[i, _ORDER[t]] = a
    return out


# --- CSV ------------------------------------------------------------------

def _as_text(stream):
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, str):
        return io.StringIO(stream)
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def _reader(stream, header, what):
    reader = csv.reader(_as_text(stream))
    try:
        first = next(reader)
    except StopIteration:
        raise ValidationError(f"{what}: missing header", line=1) from None
    if [h.strip() for h in first] != header:
        raise ValidationError(f"{what}: expected header {','.join(header)}", line=1)
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ValidationError(
                f"{what}: expected {len(header)} fields, got {len(row)}", line=lineno)
        yield lineno, [c.strip() for c in row]


def _int(field, value, lineno):
    try:
        return int(value)
    except ValueError:
        raise ValidationError(f"{field}: not an integer: {value!r}", line=lineno) from None


def ingest_csv(policy_file, claims_file) -> Portfolio:
    """Parse policies.csv and claims.csv (bytes, str or file-like) into a Portfolio.

    Rows sharing ``(event_id, loss_type)`` are summed into a single loss.
    """
    holders = []
    seen = set()
    for lineno, row in _reader(policy_file, POLICY_HEADER, "policies"):
        pid, age, gender, vtype, vage, exp, ncd = row
        if pid in seen:
            raise ValidationError(f"duplicate policyholder id {pid!r}", line=lineno)
        seen.add(pid)
        try:
            g = Gender(gender.upper() or "U")
        except ValueError:
            raise ValidationError(f"unknown gender {gender!r}", line=lineno) from None
        try:
            holders.append(PolicyHolder(
                pid, _int("age", age, lineno), g, vtype, _int("vehicle_age", vage, lineno),
                _int("prior_experience", exp, lineno), _int("ncd_level", ncd, lineno)))
        except ValidationError as e:
            raise ValidationError(str(e), line=lineno) from None

    grouped: "OrderedDict[str, tuple[str, dict]]" = OrderedDict()
    for lineno, row in _reader(claims_file, CLAIMS_HEADER, "claims"):
        eid, pid, code, amount = row
        try:
            t = LossType.from_code(code)
        except ValidationError as e:
            raise ValidationError(str(e), line=lineno) from None
        try:
            x = float(amount)
        except ValueError:
            raise ValidationError(f"amount: not a number: {amount!r}", line=lineno) from None
        if not math.isfinite(x) or x < 0:
            raise ValidationError(f"negative or non-finite amount {amount!r}", line=lineno)
        if pid not in seen:
            raise ValidationError(f"unknown policyholder {pid!r}", line=lineno)
        if eid in grouped:
            owner, amounts = grouped[eid]
            if owner != pid:
                raise ValidationError(
                    f"event {eid!r} assigned to two policyholders", line=lineno)
        else:
            amounts = {}
            grouped[eid] = (pid, amounts)
        amounts[t] = amounts.get(t, 0.0) + x

    events = [ClaimEvent(eid, pid, tuple(amounts.items()))
              for eid, (pid, amounts) in grouped.items()]
    return Portfolio(tuple(holders), tuple(events))


def emit_csv(portfolio: Portfolio) -> tuple[str, str]:
    """Render (policies.csv, claims.csv) text. Inverse of :func:`ingest_csv`."""
    pol = io.StringIO()
    w = csv.writer(pol, lineterminator="\n")
    w.writerow(POLICY_HEADER)
    for ph in portfolio.policyholders:
        w.writerow([ph.id, ph.age, ph.gender.value, ph.vehicle_type, ph.vehicle_age,
                    ph.prior_experience, ph.ncd_level])
    clm = io.StringIO()
    w = csv.writer(clm, lineterminator="\n")
    w.writerow(CLAIMS_HEADER)
    for ev in portfolio.events:
        for t, a in ev.losses:
            w.writerow([ev.event_id, ev.policyholder_id, t.value, repr(float(a))])
    return pol.getvalue(), clm.getvalue()

