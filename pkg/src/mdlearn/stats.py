"""Relative grammaticality and Pearson correlation with a two-tailed t test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInput, InsufficientData, ValidationError

RATING_MIN = 1.0  # "Sounds completely fine (Definitely grammatical)"
RATING_MAX = 5.0  # "Sounds extremely odd (Definitely ungrammatical)"


@dataclass(frozen=True)
class JudgmentRow:
    construction_id: str
    mean_grammatical: float
    mean_ungrammatical: float
    n_respondents: int

    def __post_init__(self):
        for name in ("mean_grammatical", "mean_ungrammatical"):
            v = getattr(self, name)
            if not (RATING_MIN <= v <= RATING_MAX):
                raise ValidationError(
                    f"{self.construction_id}: {name}={v} outside the {RATING_MIN:g}-{RATING_MAX:g} scale"
                )
        if self.n_respondents < 0:
            raise ValidationError(f"{self.construction_id}: n_respondents must be nonnegative")


@dataclass(frozen=True)
class CorrelationReport:
    variable: str
    r: float
    p: float
    n: int


@dataclass(frozen=True)
class CorrelationOutcome:
    learnability: CorrelationReport
    entrenchment: CorrelationReport
    excluded: list[tuple[str, str]] = field(default_factory=list)

    @property
    def reports(self) -> tuple[CorrelationReport, CorrelationReport]:
        return (self.learnability, self.entrenchment)


def relative_grammaticality(row: JudgmentRow) -> float:
    """Ungrammatical rating minus grammatical rating; 4 is the maximum."""
    return row.mean_ungrammatical - row.mean_grammatical


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("xs and ys must be 1-d sequences of equal length")
    if len(x) < 3:
        raise InsufficientData("pearson_r needs at least 3 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("correlation is undefined for a constant input")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _betacf(a: float, b: float, x: float, eps: float = 1e-15, max_iter: int = 500) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf_two_tailed(t: float, df: float) -> float:
    """``P(|T| >= |t|)`` for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def p_value_two_tailed(r: float, n: int) -> float:
    if n < 3:
        raise InsufficientData("need at least 3 points for a p-value")
    if not -1.0 <= r <= 1.0:
        raise ValueError(f"r must lie in [-1, 1], got {r}")
    if abs(r) == 1.0:
        return 0.0
    df = n - 2
    t = r * math.sqrt(df / (1.0 - r * r))
    return min(1.0, student_t_sf_two_tailed(t, df))


def correlate(results: Iterable, judgments: Iterable[JudgmentRow]) -> CorrelationOutcome:
    """Correlate relative grammaticality with learnability and entrenchment.

    Rows are joined on construction id. A construction is excluded (and
    listed in ``excluded`` with the reason) when it is missing from either
    side or when either of its scores is not finite, so both reports use the
    same points.
    """
    by_id = {}
    for res in results:
        by_id[res.construction_id] = res
    judged = {j.construction_id: j for j in judgments}

    excluded: list[tuple[str, str]] = []
    xs_learn, xs_entr, ys = [], [], []
    for cid in sorted(set(by_id) | set(judged)):
        if cid not in judged:
            excluded.append((cid, "no judgment row"))
            continue
        if cid not in by_id:
            excluded.append((cid, "no learnability result"))
            continue
        res = by_id[cid]
        if not math.isfinite(res.learnability):
            excluded.append((cid, f"learnability score is {res.learnability}"))
            continue
        if not math.isfinite(res.entrenchment):
            excluded.append((cid, f"entrenchment score is {res.entrenchment}"))
            continue
        xs_learn.append(res.learnability)
        xs_entr.append(res.entrenchment)
        ys.append(relative_grammaticality(judged[cid]))

    n = len(ys)
    if n < 3:
        raise InsufficientData(f"only {n} constructions could be joined; need at least 3")

    def report(name: str, xs: list[float]) -> CorrelationReport:
        r = pearson_r(xs, ys)
        return CorrelationReport(name, r, p_value_two_tailed(r, n), n)

    return CorrelationOutcome(
        learnability=report("learnability", xs_learn),
        entrenchment=report("entrenchment", xs_entr),
        excluded=excluded,
    )
