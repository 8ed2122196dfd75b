"""From grammar cost and per-occurrence savings to years-to-learn.

Unlearnable quantities are represented by IEEE infinities: ``math.inf`` for
occurrence and year counts, ``-math.inf`` for the log learnability score.
They propagate through arithmetic and serialize as ``inf``/``-inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constructions import (
    ConstructionSpec,
    grammar_delta_bits,
    savings_per_diagnostic_occurrence,
)
from .errors import ZeroFrequency

UNLEARNABLE = math.inf

#: words in the reference corpus (COCA)
COCA_WORDS = 385_000_000
#: symbols in the learner's original grammar
DEFAULT_SYMBOLS = 100_000
#: not an empirical estimate; a configuration default for words heard per year
DEFAULT_ANNUAL_EXPOSURE = 10_000_000


@dataclass(frozen=True)
class ExposureModel:
    corpus_total_words: int = COCA_WORDS
    annual_exposure_words: int = DEFAULT_ANNUAL_EXPOSURE

    def __post_init__(self):
        if self.corpus_total_words <= 0 or self.annual_exposure_words <= 0:
            raise ValueError("corpus_total_words and annual_exposure_words must be positive")


@dataclass(frozen=True)
class LearnabilityResult:
    construction_id: str
    grammar_delta: float
    savings: float
    o_needed: float  # int, or inf when unlearnable
    o_year: float
    n_years: float
    learnability: float
    entrenchment: float


def occurrences_needed(delta: float, savings: float, integer: bool = True) -> float:
    """Occurrences after which accumulated savings cover the grammar cost.

    With ``integer=True`` this is the smallest ``m`` with ``m * savings >= delta``.
    ``integer=False`` returns the real quotient, which makes scaling
    identities exact.
    """
    if delta < 0:
        raise ValueError(f"grammar cost must be nonnegative, got {delta}")
    if delta == 0:
        return 0
    if savings <= 0:
        return UNLEARNABLE
    ratio = delta / savings
    if not integer:
        return ratio
    m = math.ceil(ratio)
    # the float quotient can land one off an exact multiple
    if m > 0 and (m - 1) * savings >= delta:
        m -= 1
    elif m * savings < delta:
        m += 1
    return m


def occurrences_per_year(diagnostic_count: int, exposure: ExposureModel) -> float:
    if diagnostic_count < 0:
        raise ValueError("diagnostic_count must be nonnegative")
    return diagnostic_count / exposure.corpus_total_words * exposure.annual_exposure_words


def years_to_learn(o_needed: float, o_year: float) -> float:
    if o_needed == 0:
        return 0.0
    if math.isinf(o_needed) or o_year <= 0:
        return UNLEARNABLE
    return o_needed / o_year


def learnability_score(n_years: float) -> float:
    """``log10(1 / n_years)``; ``-inf`` when unlearnable, ``+inf`` when free."""
    if math.isinf(n_years):
        return -math.inf
    if n_years <= 0:
        return math.inf
    return -math.log10(n_years)


def entrenchment_score(diagnostic_count: int, exposure: ExposureModel) -> float:
    """``log10`` of the yearly occurrence frequency."""
    if diagnostic_count <= 0:
        raise ZeroFrequency("entrenchment is undefined for a construction that never occurs")
    return math.log10(occurrences_per_year(diagnostic_count, exposure))


def evaluate(
    spec: ConstructionSpec,
    symbols: int = DEFAULT_SYMBOLS,
    exposure: ExposureModel | None = None,
    smoothing: bool = False,
    integer: bool = True,
) -> LearnabilityResult:
    exposure = exposure or ExposureModel()
    delta = grammar_delta_bits(spec, symbols)
    savings = savings_per_diagnostic_occurrence(spec, smoothing=smoothing)
    o_needed = occurrences_needed(delta, savings, integer=integer)
    o_year = occurrences_per_year(spec.diagnostic_count, exposure)
    n_years = years_to_learn(o_needed, o_year)
    return LearnabilityResult(
        construction_id=spec.id,
        grammar_delta=delta,
        savings=savings,
        o_needed=o_needed,
        o_year=o_year,
        n_years=n_years,
        learnability=learnability_score(n_years),
        entrenchment=entrenchment_score(spec.diagnostic_count, exposure),
    )
