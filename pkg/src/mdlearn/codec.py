"""Code-length primitives.

Probabilities are handled as exact rationals (:class:`fractions.Fraction`);
logarithms are evaluated in binary64. Lengths are in bits.
"""

from __future__ import annotations

import math
import sys
from fractions import Fraction
from typing import Mapping, Union

from .errors import IncompatibleModel, ZeroProbability

ProbabilityLike = Union[Fraction, int, float, str]


def as_probability(p: ProbabilityLike) -> Fraction:
    """Convert ``p`` to an exact rational and check it lies in [0, 1].

    Floats are converted exactly (``Fraction(0.3)`` is the binary64 value,
    not 3/10); strings go through ``Fraction`` so ``"3/10"`` and ``"0.3"``
    both give 3/10.
    """
    if isinstance(p, Fraction):
        q = p
    elif isinstance(p, bool):
        raise TypeError("probability must be numeric, not bool")
    elif isinstance(p, (int, float, str)):
        if isinstance(p, float) and not math.isfinite(p):
            raise ValueError(f"probability must be finite, got {p}")
        q = Fraction(p)
    else:
        q = Fraction(p)
    if q < 0 or q > 1:
        raise ValueError(f"probability must lie in [0, 1], got {q}")
    return q


def _neg_log2(q: Fraction) -> float:
    f = q.numerator / q.denominator
    if f >= sys.float_info.min:
        return -math.log2(f)
    # subnormal or underflowed: fall back to big-integer logs
    return math.log2(q.denominator) - math.log2(q.numerator)


def ideal_code_length(p: ProbabilityLike) -> float:
    """Return ``-log2(p)`` in bits (not rounded)."""
    q = as_probability(p)
    if q == 0:
        raise ZeroProbability("cannot assign a finite code length to probability 0")
    if q == 1:
        return 0.0
    return _neg_log2(q)


def integer_code_length(p: ProbabilityLike) -> int:
    """Smallest integer number of bits ``L`` with ``2**-L <= p``.

    Computed exactly on the rational, so powers of two never round the
    wrong way.
    """
    q = as_probability(p)
    if q == 0:
        raise ZeroProbability("cannot assign a finite code length to probability 0")
    num, den = q.numerator, q.denominator
    # 2**L * num >= den
    length = max(0, den.bit_length() - num.bit_length() - 1)
    while (num << length) < den:
        length += 1
    return length


def corpus_code_length(
    counts: Mapping[object, int], probs: Mapping[object, ProbabilityLike]
) -> float:
    """Bits needed to encode every occurrence in ``counts`` under ``probs``."""
    terms = []
    for form, count in counts.items():
        if isinstance(count, bool) or int(count) != count or count < 0:
            raise ValueError(f"count for {form!r} must be a nonnegative integer, got {count!r}")
        if count == 0:
            continue
        p = as_probability(probs.get(form, 0))
        if p == 0:
            raise IncompatibleModel(f"form {form!r} occurs {count} times but has probability 0")
        terms.append(int(count) * ideal_code_length(p))
    return math.fsum(terms)


def two_part_total(grammar_bits: float, data_bits: float) -> float:
    """Total two-part description length."""
    for name, v in (("grammar_bits", grammar_bits), ("data_bits", data_bits)):
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"{name} must be finite and nonnegative, got {v}")
    return grammar_bits + data_bits
