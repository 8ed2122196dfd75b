"""Identifying a computable distribution from i.i.d. positive samples.

A finite, ordered family of semiprobability mass functions ``q_1 .. q_m`` is
given, each known only through a lower approximation ``phi_i(x, k)`` that
is nondecreasing in ``k`` and converges to ``q_i(x)``. The sampling
distribution is ``q_k`` for the least such ``k``.

After each sample the learner

1. permanently eliminates every hypothesis whose lower approximation
   overshoots the empirical frequency by more than the band radius at some
   tracked element (a lower bound above the truth can never come back), then
2. guesses the least surviving index that is also close from below, i.e.
   ``max_x (freq_n(x) - phi_i(x, t(n))) <= eps_n``, falling back to the least
   surviving index when none is close.

``eps_n`` is an anytime Hoeffding radius with a union bound over tracked
elements and over all ``n``, so the band holds simultaneously for every
element and every step with probability at least ``1 - delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptySample,
    FamilyExhausted,
    InvalidFamily,
    UnsupportedDistribution,
)

PROBABILITY = "probability"
SEMIPROBABILITY = "semiprobability"

SEED_LIMIT = 2**64


def shortlex_key(x) -> tuple[int, str]:
    """Length-increasing, then lexicographic."""
    s = str(x)
    return (len(s), s)


class LanguageIndex:
    """An ordered finite language with a 1-based position function."""

    def __init__(self, elements: Iterable[Hashable]):
        self.elements = tuple(elements)
        self._pos = {x: i for i, x in enumerate(self.elements, start=1)}
        if len(self._pos) != len(self.elements):
            raise ValueError("language elements must be unique")

    @classmethod
    def shortlex(cls, elements: Iterable[Hashable]) -> "LanguageIndex":
        return cls(sorted(set(elements), key=shortlex_key))

    def index(self, x) -> int:
        try:
            return self._pos[x]
        except KeyError:
            raise KeyError(f"{x!r} is not in the language") from None

    def __contains__(self, x) -> bool:
        return x in self._pos

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        return f"LanguageIndex({list(self.elements)!r})"


@dataclass(frozen=True, eq=False)
class RationalPMF:
    """Exact-rational (semi)probability mass function with finite support.

    Construction does not enforce the mass invariants, so malformed
    hypotheses can be loaded and then reported by :func:`validate_family`.
    """

    masses: Mapping[Hashable, Fraction]
    kind: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "masses", {x: Fraction(v) for x, v in self.masses.items()})
        if self.kind is None:
            object.__setattr__(
                self, "kind", PROBABILITY if self.total == 1 else SEMIPROBABILITY
            )
        elif self.kind not in (PROBABILITY, SEMIPROBABILITY):
            raise ValueError(f"unknown kind {self.kind!r}")

    def __call__(self, x) -> Fraction:
        return self.masses.get(x, Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, RationalPMF):
            return NotImplemented
        keys = set(self.masses) | set(other.masses)
        return all(self(x) == other(x) for x in keys)

    __hash__ = None

    @property
    def total(self) -> Fraction:
        return sum(self.masses.values(), Fraction(0))

    @property
    def support(self) -> list:
        return [x for x, v in self.masses.items() if v > 0]

    @classmethod
    def atom(cls, x) -> "RationalPMF":
        return cls({x: Fraction(1)})

    @classmethod
    def uniform(cls, elements: Sequence) -> "RationalPMF":
        n = len(elements)
        return cls({x: Fraction(1, n) for x in elements})


@dataclass(frozen=True)
class GeometricPMF:
    """``p(i) = (1 - ratio) * ratio**(i - 1)`` on the positive integers.

    With ``ratio = 1/2`` this is ``p(i) = 2**-i``. Elements are their own
    positions in the language order.
    """

    ratio: Fraction = Fraction(1, 2)

    def __post_init__(self):
        r = Fraction(self.ratio)
        if not 0 < r < 1:
            raise ValueError("ratio must lie in (0, 1)")
        object.__setattr__(self, "ratio", r)

    def __call__(self, i: int) -> Fraction:
        if i < 1:
            return Fraction(0)
        return (1 - self.ratio) * self.ratio ** (i - 1)

    @property
    def mean_index(self) -> Fraction:
        return 1 / (1 - self.ratio)


# -- lower approximation schedules ------------------------------------------


class ExactSchedule:
    """``phi(x, k) = q(x)`` for every ``k``: q is computable outright."""

    kind = "exact"

    def value(self, q: RationalPMF, x, k: int) -> Fraction:
        return q(x)

    def steps_to_within(self, q: RationalPMF, x, gap: Fraction) -> int | None:
        return 0

    def __repr__(self):
        return "ExactSchedule()"


class GeometricGapSchedule:
    """``phi(x, k) = q(x) * (1 - rate**k)``."""

    kind = "geometric"

    def __init__(self, rate: Fraction | str = Fraction(1, 2)):
        self.rate = Fraction(rate)
        if not 0 < self.rate < 1:
            raise ValueError("geometric schedule rate must lie in (0, 1)")

    def value(self, q: RationalPMF, x, k: int) -> Fraction:
        return q(x) * (1 - self.rate**k)

    def steps_to_within(self, q: RationalPMF, x, gap: Fraction) -> int | None:
        """Least ``k`` with ``q(x) * rate**k <= gap``, solved in closed form."""
        qx = q(x)
        if qx <= gap:
            return 0
        if gap <= 0:
            return None
        k = max(0, math.ceil(math.log(gap / qx) / math.log(self.rate)))
        # float logs can be off by one either way near exact powers
        while k > 0 and qx * self.rate ** (k - 1) <= gap:
            k -= 1
        while qx * self.rate**k > gap:
            k += 1
        return k

    def __repr__(self):
        return f"GeometricGapSchedule(rate={self.rate})"


class StaircaseSchedule:
    """Explicit table: ``phi(x, k) = table[x][min(k, len - 1)]``.

    Elements missing from the table approximate to 0 at every step.
    """

    kind = "staircase"

    def __init__(self, table: Mapping[Hashable, Sequence]):
        self.table = {x: tuple(Fraction(v) for v in vals) for x, vals in table.items()}
        for x, vals in self.table.items():
            if not vals:
                raise ValueError(f"staircase for {x!r} is empty")

    def value(self, q: RationalPMF, x, k: int) -> Fraction:
        vals = self.table.get(x)
        if vals is None:
            return Fraction(0)
        return vals[min(k, len(vals) - 1)]

    def steps_to_within(self, q: RationalPMF, x, gap: Fraction) -> int | None:
        vals = self.table.get(x, (Fraction(0),))
        for k, v in enumerate(vals):
            if q(x) - v <= gap:
                return k
        return None

    def __repr__(self):
        return f"StaircaseSchedule({len(self.table)} elements)"


@dataclass(frozen=True, eq=False)
class Hypothesis:
    pmf: RationalPMF
    schedule: object = field(default_factory=GeometricGapSchedule)

    def approx(self, x, k: int) -> Fraction:
        return self.schedule.value(self.pmf, x, k)


@dataclass(frozen=True, eq=False)
class HypothesisFamily:
    language: LanguageIndex
    hypotheses: tuple[Hypothesis, ...]
    true_index: int  # 1-based

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))

    @property
    def truth(self) -> RationalPMF:
        return self.hypotheses[self.true_index - 1].pmf

    def __len__(self) -> int:
        return len(self.hypotheses)

    @cached_property
    def tracked(self) -> tuple:
        """Elements with positive mass under some hypothesis, in language order."""
        positive = {x for h in self.hypotheses for x in h.pmf.support}
        return tuple(x for x in self.language if x in positive)


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    invariant: str
    hypothesis: int | None
    witness: object
    message: str

    def __str__(self):
        who = f"hypothesis {self.hypothesis}: " if self.hypothesis is not None else ""
        return f"{who}{self.invariant}: {self.message}"


def validate_family(
    family: HypothesisFamily, depth: int = 64, gap: Fraction = Fraction(1, 10**6)
) -> Violation | None:
    """Return the first violated invariant, or ``None`` when the family is sound.

    Schedules are checked on the grid ``k = 0 .. depth`` over the language:
    nondecreasing in ``k``, never above ``q``, and within ``gap`` of ``q`` at
    ``k = depth``.
    """
    m = len(family.hypotheses)
    if m == 0:
        return Violation("nonempty", None, None, "family has no hypotheses")
    if not 1 <= family.true_index <= m:
        return Violation("true_index range", None, family.true_index, f"true_index must be in 1..{m}")

    for i, h in enumerate(family.hypotheses, start=1):
        q = h.pmf
        for x, v in q.masses.items():
            if x not in family.language:
                return Violation("support in language", i, x, f"{x!r} is not a language element")
            if v < 0:
                return Violation("nonnegative mass", i, x, f"mass {v} at {x!r}")
        total = q.total
        if total > 1:
            return Violation("total mass <= 1", i, total, f"masses sum to {total}")
        if q.kind == PROBABILITY and total != 1:
            return Violation("probability sums to 1", i, total, f"declared probability but sums to {total}")

    truth = family.truth
    if truth.total != 1:
        return Violation("truth is a probability", family.true_index, truth.total, "true hypothesis must sum to 1")
    for i in range(1, family.true_index):
        if family.hypotheses[i - 1].pmf == truth:
            return Violation(
                "least true index", i, i,
                f"hypothesis {i} equals the truth; true_index must be the least such index",
            )

    for i, h in enumerate(family.hypotheses, start=1):
        for x in family.language:
            qx = h.pmf(x)
            prev = h.approx(x, 0)
            if prev > qx:
                return Violation("approximation from below", i, (x, 0), f"phi({x!r}, 0) = {prev} > q = {qx}")
            for k in range(1, depth + 1):
                cur = h.approx(x, k)
                if cur < prev:
                    return Violation(
                        "monotone schedule", i, (x, k - 1),
                        f"phi({x!r}, {k}) = {cur} < phi({x!r}, {k - 1}) = {prev}",
                    )
                if cur > qx:
                    return Violation("approximation from below", i, (x, k), f"phi({x!r}, {k}) = {cur} > q = {qx}")
                prev = cur
            if qx - prev > gap:
                return Violation(
                    "schedule converges", i, (x, depth),
                    f"phi({x!r}, {depth}) = {prev} is more than {gap} below q = {qx}",
                )
    return None


def check_family(family: HypothesisFamily, **kwargs) -> None:
    """Raise :class:`InvalidFamily` if :func:`validate_family` finds a problem."""
    v = validate_family(family, **kwargs)
    if v is not None:
        raise InvalidFamily(str(v))


# -- distribution utilities ----------------------------------------------------


def mean_index(p, lang: LanguageIndex | None = None) -> Fraction:
    """Mean position ``sum_x i(x) p(x)`` under the language order."""
    if isinstance(p, GeometricPMF):
        return p.mean_index
    if not isinstance(p, RationalPMF):
        raise UnsupportedDistribution(f"no closed form registered for {type(p).__name__}")
    if p.total != 1:
        raise ValueError("mean_index needs a probability mass function")
    if lang is None:
        lang = LanguageIndex.shortlex(p.masses)
    return sum((lang.index(x) * v for x, v in p.masses.items() if v), Fraction(0))


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 seeded through SeedSequence; reproducible across platforms."""
    if isinstance(seed, bool) or not 0 <= int(seed) < SEED_LIMIT:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def _cdf(p: RationalPMF, order: Sequence) -> np.ndarray:
    acc = Fraction(0)
    out = []
    for x in order:
        acc += p(x)
        out.append(float(acc))
    out[-1] = 1.0
    return np.asarray(out)


def _sample_positions(p: RationalPMF, order: Sequence, n: int, seed: int) -> np.ndarray:
    """Positions (0-based, into ``order``) of ``n`` inverse-CDF draws."""
    if n == 0:
        return np.zeros(0, dtype=np.intp)
    cdf = _cdf(p, order)
    u = make_rng(seed).random(n)
    pos = np.searchsorted(cdf, u, side="right")
    return np.minimum(pos, len(order) - 1)


def sample_iid(p: RationalPMF, n: int, seed: int, lang: LanguageIndex | None = None) -> list:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if p.total != 1:
        raise ValueError("can only sample from a probability mass function")
    order = tuple(lang) if lang is not None else LanguageIndex.shortlex(p.masses).elements
    return [order[i] for i in _sample_positions(p, order, n, seed)]


def empirical_frequency(sample: Sequence, x) -> Fraction:
    if len(sample) == 0:
        raise EmptySample("empirical frequency of an empty sample")
    return Fraction(sum(1 for s in sample if s == x), len(sample))


def confidence_radius(n: int, m_tracked: int, delta: float) -> float:
    """Anytime two-sided Hoeffding radius.

    Splitting ``delta`` as ``delta / (m * n * (n + 1))`` per element and step
    sums to ``delta`` over all elements and all ``n >= 1``.
    """
    if n < 1 or m_tracked < 1:
        raise ValueError("n and m_tracked must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.sqrt(math.log(2.0 * m_tracked * n * (n + 1) / delta) / (2.0 * n))


# -- identification ----------------------------------------------------------


@dataclass(frozen=True)
class IdentificationConfig:
    delta: float = 0.01
    n_max: int = 2000
    seed: int = 0
    schedule_depth: Callable[[int], int] | None = None  # t(n); identity when None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.n_max < 0:
            raise ValueError("n_max must be nonnegative")
        make_rng(self.seed)  # range check

    def depth(self, n: int) -> int:
        return n if self.schedule_depth is None else self.schedule_depth(n)


def _tracked_at(family: HypothesisFamily, prefix: Sequence) -> tuple:
    seen = set(prefix)
    extra = [x for x in seen if x not in family.tracked]
    return family.tracked + tuple(sorted(extra, key=shortlex_key))


def eliminate_step(
    family: HypothesisFamily,
    eliminated: Iterable[int],
    sample_prefix: Sequence,
    config: IdentificationConfig,
    n: int,
) -> frozenset[int]:
    """Eliminated set after observing the first ``n`` samples.

    Reference implementation working straight from the sample;
    :func:`run_identification` computes the same thing in bulk.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    prefix = sample_prefix[:n]
    tracked = _tracked_at(family, prefix)
    eps = confidence_radius(n, len(tracked), config.delta)
    t = config.depth(n)
    freq = {x: float(empirical_frequency(prefix, x)) for x in tracked}
    out = set(eliminated)
    for i, h in enumerate(family.hypotheses, start=1):
        if i in out:
            continue
        if any(float(h.approx(x, t)) > freq[x] + eps for x in tracked):
            out.add(i)
    return frozenset(out)


def select_guess(
    family: HypothesisFamily,
    eliminated: Iterable[int],
    sample_prefix: Sequence,
    config: IdentificationConfig,
    n: int,
) -> int:
    eliminated = set(eliminated)
    alive = [i for i in range(1, len(family) + 1) if i not in eliminated]
    if not alive:
        raise FamilyExhausted(n)
    prefix = sample_prefix[:n]
    tracked = _tracked_at(family, prefix)
    eps = confidence_radius(n, len(tracked), config.delta)
    t = config.depth(n)
    freq = {x: float(empirical_frequency(prefix, x)) for x in tracked}
    for i in alive:
        h = family.hypotheses[i - 1]
        if max(freq[x] - float(h.approx(x, t)) for x in tracked) <= eps:
            return i
    return alive[0]


@dataclass
class StepRecord:
    n: int
    guess: int
    eliminated: frozenset[int]
    epsilon: float


@dataclass
class RunTrace:
    """Outcome of one run, stored column-wise.

    ``eliminated_at[i - 1]`` is the step at which hypothesis ``i`` was
    eliminated (0 if never), so the eliminated set can only grow.
    """

    seed: int
    true_index: int
    guesses: np.ndarray
    epsilons: np.ndarray
    eliminated_at: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.guesses)

    @property
    def final_guess(self) -> int | None:
        return int(self.guesses[-1]) if self.n_steps else None

    @property
    def converged(self) -> bool:
        return self.final_guess == self.true_index

    @property
    def true_eliminated(self) -> bool:
        return bool(self.eliminated_at[self.true_index - 1])

    @property
    def convergence_step(self) -> int | None:
        """First ``n`` from which the guess stays fixed through the budget."""
        if self.n_steps == 0:
            return None
        changes = np.flatnonzero(self.guesses[1:] != self.guesses[:-1])
        return 1 if len(changes) == 0 else int(changes[-1]) + 2

    def eliminated_set(self, n: int) -> frozenset[int]:
        return frozenset(
            i for i, at in enumerate(self.eliminated_at, start=1) if 0 < at <= n
        )

    def records(self) -> Iterable[StepRecord]:
        for j in range(self.n_steps):
            n = j + 1
            yield StepRecord(n, int(self.guesses[j]), self.eliminated_set(n), float(self.epsilons[j]))


class PreparedFamily:
    """Per-step schedule values and band radii, shared across seeds."""

    def __init__(self, family: HypothesisFamily, config: IdentificationConfig):
        self.family = family
        self.order = family.tracked
        self.n_max = config.n_max
        self.delta = config.delta
        m = len(self.order)
        self.epsilons = np.array(
            [confidence_radius(n, m, config.delta) for n in range(1, config.n_max + 1)]
        )
        depths = [config.depth(n) for n in range(1, config.n_max + 1)]
        if any(b < a for a, b in zip(depths, depths[1:])):
            raise ValueError("schedule depth t(n) must be nondecreasing")
        cache: dict[int, np.ndarray] = {}
        phi = np.empty((config.n_max, len(family), m))
        for j, t in enumerate(depths):
            if t not in cache:
                cache[t] = np.array(
                    [[float(h.approx(x, t)) for x in self.order] for h in family.hypotheses]
                ).reshape(len(family), m)
            phi[j] = cache[t]
        self.phi = phi

    def run(self, seed: int, sampler: RationalPMF | None = None) -> RunTrace:
        """One seeded run. ``sampler`` replaces the family's truth as the
        sampling distribution, for misspecification experiments; its support
        must lie within the tracked elements."""
        fam = self.family
        n_max, m, H = self.n_max, len(self.order), len(fam)
        truth = fam.truth if sampler is None else sampler
        if any(x not in self.order for x in truth.support):
            raise InvalidFamily("sampling distribution puts mass outside the tracked elements")
        pos = _sample_positions(truth, self.order, n_max, seed)
        counts = np.zeros((n_max, m))
        counts[np.arange(n_max), pos] = 1.0
        counts = np.cumsum(counts, axis=0)
        freq = counts / np.arange(1, n_max + 1)[:, None]
        eps = self.epsilons

        over = (self.phi > (freq + eps[:, None])[:, None, :]).any(axis=2)
        close = (freq[:, None, :] - self.phi).max(axis=2) <= eps[:, None]

        eliminated_at = np.zeros(H, dtype=np.int64)
        for i in range(H):
            hits = np.flatnonzero(over[:, i])
            if len(hits):
                eliminated_at[i] = hits[0] + 1
        steps = np.arange(1, n_max + 1)[:, None]
        alive = (eliminated_at[None, :] == 0) | (steps < eliminated_at[None, :])

        any_alive = alive.any(axis=1)
        if not any_alive.all():
            dead = int(np.flatnonzero(~any_alive)[0]) + 1
            exc = FamilyExhausted(dead)
            exc.seed = seed
            raise exc
        pick = alive & close
        guesses = np.where(pick.any(axis=1), pick.argmax(axis=1), alive.argmax(axis=1)) + 1
        return RunTrace(seed, fam.true_index, guesses.astype(np.int64), eps.copy(), eliminated_at)


def run_identification(
    family: HypothesisFamily,
    config: IdentificationConfig,
    prepared: PreparedFamily | None = None,
) -> RunTrace:
    """One seeded run of the elimination/selection learner."""
    if prepared is None:
        check_family(family)
        prepared = PreparedFamily(family, config)
    return prepared.run(config.seed)


def run_seeds(family: HypothesisFamily, config: IdentificationConfig, seeds: Iterable[int]):
    """Run each seed; yields ``(seed, trace_or_FamilyExhausted)`` in order."""
    check_family(family)
    prepared = PreparedFamily(family, config)
    for s in seeds:
        try:
            yield s, prepared.run(s)
        except FamilyExhausted as exc:
            yield s, exc


def band_holds(
    p: RationalPMF, n_max: int, seed: int, delta: float, start: int = 1
) -> bool:
    """Whether ``|p(x) - freq_n(x)| <= eps_n`` for every support element and
    every ``n`` in ``start .. n_max`` on one seeded sample path."""
    order = LanguageIndex.shortlex(p.support).elements
    m = len(order)
    pos = _sample_positions(p, order, n_max, seed)
    counts = np.zeros((n_max, m))
    counts[np.arange(n_max), pos] = 1.0
    freq = np.cumsum(counts, axis=0) / np.arange(1, n_max + 1)[:, None]
    eps = np.array([confidence_radius(n, m, delta) for n in range(1, n_max + 1)])
    truth = np.array([float(p(x)) for x in order])
    dev = np.abs(freq - truth[None, :]).max(axis=1)
    return bool((dev[start - 1:] <= eps[start - 1:]).all())


# -- separation margin ---------------------------------------------------------


@dataclass(frozen=True)
class SeparationDiagnostics:
    """Margin by which earlier hypotheses differ from the truth.

    ``alpha`` is ``None`` when the truth is first in the family (nothing to
    separate); ``steps`` then holds ``t^1 = 0``.
    """

    alpha: Fraction | None
    witnesses: dict[int, object]
    steps: dict[int, int]
    chi: object
    theta: int


def separation_diagnostics(family: HypothesisFamily) -> SeparationDiagnostics:
    k = family.true_index
    p = family.truth
    order = family.tracked
    witnesses: dict[int, object] = {}
    gaps: dict[int, Fraction] = {}
    for i in range(1, k):
        q = family.hypotheses[i - 1].pmf
        best_x, best = None, Fraction(-1)
        for x in order:
            d = abs(p(x) - q(x))
            if d > best:
                best_x, best = x, d
        if best == 0:
            raise InvalidFamily(f"hypothesis {i} equals the truth at index {k}; truth must be the least index")
        witnesses[i], gaps[i] = best_x, best

    if k == 1:
        return SeparationDiagnostics(None, {}, {1: 0}, None, 0)

    alpha = min(gaps.values())
    half = alpha / 2
    steps: dict[int, int] = {}
    for i in range(1, k + 1):
        h = family.hypotheses[i - 1]
        xs = [witnesses[i]] if i < k else list(order)
        need = []
        for x in xs:
            t = h.schedule.steps_to_within(h.pmf, x, half)
            if t is None:
                raise InvalidFamily(f"hypothesis {i}: schedule never comes within {half} of q at {x!r}")
            need.append(t)
        steps[i] = max(need)
    chi = max(witnesses.values(), key=family.language.index)
    return SeparationDiagnostics(alpha, witnesses, steps, chi, max(steps.values()))
