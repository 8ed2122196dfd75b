"""A linguistic restriction as a context-partitioned choice process.

The *old* grammar treats the construction's forms as freely interchangeable:
one pooled distribution over forms, shared by every context. The *new*
grammar adds rule symbols that say which forms are allowed in which context,
so each context only needs to encode a choice among its allowed forms, and a
context with a single allowed form costs nothing.

Only choice bits are modeled. Sentence content and context identity cost the
same under both grammars and cancel out of the comparison.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .codec import corpus_code_length
from .errors import RestrictionContradicted, ValidationError


@dataclass(frozen=True)
class FormOption:
    form_id: str
    allowed: bool
    count: int

    def __post_init__(self):
        if isinstance(self.count, bool) or not isinstance(self.count, int) or self.count < 0:
            raise ValidationError(
                f"form {self.form_id!r}: count must be a nonnegative integer, got {self.count!r}"
            )


@dataclass(frozen=True)
class ContextBlock:
    context_id: str
    options: tuple[FormOption, ...]

    def __post_init__(self):
        object.__setattr__(self, "options", tuple(self.options))
        if not self.options:
            raise ValidationError(f"context {self.context_id!r} has no options")
        if not any(o.allowed for o in self.options):
            raise ValidationError(f"context {self.context_id!r} allows none of its options")
        ids = [o.form_id for o in self.options]
        dupes = sorted(f for f, c in Counter(ids).items() if c > 1)
        if dupes:
            raise ValidationError(f"context {self.context_id!r} repeats form ids {dupes}")

    @property
    def total(self) -> int:
        return sum(o.count for o in self.options)

    def option(self, form_id: str) -> FormOption | None:
        for o in self.options:
            if o.form_id == form_id:
                return o
        return None


@dataclass(frozen=True)
class ConstructionSpec:
    """One restriction: rule cost in symbols plus the corpus counts it governs.

    ``diagnostic`` names the (context, form) pair whose occurrences are
    credited with the savings, e.g. contracted *going to* before a verb.
    """

    id: str
    name: str
    n_new_symbols: int
    contexts: tuple[ContextBlock, ...]
    diagnostic: tuple[str, str]

    def __post_init__(self):
        object.__setattr__(self, "contexts", tuple(self.contexts))
        object.__setattr__(self, "diagnostic", tuple(self.diagnostic))
        where = f"construction {self.id!r}"
        if (
            isinstance(self.n_new_symbols, bool)
            or not isinstance(self.n_new_symbols, int)
            or self.n_new_symbols < 1
        ):
            raise ValidationError(f"{where}: n_new_symbols must be a positive integer")
        if not self.contexts:
            raise ValidationError(f"{where}: no contexts")
        ids = [c.context_id for c in self.contexts]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"{where}: duplicate context ids")
        if sum(c.total for c in self.contexts) <= 0:
            raise ValidationError(f"{where}: total count across contexts must be positive")
        if len(self.diagnostic) != 2:
            raise ValidationError(f"{where}: diagnostic must be a (context, form) pair")
        ctx_id, form_id = self.diagnostic
        ctx = self.context(ctx_id)
        opt = ctx.option(form_id) if ctx is not None else None
        if opt is None:
            raise ValidationError(
                f"{where}: diagnostic ({ctx_id!r}, {form_id!r}) does not name an existing option"
            )
        if not opt.allowed:
            raise ValidationError(f"{where}: diagnostic option must be allowed under the new grammar")
        if opt.count <= 0:
            raise ValidationError(f"{where}: diagnostic count must be positive")

    def context(self, context_id: str) -> ContextBlock | None:
        for c in self.contexts:
            if c.context_id == context_id:
                return c
        return None

    @property
    def diagnostic_count(self) -> int:
        ctx_id, form_id = self.diagnostic
        return self.context(ctx_id).option(form_id).count

    def scaled(self, factor: int) -> "ConstructionSpec":
        """Same construction with every count multiplied by ``factor``."""
        return ConstructionSpec(
            id=self.id,
            name=self.name,
            n_new_symbols=self.n_new_symbols,
            contexts=tuple(
                ContextBlock(
                    c.context_id,
                    tuple(FormOption(o.form_id, o.allowed, o.count * factor) for o in c.options),
                )
                for c in self.contexts
            ),
            diagnostic=self.diagnostic,
        )


def _check_symbols(symbols: int) -> None:
    if isinstance(symbols, bool) or int(symbols) != symbols or symbols < 2:
        raise ValidationError(f"symbol inventory must be an integer >= 2, got {symbols!r}")


def grammar_delta_bits(spec: ConstructionSpec, symbols: int) -> float:
    """Extra grammar length: each new rule symbol costs ``log2(symbols)`` bits."""
    _check_symbols(symbols)
    return spec.n_new_symbols * math.log2(symbols)


def old_grammar_choice_cost(spec: ConstructionSpec) -> float:
    """Choice bits when one pooled form distribution serves all contexts."""
    pooled: Counter[str] = Counter()
    for ctx in spec.contexts:
        for o in ctx.options:
            pooled[o.form_id] += o.count
    grand = sum(pooled.values())
    probs = {f: Fraction(c, grand) for f, c in pooled.items()}
    return corpus_code_length(pooled, probs)


def _context_cost(ctx: ContextBlock, smoothing: bool, spec_id: str) -> float:
    violations = [o for o in ctx.options if not o.allowed and o.count > 0]
    if violations and not smoothing:
        bad = ", ".join(f"{o.form_id}={o.count}" for o in violations)
        raise RestrictionContradicted(
            f"construction {spec_id!r}, context {ctx.context_id!r}: disallowed forms occur ({bad})"
        )
    if violations:
        # add-one over every option so the observed disallowed forms stay encodable
        options = ctx.options
        denom = ctx.total + len(options)
        probs = {o.form_id: Fraction(o.count + 1, denom) for o in options}
    else:
        options = tuple(o for o in ctx.options if o.allowed)
        if len(options) == 1:
            return 0.0
        denom = sum(o.count for o in options)
        if denom == 0:
            return 0.0
        probs = {o.form_id: Fraction(o.count, denom) for o in options}
    return corpus_code_length({o.form_id: o.count for o in options}, probs)


def new_grammar_choice_cost(spec: ConstructionSpec, smoothing: bool = False) -> float:
    """Choice bits when each context encodes only among its allowed forms.

    A disallowed form with a positive count falsifies the restriction and
    raises :class:`RestrictionContradicted`. With ``smoothing=True`` such a
    context is instead coded with add-one estimates over all its options;
    contexts without violations are unaffected.
    """
    return math.fsum(_context_cost(c, smoothing, spec.id) for c in spec.contexts)


def savings_per_diagnostic_occurrence(spec: ConstructionSpec, smoothing: bool = False) -> float:
    old = old_grammar_choice_cost(spec)
    new = new_grammar_choice_cost(spec, smoothing=smoothing)
    return (old - new) / spec.diagnostic_count


def build_spec(
    id: str,
    n_new_symbols: int,
    contexts: Sequence[tuple[str, Sequence[tuple[str, bool, int]]]],
    diagnostic: tuple[str, str],
    name: str | None = None,
) -> ConstructionSpec:
    """Shorthand constructor from nested tuples."""
    return ConstructionSpec(
        id=id,
        name=name if name is not None else id,
        n_new_symbols=n_new_symbols,
        contexts=tuple(
            ContextBlock(cid, tuple(FormOption(f, a, n) for f, a, n in opts))
            for cid, opts in contexts
        ),
        diagnostic=diagnostic,
    )
