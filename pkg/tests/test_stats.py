import math
import random

import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from mdlearn.errors import DegenerateInput, InsufficientData, ValidationError
from mdlearn.learnability import LearnabilityResult
from mdlearn.stats import (
    JudgmentRow,
    correlate,
    p_value_two_tailed,
    pearson_r,
    regularized_incomplete_beta,
    relative_grammaticality,
)


def pearson_oracle(xs, ys):
    """Textbook definition with compensated sums, no numpy."""
    n = len(xs)
    mx, my = math.fsum(xs) / n, math.fsum(ys) / n
    cov = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = math.fsum((x - mx) ** 2 for x in xs)
    vy = math.fsum((y - my) ** 2 for y in ys)
    return cov / math.sqrt(vx * vy)


def p_oracle(r, n):
    """Two-tailed p by adaptive quadrature of the Student-t density."""
    df = n - 2
    t = abs(r) * math.sqrt(df / (1 - r * r))
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)) / math.sqrt(df * math.pi)
    tail, _ = integrate.quad(lambda x: c * (1 + x * x / df) ** (-(df + 1) / 2), t, math.inf,
                             epsabs=1e-14, epsrel=1e-13)
    return 2 * tail


# quadrature values, computed once and frozen
P_MINUS_008_N17 = 0.7602037136563948
P_035_N17 = 0.16845165540618673


def row(cid, g, u, n=10):
    return JudgmentRow(cid, g, u, n)


def test_relative_grammaticality():
    assert relative_grammaticality(row("x", 1, 5)) == 4
    assert relative_grammaticality(row("x", 3, 3)) == 0
    assert relative_grammaticality(row("x", 5, 1)) == -4


@given(st.floats(1, 5), st.floats(1, 5))
def test_relative_grammaticality_antisymmetric(g, u):
    assert relative_grammaticality(row("x", g, u)) == -relative_grammaticality(row("x", u, g))


@pytest.mark.parametrize("g, u", [(0.5, 3), (1, 6), (5.01, 2)])
def test_ratings_outside_scale(g, u):
    with pytest.raises(ValidationError):
        row("x", g, u)


def test_pearson_exact_cases():
    assert pearson_r([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-15)
    assert pearson_r([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-15)


def test_pearson_matches_oracle():
    rng = random.Random(2024)
    for _ in range(20):
        xs = [rng.gauss(0, 1) for _ in range(20)]
        ys = [rng.gauss(0, 1) + 0.5 * x for x in xs]
        assert pearson_r(xs, ys) == pytest.approx(pearson_oracle(xs, ys), abs=1e-12)


def test_pearson_errors():
    with pytest.raises(DegenerateInput):
        pearson_r([1, 1, 1], [1, 2, 3])
    with pytest.raises(InsufficientData):
        pearson_r([1, 2], [1, 2])
    with pytest.raises(ValueError):
        pearson_r([1, 2, 3], [1, 2])


pairs = st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=5, max_size=25)


def spread(v):
    return max(v) - min(v)


@settings(max_examples=200)
@given(pairs, st.floats(0.1, 10), st.floats(-50, 50))
def test_pearson_affine_invariance(pts, a, b):
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    if spread(xs) < 1e-3 or spread(ys) < 1e-3:
        return
    r = pearson_r(xs, ys)
    assert pearson_r([a * x + b for x in xs], ys) == pytest.approx(r, abs=1e-9)
    assert pearson_r([-a * x + b for x in xs], ys) == pytest.approx(-r, abs=1e-9)


def test_log_base_does_not_change_r():
    rng = random.Random(5)
    years = [rng.uniform(0.5, 4000) for _ in range(17)]
    ys = [rng.uniform(-1, 4) for _ in range(17)]
    r10 = pearson_r([-math.log10(y) for y in years], ys)
    re = pearson_r([-math.log(y) for y in years], ys)
    assert r10 == pytest.approx(re, abs=1e-12)


def test_p_value_examples():
    assert p_value_two_tailed(0.0, 17) == pytest.approx(1.0, abs=1e-12)
    assert p_value_two_tailed(-0.08, 17) == pytest.approx(P_MINUS_008_N17, abs=1e-9)
    assert 0.75 <= p_value_two_tailed(-0.08, 17) <= 0.78
    # r = .35 with n = 17 gives p near .17, far from .0045
    assert p_value_two_tailed(0.35, 17) == pytest.approx(P_035_N17, abs=1e-9)
    assert p_value_two_tailed(1.0, 10) == 0.0
    assert p_value_two_tailed(-1.0, 10) == 0.0


def test_p_value_matches_quadrature_grid():
    for n in (3, 4, 8, 17, 50, 200):
        for r in (-0.95, -0.5, -0.1, 0.02, 0.3, 0.7, 0.99):
            assert p_value_two_tailed(r, n) == pytest.approx(p_oracle(r, n), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.98), st.floats(0.01, 0.98), st.integers(3, 300))
def test_p_value_monotone(r1, r2, n):
    lo, hi = sorted((r1, r2))
    assert p_value_two_tailed(hi, n) <= p_value_two_tailed(lo, n) + 1e-15
    assert p_value_two_tailed(hi, n + 1) <= p_value_two_tailed(hi, n) + 1e-15


def test_incomplete_beta_edges_and_symmetry():
    assert regularized_incomplete_beta(2, 3, 0) == 0
    assert regularized_incomplete_beta(2, 3, 1) == 1
    # I_x(a, b) = 1 - I_{1-x}(b, a)
    assert regularized_incomplete_beta(2.5, 0.5, 0.3) == pytest.approx(
        1 - regularized_incomplete_beta(0.5, 2.5, 0.7), abs=1e-13)
    # I_x(1, 1) = x
    assert regularized_incomplete_beta(1, 1, 0.37) == pytest.approx(0.37, abs=1e-14)


def result(cid, learn, entr):
    return LearnabilityResult(cid, 1.0, 0.1, 10, 1.0, 10 ** -learn, learn, entr)


def test_correlate_perfectly_linear():
    results = [result(f"c{i}", -i * 0.5, i % 3) for i in range(6)]
    judgments = [row(f"c{i}", 1.0, 4.0 - 0.5 * i) for i in range(6)]
    out = correlate(results, judgments)
    assert out.learnability.r == pytest.approx(1.0, abs=1e-12)
    assert out.learnability.n == out.entrenchment.n == 6
    assert [r.variable for r in out.reports] == ["learnability", "entrenchment"]


def test_correlate_bookkeeping():
    results = [result(f"c{i}", -i * 0.3, i) for i in range(5)]
    results.append(LearnabilityResult("dead", 1.0, 0.0, math.inf, 1.0, math.inf, -math.inf, 0.5))
    judgments = [row(f"c{i}", 1.5, 2.0 + (i % 2)) for i in range(4)]
    judgments += [row("dead", 1, 3), row("orphan", 1, 2)]
    out = correlate(results, judgments)
    assert out.learnability.n == 4
    excluded = dict(out.excluded)
    assert set(excluded) == {"c4", "dead", "orphan"}
    assert "judgment" in excluded["c4"] and "inf" in excluded["dead"] and "result" in excluded["orphan"]


def test_correlate_insufficient():
    with pytest.raises(InsufficientData):
        correlate([result("a", 0, 0), result("b", 1, 1)], [row("a", 1, 2), row("b", 1, 3)])


def test_correlate_bundled_fixture_matches_oracle(data_dir):
    from mdlearn.ingest import load_constructions, load_judgments
    from mdlearn.learnability import evaluate

    results = [evaluate(s) for s in load_constructions(data_dir / "constructions.json")]
    judgments = load_judgments(data_dir / "judgments.csv")
    out = correlate(results, judgments)
    by_id = {j.construction_id: j for j in judgments}
    ids = sorted(r.construction_id for r in results)
    res = {r.construction_id: r for r in results}
    ys = [by_id[c].mean_ungrammatical - by_id[c].mean_grammatical for c in ids]
    for rep, attr in ((out.learnability, "learnability"), (out.entrenchment, "entrenchment")):
        xs = [getattr(res[c], attr) for c in ids]
        r = pearson_oracle(xs, ys)
        assert rep.r == pytest.approx(r, abs=1e-12)
        assert rep.p == pytest.approx(p_oracle(r, 17), abs=1e-10)
        assert rep.n == 17
