import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coopnet.corpus import CandidateSummary, DiscourseRole, Document
from coopnet.reranker import (
    CandidateScoringError,
    EmptyPool,
    MissingLogprobs,
    RerankConfig,
    filter_pool,
    gen_term,
    new_decision_rate,
    rank_terms,
    rerank,
    top_index,
)
from coopnet.text import tokenize

R = DiscourseRole


def cand(text, lp=-1.0, index=0, roles=None, **kw):
    n = len(tokenize(text))
    return CandidateSummary("d", index, text, (lp,) * n, roles, **kw)


DOC = Document("d", "Parsing has been studied. We train a parser.", "Parsing has been studied.")


class TestFilter:
    def test_long_sentence_removed(self):
        long = cand(" ".join(["word"] * 249) + ".", index=0)
        short = cand("Short one.", index=1)
        res = filter_pool([long, short], 200)
        assert res.kept == [short]
        assert res.removed == [(long, "sentence-length")] and not res.bypassed

    def test_within_limit(self):
        res = filter_pool([cand("A b c.")], 200)
        assert len(res.kept) == 1 and not res.removed

    def test_bypass(self):
        pool = [cand("a b c d.", index=i) for i in range(3)]
        res = filter_pool(pool, 2)
        assert res.bypassed and res.kept == pool

    def test_empty(self):
        with pytest.raises(EmptyPool):
            filter_pool([])


class TestGenTerm:
    def test_examples(self):
        assert gen_term(CandidateSummary("d", 0, "a b", (-1.0, -3.0))) == -2.0
        assert gen_term(CandidateSummary("d", 0, "a b c", (0.0, 0.0, 0.0))) == 0.0
        assert gen_term(CandidateSummary("d", 0, "a", (-0.7,))) == -0.7

    def test_missing(self):
        with pytest.raises(MissingLogprobs):
            gen_term(CandidateSummary("d", 0, "", ()))


class TestRankTerms:
    def test_cooperative_choice(self):
        r = rank_terms("d", [(0, -1.0, -0.2), (1, -0.8, -0.9)], 0.5, 0.5)
        assert [b.candidate_index for b in r] == [0, 1]
        assert r[0].combined == pytest.approx(-0.6) and r[1].combined == pytest.approx(-0.85)
        assert [b.rank for b in r] == [1, 2]

    def test_generator_only(self):
        r = rank_terms("d", [(0, -1.0, -0.2), (1, -0.8, -0.9)], 1.0, 0.0)
        assert top_index(r) == 1

    def test_tie_break_by_gen_then_index(self):
        r = rank_terms("d", [(2, -1.0, -1.0), (1, -1.0, -1.0), (0, -0.5, -1.5)], 0.5, 0.5)
        assert [b.candidate_index for b in r] == [0, 1, 2]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RerankConfig(lambda_gen=0, lambda_disc=0)
        with pytest.raises(ValueError):
            RerankConfig(lambda_gen=-1)
        with pytest.raises(ValueError):
            RerankConfig(objective="style")
        with pytest.raises(ValueError):
            RerankConfig(backend="gpt")


class TestRerank:
    def test_ordering_objective(self):
        good = cand("Parsing has been studied. We train a parser. It outperforms it.", -1.2, 0, (R.BACKGROUND, R.METHOD, R.RESULT))
        bad = cand("It outperforms it. Parsing has been studied.", -1.0, 1, (R.RESULT, R.BACKGROUND))
        ranking = rerank(DOC, [good, bad], RerankConfig(objective="ordering"))
        assert top_index(ranking) == 0
        gen_only = rerank(DOC, [good, bad], RerankConfig(lambda_disc=0, objective="ordering"))
        assert top_index(gen_only) == 1

    def test_builtin_roles(self):
        c = cand("Parsing has been studied. We propose a parser.", index=0)
        r = rerank(DOC, [c], RerankConfig(objective="coverage", backend="builtin"))
        assert r[0].disc_term == pytest.approx(math.log(2 / 5))

    def test_builtin_factuality(self):
        c = cand("Parsing has been studied.")
        r = rerank(DOC, [c], RerankConfig(objective="factuality", backend="builtin"))
        assert r[0].disc_term == 0.0

    def test_error_names_candidate(self):
        c = cand("A b. C d.", index=4)
        with pytest.raises(CandidateScoringError) as e:
            rerank(DOC, [c], RerankConfig(objective="adjacency"))
        assert e.value.index == 4 and "d candidate 4" in str(e.value)

    def test_missing_roles(self):
        with pytest.raises(CandidateScoringError):
            rerank(DOC, [cand("A b.")], RerankConfig(objective="coverage"))

    def test_flags_propagate(self):
        c = cand("One sentence.", adjacency_probs=())
        r = rerank(DOC, [c], RerankConfig(objective="adjacency"), extra_flags=["filter-bypassed"])
        assert set(r[0].flags) == {"neutral", "filter-bypassed"}


class TestNewDecisionRate:
    def test_counts(self):
        base = {d: rank_terms(d, [(0, -1.0, 0.0), (1, -2.0, 0.0)], 1, 0) for d in "abcd"}
        res = dict(base)
        res["b"] = rank_terms("b", [(0, -1.0, -5.0), (1, -2.0, 0.0)], 0.5, 0.5)
        assert new_decision_rate(res, base) == 0.25
        assert new_decision_rate(base, base) == 0.0

    def test_constant_disc_no_change(self):
        terms = [(0, -1.0, -3.0), (1, -2.0, -3.0)]
        assert new_decision_rate({"a": rank_terms("a", terms, 0.5, 0.5)}, {"a": rank_terms("a", terms, 1, 0)}) == 0.0

    def test_mismatch(self):
        r = {"a": rank_terms("a", [(0, -1.0, 0.0)], 1, 0)}
        with pytest.raises(ValueError):
            new_decision_rate(r, {})
        with pytest.raises(ValueError):
            new_decision_rate({}, {})


finite = st.floats(-20, 0, allow_nan=False)
pools = st.lists(st.tuples(finite, finite), min_size=1, max_size=10).map(
    lambda xs: [(i, g, d) for i, (g, d) in enumerate(xs)]
)
lam = st.floats(0.01, 5)


def order(r):
    return [b.candidate_index for b in r]


@given(pools)
def test_lambda_degenerate_is_generator_order(terms):
    r = rank_terms("d", terms, 1.0, 0.0)
    expected = sorted(terms, key=lambda t: (-t[1], t[0]))
    assert order(r) == [t[0] for t in expected]


@given(pools, lam, lam, st.floats(-50, 50))
def test_disc_shift_preserves_argmax(terms, lg, ld, c):
    a = rank_terms("d", terms, lg, ld)
    b = rank_terms("d", [(i, g, d + c) for i, g, d in terms], lg, ld)
    # a shift can only reorder candidates whose combined scores tie within rounding
    best = a[0]
    assert top_index(b) == best.candidate_index or math.isclose(
        b[0].combined - ld * c, best.combined, rel_tol=1e-9, abs_tol=1e-9
    )


@given(pools, lam, lam, st.floats(0.1, 10))
def test_lambda_rescaling_preserves_argmax(terms, lg, ld, k):
    a = rank_terms("d", terms, lg, ld)
    b = rank_terms("d", terms, k * lg, k * ld)
    assert top_index(b) == top_index(a) or math.isclose(b[0].combined / k, a[0].combined, rel_tol=1e-9, abs_tol=1e-9)


@given(pools, st.randoms(use_true_random=False))
def test_permutation_invariant_and_complete(terms, rnd):
    shuffled = list(terms)
    rnd.shuffle(shuffled)
    a = rank_terms("d", terms, 0.5, 0.5)
    b = rank_terms("d", shuffled, 0.5, 0.5)
    assert order(a) == order(b)
    assert sorted(order(a)) == [t[0] for t in terms]
    assert [x.rank for x in a] == list(range(1, len(terms) + 1))
