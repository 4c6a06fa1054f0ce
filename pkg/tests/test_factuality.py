import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopnet.corpus import CandidateSummary, Document
from coopnet.discriminators import EvidenceSpanSet, MissingSaliency, extract_spans, score_factuality
from coopnet.text import tokenize


def cand(text, saliency=None):
    n = len(tokenize(text))
    return CandidateSummary("d", 0, text, (-1.0,) * n, saliency=saliency)


def spans(*items):
    return EvidenceSpanSet(frozenset(tuple(s.split()) for s in items), "external_labels")


DOC = Document("d", "Entropy bounds matter. The biological system works well.", "x")


class TestExtract:
    def test_salient_run(self):
        s = extract_spans(cand("we propose entropy bounds", (0, 0, 1, 1)))
        assert s.spans == {("entropy", "bounds")}

    def test_run_chunking(self):
        s = extract_spans(cand("entropy bounds hold tightly", (1, 1, 1, 1)))
        assert s.spans == {("entropy", "bounds"), ("hold", "tightly")}

    def test_edges_stripped(self):
        s = extract_spans(cand("the entropy of bounds .", (1, 1, 1, 1, 1)))
        # run -> "entropy of bounds"; chunks "entropy of" -> "entropy", "bounds"
        assert s.spans == {("entropy",), ("bounds",)}

    def test_max_k_one(self):
        s = extract_spans(cand("entropy bounds", (1, 1)), max_k=1)
        assert s.spans == {("entropy",), ("bounds",)}

    def test_all_stopwords(self):
        assert len(extract_spans(cand("it is the same of them", (1,) * 6))) == 0
        assert len(extract_spans(cand("it is of them"), "heuristic")) == 0

    def test_heuristic(self):
        s = extract_spans(cand("biological system works"), "heuristic")
        assert s.spans == {
            ("biological",),
            ("system",),
            ("works",),
            ("biological", "system"),
            ("system", "works"),
        }

    def test_missing_saliency(self):
        with pytest.raises(MissingSaliency):
            extract_spans(cand("entropy bounds"))
        with pytest.raises(MissingSaliency):
            extract_spans(cand("entropy bounds", (1,)))

    def test_unknown_source(self):
        with pytest.raises(ValueError):
            extract_spans(cand("a"), "oracle")


class TestScore:
    def test_all_present(self):
        r = score_factuality(cand("x"), DOC, spans("entropy", "biological system"))
        assert r.value == 0.0

    def test_half(self):
        r = score_factuality(cand("x"), DOC, spans("entropy", "quantum system"))
        assert r.value == pytest.approx(math.log(0.5))
        assert r.detail["hallucinated"] == ["quantum system"]

    def test_none(self):
        r = score_factuality(cand("x"), DOC, spans("galaxy", "volcano"))
        assert r.value == math.log(1e-8)
        assert r.value == pytest.approx(-18.4207, abs=1e-4)

    def test_empty(self):
        r = score_factuality(cand("x"), DOC, EvidenceSpanSet(frozenset(), "heuristic"))
        assert r.value == 0.0 and "no-spans" in r.flags

    def test_case_folded(self):
        assert score_factuality(cand("x"), DOC, spans("works well")).value == 0.0


WORDS = ["entropy", "bounds", "biological", "system", "works", "well", "galaxy", "volcano", "sonnet"]


@settings(max_examples=200)
@given(
    st.sets(st.lists(st.sampled_from(WORDS), min_size=1, max_size=2).map(tuple), min_size=1, max_size=6),
    st.lists(st.sampled_from(WORDS), min_size=1, max_size=2).map(tuple),
)
def test_adding_present_span_never_lowers_score(base, extra):
    article_grams = {tuple(tokenize(DOC.article)[i].surface for i in range(j, j + len(extra)))
                     for j in range(len(tokenize(DOC.article)) - len(extra) + 1)}
    before = score_factuality(cand("x"), DOC, EvidenceSpanSet(frozenset(base), "x")).value
    after = score_factuality(cand("x"), DOC, EvidenceSpanSet(frozenset(base | {extra}), "x")).value
    if extra in article_grams:
        assert after >= before
    else:
        assert after <= before
