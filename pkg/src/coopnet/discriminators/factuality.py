"""Factuality discriminator: are a summary's salient spans present in the article?"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from coopnet import text as textmod
from coopnet.corpus import CandidateSummary, Document
from coopnet.discriminators.scores import DiscriminatorScore, MissingSaliency, clamped_log

SOURCES = ("external_labels", "heuristic")


@dataclass(frozen=True)
class EvidenceSpanSet:
    spans: frozenset[tuple[str, ...]]
    source: str

    def __len__(self) -> int:
        return len(self.spans)

    @property
    def orders(self) -> set[int]:
        return {len(s) for s in self.spans}


def _is_content(tok: textmod.Token) -> bool:
    return tok.is_word and not tok.is_stopword


def _strip(run: Sequence[textmod.Token]) -> Sequence[textmod.Token]:
    lo, hi = 0, len(run)
    while lo < hi and not _is_content(run[lo]):
        lo += 1
    while hi > lo and not _is_content(run[hi - 1]):
        hi -= 1
    return run[lo:hi]


def _runs(tokens: Sequence[textmod.Token], labels: Sequence[int]) -> list[list[textmod.Token]]:
    runs, cur = [], []
    for tok, lab in zip(tokens, labels):
        if lab:
            cur.append(tok)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


def extract_spans(candidate: CandidateSummary, source: str = "external_labels", max_k: int = 2) -> EvidenceSpanSet:
    """Salient spans ``F(g)`` of a candidate.

    ``external_labels``: maximal runs of saliency-1 tokens, each cut into
    consecutive chunks of at most ``max_k`` tokens; stopwords and
    punctuation are trimmed from every run and chunk edge, and chunks
    left empty are dropped. ``heuristic``: every content unigram and every
    bigram of two adjacent content tokens.
    """
    if max_k < 1:
        raise ValueError("max_k must be >= 1")
    tokens = candidate.tokens
    spans: set[tuple[str, ...]] = set()
    if source == "external_labels":
        if candidate.saliency is None or len(candidate.saliency) != len(tokens):
            raise MissingSaliency(f"candidate {candidate.doc_id}#{candidate.index} has no usable saliency labels")
        for run in _runs(tokens, candidate.saliency):
            run = _strip(run)
            for i in range(0, len(run), max_k):
                chunk = _strip(run[i : i + max_k])
                if chunk:
                    spans.add(tuple(t.surface for t in chunk))
    elif source == "heuristic":
        for i, tok in enumerate(tokens):
            if _is_content(tok):
                spans.add((tok.surface,))
                if max_k >= 2 and i + 1 < len(tokens) and _is_content(tokens[i + 1]):
                    spans.add((tok.surface, tokens[i + 1].surface))
    else:
        raise ValueError(f"unknown span source {source!r}")
    return EvidenceSpanSet(frozenset(spans), source)


def article_ngrams(article: str, orders: set[int]) -> dict[int, frozenset[tuple[str, ...]]]:
    toks = textmod.tokenize(article)
    return {k: textmod.ngrams(toks, k) for k in orders}


def score_factuality(candidate: CandidateSummary, article: Document, spans: EvidenceSpanSet) -> DiscriminatorScore:
    """Log fraction of spans found verbatim (as case-folded k-grams) in the article.

    An empty span set asserts nothing checkable and scores 0, flagged ``no-spans``.
    """
    if not spans.spans:
        return DiscriminatorScore("factuality", 0.0, {"matched": 0, "total": 0}, frozenset({"no-spans"}))
    grams = article_ngrams(article.article, spans.orders)
    missing = sorted(" ".join(s) for s in spans.spans if s not in grams[len(s)])
    total = len(spans.spans)
    matched = total - len(missing)
    detail = {"matched": matched, "total": total, "hallucinated": missing}
    return DiscriminatorScore("factuality", clamped_log(matched / total), detail)
