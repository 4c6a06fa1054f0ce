"""Cooperative candidate selection.

Each surviving candidate gets::

    combined = lambda_gen * mean_token_logprob + lambda_disc * disc_term

where ``disc_term`` is the log-domain score of one discriminator
objective. Candidates are sorted by ``combined`` (descending), then by
``gen_term`` (descending), then by ``index`` (ascending).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional, Sequence

from coopnet.corpus import CandidateSummary, Document
from coopnet.discriminators import (
    OBJECTIVES,
    AdjacencyModel,
    DiscriminatorScore,
    MissingRoles,
    NormalizationSpec,
    RoleRules,
    ScoringError,
    extract_spans,
    label_roles_heuristic,
    score_adjacency,
    score_coverage,
    score_factuality,
    score_ordering,
)

MAX_SENTENCE_TOKENS = 200
BACKENDS = ("external", "builtin")


class EmptyPool(ValueError):
    pass


class MissingLogprobs(ValueError):
    pass


class CandidateScoringError(ScoringError):
    def __init__(self, doc_id: str, index: int, cause: Exception):
        self.doc_id = doc_id
        self.index = index
        self.cause = cause
        super().__init__(f"{doc_id} candidate {index}: {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class RerankConfig:
    """Reranking weights and per-objective backend choice.

    ``backend="external"`` reads labels shipped with each candidate
    (``roles``, ``saliency``, ``adjacency_probs``); ``"builtin"`` uses
    the fallback role labeler, the heuristic span extractor, or the
    logistic adjacency model.
    """

    lambda_gen: float = 0.5
    lambda_disc: float = 0.5
    objective: str = "coverage"
    backend: str = "external"
    max_sentence_tokens: int = MAX_SENTENCE_TOKENS
    ordering: NormalizationSpec = field(default_factory=NormalizationSpec)
    max_span_len: int = 2

    def __post_init__(self) -> None:
        if self.lambda_gen < 0 or self.lambda_disc < 0:
            raise ValueError("lambdas must be >= 0")
        if not self.lambda_gen + self.lambda_disc > 0:
            raise ValueError("lambda_gen + lambda_disc must be > 0")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.max_sentence_tokens < 1:
            raise ValueError("max_sentence_tokens must be >= 1")


@dataclass(frozen=True)
class ScoreBreakdown:
    doc_id: str
    candidate_index: int
    gen_term: float
    disc_term: float
    combined: float
    rank: int
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "candidate_index": self.candidate_index,
            "gen_term": self.gen_term,
            "disc_term": self.disc_term,
            "combined": self.combined,
            "rank": self.rank,
            "flags": list(self.flags),
        }


class FilterResult(NamedTuple):
    kept: list[CandidateSummary]
    removed: list[tuple[CandidateSummary, str]]
    bypassed: bool


def longest_sentence(candidate: CandidateSummary) -> int:
    return max((len(s) for s in candidate.split.sentences), default=0)


def filter_pool(pool: Sequence[CandidateSummary], max_sentence_tokens: int = MAX_SENTENCE_TOKENS) -> FilterResult:
    """Drop candidates with any sentence over ``max_sentence_tokens`` tokens.

    If that would empty the pool, nothing is dropped and ``bypassed`` is set.
    """
    if not pool:
        raise EmptyPool("candidate pool is empty")
    kept, removed = [], []
    for cand in pool:
        if longest_sentence(cand) > max_sentence_tokens:
            removed.append((cand, "sentence-length"))
        else:
            kept.append(cand)
    if not kept:
        return FilterResult(list(pool), [], True)
    return FilterResult(kept, removed, False)


def gen_term(candidate: CandidateSummary) -> float:
    lps = candidate.token_logprobs
    if not lps:
        raise MissingLogprobs(f"{candidate.doc_id} candidate {candidate.index} has no token log-probabilities")
    return math.fsum(lps) / len(lps)


def _roles_for(candidate: CandidateSummary, config: RerankConfig, rules: Optional[RoleRules]):
    if config.backend == "builtin":
        return label_roles_heuristic(candidate, rules)
    if candidate.roles is None:
        raise MissingRoles(f"candidate {candidate.doc_id}#{candidate.index} has no roles")
    return list(candidate.roles)


def disc_score(
    candidate: CandidateSummary,
    doc: Document,
    config: RerankConfig,
    model: Optional[AdjacencyModel] = None,
    rules: Optional[RoleRules] = None,
) -> DiscriminatorScore:
    obj = config.objective
    if obj == "coverage":
        return score_coverage(_roles_for(candidate, config, rules))
    if obj == "ordering":
        return score_ordering(_roles_for(candidate, config, rules), config.ordering)
    if obj == "adjacency":
        return score_adjacency(candidate, config.backend, model)
    source = "heuristic" if config.backend == "builtin" else "external_labels"
    spans = extract_spans(candidate, source, config.max_span_len)
    return score_factuality(candidate, doc, spans)


def rank_key(b: ScoreBreakdown) -> tuple:
    return (-b.combined, -b.gen_term, b.candidate_index)


def rank_terms(
    doc_id: str,
    terms: Sequence[tuple[int, float, float]],
    lambda_gen: float,
    lambda_disc: float,
    flags: Optional[Mapping[int, Sequence[str]]] = None,
) -> list[ScoreBreakdown]:
    """Rank ``(index, gen_term, disc_term)`` triples; ranks start at 1."""
    flags = flags or {}
    rows = [
        ScoreBreakdown(doc_id, i, g, d, lambda_gen * g + lambda_disc * d, 0, tuple(sorted(flags.get(i, ()))))
        for i, g, d in terms
    ]
    rows.sort(key=rank_key)
    return [
        ScoreBreakdown(r.doc_id, r.candidate_index, r.gen_term, r.disc_term, r.combined, n, r.flags)
        for n, r in enumerate(rows, 1)
    ]


def rerank(
    doc: Document,
    pool: Sequence[CandidateSummary],
    config: RerankConfig,
    model: Optional[AdjacencyModel] = None,
    rules: Optional[RoleRules] = None,
    extra_flags: Sequence[str] = (),
) -> list[ScoreBreakdown]:
    terms, flags = [], {}
    for cand in pool:
        try:
            g = gen_term(cand)
            d = disc_score(cand, doc, config, model, rules)
        except (ScoringError, MissingLogprobs, ValueError) as e:
            raise CandidateScoringError(doc.id, cand.index, e) from e
        terms.append((cand.index, g, d.value))
        flags[cand.index] = set(d.flags) | set(extra_flags)
    return rank_terms(doc.id, terms, config.lambda_gen, config.lambda_disc, flags)


def top_index(ranking: Sequence[ScoreBreakdown]) -> int:
    return min(ranking, key=lambda b: b.rank).candidate_index


def new_decision_rate(
    results: Mapping[str, Sequence[ScoreBreakdown]], baseline: Mapping[str, Sequence[ScoreBreakdown]]
) -> float:
    """Fraction of documents whose rank-1 candidate differs from the generator-only choice."""
    if not results:
        raise ValueError("need at least one document")
    if set(results) != set(baseline):
        missing = sorted(set(results) ^ set(baseline))
        raise ValueError(f"document sets differ: {missing[:5]}")
    changed = sum(top_index(results[d]) != top_index(baseline[d]) for d in results)
    return changed / len(results)
