"""ROUGE, classifier metrics, discourse-connective overlap and the Lede-3 baseline.

ROUGE runs on this package's tokenizer with punctuation tokens dropped;
there is no stemming and no stopword removal, so absolute numbers are
not comparable with the official Perl script.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from coopnet import text as textmod
from coopnet.corpus import Document


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    flags: tuple[str, ...] = ()

    def as_dict(self, digits: int | None = None) -> dict:
        vals = {"p": self.precision, "r": self.recall, "f1": self.f1}
        if digits is not None:
            vals = {k: round(v, digits) for k, v in vals.items()}
        return vals


def f1_score(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _prf(overlap: int, n_cand: int, n_ref: int) -> PRF:
    flags = ("empty-reference",) if n_ref == 0 else ()
    p = overlap / n_cand if n_cand else 0.0
    r = overlap / n_ref if n_ref else 0.0
    return PRF(p, r, f1_score(p, r), flags)


def rouge_tokens(text: str) -> list[str]:
    return textmod.word_surfaces(textmod.tokenize(text))


def rouge_n(candidate: str, reference: str, n: int) -> PRF:
    """Clipped n-gram overlap (multiset counts) between two texts."""
    cand = textmod.ngram_counts(rouge_tokens(candidate), n)
    ref = textmod.ngram_counts(rouge_tokens(reference), n)
    overlap = sum(min(c, ref.get(g, 0)) for g, c in cand.items())
    return _prf(overlap, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> PRF:
    cand = rouge_tokens(candidate)
    ref = rouge_tokens(reference)
    return _prf(lcs_length(cand, ref), len(cand), len(ref))


@dataclass(frozen=True)
class RougeScores:
    r1: PRF
    r2: PRF
    rl: PRF

    def as_dict(self, digits: int | None = None) -> dict:
        return {
            "rouge1": self.r1.as_dict(digits),
            "rouge2": self.r2.as_dict(digits),
            "rougel": self.rl.as_dict(digits),
        }


def rouge(candidate: str, reference: str) -> RougeScores:
    return RougeScores(rouge_n(candidate, reference, 1), rouge_n(candidate, reference, 2), rouge_l(candidate, reference))


# ---------------------------------------------------------------------------
# Classifier metrics


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def from_labels(cls, y_true: Iterable[int], y_pred: Iterable[int]) -> "ConfusionCounts":
        tp = fp = fn = tn = 0
        for t, p in zip(y_true, y_pred, strict=True):
            if t and p:
                tp += 1
            elif p:
                fp += 1
            elif t:
                fn += 1
            else:
                tn += 1
        return cls(tp, fp, fn, tn)


@dataclass(frozen=True)
class ClassifierMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    flags: tuple[str, ...] = ()


def classifier_metrics(counts: ConfusionCounts) -> ClassifierMetrics:
    if counts.total < 1:
        raise ValueError("need at least one example")
    flags = []
    if counts.tp + counts.fp:
        p = counts.tp / (counts.tp + counts.fp)
    else:
        p = 0.0
        flags.append("precision-undefined")
    if counts.tp + counts.fn:
        r = counts.tp / (counts.tp + counts.fn)
    else:
        r = 0.0
        flags.append("recall-undefined")
    acc = (counts.tp + counts.tn) / counts.total
    return ClassifierMetrics(p, r, f1_score(p, r), acc, tuple(flags))


# ---------------------------------------------------------------------------
# Discourse overlap


@dataclass(frozen=True)
class DiscourseOverlapReport:
    overlap1_pct: float
    overlap2_pct: float
    discourse_pct: float

    def as_dict(self, digits: int | None = None) -> dict:
        vals = {"overlap1_pct": self.overlap1_pct, "overlap2_pct": self.overlap2_pct, "discourse_pct": self.discourse_pct}
        if digits is not None:
            vals = {k: round(v, digits) for k, v in vals.items()}
        return vals


DENOMINATORS = ("overlap", "generated")


def discourse_overlap(generated: str, gold: str, denominator: str = "overlap") -> DiscourseOverlapReport:
    """Share of discourse-related n-grams among those shared with the gold summary.

    A unigram is discourse-related if it heads a lexicon entry; a bigram
    if it is the first two tokens of a multi-word entry. ``denominator``
    selects the shared n-gram types (default) or all generated n-gram types.
    """
    if denominator not in DENOMINATORS:
        raise ValueError(f"unknown denominator {denominator!r}")
    lex = textmod.connectives()
    gen = rouge_tokens(generated)
    ref = rouge_tokens(gold)
    pcts = []
    for n in (1, 2):
        heads = lex.heads(n)
        g_grams = textmod.ngrams(gen, n)
        shared = g_grams & textmod.ngrams(ref, n)
        base = shared if denominator == "overlap" else g_grams
        pcts.append(100.0 * len(shared & heads) / max(1, len(base)))
    uni_heads = lex.heads(1)
    discourse = 100.0 * sum((w,) in uni_heads for w in gen) / max(1, len(gen))
    return DiscourseOverlapReport(pcts[0], pcts[1], discourse)


def mean_overlap(reports: Sequence[DiscourseOverlapReport]) -> DiscourseOverlapReport:
    if not reports:
        return DiscourseOverlapReport(0.0, 0.0, 0.0)
    n = len(reports)
    return DiscourseOverlapReport(
        math.fsum(r.overlap1_pct for r in reports) / n,
        math.fsum(r.overlap2_pct for r in reports) / n,
        math.fsum(r.discourse_pct for r in reports) / n,
    )


def mean_rouge(scores: Sequence[RougeScores]) -> RougeScores:
    def avg(parts: list[PRF]) -> PRF:
        n = len(parts)
        if not n:
            return PRF(0.0, 0.0, 0.0)
        return PRF(
            math.fsum(p.precision for p in parts) / n,
            math.fsum(p.recall for p in parts) / n,
            math.fsum(p.f1 for p in parts) / n,
        )

    return RougeScores(avg([s.r1 for s in scores]), avg([s.r2 for s in scores]), avg([s.rl for s in scores]))


# ---------------------------------------------------------------------------
# Baseline and corpus-level evaluation


def lede3(doc: Document) -> str:
    split = textmod.split_sentences(doc.article)
    if not split.boundaries:
        return ""
    k = min(3, len(split))
    return doc.article[split.boundaries[0][0] : split.boundaries[k - 1][1]]


def word_count(text: str) -> int:
    return len(rouge_tokens(text))


def evaluate_system(
    outputs: Mapping[str, str], docs: Sequence[Document], denominator: str = "overlap", digits: int = 4
) -> dict:
    """Per-document and mean ROUGE / discourse scores of one system against reference summaries."""
    refs = {d.id: d.reference_summary for d in docs}
    if set(outputs) != set(refs):
        diff = sorted(set(outputs) ^ set(refs))
        raise ValueError(f"system and reference document ids differ: {diff[:5]}")
    per_doc, rs, ds = [], [], []
    for doc_id in sorted(refs):
        r = rouge(outputs[doc_id], refs[doc_id])
        d = discourse_overlap(outputs[doc_id], refs[doc_id], denominator)
        rs.append(r)
        ds.append(d)
        per_doc.append({"doc_id": doc_id, **r.as_dict(digits), "discourse": d.as_dict(digits)})
    report = mean_rouge(rs).as_dict(digits)
    report["discourse"] = mean_overlap(ds).as_dict(digits)
    report["n_docs"] = len(refs)
    report["per_doc"] = per_doc
    return report
