"""Documents, candidate pools, JSONL ingestion and adjacency pair sampling."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

from coopnet import text as textmod
from coopnet.rng import SplitMix64

log = logging.getLogger(__name__)

ARTICLE_MAX_TOKENS = 800
SUMMARY_MAX_TOKENS = 200
POOL_SIZE = 10
MIN_PAIR_SENTENCES = 5


class DiscourseRole(str, enum.Enum):
    BACKGROUND = "BACKGROUND"
    METHOD = "METHOD"
    OBJECTIVE = "OBJECTIVE"
    RESULT = "RESULT"
    OTHER = "OTHER"

    @classmethod
    def parse(cls, value: str) -> "DiscourseRole":
        try:
            return cls(value.strip().upper())
        except (ValueError, AttributeError):
            raise ValueError(f"unknown discourse role {value!r}") from None


class CorpusError(ValueError):
    """Base class for ingestion errors; ``line_no`` is 1-based when known."""

    def __init__(self, message: str, line_no: Optional[int] = None, path: Optional[str] = None):
        self.line_no = line_no
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line_no is not None:
            where += f"{line_no}:"
        super().__init__(f"{where} {message}" if where else message)


class MalformedLine(CorpusError):
    pass


class DuplicateId(CorpusError):
    def __init__(self, doc_id: str, line_no=None, path=None):
        self.doc_id = doc_id
        super().__init__(f"duplicate document id {doc_id!r}", line_no, path)


class MissingField(CorpusError):
    def __init__(self, name: str, line_no=None, path=None):
        self.name = name
        super().__init__(f"missing field {name!r}", line_no, path)


class UnknownDoc(CorpusError):
    def __init__(self, doc_id: str, line_no=None, path=None):
        self.doc_id = doc_id
        super().__init__(f"candidate references unknown document {doc_id!r}", line_no, path)


class LengthMismatch(CorpusError):
    def __init__(self, name: str, expected: int, got: int, line_no=None, path=None):
        self.name = name
        self.expected = expected
        self.got = got
        super().__init__(f"{name}: expected {expected} values, got {got}", line_no, path)


@dataclass(frozen=True)
class Document:
    id: str
    article: str
    reference_summary: str
    truncated: bool = False

    def to_json(self) -> dict:
        return {"id": self.id, "article": self.article, "reference_summary": self.reference_summary}


@dataclass(frozen=True)
class CandidateSummary:
    doc_id: str
    index: int
    text: str
    token_logprobs: tuple[float, ...]
    roles: Optional[tuple[DiscourseRole, ...]] = None
    saliency: Optional[tuple[int, ...]] = None
    adjacency_probs: Optional[tuple[float, ...]] = None

    @cached_property
    def tokens(self) -> list[textmod.Token]:
        return textmod.tokenize(self.text)

    @cached_property
    def split(self) -> textmod.SentenceSplit:
        return textmod.split_sentences(self.text)

    @property
    def sentences(self) -> list[str]:
        return self.split.sentence_texts

    def validate(self) -> None:
        """Raise ``LengthMismatch``/``ValueError`` if per-token or per-sentence arrays disagree with the text."""
        n_tok = len(self.tokens)
        n_sent = len(self.split)
        if len(self.token_logprobs) != n_tok:
            raise LengthMismatch("token_logprobs", n_tok, len(self.token_logprobs))
        if any(lp > 0 for lp in self.token_logprobs):
            raise ValueError("token_logprobs must all be <= 0")
        if self.roles is not None and len(self.roles) != n_sent:
            raise LengthMismatch("roles", n_sent, len(self.roles))
        if self.saliency is not None:
            if len(self.saliency) != n_tok:
                raise LengthMismatch("saliency", n_tok, len(self.saliency))
            if any(v not in (0, 1) for v in self.saliency):
                raise ValueError("saliency labels must be 0 or 1")
        if self.adjacency_probs is not None:
            if len(self.adjacency_probs) != max(0, n_sent - 1):
                raise LengthMismatch("adjacency_probs", max(0, n_sent - 1), len(self.adjacency_probs))
            if any(not 0.0 <= p <= 1.0 for p in self.adjacency_probs):
                raise ValueError("adjacency_probs must lie in [0, 1]")

    def to_json(self) -> dict:
        d: dict = {
            "doc_id": self.doc_id,
            "index": self.index,
            "text": self.text,
            "token_logprobs": list(self.token_logprobs),
        }
        if self.roles is not None:
            d["roles"] = [r.value for r in self.roles]
        if self.saliency is not None:
            d["saliency"] = list(self.saliency)
        if self.adjacency_probs is not None:
            d["adjacency_probs"] = list(self.adjacency_probs)
        return d


@dataclass(frozen=True)
class SentencePairExample:
    first: str
    second: str
    label: int
    source_doc: str

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")

    def to_json(self) -> dict:
        return {"first": self.first, "second": self.second, "label": self.label, "source_doc": self.source_doc}


# ---------------------------------------------------------------------------
# JSONL


def iter_jsonl(path: Union[str, Path]) -> Iterator[tuple[int, dict]]:
    """Yield ``(line_no, object)``; blank lines and ``#`` comment lines are skipped."""
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as e:
                raise MalformedLine(f"invalid JSON ({e.msg})", line_no, str(path)) from None
            if not isinstance(obj, dict):
                raise MalformedLine("expected a JSON object", line_no, str(path))
            yield line_no, obj


def dump_jsonl(rows: Iterable[dict], header: Optional[str] = None) -> str:
    lines = []
    if header is not None:
        lines.append(f"# {header}")
    lines.extend(json.dumps(r, ensure_ascii=False, sort_keys=False) for r in rows)
    return "".join(line + "\n" for line in lines)


def _require(obj: dict, name: str, kind: type, line_no: int, path: str):
    if name not in obj:
        raise MissingField(name, line_no, path)
    value = obj[name]
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise MalformedLine(f"field {name!r} has wrong type", line_no, path)
    return value


def parse_document(obj: dict, line_no: int = 0, path: str = "<memory>") -> Document:
    doc_id = _require(obj, "id", str, line_no, path)
    article = _require(obj, "article", str, line_no, path)
    summary = _require(obj, "reference_summary", str, line_no, path)
    if not article.strip():
        raise MalformedLine("article is empty", line_no, path)
    return Document(doc_id, article, summary)


def load_documents(path: Union[str, Path]) -> list[Document]:
    docs = []
    seen: set[str] = set()
    for line_no, obj in iter_jsonl(path):
        doc = parse_document(obj, line_no, str(path))
        if doc.id in seen:
            raise DuplicateId(doc.id, line_no, str(path))
        seen.add(doc.id)
        docs.append(doc)
    return docs


def _optional_list(obj: dict, name: str, line_no: int, path: str) -> Optional[list]:
    value = obj.get(name)
    if value is None:
        return None
    if not isinstance(value, list):
        raise MalformedLine(f"field {name!r} must be a list", line_no, path)
    return value


def parse_candidate(obj: dict, line_no: int = 0, path: str = "<memory>") -> CandidateSummary:
    doc_id = _require(obj, "doc_id", str, line_no, path)
    index = _require(obj, "index", int, line_no, path)
    if index < 0:
        raise MalformedLine("index must be >= 0", line_no, path)
    text = _require(obj, "text", str, line_no, path)
    logprobs = _require(obj, "token_logprobs", list, line_no, path)
    try:
        lp = tuple(float(x) for x in logprobs)
        roles = _optional_list(obj, "roles", line_no, path)
        roles_t = None if roles is None else tuple(DiscourseRole.parse(r) for r in roles)
        sal = _optional_list(obj, "saliency", line_no, path)
        sal_t = None if sal is None else tuple(int(v) for v in sal)
        adj = _optional_list(obj, "adjacency_probs", line_no, path)
        adj_t = None if adj is None else tuple(float(p) for p in adj)
    except (TypeError, ValueError) as e:
        raise MalformedLine(str(e), line_no, path) from None
    cand = CandidateSummary(doc_id, index, text, lp, roles_t, sal_t, adj_t)
    try:
        cand.validate()
    except LengthMismatch as e:
        raise LengthMismatch(e.name, e.expected, e.got, line_no, path) from None
    except ValueError as e:
        raise MalformedLine(str(e), line_no, path) from None
    return cand


def load_candidates(path: Union[str, Path], docs: Sequence[Document]) -> dict[str, list[CandidateSummary]]:
    """Pools keyed by document id, each sorted by ``index``; documents without candidates map to ``[]``."""
    known = {d.id for d in docs}
    pools: dict[str, list[CandidateSummary]] = {d.id: [] for d in docs}
    seen: set[tuple[str, int]] = set()
    for line_no, obj in iter_jsonl(path):
        cand = parse_candidate(obj, line_no, str(path))
        if cand.doc_id not in known:
            raise UnknownDoc(cand.doc_id, line_no, str(path))
        key = (cand.doc_id, cand.index)
        if key in seen:
            raise MalformedLine(f"duplicate candidate index {cand.index} for {cand.doc_id!r}", line_no, str(path))
        seen.add(key)
        pools[cand.doc_id].append(cand)
    for pool in pools.values():
        pool.sort(key=lambda c: c.index)
    return pools


def load_pairs(path: Union[str, Path]) -> list[SentencePairExample]:
    pairs = []
    for line_no, obj in iter_jsonl(path):
        first = _require(obj, "first", str, line_no, str(path))
        second = _require(obj, "second", str, line_no, str(path))
        label = _require(obj, "label", int, line_no, str(path))
        source = obj.get("source_doc", "")
        try:
            pairs.append(SentencePairExample(first, second, label, str(source)))
        except ValueError as e:
            raise MalformedLine(str(e), line_no, str(path)) from None
    return pairs


# ---------------------------------------------------------------------------
# Truncation and pair sampling


def _truncate_text(s: str, limit: int) -> tuple[str, bool]:
    toks = textmod.tokenize(s)
    if len(toks) <= limit:
        return s, False
    return s[: toks[limit - 1].end], True


def truncate_inputs(
    doc: Document, article_max: int = ARTICLE_MAX_TOKENS, summary_max: int = SUMMARY_MAX_TOKENS
) -> Document:
    if article_max < 1 or summary_max < 1:
        raise ValueError("truncation limits must be >= 1")
    article, cut_a = _truncate_text(doc.article, article_max)
    summary, cut_s = _truncate_text(doc.reference_summary, summary_max)
    if not (cut_a or cut_s):
        return doc
    return replace(doc, article=article, reference_summary=summary, truncated=True)


class SkippedDoc(NamedTuple):
    doc_id: str
    reason: str


class PairSample(NamedTuple):
    pairs: list[SentencePairExample]
    skipped: list[SkippedDoc]


def sample_pairs(docs: Sequence[Document], seed: int, per_doc: int = 1) -> PairSample:
    """Draw balanced adjacent / non-adjacent sentence pairs from reference summaries.

    Each draw picks an anchor sentence, pairs it with a uniformly chosen
    neighbour (label 1) and with a uniformly chosen sentence at distance
    >= 2 (label 0). Summaries with fewer than five sentences are skipped.
    Candidates whose text equals the anchor's are excluded; a draw with
    no valid partner on either side is dropped whole to keep balance.
    """
    if per_doc < 1:
        raise ValueError("per_doc must be >= 1")
    rng = SplitMix64(seed)
    pairs: list[SentencePairExample] = []
    skipped: list[SkippedDoc] = []
    for doc in docs:
        sents = textmod.split_sentences(doc.reference_summary).sentence_texts
        n = len(sents)
        if n < MIN_PAIR_SENTENCES:
            skipped.append(SkippedDoc(doc.id, f"{n} sentences < {MIN_PAIR_SENTENCES}"))
            continue
        for _ in range(per_doc):
            u = rng.randbelow(n)
            anchor = sents[u]
            near = [v for v in (u - 1, u + 1) if 0 <= v < n and sents[v] != anchor]
            far = [v for v in range(n) if abs(v - u) >= 2 and sents[v] != anchor]
            if not near or not far:
                skipped.append(SkippedDoc(doc.id, "no distinct partner sentence"))
                continue
            pos = rng.choice(near)
            neg = rng.choice(far)
            pairs.append(SentencePairExample(anchor, sents[pos], 1, doc.id))
            pairs.append(SentencePairExample(anchor, sents[neg], 0, doc.id))
    for s in skipped:
        log.warning("skipped %s: %s", s.doc_id, s.reason)
    return PairSample(pairs, skipped)
