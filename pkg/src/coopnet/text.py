"""Tokenization, sentence splitting, n-grams and the bundled lexicons.

Everything downstream (scorers, ROUGE, sampling) works on the word-level
units produced here. Tokens are case-folded runs of letters/digits with
internal hyphens kept (``co-opnet``); every other non-space character is
a token of its own. Offsets are ``str`` indices, so
``text[tok.start:tok.end]`` is the original slice.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence, Union

_TOKEN_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*|[^\w\s]|_")
_WORD_RE = re.compile(r"[^\W_]")

TERMINATORS = frozenset(".!?")
_CLOSERS = frozenset("\"')]}”’")
_OPENERS = "\"'([{“‘"

# Lowercased whitespace-delimited chunks whose final period never ends a sentence.
ABBREVIATIONS = frozenset(
    {
        "e.g.", "i.e.", "al.", "cf.", "vs.", "fig.", "figs.", "eq.", "eqs.",
        "sec.", "no.", "approx.", "resp.", "dr.", "mr.", "mrs.", "ms.",
        "prof.", "st.", "jr.", "ref.", "refs.", "tab.", "vol.", "pp.",
    }
)


@dataclass(frozen=True)
class Token:
    surface: str
    is_stopword: bool
    start: int
    end: int

    @property
    def char_span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def is_word(self) -> bool:
        """False for punctuation-only tokens."""
        return _WORD_RE.match(self.surface) is not None


TokenLike = Union[Token, str]


def surface(tok: TokenLike) -> str:
    return tok.surface if isinstance(tok, Token) else tok.casefold()


def is_word(tok: TokenLike) -> bool:
    return _WORD_RE.match(surface(tok)) is not None


# ---------------------------------------------------------------------------
# Lexicons


def normalize_phrase(phrase: str) -> str:
    """Case-fold and re-space a phrase the way the tokenizer would see it."""
    return " ".join(m.group(0).casefold() for m in _TOKEN_RE.finditer(phrase))


@dataclass(frozen=True)
class Lexicon:
    kind: str
    entries: frozenset[str]

    def __post_init__(self) -> None:
        if self.kind not in ("stopword", "connective"):
            raise ValueError(f"unknown lexicon kind {self.kind!r}")
        if not self.entries:
            raise ValueError(f"{self.kind} lexicon is empty")

    def __contains__(self, phrase: object) -> bool:
        return isinstance(phrase, str) and normalize_phrase(phrase) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    @cached_property
    def phrases(self) -> frozenset[tuple[str, ...]]:
        return frozenset(tuple(e.split(" ")) for e in self.entries)

    @cached_property
    def max_phrase_len(self) -> int:
        return max(len(p) for p in self.phrases)

    def heads(self, n: int) -> frozenset[tuple[str, ...]]:
        """First ``n`` tokens of every entry with at least ``n`` tokens."""
        return frozenset(p[:n] for p in self.phrases if len(p) >= n)


def _parse_lexicon(lines: Iterable[str], kind: str) -> Lexicon:
    entries = set()
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            entries.add(line.casefold() if kind == "stopword" else normalize_phrase(line))
    return Lexicon(kind, frozenset(entries))


def load_lexicon(path: Union[str, Path], kind: str) -> Lexicon:
    with open(path, encoding="utf-8") as f:
        return _parse_lexicon(f, kind)


def _bundled(name: str, kind: str) -> Lexicon:
    data = resources.files("coopnet").joinpath("data", name).read_text(encoding="utf-8")
    return _parse_lexicon(data.splitlines(), kind)


_active: dict[str, Lexicon] = {}


def configure(stopwords: Union[str, Path, None] = None, connectives: Union[str, Path, None] = None) -> None:
    """Replace the active lexicons. Call once at startup; ``None`` restores the bundled file."""
    _active["stopword"] = load_lexicon(stopwords, "stopword") if stopwords else _bundled("stopwords.txt", "stopword")
    _active["connective"] = (
        load_lexicon(connectives, "connective") if connectives else _bundled("connectives.txt", "connective")
    )


def stopwords() -> Lexicon:
    if "stopword" not in _active:
        _active["stopword"] = _bundled("stopwords.txt", "stopword")
    return _active["stopword"]


def connectives() -> Lexicon:
    if "connective" not in _active:
        _active["connective"] = _bundled("connectives.txt", "connective")
    return _active["connective"]


def is_connective(phrase: str) -> bool:
    # Empty input is answered, not rejected.
    if not phrase or not phrase.strip():
        return False
    return phrase in connectives()


# ---------------------------------------------------------------------------
# Tokens and sentences


def tokenize(text: str) -> list[Token]:
    stop = stopwords().entries
    out = []
    for m in _TOKEN_RE.finditer(text):
        s = m.group(0).casefold()
        out.append(Token(s, s in stop, m.start(), m.end()))
    return out


def word_surfaces(tokens: Sequence[TokenLike]) -> list[str]:
    """Case-folded surfaces of the non-punctuation tokens."""
    return [surface(t) for t in tokens if is_word(t)]


@dataclass(frozen=True)
class SentenceSplit:
    text: str
    sentences: list[list[Token]]
    boundaries: list[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def sentence_texts(self) -> list[str]:
        return [self.text[a:b] for a, b in self.boundaries]


def _is_abbreviation(text: str, period_at: int) -> bool:
    start = period_at
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    chunk = text[start : period_at + 1].lstrip(_OPENERS).casefold()
    return chunk in ABBREVIATIONS


def split_sentences(text: str, require_capital: bool = True) -> SentenceSplit:
    """Split at ``. ! ?`` followed by whitespace and a capital, or by end of text.

    Closing quotes/brackets directly after the terminator stay with the
    sentence. With ``require_capital=False`` any whitespace after a
    terminator is a boundary (useful for uncased model output).
    """
    tokens = tokenize(text)
    sentences: list[list[Token]] = []
    current: list[Token] = []
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        current.append(tok)
        if tok.surface in TERMINATORS:
            # absorb a run like '?!' or '."' with no whitespace in between
            j = i
            while (
                j + 1 < n
                and tokens[j + 1].start == tokens[j].end
                and (tokens[j + 1].surface in TERMINATORS or tokens[j + 1].surface in _CLOSERS)
            ):
                j += 1
                current.append(tokens[j])
            last_term = max(k for k in range(i, j + 1) if tokens[k].surface in TERMINATORS)
            guarded = tokens[last_term].surface == "." and _is_abbreviation(text, tokens[last_term].start)
            if j + 1 == n:
                boundary = True
            else:
                nxt = tokens[j + 1]
                gap = text[tokens[j].end : nxt.start]
                boundary = (
                    not guarded
                    and gap != ""
                    and gap.isspace()
                    and (not require_capital or text[nxt.start].isupper())
                )
            if boundary:
                sentences.append(current)
                current = []
            i = j + 1
            continue
        i += 1
    if current:
        sentences.append(current)
    boundaries = [(s[0].start, s[-1].end) for s in sentences]
    return SentenceSplit(text, sentences, boundaries)


def ngrams(tokens: Sequence[TokenLike], n: int) -> frozenset[tuple[str, ...]]:
    """Deduplicated contiguous ``n``-token windows over case-folded surfaces."""
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    surf = [surface(t) for t in tokens]
    return frozenset(tuple(surf[i : i + n]) for i in range(len(surf) - n + 1))


def ngram_counts(tokens: Sequence[TokenLike], n: int) -> dict[tuple[str, ...], int]:
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    surf = [surface(t) for t in tokens]
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(surf) - n + 1):
        g = tuple(surf[i : i + n])
        counts[g] = counts.get(g, 0) + 1
    return counts


def match_connectives(tokens: Sequence[TokenLike]) -> list[tuple[int, int, str]]:
    """Non-overlapping longest-match connective occurrences as ``(start, end, phrase)`` token indices."""
    lex = connectives()
    surf = [surface(t) for t in tokens]
    out = []
    i = 0
    while i < len(surf):
        for length in range(min(lex.max_phrase_len, len(surf) - i), 0, -1):
            cand = tuple(surf[i : i + length])
            if cand in lex.phrases:
                out.append((i, i + length, " ".join(cand)))
                i += length
                break
        else:
            i += 1
    return out


def starts_with_connective(tokens: Sequence[TokenLike]) -> bool:
    matches = match_connectives(tokens)
    return bool(matches) and matches[0][0] == 0
