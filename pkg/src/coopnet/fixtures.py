"""Deterministic synthetic fixtures shipped under ``coopnet/data/fixtures``.

* ``docs.jsonl`` / ``candidates.jsonl``: 20 documents with 10 candidates
  each, carrying roles, saliency labels and adjacency probabilities so
  every objective runs with the external backend. Candidate 9 of the
  first document has a run-on sentence that the length filter removes.
* ``pairs.jsonl``: linearly separable adjacency pairs; a pair is labelled
  1 exactly when the content-word Jaccard overlap exceeds 0.5.
* ``flip_docs.jsonl`` / ``flip_candidates.jsonl``: 10 documents where the
  ordering objective changes the top candidate in exactly 3 (``FLIP_DOCS``).

Regenerate with ``python -m coopnet.fixtures [OUT_DIR]``.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

from coopnet import text as textmod
from coopnet.corpus import CandidateSummary, DiscourseRole, Document, SentencePairExample, dump_jsonl
from coopnet.rng import SplitMix64

R = DiscourseRole

TOPICS = [
    ("semantic parsing", "parser", "treebank", ["grammar", "lexicon", "derivation", "semantics", "annotation"]),
    ("protein folding", "predictor", "structure database", ["residue", "contact", "energy", "backbone", "chain"]),
    ("speech recognition", "acoustic model", "broadcast corpus", ["phoneme", "decoder", "lattice", "accent", "noise"]),
    ("gene regulation", "network model", "expression atlas", ["promoter", "enhancer", "transcript", "motif", "cell"]),
    ("machine translation", "translation model", "parallel corpus", ["alignment", "vocabulary", "decoder", "fluency", "reordering"]),
    ("image segmentation", "segmenter", "biomedical scans", ["boundary", "region", "pixel", "contour", "mask"]),
    ("question answering", "reader", "trivia benchmark", ["passage", "retrieval", "evidence", "span", "answer"]),
    ("population dynamics", "growth model", "field survey", ["species", "predator", "habitat", "migration", "census"]),
    ("entity linking", "linker", "news archive", ["mention", "knowledge base", "candidate", "context", "entity"]),
    ("neural coding", "encoding model", "spike recordings", ["neuron", "stimulus", "firing rate", "cortex", "synapse"]),
]
HALLUCINATED = ["quantum annealing", "blockchain", "galaxy", "turbine", "volcano", "sonnet", "glacier", "cathedral"]
BASELINES = ["strong baselines", "prior systems", "rule-based methods", "the previous state of the art"]
ADJS = ["novel", "simple", "scalable", "robust", "unified"]

TEMPLATES = {
    R.BACKGROUND: [
        "{Topic} has been studied extensively in recent years.",
        "Prior work on {topic} relies heavily on hand-built {w1} features.",
        "Modeling the {w1} and the {w2} remains a central challenge for {topic}.",
    ],
    R.OBJECTIVE: [
        "We propose a {adj} {method} for {topic}.",
        "In this work we present a {method} that captures {w1} information.",
        "Our goal is to improve {topic} without additional {w2} annotation.",
    ],
    R.METHOD: [
        "We train the {method} on the {data} using {w1} and {w2} signals.",
        "The {method} is based on a joint model of {w1} and {w3}.",
        "We use a {w2} encoder to represent each {w3}.",
    ],
    R.RESULT: [
        "Our {method} outperforms {baseline} on the {data}.",
        "Results show that modeling {w1} improves {topic} considerably.",
        "We find that the {w3} component achieves the largest gains.",
    ],
    R.OTHER: [
        "The code and the {data} are publicly available.",
        "Further details appear in the supplementary material.",
    ],
}

REFERENCE_ROLES = [R.BACKGROUND, R.OBJECTIVE, R.METHOD, R.METHOD, R.RESULT, R.RESULT]
FLIP_DOCS = ("flip02", "flip05", "flip07")


def _cap(s: str) -> str:
    return s[0].upper() + s[1:]


def _fill(rng: SplitMix64, role: DiscourseRole, topic: tuple, hallucinate: bool) -> str:
    name, method, data, words = topic
    pool = list(words)
    if hallucinate:
        pool[rng.randbelow(len(pool))] = rng.choice(HALLUCINATED)
    picks = [pool[rng.randbelow(len(pool))] for _ in range(3)]
    template = rng.choice(TEMPLATES[role])
    return template.format(
        Topic=_cap(name),
        topic=name,
        method=method,
        data=data,
        adj=rng.choice(ADJS),
        baseline=rng.choice(BASELINES),
        w1=picks[0],
        w2=picks[1],
        w3=picks[2],
    )


def _article(rng: SplitMix64, topic: tuple) -> str:
    name, method, data, words = topic
    sents = [
        f"{_cap(name)} is a long-standing problem in science.",
        f"Existing approaches to {name} depend on the {words[0]} and the {words[1]}.",
        f"This paper studies how a {method} can use the {words[2]} and the {words[3]}.",
        f"We train the {method} on the {data}.",
        f"The {words[4]} is modeled jointly with the {words[0]}.",
        f"Results show that the {method} outperforms strong baselines on the {data}.",
    ]
    extra = [
        f"Earlier studies of the {words[1]} focused on small samples.",
        f"The {words[3]} provides complementary evidence for the {words[2]}.",
        f"A careful analysis of the {words[4]} reveals consistent trends.",
    ]
    for s in extra:
        if rng.random() < 0.7:
            sents.insert(1 + rng.randbelow(len(sents) - 1), s)
    return " ".join(sents)


def _saliency(tokens: list[textmod.Token], salient: set[str]) -> list[int]:
    return [1 if (t.is_word and not t.is_stopword and t.surface in salient) else 0 for t in tokens]


def _candidate(rng: SplitMix64, doc_id: str, index: int, roles: list[DiscourseRole], topic: tuple, runon: bool = False):
    sents = [_fill(rng, r, topic, hallucinate=rng.random() < 0.3) for r in roles]
    if runon:
        filler = " and ".join(f"the {w}" for w in (topic[3] * 30))
        sents[-1] = sents[-1][:-1] + " with " + filler + "."
    text = " ".join(sents)
    tokens = textmod.tokenize(text)
    salient = {w for grp in (topic[3], HALLUCINATED) for phrase in grp for w in phrase.split()}
    salient |= set(topic[0].split()) | set(topic[2].split())
    n_sent = len(textmod.split_sentences(text))
    assert n_sent == len(roles), (text, roles)
    return CandidateSummary(
        doc_id,
        index,
        text,
        tuple(-round(rng.uniform(0.05, 4.0), 4) for _ in tokens),
        tuple(roles),
        tuple(_saliency(tokens, salient)),
        tuple(round(rng.uniform(0.05, 0.99), 4) for _ in range(n_sent - 1)),
    )


def _random_roles(rng: SplitMix64) -> list[DiscourseRole]:
    n = 2 + rng.randbelow(6)
    if rng.random() < 0.5:
        # mostly well-formed abstract shape
        roles = [R.BACKGROUND] + [rng.choice([R.OBJECTIVE, R.METHOD]) for _ in range(n - 2)] + [R.RESULT]
    else:
        roles = [rng.choice(list(R)) for _ in range(n)]
    return roles


def build_rerank_fixture(seed: int = 2020, n_docs: int = 20, pool: int = 10):
    rng = SplitMix64(seed)
    docs, cands = [], []
    for d in range(n_docs):
        topic = TOPICS[d % len(TOPICS)]
        doc_id = f"doc{d:02d}"
        reference = " ".join(_fill(rng, r, topic, hallucinate=False) for r in REFERENCE_ROLES)
        docs.append(Document(doc_id, _article(rng, topic), reference))
        for i in range(pool):
            cands.append(_candidate(rng, doc_id, i, _random_roles(rng), topic, runon=(d == 0 and i == pool - 1)))
    return docs, cands


def build_flip_fixture():
    """Three candidates per document; only ``FLIP_DOCS`` put a well-ordered candidate second on likelihood."""
    good = [R.BACKGROUND, R.METHOD, R.RESULT]
    bad = [R.RESULT, R.BACKGROUND]
    good_text = "Parsing has been studied widely. We train a parser on the treebank. Our parser outperforms baselines."
    bad_text = "Our parser outperforms baselines. Parsing has been studied widely."
    mid_text = "Parsing has been studied widely. Results are mixed."
    docs, cands = [], []
    for d in range(10):
        doc_id = f"flip{d:02d}"
        docs.append(
            Document(
                doc_id,
                "Parsing has been studied widely. We train a parser on the treebank. Our parser outperforms baselines.",
                good_text,
            )
        )
        flips = doc_id in FLIP_DOCS
        # (text, roles, per-token logprob): the top-likelihood candidate is index 0
        spec = [
            (bad_text if flips else good_text, bad if flips else good, -1.0),
            (good_text if flips else bad_text, good if flips else bad, -1.2),
            (mid_text, [R.BACKGROUND, R.OTHER], -2.0),
        ]
        for i, (txt, roles, lp) in enumerate(spec):
            n_tok = len(textmod.tokenize(txt))
            n_sent = len(roles)
            cands.append(CandidateSummary(doc_id, i, txt, (lp,) * n_tok, tuple(roles), None, (0.5,) * (n_sent - 1)))
    return docs, cands


def build_pairs(seed: int = 7, n_pairs: int = 240) -> list[SentencePairExample]:
    rng = SplitMix64(seed)
    vocab = sorted({w for t in TOPICS for phrase in t[3] for w in phrase.split()} | {
        "model", "signal", "feature", "layer", "sample", "measure", "pattern", "system", "theory", "method",
        "kernel", "graph", "column", "metric", "tissue", "sensor", "policy", "reward", "corpus", "token",
    })
    stop = ["the", "of", "and", "with", "for", "in"]
    openers = ["However,", "Moreover,", "Thus", "In addition,"]

    def sentence(words: list[str]) -> str:
        out = []
        for i, w in enumerate(words):
            out.append(w)
            if i < len(words) - 1 and rng.random() < 0.5:
                out.append(rng.choice(stop))
        return " ".join(out)

    pairs = []
    for k in range(n_pairs):
        label = k % 2
        base = []
        while len(base) < 6:
            w = rng.choice(vocab)
            if w not in base:
                base.append(w)
        fresh = [w for w in vocab if w not in base]
        rng.shuffle(fresh)
        if label:
            second_words = base[:]
            second_words[rng.randbelow(6)] = fresh[0]  # 5 shared of 7 -> Jaccard 5/7
        else:
            second_words = [base[rng.randbelow(6)]] + fresh[:5]  # 1 shared of 11 -> Jaccard 1/11
        rng.shuffle(second_words)
        first = _cap(sentence(base)) + "."
        second = sentence(second_words) + "."
        if rng.random() < 0.3:
            second = rng.choice(openers) + " " + second
        else:
            second = _cap(second)
        pairs.append(SentencePairExample(first, second, label, f"synthetic{k // 2:03d}"))
    return pairs


def render_all() -> dict[str, str]:
    docs, cands = build_rerank_fixture()
    fdocs, fcands = build_flip_fixture()
    return {
        "docs.jsonl": dump_jsonl(d.to_json() for d in docs),
        "candidates.jsonl": dump_jsonl(c.to_json() for c in cands),
        "flip_docs.jsonl": dump_jsonl(d.to_json() for d in fdocs),
        "flip_candidates.jsonl": dump_jsonl(c.to_json() for c in fcands),
        "pairs.jsonl": dump_jsonl(p.to_json() for p in build_pairs()),
    }


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("coopnet").joinpath("data", "fixtures", name)))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0]) if argv else fixture_path("")
    out.mkdir(parents=True, exist_ok=True)
    for name, content in render_all().items():
        (out / name).write_text(content, encoding="utf-8")
        print(out / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
