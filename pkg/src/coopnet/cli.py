"""``coopnet`` command line: one subcommand per pipeline stage.

Exit codes: 0 success, 2 validation error, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from coopnet import corpus, text
from coopnet.discriminators import OBJECTIVES, AdjacencyModel, NormalizationSpec, RoleRules, ScoringError
from coopnet.discriminators.adjacency import DegenerateData, accuracy, featurize, train_on_features
from coopnet.evalmetrics import DENOMINATORS, discourse_overlap, evaluate_system, lede3, mean_overlap, word_count
from coopnet.reranker import (
    BACKENDS,
    CandidateScoringError,
    RerankConfig,
    ScoreBreakdown,
    filter_pool,
    new_decision_rate,
    rerank,
)

log = logging.getLogger("coopnet")

# top-k sampling of the upstream generator; provenance only
GENERATOR_TOP_K = 4


class ValidationError(Exception):
    pass


def resolve(path: Optional[str], required: bool = True) -> Optional[str]:
    """Return ``path`` if it exists, else try it under ``$COOPNET_DATA_DIR``."""
    if path is None:
        if required:
            raise ValidationError("missing required path")
        return None
    if Path(path).exists():
        return path
    base = os.environ.get("COOPNET_DATA_DIR")
    if base and not Path(path).is_absolute():
        alt = Path(base) / path
        if alt.exists():
            return str(alt)
    raise ValidationError(f"no such file: {path}")


def write_atomic(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _config_echo(args: argparse.Namespace, **resolved) -> dict:
    # output location does not affect content, so it is not echoed
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "verbose", "out_dir")}
    cfg.update(resolved)
    return cfg


# ---------------------------------------------------------------------------
# rerank


def cmd_rerank(args: argparse.Namespace) -> int:
    docs_path = resolve(args.docs)
    cand_path = resolve(args.candidates)
    model_path = resolve(args.model, required=False) if args.model else None
    rules = RoleRules.load(resolve(args.role_rules)) if args.role_rules else None
    try:
        config = RerankConfig(
            lambda_gen=args.lambda_gen,
            lambda_disc=args.lambda_disc,
            objective=args.objective,
            backend=args.backend,
            max_sentence_tokens=args.max_sentence_tokens,
            ordering=NormalizationSpec(args.ordering_max_sentences),
        )
    except ValueError as e:
        raise ValidationError(str(e)) from None
    model = None
    if config.objective == "adjacency" and config.backend == "builtin":
        if model_path is None:
            raise ValidationError("--objective adjacency --backend builtin needs --model")
        model = AdjacencyModel.load(model_path)

    docs = corpus.load_documents(docs_path)
    pools = corpus.load_candidates(cand_path, docs)
    echo = _config_echo(args, docs=docs_path, candidates=cand_path, generator_top_k=GENERATOR_TOP_K)
    rows: list[dict] = []
    n_docs = 0
    for doc in docs:
        pool = pools[doc.id]
        if not pool:
            log.warning("%s has no candidates; skipped", doc.id)
            continue
        doc_t = corpus.truncate_inputs(doc, args.article_max, args.summary_max)
        filt = filter_pool(pool, config.max_sentence_tokens)
        extra = ("filter-bypassed",) if filt.bypassed else ()
        if filt.bypassed:
            log.warning("%s: every candidate exceeds %d tokens per sentence; filter bypassed", doc.id, config.max_sentence_tokens)
        ranking = rerank(doc_t, filt.kept, config, model, rules, extra)
        rows.extend(b.to_json() for b in ranking)
        best = ranking[0]
        text_by_index = {c.index: c.text for c in pool}
        rows.append(
            {
                "doc_id": doc.id,
                "selected_index": best.candidate_index,
                "summary": text_by_index[best.candidate_index],
                "n_candidates": len(pool),
                "n_kept": len(filt.kept),
                "removed": [{"candidate_index": c.index, "reason": r} for c, r in filt.removed],
                "flags": list(extra),
            }
        )
        n_docs += 1
    out = Path(args.out_dir) / "rerank.jsonl"
    write_atomic(out, corpus.dump_jsonl(rows, header="config: " + json.dumps(echo, sort_keys=True)))
    print(f"reranked {n_docs} documents (objective={config.objective}, backend={config.backend}) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# train-adjacency


def cmd_train_adjacency(args: argparse.Namespace) -> int:
    pairs_path = resolve(args.pairs)
    pairs = corpus.load_pairs(pairs_path)
    X, y = featurize(pairs)
    try:
        result = train_on_features(X, y, seed=args.seed, lr=args.lr, epochs=args.epochs, batch_size=args.batch_size)
    except DegenerateData as e:
        raise ValidationError(f"{pairs_path}: {e}") from None
    model = result.model
    acc = accuracy(model, X, y)
    model.training_meta["train_accuracy"] = acc
    model.training_meta["config"] = _config_echo(args, pairs=pairs_path)
    out_dir = Path(args.out_dir)
    write_atomic(out_dir / "adjacency_model.json", dump_json(model.to_json()))
    lines = ["# config: " + json.dumps(_config_echo(args, pairs=pairs_path), sort_keys=True), "epoch,loss"]
    lines += [f"{i},{loss!r}" for i, loss in enumerate(result.loss_curve)]
    write_atomic(out_dir / "loss_curve.csv", "\n".join(lines) + "\n")
    print(
        f"trained on {len(pairs)} pairs: loss {result.loss_curve[0]:.4f} -> {result.final_loss:.4f}, "
        f"train accuracy {acc:.4f} -> {out_dir / 'adjacency_model.json'}"
    )
    return 0


# ---------------------------------------------------------------------------
# sample-pairs


def cmd_sample_pairs(args: argparse.Namespace) -> int:
    docs_path = resolve(args.docs)
    docs = corpus.load_documents(docs_path)
    sample = corpus.sample_pairs(docs, seed=args.seed, per_doc=args.per_doc)
    echo = _config_echo(args, docs=docs_path)
    out = Path(args.out_dir) / "pairs.jsonl"
    write_atomic(out, corpus.dump_jsonl((p.to_json() for p in sample.pairs), header=json.dumps(echo, sort_keys=True)))
    if sample.skipped:
        print(f"warning: skipped {len(sample.skipped)} summaries with fewer than {corpus.MIN_PAIR_SENTENCES} sentences", file=sys.stderr)
    print(f"wrote {len(sample.pairs)} pairs from {len(docs) - len(sample.skipped)} documents -> {out}")
    return 0


# ---------------------------------------------------------------------------
# eval / analyze


def read_selections(path: str) -> dict[str, str]:
    """``doc_id -> summary`` from a rerank output or any JSONL with ``doc_id``/``summary``."""
    out: dict[str, str] = {}
    for line_no, obj in corpus.iter_jsonl(path):
        if "candidate_index" in obj and "summary" not in obj:
            continue
        if "doc_id" not in obj or "summary" not in obj:
            raise corpus.MissingField("summary" if "doc_id" in obj else "doc_id", line_no, path)
        if obj["doc_id"] in out:
            raise corpus.DuplicateId(obj["doc_id"], line_no, path)
        out[obj["doc_id"]] = obj["summary"]
    return out


def read_rankings(path: str) -> dict[str, list[ScoreBreakdown]]:
    rankings: dict[str, list[ScoreBreakdown]] = {}
    for line_no, obj in corpus.iter_jsonl(path):
        if "candidate_index" not in obj:
            continue
        try:
            b = ScoreBreakdown(
                obj["doc_id"],
                int(obj["candidate_index"]),
                float(obj["gen_term"]),
                float(obj["disc_term"]),
                float(obj["combined"]),
                int(obj["rank"]),
                tuple(obj.get("flags", ())),
            )
        except KeyError as e:
            raise corpus.MissingField(e.args[0], line_no, path) from None
        rankings.setdefault(b.doc_id, []).append(b)
    return rankings


def cmd_eval(args: argparse.Namespace) -> int:
    docs_path = resolve(args.docs)
    docs = corpus.load_documents(docs_path)
    systems: dict[str, dict[str, str]] = {}
    for spec in args.system or []:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise ValidationError(f"--system expects NAME=PATH, got {spec!r}")
        if name in systems or name == "lede3":
            raise ValidationError(f"duplicate system name {name!r}")
        systems[name] = read_selections(resolve(path))
    systems["lede3"] = {d.id: lede3(d) for d in docs}
    report = {"config": _config_echo(args, docs=docs_path), "systems": {}}
    for name, outputs in systems.items():
        try:
            report["systems"][name] = evaluate_system(outputs, docs, args.denominator)
        except ValueError as e:
            raise ValidationError(f"system {name!r}: {e}") from None
    out = Path(args.out_dir) / "eval.json"
    write_atomic(out, dump_json(report))
    for name, rep in report["systems"].items():
        print(f"{name:>12}  R-1 {rep['rouge1']['f1']:.4f}  R-2 {rep['rouge2']['f1']:.4f}  R-L {rep['rougel']['f1']:.4f}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    base_path = resolve(args.baseline)
    rr_path = resolve(args.reranked)
    base = read_rankings(base_path)
    reranked = read_rankings(rr_path)
    if set(base) != set(reranked):
        diff = sorted(set(base) ^ set(reranked))
        raise ValidationError(f"baseline and reranked outputs cover different documents: {diff[:5]}")
    if not base:
        raise ValidationError("no ranked candidates found")
    rate = new_decision_rate(reranked, base)
    sel_base = read_selections(base_path)
    sel_rr = read_selections(rr_path)
    ids = sorted(base)
    report: dict = {
        "config": _config_echo(args, baseline=base_path, reranked=rr_path),
        "n_docs": len(ids),
        "new_decision_rate": rate,
        "avg_words": {
            "baseline": sum(word_count(sel_base[d]) for d in ids) / len(ids),
            "reranked": sum(word_count(sel_rr[d]) for d in ids) / len(ids),
        },
    }
    if args.docs:
        docs = {d.id: d for d in corpus.load_documents(resolve(args.docs))}
        missing = [d for d in ids if d not in docs]
        if missing:
            raise ValidationError(f"documents missing from --docs: {missing[:5]}")
        report["discourse"] = {
            name: mean_overlap(
                [discourse_overlap(sel[d], docs[d].reference_summary, args.denominator) for d in ids]
            ).as_dict(4)
            for name, sel in (("baseline", sel_base), ("reranked", sel_rr))
        }
    out = Path(args.out_dir) / "analysis.json"
    write_atomic(out, dump_json(report))
    print(f"new decision rate {rate:.4f} over {len(ids)} documents -> {out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--stopwords", help="stopword lexicon file (one entry per line)")
    common.add_argument("--connectives", help="connective lexicon file (one entry per line)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="coopnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rerank", parents=[common], help="score and rerank candidate pools")
    p.add_argument("--docs", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--objective", choices=OBJECTIVES, default="coverage")
    p.add_argument("--backend", choices=BACKENDS, default="external")
    p.add_argument("--model", help="adjacency model JSON for --backend builtin")
    p.add_argument("--role-rules", help="cue table for the builtin role labeler")
    p.add_argument("--lambda-gen", type=float, default=0.5)
    p.add_argument("--lambda-disc", type=float, default=0.5)
    p.add_argument("--max-sentence-tokens", type=int, default=200)
    p.add_argument("--article-max", type=int, default=corpus.ARTICLE_MAX_TOKENS)
    p.add_argument("--summary-max", type=int, default=corpus.SUMMARY_MAX_TOKENS)
    p.add_argument("--ordering-max-sentences", type=int, default=10)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("train-adjacency", parents=[common], help="fit the builtin adjacency classifier")
    p.add_argument("--pairs", required=True)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=1)
    p.set_defaults(func=cmd_train_adjacency)

    p = sub.add_parser("sample-pairs", parents=[common], help="draw adjacency training pairs from reference summaries")
    p.add_argument("--docs", required=True)
    p.add_argument("--per-doc", type=int, default=1)
    p.set_defaults(func=cmd_sample_pairs)

    p = sub.add_parser("eval", parents=[common], help="ROUGE and discourse metrics, with a Lede-3 row")
    p.add_argument("--docs", required=True)
    p.add_argument("--system", action="append", metavar="NAME=PATH", help="rerank.jsonl or doc_id/summary JSONL")
    p.add_argument("--denominator", choices=DENOMINATORS, default="overlap")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", parents=[common], help="new-decision rate, word counts, discourse overlap")
    p.add_argument("--baseline", required=True, help="rerank.jsonl produced with --lambda-disc 0")
    p.add_argument("--reranked", required=True, help="rerank.jsonl of the configured objective")
    p.add_argument("--docs", help="documents file, enables the discourse overlap report")
    p.add_argument("--denominator", choices=DENOMINATORS, default="overlap")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        text.configure(resolve(args.stopwords) if args.stopwords else None, resolve(args.connectives) if args.connectives else None)
        return args.func(args)
    except (ValidationError, corpus.CorpusError, CandidateScoringError, ScoringError) as e:
        print(f"coopnet: error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"coopnet: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"coopnet: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
