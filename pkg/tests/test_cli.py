import json
import math

import pytest

from coopnet import cli
from coopnet.corpus import dump_jsonl, iter_jsonl, load_documents
from coopnet.evalmetrics import word_count
from coopnet.fixtures import FLIP_DOCS, fixture_path

DOCS = str(fixture_path("docs.jsonl"))
CANDS = str(fixture_path("candidates.jsonl"))
FDOCS = str(fixture_path("flip_docs.jsonl"))
FCANDS = str(fixture_path("flip_candidates.jsonl"))
PAIRS = str(fixture_path("pairs.jsonl"))


def rows(path):
    return [obj for _, obj in iter_jsonl(path)]


def selections(path):
    return {r["doc_id"]: r for r in rows(path) if "selected_index" in r}


def run_rerank(out, docs=DOCS, cands=CANDS, *extra):
    return cli.main(["rerank", "--docs", docs, "--candidates", cands, "--out-dir", str(out), *extra])


class TestRerank:
    def test_fixture_ordering(self, tmp_path):
        assert run_rerank(tmp_path, DOCS, CANDS, "--objective", "ordering") == 0
        out = tmp_path / "rerank.jsonl"
        assert out.read_text().startswith("# config: ")
        sel = selections(out)
        assert len(sel) == 20
        # the run-on candidate of the first document is filtered out
        assert sel["doc00"]["removed"] == [{"candidate_index": 9, "reason": "sentence-length"}]

    @pytest.mark.parametrize("objective", ["coverage", "adjacency", "factuality"])
    def test_other_objectives(self, tmp_path, objective):
        assert run_rerank(tmp_path, DOCS, CANDS, "--objective", objective) == 0
        assert len(selections(tmp_path / "rerank.jsonl")) == 20

    def test_byte_identical(self, tmp_path):
        run_rerank(tmp_path / "a", DOCS, CANDS, "--objective", "ordering", "--seed", "5")
        run_rerank(tmp_path / "b", DOCS, CANDS, "--objective", "ordering", "--seed", "5")
        assert (tmp_path / "a" / "rerank.jsonl").read_bytes() == (tmp_path / "b" / "rerank.jsonl").read_bytes()

    def test_missing_probs_exit_2(self, tmp_path, capsys):
        docs = tmp_path / "d.jsonl"
        docs.write_text(dump_jsonl([{"id": "d1", "article": "A b. C d.", "reference_summary": "A b."}]))
        cands = tmp_path / "c.jsonl"
        cands.write_text(dump_jsonl([{"doc_id": "d1", "index": 3, "text": "A b. C d.", "token_logprobs": [-1] * 6}]))
        code = run_rerank(tmp_path, str(docs), str(cands), "--objective", "adjacency", "--backend", "external")
        assert code == 2
        assert "d1 candidate 3" in capsys.readouterr().err

    def test_builtin_adjacency_needs_model(self, tmp_path):
        assert run_rerank(tmp_path, DOCS, CANDS, "--objective", "adjacency", "--backend", "builtin") == 2

    def test_builtin_adjacency_with_model(self, tmp_path):
        assert cli.main(["train-adjacency", "--pairs", PAIRS, "--out-dir", str(tmp_path), "--epochs", "3"]) == 0
        model = str(tmp_path / "adjacency_model.json")
        code = run_rerank(tmp_path, DOCS, CANDS, "--objective", "adjacency", "--backend", "builtin", "--model", model)
        assert code == 0

    def test_lambda_disc_zero_matches_decision_rate(self, tmp_path):
        run_rerank(tmp_path / "base", DOCS, CANDS, "--objective", "ordering", "--lambda-disc", "0")
        run_rerank(tmp_path / "rr", DOCS, CANDS, "--objective", "ordering")
        a = selections(tmp_path / "base" / "rerank.jsonl")
        b = selections(tmp_path / "rr" / "rerank.jsonl")
        changed = sum(a[d]["selected_index"] != b[d]["selected_index"] for d in a)
        cli.main(["analyze", "--baseline", str(tmp_path / "base" / "rerank.jsonl"),
                  "--reranked", str(tmp_path / "rr" / "rerank.jsonl"), "--out-dir", str(tmp_path)])
        rep = json.loads((tmp_path / "analysis.json").read_text())
        assert rep["new_decision_rate"] == changed / 20

    def test_missing_file(self, tmp_path):
        assert run_rerank(tmp_path, "nope.jsonl", CANDS) == 2

    def test_data_dir_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("COOPNET_DATA_DIR", str(fixture_path("")))
        assert run_rerank(tmp_path, "docs.jsonl", "candidates.jsonl") == 0


class TestTrain:
    def test_deterministic_and_accurate(self, tmp_path):
        for name in ("a", "b"):
            assert cli.main(["train-adjacency", "--pairs", PAIRS, "--out-dir", str(tmp_path / name), "--seed", "1"]) == 0
        a = (tmp_path / "a" / "adjacency_model.json").read_bytes()
        assert a == (tmp_path / "b" / "adjacency_model.json").read_bytes()
        meta = json.loads(a)["training_meta"]
        assert meta["train_accuracy"] >= 0.95 and meta["seed"] == 1
        curve = (tmp_path / "a" / "loss_curve.csv").read_text().splitlines()
        assert curve[1] == "epoch,loss" and len(curve) == 2 + 51
        losses = [float(line.split(",")[1]) for line in curve[2:]]
        assert losses[0] == pytest.approx(math.log(2))

    def test_single_class_exit_2(self, tmp_path):
        p = tmp_path / "p.jsonl"
        p.write_text(dump_jsonl([{"first": "A b.", "second": "C d.", "label": 1, "source_doc": "x"}] * 3))
        assert cli.main(["train-adjacency", "--pairs", str(p), "--out-dir", str(tmp_path)]) == 2


def test_sample_pairs_header(tmp_path):
    docs = tmp_path / "d.jsonl"
    ref = "One a. Two b. Three c. Four d. Five e. Six f."
    docs.write_text(dump_jsonl([{"id": f"d{i}", "article": "x", "reference_summary": ref} for i in range(3)]))
    assert cli.main(["sample-pairs", "--docs", str(docs), "--seed", "42", "--out-dir", str(tmp_path)]) == 0
    first = (tmp_path / "pairs.jsonl").read_text().splitlines()[0]
    assert first.startswith("# ") and json.loads(first[2:])["seed"] == 42
    pairs = rows(tmp_path / "pairs.jsonl")
    assert len(pairs) == 6 and sum(p["label"] for p in pairs) == 3


class TestEval:
    def test_identity_and_lede3(self, tmp_path):
        ref = tmp_path / "ref.jsonl"
        ref.write_text(dump_jsonl({"doc_id": d.id, "summary": d.reference_summary} for d in load_documents(DOCS)))
        code = cli.main(["eval", "--docs", DOCS, "--system", f"gold={ref}", "--out-dir", str(tmp_path)])
        assert code == 0
        rep = json.loads((tmp_path / "eval.json").read_text())
        assert rep["systems"]["gold"]["rouge1"]["f1"] == 1.0
        assert rep["systems"]["gold"]["rougel"]["f1"] == 1.0
        assert "lede3" in rep["systems"]

    def test_means_of_per_doc(self, tmp_path):
        run_rerank(tmp_path, DOCS, CANDS)
        sysfile = str(tmp_path / "rerank.jsonl")
        cli.main(["eval", "--docs", DOCS, "--system", f"coop={sysfile}", "--out-dir", str(tmp_path)])
        rep = json.loads((tmp_path / "eval.json").read_text())["systems"]
        for name in ("coop", "lede3"):
            per = rep[name]["per_doc"]
            for key in ("rouge1", "rouge2", "rougel"):
                mean = sum(p[key]["f1"] for p in per) / len(per)
                assert rep[name][key]["f1"] == pytest.approx(mean, abs=1e-4)

    def test_id_mismatch(self, tmp_path):
        s = tmp_path / "s.jsonl"
        s.write_text(dump_jsonl([{"doc_id": "doc00", "summary": "x"}]))
        assert cli.main(["eval", "--docs", DOCS, "--system", f"s={s}", "--out-dir", str(tmp_path)]) == 2

    def test_bad_system_spec(self, tmp_path):
        assert cli.main(["eval", "--docs", DOCS, "--system", "nopath", "--out-dir", str(tmp_path)]) == 2


class TestAnalyze:
    def _runs(self, tmp_path):
        run_rerank(tmp_path / "base", FDOCS, FCANDS, "--objective", "ordering", "--lambda-disc", "0")
        run_rerank(tmp_path / "rr", FDOCS, FCANDS, "--objective", "ordering")
        return str(tmp_path / "base" / "rerank.jsonl"), str(tmp_path / "rr" / "rerank.jsonl")

    def test_flip_fixture(self, tmp_path):
        base, rr = self._runs(tmp_path)
        code = cli.main(["analyze", "--baseline", base, "--reranked", rr, "--docs", FDOCS, "--out-dir", str(tmp_path)])
        assert code == 0
        rep = json.loads((tmp_path / "analysis.json").read_text())
        assert rep["new_decision_rate"] == 0.3 and rep["n_docs"] == 10
        changed = {d for d, r in selections(rr).items() if r["selected_index"] != selections(base)[d]["selected_index"]}
        assert changed == set(FLIP_DOCS)
        assert set(rep["discourse"]) == {"baseline", "reranked"}

    def test_identical_runs(self, tmp_path):
        base, _ = self._runs(tmp_path)
        cli.main(["analyze", "--baseline", base, "--reranked", base, "--out-dir", str(tmp_path)])
        assert json.loads((tmp_path / "analysis.json").read_text())["new_decision_rate"] == 0.0

    def test_avg_words_hand_count(self, tmp_path):
        base, rr = self._runs(tmp_path)
        cli.main(["analyze", "--baseline", base, "--reranked", rr, "--out-dir", str(tmp_path)])
        rep = json.loads((tmp_path / "analysis.json").read_text())
        # good text: 5 + 7 + 4 words; bad text: 4 + 5 words
        assert word_count("Parsing has been studied widely. We train a parser on the treebank. Our parser outperforms baselines.") == 16
        assert word_count("Our parser outperforms baselines. Parsing has been studied widely.") == 9
        assert rep["avg_words"]["baseline"] == (7 * 16 + 3 * 9) / 10
        assert rep["avg_words"]["reranked"] == 16.0

    def test_mismatched_docs(self, tmp_path):
        base, _ = self._runs(tmp_path)
        run_rerank(tmp_path / "other", DOCS, CANDS)
        code = cli.main(["analyze", "--baseline", base, "--reranked", str(tmp_path / "other" / "rerank.jsonl"),
                         "--out-dir", str(tmp_path)])
        assert code == 2
