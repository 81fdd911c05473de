import json
from pathlib import Path

import numpy as np
import pytest

from genparse import grammar as grammar_mod
from genparse import hdp, ontology
from genparse.cli import main

DEMO = Path(__file__).resolve().parent.parent / "demo"


@pytest.fixture(scope="module")
def model_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("model") / "model.json"
    rc = main(["train", "--grammar", str(DEMO / "grammar.g"),
               "--kb", str(DEMO / "kb.txt"),
               "--corpus", str(DEMO / "train.tsv"),
               "--out", str(out), "--seed", "7",
               "--samples", "3", "--burn-in", "25", "--thin", "3"])
    assert rc == 0
    return out


class TestTrain:
    def test_same_seed_gives_identical_model_files(self, tmp_path, model_path):
        again = tmp_path / "again.json"
        rc = main(["train", "--grammar", str(DEMO / "grammar.g"),
                   "--kb", str(DEMO / "kb.txt"),
                   "--corpus", str(DEMO / "train.tsv"),
                   "--out", str(again), "--seed", "7",
                   "--samples", "3", "--burn-in", "25", "--thin", "3"])
        assert rc == 0
        assert again.read_bytes() == model_path.read_bytes()

    def test_model_reloads_bit_identically(self, model_path):
        blob = model_path.read_text(encoding="utf-8")
        trained = grammar_mod.model_from_json(blob)
        assert grammar_mod.model_to_json(trained) == blob

    def test_missing_corpus_is_input_error(self, tmp_path):
        rc = main(["train", "--grammar", str(DEMO / "grammar.g"),
                   "--kb", str(DEMO / "kb.txt"),
                   "--corpus", str(tmp_path / "nope.tsv"),
                   "--out", str(tmp_path / "m.json")])
        assert rc == 2

    def test_unknown_flag_is_usage_error(self):
        assert main(["train", "--frobnicate"]) == 1

    def test_summary_printed(self, capsys, tmp_path):
        rc = main(["train", "--grammar", str(DEMO / "grammar.g"),
                   "--kb", str(DEMO / "kb.txt"),
                   "--corpus", str(DEMO / "train.tsv"),
                   "--out", str(tmp_path / "m.json"), "--seed", "1",
                   "--samples", "2", "--burn-in", "5", "--thin", "1"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "trained on 12 sentences" in out
        assert "N: 7 rules" in out


class TestParse:
    def test_single_sentence_text_format(self, capsys, model_path):
        rc = main(["parse", "--model", str(model_path),
                   "--kb", str(DEMO / "kb.txt"),
                   "--sentence", "Ada eats rice", "--k", "3"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3
        rank, score, posterior, statements, tree = lines[0].split("\t")
        assert rank == "1"
        assert "eats(person:ada, food:rice)" in statements
        assert float(score) <= 0.0
        assert tree.startswith("(S:0[0,13)")

    def test_structured_format_is_json(self, capsys, model_path):
        rc = main(["parse", "--model", str(model_path),
                   "--kb", str(DEMO / "kb.txt"),
                   "--sentence", "Ada eats rice", "--k", "2",
                   "--format", "structured"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["sentence"] == "Ada eats rice"
        assert len(payload["parses"]) == 2
        assert payload["parses"][0]["rank"] == 1

    def test_k_one_is_prefix_of_k_five(self, capsys, model_path):
        # Posterior estimates renormalize over the returned k, so compare the
        # rank, score, statements, and tree columns.
        outputs = []
        for k in ("1", "5"):
            rc = main(["parse", "--model", str(model_path),
                       "--kb", str(DEMO / "kb.txt"),
                       "--sentence", "Grace plays chess", "--k", k])
            assert rc == 0
            lines = capsys.readouterr().out.strip().splitlines()
            outputs.append([line.split("\t") for line in lines])
        first_of_five = outputs[1][0]
        first_of_one = outputs[0][0]
        for column in (0, 1, 3, 4):
            assert first_of_five[column] == first_of_one[column]

    def test_empty_input_file_is_quiet_success(self, capsys, tmp_path,
                                               model_path):
        empty = tmp_path / "empty.txt"
        empty.write_text("", encoding="utf-8")
        rc = main(["parse", "--model", str(model_path),
                   "--kb", str(DEMO / "kb.txt"), "--input", str(empty)])
        assert rc == 0
        assert capsys.readouterr().out == ""

    def test_requires_sentence_or_input(self, model_path):
        rc = main(["parse", "--model", str(model_path),
                   "--kb", str(DEMO / "kb.txt")])
        assert rc == 1


class TestGenerate:
    def test_same_seed_gives_identical_files(self, tmp_path):
        paths = [tmp_path / "a.tsv", tmp_path / "b.tsv"]
        for path in paths:
            rc = main(["generate", "--grammar", str(DEMO / "grammar.g"),
                       "--kb", str(DEMO / "kb.txt"), "--n", "5",
                       "--seed", "7", "--out", str(path)])
            assert rc == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert len(paths[0].read_text().splitlines()) == 5

    def test_generated_corpus_is_loadable(self, tmp_path):
        out = tmp_path / "c.tsv"
        assert main(["generate", "--grammar", str(DEMO / "grammar.g"),
                     "--kb", str(DEMO / "kb.txt"), "--n", "4",
                     "--seed", "1", "--out", str(out)]) == 0
        kb = ontology.load_knowledge_base(DEMO / "kb.txt")
        grammar = grammar_mod.parse_grammar_file(
            (DEMO / "grammar.g").read_text(encoding="utf-8"))
        records = grammar_mod.load_corpus(out.read_text(encoding="utf-8"),
                                          grammar, kb)
        assert len(records) == 4
        assert all(r.tree is not None for r in records)


class TestEvaluate:
    def test_self_corpus_reaches_perfect_strict_auc(self, capsys, tmp_path,
                                                    model_path):
        out_dir = tmp_path / "report"
        rc = main(["evaluate", "--model", str(model_path),
                   "--kb", str(DEMO / "kb.txt"),
                   "--corpus", str(DEMO / "train.tsv"),
                   "--out-dir", str(out_dir), "--k", "5",
                   "--k-values", "1,5,20"])
        assert rc == 0
        report = capsys.readouterr().out
        assert "strict      1.000000" in report
        for name in ("report.txt", "pr_points_strict.csv",
                     "pr_points_contains.csv", "pr_curve.png",
                     "auc_vs_k.csv", "auc_vs_k.png"):
            assert (out_dir / name).exists(), name
        csv = (out_dir / "pr_points_strict.csv").read_text(encoding="utf-8")
        assert csv.splitlines()[0] == "threshold,precision,recall"


class TestHdpDiag:
    def test_trace_and_ranked_yields(self, capsys):
        rc = main(["hdp-diag", "--grammar", str(DEMO / "grammar.g"),
                   "--kb", str(DEMO / "kb.txt"),
                   "--corpus", str(DEMO / "train.tsv"),
                   "--nonterminal", "N", "--value", "0",
                   "--top-m", "4", "--sweeps", "8", "--seed", "3",
                   "--samples", "2", "--thin", "2"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        header = next(i for i, l in enumerate(lines) if l.startswith("top 4"))
        sweep_rows = [l for l in lines[:header]
                      if l and l[0].isdigit() and len(l.split("\t")) == 3]
        assert len(sweep_rows) == 8
        scores = [float(l.split("\t")[1]) for l in lines[header + 1:]
                  if l.strip()]
        assert scores == sorted(scores, reverse=True)
        assert 0 < len(scores) <= 4

    def test_dump_matches_library_iterator(self, capsys):
        seed, sweeps = 5, 6
        args = ["hdp-diag", "--grammar", str(DEMO / "grammar.g"),
                "--kb", str(DEMO / "kb.txt"),
                "--corpus", str(DEMO / "train.tsv"),
                "--nonterminal", "V", "--value", "1",
                "--top-m", "3", "--sweeps", str(sweeps), "--seed", str(seed),
                "--samples", "2", "--thin", "2"]
        assert main(args) == 0
        lines = capsys.readouterr().out.splitlines()
        header = next(i for i, l in enumerate(lines) if l.startswith("top 3"))
        printed = [float(l.split("\t")[1]) for l in lines[header + 1:]
                   if l.strip()]
        # Reproduce the command's sampler run through the library.
        kb = ontology.load_knowledge_base(DEMO / "kb.txt")
        grammar = grammar_mod.parse_grammar_file(
            (DEMO / "grammar.g").read_text(encoding="utf-8"))
        records = grammar_mod.load_corpus(
            (DEMO / "train.tsv").read_text(encoding="utf-8"), grammar, kb)
        observations = []
        for record in records:
            rows = grammar_mod.training_observations(grammar, record, kb)
            observations.extend(rows["V"])
        tree = grammar_mod.build_hdp_tree(grammar.info("V"), kb)
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        state = hdp.init_state(tree, observations, rng)
        for _ in range(sweeps):
            hdp.gibbs_sweep(state, rng)
        samples = hdp.sample_posterior(state, rng, n_samples=2, burn_in=0,
                                       thin=2)
        expected = [score for _, score in
                    list(hdp.path_iterator(samples, tree, 1))[:3]]
        assert printed == pytest.approx(expected, abs=1e-6)


class TestConfigFile:
    def test_config_supplies_paths_and_flags_override(self, capsys, tmp_path,
                                                      model_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({
            "model": str(model_path), "kb": str(DEMO / "kb.txt"), "k": 2}),
            encoding="utf-8")
        rc = main(["parse", "--config", str(config),
                   "--sentence", "Ada eats kale"])
        assert rc == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 2
        rc = main(["parse", "--config", str(config), "--k", "1",
                   "--sentence", "Ada eats kale"])
        assert rc == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 1
