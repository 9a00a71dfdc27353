"""End-to-end tests for the command line, run in-process via main()."""

import logging
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from wrst import induce_attention
from wrst.cli import derived_seed, main
from wrst.induce_sentiment import label_to_unit
from wrst.tree import NucLabel
from wrst.treebank import parse_attention, parse_signals, parse_trees

from test_induce_sentiment import exhaustive_best_gap, root_sentiment

DATA = Path(__file__).parent / "data"
DOCUMENTS = str(DATA / "documents.tsv")
SIGNALS = str(DATA / "signals.tsv")
ATTENTION = str(DATA / "attention.tsv")
EMBEDDINGS = str(DATA / "embeddings.txt")
REFERENCES = str(DATA / "references.tsv")


@pytest.fixture(scope="session")
def attention_trees(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "attention_trees.txt"
    assert main(["induce-attention", "--input", ATTENTION, "--output", str(out)]) == 0
    return str(out)


@pytest.fixture(scope="session")
def sentiment_trees(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "sentiment_trees.txt"
    code = main(
        [
            "induce-sentiment",
            "--input", SIGNALS,
            "--labels", DOCUMENTS,
            "--tau", "0.0",
            "--output", str(out),
        ]
    )
    assert code == 0
    return str(out)


@pytest.fixture(scope="session")
def classifier_path(tmp_path_factory, sentiment_trees):
    out = tmp_path_factory.mktemp("cli") / "classifier.txt"
    code = main(
        [
            "train-sentiment",
            "--input", sentiment_trees,
            "--documents", DOCUMENTS,
            "--embeddings", EMBEDDINGS,
            "--epochs", "600",
            "--learning-rate", "1.0",
            "--output", str(out),
        ]
    )
    assert code == 0
    return str(out)


class TestDerivedSeed:
    def test_stable(self):
        assert derived_seed(7, "doc-1") == derived_seed(7, "doc-1")

    def test_doc_id_matters(self):
        assert derived_seed(7, "doc-1") != derived_seed(7, "doc-2")

    def test_seed_matters(self):
        assert derived_seed(7, "doc-1") != derived_seed(8, "doc-1")

    def test_range(self):
        for doc_id in ("a", "b", "a-very-long-document-identifier"):
            value = derived_seed(123456789, doc_id)
            assert 0 <= value < 2**63


class TestInduceSentiment:
    def test_output_parses_and_validates(self, sentiment_trees):
        docs = parse_trees(Path(sentiment_trees).read_text())
        signals = parse_signals(Path(SIGNALS).read_text())
        assert [d.doc_id for d in docs] == ["d1", "d2", "d3", "d4"]
        for doc in docs:
            assert doc.n_edus == len(signals[doc.doc_id])
            if doc.tree.internals():
                assert doc.tree.is_weighted

    def test_tau_zero_reaches_exhaustive_optimum(self, sentiment_trees):
        docs = {d.doc_id: d for d in parse_trees(Path(sentiment_trees).read_text())}
        signals = parse_signals(Path(SIGNALS).read_text())
        gold = {"d1": 3, "d2": 0, "d3": 4, "d4": 2}
        for doc_id, doc in docs.items():
            target = label_to_unit(gold[doc_id], 5)
            achieved = abs(root_sentiment(doc.tree, signals[doc_id]) - target)
            assert achieved == pytest.approx(
                exhaustive_best_gap(signals[doc_id], target), abs=1e-12
            )

    def test_byte_identical_across_runs(self, tmp_path):
        paths = []
        for name in ("a.txt", "b.txt"):
            out = tmp_path / name
            args = [
                "induce-sentiment",
                "--input", SIGNALS,
                "--labels", DOCUMENTS,
                "--seed", "99",
                "--output", str(out),
            ]
            assert main(args) == 0
            paths.append(out)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_seed_changes_sampled_trees(self, tmp_path):
        src = tmp_path / "signals.tsv"
        src.write_text(
            "".join(
                f"big\t{i}\t{s}\t{a}\n"
                for i, (s, a) in enumerate(
                    [(0.9, 0.4), (0.1, 1.2), (0.7, 0.8), (0.3, 0.5), (0.8, 1.1), (0.2, 0.6)],
                    start=1,
                )
            )
        )
        labels = tmp_path / "documents.tsv"
        labels.write_text("big\t4\tone|two|three|four|five|six\n")
        texts = set()
        for seed in range(8):
            out = tmp_path / f"s{seed}.txt"
            args = [
                "induce-sentiment",
                "--input", str(src),
                "--labels", str(labels),
                "--tau", "5.0",
                "--beam-size", "1",
                "--seed", str(seed),
                "--output", str(out),
            ]
            assert main(args) == 0
            texts.add(out.read_text())
        # A hot temperature and a one-wide beam force sampled shape choices,
        # so different run seeds should explore different trees.
        assert len(texts) > 1

    def test_unlabeled_document_is_skipped(self, tmp_path, caplog):
        signals = Path(SIGNALS).read_text() + "dX\t1\t0.5\t1.0\ndX\t2\t0.6\t1.0\n"
        src = tmp_path / "signals.tsv"
        src.write_text(signals)
        out = tmp_path / "trees.txt"
        with caplog.at_level(logging.ERROR, logger="wrst.cli"):
            code = main(
                ["induce-sentiment", "--input", str(src), "--labels", DOCUMENTS,
                 "--output", str(out)]
            )
        assert code == 1
        assert "skipping document 'dX'" in caplog.text
        docs = parse_trees(out.read_text())
        assert [d.doc_id for d in docs] == ["d1", "d2", "d3", "d4"]

    def test_strict_turns_skip_into_failure(self, tmp_path, caplog):
        signals = Path(SIGNALS).read_text() + "dX\t1\t0.5\t1.0\n"
        src = tmp_path / "signals.tsv"
        src.write_text(signals)
        with caplog.at_level(logging.ERROR, logger="wrst.cli"):
            code = main(
                ["induce-sentiment", "--input", str(src), "--labels", DOCUMENTS,
                 "--strict", "--output", str(tmp_path / "t.txt")]
            )
        assert code == 2
        assert "document 'dX'" in caplog.text

    def test_empty_input_is_fatal(self, tmp_path):
        src = tmp_path / "empty.tsv"
        src.write_text("")
        code = main(
            ["induce-sentiment", "--input", str(src), "--labels", DOCUMENTS,
             "--output", str(tmp_path / "t.txt")]
        )
        assert code == 2

    def test_missing_input_is_fatal(self, tmp_path):
        code = main(
            ["induce-sentiment", "--input", str(tmp_path / "nope.tsv"),
             "--labels", DOCUMENTS, "--output", str(tmp_path / "t.txt")]
        )
        assert code == 2


class TestInduceAttention:
    def test_matches_direct_induction(self, attention_trees):
        docs = {d.doc_id: d for d in parse_trees(Path(attention_trees).read_text())}
        matrices = parse_attention(Path(ATTENTION).read_text())
        assert set(docs) == set(matrices)
        for doc_id, matrix in matrices.items():
            expected = induce_attention.induce_tree(matrix)
            assert docs[doc_id].tree == expected

    def test_zero_matrix_gets_even_weights(self, tmp_path, caplog):
        src = tmp_path / "attention.tsv"
        src.write_text("z1\t3\t" + " ".join(["0.0"] * 9) + "\n")
        out = tmp_path / "trees.txt"
        with caplog.at_level(logging.WARNING):
            assert main(["induce-attention", "--input", str(src), "--output", str(out)]) == 0
        assert "z1" in caplog.text
        (doc,) = parse_trees(out.read_text())
        for node in doc.tree.internals():
            assert node.weight_left == node.weight_right == 0.5


class TestDiscretize:
    def test_threshold_one_labels_everything_nn(self, attention_trees, tmp_path, capsys):
        out = tmp_path / "labeled.txt"
        code = main(
            ["discretize", "--input", attention_trees, "--threshold", "1.0",
             "--output", str(out)]
        )
        assert code == 0
        assert "mean nucleus ratio 1.0000" in capsys.readouterr().out
        for doc in parse_trees(out.read_text()):
            assert all(node.nuc is NucLabel.NN for node in doc.tree.internals())

    def test_threshold_zero_gives_single_nucleus_ratio(self, attention_trees, tmp_path, capsys):
        code = main(
            ["discretize", "--input", attention_trees, "--threshold", "0.0",
             "--output", str(tmp_path / "labeled.txt")]
        )
        assert code == 0
        assert "mean nucleus ratio 0.5000" in capsys.readouterr().out

    def test_output_round_trips(self, attention_trees, tmp_path):
        out = tmp_path / "labeled.txt"
        main(["discretize", "--input", attention_trees, "--threshold", "0.3",
              "--output", str(out)])
        docs = parse_trees(out.read_text())
        assert len(docs) == 4
        for doc in docs:
            if doc.tree.internals():
                assert doc.tree.is_labeled
                assert not doc.tree.is_weighted


class TestTrainAndEval:
    def test_checkpoint_header_matches_data(self, classifier_path):
        assert Path(classifier_path).read_text().startswith("DIM 4 CLASSES 5")

    def test_missing_tree_file_is_fatal(self):
        code = main(
            ["train-sentiment", "--input", str(DATA / "missing.txt"),
             "--documents", DOCUMENTS, "--embeddings", EMBEDDINGS]
        )
        assert code == 2

    def test_eval_reaches_full_accuracy_on_training_docs(
        self, sentiment_trees, classifier_path, tmp_path, capsys
    ):
        report = tmp_path / "report.tsv"
        code = main(
            ["eval-sentiment", "--input", sentiment_trees, "--documents", DOCUMENTS,
             "--embeddings", EMBEDDINGS, "--classifier", classifier_path,
             "--output", str(report)]
        )
        assert code == 0
        assert "accuracy 1.0000 (4/4)" in capsys.readouterr().out
        lines = report.read_text().splitlines()
        assert lines[0] == "doc_id\tpredicted\tgold"
        assert lines[-1].startswith("accuracy\t4/4\t")
        predictions = dict(line.split("\t")[:2] for line in lines[1:-1])
        assert predictions == {"d1": "3", "d2": "0", "d3": "4", "d4": "2"}

    def test_labeled_trees_need_threshold(self, attention_trees, tmp_path, classifier_path):
        labeled = tmp_path / "labeled.txt"
        main(["discretize", "--input", attention_trees, "--threshold", "0.3",
              "--output", str(labeled)])
        base = ["eval-sentiment", "--input", str(labeled), "--documents", DOCUMENTS,
                "--embeddings", EMBEDDINGS, "--classifier", classifier_path,
                "--output", str(tmp_path / "r.tsv")]
        assert main(base) == 2
        assert main(base + ["--threshold", "0.3"]) == 0


class TestEvalSumm:
    def test_weighted_mode_with_rouge(self, sentiment_trees, tmp_path, capsys):
        out = tmp_path / "summaries.tsv"
        code = main(
            ["eval-summ", "--input", sentiment_trees, "--mode", "weighted",
             "--topk", "2", "--documents", DOCUMENTS, "--references", REFERENCES,
             "--output", str(out)]
        )
        assert code == 0
        assert "mean ROUGE F1 over 4 documents" in capsys.readouterr().out
        rows = [line.split("\t") for line in out.read_text().splitlines()]
        assert len(rows) == 4
        by_id = {row[0]: row for row in rows}
        assert by_id["d4"][1] == "1"
        assert by_id["d3"][1] == "1,2"
        for row in rows:
            selected = [int(chunk) for chunk in row[1].split(",")]
            assert selected == sorted(selected)
            for cell in row[2:]:
                assert 0.0 <= float(cell) <= 1.0

    def test_promotion_mode_needs_labels_or_threshold(self, sentiment_trees, tmp_path):
        base = ["eval-summ", "--input", sentiment_trees, "--mode", "promotion",
                "--topk", "2", "--output", str(tmp_path / "s.tsv")]
        assert main(base) == 2
        assert main(base + ["--threshold", "0.2"]) == 0

    def test_promotion_mode_on_labeled_input(self, attention_trees, tmp_path):
        labeled = tmp_path / "labeled.txt"
        main(["discretize", "--input", attention_trees, "--threshold", "0.3",
              "--output", str(labeled)])
        out = tmp_path / "summaries.tsv"
        code = main(
            ["eval-summ", "--input", str(labeled), "--mode", "promotion",
             "--topk", "2", "--output", str(out)]
        )
        assert code == 0
        rows = [line.split("\t") for line in out.read_text().splitlines()]
        assert len(rows) == 4
        assert all(len(row) == 2 for row in rows)  # no ROUGE columns without refs

    def test_references_require_documents(self, sentiment_trees, tmp_path):
        code = main(
            ["eval-summ", "--input", sentiment_trees, "--mode", "weighted",
             "--references", REFERENCES, "--output", str(tmp_path / "s.tsv")]
        )
        assert code == 2


class TestAlign:
    def test_csv_shape_and_counts(self, attention_trees, tmp_path, capsys):
        ann1 = tmp_path / "ann1.txt"
        ann2 = tmp_path / "ann2.txt"
        main(["discretize", "--input", attention_trees, "--threshold", "0.1",
              "--output", str(ann1)])
        main(["discretize", "--input", attention_trees, "--threshold", "0.9",
              "--output", str(ann2)])
        capsys.readouterr()
        out = tmp_path / "spreads.csv"
        code = main(
            ["align", "--input", str(ann1), "--second", str(ann2),
             "--weighted", attention_trees, "--output", str(out)]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert "over 4 documents" in stdout
        lines = out.read_text().splitlines()
        assert lines[0] == "class,count,mean_spread,normalized_spread"
        assert len(lines) == 8
        counts = [int(line.split(",")[1]) for line in lines[1:7]]
        aligned = int(stdout.split("aligned ")[1].split(" ")[0])
        assert sum(counts) == aligned
        # Same shapes on both sides, so every internal node aligns: 3 + 2 + 1.
        assert aligned == 6
        assert lines[7].startswith("overall,0,")

    def test_disjoint_treebanks_are_fatal(self, attention_trees, sentiment_trees, tmp_path):
        renamed = tmp_path / "renamed.txt"
        renamed.write_text(
            Path(attention_trees).read_text().replace("d1", "x1").replace("d2", "x2")
            .replace("d3", "x3").replace("d4", "x4")
        )
        code = main(
            ["align", "--input", str(renamed), "--second", sentiment_trees,
             "--weighted", attention_trees, "--output", str(tmp_path / "s.csv")]
        )
        assert code == 2


class TestSweep:
    def test_table_shape_and_monotone_ratio(
        self, attention_trees, classifier_path, tmp_path
    ):
        out = tmp_path / "sweep.csv"
        code = main(
            ["sweep", "--input", attention_trees, "--documents", DOCUMENTS,
             "--embeddings", EMBEDDINGS, "--classifier", classifier_path,
             "--references", REFERENCES, "--topk", "2", "--output", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "threshold,nucleus_ratio,accuracy,rouge1_f1,rouge2_f1,rougeL_f1"
        assert len(lines) == 13  # header + 11 thresholds + summary row
        ratios = [float(line.split(",")[1]) for line in lines[1:12]]
        assert ratios == sorted(ratios)
        assert ratios[0] == pytest.approx(0.5)
        assert ratios[-1] == pytest.approx(1.0)
        for line in lines[1:12]:
            cells = line.split(",")
            assert 0.0 <= float(cells[2]) <= 1.0
            assert all(0.0 <= float(cell) <= 1.0 for cell in cells[3:6])
        last = lines[12].split(",")
        assert last[0] == "weighted"
        assert last[1] == ""
        assert 0.0 <= float(last[2]) <= 1.0

    def test_metric_columns_are_blank_without_inputs(self, attention_trees, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(
            ["sweep", "--input", attention_trees, "--thresholds", "0.0,0.5,1.0",
             "--output", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 5
        for line in lines[1:]:
            assert line.split(",")[2:] == ["", "", "", ""]

    def test_labeled_input_is_rejected(self, attention_trees, tmp_path):
        labeled = tmp_path / "labeled.txt"
        main(["discretize", "--input", attention_trees, "--threshold", "0.3",
              "--output", str(labeled)])
        code = main(["sweep", "--input", str(labeled), "--output", str(tmp_path / "s.csv")])
        assert code == 2

    def test_malformed_threshold_list(self, attention_trees, tmp_path):
        code = main(
            ["sweep", "--input", attention_trees, "--thresholds", "0.1,zebra",
             "--output", str(tmp_path / "s.csv")]
        )
        assert code == 2


class TestLoggingAndEntryPoint:
    def test_wrst_log_env_selects_level(self, attention_trees, tmp_path, monkeypatch):
        monkeypatch.setenv("WRST_LOG", "debug")
        code = main(
            ["discretize", "--input", attention_trees, "--threshold", "0.5",
             "--output", str(tmp_path / "out.txt")]
        )
        assert code == 0
        assert logging.getLogger().level == logging.DEBUG
        monkeypatch.delenv("WRST_LOG")
        main(["discretize", "--input", attention_trees, "--threshold", "0.5",
              "--output", str(tmp_path / "out.txt")])
        assert logging.getLogger().level == logging.WARNING

    def test_console_script_runs(self, tmp_path):
        exe = shutil.which("wrst")
        assert exe is not None
        out = tmp_path / "trees.txt"
        proc = subprocess.run(
            [exe, "induce-attention", "--input", ATTENTION, "--output", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert len(parse_trees(out.read_text())) == 4

    def test_stdout_is_default_sink(self, attention_trees, capsys):
        code = main(["discretize", "--input", attention_trees, "--threshold", "0.5"])
        assert code == 0
        captured = capsys.readouterr().out
        assert captured.count("\n") >= 4  # four serialized trees plus the report

    def test_module_invocation_via_python(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-c", "from wrst.cli import run; run()",
             "induce-attention", "--input", ATTENTION],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.count("\n") == 4
