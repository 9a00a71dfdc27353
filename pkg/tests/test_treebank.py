import logging
import random

import numpy as np
import pytest

from conftest import make_labeled_tree, make_weighted_tree
from wrst.tree import DiscourseTree, Internal, Leaf, NucLabel
from wrst.treebank import (
    AttentionMatrix,
    ParseError,
    parse_attention,
    parse_documents,
    parse_embeddings,
    parse_signals,
    parse_tree,
    parse_trees,
    serialize_tree,
    serialize_trees,
    TreebankDocument,
)


class TestTreeFormat:
    def test_parse_two_leaf_labeled(self):
        doc = parse_tree("(nuc=NS (leaf 1) (leaf 2))")
        assert doc.tree.root == Internal(Leaf(1), Leaf(2), nuc=NucLabel.NS)
        assert doc.n_edus == 2

    def test_parse_line_with_doc_id(self):
        doc = parse_tree("doc7\t(w=0.6,0.4 (w=0.7,0.3 (leaf 1) (leaf 2)) (leaf 3))")
        assert doc.doc_id == "doc7"
        assert doc.tree.is_weighted
        assert doc.tree.root.weight_left == 0.6

    def test_single_leaf_document(self):
        doc = parse_tree("d\t(leaf 1)")
        assert doc.tree.root == Leaf(1)

    def test_round_trip_is_token_identical(self):
        rng = random.Random(3)
        docs = []
        for i in range(20):
            n = rng.randint(1, 12)
            tree = make_weighted_tree(n, rng) if i % 2 else make_labeled_tree(n, rng)
            docs.append(TreebankDocument(doc_id=f"doc{i}", tree=tree))
        text = serialize_trees(docs)
        assert serialize_trees(parse_trees(text)) == text

    def test_weights_parsed_to_full_precision(self):
        third = 1.0 / 3.0
        line = f"d\t(w={third!r},{1.0 - third!r} (leaf 1) (leaf 2))"
        doc = parse_tree(line)
        assert doc.tree.root.weight_left == third
        assert serialize_tree(doc) == line

    def test_near_one_weight_sum_renormalized(self):
        doc = parse_tree("(w=0.6000001,0.4 (leaf 1) (leaf 2))")
        root = doc.tree.root
        assert root.weight_left + root.weight_right == pytest.approx(1.0, abs=1e-9)

    def test_bad_weight_sum_rejected(self):
        with pytest.raises(ParseError, match="sum"):
            parse_tree("(w=0.6,0.6 (leaf 1) (leaf 2))")

    def test_unbalanced_parens(self):
        with pytest.raises(ParseError, match="paren"):
            parse_tree("(nuc=NS (leaf 1) (leaf 2)")

    def test_trailing_tokens(self):
        with pytest.raises(ParseError, match="trailing"):
            parse_tree("(leaf 1) (leaf 2)")

    def test_leaf_indices_must_be_in_order(self):
        with pytest.raises(ParseError, match="contiguous"):
            parse_tree("(nuc=NN (leaf 2) (leaf 1))")
        with pytest.raises(ParseError, match="contiguous"):
            parse_tree("(nuc=NN (leaf 1) (leaf 3))")

    def test_mixed_annotation_rejected(self):
        with pytest.raises(ParseError, match="mixes"):
            parse_tree("(w=0.5,0.5 (nuc=NN (leaf 1) (leaf 2)) (leaf 3))")

    def test_unknown_label(self):
        with pytest.raises(ParseError, match="label"):
            parse_tree("(nuc=XX (leaf 1) (leaf 2))")

    def test_unknown_head(self):
        with pytest.raises(ParseError, match="head"):
            parse_tree("(split (leaf 1) (leaf 2))")

    def test_parse_trees_reports_line_numbers(self):
        text = "a\t(leaf 1)\nb\t(nuc=NS (leaf 1)\n"
        with pytest.raises(ParseError, match="line 2"):
            parse_trees(text)

    def test_serialize_requires_annotation(self):
        bare = TreebankDocument(doc_id="d", tree=DiscourseTree(Internal(Leaf(1), Leaf(2))))
        with pytest.raises(ValueError):
            serialize_tree(bare)


class TestSignals:
    TEXT = "d1\t1\t0.9\t0.5\nd1\t2\t0.2\t1.0\nd2\t1\t0.5\t0.3\n"

    def test_parse_groups_by_document(self):
        signals = parse_signals(self.TEXT)
        assert list(signals) == ["d1", "d2"]
        assert signals["d1"][1].sentiment == 0.2
        assert signals["d2"][0].attention == 0.3

    def test_sentiment_range_enforced(self):
        with pytest.raises(ParseError, match="sentiment"):
            parse_signals("d\t1\t1.5\t0.5\n")

    def test_attention_must_be_positive(self):
        with pytest.raises(ParseError, match="attention"):
            parse_signals("d\t1\t0.5\t0.0\n")

    def test_indices_contiguous_within_document(self):
        with pytest.raises(ParseError, match="contiguous"):
            parse_signals("d\t1\t0.5\t0.5\nd\t3\t0.5\t0.5\n")

    def test_column_count(self):
        with pytest.raises(ParseError, match="columns"):
            parse_signals("d\t1\t0.5\n")


class TestAttention:
    def test_parse_square_matrix(self):
        text = "d\t2\t0.0 0.3 0.7 0.0\n"
        matrices = parse_attention(text)
        assert matrices["d"].n == 2
        assert matrices["d"].values[1, 0] == 0.7

    def test_entry_count_checked(self):
        with pytest.raises(ParseError, match="entries"):
            parse_attention("d\t2\t0.0 0.3 0.7\n")

    def test_negative_entries_rejected(self):
        with pytest.raises(ParseError, match="negative"):
            parse_attention("d\t2\t0.0 -0.3 0.7 0.0\n")

    def test_non_finite_rejected(self):
        with pytest.raises(ParseError, match="finite"):
            parse_attention("d\t2\t0.0 inf 0.7 0.0\n")

    def test_zero_matrix_warns_but_loads(self, caplog):
        with caplog.at_level(logging.WARNING, logger="wrst.treebank"):
            matrices = parse_attention("d\t3\t" + " ".join(["0.0"] * 9) + "\n")
        assert matrices["d"].n == 3
        assert any("off-diagonal" in r.message for r in caplog.records)

    def test_single_edu_matrix(self):
        matrices = parse_attention("d\t1\t0.0\n")
        assert matrices["d"].n == 1

    def test_matrix_must_be_square(self):
        with pytest.raises(ValueError, match="square"):
            AttentionMatrix(np.zeros((2, 3)))


class TestEmbeddings:
    TEXT = "DIM 3\nthe 0.1 0.2 0.3\ncat 1.0 0.0 -1.0\n"

    def test_parse_and_lookup(self):
        table = parse_embeddings(self.TEXT)
        assert table.dim == 3
        assert table.lookup("cat")[2] == -1.0

    def test_unknown_token_gets_zero_fallback(self):
        table = parse_embeddings(self.TEXT)
        assert np.array_equal(table.lookup("dog"), np.zeros(3))

    def test_header_required(self):
        with pytest.raises(ParseError, match="DIM"):
            parse_embeddings("the 0.1 0.2 0.3\n")

    def test_dimension_mismatch(self):
        with pytest.raises(ParseError, match="expected token plus 3"):
            parse_embeddings("DIM 3\nthe 0.1 0.2\n")


class TestDocuments:
    TEXT = "d1\t3\tthe cat sat|on the mat\nd2\t0\tso good\n"

    def test_parse(self):
        docs = parse_documents(self.TEXT)
        assert docs[0].doc_id == "d1"
        assert docs[0].gold_label == 3
        assert docs[0].edus == (("the", "cat", "sat"), ("on", "the", "mat"))
        assert docs[1].n_edus == 1

    def test_empty_edu_rejected(self):
        with pytest.raises(ParseError, match="empty EDU"):
            parse_documents("d\t1\tthe cat||on the mat\n")

    def test_label_must_be_integer(self):
        with pytest.raises(ParseError, match="label"):
            parse_documents("d\tpos\tthe cat\n")
