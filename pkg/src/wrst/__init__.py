"""Weighted discourse trees: induction, conversion, and evaluation.

The package covers the full pipeline around trees whose internal nodes
carry real-valued importance weights instead of (or converted to and
from) classical nuclearity labels: inducing them from sentiment or
attention signals, discretizing weights into labels and back, scoring
EDUs for extractive summarization, classifying documents from weighted
tree aggregates, and measuring how induced weights spread across
double-annotated nuclearity decisions.
"""

from .tree import (
    DiscourseTree,
    Internal,
    Leaf,
    NaryInternal,
    NaryLeaf,
    NucLabel,
    binarize,
    node_levels,
    path_weight_products,
    validate,
)
from .treebank import (
    AttentionMatrix,
    DocumentTokens,
    EmbeddingTable,
    LeafSignal,
    ParseError,
    TreebankDocument,
    parse_attention,
    parse_documents,
    parse_embeddings,
    parse_signals,
    parse_tree,
    parse_trees,
    serialize_tree,
    serialize_trees,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionMatrix",
    "DiscourseTree",
    "DocumentTokens",
    "EmbeddingTable",
    "Internal",
    "Leaf",
    "LeafSignal",
    "NaryInternal",
    "NaryLeaf",
    "NucLabel",
    "ParseError",
    "TreebankDocument",
    "binarize",
    "node_levels",
    "parse_attention",
    "parse_documents",
    "parse_embeddings",
    "parse_signals",
    "parse_tree",
    "parse_trees",
    "path_weight_products",
    "serialize_tree",
    "serialize_trees",
    "validate",
    "__version__",
]
