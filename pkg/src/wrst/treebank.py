"""Reading and writing the line-oriented treebank file formats.

All files are UTF-8 text.

Tree file
    One document per line: ``doc_id<TAB>sexpr``.  The s-expression grammar::

        node  := "(leaf " INT ")" | "(" attrs " " node " " node ")"
        attrs := "w=" FLOAT "," FLOAT | "nuc=" ("NN" | "NS" | "SN")

    Weight pairs are renormalized on load when their sum is within 1e-6
    of 1 and rejected otherwise.  A file may not mix weighted and
    nuclearity-labeled nodes inside one tree.

Signals file
    TSV with columns ``doc_id  edu_index  sentiment  attention``; one row
    per EDU, indices contiguous from 1 within each document.

Attention file
    One record per line: ``doc_id<TAB>n<TAB>`` followed by n*n
    whitespace-separated floats, row-major.  Entry (i, j) is how much EDU i
    relies on EDU j; the diagonal is carried but never interpreted.

Embeddings file
    Header line ``DIM d`` followed by ``token v1 ... vd`` rows.

Documents file
    TSV ``doc_id<TAB>gold_label<TAB>edus`` where ``edus`` are EDU token
    lists joined by ``|`` and tokens are space-separated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .tree import DiscourseTree, Internal, Leaf, Node, NucLabel

log = logging.getLogger(__name__)

WEIGHT_LOAD_TOL = 1e-6


class ParseError(ValueError):
    """Raised when an input file does not follow its documented format."""


@dataclass(frozen=True)
class TreebankDocument:
    """One document's tree, keyed by the identifier used across all files."""

    doc_id: str
    tree: DiscourseTree
    gold_label: int | None = None

    @property
    def n_edus(self) -> int:
        return self.tree.n_edus


@dataclass(frozen=True)
class LeafSignal:
    """Per-EDU sentiment (in [0, 1]) and positive attention mass."""

    edu: int
    sentiment: float
    attention: float


@dataclass(frozen=True)
class AttentionMatrix:
    """Square EDU-to-EDU reliance matrix for one document."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"attention matrix must be square, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("attention matrix has non-finite entries")
        if np.any(v < 0):
            raise ValueError("attention matrix has negative entries")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass
class EmbeddingTable:
    """Token vectors with a shared dimension and an unknown-token fallback."""

    dim: int
    vectors: dict[str, np.ndarray]
    fallback: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.fallback is None:
            self.fallback = np.zeros(self.dim)

    def lookup(self, token: str) -> np.ndarray:
        return self.vectors.get(token, self.fallback)


@dataclass(frozen=True)
class DocumentTokens:
    """The tokenized EDUs of one document plus its gold class label."""

    doc_id: str
    edus: tuple[tuple[str, ...], ...]
    gold_label: int | None = None

    @property
    def n_edus(self) -> int:
        return len(self.edus)


# --- trees -----------------------------------------------------------------

def _tokenize_sexpr(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_node(tokens: list[str], pos: int) -> tuple[Node, int]:
    if pos >= len(tokens):
        raise ParseError("unbalanced parentheses: unexpected end of input")
    if tokens[pos] != "(":
        raise ParseError(f"expected '(' at token {pos}, got {tokens[pos]!r}")
    pos += 1
    if pos >= len(tokens):
        raise ParseError("unbalanced parentheses: unexpected end of input")
    head = tokens[pos]

    if head == "leaf":
        if pos + 1 >= len(tokens):
            raise ParseError("leaf node is missing its EDU index")
        try:
            edu = int(tokens[pos + 1])
        except ValueError:
            raise ParseError(f"leaf index {tokens[pos + 1]!r} is not an integer") from None
        node: Node = Leaf(edu)
        pos += 2
    elif head.startswith("w="):
        parts = head[2:].split(",")
        if len(parts) != 2:
            raise ParseError(f"malformed weight attribute {head!r}")
        try:
            wl, wr = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"malformed weight attribute {head!r}") from None
        total = wl + wr
        if not (math.isfinite(total) and abs(total - 1.0) <= WEIGHT_LOAD_TOL):
            raise ParseError(f"weight pair ({parts[0]}, {parts[1]}) does not sum to 1")
        left, pos = _parse_node(tokens, pos + 1)
        right, pos = _parse_node(tokens, pos)
        node = Internal(left, right, weight_left=wl / total, weight_right=wr / total)
    elif head.startswith("nuc="):
        label = head[4:]
        if label not in NucLabel.__members__:
            raise ParseError(f"unknown nuclearity label {label!r}")
        left, pos = _parse_node(tokens, pos + 1)
        right, pos = _parse_node(tokens, pos)
        node = Internal(left, right, nuc=NucLabel[label])
    else:
        raise ParseError(f"unknown node head {head!r}")

    if pos >= len(tokens) or tokens[pos] != ")":
        raise ParseError("unbalanced parentheses: missing ')'")
    return node, pos + 1


def parse_tree(text: str) -> TreebankDocument:
    """Parse one tree line (``doc_id<TAB>sexpr``) or a bare s-expression."""
    doc_id = ""
    body = text.strip("\n")
    if "\t" in body:
        doc_id, body = body.split("\t", 1)
    tokens = _tokenize_sexpr(body)
    if not tokens:
        raise ParseError("empty tree expression")
    root, pos = _parse_node(tokens, 0)
    if pos != len(tokens):
        raise ParseError(f"trailing tokens after tree: {tokens[pos:]!r}")

    tree = DiscourseTree(root)
    edus = [leaf.edu for leaf in tree.leaves()]
    if edus != list(range(1, len(edus) + 1)):
        raise ParseError(f"leaf indices {edus} are not contiguous 1..{len(edus)}")
    internals = tree.internals()
    has_w = any(n.has_weights for n in internals)
    has_nuc = any(n.nuc is not None for n in internals)
    if has_w and has_nuc:
        raise ParseError("tree mixes weighted and nuclearity-labeled nodes")
    return TreebankDocument(doc_id=doc_id, tree=tree)


def parse_trees(text: str) -> list[TreebankDocument]:
    """Parse a tree file; blank lines are ignored."""
    docs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            docs.append(parse_tree(line))
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return docs


def serialize_node(node: Node) -> str:
    if isinstance(node, Leaf):
        return f"(leaf {node.edu})"
    if node.has_weights:
        attrs = f"w={node.weight_left!r},{node.weight_right!r}"
    elif node.nuc is not None:
        attrs = f"nuc={node.nuc.value}"
    else:
        raise ValueError("cannot serialize an internal node without annotation")
    return f"({attrs} {serialize_node(node.left)} {serialize_node(node.right)})"


def serialize_tree(doc: TreebankDocument) -> str:
    """Render one tree file line, ``doc_id<TAB>sexpr``."""
    return f"{doc.doc_id}\t{serialize_node(doc.tree.root)}"


def serialize_trees(docs: list[TreebankDocument]) -> str:
    return "".join(serialize_tree(d) + "\n" for d in docs)


# --- leaf signals ----------------------------------------------------------

def parse_signals(text: str) -> dict[str, list[LeafSignal]]:
    """Parse a signals TSV into per-document EDU signal lists."""
    by_doc: dict[str, list[LeafSignal]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(f"line {lineno}: expected 4 columns, got {len(fields)}")
        doc_id, idx_s, sent_s, att_s = fields
        try:
            idx, sent, att = int(idx_s), float(sent_s), float(att_s)
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric field") from None
        if not (math.isfinite(sent) and 0.0 <= sent <= 1.0):
            raise ParseError(f"line {lineno}: sentiment {sent_s} outside [0, 1]")
        if not (math.isfinite(att) and att > 0.0):
            raise ParseError(f"line {lineno}: attention {att_s} must be positive")
        by_doc.setdefault(doc_id, []).append(LeafSignal(idx, sent, att))

    for doc_id, signals in by_doc.items():
        indices = [s.edu for s in signals]
        if indices != list(range(1, len(indices) + 1)):
            raise ParseError(f"document {doc_id!r}: EDU indices {indices} not contiguous from 1")
    return by_doc


# --- attention matrices ----------------------------------------------------

def parse_attention(text: str) -> dict[str, AttentionMatrix]:
    """Parse an attention file into per-document square matrices."""
    out: dict[str, AttentionMatrix] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"line {lineno}: expected 'doc_id<TAB>n<TAB>values'")
        doc_id, n_s, values_s = fields
        try:
            n = int(n_s)
        except ValueError:
            raise ParseError(f"line {lineno}: size {n_s!r} is not an integer") from None
        if n < 1:
            raise ParseError(f"line {lineno}: size must be at least 1")
        raw = values_s.split()
        if len(raw) != n * n:
            raise ParseError(
                f"line {lineno}: expected {n * n} matrix entries, got {len(raw)}"
            )
        try:
            values = np.array([float(x) for x in raw], dtype=float).reshape(n, n)
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric matrix entry") from None
        try:
            matrix = AttentionMatrix(values)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        off_diag = values[~np.eye(n, dtype=bool)]
        if n >= 2 and not np.any(off_diag > 0):
            log.warning(
                "document %r: attention has no positive off-diagonal entry; "
                "every split will fall back to even weights",
                doc_id,
            )
        out[doc_id] = matrix
    return out


# --- embeddings ------------------------------------------------------------

def parse_embeddings(text: str) -> EmbeddingTable:
    """Parse an embeddings file (``DIM d`` header, then token rows)."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("DIM "):
        raise ParseError("embeddings file must start with a 'DIM d' header")
    try:
        dim = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise ParseError(f"malformed header {lines[0]!r}") from None
    if dim < 1:
        raise ParseError("embedding dimension must be at least 1")

    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != dim + 1:
            raise ParseError(
                f"line {lineno}: expected token plus {dim} values, got {len(parts)} fields"
            )
        try:
            vectors[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=float)
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric vector entry") from None
    return EmbeddingTable(dim=dim, vectors=vectors)


# --- documents -------------------------------------------------------------

def parse_documents(text: str) -> list[DocumentTokens]:
    """Parse a documents TSV into tokenized EDU lists with gold labels."""
    docs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"line {lineno}: expected 3 columns, got {len(fields)}")
        doc_id, label_s, edus_s = fields
        try:
            label = int(label_s)
        except ValueError:
            raise ParseError(f"line {lineno}: gold label {label_s!r} is not an integer") from None
        edus = tuple(tuple(chunk.split()) for chunk in edus_s.split("|"))
        if any(len(edu) == 0 for edu in edus):
            raise ParseError(f"line {lineno}: document {doc_id!r} has an empty EDU")
        docs.append(DocumentTokens(doc_id=doc_id, edus=edus, gold_label=label))
    return docs
