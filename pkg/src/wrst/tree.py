"""Binary discourse trees with importance weights or nuclearity labels.

A discourse tree covers a document segmented into elementary discourse
units (EDUs), numbered 1..n from left to right.  Every internal node has
exactly two children and may carry either a ``(weight_left, weight_right)``
pair that splits importance between the subtrees (the pair sums to 1), or
one of the classical nuclearity labels NN / NS / SN, or no annotation.

A tree is *weighted* when every internal node carries a weight pair and
*nuclearity-labeled* when every internal node carries a label.  Mixing
annotated and unannotated internal nodes is reported by :func:`validate`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

WEIGHT_SUM_TOL = 1e-9

EduId = int


class NucLabel(Enum):
    """Nuclearity of a binary node: both nuclei, or nucleus-satellite order."""

    NN = "NN"
    NS = "NS"
    SN = "SN"


@dataclass(frozen=True)
class Leaf:
    """A single EDU."""

    edu: EduId


@dataclass(frozen=True)
class Internal:
    """A binary constituent over two adjacent subtrees."""

    left: Node
    right: Node
    weight_left: float | None = None
    weight_right: float | None = None
    nuc: NucLabel | None = None

    @property
    def has_weights(self) -> bool:
        return self.weight_left is not None and self.weight_right is not None


Node = Leaf | Internal


@dataclass(frozen=True)
class DiscourseTree:
    """A binary tree over the EDUs of one document."""

    root: Node

    @property
    def n_edus(self) -> int:
        return len(self.leaves())

    def leaves(self) -> list[Leaf]:
        out: list[Leaf] = []
        _collect_leaves(self.root, out)
        return out

    def internals(self) -> list[Internal]:
        out: list[Internal] = []
        _collect_internals(self.root, out)
        return out

    @property
    def is_weighted(self) -> bool:
        """True when every internal node carries a weight pair."""
        return all(n.has_weights for n in self.internals())

    @property
    def is_labeled(self) -> bool:
        """True when every internal node carries a nuclearity label."""
        return all(n.nuc is not None for n in self.internals())


def _collect_leaves(node: Node, out: list[Leaf]) -> None:
    if isinstance(node, Leaf):
        out.append(node)
    else:
        _collect_leaves(node.left, out)
        _collect_leaves(node.right, out)


def _collect_internals(node: Node, out: list[Internal]) -> None:
    if isinstance(node, Internal):
        out.append(node)
        _collect_internals(node.left, out)
        _collect_internals(node.right, out)


def validate(tree: DiscourseTree) -> list[str]:
    """Check structural invariants, returning one message per violation.

    Checked: the leaf sequence reads exactly 1..n, weight pairs are complete,
    lie in [0, 1] and sum to 1 within ``WEIGHT_SUM_TOL``, and weight / label
    annotation is all-or-none across internal nodes.  An empty list means
    the tree is valid.
    """
    problems: list[str] = []

    leaves = tree.leaves()
    expected = list(range(1, len(leaves) + 1))
    actual = [leaf.edu for leaf in leaves]
    if actual != expected:
        problems.append(
            f"root: leaf sequence {actual} is not contiguous 1..{len(leaves)}"
        )

    weighted_paths: list[str] = []
    unweighted_paths: list[str] = []
    labeled_paths: list[str] = []
    unlabeled_paths: list[str] = []

    def walk(node: Node, path: str) -> None:
        if isinstance(node, Leaf):
            return
        if (node.weight_left is None) != (node.weight_right is None):
            problems.append(f"{path}: weight pair is incomplete")
        if node.has_weights:
            weighted_paths.append(path)
            wl, wr = node.weight_left, node.weight_right
            if not (0.0 <= wl <= 1.0 and 0.0 <= wr <= 1.0):
                problems.append(f"{path}: weights ({wl!r}, {wr!r}) outside [0, 1]")
            if abs(wl + wr - 1.0) > WEIGHT_SUM_TOL:
                problems.append(f"{path}: weights sum to {wl + wr!r}, expected 1")
        else:
            unweighted_paths.append(path)
        (labeled_paths if node.nuc is not None else unlabeled_paths).append(path)
        walk(node.left, path + ".left")
        walk(node.right, path + ".right")

    walk(tree.root, "root")

    if weighted_paths and unweighted_paths:
        problems.append(f"{unweighted_paths[0]}: tree is only partially weighted")
    if labeled_paths and unlabeled_paths:
        problems.append(f"{unlabeled_paths[0]}: tree is only partially labeled")
    return problems


def node_levels(tree: DiscourseTree) -> dict[Node, int]:
    """Assign each node its height above the deepest leaf.

    The deepest leaf sits at level 0 and every step toward the root adds
    one, so the root's level equals the maximum leaf depth.  Along any
    root-to-leaf path the level drops by exactly one per edge.
    """
    depths: list[tuple[Node, int]] = []

    def walk(node: Node, depth: int) -> None:
        depths.append((node, depth))
        if isinstance(node, Internal):
            walk(node.left, depth + 1)
            walk(node.right, depth + 1)

    walk(tree.root, 0)
    max_leaf_depth = max(d for node, d in depths if isinstance(node, Leaf))
    return {node: max_leaf_depth - d for node, d in depths}


def path_weight_products(tree: DiscourseTree) -> dict[EduId, float]:
    """Product of branch weights along the root-to-leaf path, per EDU.

    On a weighted tree these products form a convex combination: they sum
    to 1 (up to rounding) and equal each leaf's effective contribution to
    any bottom-up weighted aggregate.
    """
    out: dict[EduId, float] = {}

    def walk(node: Node, acc: float) -> None:
        if isinstance(node, Leaf):
            out[node.edu] = acc
            return
        if not node.has_weights:
            raise ValueError("path_weight_products requires a fully weighted tree")
        walk(node.left, acc * node.weight_left)
        walk(node.right, acc * node.weight_right)

    walk(tree.root, 1.0)
    return out


def span_index(tree: DiscourseTree) -> dict[tuple[int, int, int], Internal]:
    """Map every internal node to its ``(start, end, split)`` span triple.

    ``start`` and ``end`` are the first and last covered EDU, ``split`` the
    last EDU of the left child.  Spans are unique within a valid tree.
    """
    table: dict[tuple[int, int, int], Internal] = {}

    def walk(node: Node) -> tuple[int, int]:
        if isinstance(node, Leaf):
            return node.edu, node.edu
        ls, le = walk(node.left)
        rs, re = walk(node.right)
        table[(ls, re, le)] = node
        return ls, re

    walk(tree.root)
    return table


# --- binarization of n-ary input trees ------------------------------------

@dataclass(frozen=True)
class NaryLeaf:
    edu: EduId


@dataclass(frozen=True)
class NaryInternal:
    """An n-ary constituent with one nucleus/satellite role per child."""

    children: tuple[NaryNode, ...]
    roles: tuple[str, ...]  # 'N' or 'S', aligned with children

    def __post_init__(self) -> None:
        if len(self.children) < 1:
            raise ValueError("internal node has an empty child list")
        if len(self.roles) != len(self.children):
            raise ValueError("one role per child is required")
        if any(r not in ("N", "S") for r in self.roles):
            raise ValueError(f"roles must be 'N' or 'S', got {self.roles!r}")


NaryNode = NaryLeaf | NaryInternal


def _group_role(roles: tuple[str, ...]) -> str:
    return "N" if "N" in roles else "S"


_PAIR_LABELS = {
    ("N", "N"): NucLabel.NN,
    ("N", "S"): NucLabel.NS,
    ("S", "N"): NucLabel.SN,
    # Sibling satellites of a shared nucleus: neither side dominates.
    ("S", "S"): NucLabel.NN,
}


def binarize(root: NaryNode) -> DiscourseTree:
    """Right-branching binarization preserving the leaf order.

    A node with children ``c1..ck`` becomes ``(c1, (c2, (... ck)))``.  The
    label of each synthetic node restricts the parent's role pattern to the
    children it covers; a group counts as nucleus if any member is one.
    Unary chains collapse into their single child.
    """

    def convert(node: NaryNode) -> Node:
        if isinstance(node, NaryLeaf):
            return Leaf(node.edu)
        if len(node.children) == 1:
            return convert(node.children[0])
        return spine(node.children, node.roles)

    def spine(children: tuple[NaryNode, ...], roles: tuple[str, ...]) -> Node:
        if len(children) == 1:
            return convert(children[0])
        label = _PAIR_LABELS[(roles[0], _group_role(roles[1:]))]
        return Internal(convert(children[0]), spine(children[1:], roles[1:]), nuc=label)

    return DiscourseTree(convert(root))
