"""Exact CKY induction of weighted trees from an attention matrix.

Splitting the span ``i..j`` after EDU ``k`` is scored by how strongly the
two sides attend to each other.  With ``A[u, v]`` read as "u relies on v"::

    left_reliance  = max A[(k+1)..j, i..k]   (right side relying on left)
    right_reliance = max A[i..k, (k+1)..j]   (left side relying on right)

The split's score is the sum of the two reliances and the node's weight
pair is the pair of reliances normalized by that sum.  A dynamic program
maximizes the total score over all internal nodes exactly; score ties go
to the smaller split position at every span.  Both reliances can be zero,
in which case the weights fall back to an even (0.5, 0.5) and the split
is flagged as degenerate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .tree import DiscourseTree, Internal, Leaf, Node, span_index
from .treebank import AttentionMatrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitScore:
    """Scored split of the span ``start..end`` after EDU ``split``."""

    start: int
    end: int
    split: int
    left_reliance: float
    right_reliance: float

    @property
    def score(self) -> float:
        return self.left_reliance + self.right_reliance

    @property
    def degenerate(self) -> bool:
        """True when neither side attends to the other at all."""
        return self.score == 0.0

    @property
    def weights(self) -> tuple[float, float]:
        if self.degenerate:
            return 0.5, 0.5
        return self.left_reliance / self.score, self.right_reliance / self.score


def split_score(m: AttentionMatrix, start: int, split: int, end: int) -> SplitScore:
    """Score splitting ``start..end`` (1-based, inclusive) after ``split``."""
    if not 1 <= start <= split < end <= m.n:
        raise ValueError(f"invalid split ({start}, {split}, {end}) for {m.n} EDUs")
    v = m.values
    left_reliance = float(v[split:end, start - 1:split].max())
    right_reliance = float(v[start - 1:split, split:end].max())
    return SplitScore(start, end, split, left_reliance, right_reliance)


def split_weights(m: AttentionMatrix, start: int, split: int, end: int) -> tuple[float, float]:
    """Weight pair for one split; even weights when the score is zero."""
    s = split_score(m, start, split, end)
    if s.degenerate:
        log.warning(
            "span (%d, %d) split at %d has zero cross-attention; using even weights",
            start,
            end,
            split,
        )
    return s.weights


def induce_tree(m: AttentionMatrix) -> DiscourseTree:
    """Build the weighted tree maximizing the summed split scores."""
    n = m.n
    if n == 1:
        return DiscourseTree(Leaf(1))

    best_score: dict[tuple[int, int], float] = {}
    best_split: dict[tuple[int, int], int] = {}
    for i in range(1, n + 1):
        best_score[(i, i)] = 0.0

    for length in range(2, n + 1):
        for start in range(1, n - length + 2):
            end = start + length - 1
            top = None
            top_split = None
            for split in range(start, end):
                total = (
                    best_score[(start, split)]
                    + best_score[(split + 1, end)]
                    + split_score(m, start, split, end).score
                )
                if top is None or total > top:
                    top = total
                    top_split = split
            best_score[(start, end)] = top
            best_split[(start, end)] = top_split

    degenerate = 0

    def build(start: int, end: int) -> Node:
        nonlocal degenerate
        if start == end:
            return Leaf(start)
        split = best_split[(start, end)]
        s = split_score(m, start, split, end)
        if s.degenerate:
            degenerate += 1
        wl, wr = s.weights
        return Internal(build(start, split), build(split + 1, end), weight_left=wl, weight_right=wr)

    root = build(1, n)
    if degenerate:
        log.warning("%d of %d splits had zero cross-attention", degenerate, n - 1)
    return DiscourseTree(root)


def tree_score(m: AttentionMatrix, tree: DiscourseTree) -> float:
    """Total split score of an existing tree under the matrix."""
    if tree.n_edus != m.n:
        raise ValueError(f"tree covers {tree.n_edus} EDUs but the matrix has {m.n}")
    total = 0.0
    for (start, end, split) in span_index(tree):
        total += split_score(m, start, split, end).score
    return total
