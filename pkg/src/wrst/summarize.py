"""Unsupervised extractive summarization from discourse trees.

Two scoring schemes rank EDUs by structural importance.  On a
nuclearity-labeled tree, every node promotes the EDUs of its nucleus
children, and an EDU scores the level of the highest node that promotes
it (levels count up from 0 at the deepest leaf).  On a weighted tree the
hard promotion is relaxed: an EDU scores its leaf level plus the sum of
the weights each node on its root path received from its parent, with the
root receiving a configurable constant (0 by default -- any other value
shifts all scores equally and changes nothing about the ranking).

Either way the top-k EDUs form the summary, in document order.  When an
exact score tie straddles the cutoff, the remaining slots are drawn
uniformly among the tied EDUs with a seeded generator; fully included or
excluded score groups are never randomized.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .tree import DiscourseTree, Internal, Leaf, Node, NucLabel, node_levels

SUMMARY_MODES = ("promotion", "weighted")


class UnitScore(NamedTuple):
    edu: int
    score: float


def promotion_sets(tree: DiscourseTree) -> dict[Node, frozenset[int]]:
    """The EDUs each node promotes: itself for a leaf, the union of its
    nucleus children's sets for an internal node."""
    table: dict[Node, frozenset[int]] = {}

    def walk(node: Node) -> frozenset[int]:
        if isinstance(node, Leaf):
            table[node] = frozenset([node.edu])
            return table[node]
        if node.nuc is None:
            raise ValueError("promotion sets require a fully labeled tree")
        left = walk(node.left)
        right = walk(node.right)
        if node.nuc is NucLabel.NN:
            promoted = left | right
        elif node.nuc is NucLabel.NS:
            promoted = left
        else:
            promoted = right
        table[node] = promoted
        return promoted

    walk(tree.root)
    return table


def score_promotion(tree: DiscourseTree) -> list[UnitScore]:
    """Score each EDU by the level of the highest node promoting it."""
    levels = node_levels(tree)
    promoted = promotion_sets(tree)
    scores: dict[int, float] = {}

    def walk(node: Node) -> None:
        # Pre-order, so the first node claiming an EDU is the highest one.
        for edu in promoted[node]:
            if edu not in scores:
                scores[edu] = float(levels[node])
        if isinstance(node, Internal):
            walk(node.left)
            walk(node.right)

    walk(tree.root)
    return [UnitScore(edu, scores[edu]) for edu in sorted(scores)]


def score_weighted(tree: DiscourseTree, root_weight: float = 0.0) -> list[UnitScore]:
    """Score each EDU by its leaf level plus its root path's received weights."""
    levels = node_levels(tree)
    scores: dict[int, float] = {}

    def walk(node: Node, acc: float) -> None:
        if isinstance(node, Leaf):
            scores[node.edu] = acc + levels[node]
            return
        if not node.has_weights:
            raise ValueError("weighted scoring requires a fully weighted tree")
        walk(node.left, acc + node.weight_left)
        walk(node.right, acc + node.weight_right)

    walk(tree.root, root_weight)
    return [UnitScore(edu, scores[edu]) for edu in sorted(scores)]


def select_summary(
    scores: Sequence[UnitScore],
    k: int,
    mode: str = "weighted",
    seed: int = 0,
) -> list[int]:
    """Pick the k highest-scoring EDUs, returned in document order."""
    if mode not in SUMMARY_MODES:
        raise ValueError(f"mode must be one of {SUMMARY_MODES}, got {mode!r}")
    if not scores:
        raise ValueError("cannot summarize an empty score list")
    if not 1 <= k <= len(scores):
        raise ValueError(f"summary size {k} outside 1..{len(scores)}")

    ranked = sorted(scores, key=lambda u: -u.score)
    cutoff = ranked[k - 1].score
    certain = [u.edu for u in scores if u.score > cutoff]
    tied = [u.edu for u in scores if u.score == cutoff]
    slots = k - len(certain)
    if slots < len(tied):
        tied = random.Random(seed).sample(tied, slots)
    return sorted(certain + tied)


# --- ROUGE -----------------------------------------------------------------

@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class RougeReport:
    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    empty_reference: bool = False

    @property
    def average_f1(self) -> float:
        return (self.rouge1.f1 + self.rouge2.f1 + self.rougeL.f1) / 3.0


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization plus lowercasing; nothing else."""
    return text.lower().split()


def _prf(overlap: int, candidate_total: int, reference_total: int) -> RougeScore:
    precision = overlap / candidate_total if candidate_total else 0.0
    recall = overlap / reference_total if reference_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return RougeScore(precision, recall, f1)


def _ngrams(tokens: Sequence[str], order: int) -> Counter:
    return Counter(tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1))


def _rouge_n(candidate: Sequence[str], reference: Sequence[str], order: int) -> RougeScore:
    cand = _ngrams(candidate, order)
    ref = _ngrams(reference, order)
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    return _prf(overlap, sum(cand.values()), sum(ref.values()))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


def rouge(candidate: Sequence[str], reference: Sequence[str]) -> RougeReport:
    """ROUGE-1, ROUGE-2 and ROUGE-L between two token sequences.

    An empty reference yields all-zero scores with ``empty_reference`` set.
    """
    if len(reference) == 0:
        zero = RougeScore(0.0, 0.0, 0.0)
        return RougeReport(zero, zero, zero, empty_reference=True)
    lcs = _lcs_length(candidate, reference)
    return RougeReport(
        rouge1=_rouge_n(candidate, reference, 1),
        rouge2=_rouge_n(candidate, reference, 2),
        rougeL=_prf(lcs, len(candidate), len(reference)),
    )
