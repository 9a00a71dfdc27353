"""CKY induction of weighted trees from per-EDU sentiment and attention.

Merging two adjacent constituents combines their signals::

    sentiment = (s_l * a_l + s_r * a_r) / (a_l + a_r)
    attention = (a_l + a_r) / 2

and assigns the node the attention shares ``(a_l, a_r) / (a_l + a_r)`` as
its weight pair.  The chart is filled level by level (all spans of one
length form a level) keeping a fixed-size beam per span, ranked by how
close the span's sentiment comes to the document's gold value.

With a temperature of zero the beam keeps the best-scoring candidates
outright.  A positive starting temperature instead samples the beam
without replacement from a softmax over ``-|sentiment - gold| / tau``,
with tau falling linearly from its starting value at the first merge
level to zero at the root level, so early structure is explored and the
final choice is greedy.  All randomness comes from the configured seed.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass

from .tree import DiscourseTree, Internal, Leaf, Node
from .treebank import LeafSignal

log = logging.getLogger(__name__)

DEDUP_DECIMALS = 12


@dataclass(frozen=True)
class BeamConfig:
    """Search settings; identical settings and inputs give identical trees."""

    beam_size: int = 10
    tau_start: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.beam_size < 1:
            raise ValueError(f"beam size must be at least 1, got {self.beam_size}")
        if self.tau_start < 0:
            raise ValueError(f"starting temperature must be >= 0, got {self.tau_start!r}")


@dataclass(frozen=True, eq=False)
class SpanCandidate:
    """One partial analysis of the EDUs ``start..end``."""

    start: int
    end: int
    sentiment: float
    attention: float
    split: int | None = None
    left: SpanCandidate | None = None
    right: SpanCandidate | None = None
    weight_left: float | None = None
    weight_right: float | None = None


def merge(left: SpanCandidate, right: SpanCandidate) -> SpanCandidate:
    """Combine two adjacent candidates into their parent span."""
    if left.end + 1 != right.start:
        raise ValueError(
            f"spans ({left.start}, {left.end}) and ({right.start}, {right.end}) are not adjacent"
        )
    total = left.attention + right.attention
    return SpanCandidate(
        start=left.start,
        end=right.end,
        sentiment=(left.sentiment * left.attention + right.sentiment * right.attention) / total,
        attention=total / 2.0,
        split=left.end,
        left=left,
        right=right,
        weight_left=left.attention / total,
        weight_right=right.attention / total,
    )


def label_to_unit(gold_label: int, num_classes: int) -> float:
    """Map an integer class label onto the unit interval."""
    if num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {num_classes}")
    if not 0 <= gold_label < num_classes:
        raise ValueError(f"label {gold_label} outside 0..{num_classes - 1}")
    return gold_label / (num_classes - 1)


def _retain(
    candidates: list[SpanCandidate],
    beam_size: int,
    tau: float,
    gold: float,
    rng: random.Random,
) -> list[SpanCandidate]:
    """Cut a span's candidate list down to the beam.

    Candidates arrive ordered by (split, left slot, right slot), so a
    stable sort on the gap to gold breaks score ties toward the smaller
    split and earlier insertion.
    """
    if tau <= 0.0:
        return sorted(candidates, key=lambda c: abs(c.sentiment - gold))[:beam_size]

    logits = [-abs(c.sentiment - gold) / tau for c in candidates]
    chosen: list[SpanCandidate] = []
    remaining = list(range(len(candidates)))
    for _ in range(min(beam_size, len(remaining))):
        peak = max(logits[i] for i in remaining)
        weights = [math.exp(logits[i] - peak) for i in remaining]
        target = rng.random() * sum(weights)
        acc = 0.0
        pick = len(remaining) - 1
        for slot, weight in enumerate(weights):
            acc += weight
            if target <= acc:
                pick = slot
                break
        chosen.append(candidates[remaining.pop(pick)])
    return chosen


def induce_tree(
    signals: list[LeafSignal],
    gold: float,
    config: BeamConfig | None = None,
) -> DiscourseTree:
    """Build the weighted tree whose root sentiment best matches ``gold``."""
    if config is None:
        config = BeamConfig()
    if not signals:
        raise ValueError("cannot induce a tree from an empty signal list")
    if not 0.0 <= gold <= 1.0:
        raise ValueError(f"gold sentiment {gold!r} outside [0, 1]")
    indices = [s.edu for s in signals]
    if indices != list(range(1, len(signals) + 1)):
        raise ValueError(f"EDU indices {indices} not contiguous from 1")

    n = len(signals)
    rng = random.Random(config.seed)
    chart: dict[tuple[int, int], list[SpanCandidate]] = {}
    for sig in signals:
        chart[(sig.edu, sig.edu)] = [
            SpanCandidate(start=sig.edu, end=sig.edu, sentiment=sig.sentiment, attention=sig.attention)
        ]

    top_level = n - 1
    for length in range(2, n + 1):
        level = length - 1
        if top_level > 1:
            tau = config.tau_start * (top_level - level) / (top_level - 1)
        else:
            tau = 0.0
        for start in range(1, n - length + 2):
            end = start + length - 1
            merged: list[SpanCandidate] = []
            seen: set[tuple[float, float]] = set()
            for split in range(start, end):
                for lc in chart[(start, split)]:
                    for rc in chart[(split + 1, end)]:
                        cand = merge(lc, rc)
                        key = (round(cand.sentiment, DEDUP_DECIMALS), round(cand.attention, DEDUP_DECIMALS))
                        if key in seen:
                            continue
                        seen.add(key)
                        merged.append(cand)
            chart[(start, end)] = _retain(merged, config.beam_size, tau, gold, rng)

    best = min(chart[(1, n)], key=lambda c: abs(c.sentiment - gold))
    log.debug("root sentiment %.6f vs gold %.6f over %d EDUs", best.sentiment, gold, n)
    return DiscourseTree(_to_node(best))


def _to_node(cand: SpanCandidate) -> Node:
    if cand.left is None:
        return Leaf(cand.start)
    return Internal(
        _to_node(cand.left),
        _to_node(cand.right),
        weight_left=cand.weight_left,
        weight_right=cand.weight_right,
    )
