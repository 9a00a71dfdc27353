"""Conversion between importance weights and discrete nuclearity labels.

Discretization maps a weighted node to NN when the two weights are closer
than a threshold ``t`` and to NS / SN by the heavier side otherwise.  The
reverse direction assigns every NS / SN node the fixed pair::

    nucleus   = 1 - (1 - 2t) / 4
    satellite = (1 - 2t) / 4

which splits the width of the NN band evenly around its edge, and gives
NN nodes an even (0.5, 0.5) split.
"""

from __future__ import annotations

import logging
from typing import NamedTuple

from .tree import DiscourseTree, Internal, Leaf, Node, NucLabel

log = logging.getLogger(__name__)


class BaselineWeights(NamedTuple):
    nucleus: float
    satellite: float


def _check_threshold(threshold: float) -> None:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold!r}")


def discretize(tree: DiscourseTree, threshold: float) -> DiscourseTree:
    """Replace every weight pair with a nuclearity label.

    A node becomes NN when ``|weight_left - weight_right| < threshold``,
    NS when the left weight is strictly larger, and SN otherwise, so an
    exact tie at threshold 0 lands on SN.  Structure is unchanged and the
    weights are dropped.
    """
    _check_threshold(threshold)

    def convert(node: Node) -> Node:
        if isinstance(node, Leaf):
            return node
        if not node.has_weights:
            raise ValueError("discretize requires a fully weighted tree")
        if abs(node.weight_left - node.weight_right) < threshold:
            label = NucLabel.NN
        elif node.weight_left > node.weight_right:
            label = NucLabel.NS
        else:
            label = NucLabel.SN
        return Internal(convert(node.left), convert(node.right), nuc=label)

    return DiscourseTree(convert(tree.root))


def baseline_weights(threshold: float) -> BaselineWeights:
    """The fixed (nucleus, satellite) pair used when re-weighting labels.

    Applied literally across the whole threshold range; beyond t = 0.5 the
    satellite weight goes negative, which is reported but not clamped.
    """
    _check_threshold(threshold)
    satellite = (1.0 - 2.0 * threshold) / 4.0
    nucleus = 1.0 - satellite
    if satellite < 0.0:
        log.warning(
            "threshold %r puts the satellite weight at %r, outside [0, 1]",
            threshold,
            satellite,
        )
    return BaselineWeights(nucleus, satellite)


def reweight_from_nuclearity(tree: DiscourseTree, threshold: float) -> DiscourseTree:
    """Replace every nuclearity label with its baseline weight pair.

    NS gets (nucleus, satellite), SN the mirror image, and NN an even
    (0.5, 0.5).  Labels are dropped from the result.
    """
    pair = baseline_weights(threshold)

    def convert(node: Node) -> Node:
        if isinstance(node, Leaf):
            return node
        if node.nuc is None:
            raise ValueError("reweight_from_nuclearity requires a fully labeled tree")
        if node.nuc is NucLabel.NN:
            wl, wr = 0.5, 0.5
        elif node.nuc is NucLabel.NS:
            wl, wr = pair.nucleus, pair.satellite
        else:
            wl, wr = pair.satellite, pair.nucleus
        return Internal(convert(node.left), convert(node.right), weight_left=wl, weight_right=wr)

    return DiscourseTree(convert(tree.root))


def nucleus_ratio(tree: DiscourseTree) -> float:
    """Fraction of child slots labeled nucleus, over all internal nodes.

    Each internal node contributes two slots; NN fills both, NS and SN one
    each, so the ratio runs from 0.5 (no NN nodes) to 1.0 (all NN).
    """
    internals = tree.internals()
    if not internals:
        raise ValueError("nucleus ratio is undefined for a single-leaf tree")
    nuclei = 0
    for node in internals:
        if node.nuc is None:
            raise ValueError("nucleus_ratio requires a fully labeled tree")
        nuclei += 2 if node.nuc is NucLabel.NN else 1
    return nuclei / (2 * len(internals))
