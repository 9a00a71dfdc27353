"""Shared helpers: random tree and signal generators for property tests."""

from __future__ import annotations

import random

from wrst.tree import DiscourseTree, Internal, Leaf, NaryInternal, NaryLeaf, Node, NucLabel
from wrst.treebank import LeafSignal

LABELS = (NucLabel.NN, NucLabel.NS, NucLabel.SN)


def random_structure(rng: random.Random, start: int, end: int, annotate) -> Node:
    """Random binary tree over EDUs start..end; ``annotate`` fills each node."""
    if start == end:
        return Leaf(start)
    split = rng.randint(start, end - 1)
    left = random_structure(rng, start, split, annotate)
    right = random_structure(rng, split + 1, end, annotate)
    return annotate(rng, left, right)


def _weighted(rng: random.Random, left: Node, right: Node) -> Internal:
    wl = rng.uniform(0.05, 0.95)
    return Internal(left, right, weight_left=wl, weight_right=1.0 - wl)


def _labeled(rng: random.Random, left: Node, right: Node) -> Internal:
    return Internal(left, right, nuc=rng.choice(LABELS))


def make_weighted_tree(n: int, rng: random.Random) -> DiscourseTree:
    return DiscourseTree(random_structure(rng, 1, n, _weighted))


def make_labeled_tree(n: int, rng: random.Random) -> DiscourseTree:
    return DiscourseTree(random_structure(rng, 1, n, _labeled))


def make_signals(n: int, rng: random.Random) -> list[LeafSignal]:
    return [
        LeafSignal(edu=i, sentiment=rng.random(), attention=rng.uniform(0.1, 2.0))
        for i in range(1, n + 1)
    ]


def make_nary_tree(n: int, rng: random.Random, max_children: int = 4):
    """Random n-ary tree over EDUs 1..n with per-child N/S roles."""

    def build(start: int, end: int):
        if start == end:
            return NaryLeaf(start)
        width = end - start + 1
        count = rng.randint(2, min(max_children, width))
        cuts = sorted(rng.sample(range(start, end), count - 1))
        bounds = [start - 1] + cuts + [end]
        children = tuple(build(lo + 1, hi) for lo, hi in zip(bounds, bounds[1:]))
        roles = ["S"] * count
        for slot in rng.sample(range(count), rng.randint(1, count)):
            roles[slot] = "N"
        return NaryInternal(children=children, roles=tuple(roles))

    return build(1, n)
