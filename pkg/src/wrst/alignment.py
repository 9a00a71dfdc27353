"""Comparing double-annotated nuclearity against induced importance weights.

Two annotators' trees over the same document align on the internal nodes
where both drew the same constituent with the same split.  Each aligned
node falls into one of six unordered label-pair classes (NN/NN, NS/NS,
SN/SN, NN/NS, NN/SN, NS/SN).  Looking the same constituents up in an
induced weighted tree gives each class a *spread*: the mean of
``weight_left - weight_right`` over its members, a signed measure of how
left-heavy the induced weights are where annotators produced that label
combination.

Normalizing subtracts the mean spread of the non-empty classes and
divides by the largest absolute deviation from it, so the normalized
spreads live in [-1, 1] with at least one class at an endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, NamedTuple

from .tree import DiscourseTree, NucLabel, span_index


class PairClass(Enum):
    """Unordered pair of annotator nuclearity labels."""

    NN_NN = "NN/NN"
    NN_NS = "NN/NS"
    NN_SN = "NN/SN"
    NS_NS = "NS/NS"
    NS_SN = "NS/SN"
    SN_SN = "SN/SN"


_CANONICAL = {
    (NucLabel.NN, NucLabel.NN): PairClass.NN_NN,
    (NucLabel.NN, NucLabel.NS): PairClass.NN_NS,
    (NucLabel.NN, NucLabel.SN): PairClass.NN_SN,
    (NucLabel.NS, NucLabel.NS): PairClass.NS_NS,
    (NucLabel.NS, NucLabel.SN): PairClass.NS_SN,
    (NucLabel.SN, NucLabel.SN): PairClass.SN_SN,
}


def classify_pair(nuc_a: NucLabel, nuc_b: NucLabel) -> PairClass:
    """Order-normalized class of two annotator labels."""
    key = (nuc_a, nuc_b) if (nuc_a, nuc_b) in _CANONICAL else (nuc_b, nuc_a)
    return _CANONICAL[key]


class AlignedPair(NamedTuple):
    """An internal node both annotators drew identically."""

    start: int
    end: int
    split: int
    nuc_a: NucLabel
    nuc_b: NucLabel


def aligned_subtrees(a: DiscourseTree, b: DiscourseTree) -> list[AlignedPair]:
    """Internal nodes with identical span and split in both trees."""
    if a.n_edus != b.n_edus:
        raise ValueError(f"trees cover {a.n_edus} and {b.n_edus} EDUs")
    table_a = span_index(a)
    table_b = span_index(b)
    pairs = []
    for key in sorted(set(table_a) & set(table_b)):
        node_a, node_b = table_a[key], table_b[key]
        if node_a.nuc is None or node_b.nuc is None:
            raise ValueError("aligned_subtrees requires nuclearity-labeled trees")
        start, end, split = key
        pairs.append(AlignedPair(start, end, split, node_a.nuc, node_b.nuc))
    return pairs


def join_weighted(
    pairs: Iterable[AlignedPair], weighted: DiscourseTree
) -> tuple[list[tuple[PairClass, float]], int]:
    """Attach each aligned node's induced weight spread.

    Returns ``(observations, excluded)`` where each observation is a
    ``(class, weight_left - weight_right)`` pair and ``excluded`` counts
    aligned nodes absent from the weighted tree.
    """
    table = span_index(weighted)
    observations = []
    excluded = 0
    for pair in pairs:
        node = table.get((pair.start, pair.end, pair.split))
        if node is None:
            excluded += 1
            continue
        if not node.has_weights:
            raise ValueError("join_weighted requires a fully weighted tree")
        spread = node.weight_left - node.weight_right
        observations.append((classify_pair(pair.nuc_a, pair.nuc_b), spread))
    return observations, excluded


@dataclass(frozen=True)
class Cell:
    """Per-class tally; empty cells keep ``mean_spread`` as None."""

    count: int = 0
    mean_spread: float | None = None
    normalized_spread: float | None = None


@dataclass(frozen=True)
class SpreadMatrix:
    """Spread statistics per pair class plus the table-level aggregates."""

    cells: dict[PairClass, Cell] = field(default_factory=dict)
    average: float | None = None
    max_deviation: float | None = None
    excluded: int = 0

    def non_empty(self) -> list[PairClass]:
        return [c for c in PairClass if self.cells[c].count > 0]


def spread_matrix(
    observations: Iterable[tuple[PairClass, float]], excluded: int = 0
) -> SpreadMatrix:
    """Tally per-class counts and mean spreads from joined observations."""
    sums: dict[PairClass, float] = {c: 0.0 for c in PairClass}
    counts: dict[PairClass, int] = {c: 0 for c in PairClass}
    total = 0
    for pair_class, spread in observations:
        sums[pair_class] += spread
        counts[pair_class] += 1
        total += 1
    if total == 0:
        raise ValueError("no aligned nodes to tally")
    cells = {
        c: Cell(count=counts[c], mean_spread=sums[c] / counts[c] if counts[c] else None)
        for c in PairClass
    }
    return SpreadMatrix(cells=cells, excluded=excluded)


def from_cells(means: dict[PairClass, float], counts: dict[PairClass, int] | None = None) -> SpreadMatrix:
    """Build a matrix directly from per-class means (and optional counts)."""
    cells = {}
    for c in PairClass:
        if c in means:
            cells[c] = Cell(count=(counts or {}).get(c, 1), mean_spread=means[c])
        else:
            cells[c] = Cell()
    return SpreadMatrix(cells=cells)


def normalize_matrix(matrix: SpreadMatrix) -> SpreadMatrix:
    """Center the non-empty mean spreads and scale them into [-1, 1]."""
    filled = matrix.non_empty()
    if len(filled) < 2:
        raise ValueError("normalization needs at least 2 non-empty classes")
    means = [matrix.cells[c].mean_spread for c in filled]
    average = sum(means) / len(means)
    max_deviation = max(abs(m - average) for m in means)
    if max_deviation == 0.0:
        raise ValueError("all mean spreads are equal; nothing to normalize")
    cells = {}
    for c in PairClass:
        cell = matrix.cells[c]
        if cell.count > 0:
            cells[c] = replace(cell, normalized_spread=(cell.mean_spread - average) / max_deviation)
        else:
            cells[c] = cell
    return SpreadMatrix(
        cells=cells,
        average=average,
        max_deviation=max_deviation,
        excluded=matrix.excluded,
    )


# --- CSV report ------------------------------------------------------------

def format_spread_csv(matrix: SpreadMatrix) -> str:
    """Render the matrix as CSV with one class per row and an
    ``overall`` footer carrying the average and the max deviation."""
    lines = ["class,count,mean_spread,normalized_spread"]
    for c in PairClass:
        cell = matrix.cells[c]
        mean = "" if cell.mean_spread is None else repr(cell.mean_spread)
        norm = "" if cell.normalized_spread is None else repr(cell.normalized_spread)
        lines.append(f"{c.value},{cell.count},{mean},{norm}")
    average = "" if matrix.average is None else repr(matrix.average)
    deviation = "" if matrix.max_deviation is None else repr(matrix.max_deviation)
    lines.append(f"overall,{matrix.excluded},{average},{deviation}")
    return "\n".join(lines) + "\n"


def parse_spread_csv(text: str) -> SpreadMatrix:
    """Parse a CSV report back into a matrix (inverse of formatting)."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != "class,count,mean_spread,normalized_spread":
        raise ValueError("missing spread CSV header")
    by_value = {c.value: c for c in PairClass}
    cells: dict[PairClass, Cell] = {}
    average = max_deviation = None
    excluded = 0
    for line in lines[1:]:
        name, count_s, mean_s, norm_s = line.split(",")
        if name == "overall":
            excluded = int(count_s)
            average = float(mean_s) if mean_s else None
            max_deviation = float(norm_s) if norm_s else None
            continue
        if name not in by_value:
            raise ValueError(f"unknown pair class {name!r}")
        cells[by_value[name]] = Cell(
            count=int(count_s),
            mean_spread=float(mean_s) if mean_s else None,
            normalized_spread=float(norm_s) if norm_s else None,
        )
    if set(cells) != set(PairClass):
        raise ValueError("spread CSV is missing pair classes")
    return SpreadMatrix(cells=cells, average=average, max_deviation=max_deviation, excluded=excluded)
