"""
C4.5-style binary decision tree on numeric thresholds, without pruning.
"""

import logging
from dataclasses import dataclass
from typing import ClassVar, NamedTuple

import numpy as np
from typing_extensions import Self

from .dataset import Dataset, NormalizationStats
from .errors import ModelError
from .model import (
    ClassDistribution,
    TrainedModel,
    one_hot,
    present_labels,
    row_entropy,
    split_points,
)
from .types import (
    NUM_CLASSES,
    AttributeSchema,
    ClassifierKind,
    ClassLabel,
    FloatArray,
    IntArray,
)

log = logging.getLogger(__name__)

LEAF = -1
GAIN_EPSILON = 1e-12


class Split(NamedTuple):
    """Chosen test "x[attribute] <= threshold" of an internal node"""

    attribute: int
    threshold: float


@dataclass(frozen=True, eq=False)
class TreeModel(TrainedModel):
    """
    Flat array form of a binary tree. Node 0 is the root. `attribute` is LEAF
    for leaves; internal nodes send x[attribute] <= threshold to `left` and
    everything else to `right`. `counts` holds the training class counts that
    reached every node.
    """

    kind: ClassVar[ClassifierKind] = ClassifierKind.TREE

    schema: AttributeSchema
    classes: tuple[ClassLabel, ...]
    min_leaf: int
    attribute: IntArray
    threshold: FloatArray
    left: IntArray
    right: IntArray
    counts: IntArray

    def leaf(self, x: FloatArray) -> int:
        """Index of the leaf a query is routed to"""
        node = 0
        while self.attribute[node] != LEAF:
            if x[self.attribute[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return int(node)

    def distribution(self, x: FloatArray) -> ClassDistribution:
        counts = self.counts[self.leaf(x)]
        return counts / counts.sum()

    @property
    def node_count(self) -> int:
        """Number of nodes, leaves included"""
        return self.attribute.shape[0]

    @property
    def depth(self) -> int:
        """Length of the longest root-to-leaf path"""
        depths = np.zeros(self.node_count, dtype=np.int64)
        for node in range(self.node_count):
            if self.attribute[node] != LEAF:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def params(self) -> dict:
        return {"min_leaf": self.min_leaf}

    def structure(self) -> dict:
        return {
            "attribute": self.attribute.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_parts(
        cls,
        schema: AttributeSchema,
        classes: tuple[ClassLabel, ...],
        normalization: NormalizationStats | None,
        params: dict,
        structure: dict,
    ) -> Self:
        model = cls(
            schema,
            classes,
            int(params["min_leaf"]),
            np.array(structure["attribute"], dtype=np.int64),
            np.array(structure["threshold"], dtype=np.float64),
            np.array(structure["left"], dtype=np.int64),
            np.array(structure["right"], dtype=np.int64),
            np.array(structure["counts"], dtype=np.int64),
        )
        nodes = model.node_count
        internal = model.attribute != LEAF
        if (
            nodes == 0
            or any(
                part.shape != model.attribute.shape
                for part in (model.threshold, model.left, model.right)
            )
            or model.counts.shape[0] != nodes
            or np.any(model.attribute < LEAF)
            or np.any(model.attribute[internal] >= len(schema))
            or np.any(model.left[internal] >= nodes)
            or np.any(model.right[internal] >= nodes)
            or np.any(model.left[internal] <= np.flatnonzero(internal))
            or np.any(model.right[internal] <= np.flatnonzero(internal))
        ):
            raise ModelError("malformed tree structure")
        return model


def _best_split(values: FloatArray, labels: IntArray, min_leaf: int) -> Split | None:
    """
    Pick the split of maximal gain ratio among candidates whose gain is at least
    the mean gain of the candidates with positive gain. Equal ratios go to the
    lower attribute index, then the lower threshold.
    """
    n = labels.shape[0]
    indicators = one_hot(labels)
    totals = indicators.sum(axis=0)
    parent_entropy = row_entropy(totals[np.newaxis])[0]

    attributes, thresholds, gains, ratios = [], [], [], []
    for attribute in range(values.shape[1]):
        order = np.argsort(values[:, attribute], kind="stable")
        positions, cuts = split_points(values[order, attribute])
        left_sizes = positions + 1
        valid = (left_sizes >= min_leaf) & (n - left_sizes >= min_leaf)
        if not valid.any():
            continue
        positions, cuts, left_sizes = positions[valid], cuts[valid], left_sizes[valid]

        left = np.cumsum(indicators[order], axis=0)[positions]
        right = totals - left
        p_left = left_sizes / n
        gain = parent_entropy - (
            p_left * row_entropy(left) + (1 - p_left) * row_entropy(right)
        )
        split_info = row_entropy(np.column_stack((left_sizes, n - left_sizes)) * 1.0)

        attributes.append(np.full(positions.shape[0], attribute))
        thresholds.append(cuts)
        gains.append(gain)
        ratios.append(gain / split_info)

    if not attributes:
        return None

    attributes = np.concatenate(attributes)
    thresholds = np.concatenate(thresholds)
    gains = np.concatenate(gains)
    ratios = np.concatenate(ratios)

    positive = gains > GAIN_EPSILON
    if not positive.any():
        # Single-record leaves take the first zero-gain candidate (XOR-like data)
        if min_leaf == 1:
            return Split(int(attributes[0]), float(thresholds[0]))
        return None

    eligible = positive & (gains >= gains[positive].mean() - GAIN_EPSILON)
    ratios = np.where(eligible, ratios, -np.inf)
    best = int(np.flatnonzero(ratios >= ratios.max() - GAIN_EPSILON)[0])
    return Split(int(attributes[best]), float(thresholds[best]))


def train_tree(ds: Dataset, min_leaf: int = 2) -> TreeModel:
    """
    Grow a tree top down. A node becomes a leaf when it is pure, when it holds
    fewer than 2 * min_leaf records or when no admissible split remains; every
    split leaves at least min_leaf records on each side.
    """
    if len(ds) == 0:
        raise ModelError("cannot train on an empty dataset")
    if min_leaf < 1:
        raise ModelError(f"min_leaf must be >= 1, got {min_leaf}")

    attribute: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[IntArray] = []

    def add_node(members: IntArray) -> int:
        attribute.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(np.bincount(ds.labels[members], minlength=NUM_CLASSES))
        return len(attribute) - 1

    pending = [(add_node(np.arange(len(ds))), np.arange(len(ds)))]
    while pending:
        node, members = pending.pop()
        if np.count_nonzero(counts[node]) <= 1 or members.shape[0] < 2 * min_leaf:
            continue
        split = _best_split(ds.values[members], ds.labels[members], min_leaf)
        if split is None:
            continue

        goes_left = ds.values[members, split.attribute] <= split.threshold
        left_members, right_members = members[goes_left], members[~goes_left]
        attribute[node], threshold[node] = split
        left[node] = add_node(left_members)
        right[node] = add_node(right_members)
        pending.append((right[node], right_members))
        pending.append((left[node], left_members))

    model = TreeModel(
        ds.schema,
        present_labels(ds.class_counts()),
        min_leaf,
        np.array(attribute, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(counts, dtype=np.int64),
    )
    log.debug("tree has %d nodes, depth %d", model.node_count, model.depth)
    return model
