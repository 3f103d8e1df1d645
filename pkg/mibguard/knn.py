"""
Lazy k-nearest-neighbour classifier (IBK)
"""

from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from typing_extensions import Self

from .dataset import Dataset, NormalizationStats, fit_normalization
from .errors import ModelError
from .model import ClassDistribution, TrainedModel, present_labels
from .types import (
    LABELS,
    NUM_CLASSES,
    AttributeSchema,
    ClassifierKind,
    ClassLabel,
    FloatArray,
    IntArray,
)


@dataclass(frozen=True, eq=False)
class KnnModel(TrainedModel):
    """
    Min-max normalized training records. Queries are normalized with the
    training statistics and clamped to [0, 1] before the distance scan.
    """

    kind: ClassVar[ClassifierKind] = ClassifierKind.IBK

    schema: AttributeSchema
    classes: tuple[ClassLabel, ...]
    normalization: NormalizationStats
    k: int
    points: FloatArray
    labels: IntArray

    def neighbours(self, x: FloatArray) -> IntArray:
        """
        Indices of the k nearest training records by Euclidean distance, nearest
        first. Equal distances keep training order.
        """
        query = self.normalization(x)
        # Squared distance, accumulated one attribute at a time.
        distance = np.zeros(self.points.shape[0])
        for column in range(self.points.shape[1]):
            diff = self.points[:, column] - query[column]
            distance += diff * diff
        return np.argsort(distance, kind="stable")[: self.k]

    def distribution(self, x: FloatArray) -> ClassDistribution:
        votes = np.bincount(self.labels[self.neighbours(x)], minlength=NUM_CLASSES)
        return votes / votes.sum()

    def decide(self, x: FloatArray) -> ClassLabel:
        nearest = self.labels[self.neighbours(x)]
        votes = np.bincount(nearest, minlength=NUM_CLASSES)
        tied = votes == votes.max()
        # Vote ties go to the class of the nearest tied neighbour
        for label in nearest:
            if tied[label]:
                return LABELS[label]
        raise AssertionError("unreachable")

    def params(self) -> dict:
        return {"k": self.k}

    def structure(self) -> dict:
        return {"points": self.points.tolist(), "labels": self.labels.tolist()}

    @classmethod
    def from_parts(
        cls,
        schema: AttributeSchema,
        classes: tuple[ClassLabel, ...],
        normalization: NormalizationStats | None,
        params: dict,
        structure: dict,
    ) -> Self:
        if normalization is None:
            raise ModelError("ibk model needs normalization statistics")
        points = np.array(structure["points"], dtype=np.float64)
        labels = np.array(structure["labels"], dtype=np.int64)
        return _checked(
            cls(schema, classes, normalization, int(params["k"]), points, labels)
        )


def _checked(model: KnnModel) -> KnnModel:
    n = model.labels.shape[0]
    if model.points.shape != (n, len(model.schema)):
        raise ModelError("stored points do not match the schema")
    if not 1 <= model.k <= n:
        raise ModelError(f"k must be between 1 and {n}, got {model.k}")
    return model


def train_knn(ds: Dataset, k: int = 1) -> KnnModel:
    """Store the normalized training set for k-nearest-neighbour voting"""
    if len(ds) == 0:
        raise ModelError("cannot train on an empty dataset")
    if not 1 <= k <= len(ds):
        raise ModelError(f"k must be between 1 and {len(ds)}, got {k}")

    stats = fit_normalization(ds)
    return _checked(
        KnnModel(
            ds.schema,
            present_labels(ds.class_counts()),
            stats,
            k,
            stats(ds.values),
            np.array(ds.labels),
        )
    )
