"""
Gaussian naive Bayes
"""

import logging
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from typing_extensions import Self

from .dataset import Dataset, NormalizationStats
from .errors import ModelError
from .model import ClassDistribution, TrainedModel, present_labels
from .types import NUM_CLASSES, AttributeSchema, ClassifierKind, ClassLabel, FloatArray

log = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class NaiveBayesModel(TrainedModel):
    """
    Per-class prior plus the mean and variance of every attribute within the
    class. Rows of absent classes have prior 0 and never win.
    """

    kind: ClassVar[ClassifierKind] = ClassifierKind.BAYES

    schema: AttributeSchema
    classes: tuple[ClassLabel, ...]
    priors: FloatArray
    means: FloatArray
    variances: FloatArray
    variance_floor: float = VARIANCE_FLOOR

    def distribution(self, x: FloatArray) -> ClassDistribution:
        present = self.priors > 0
        variances = self.variances[present]
        log_density = -0.5 * np.sum(
            np.log(2 * np.pi * variances) + (x - self.means[present]) ** 2 / variances,
            axis=1,
        )
        log_joint = np.full(NUM_CLASSES, -np.inf)
        log_joint[present] = np.log(self.priors[present]) + log_density

        weights = np.exp(log_joint - log_joint[present].max())
        return weights / weights.sum()

    def params(self) -> dict:
        return {"variance_floor": self.variance_floor}

    def structure(self) -> dict:
        return {
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
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
        width = (NUM_CLASSES, len(schema))
        means = np.array(structure["means"], dtype=np.float64).reshape(width)
        variances = np.array(structure["variances"], dtype=np.float64).reshape(width)
        return cls(
            schema,
            classes,
            np.array(structure["priors"], dtype=np.float64).reshape(NUM_CLASSES),
            means,
            variances,
            float(params.get("variance_floor", VARIANCE_FLOOR)),
        )


def train_naive_bayes(
    ds: Dataset, variance_floor: float = VARIANCE_FLOOR
) -> NaiveBayesModel:
    """
    Fit a Gaussian naive Bayes model.

    Variances are population variances (divided by the class count), raised to
    at least `variance_floor`. A floor of 0 disables flooring, which only works
    when no attribute is constant within a class.
    """
    if len(ds) == 0:
        raise ModelError("cannot train on an empty dataset")
    if variance_floor < 0:
        raise ModelError(f"variance floor must be >= 0, got {variance_floor}")

    counts = ds.class_counts()
    means = np.zeros((NUM_CLASSES, ds.width))
    variances = np.ones((NUM_CLASSES, ds.width))
    for c in np.flatnonzero(counts):
        members = ds.values[ds.labels == c]
        means[c] = members.mean(axis=0)
        variances[c] = np.maximum(members.var(axis=0), variance_floor)

    log.debug("naive bayes fitted on %d records", len(ds))
    return NaiveBayesModel(
        ds.schema,
        present_labels(counts),
        counts / len(ds),
        means,
        variances,
        variance_floor,
    )
