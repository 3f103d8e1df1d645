"""
Bagging and pasting ensembles of a base classifier
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, ClassVar

import numpy as np
from typing_extensions import Self

from .bayes import NaiveBayesModel, train_naive_bayes
from .dataset import Dataset, NormalizationStats
from .errors import ModelError
from .knn import KnnModel, train_knn
from .model import (
    ClassDistribution,
    ClassifierSpec,
    TrainedModel,
    decode_model,
    present_labels,
)
from .rules import RulesModel, train_rules
from .tree import TreeModel, train_tree
from .types import (
    NUM_CLASSES,
    AttributeSchema,
    ClassifierKind,
    ClassLabel,
    FloatArray,
    IntArray,
)

log = logging.getLogger(__name__)

PASTING_FRACTION = 0.5

Sampler = Callable[[np.random.Generator, int], IntArray]
"""Draws the training record indices of one member: (rng, n) -> indices"""

BASE_TYPES: dict[ClassifierKind, type[TrainedModel]] = {
    ClassifierKind.BAYES: NaiveBayesModel,
    ClassifierKind.IBK: KnnModel,
    ClassifierKind.TREE: TreeModel,
    ClassifierKind.RULES: RulesModel,
}
"""Model classes that can be ensemble members"""


def train_single(ds: Dataset, spec: ClassifierSpec) -> TrainedModel:
    """Train one non-ensemble classifier from its spec"""
    match spec.kind:
        case ClassifierKind.BAYES:
            return train_naive_bayes(ds)
        case ClassifierKind.IBK:
            return train_knn(ds, spec.k)
        case ClassifierKind.TREE:
            return train_tree(ds, spec.min_leaf)
        case ClassifierKind.RULES:
            return train_rules(ds, spec.min_coverage)
    raise ModelError(f"{spec} is not a single classifier")


def bootstrap(rng: np.random.Generator, n: int) -> IntArray:
    """n record indices drawn with replacement"""
    return rng.integers(0, n, n)


def pasting(rng: np.random.Generator, n: int) -> IntArray:
    """Half of the record indices (at least one), drawn without replacement"""
    size = max(1, round(PASTING_FRACTION * n))
    return np.sort(rng.choice(n, size, replace=False))


@dataclass(frozen=True, eq=False)
class BaggingModel(TrainedModel):
    """Member models voting with equal weight"""

    kind: ClassVar[ClassifierKind] = ClassifierKind.BAGGING

    schema: AttributeSchema
    classes: tuple[ClassLabel, ...]
    base: str
    replacement: bool
    members: tuple[TrainedModel, ...]

    def __post_init__(self):
        if not self.members:
            raise ModelError("an ensemble needs at least one member")
        if any(member.schema != self.schema for member in self.members):
            raise ModelError("ensemble members must share the ensemble schema")

    def votes(self, x: FloatArray) -> IntArray:
        """Number of members predicting each class"""
        predictions = [member.decide(x).index for member in self.members]
        return np.bincount(predictions, minlength=NUM_CLASSES)

    def distribution(self, x: FloatArray) -> ClassDistribution:
        votes = self.votes(x)
        return votes / votes.sum()

    def params(self) -> dict:
        return {
            "base": self.base,
            "iterations": len(self.members),
            "replacement": self.replacement,
        }

    def structure(self) -> dict:
        return {"members": [member.to_dict() for member in self.members]}

    @classmethod
    def from_parts(
        cls,
        schema: AttributeSchema,
        classes: tuple[ClassLabel, ...],
        normalization: NormalizationStats | None,
        params: dict,
        structure: dict,
    ) -> Self:
        members = tuple(
            decode_model(entry, BASE_TYPES) for entry in structure["members"]
        )
        return cls(
            schema, classes, str(params["base"]), bool(params["replacement"]), members
        )


def train_bagging(
    ds: Dataset,
    base: ClassifierSpec | None = None,
    iterations: int = 10,
    seed: int = 1,
    replacement: bool = True,
    sampler: Sampler | None = None,
    workers: int = 1,
) -> BaggingModel:
    """
    Train `iterations` copies of the base classifier, each on records drawn
    by `sampler` from a generator seeded with seed + member index.

    The default sampler is a bootstrap of n records with replacement, or half
    the records without replacement (pasting) when `replacement` is False.
    With workers > 1 members train on a thread pool; the result does not
    depend on the number of workers.
    """
    if len(ds) == 0:
        raise ModelError("cannot train on an empty dataset")
    if iterations < 1:
        raise ModelError(f"iterations must be >= 1, got {iterations}")

    base = base or ClassifierSpec(ClassifierKind.TREE)
    if base.kind == ClassifierKind.BAGGING:
        raise ModelError("the bagging base must be a single classifier")
    if sampler is None:
        sampler = bootstrap if replacement else pasting

    def train_member(index: int) -> TrainedModel:
        rng = np.random.default_rng(seed + index)
        return train_single(ds.subset(sampler(rng, len(ds))), base)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            members = tuple(pool.map(train_member, range(iterations)))
    else:
        members = tuple(train_member(index) for index in range(iterations))

    log.debug("trained %d %s members", iterations, base)
    return BaggingModel(
        ds.schema, present_labels(ds.class_counts()), str(base), replacement, members
    )
