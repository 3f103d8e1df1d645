"""
Entry point for training any classifier family from its spec
"""

import logging

from .bagging import BASE_TYPES, BaggingModel, train_bagging, train_single
from .dataset import Dataset
from .model import ClassifierSpec, TrainedModel
from .types import ClassifierKind

log = logging.getLogger(__name__)

MODEL_TYPES: dict[ClassifierKind, type[TrainedModel]] = {
    **BASE_TYPES,
    ClassifierKind.BAGGING: BaggingModel,
}
"""Model class of every classifier kind"""


def train(
    ds: Dataset, spec: ClassifierSpec | str, seed: int = 1, workers: int = 1
) -> TrainedModel:
    """
    Train the classifier a spec describes. `seed` and `workers` only matter
    for ensembles.
    """
    if isinstance(spec, str):
        spec = ClassifierSpec.parse(spec)

    log.info("training %s on %d records", spec, len(ds))
    if spec.kind == ClassifierKind.BAGGING:
        return train_bagging(
            ds,
            spec.base,
            spec.iterations,
            seed,
            replacement=spec.replacement,
            workers=workers,
        )
    return train_single(ds, spec)
