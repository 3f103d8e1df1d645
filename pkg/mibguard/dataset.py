"""
Labeled MIB-counter datasets: ingestion, selection, normalization and
stratified partitioning.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterator, Sequence

import numpy as np
import pandas as pd
from typing_extensions import Self

from .errors import DatasetError
from .oids import canonical_attribute
from .types import (
    LABELS,
    NUM_CLASSES,
    AttributeSchema,
    ClassLabel,
    FloatArray,
    IntArray,
    Vector,
)

log = logging.getLogger(__name__)

CLASS_COLUMN = "class"


def validate_schema(names: Sequence[str]) -> AttributeSchema:
    """Check that attribute names are non-empty and unique"""
    schema = tuple(str(name) for name in names)
    if not schema:
        raise DatasetError("schema must name at least one attribute")

    seen = set()
    for position, name in enumerate(schema, start=1):
        if not name.strip():
            raise DatasetError("empty attribute name", column=position)
        if name in seen:
            raise DatasetError(f"duplicate attribute name {name!r}", column=position)
        seen.add(name)

    return schema


def resolve_attributes(schema: AttributeSchema, names: Sequence[str]) -> list[int]:
    """
    Return the schema indices of the given attribute names. Long ICMP names
    and their short forms refer to the same attribute.
    """
    lookup = {canonical_attribute(name): index for index, name in enumerate(schema)}
    indices = []
    for name in names:
        try:
            index = lookup[canonical_attribute(name)]
        except KeyError as exc:
            raise DatasetError(f"unknown attribute {name!r}") from exc
        if index in indices:
            raise DatasetError(f"attribute {name!r} selected twice")
        indices.append(index)
    return indices


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Attribute schema plus labeled numeric records.

    `values` is an (n, d) float matrix aligned to `schema`; `labels` holds the
    class index of each record. Both arrays are read-only.
    """

    schema: AttributeSchema
    values: FloatArray
    labels: IntArray

    def __post_init__(self):
        schema = validate_schema(self.schema)
        values = np.array(self.values, dtype=np.float64, copy=True)
        labels = np.array(self.labels, dtype=np.int64, copy=True)

        if values.size == 0:
            values = values.reshape(0, len(schema))
        if values.ndim != 2 or values.shape[1] != len(schema):
            raise DatasetError(
                f"record width {values.shape[-1]} does not match "
                f"schema length {len(schema)}"
            )
        if labels.shape != (values.shape[0],):
            raise DatasetError("every record needs exactly one label")
        if not np.all(np.isfinite(values)):
            row, column = np.argwhere(~np.isfinite(values))[0]
            raise DatasetError("non-finite value", row=row + 1, column=column + 1)
        if labels.size and (labels.min() < 0 or labels.max() >= NUM_CLASSES):
            raise DatasetError("class index out of range")

        values.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_records(
        cls, schema: Sequence[str], records: Sequence[tuple[Vector, ClassLabel]]
    ) -> Self:
        """Build a dataset from (values, label) pairs"""
        values = np.array([list(values) for values, _ in records], dtype=np.float64)
        labels = np.array([label.index for _, label in records], dtype=np.int64)
        return cls(tuple(schema), values.reshape(len(records), len(schema)), labels)

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.schema == other.schema
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None

    @property
    def width(self) -> int:
        """Number of attributes"""
        return len(self.schema)

    @property
    def records(self) -> Iterator[tuple[FloatArray, ClassLabel]]:
        """Iterate over (values, label) pairs"""
        for values, label in zip(self.values, self.labels):
            yield values, LABELS[label]

    def present_classes(self) -> IntArray:
        """Class indices that occur at least once, ascending"""
        return np.flatnonzero(self.class_counts())

    def class_counts(self) -> IntArray:
        """Record count per class index"""
        return np.bincount(self.labels, minlength=NUM_CLASSES)

    def subset(self, indices: Sequence[int] | IntArray) -> "Dataset":
        """Dataset of the given records, in the given order (repeats allowed)"""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.schema, self.values[indices], self.labels[indices])

    def to_frame(self) -> pd.DataFrame:
        """Records as a data frame with a trailing class column"""
        frame = pd.DataFrame(self.values, columns=list(self.schema))
        frame[CLASS_COLUMN] = [LABELS[label].canonical for label in self.labels]
        return frame


def _parse_real(text: str) -> float:
    """Correctly rounded float of a cell, NaN when it is not a real"""
    if "_" in text:
        return np.nan
    try:
        return float(text)
    except ValueError:
        return np.nan


def load_csv(source: IO | str | Path, counters: bool = False) -> Dataset:
    """
    Read a dataset from CSV.

    The first row is the header, the last column holds the class label and the
    remaining columns must be finite reals. With `counters`, values must also be
    non-negative (counter deltas read from MIB sources).
    """
    try:
        frame = pd.read_csv(
            source,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as exc:
        raise DatasetError("malformed header: no header row") from exc
    except pd.errors.ParserError as exc:
        raise DatasetError(f"ragged row: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DatasetError(f"not UTF-8: {exc}") from exc

    header = [str(name).strip() for name in frame.iloc[0]]
    if len(header) < 2 or any(not name for name in header):
        raise DatasetError(
            "malformed header: need attribute columns and a class column", row=1
        )
    schema = validate_schema(header[:-1])

    body = frame.iloc[1:].apply(lambda col: col.str.strip())
    if body.empty:
        raise DatasetError("empty dataset")

    missing = (body.isna() | (body == "")).to_numpy()
    if missing.any():
        row, column = np.argwhere(missing)[0]
        raise DatasetError(
            "ragged row or missing value", row=row + 2, column=column + 1
        )

    cells = body.iloc[:, :-1]
    values = cells.apply(lambda col: col.map(_parse_real)).to_numpy(dtype=np.float64)
    bad = ~np.isfinite(values)
    if bad.any():
        row, column = np.argwhere(bad)[0]
        raise DatasetError(
            f"non-numeric cell {cells.iat[row, column]!r}",
            row=row + 2,
            column=column + 1,
        )
    if counters and (values < 0).any():
        row, column = np.argwhere(values < 0)[0]
        raise DatasetError("negative counter delta", row=row + 2, column=column + 1)

    labels = np.empty(len(body), dtype=np.int64)
    for row, text in enumerate(body.iloc[:, -1]):
        try:
            labels[row] = ClassLabel.parse(text).index
        except ValueError as exc:
            raise DatasetError(str(exc), row=row + 2, column=len(header)) from exc

    dataset = Dataset(schema, values, labels)
    log.info("loaded %d records with %d attributes", len(dataset), dataset.width)
    return dataset


def read_dataset(path: str | Path, counters: bool = False) -> Dataset:
    """Read a dataset from a CSV file path"""
    with open(path, "rb") as file:
        return load_csv(file, counters=counters)


def write_csv(ds: Dataset, sink: IO[str]):
    """
    Write a dataset as CSV: header, then one row per record with the class
    name last. Reals are printed with 17 significant digits so that
    load_csv(write_csv(ds)) reproduces every value exactly.
    """
    ds.to_frame().to_csv(sink, index=False, float_format="%.17g", lineterminator="\n")


def class_distribution(ds: Dataset) -> dict[ClassLabel, int]:
    """Record count of every class, including absent ones"""
    counts = ds.class_counts()
    return {label: int(counts[label.index]) for label in ClassLabel}


def select_attributes(ds: Dataset, names: Sequence[str]) -> Dataset:
    """Dataset restricted to the named attributes, in the given order"""
    if not names:
        raise DatasetError("select at least one attribute")
    indices = resolve_attributes(ds.schema, names)
    schema = tuple(ds.schema[index] for index in indices)
    return Dataset(schema, ds.values[:, indices], ds.labels)


@dataclass(frozen=True, eq=False)
class NormalizationStats:
    """
    Per-attribute minimum and maximum of a training partition.

    Normalization maps training values into [0, 1] and clamps anything
    outside the training range. Constant attributes normalize to 0.
    """

    minimum: FloatArray
    maximum: FloatArray
    span: FloatArray = field(init=False, repr=False)

    def __post_init__(self):
        minimum = np.array(self.minimum, dtype=np.float64)
        maximum = np.array(self.maximum, dtype=np.float64)
        if minimum.shape != maximum.shape or np.any(minimum > maximum):
            raise DatasetError("normalization needs min <= max for every attribute")
        for array in (minimum, maximum):
            array.setflags(write=False)
        object.__setattr__(self, "minimum", minimum)
        object.__setattr__(self, "maximum", maximum)
        object.__setattr__(self, "span", maximum - minimum)

    def apply(self, values: Vector) -> FloatArray:
        """Normalize a vector or an (n, d) matrix"""
        values = np.asarray(values, dtype=np.float64)
        constant = self.span <= 0
        scaled = (values - self.minimum) / np.where(constant, 1.0, self.span)
        return np.clip(np.where(constant, 0.0, scaled), 0.0, 1.0)

    def __call__(self, values: Vector) -> FloatArray:
        return self.apply(values)

    def to_dict(self) -> dict:
        """JSON-ready form"""
        return {"min": self.minimum.tolist(), "max": self.maximum.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        """Inverse of to_dict()"""
        return cls(np.array(data["min"]), np.array(data["max"]))


def fit_normalization(ds: Dataset) -> NormalizationStats:
    """Min/max statistics of every attribute"""
    if len(ds) < 1:
        raise DatasetError("normalization needs at least one record")
    return NormalizationStats(ds.values.min(axis=0), ds.values.max(axis=0))


def apply_normalization(stats: NormalizationStats, vector: Vector) -> FloatArray:
    """Normalize and clamp a vector with previously fitted statistics"""
    return stats.apply(vector)


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    """Stratified fold index of every record"""

    k: int
    seed: int
    folds: IntArray

    def test_indices(self, fold: int) -> IntArray:
        """Records held out in a fold"""
        return np.flatnonzero(self.folds == fold)

    def train_indices(self, fold: int) -> IntArray:
        """Records used for training when a fold is held out"""
        return np.flatnonzero(self.folds != fold)

    def __eq__(self, other):
        if not isinstance(other, FoldAssignment):
            return NotImplemented
        return (
            self.k == other.k
            and self.seed == other.seed
            and np.array_equal(self.folds, other.folds)
        )

    __hash__ = None


def stratified_folds(ds: Dataset, k: int, seed: int) -> FoldAssignment:
    """
    Assign records to k folds so that, for every class, fold sizes differ by at
    most one.

    Classes are dealt in class index order. Within a class the records are
    shuffled with a seeded generator and dealt round robin, starting at the
    fold after the one the previous class ended on, so that classes with fewer
    than k records still spread evenly over the folds.
    """
    if k < 2:
        raise DatasetError(f"need at least 2 folds, got {k}")
    if k > len(ds):
        raise DatasetError(f"{k} folds requested for {len(ds)} records")

    rng = np.random.default_rng(seed)
    folds = np.empty(len(ds), dtype=np.int64)
    start = 0
    for label in range(NUM_CLASSES):
        members = np.flatnonzero(ds.labels == label)
        if members.size == 0:
            continue
        shuffled = rng.permutation(members)
        folds[shuffled] = (start + np.arange(shuffled.size)) % k
        start = (start + shuffled.size) % k

    folds.setflags(write=False)
    return FoldAssignment(k, seed, folds)
