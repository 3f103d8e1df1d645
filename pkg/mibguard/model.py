"""
Trained model base class and the classifier string grammar.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import ClassVar, Mapping, TypeAlias

import numpy as np
from typing_extensions import Self

from .dataset import NormalizationStats, validate_schema
from .errors import DatasetError, ModelError, SchemaMismatchError, UsageError
from .types import (
    LABELS,
    NUM_CLASSES,
    AttributeSchema,
    ClassifierKind,
    ClassLabel,
    FloatArray,
    IntArray,
    Vector,
)

FORMAT_VERSION = 1
"""Version of the JSON model document"""

ClassDistribution: TypeAlias = FloatArray
"""Probability of each of the NUM_CLASSES labels, in class index order"""


@dataclass(frozen=True)
class ClassifierSpec:
    """
    Classifier family plus its parameters.

    Text form: ``bayes | ibk[:k] | j48[:min_leaf] | rules[:min_cov] |
    bagging[:iters[:base]] | pasting[:iters[:base]]``
    """

    kind: ClassifierKind
    k: int = 1
    min_leaf: int = 2
    min_coverage: int = 1
    iterations: int = 10
    base: "ClassifierSpec | None" = None
    replacement: bool = True

    def __post_init__(self):
        if self.kind == ClassifierKind.BAGGING:
            if self.base is None:
                object.__setattr__(self, "base", ClassifierSpec(ClassifierKind.TREE))
            elif self.base.kind == ClassifierKind.BAGGING:
                raise UsageError("the bagging base must be a single classifier")

    @classmethod
    def parse(cls, text: str) -> Self:
        """Parse the text form. Raises UsageError on malformed input."""
        head, _, rest = text.strip().partition(":")
        head = head.lower()

        def number(value: str, name: str) -> int:
            try:
                result = int(value)
            except ValueError as exc:
                raise UsageError(f"{text!r}: {name} must be an integer") from exc
            if result < 1:
                raise UsageError(f"{text!r}: {name} must be >= 1")
            return result

        def no_args(spec: Self) -> Self:
            if rest:
                raise UsageError(f"{text!r}: unexpected parameters")
            return spec

        match head:
            case "bayes":
                return no_args(cls(ClassifierKind.BAYES))
            case "ibk" | "j48" | "rules":
                if ":" in rest:
                    raise UsageError(f"{text!r}: too many parameters")
                spec = cls(ClassifierKind(head))
                if not rest:
                    return spec
                field = {"ibk": "k", "j48": "min_leaf", "rules": "min_coverage"}[head]
                return replace(spec, **{field: number(rest, field)})
            case "bagging" | "pasting":
                iterations, _, base = rest.partition(":")
                return cls(
                    ClassifierKind.BAGGING,
                    iterations=number(iterations, "iterations") if iterations else 10,
                    base=cls.parse(base) if base else None,
                    replacement=head == "bagging",
                )

        raise UsageError(f"unknown classifier {text!r}")

    def __str__(self):
        match self.kind:
            case ClassifierKind.BAYES:
                return "bayes"
            case ClassifierKind.IBK:
                return f"ibk:{self.k}"
            case ClassifierKind.TREE:
                return f"j48:{self.min_leaf}"
            case ClassifierKind.RULES:
                return f"rules:{self.min_coverage}"
        head = "bagging" if self.replacement else "pasting"
        return f"{head}:{self.iterations}:{self.base}"


class TrainedModel(ABC):
    """
    A trained classifier. Models are immutable and safe to query from several
    threads.
    """

    kind: ClassVar[ClassifierKind]
    schema: AttributeSchema
    classes: tuple[ClassLabel, ...]

    def check_vector(self, vector: Vector) -> FloatArray:
        """Validate a query vector against the training schema"""
        try:
            values = np.asarray(vector, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ModelError(f"query is not numeric: {exc}") from exc
        if values.shape != (len(self.schema),):
            raise SchemaMismatchError(
                f"expected {len(self.schema)} values ({', '.join(self.schema)}), "
                f"got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ModelError("query contains non-finite values")
        return values

    def predict_distribution(self, vector: Vector) -> ClassDistribution:
        """Probability of every class for a query"""
        return self.distribution(self.check_vector(vector))

    def predict(self, vector: Vector) -> ClassLabel:
        """Most probable class; ties go to the lower class index"""
        return self.decide(self.check_vector(vector))

    def predict_all(self, values: FloatArray) -> IntArray:
        """Class index predicted for every row of a matrix"""
        return np.array([self.predict(row).index for row in values], dtype=np.int64)

    def decide(self, x: FloatArray) -> ClassLabel:
        """Label for an already validated query"""
        return LABELS[int(np.argmax(self.distribution(x)))]

    @abstractmethod
    def distribution(self, x: FloatArray) -> ClassDistribution:
        """Class distribution for an already validated query"""

    @abstractmethod
    def params(self) -> dict:
        """Training parameters, JSON-ready"""

    @abstractmethod
    def structure(self) -> dict:
        """Kind-specific learned structure, JSON-ready"""

    @classmethod
    @abstractmethod
    def from_parts(
        cls,
        schema: AttributeSchema,
        classes: tuple[ClassLabel, ...],
        normalization: NormalizationStats | None,
        params: dict,
        structure: dict,
    ) -> Self:
        """Rebuild a model from its document parts"""

    def to_dict(self) -> dict:
        """Versioned JSON document of the model"""
        normalization = getattr(self, "normalization", None)
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.kind.value,
            "schema": list(self.schema),
            "classes": [label.canonical for label in self.classes],
            "normalization": normalization.to_dict() if normalization else None,
            "params": self.params(),
            "structure": self.structure(),
        }


def decode_model(
    data: Mapping, types: Mapping[ClassifierKind, type[TrainedModel]]
) -> TrainedModel:
    """Rebuild a model from its JSON document using the given model classes"""
    try:
        version = data["format_version"]
        if version != FORMAT_VERSION:
            raise ModelError(f"unsupported model format_version {version!r}")
        kind = ClassifierKind(data["kind"])
        if kind not in types:
            raise ModelError(f"model kind {kind.value!r} is not supported here")
        normalization = data.get("normalization")
        return types[kind].from_parts(
            validate_schema(data["schema"]),
            tuple(ClassLabel.parse(name) for name in data["classes"]),
            NormalizationStats.from_dict(normalization) if normalization else None,
            dict(data.get("params") or {}),
            dict(data["structure"]),
        )
    except ModelError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, DatasetError):
            raise ModelError(f"invalid model document: {exc}") from exc
        raise ModelError(f"invalid model document: {exc!r}") from exc


def present_labels(counts: IntArray) -> tuple[ClassLabel, ...]:
    """Labels with a non-zero count"""
    return tuple(LABELS[index] for index in np.flatnonzero(counts))


def one_hot(labels: IntArray) -> FloatArray:
    """(n, NUM_CLASSES) indicator matrix of class indices"""
    return np.eye(NUM_CLASSES)[labels]


def split_points(sorted_values: FloatArray) -> tuple[IntArray, FloatArray]:
    """
    Candidate numeric thresholds of a sorted column.

    Returns the positions i where sorted_values[i] < sorted_values[i + 1] and the
    midpoint thresholds t with sorted_values[i] <= t < sorted_values[i + 1], so
    that "value <= t" selects exactly the first i + 1 values.
    """
    lower = sorted_values[:-1]
    upper = sorted_values[1:]
    positions = np.flatnonzero(lower < upper)
    lower, upper = lower[positions], upper[positions]
    midpoints = lower + (upper - lower) / 2
    return positions, np.where(midpoints < upper, midpoints, lower)


def row_entropy(counts: FloatArray) -> FloatArray:
    """Base-2 entropy of every row of a count matrix"""
    totals = counts.sum(axis=1, keepdims=True)
    p = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=1)
