"""
Sequential covering rule learner producing an ordered decision list
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, NamedTuple

import numpy as np
from typing_extensions import Self

from .dataset import Dataset, NormalizationStats
from .errors import ModelError
from .model import ClassDistribution, TrainedModel, present_labels, split_points
from .types import (
    LABELS,
    NUM_CLASSES,
    AttributeSchema,
    ClassifierKind,
    ClassLabel,
    FloatArray,
    IntArray,
)

log = logging.getLogger(__name__)


class Operator(Enum):
    """Comparison of a rule condition"""

    AT_MOST = "<="
    "Attribute value is at most the threshold"
    ABOVE = ">"
    "Attribute value is above the threshold"


class Condition(NamedTuple):
    """One test of a rule"""

    attribute: int
    operator: Operator
    threshold: float

    def holds(self, x: FloatArray) -> bool:
        """True if the query satisfies the test"""
        if self.operator == Operator.AT_MOST:
            return bool(x[self.attribute] <= self.threshold)
        return bool(x[self.attribute] > self.threshold)

    def mask(self, values: FloatArray) -> np.ndarray:
        """Rows of a matrix that satisfy the test"""
        if self.operator == Operator.AT_MOST:
            return values[:, self.attribute] <= self.threshold
        return values[:, self.attribute] > self.threshold


@dataclass(frozen=True)
class Rule:
    """Conjunction of conditions concluding a class"""

    conditions: tuple[Condition, ...]
    label: ClassLabel

    def fires(self, x: FloatArray) -> bool:
        """True if every condition holds"""
        return all(condition.holds(x) for condition in self.conditions)

    def describe(self, schema: AttributeSchema) -> str:
        """Readable form, e.g. "iIE <= 5 -> IcmpEcho" """
        tests = " and ".join(
            f"{schema[c.attribute]} {c.operator.value} {c.threshold:g}"
            for c in self.conditions
        )
        return f"{tests or 'true'} -> {self.label}"


def laplace(correct: int | IntArray, covered: int | IntArray) -> float | FloatArray:
    """Laplace accuracy (correct + 1) / (covered + number of classes)"""
    return (correct + 1) / (covered + NUM_CLASSES)


@dataclass(frozen=True, eq=False)
class RulesModel(TrainedModel):
    """
    Ordered rules followed by a catch-all default. The first rule that fires
    decides; the distribution is the indicator of that class.
    """

    kind: ClassVar[ClassifierKind] = ClassifierKind.RULES

    schema: AttributeSchema
    classes: tuple[ClassLabel, ...]
    min_coverage: int
    rules: tuple[Rule, ...]
    default: ClassLabel

    def fired(self, x: FloatArray) -> ClassLabel:
        """Class of the first rule that fires, or the default"""
        for rule in self.rules:
            if rule.fires(x):
                return rule.label
        return self.default

    def distribution(self, x: FloatArray) -> ClassDistribution:
        result = np.zeros(NUM_CLASSES)
        result[self.fired(x).index] = 1.0
        return result

    def describe(self) -> list[str]:
        """One line per rule, default last"""
        lines = [rule.describe(self.schema) for rule in self.rules]
        lines.append(f"otherwise -> {self.default}")
        return lines

    def params(self) -> dict:
        return {"min_coverage": self.min_coverage}

    def structure(self) -> dict:
        return {
            "rules": [
                {
                    "label": rule.label.canonical,
                    "conditions": [
                        [c.attribute, c.operator.value, c.threshold]
                        for c in rule.conditions
                    ],
                }
                for rule in self.rules
            ],
            "default": self.default.canonical,
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
        rules = []
        for entry in structure["rules"]:
            conditions = tuple(
                Condition(int(attribute), Operator(operator), float(threshold))
                for attribute, operator, threshold in entry["conditions"]
            )
            if any(not 0 <= c.attribute < len(schema) for c in conditions):
                raise ModelError("rule condition refers to an unknown attribute")
            rules.append(Rule(conditions, ClassLabel.parse(entry["label"])))
        return cls(
            schema,
            classes,
            int(params["min_coverage"]),
            tuple(rules),
            ClassLabel.parse(structure["default"]),
        )


class _Candidate(NamedTuple):
    condition: Condition
    accuracy: float
    covered: np.ndarray


def _best_condition(
    values: FloatArray,
    labels: IntArray,
    covered: np.ndarray,
    target: int,
    min_coverage: int,
) -> _Candidate | None:
    """
    Condition with the best Laplace accuracy that removes at least one covered
    negative while keeping a positive and min_coverage records. Ties go to the
    lower attribute index, then "<=" before ">", then the lower threshold.
    """
    rows = np.flatnonzero(covered)
    positive = labels[rows] == target
    total, hits = rows.shape[0], int(positive.sum())
    negatives = total - hits

    best: _Candidate | None = None
    for attribute in range(values.shape[1]):
        order = np.argsort(values[rows, attribute], kind="stable")
        positions, cuts = split_points(values[rows[order], attribute])
        if positions.shape[0] == 0:
            continue
        hits_at_most = np.cumsum(positive[order])[positions]
        size_at_most = positions + 1

        for operator, size, correct in (
            (Operator.AT_MOST, size_at_most, hits_at_most),
            (Operator.ABOVE, total - size_at_most, hits - hits_at_most),
        ):
            valid = (
                (correct >= 1) & (size >= min_coverage) & (size - correct < negatives)
            )
            if not valid.any():
                continue
            accuracy = np.where(valid, laplace(correct, size), -np.inf)
            pick = int(np.argmax(accuracy))
            if best is None or accuracy[pick] > best.accuracy:
                condition = Condition(attribute, operator, float(cuts[pick]))
                best = _Candidate(
                    condition, float(accuracy[pick]), covered & condition.mask(values)
                )
    return best


def _learn_rule(
    values: FloatArray,
    labels: IntArray,
    remaining: np.ndarray,
    target: int,
    min_coverage: int,
) -> tuple[tuple[Condition, ...], np.ndarray]:
    """Grow one rule for the target class from the remaining records"""
    conditions: list[Condition] = []
    covered = remaining.copy()
    while np.any(covered & (labels != target)):
        candidate = _best_condition(values, labels, covered, target, min_coverage)
        if candidate is None:
            break
        conditions.append(candidate.condition)
        covered = candidate.covered
    return tuple(conditions), covered


def train_rules(ds: Dataset, min_coverage: int = 1) -> RulesModel:
    """
    Learn a decision list by sequential covering.

    Each round targets the most frequent class among the uncovered records and
    greedily adds the best Laplace condition until the rule covers no other
    class or cannot be refined. A rule that still covers other classes is only
    kept when its Laplace accuracy beats predicting the target for every
    remaining record. Learning stops once the remaining records are a single
    class or a rule is rejected; the default is the majority of what remains
    (of the whole dataset when nothing remains).
    """
    if len(ds) == 0:
        raise ModelError("cannot train on an empty dataset")
    if min_coverage < 1:
        raise ModelError(f"min_coverage must be >= 1, got {min_coverage}")

    values, labels = ds.values, ds.labels
    remaining = np.ones(len(ds), dtype=bool)
    rules: list[Rule] = []
    while remaining.any():
        counts = np.bincount(labels[remaining], minlength=NUM_CLASSES)
        target = int(np.argmax(counts))
        if counts[target] == counts.sum():
            break

        conditions, covered = _learn_rule(
            values, labels, remaining, target, min_coverage
        )
        size = int(covered.sum())
        correct = int((labels[covered] == target).sum())
        if not conditions or size < min_coverage:
            break
        if correct < size and laplace(correct, size) <= laplace(
            counts[target], counts.sum()
        ):
            break

        rules.append(Rule(conditions, LABELS[target]))
        remaining &= ~covered

    pool = labels[remaining] if remaining.any() else labels
    default = LABELS[int(np.argmax(np.bincount(pool, minlength=NUM_CLASSES)))]
    model = RulesModel(
        ds.schema,
        present_labels(ds.class_counts()),
        min_coverage,
        tuple(rules),
        default,
    )
    log.debug("learned %d rules, default %s", len(rules), default)
    return model
