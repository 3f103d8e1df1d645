"""
Cross-validated evaluation: confusion matrices, one-vs-rest metrics and
support-weighted averages.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from sklearn import metrics as skl_metrics
from typing_extensions import Self

from .classifiers import train
from .dataset import Dataset, stratified_folds
from .errors import EvaluationError
from .model import ClassifierSpec
from .types import LABELS, NUM_CLASSES, ClassLabel, IntArray, OutputFormat

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """NUM_CLASSES x NUM_CLASSES counts, rows = actual, columns = predicted"""

    counts: IntArray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != (NUM_CLASSES, NUM_CLASSES):
            raise EvaluationError(
                f"confusion matrix must be {NUM_CLASSES}x{NUM_CLASSES}"
            )
        if np.any(counts < 0):
            raise EvaluationError("confusion counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        """Number of evaluated instances"""
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        """Instances on the diagonal"""
        return int(np.trace(self.counts))

    @property
    def accuracy(self) -> float:
        """Fraction of instances on the diagonal"""
        return self.correct / self.total if self.total else 0.0

    def one_vs_rest(self, label: ClassLabel) -> tuple[int, int, int, int]:
        """(tp, fp, fn, tn) of a class against all others"""
        c = label.index
        tp = int(self.counts[c, c])
        fp = int(self.counts[:, c].sum()) - tp
        fn = int(self.counts[c, :].sum()) - tp
        return tp, fp, fn, self.total - tp - fp - fn

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    __hash__ = None


def _indices(labels: Sequence[ClassLabel | int] | IntArray) -> IntArray:
    result = np.array(
        [
            label.index if isinstance(label, ClassLabel) else int(label)
            for label in labels
        ],
        dtype=np.int64,
    )
    if result.size and (result.min() < 0 or result.max() >= NUM_CLASSES):
        raise EvaluationError("class index out of range")
    return result


def confusion(
    truth: Sequence[ClassLabel | int] | IntArray,
    predicted: Sequence[ClassLabel | int] | IntArray,
) -> ConfusionMatrix:
    """Count (actual, predicted) pairs"""
    truth, predicted = _indices(truth), _indices(predicted)
    if truth.shape != predicted.shape:
        raise EvaluationError(
            f"{truth.size} actual labels but {predicted.size} predictions"
        )
    if truth.size == 0:
        raise EvaluationError("nothing to evaluate")
    return ConfusionMatrix(
        skl_metrics.confusion_matrix(truth, predicted, labels=np.arange(NUM_CLASSES))
    )


@dataclass(frozen=True)
class ClassMetrics:
    """One-vs-rest counts and rates of a single class"""

    label: ClassLabel
    tp: int
    fp: int
    tn: int
    fn: int
    tp_rate: float
    fp_rate: float
    precision: float
    recall: float
    f_measure: float
    accuracy: float

    @property
    def support(self) -> int:
        """Instances whose actual class is this one"""
        return self.tp + self.fn

    def to_dict(self) -> dict:
        """JSON-ready form"""
        return {**asdict(self), "label": self.label.canonical, "support": self.support}

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        """Inverse of to_dict()"""
        fields = {key: value for key, value in data.items() if key != "support"}
        return cls(**{**fields, "label": ClassLabel.parse(data["label"])})


def _ratio(numerator: int | float, denominator: int | float) -> float:
    return numerator / denominator if denominator > 0 else 0.0


def class_metrics(matrix: ConfusionMatrix, label: ClassLabel) -> ClassMetrics:
    """Metrics of one class. Rates with a zero denominator are 0."""
    tp, fp, fn, tn = matrix.one_vs_rest(label)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    return ClassMetrics(
        label=label,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        tp_rate=recall,
        fp_rate=_ratio(fp, fp + tn),
        precision=precision,
        recall=recall,
        f_measure=_ratio(2 * precision * recall, precision + recall),
        accuracy=_ratio(tp + tn, tp + fp + fn + tn),
    )


def per_class_metrics(matrix: ConfusionMatrix) -> list[ClassMetrics]:
    """Metrics of every class, in class index order"""
    if matrix.total < 1:
        raise EvaluationError("confusion matrix is empty")
    return [class_metrics(matrix, label) for label in LABELS]


@dataclass(frozen=True)
class WeightedMetrics:
    """Support-weighted averages of per-class metrics"""

    tp_rate: float
    fp_rate: float
    precision: float
    recall: float
    f_measure: float

    def to_dict(self) -> dict:
        """JSON-ready form"""
        return asdict(self)


def weighted_average(metrics: Sequence[ClassMetrics]) -> WeightedMetrics:
    """
    Average every metric with weights support / total support. The F-measure is
    the weighted mean of the per-class values, not recomputed from the averaged
    precision and recall.
    """
    if not metrics:
        raise EvaluationError("no class metrics to average")
    weights = np.array([m.support for m in metrics], dtype=np.float64)
    if weights.sum() < 1:
        raise EvaluationError("class supports sum to zero")
    weights /= weights.sum()

    def average(name: str) -> float:
        return float(np.dot(weights, [getattr(m, name) for m in metrics]))

    return WeightedMetrics(
        tp_rate=average("tp_rate"),
        fp_rate=average("fp_rate"),
        precision=average("precision"),
        recall=average("recall"),
        f_measure=average("f_measure"),
    )


@dataclass(frozen=True)
class BinaryMetrics:
    """Normal versus any attack, collapsed from the full confusion matrix"""

    accuracy: float
    false_alarms: int
    "Normal windows predicted as some attack"
    misses: int
    "Attack windows predicted as Normal"

    @classmethod
    def from_matrix(cls, matrix: ConfusionMatrix) -> Self:
        """Collapse all attack classes into one"""
        normal = ClassLabel.NORMAL.index
        counts = matrix.counts
        false_alarms = int(counts[normal, :].sum() - counts[normal, normal])
        misses = int(counts[:, normal].sum() - counts[normal, normal])
        correct = matrix.total - false_alarms - misses
        return cls(_ratio(correct, matrix.total), false_alarms, misses)


@dataclass(frozen=True)
class EvalReport:
    """Result of cross-validating one classifier on one attribute selection"""

    classifier: str
    attributes: tuple[str, ...]
    folds: int
    seed: int
    matrix: ConfusionMatrix
    per_class: tuple[ClassMetrics, ...]
    weighted: WeightedMetrics
    accuracy: float
    normal_vs_attack: BinaryMetrics

    @classmethod
    def from_matrix(
        cls,
        matrix: ConfusionMatrix,
        classifier: str,
        attributes: Sequence[str],
        folds: int,
        seed: int,
    ) -> Self:
        """Compute every metric of a pooled confusion matrix"""
        per_class = tuple(per_class_metrics(matrix))
        return cls(
            classifier=classifier,
            attributes=tuple(attributes),
            folds=folds,
            seed=seed,
            matrix=matrix,
            per_class=per_class,
            weighted=weighted_average(per_class),
            accuracy=matrix.accuracy,
            normal_vs_attack=BinaryMetrics.from_matrix(matrix),
        )

    def to_dict(self) -> dict:
        """Loss-free JSON form"""
        return {
            "classifier": self.classifier,
            "attributes": list(self.attributes),
            "folds": self.folds,
            "seed": self.seed,
            "classes": [label.canonical for label in LABELS],
            "matrix": self.matrix.counts.tolist(),
            "per_class": [m.to_dict() for m in self.per_class],
            "weighted": self.weighted.to_dict(),
            "accuracy": self.accuracy,
            "normal_vs_attack": asdict(self.normal_vs_attack),
        }

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        """Inverse of to_dict()"""
        try:
            return cls(
                classifier=data["classifier"],
                attributes=tuple(data["attributes"]),
                folds=int(data["folds"]),
                seed=int(data["seed"]),
                matrix=ConfusionMatrix(np.array(data["matrix"])),
                per_class=tuple(ClassMetrics.from_dict(m) for m in data["per_class"]),
                weighted=WeightedMetrics(**data["weighted"]),
                accuracy=float(data["accuracy"]),
                normal_vs_attack=BinaryMetrics(**data["normal_vs_attack"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise EvaluationError(f"invalid report document: {exc}") from exc


def cross_validate(
    ds: Dataset, spec: ClassifierSpec, k: int = 10, seed: int = 1, workers: int = 1
) -> IntArray:
    """
    Predicted class index of every record, each predicted by the model trained
    on the other k - 1 folds.
    """
    assignment = stratified_folds(ds, k, seed)
    predicted = np.full(len(ds), -1, dtype=np.int64)

    def run_fold(fold: int) -> tuple[IntArray, IntArray]:
        test = assignment.test_indices(fold)
        if test.size == 0:
            return test, test
        model = train(ds.subset(assignment.train_indices(fold)), spec, seed)
        return test, model.predict_all(ds.values[test])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_fold, range(k)))
    else:
        results = [run_fold(fold) for fold in range(k)]

    for test, labels in results:
        predicted[test] = labels
    return predicted


def evaluate_cv(
    ds: Dataset,
    spec: ClassifierSpec | str,
    k: int = 10,
    seed: int = 1,
    workers: int = 1,
) -> EvalReport:
    """
    Stratified k-fold cross-validation. Predictions of all folds are pooled
    into one confusion matrix before any metric is computed.
    """
    if isinstance(spec, str):
        spec = ClassifierSpec.parse(spec)

    predicted = cross_validate(ds, spec, k, seed, workers)
    report = EvalReport.from_matrix(
        confusion(ds.labels, predicted), str(spec), ds.schema, k, seed
    )
    log.info(
        "%s, %d folds: accuracy %.3f, weighted F %.3f",
        spec,
        k,
        report.accuracy,
        report.weighted.f_measure,
    )
    return report


METRIC_COLUMNS = ("TP Rate", "FP Rate", "Precision", "Recall", "F-Measure", "Accuracy")


def _metric_row(name: str, values: Sequence[float], support: int | None) -> str:
    cells = "".join(f"{value:>11.3f}" for value in values)
    support_cell = f"{support:>9d}" if support is not None else ""
    return f"{name:<13}{cells}{support_cell}"


def render_report(report: EvalReport, fmt: OutputFormat) -> str:
    """Report as loss-free JSON or as fixed-width text with 3 decimals"""
    if fmt == OutputFormat.JSON:
        return json.dumps(report.to_dict(), indent=2) + "\n"

    binary = report.normal_vs_attack
    lines = [
        f"Classifier: {report.classifier}",
        f"Attributes: {', '.join(report.attributes)}",
        f"Folds: {report.folds}  Seed: {report.seed}",
        f"Correctly classified: {report.matrix.correct} of {report.matrix.total}"
        f" (accuracy {report.accuracy:.3f})",
        "",
        f"{'Class':<13}{''.join(f'{name:>11}' for name in METRIC_COLUMNS)}  Support",
    ]
    for m in report.per_class:
        if m.support == 0 and m.tp + m.fp == 0:
            continue
        values = (m.tp_rate, m.fp_rate, m.precision, m.recall, m.f_measure, m.accuracy)
        lines.append(_metric_row(m.label.canonical, values, m.support))

    w = report.weighted
    lines.append(
        _metric_row(
            "Weighted Avg",
            (w.tp_rate, w.fp_rate, w.precision, w.recall, w.f_measure),
            None,
        )
    )
    lines += [
        "",
        f"Normal vs attack: accuracy {binary.accuracy:.3f}, "
        f"false alarms {binary.false_alarms}, misses {binary.misses}",
        "",
        "Confusion matrix (rows = actual, columns = predicted)",
        " " * 13 + "".join(f"{str(i):>8}" for i in range(NUM_CLASSES)),
    ]
    for label, row in zip(LABELS, report.matrix.counts):
        cells = "".join(f"{c:>8d}" for c in row)
        lines.append(f"{label.index} {label.canonical:<11}{cells}")
    return "\n".join(lines) + "\n"
