"""
Attribute evaluators (InfoGain, ReliefF, correlation) and the ranker search.

Every evaluator takes the un-normalized dataset and returns one score per
attribute in schema order; `rank` orders them for selection.
"""

import json
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from typing_extensions import Self

from .dataset import Dataset, fit_normalization, select_attributes
from .errors import FeatureError, UsageError
from .types import (
    NUM_CLASSES,
    AttributeSchema,
    Evaluator,
    FloatArray,
    IntArray,
    OutputFormat,
)

log = logging.getLogger(__name__)

DEFAULT_BINS = 10
DEFAULT_NEIGHBORS = 10


@dataclass(frozen=True)
class AttributeScore:
    """Evaluator score of one attribute"""

    name: str
    score: float


@dataclass(frozen=True)
class AttributeRanking:
    """Attribute scores ordered best first"""

    evaluator: Evaluator | None
    scores: tuple[AttributeScore, ...]

    @property
    def names(self) -> list[str]:
        """Attribute names, best first"""
        return [item.name for item in self.scores]

    def __len__(self):
        return len(self.scores)

    def to_dict(self) -> dict:
        """JSON report form"""
        return {
            "evaluator": self.evaluator.value if self.evaluator else None,
            "scores": [
                {"name": item.name, "score": item.score} for item in self.scores
            ],
            "ranked": self.names,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        """Inverse of to_dict()"""
        evaluator = Evaluator(data["evaluator"]) if data.get("evaluator") else None
        scores = tuple(
            AttributeScore(item["name"], float(item["score"]))
            for item in data["scores"]
        )
        return cls(evaluator, scores)


def entropy(counts: Sequence[int] | IntArray) -> float:
    """Base-2 entropy of a count vector"""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def discretize(column: FloatArray, max_bins: int = DEFAULT_BINS) -> IntArray:
    """
    Unsupervised equal-frequency binning.

    With at most `max_bins` distinct values, every distinct value gets its own
    bin. Otherwise a value goes to bin floor(max_bins * below / n), where
    `below` counts the records with a smaller value, so equal values always
    share a bin and the result only depends on value order.
    """
    distinct, inverse, counts = np.unique(
        column, return_inverse=True, return_counts=True
    )
    inverse = inverse.reshape(-1)
    if distinct.size <= max_bins:
        return inverse

    below = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return ((max_bins * below) // column.size)[inverse]


def info_gain_from_bins(bins: IntArray, labels: IntArray) -> float:
    """H(class) - H(class | bin) from the bin/class contingency table"""
    bins = np.asarray(bins, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    table = np.zeros((int(bins.max()) + 1, NUM_CLASSES))
    np.add.at(table, (bins, labels), 1)

    n = labels.size
    class_entropy = entropy(table.sum(axis=0))
    conditional = sum(row.sum() / n * entropy(row) for row in table if row.sum() > 0)
    return float(min(max(class_entropy - conditional, 0.0), class_entropy))


def info_gain_scores(ds: Dataset, max_bins: int = DEFAULT_BINS) -> list[AttributeScore]:
    """
    Information gain of every attribute after equal-frequency discretization
    into min(max_bins, distinct values) bins. A single-class dataset scores 0
    everywhere.
    """
    if len(ds) < 2:
        raise FeatureError("information gain needs at least 2 records")

    return [
        AttributeScore(
            name, info_gain_from_bins(discretize(column, max_bins), ds.labels)
        )
        for name, column in zip(ds.schema, ds.values.T)
    ]


def relieff_scores(
    ds: Dataset,
    k_neighbors: int = DEFAULT_NEIGHBORS,
    sample_count: int | None = None,
    seed: int = 1,
) -> list[AttributeScore]:
    """
    Multi-class ReliefF weights.

    For each sampled record, the mean diff to its k nearest hits is subtracted
    and the mean diff to its k nearest misses of every other class is added,
    weighted by prior(c) / (1 - prior(class of the record)). diff is the
    absolute difference scaled by the attribute's range, distance is the sum
    of diffs, and distance ties go to the lower record index. Classes with
    fewer than k other members use all of them. Weights are divided by the
    number of sampled records and lie in [-1, 1].

    `sample_count=None` (or >= record count) visits every record in order.
    """
    if k_neighbors < 1:
        raise FeatureError(f"k_neighbors must be >= 1, got {k_neighbors}")
    present = ds.present_classes()
    if present.size < 2:
        raise FeatureError("ReliefF needs at least two classes")

    n = len(ds)
    scaled = fit_normalization(ds)(ds.values)
    labels = ds.labels
    priors = ds.class_counts() / n
    members = {c: np.flatnonzero(labels == c) for c in present}

    if sample_count is None or sample_count >= n:
        sample = np.arange(n)
    elif sample_count < 1:
        raise FeatureError(f"sample_count must be >= 1, got {sample_count}")
    else:
        sample = np.sort(np.random.default_rng(seed).permutation(n)[:sample_count])

    weights = np.zeros(ds.width)
    for i in sample:
        diffs = np.abs(scaled - scaled[i])
        distance = diffs.sum(axis=1)
        own = labels[i]
        for c in present:
            candidates = members[c]
            if c == own:
                candidates = candidates[candidates != i]
            if candidates.size == 0:
                continue
            nearest = candidates[
                np.argsort(distance[candidates], kind="stable")[:k_neighbors]
            ]
            mean_diff = diffs[nearest].mean(axis=0)
            if c == own:
                weights -= mean_diff
            else:
                weights += priors[c] / (1.0 - priors[own]) * mean_diff

    weights = np.clip(weights / sample.size, -1.0, 1.0)
    log.debug("relieff visited %d records", sample.size)
    return [AttributeScore(name, float(w)) for name, w in zip(ds.schema, weights)]


def correlation_scores(ds: Dataset) -> list[AttributeScore]:
    """
    Sum over present classes of prior(c) * |pearson(A, class == c)|. The
    Pearson coefficient of a constant vector is taken as 0.
    """
    if len(ds) < 2:
        raise FeatureError("correlation needs at least 2 records")
    present = ds.present_classes()
    if present.size < 2:
        raise FeatureError("correlation needs at least two classes")

    values = ds.values
    constant = values.max(axis=0) == values.min(axis=0)
    centered = np.where(constant, 0.0, values - values.mean(axis=0))
    spread = (centered * centered).sum(axis=0)
    priors = ds.class_counts() / len(ds)

    scores = np.zeros(ds.width)
    for c in present:
        indicator = (ds.labels == c).astype(np.float64)
        indicator -= indicator.mean()
        denominator = np.sqrt(spread * (indicator * indicator).sum())
        r = np.divide(
            centered.T @ indicator,
            denominator,
            out=np.zeros(ds.width),
            where=denominator > 0,
        )
        scores += priors[c] * np.minimum(np.abs(r), 1.0)

    return [AttributeScore(name, float(s)) for name, s in zip(ds.schema, scores)]


def rank(
    scores: Sequence[AttributeScore],
    schema: AttributeSchema,
    evaluator: Evaluator | None = None,
) -> AttributeRanking:
    """
    Order scores best first. Equal scores keep schema order.
    """
    position = {name: index for index, name in enumerate(schema)}
    seen = set()
    for item in scores:
        if item.name in seen:
            raise FeatureError(f"attribute {item.name!r} scored twice")
        if item.name not in position:
            raise FeatureError(f"attribute {item.name!r} is not in the schema")
        seen.add(item.name)

    ordered = sorted(scores, key=lambda item: (-item.score, position[item.name]))
    return AttributeRanking(evaluator, tuple(ordered))


def top_n(ranking: AttributeRanking, n: int) -> list[str]:
    """The first n attribute names of a ranking"""
    if not 1 <= n <= len(ranking):
        raise FeatureError(f"top {n} requested from a ranking of {len(ranking)}")
    return ranking.names[:n]


def rank_attributes(
    ds: Dataset,
    evaluator: Evaluator,
    k_neighbors: int = DEFAULT_NEIGHBORS,
    sample_count: int | None = None,
    seed: int = 1,
    max_bins: int = DEFAULT_BINS,
) -> AttributeRanking:
    """Score every attribute with an evaluator and rank the result"""
    match evaluator:
        case Evaluator.RELIEFF:
            scores = relieff_scores(ds, k_neighbors, sample_count, seed)
        case Evaluator.INFO_GAIN:
            scores = info_gain_scores(ds, max_bins)
        case Evaluator.CORRELATION:
            scores = correlation_scores(ds)
        case _:
            raise FeatureError(f"unknown evaluator {evaluator}")

    ranking = rank(scores, ds.schema, evaluator)
    log.info("%s ranking: %s", evaluator.value, ", ".join(ranking.names))
    return ranking


def render_ranking(ranking: AttributeRanking, fmt: OutputFormat) -> str:
    """Ranking report as JSON or an aligned text table"""
    if fmt == OutputFormat.JSON:
        return json.dumps(ranking.to_dict(), indent=2) + "\n"

    title = ranking.evaluator.value if ranking.evaluator else "scores"
    width = max([len("attribute")] + [len(name) for name in ranking.names])
    lines = [
        f"Ranked attributes ({title})",
        f"{'rank':>4}  {'attribute':<{width}}  {'score':>10}",
    ]
    for position, item in enumerate(ranking.scores, start=1):
        lines.append(f"{position:>4}  {item.name:<{width}}  {item.score:>10.6f}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class AttributeSelection:
    """
    Which attributes a classifier sees: every attribute, an explicit list, or
    the top N of an evaluator's ranking.

    Text form: ``all | name[,name...] | top:N:evaluator``
    """

    names: tuple[str, ...] = ()
    top: int | None = None
    evaluator: Evaluator | None = None

    @classmethod
    def parse(cls, text: str) -> Self:
        """Parse the text form. Raises UsageError on malformed input."""
        text = text.strip()
        if text.lower() == "all":
            return cls()
        if text.lower().startswith("top:"):
            parts = text.split(":")
            try:
                top, evaluator = int(parts[1]), Evaluator(parts[2].lower())
            except (IndexError, ValueError) as exc:
                raise UsageError(
                    f"{text!r}: expected top:N:{{relieff,infogain,correlation}}"
                ) from exc
            if len(parts) != 3 or top < 1:
                raise UsageError(f"{text!r}: expected top:N:evaluator with N >= 1")
            return cls(top=top, evaluator=evaluator)

        names = tuple(name.strip() for name in text.split(","))
        if not all(names):
            raise UsageError(f"{text!r}: empty attribute name")
        return cls(names=names)

    def __str__(self):
        if self.evaluator is not None:
            return f"top:{self.top}:{self.evaluator.value}"
        return ",".join(self.names) if self.names else "all"

    def apply(self, ds: Dataset, seed: int = 1) -> Dataset:
        """Dataset restricted to the selected attributes"""
        if self.evaluator is not None:
            ranking = rank_attributes(ds, self.evaluator, seed=seed)
            return select_attributes(ds, top_n(ranking, self.top))
        if self.names:
            return select_attributes(ds, self.names)
        return ds
