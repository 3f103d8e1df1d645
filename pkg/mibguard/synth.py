"""
Synthetic MIB-counter datasets, used when the published dataset is not
available and as controlled inputs for tests.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from typing_extensions import Self

from .dataset import Dataset
from .errors import DatasetError
from .oids import ICMP_ATTRIBUTES
from .types import ClassLabel, FloatArray

log = logging.getLogger(__name__)

MAX_REDRAWS = 100

TABLE_ONE_COUNTS = {
    ClassLabel.NORMAL: 600,
    ClassLabel.ICMP_ECHO: 632,
    ClassLabel.TCP_SYN: 960,
    ClassLabel.UDP_FLOOD: 773,
    ClassLabel.HTTP_FLOOD: 573,
    ClassLabel.SLOWLORIS: 780,
    ClassLabel.SLOWPOST: 480,
    ClassLabel.BRUTE_FORCE: 200,
}
"""Record count per class of the published dataset"""


@dataclass(frozen=True)
class AttributeDistribution:
    """Normal distribution truncated at zero"""

    mean: float
    stddev: float = 0.0

    def __post_init__(self):
        if not self.stddev >= 0:
            raise DatasetError(f"stddev must be >= 0, got {self.stddev}")


@dataclass(frozen=True)
class ClassSpec:
    """Record count and per-attribute distributions of one class"""

    label: ClassLabel
    count: int
    attrs: dict[str, AttributeDistribution] = field(default_factory=dict)

    def __post_init__(self):
        if self.count < 0:
            raise DatasetError(f"{self.label}: count must be >= 0, got {self.count}")


@dataclass(frozen=True)
class SynthSpec:
    """Complete description of a synthetic dataset"""

    classes: tuple[ClassSpec, ...]
    seed: int = 1

    def __post_init__(self):
        labels = [spec.label for spec in self.classes]
        if len(set(labels)) != len(labels):
            raise DatasetError("each class may appear only once in a synthetic spec")

    @property
    def schema(self) -> tuple[str, ...]:
        """Attribute names in order of first appearance"""
        names: dict[str, None] = {}
        for spec in self.classes:
            names.update(dict.fromkeys(spec.attrs))
        return tuple(names)

    def to_dict(self) -> dict:
        """JSON-ready form"""
        return {
            "classes": [
                {
                    "label": spec.label.canonical,
                    "count": spec.count,
                    "attrs": {
                        name: {"mean": dist.mean, "stddev": dist.stddev}
                        for name, dist in spec.attrs.items()
                    },
                }
                for spec in self.classes
            ],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        """Parse the JSON document form"""
        try:
            classes = tuple(
                ClassSpec(
                    label=ClassLabel.parse(entry["label"]),
                    count=int(entry["count"]),
                    attrs={
                        name: AttributeDistribution(
                            float(dist["mean"]), float(dist.get("stddev", 0.0))
                        )
                        for name, dist in entry.get("attrs", {}).items()
                    },
                )
                for entry in data["classes"]
            )
            return cls(classes, int(data.get("seed", 1)))
        except DatasetError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"invalid synthetic spec: {exc}") from exc


def load_synth_spec(path: str | Path) -> SynthSpec:
    """Read a synthetic spec JSON document"""
    try:
        with open(path, encoding="utf-8") as file:
            return SynthSpec.from_dict(json.load(file))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def _truncated_normal(
    rng: np.random.Generator, dist: AttributeDistribution, size: int
) -> FloatArray:
    if dist.stddev == 0:
        return np.full(size, max(dist.mean, 0.0))

    values = rng.normal(dist.mean, dist.stddev, size)
    for _ in range(MAX_REDRAWS):
        negative = values < 0
        if not negative.any():
            break
        values[negative] = rng.normal(dist.mean, dist.stddev, int(negative.sum()))

    # Means far below zero would need many redraws.
    return np.maximum(values, 0.0)


def synth_generate(spec: SynthSpec, seed: int | None = None) -> Dataset:
    """
    Draw a dataset from a synthetic spec.

    Records are grouped by class in spec order. Every (class, attribute) value
    is drawn from a normal distribution truncated at zero; attributes a class
    does not mention are constant 0. `seed` overrides the document's own seed.
    """
    if sum(class_spec.count for class_spec in spec.classes) == 0:
        raise DatasetError("all class counts are zero")

    schema = spec.schema
    if not schema:
        raise DatasetError("synthetic spec names no attributes")

    rng = np.random.default_rng(spec.seed if seed is None else seed)
    missing = AttributeDistribution(0.0)
    blocks = []
    labels = []
    for class_spec in spec.classes:
        block = np.empty((class_spec.count, len(schema)))
        for column, name in enumerate(schema):
            dist = class_spec.attrs.get(name, missing)
            block[:, column] = _truncated_normal(rng, dist, class_spec.count)
        blocks.append(block)
        labels.append(np.full(class_spec.count, class_spec.label.index))

    dataset = Dataset(schema, np.vstack(blocks), np.concatenate(labels))
    log.info("generated %d synthetic records", len(dataset))
    return dataset


def _profile_spec(
    profiles: dict[ClassLabel, tuple[tuple[float, float], ...]],
    counts: dict[ClassLabel, int],
    seed: int,
) -> SynthSpec:
    classes = tuple(
        ClassSpec(
            label,
            counts[label],
            {
                name: AttributeDistribution(mean, stddev)
                for name, (mean, stddev) in zip(ICMP_ATTRIBUTES, params)
            },
        )
        for label, params in profiles.items()
    )
    return SynthSpec(classes, seed)


def table_one_spec(seed: int = 1) -> SynthSpec:
    """
    Published class counts with overlapping attack profiles. ICMP echo floods
    stand out; SYN floods, slow POST and brute force look alike in the ICMP
    group.
    """
    # iOM, iIM, iOU, iIU, iIE, iOE
    means = {
        ClassLabel.NORMAL: (40, 45, 2, 3, 20, 18),
        ClassLabel.ICMP_ECHO: (9000, 9100, 5, 5, 9000, 8900),
        ClassLabel.TCP_SYN: (60, 70, 30, 40, 25, 20),
        ClassLabel.UDP_FLOOD: (900, 120, 850, 60, 30, 25),
        ClassLabel.HTTP_FLOOD: (20, 25, 1, 2, 10, 9),
        ClassLabel.SLOWLORIS: (5, 6, 0.5, 0.5, 3, 3),
        ClassLabel.SLOWPOST: (55, 65, 25, 35, 22, 20),
        ClassLabel.BRUTE_FORCE: (45, 50, 3, 4, 22, 20),
    }
    profiles = {
        label: tuple((mean, 0.25 * mean) for mean in values)
        for label, values in means.items()
    }
    return _profile_spec(profiles, TABLE_ONE_COUNTS, seed)


def separable_spec(seed: int = 1) -> SynthSpec:
    """
    Published class counts with disjoint per-class ranges on every attribute
    """
    profiles = {
        label: tuple(
            (1000.0 * (label.index + 1) + 100.0 * column, 20.0) for column in range(6)
        )
        for label in ClassLabel
    }
    return _profile_spec(profiles, TABLE_ONE_COUNTS, seed)


def echo_flood_spec(seed: int = 1) -> SynthSpec:
    """
    Normal versus ICMP echo flood, matched to the simulated agent's idle and
    echo-flood scenarios
    """
    quiet, flood = (3.0, 2.0), (10000.0, 500.0)
    profiles = {
        ClassLabel.NORMAL: (quiet, quiet, (0.5, 0.5), (0.5, 0.5), quiet, quiet),
        ClassLabel.ICMP_ECHO: (flood, flood, (1.0, 1.0), (1.0, 1.0), flood, flood),
    }
    counts = {label: TABLE_ONE_COUNTS[label] for label in profiles}
    return _profile_spec(profiles, counts, seed)


PRESETS: dict[str, Callable[[int], SynthSpec]] = {
    "table-one": table_one_spec,
    "separable": separable_spec,
    "echo-flood": echo_flood_spec,
}
"""Built-in synthetic specs by name"""
