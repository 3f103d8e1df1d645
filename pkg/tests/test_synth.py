"""
Synthetic dataset generation
"""

import io
import json
import os
import tempfile
import unittest

import numpy as np

from mibguard.dataset import class_distribution, write_csv
from mibguard.errors import DatasetError
from mibguard.synth import (
    PRESETS,
    TABLE_ONE_COUNTS,
    AttributeDistribution,
    ClassSpec,
    SynthSpec,
    load_synth_spec,
    synth_generate,
)
from mibguard.types import ClassLabel


def two_class_spec(stddev: float = 1.0, seed: int = 1) -> SynthSpec:
    return SynthSpec(
        (
            ClassSpec(ClassLabel.NORMAL, 5, {"iIE": AttributeDistribution(10, stddev)}),
            ClassSpec(
                ClassLabel.ICMP_ECHO, 3, {"iIE": AttributeDistribution(500, stddev)}
            ),
        ),
        seed,
    )


class SynthGenerateTest(unittest.TestCase):
    def test_table_one_counts(self):
        ds = synth_generate(PRESETS["table-one"](1))
        self.assertEqual(len(ds), 4998)
        self.assertEqual(class_distribution(ds), TABLE_ONE_COUNTS)

    def test_deterministic(self):
        first, second = io.StringIO(), io.StringIO()
        write_csv(synth_generate(two_class_spec(), seed=5), first)
        write_csv(synth_generate(two_class_spec(), seed=5), second)
        self.assertEqual(first.getvalue(), second.getvalue())

    def test_seed_override(self):
        ds = synth_generate(two_class_spec(seed=1))
        self.assertEqual(synth_generate(two_class_spec(seed=2), seed=1), ds)
        self.assertNotEqual(synth_generate(two_class_spec(seed=1), seed=2), ds)

    def test_zero_stddev(self):
        ds = synth_generate(two_class_spec(stddev=0))
        np.testing.assert_array_equal(ds.values[ds.labels == 0], 10)
        np.testing.assert_array_equal(ds.values[ds.labels == 1], 500)

    def test_values_non_negative(self):
        spec = SynthSpec(
            (ClassSpec(ClassLabel.NORMAL, 200, {"a": AttributeDistribution(1, 5)}),)
        )
        self.assertTrue(np.all(synth_generate(spec).values >= 0))

    def test_missing_attribute_is_zero(self):
        spec = SynthSpec(
            (
                ClassSpec(ClassLabel.NORMAL, 2, {"a": AttributeDistribution(1)}),
                ClassSpec(ClassLabel.SLOWPOST, 2, {"b": AttributeDistribution(4)}),
            )
        )
        ds = synth_generate(spec)
        self.assertEqual(ds.schema, ("a", "b"))
        np.testing.assert_array_equal(ds.values, [[1, 0], [1, 0], [0, 4], [0, 4]])

    def test_all_zero_counts(self):
        empty = ClassSpec(ClassLabel.NORMAL, 0, {"a": AttributeDistribution(1)})
        spec = SynthSpec((empty,))
        with self.assertRaises(DatasetError):
            synth_generate(spec)

    def test_negative_stddev(self):
        with self.assertRaises(DatasetError):
            AttributeDistribution(1, -1)

    def test_separable_ranges_are_disjoint(self):
        ds = synth_generate(PRESETS["separable"](1))
        column = ds.values[:, 4]
        ranges = [
            (column[ds.labels == c].min(), column[ds.labels == c].max())
            for c in range(8)
        ]
        for (_, high), (low, _) in zip(ranges, ranges[1:]):
            self.assertLess(high, low)


class SynthSpecFileTest(unittest.TestCase):
    def test_document(self):
        document = {
            "classes": [
                {"label": "Normal", "count": 3, "attrs": {"iIE": {"mean": 2}}},
                {
                    "label": "ICMP-Echo Attack",
                    "count": 2,
                    "attrs": {"iIE": {"mean": 900, "stddev": 0}},
                },
            ],
            "seed": 4,
        }
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "spec.json")
            with open(path, "w", encoding="utf-8") as file:
                json.dump(document, file)
            spec = load_synth_spec(path)

        self.assertEqual(spec.seed, 4)
        self.assertEqual(spec.classes[1].label, ClassLabel.ICMP_ECHO)
        self.assertEqual(SynthSpec.from_dict(spec.to_dict()), spec)
        ds = synth_generate(spec)
        self.assertEqual(ds.values[:, 0].tolist(), [2, 2, 2, 900, 900])

    def test_invalid(self):
        with self.assertRaises(DatasetError):
            SynthSpec.from_dict({"classes": [{"label": "Smurf", "count": 1}]})
        with self.assertRaises(DatasetError):
            SynthSpec.from_dict({})
