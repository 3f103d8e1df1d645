"""
Comparison grids
"""

import json
import unittest

from mibguard.common import permute_options, to_list
from mibguard.experiments import render_grid, run_grid
from mibguard.features import AttributeSelection
from mibguard.model import ClassifierSpec
from mibguard.synth import PRESETS, synth_generate
from mibguard.types import OutputFormat


class PermuteOptionsTest(unittest.TestCase):
    def test_first_option_varies_slowest(self):
        cells = list(permute_options(a=[1, 2], b=[3, 4]))
        self.assertEqual(
            cells,
            [{"a": 1, "b": 3}, {"a": 1, "b": 4}, {"a": 2, "b": 3}, {"a": 2, "b": 4}],
        )

    def test_single_values(self):
        self.assertEqual(list(permute_options(a=1, b=[2])), [{"a": 1, "b": 2}])
        self.assertEqual(to_list((1, 2)), [1, 2])
        self.assertEqual(to_list(None), [None])


class GridTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.ds = synth_generate(PRESETS["table-one"](5))
        cls.selections = [
            AttributeSelection.parse("all"),
            AttributeSelection.parse("top:3:correlation"),
        ]
        cls.classifiers = [ClassifierSpec.parse("bayes"), ClassifierSpec.parse("j48")]
        cls.results = run_grid(
            cls.ds,
            k=3,
            seed=5,
            selection=cls.selections,
            classifier=cls.classifiers,
        )

    def test_cell_order(self):
        cells = [(str(r.selection), r.report.classifier) for r in self.results]
        self.assertEqual(
            cells,
            [
                ("all", "bayes"),
                ("all", "j48:2"),
                ("top:3:correlation", "bayes"),
                ("top:3:correlation", "j48:2"),
            ],
        )

    def test_selection_is_applied(self):
        self.assertEqual(self.results[0].report.attributes, self.ds.schema)
        self.assertEqual(len(self.results[2].report.attributes), 3)
        self.assertEqual(
            self.results[2].report.attributes, self.results[3].report.attributes
        )

    def test_single_option_value(self):
        results = run_grid(
            self.ds,
            k=3,
            seed=5,
            selection=self.selections[0],
            classifier=self.classifiers[0],
        )
        self.assertEqual(len(results), 1)
        self.assertEqual(results[0].report, self.results[0].report)

    def test_render_text(self):
        text = render_grid(self.results, OutputFormat.TEXT)
        blocks = text.strip().split("\n\n")
        self.assertEqual(len(blocks), 2)
        self.assertTrue(blocks[0].startswith("F-measure, attributes all: "))
        self.assertIn("Weighted Avg", blocks[1])
        self.assertIn("j48:2", blocks[1])
        self.assertIn("IcmpEcho", text)

    def test_render_json(self):
        data = json.loads(render_grid(self.results, OutputFormat.JSON))
        self.assertEqual(len(data), 4)
        self.assertEqual(data[3]["selection"], "top:3:correlation")
        self.assertEqual(data[3]["report"]["classifier"], "j48:2")
