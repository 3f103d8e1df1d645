"""
Model files
"""

import io
import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from mibguard.classifiers import train
from mibguard.dataset import Dataset
from mibguard.errors import ModelError
from mibguard.file import dumps_model, load_model, loads_model, save_model
from mibguard.model import FORMAT_VERSION
from mibguard.types import ClassifierKind

SPECS = ["bayes", "ibk:3", "j48:2", "rules:1", "bagging:4:j48:2", "pasting:3:bayes"]
SCALE = np.array([1, 10, 1000, 0.001])


def training_set() -> Dataset:
    rng = np.random.default_rng(42)
    values = rng.normal(0, 1, (120, 4)) * SCALE
    return Dataset(("iOM", "iIM", "iIE", "iOE"), values, rng.integers(0, 8, 120))


class ModelFileTest(unittest.TestCase):
    def setUp(self):
        self.ds = training_set()
        self.queries = np.random.default_rng(7).normal(0, 2, (1000, 4)) * SCALE

    def test_round_trip_predicts_identically(self):
        for spec in SPECS:
            model = train(self.ds, spec)
            loaded = loads_model(dumps_model(model))
            self.assertEqual(loaded.kind, model.kind)
            self.assertEqual(loaded.schema, model.schema)
            self.assertEqual(loaded.classes, model.classes)
            np.testing.assert_array_equal(
                loaded.predict_all(self.queries), model.predict_all(self.queries)
            )
            self.assertEqual(loaded.to_dict(), model.to_dict(), spec)

    def test_document_layout(self):
        data = json.loads(dumps_model(train(self.ds, "ibk:3")))
        self.assertEqual(data["format_version"], FORMAT_VERSION)
        self.assertEqual(data["kind"], "ibk")
        self.assertEqual(data["schema"], ["iOM", "iIM", "iIE", "iOE"])
        self.assertEqual(data["params"], {"k": 3})
        self.assertEqual(len(data["normalization"]["min"]), 4)

    def test_nested_members(self):
        data = json.loads(dumps_model(train(self.ds, "bagging:4:rules:1")))
        self.assertEqual(data["params"]["iterations"], 4)
        self.assertEqual(
            [member["kind"] for member in data["structure"]["members"]], ["rules"] * 4
        )

    def test_paths_and_streams(self):
        model = train(self.ds, "j48:2")
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "model.json"
            save_model(model, path)
            self.assertEqual(load_model(str(path)).to_dict(), model.to_dict())

        stream = io.StringIO()
        save_model(model, stream)
        stream.seek(0)
        self.assertEqual(load_model(stream).kind, ClassifierKind.TREE)

    def test_missing_file(self):
        with self.assertRaises(ModelError):
            load_model("/nonexistent/model.json")

    def test_not_utf8(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "model.json"
            path.write_bytes(b"\xff\xfe")
            with self.assertRaises(ModelError):
                load_model(path)

    def test_tree_children_must_follow_their_parent(self):
        valid = train(self.ds, "j48:2").to_dict()
        self.assertNotEqual(valid["structure"]["attribute"][0], -1)
        for side in ("left", "right"):
            structure = dict(valid["structure"])
            structure[side] = [0, *structure[side][1:]]
            with self.assertRaises(ModelError, msg=side):
                loads_model(json.dumps({**valid, "structure": structure}))

    def test_invalid_documents(self):
        valid = train(self.ds, "bayes").to_dict()

        def variant(**changes) -> str:
            return json.dumps({**valid, **changes})

        documents = {
            "not json": "{",
            "not an object": "[1, 2]",
            "bad version": variant(format_version=99),
            "unknown kind": variant(kind="svm"),
            "unknown class": variant(classes=["Normal", "Teardrop"]),
            "bad schema": variant(schema=["a", "a", "b", "c"]),
            "no structure": json.dumps(
                {key: value for key, value in valid.items() if key != "structure"}
            ),
            "short priors": variant(structure={**valid["structure"], "priors": [1]}),
        }
        for name, text in documents.items():
            with self.assertRaises(ModelError, msg=name):
                loads_model(text)

    def test_ensemble_rejects_nested_ensembles(self):
        valid = train(self.ds, "bagging:2").to_dict()
        nested = {**valid, "structure": {"members": [valid]}}
        with self.assertRaises(ModelError):
            loads_model(json.dumps(nested))
