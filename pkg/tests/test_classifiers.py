"""
The five classifier families
"""

import unittest

import numpy as np

from mibguard.bagging import BaggingModel, train_bagging
from mibguard.bayes import train_naive_bayes
from mibguard.classifiers import train
from mibguard.dataset import Dataset
from mibguard.errors import ModelError, SchemaMismatchError, UsageError
from mibguard.knn import train_knn
from mibguard.model import ClassifierSpec
from mibguard.rules import train_rules
from mibguard.tree import LEAF, train_tree
from mibguard.types import ClassifierKind, ClassLabel

NORMAL, ECHO = ClassLabel.NORMAL, ClassLabel.ICMP_ECHO

ALL_SPECS = ["bayes", "ibk:3", "j48:2", "rules:1", "bagging:5:j48:2", "pasting:5:ibk"]


def one_dimensional() -> Dataset:
    return Dataset(("a",), [[1], [2], [8], [9]], [0, 0, 1, 1])


def random_dataset(seed: int, n: int = 60, d: int = 3, classes: int = 8) -> Dataset:
    rng = np.random.default_rng(seed)
    return Dataset(
        tuple(f"a{i}" for i in range(d)),
        rng.random((n, d)),
        rng.integers(0, classes, n),
    )


class ClassifierSpecTest(unittest.TestCase):
    def test_parse(self):
        self.assertEqual(ClassifierSpec.parse("bayes").kind, ClassifierKind.BAYES)
        self.assertEqual(ClassifierSpec.parse("ibk").k, 1)
        self.assertEqual(ClassifierSpec.parse("IBK:5").k, 5)
        self.assertEqual(ClassifierSpec.parse("j48:3").min_leaf, 3)
        self.assertEqual(ClassifierSpec.parse("rules:2").min_coverage, 2)

        bagging = ClassifierSpec.parse("bagging")
        self.assertEqual(bagging.iterations, 10)
        self.assertEqual(bagging.base, ClassifierSpec(ClassifierKind.TREE))
        self.assertTrue(bagging.replacement)

        pasting = ClassifierSpec.parse("pasting:4:ibk:3")
        self.assertFalse(pasting.replacement)
        self.assertEqual(pasting.base.k, 3)

    def test_text_round_trip(self):
        for text in ("bayes", "ibk:3", "j48:2", "rules:1", "bagging:10:j48:2"):
            self.assertEqual(str(ClassifierSpec.parse(text)), text)

    def test_errors(self):
        bad = ("svm", "bayes:1", "ibk:0", "j48:x", "ibk:1:2", "bagging:3:bagging")
        for text in bad:
            with self.assertRaises(UsageError, msg=text):
                ClassifierSpec.parse(text)


class NaiveBayesTest(unittest.TestCase):
    def test_symmetric_query(self):
        ds = Dataset(("a",), [[-3], [-1], [1], [3]], [0, 0, 1, 1])
        model = train_naive_bayes(ds)
        np.testing.assert_allclose(model.predict_distribution([0])[:2], [0.5, 0.5])
        self.assertEqual(model.predict([0]), NORMAL)

    def test_hand_example(self):
        ds = Dataset(("a",), [[1], [3], [7], [9]], [0, 0, 1, 1])
        model = train_naive_bayes(ds)
        distribution = model.predict_distribution([4])
        self.assertGreater(distribution[0], distribution[1])
        self.assertEqual(model.predict([4]), NORMAL)

    def test_point_masses(self):
        ds = Dataset(("a",), [[2], [2], [6], [6]], [0, 0, 5, 5])
        model = train_naive_bayes(ds)
        self.assertAlmostEqual(model.predict_distribution([6])[5], 1.0)
        self.assertEqual(model.predict([6]), ClassLabel.SLOWLORIS)

    def test_priors_and_floor(self):
        model = train_naive_bayes(Dataset(("a",), [[1], [1], [4]], [0, 0, 1]))
        self.assertAlmostEqual(model.priors.sum(), 1.0)
        self.assertGreaterEqual(model.variances.min(), 1e-9)

    def test_scale_invariance(self):
        ds = random_dataset(21, n=80, classes=3)
        queries = np.random.default_rng(22).random((50, 3))
        plain = train_naive_bayes(ds, variance_floor=0)
        scaled = train_naive_bayes(
            Dataset(ds.schema, ds.values * 7.5, ds.labels), variance_floor=0
        )
        for query in queries:
            self.assertEqual(plain.predict(query), scaled.predict(query * 7.5))

    def test_empty(self):
        with self.assertRaises(ModelError):
            train_naive_bayes(Dataset(("a",), np.empty((0, 1)), []))


def knn_oracle(ds: Dataset, query, k: int) -> ClassLabel:
    """Exhaustive linear scan over min-max normalized records"""
    lows = [min(column) for column in ds.values.T.tolist()]
    highs = [max(column) for column in ds.values.T.tolist()]

    def scale(value: float, column: int) -> float:
        span = highs[column] - lows[column]
        if span <= 0:
            return 0.0
        return min(max((value - lows[column]) / span, 0.0), 1.0)

    scaled_query = [scale(v, c) for c, v in enumerate(query)]
    distances = []
    for row in ds.values.tolist():
        distance = 0.0
        for column, value in enumerate(row):
            diff = scale(value, column) - scaled_query[column]
            distance += diff * diff
        distances.append(distance)

    nearest = sorted(range(len(distances)), key=lambda i: (distances[i], i))[:k]
    labels = [int(ds.labels[i]) for i in nearest]
    best = max(labels.count(label) for label in labels)
    for label in labels:
        if labels.count(label) == best:
            return ClassLabel.from_index(label)
    raise AssertionError("no neighbours")


class KnnTest(unittest.TestCase):
    def test_identity(self):
        ds = random_dataset(1)
        model = train_knn(ds, 1)
        for values, label in list(ds.records)[:10]:
            self.assertEqual(model.predict(values), label)

    def test_k_equals_n(self):
        ds = Dataset(("a",), [[1], [2], [3], [10], [11]], [4, 4, 4, 2, 2])
        model = train_knn(ds, 5)
        self.assertEqual(model.predict([10.5]), ClassLabel.HTTP_FLOOD)

    def test_hand_example(self):
        ds = Dataset(
            ("x", "y"),
            [[0, 1], [0, 2], [0, 3], [0, 10], [10, 0]],
            [0, 0, 1, 1, 1],
        )
        model = train_knn(ds, 3)
        self.assertEqual(model.predict([0, 0]), NORMAL)
        distribution = model.predict_distribution([0, 0])
        np.testing.assert_allclose(distribution[:2], [2 / 3, 1 / 3])

    def test_vote_tie_goes_to_nearest(self):
        ds = Dataset(("a",), [[0], [1], [3], [4]], [3, 3, 6, 6])
        model = train_knn(ds, 2)
        self.assertEqual(model.predict([1.8]), ClassLabel.UDP_FLOOD)
        model = train_knn(Dataset(("a",), [[0], [2]], [6, 3]), 2)
        self.assertEqual(model.predict([0.5]), ClassLabel.SLOWPOST)

    def test_linear_scan_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            n = int(rng.integers(1, 201))
            d = int(rng.integers(1, 7))
            values = rng.integers(0, 6, (n, d)).astype(float)
            schema = tuple(f"a{i}" for i in range(d))
            ds = Dataset(schema, values, rng.integers(0, 8, n))
            queries = rng.integers(-1, 7, (3, d)).astype(float)
            for k in (1, 3, 5):
                if k > n:
                    continue
                model = train_knn(ds, k)
                for query in queries:
                    self.assertEqual(model.predict(query), knn_oracle(ds, query, k))

    def test_bad_k(self):
        with self.assertRaises(ModelError):
            train_knn(one_dimensional(), 5)
        with self.assertRaises(ModelError):
            train_knn(one_dimensional(), 0)


class TreeTest(unittest.TestCase):
    def test_pure(self):
        model = train_tree(Dataset(("a",), [[1], [5], [9]], [2, 2, 2]))
        self.assertEqual(model.node_count, 1)
        self.assertEqual(model.predict([100]), ClassLabel.TCP_SYN)

    def test_single_split(self):
        model = train_tree(one_dimensional(), min_leaf=1)
        self.assertEqual(model.node_count, 3)
        self.assertEqual(model.attribute[0], 0)
        self.assertEqual(model.threshold[0], 5.0)
        np.testing.assert_array_equal(model.predict_distribution([3])[:2], [1, 0])
        self.assertEqual(model.predict([5]), NORMAL)
        self.assertEqual(model.predict([5.5]), ECHO)

    def test_xor(self):
        ds = Dataset(("x", "y"), [[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0])
        model = train_tree(ds, min_leaf=1)
        self.assertEqual(model.depth, 2)
        self.assertEqual(int((model.attribute == LEAF).sum()), 4)
        for values, label in ds.records:
            self.assertEqual(model.predict(values), label)

    def test_min_leaf_stops_growth(self):
        model = train_tree(one_dimensional(), min_leaf=3)
        self.assertEqual(model.node_count, 1)
        self.assertEqual(model.predict([9]), NORMAL)

    def test_leaf_counts_match_support(self):
        ds = random_dataset(4)
        model = train_tree(ds)
        self.assertEqual(int(model.counts[0].sum()), len(ds))
        leaves = model.attribute == LEAF
        self.assertEqual(int(model.counts[leaves].sum()), len(ds))

    def test_bad_min_leaf(self):
        with self.assertRaises(ModelError):
            train_tree(one_dimensional(), min_leaf=0)


class RulesTest(unittest.TestCase):
    def test_single_class(self):
        model = train_rules(Dataset(("a",), [[1], [2]], [7, 7]))
        self.assertEqual(model.rules, ())
        self.assertEqual(model.default, ClassLabel.BRUTE_FORCE)
        self.assertEqual(model.predict([50]), ClassLabel.BRUTE_FORCE)

    def test_one_dimensional(self):
        model = train_rules(one_dimensional())
        self.assertEqual(
            model.describe(), ["a <= 5 -> Normal", "otherwise -> IcmpEcho"]
        )
        for values, label in one_dimensional().records:
            self.assertEqual(model.predict(values), label)

    def test_indicator_distribution(self):
        model = train_rules(one_dimensional())
        np.testing.assert_array_equal(model.predict_distribution([9])[:3], [0, 1, 0])

    def test_min_coverage_keeps_an_impure_rule(self):
        ds = Dataset(("a",), [[1], [2], [3], [4]], [0, 1, 0, 1])
        self.assertEqual(
            train_rules(ds, min_coverage=2).describe(),
            ["a <= 3.5 -> Normal", "otherwise -> IcmpEcho"],
        )
        model = train_rules(ds, min_coverage=1)
        np.testing.assert_array_equal(model.predict_all(ds.values), ds.labels)


class TrainingAccuracyTest(unittest.TestCase):
    def test_consistent_data_fits_exactly(self):
        for seed in range(10):
            ds = random_dataset(seed, n=50)
            for model in (train_tree(ds, min_leaf=1), train_rules(ds, min_coverage=1)):
                predicted = model.predict_all(ds.values)
                np.testing.assert_array_equal(predicted, ds.labels)


class BaggingTest(unittest.TestCase):
    def test_identity_sampler(self):
        ds = random_dataset(5)
        base = ClassifierSpec(ClassifierKind.TREE, min_leaf=2)
        single = train_tree(ds, 2)
        ensemble = train_bagging(
            ds, base, iterations=1, sampler=lambda rng, n: np.arange(n)
        )
        queries = np.random.default_rng(6).random((100, 3))
        np.testing.assert_array_equal(
            ensemble.predict_all(queries), single.predict_all(queries)
        )

    def test_deterministic(self):
        ds = random_dataset(7)
        first = train_bagging(ds, iterations=4, seed=3)
        second = train_bagging(ds, iterations=4, seed=3)
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_workers_do_not_change_members(self):
        ds = random_dataset(8)
        sequential = train_bagging(ds, iterations=4, seed=9)
        threaded = train_bagging(ds, iterations=4, seed=9, workers=3)
        self.assertEqual(sequential.to_dict(), threaded.to_dict())

    def test_vote_fractions(self):
        echo = train_tree(Dataset(("a",), [[1], [2]], [1, 1]))
        normal = train_tree(Dataset(("a",), [[1], [2]], [0, 0]))
        model = BaggingModel(
            ("a",), (NORMAL, ECHO), "j48:2", True, (echo,) * 7 + (normal,) * 3
        )
        np.testing.assert_allclose(model.predict_distribution([1])[:2], [0.3, 0.7])
        self.assertEqual(model.predict([1]), ECHO)

    def test_vote_tie_goes_to_lower_index(self):
        slowpost = train_tree(Dataset(("a",), [[1]], [6]))
        syn = train_tree(Dataset(("a",), [[1]], [2]))
        model = BaggingModel(("a",), (), "j48:2", True, (slowpost, syn))
        self.assertEqual(model.predict([0]), ClassLabel.TCP_SYN)

    def test_pasting_uses_half_without_repeats(self):
        ds = random_dataset(10, n=40)
        base = ClassifierSpec(ClassifierKind.IBK)
        model = train_bagging(ds, base, 3, replacement=False)
        for member in model.members:
            self.assertEqual(member.points.shape[0], 20)
            self.assertEqual(len(np.unique(member.points, axis=0)), 20)

    def test_no_members(self):
        with self.assertRaises(ModelError):
            BaggingModel(("a",), (), "j48:2", True, ())


class PredictTest(unittest.TestCase):
    def test_distributions_are_probabilities(self):
        ds = random_dataset(11)
        queries = np.random.default_rng(12).random((20, 3))
        for spec in ALL_SPECS:
            model = train(ds, spec)
            for query in queries:
                distribution = model.predict_distribution(query)
                self.assertEqual(distribution.shape, (8,))
                self.assertTrue(np.all(distribution >= 0), spec)
                self.assertAlmostEqual(distribution.sum(), 1.0, delta=1e-9)
                if model.kind == ClassifierKind.IBK:
                    continue
                self.assertEqual(
                    model.predict(query).index, int(np.argmax(distribution)), spec
                )

    def test_schema_mismatch(self):
        model = train(random_dataset(13), "bayes")
        with self.assertRaises(SchemaMismatchError):
            model.predict([1, 2])
        with self.assertRaises(ModelError):
            model.predict([1, float("nan"), 2])

    def test_training_is_deterministic(self):
        ds = random_dataset(14)
        for spec in ALL_SPECS:
            first, second = train(ds, spec, seed=2), train(ds, spec, seed=2)
            self.assertEqual(first.to_dict(), second.to_dict(), spec)
