"""Tests feature computation, standardization and pre-match aggregation."""

import io
import unittest
from dataclasses import replace

import numpy as np

from ttpredict.datamodel.features import (
    FEATURE_NAMES,
    FeatureMode,
    FeatureSet,
    Standardizer,
    aggregate_features,
    balance,
    build_samples,
    compute_raw_features,
    feature_matrix,
    feature_names,
    rank_diff,
    standardize_apply,
    standardize_fit,
)
from ttpredict.errors import DomainError, InsufficientHistoryError
from ttpredict.ingest.ingest_synth import SynthConfig, synth_generate
from ttpredict.io.writer import samples_to_file
from tests.builders import A, B, BH, FH, best_of_seven, point, scripted_match, scripted_rally


def _six_rallies():
    return scripted_match(
        "S6",
        [
            point(A, A, stroke=FH),
            point(A, B, stroke=FH),
            point(B, B, long=True, stroke=FH),
            point(B, A, long=True, stroke=BH),
            point(A, A, stroke=FH),
            scripted_rally(A, 1),
        ],
        winner=A,
        ranks=(2, 7),
    )


class TestFeatureFixtures(unittest.TestCase):
    def test_rank_diff(self):
        self.assertEqual(-5, rank_diff(2, 7))
        self.assertEqual(0, rank_diff(150, 155))
        self.assertEqual(-55, rank_diff(100, 155))
        for a, b in [(3, 40), (99, 101), (250, 12)]:
            self.assertEqual(rank_diff(a, b), -rank_diff(b, a))

    def test_balance(self):
        self.assertAlmostEqual(0.0, balance(0, 0, 0))
        self.assertAlmostEqual(0.2, balance(0.1, -0.2, 0.3))
        self.assertAlmostEqual(1.0, balance(-1, -1, -1))

    def test_long_rally_share(self):
        rallies = [point(A, A, long=True, stroke=FH) for _ in range(47)]
        rallies += [point(A, A, stroke=FH) for _ in range(21)]
        rallies += [point(B, B) for _ in range(30)]
        features = compute_raw_features(scripted_match("F3", rallies, winner=A), A)
        self.assertAlmostEqual(47 / 68, features.lrp)
        self.assertAlmostEqual(21 / 68, features.srp)
        self.assertAlmostEqual(1.0, features.lrp + features.srp)

    def test_wins_everything(self):
        rallies = [point(A, A), point(B, A), point(A, A), point(B, A)]
        features = compute_raw_features(scripted_match("W", rallies), A)
        self.assertEqual((1.0, 1.0, 0.0), (features.sp, features.rp, features.sa))

    def test_scripted_match(self):
        match = _six_rallies()
        a = compute_raw_features(match, A)
        self.assertEqual((0.5, 0.5), (a.sp, a.rp))
        self.assertAlmostEqual(1 / 3, a.lrp)
        self.assertAlmostEqual(2 / 3, a.srp)
        self.assertAlmostEqual(2 / 3, a.fhp)
        self.assertAlmostEqual(1 / 3, a.bhp)
        self.assertEqual((2.0, -5.0), (a.rank, a.rankdiff))
        self.assertAlmostEqual(a.srp - a.lrp, a.sra)
        self.assertAlmostEqual(a.fhp - a.bhp, a.fha)
        self.assertAlmostEqual((abs(a.sa) + abs(a.sra) + abs(a.fha)) / 3, a.balance)
        b = compute_raw_features(match, B)
        self.assertEqual((0.5, 0.5), (b.sp, b.rp))
        self.assertAlmostEqual(1 / 3, b.lrp)
        self.assertAlmostEqual(2 / 3, b.srp)
        self.assertEqual(5.0, b.rankdiff)
        # one of the three rallies B won is a service fault without stroke
        self.assertEqual((0.5, 0.5), (b.fhp, b.bhp))
        lenient = compute_raw_features(match, B, missing_stroke_threshold=0.5)
        self.assertEqual((1.0, 0.0), (lenient.fhp, lenient.bhp))

    def test_no_rallies(self):
        with self.assertRaises(DomainError):
            compute_raw_features(scripted_match("E", [], winner=A), A)

    def test_no_points_won(self):
        features = compute_raw_features(scripted_match("Z", [point(A, A), point(B, A)]), B)
        self.assertEqual((0.5, 0.5, 0.5, 0.5), (features.lrp, features.srp, features.fhp, features.bhp))
        self.assertEqual((0.0, 0.0), (features.sp, features.rp))


class TestStandardizer(unittest.TestCase):
    def test_two_points(self):
        standardizer = standardize_fit([[1.0], [3.0]])
        self.assertEqual([2.0], standardizer.means.tolist())
        self.assertEqual([1.0], standardizer.stds.tolist())
        self.assertEqual([1.0], standardize_apply(standardizer, [3.0]).tolist())

    def test_constant_column(self):
        matrix = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        out = standardize_apply(standardize_fit(matrix), matrix)
        self.assertEqual([0.0, 0.0, 0.0], out[:, 1].tolist())

    def test_moments(self):
        matrix = np.random.default_rng(0).normal(3.0, 2.0, (50, 12))
        out = standardize_apply(standardize_fit(matrix), matrix)
        self.assertTrue(np.all(np.abs(out.mean(axis=0)) < 1e-9))
        self.assertTrue(np.all(np.abs(out.std(axis=0) - 1) < 1e-9))

    def test_dimension_mismatch(self):
        with self.assertRaises(DomainError):
            standardize_apply(standardize_fit([[1.0, 2.0], [2.0, 3.0]]), [1.0])

    def test_round_trip(self):
        standardizer = standardize_fit([[1.0, 2.0], [2.0, 7.0]])
        copy = Standardizer.from_dict(standardizer.to_dict())
        self.assertEqual(standardizer.means.tolist(), copy.means.tolist())
        self.assertEqual(standardizer.stds.tolist(), copy.stds.tolist())


def _serving(match_id: str, players, won: int, served: int = 5):
    rallies = [point(A, A) for _ in range(won)] + [point(A, B) for _ in range(served - won)]
    return scripted_match(match_id, rallies, players=players, ranks=(10, 20))


class TestAggregate(unittest.TestCase):
    def setUp(self) -> None:
        self.matches = synth_generate(SynthConfig(n_players=3, n_matches=30, seed=3))

    def test_mean_of_one(self):
        target = _serving("T", ("P1", "P2"), 3)
        other = _serving("O", ("P1", "P3"), 2)
        aggregated = aggregate_features("P1", [target, other], "T")
        own = compute_raw_features(other, A)
        self.assertAlmostEqual(own.sp, aggregated.sp)
        self.assertAlmostEqual(own.balance, aggregated.balance)

    def test_mean_of_two(self):
        matches = [
            _serving("T", ("P1", "P4"), 5),
            _serving("X", ("P1", "P2"), 2),
            _serving("Y", ("P1", "P3"), 3),
        ]
        self.assertAlmostEqual(0.5, aggregate_features("P1", matches, "T").sp)

    def test_rankdiff_from_target(self):
        target = best_of_seven("T", A, players=("P1", "P2"), ranks=(3, 9))
        other = best_of_seven("O", A, players=("P1", "P3"), ranks=(3, 50))
        self.assertEqual(-6.0, aggregate_features("P1", [target, other], "T").rankdiff)

    def test_brute_force_mean(self):
        history = [m for m in self.matches if m.side_of("P1") is not None]
        self.assertGreaterEqual(len(history), 5)
        target = history[0]
        aggregated = aggregate_features("P1", self.matches, target.match_id)
        expected = np.mean(
            [compute_raw_features(m, m.side_of("P1")).as_vector() for m in history[1:]], axis=0
        )
        got = aggregated.as_vector()
        rankdiff = FEATURE_NAMES.index("rankdiff")
        mask = np.arange(len(FEATURE_NAMES)) != rankdiff
        self.assertTrue(np.allclose(expected[mask], got[mask], atol=1e-12))

    def test_target_rallies_are_not_read(self):
        target = self.matches[0]
        before = aggregate_features(target.player_a_id, self.matches, target.match_id)
        mutated = replace(target, rallies=target.rallies[:3])
        matches = [mutated] + self.matches[1:]
        after = aggregate_features(target.player_a_id, matches, target.match_id)
        self.assertEqual(before, after)

    def test_insufficient_history(self):
        lone = _serving("L", ("P8", "P9"), 3)
        with self.assertRaises(InsufficientHistoryError):
            aggregate_features("P8", [lone], "L")

    def test_build_samples_drops_novices(self):
        lone = _serving("L", ("P8", "P9"), 3)
        samples = build_samples(self.matches + [lone], FeatureMode.aggregate)
        self.assertNotIn("L", {sample.match_id for sample in samples})
        self.assertEqual(2 * len(self.matches), len(samples))
        with self.assertRaises(InsufficientHistoryError):
            build_samples([lone], FeatureMode.aggregate)


class TestSamples(unittest.TestCase):
    def setUp(self) -> None:
        self.matches = synth_generate(SynthConfig(n_players=6, n_matches=20, seed=11))

    def test_label_symmetry(self):
        samples = build_samples(self.matches)
        self.assertEqual(2 * len(self.matches), len(samples))
        for a, b in zip(samples[::2], samples[1::2]):
            self.assertEqual(a.match_id, b.match_id)
            self.assertEqual(0, a.label + b.label)
            self.assertEqual(0, a.raw.rankdiff + b.raw.rankdiff)
            winner = a if a.label == 1 else b
            match = next(m for m in self.matches if m.match_id == a.match_id)
            self.assertEqual(match.winner, winner.perspective)

    def test_ranges(self):
        for sample in build_samples(self.matches):
            raw = sample.raw
            for value in (raw.sp, raw.rp, raw.lrp, raw.srp, raw.fhp, raw.bhp, raw.balance):
                self.assertTrue(0.0 <= value <= 1.0)
            for value in (raw.sa, raw.sra, raw.fha):
                self.assertTrue(-1.0 <= value <= 1.0)
            self.assertAlmostEqual(1.0, raw.lrp + raw.srp)

    def test_feature_sets(self):
        self.assertEqual(12, len(feature_names(FeatureSet.full)))
        self.assertEqual(
            ["sp", "rp", "lrp", "srp", "fhp", "bhp", "rank"],
            feature_names(FeatureSet.without_derived),
        )
        x, y = feature_matrix(build_samples(self.matches, feature_set=FeatureSet.without_derived))
        self.assertEqual((2 * len(self.matches), 7), x.shape)
        self.assertEqual(0, int(y.sum()))

    def test_export(self):
        buffer = io.StringIO()
        samples_to_file(build_samples(self.matches[:2]), buffer)
        lines = buffer.getvalue().splitlines()
        self.assertEqual(
            "match_id,perspective,label,sp,rp,lrp,srp,fhp,bhp,rank,rankdiff,sa,sra,fha,balance",
            lines[0],
        )
        self.assertEqual(5, len(lines))
        self.assertTrue(lines[1].startswith(f"{self.matches[0].match_id},a,"))
