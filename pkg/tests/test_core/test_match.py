"""Tests the rally semantics and the match file format."""

import io
import json
import unittest
from dataclasses import replace

import numpy as np

from ttpredict.datamodel.match import (
    BounceEvent,
    BounceKind,
    MatchRecord,
    Rally,
    RallyLength,
    Side,
    Stroke,
    classify_rally,
    match_summary,
    rally_shot_count,
    rally_winner,
    validate_match,
    winning_stroke,
    zone_histogram,
    zone_of,
)
from ttpredict.errors import DomainError, MatchParseError, MatchValidationError
from ttpredict.io.parser import load_matches, parse_matches
from ttpredict.io.writer import matches_to_file
from tests import INPUT_DIR
from tests.builders import A, B, BH, FH, best_of_seven, point, scripted_match, scripted_rally

MATCH_FILE = INPUT_DIR / "matches.json"


def _rally_with_sides(server: Side, sides: str):
    rally = scripted_rally(server, len(sides))
    bounces = tuple(
        BounceEvent(bounce.kind, Side(side), bounce.x, bounce.y)
        for bounce, side in zip(rally.bounces, sides)
    )
    return Rally(rally.set_number, server, bounces)


class TestRallySemantics(unittest.TestCase):
    def test_rally_winner(self):
        self.assertEqual(B, rally_winner(_rally_with_sides(A, "aba")))
        self.assertEqual(A, rally_winner(_rally_with_sides(A, "ab")))
        self.assertEqual(A, rally_winner(_rally_with_sides(B, "bb")))

    def test_rally_winner_is_pure(self):
        rally = scripted_rally(B, 7)
        self.assertEqual({rally_winner(rally) for _ in range(20)}, {A})

    def test_rally_length(self):
        self.assertEqual(5, rally_shot_count(scripted_rally(A, 5)))
        self.assertEqual(RallyLength.long, classify_rally(scripted_rally(A, 5)))
        self.assertEqual(4, rally_shot_count(scripted_rally(A, 4)))
        self.assertEqual(RallyLength.short, classify_rally(scripted_rally(A, 4)))
        self.assertEqual(RallyLength.short, classify_rally(scripted_rally(A, 1)))
        for shots in range(1, 11):
            expected = RallyLength.long if shots >= 5 else RallyLength.short
            self.assertEqual(expected, classify_rally(scripted_rally(A, shots)))

    def test_service_fault(self):
        fault = scripted_rally(A, 1)
        self.assertEqual([BounceKind.error], [b.kind for b in fault.bounces])
        self.assertEqual([], fault.validate())
        self.assertEqual(B, rally_winner(fault))
        self.assertIsNone(winning_stroke(fault))

    def test_winning_stroke(self):
        bounces = (
            BounceEvent(BounceKind.serve, A, 0.5, 0.5, FH),
            BounceEvent(BounceKind.play, B, 0.5, 0.5, BH),
            BounceEvent(BounceKind.error, A, 0.5, 0.5, FH),
        )
        self.assertEqual(BH, winning_stroke(Rally(1, A, bounces)))
        serve_winner = (
            BounceEvent(BounceKind.serve, A, 0.5, 0.5, FH),
            BounceEvent(BounceKind.error, B, 0.5, 0.5),
        )
        self.assertEqual(FH, winning_stroke(Rally(1, A, serve_winner)))
        self.assertIsNone(winning_stroke(scripted_rally(A, 4, None)))

    def test_zone_of(self):
        self.assertEqual(1, zone_of(BounceEvent(BounceKind.play, A, 0.0, 0.0)).value)
        self.assertEqual(9, zone_of(BounceEvent(BounceKind.play, A, 1.0, 1.0)).value)
        self.assertEqual(5, zone_of(BounceEvent(BounceKind.play, A, 0.5, 0.34)).value)
        centers = [1 / 6, 1 / 2, 5 / 6]
        for row, y in enumerate(centers):
            for col, x in enumerate(centers):
                zone = zone_of(BounceEvent(BounceKind.play, A, x, y))
                self.assertEqual((row, col), (zone.row, zone.col))
        with self.assertRaises(DomainError):
            zone_of(BounceEvent(BounceKind.play, A, 1.01, 0.5))
        with self.assertRaises(DomainError):
            zone_of(BounceEvent(BounceKind.play, A, float("nan"), 0.5))

    def test_zones_are_uniform(self):
        rng = np.random.default_rng(7)
        counts = np.zeros(9)
        for x, y in rng.random((10_000, 2)):
            counts[zone_of(BounceEvent(BounceKind.play, A, float(x), float(y))).value - 1] += 1
        self.assertEqual(10_000, counts.sum())
        expected = 10_000 / 9
        sigma = np.sqrt(10_000 * (1 / 9) * (8 / 9))
        self.assertTrue(np.all(np.abs(counts - expected) < 5 * sigma), counts)

    def test_zone_histogram(self):
        match = scripted_match("M", [point(A, A), point(A, B), point(B, A, long=True)])
        self.assertEqual([0, 0, 0, 0, 2, 0, 0, 0, 0], zone_histogram(match, A))
        self.assertEqual(1, sum(zone_histogram(match, B)))

    def test_match_summary(self):
        match = scripted_match(
            "M", [point(A, A, stroke=FH), point(A, B, long=True), point(B, B, stroke=BH)]
        )
        summary = match_summary(match)
        self.assertEqual(2, summary[A].served)
        self.assertEqual(1, summary[A].won_on_serve)
        self.assertEqual(1, summary[B].won_on_receive)
        self.assertEqual(1, summary[B].won_long)
        self.assertEqual(1, summary[B].won_backhand)
        self.assertEqual(1, summary[B].won_unannotated)
        self.assertEqual(1, summary[A].won_forehand)


class TestValidateMatch(unittest.TestCase):
    def test_keep(self):
        self.assertTrue(validate_match(best_of_seven("M", A)).keep)

    def test_missing_rank(self):
        match = best_of_seven("M", A, ranks=(1, 2))
        match = MatchRecord(match.match_id, "P1", "P2", None, 2, match.rallies, A)
        self.assertEqual("missing rank", validate_match(match).reason)

    def test_winner_mismatch(self):
        match = best_of_seven("M", A)
        flipped = MatchRecord(match.match_id, "P1", "P2", 1, 2, match.rallies, B)
        self.assertEqual("winner mismatch", validate_match(flipped).reason)

    def test_incomplete_record_skips_winner_check(self):
        match = best_of_seven("M", A)
        partial = replace(match, rallies=match.rallies[::2], winner=B, complete=False)
        self.assertTrue(validate_match(partial).keep)
        self.assertEqual("winner mismatch", validate_match(replace(partial, complete=True)).reason)

    def test_sets_decide_over_points(self):
        # B wins three close sets, A wins one set heavily: A has more points, B more sets
        rallies = [point(A, A, set_number=1) for _ in range(11)]
        for set_number in (2, 3, 4):
            rallies += [point(A, B, set_number=set_number) for _ in range(11)]
            rallies += [point(A, A, set_number=set_number) for _ in range(9)]
        match = scripted_match("M", rallies, winner=B)
        self.assertTrue(validate_match(match).keep)

    def test_invalid_players(self):
        match = best_of_seven("M", A, players=("P1", "P1"))
        self.assertEqual("invalid players", validate_match(match).reason)


class TestMatchFile(unittest.TestCase):
    def test_empty(self):
        self.assertEqual([], parse_matches("[]"))

    def test_load(self):
        matches = load_matches(MATCH_FILE)
        self.assertEqual(["M1", "M2", "M3"], [m.match_id for m in matches])
        first = matches[0]
        self.assertEqual(3, len(first.rallies))
        self.assertEqual(2, len(first.rallies[0].bounces))
        self.assertEqual(Stroke.backhand, first.rallies[1].bounces[1].stroke)
        self.assertIsNone(matches[1].rank_a)
        verdicts = [validate_match(match) for match in matches]
        self.assertEqual([None, "missing rank", "winner mismatch"], [v.reason for v in verdicts])

    def test_minimal_record(self):
        document = [
            {
                "match_id": "X",
                "players": {"a": {"id": "P1", "rank": 1}, "b": {"id": "P2", "rank": 2}},
                "winner": "b",
                "rallies": [
                    {
                        "set": 1,
                        "server": "a",
                        "bounces": [
                            {"kind": "serve", "side": "a", "x": 0.5, "y": 0.5, "stroke": "fh"},
                            {"kind": "play", "side": "b", "x": 0.5, "y": 0.5, "stroke": "bh"},
                            {"kind": "error", "side": "a", "x": 0.5, "y": 0.5, "stroke": None},
                        ],
                    }
                ],
            }
        ]
        matches = parse_matches(json.dumps(document).encode("utf-8"))
        self.assertEqual(1, len(matches))
        self.assertEqual(3, len(matches[0].rallies[0].bounces))

    def test_optional_keys(self):
        document = json.loads(MATCH_FILE.read_text())
        del document[0]["rallies"][0]["bounces"][0]["stroke"]
        document[2]["complete"] = False
        matches = parse_matches(json.dumps(document))
        self.assertIsNone(matches[0].rallies[0].bounces[0].stroke)
        self.assertTrue(matches[0].complete)
        self.assertFalse(matches[2].complete)
        self.assertTrue(validate_match(matches[2]).keep)
        buffer = io.StringIO()
        matches_to_file(matches, buffer)
        self.assertEqual(matches, parse_matches(buffer.getvalue()))
        self.assertEqual(1, buffer.getvalue().count("complete"))

    def test_complete_must_be_boolean(self):
        document = json.loads(MATCH_FILE.read_text())
        document[0]["complete"] = "no"
        with self.assertRaises(MatchParseError) as context:
            parse_matches(json.dumps(document))
        self.assertEqual(0, context.exception.record)

    def test_serve_out_of_place(self):
        document = json.loads(MATCH_FILE.read_text())
        document[0]["rallies"][2]["bounces"][2]["kind"] = "serve"
        with self.assertRaises(MatchValidationError) as context:
            parse_matches(json.dumps(document))
        self.assertEqual("M1", context.exception.match_id)
        self.assertEqual(2, context.exception.rally_index)

    def test_syntax_error_has_line(self):
        with self.assertRaises(MatchParseError) as context:
            parse_matches('[\n{"match_id": "M1",\n}\n]')
        self.assertEqual(3, context.exception.line)

    def test_missing_key_has_record(self):
        document = json.loads(MATCH_FILE.read_text())
        del document[2]["winner"]
        with self.assertRaises(MatchParseError) as context:
            parse_matches(json.dumps(document))
        self.assertEqual(2, context.exception.record)

    def test_bad_enum(self):
        document = json.loads(MATCH_FILE.read_text())
        document[0]["rallies"][0]["bounces"][0]["stroke"] = "lob"
        with self.assertRaises(MatchParseError):
            parse_matches(json.dumps(document))

    def test_round_trip(self):
        matches = load_matches(MATCH_FILE)
        buffer = io.StringIO()
        matches_to_file(matches, buffer)
        self.assertEqual(matches, parse_matches(buffer.getvalue()))
        generated = [best_of_seven("G", B, sets=[A, B, B, A, B, B])]
        buffer = io.StringIO()
        matches_to_file(generated, buffer)
        self.assertEqual(generated, parse_matches(buffer.getvalue()))
