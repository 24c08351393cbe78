"""Classes for rally-level singles match records and their point semantics."""

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from ttpredict.errors import DomainError

__all__ = [
    "BounceKind",
    "Side",
    "Stroke",
    "RallyLength",
    "BounceEvent",
    "Rally",
    "MatchRecord",
    "ZoneIndex",
    "Verdict",
    "PlayerSummary",
    "LONG_RALLY_SHOTS",
    "rally_winner",
    "rally_shot_count",
    "classify_rally",
    "zone_of",
    "winning_stroke",
    "winning_zone",
    "zone_histogram",
    "match_summary",
    "validate_match",
]

MATCH_ID = str
PLAYER_ID = str

LONG_RALLY_SHOTS = 5
"""A rally of at least this many shots is long."""


class BounceKind(Enum):
    """What a recorded ball bounce represents within its rally."""

    serve = "serve"
    """The bounce of the service that opens a rally."""

    play = "play"
    """Any bounce between the service and the error."""

    error = "error"
    """The shot that ends the rally (net, out or missed)."""


class Side(Enum):
    """A table half, identified with the player who stands behind it."""

    a = "a"
    b = "b"

    @property
    def other(self) -> "Side":
        return Side.b if self is Side.a else Side.a


class Stroke(Enum):
    """Stroke of the shot that produced a bounce."""

    forehand = "fh"
    backhand = "bh"


class RallyLength(Enum):
    """Classification of a rally by its number of shots."""

    short = "short"
    long = "long"


@dataclass(frozen=True)
class BounceEvent:
    """
    One recorded ball bounce.

    Each bounce stands for one shot. Its side is the half of the player who played that shot. The
    final error bounce marks the side the rally terminated toward, the half of the player whose
    shot failed.
    """

    kind: BounceKind
    side: Side
    x: float
    """Position along the table width, in [0, 1]."""

    y: float
    """Position along the depth of one table half, in [0, 1]."""

    stroke: Optional[Stroke] = None

    def validate(self) -> List[str]:
        """
        Validate coordinates.

        :return: list of validation errors
        """
        messages = []
        for name, value in (("x", self.x), ("y", self.y)):
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                messages.append(f"{name}={value} is not a finite coordinate in [0, 1]")
        return messages


@dataclass(frozen=True)
class Rally:
    """A point-scoring exchange from service to the error ending it."""

    set_number: int
    server: Side
    bounces: Tuple[BounceEvent, ...]

    def validate(self) -> List[str]:
        """
        Validate the rally.

        A rally must start with a serve and end with an error, with play bounces in between.
        A single bounce rally is a service fault, recorded as a lone error bounce.

        :return: list of validation errors
        """
        messages = []
        if self.set_number < 1:
            messages.append(f"set number {self.set_number} is not positive")
        if not self.bounces:
            messages.append("rally has no bounces")
            return messages
        last = len(self.bounces) - 1
        for position, bounce in enumerate(self.bounces):
            messages += bounce.validate()
            if position == last:
                expected = BounceKind.error
            elif position == 0:
                expected = BounceKind.serve
            else:
                expected = BounceKind.play
            if bounce.kind != expected:
                messages.append(
                    f"bounce {position} has kind {bounce.kind.value}, expected {expected.value}"
                )
        return messages


@dataclass(frozen=True)
class MatchRecord:
    """
    One singles match.

    Ranks are ITTF ranks at the time of the match and may be missing in raw data;
    :func:`validate_match` drops such matches.

    A record is complete when its rallies cover every point played. Feeds that lost rallies
    mark the record incomplete, and only complete records are checked against their winner.
    """

    match_id: MATCH_ID
    player_a_id: PLAYER_ID
    player_b_id: PLAYER_ID
    rank_a: Optional[int]
    rank_b: Optional[int]
    rallies: Tuple[Rally, ...]
    winner: Side
    complete: bool = True

    def player_id(self, side: Side) -> PLAYER_ID:
        return self.player_a_id if side is Side.a else self.player_b_id

    def rank(self, side: Side) -> Optional[int]:
        return self.rank_a if side is Side.a else self.rank_b

    def side_of(self, player_id: PLAYER_ID) -> Optional[Side]:
        """
        Side the player occupies in this match.

        :param player_id:
        :return: the side, or None if the player did not take part
        """
        if player_id == self.player_a_id:
            return Side.a
        if player_id == self.player_b_id:
            return Side.b
        return None

    def validate(self) -> List[str]:
        """
        Validate player identity and ranks. Rallies are validated separately, see
        :meth:`rally_errors`.

        :return: list of validation errors
        """
        messages = []
        if not self.player_a_id or not self.player_b_id:
            messages.append("player ids must be non-empty")
        elif self.player_a_id == self.player_b_id:
            messages.append(f"player ids must be distinct, both are {self.player_a_id}")
        for side in Side:
            rank = self.rank(side)
            if rank is not None and rank < 1:
                messages.append(f"rank of player {side.value} is {rank}, expected >= 1")
        return messages

    def rally_errors(self) -> List[Tuple[int, str]]:
        """
        Validation errors of all rallies, paired with the rally index.

        :return: list of (rally index, message)
        """
        return [
            (index, message)
            for index, rally in enumerate(self.rallies)
            for message in rally.validate()
        ]


@dataclass(frozen=True)
class ZoneIndex:
    """Row-major cell of a 3x3 grid over one table half, numbered 1 to 9."""

    value: int

    def __post_init__(self):
        if not 1 <= self.value <= 9:
            raise DomainError(f"zone {self.value} is not in [1, 9]")

    @property
    def row(self) -> int:
        return (self.value - 1) // 3

    @property
    def col(self) -> int:
        return (self.value - 1) % 3


@dataclass(frozen=True)
class Verdict:
    """Outcome of :func:`validate_match`: keep the match, or drop it for a reason."""

    reason: Optional[str] = None

    @property
    def keep(self) -> bool:
        return self.reason is None

    @classmethod
    def drop(cls, reason: str) -> "Verdict":
        return cls(reason=reason)


@dataclass
class PlayerSummary:
    """Point counts for one player in one match."""

    served: int = 0
    won_on_serve: int = 0
    received: int = 0
    won_on_receive: int = 0
    won_short: int = 0
    won_long: int = 0
    won_forehand: int = 0
    won_backhand: int = 0
    won_unannotated: int = 0
    zones: List[int] = field(default_factory=lambda: [0] * 9)

    @property
    def won(self) -> int:
        return self.won_on_serve + self.won_on_receive


def rally_winner(rally: Rally) -> Side:
    """
    Side that won the rally.

    If the serve and the error were made on opposite sides the server won the point,
    otherwise the receiver did.

    :param rally:
    :return: the winning side
    """
    if rally.bounces[0].side != rally.bounces[-1].side:
        return rally.server
    return rally.server.other


def rally_shot_count(rally: Rally) -> int:
    """Number of shots in a rally; one shot per bounce, serve and error included."""
    return len(rally.bounces)


def classify_rally(rally: Rally) -> RallyLength:
    if rally_shot_count(rally) >= LONG_RALLY_SHOTS:
        return RallyLength.long
    return RallyLength.short


def zone_of(bounce: BounceEvent) -> ZoneIndex:
    """
    Grid cell a bounce landed in.

    The upper edge 1.0 of either coordinate belongs to the last cell.

    :param bounce:
    :return: zone in 1..9
    """
    messages = bounce.validate()
    if messages:
        raise DomainError("; ".join(messages))
    row = min(math.floor(3 * bounce.y), 2)
    col = min(math.floor(3 * bounce.x), 2)
    return ZoneIndex(3 * row + col + 1)


def _last_successful(rally: Rally) -> Optional[BounceEvent]:
    for bounce in reversed(rally.bounces):
        if bounce.kind != BounceKind.error:
            return bounce
    return None


def winning_stroke(rally: Rally) -> Optional[Stroke]:
    """
    Stroke of the winning shot, the last bounce that is not the error.

    :param rally:
    :return: the stroke, or None for an unannotated shot or a lone service fault
    """
    bounce = _last_successful(rally)
    return None if bounce is None else bounce.stroke


def winning_zone(rally: Rally) -> Optional[ZoneIndex]:
    """Zone of the last bounce of the winning ball, None for a lone service fault."""
    bounce = _last_successful(rally)
    return None if bounce is None else zone_of(bounce)


def match_summary(match: MatchRecord) -> Dict[Side, PlayerSummary]:
    """
    Count the points each player won by serve/receive, rally length, stroke and zone.

    :param match:
    :return: summary per side
    """
    summaries = {side: PlayerSummary() for side in Side}
    for rally in match.rallies:
        winner = rally_winner(rally)
        server = summaries[rally.server]
        receiver = summaries[rally.server.other]
        server.served += 1
        receiver.received += 1
        if winner is rally.server:
            server.won_on_serve += 1
        else:
            receiver.won_on_receive += 1
        summary = summaries[winner]
        if classify_rally(rally) is RallyLength.long:
            summary.won_long += 1
        else:
            summary.won_short += 1
        stroke = winning_stroke(rally)
        if stroke is Stroke.forehand:
            summary.won_forehand += 1
        elif stroke is Stroke.backhand:
            summary.won_backhand += 1
        else:
            summary.won_unannotated += 1
        zone = winning_zone(rally)
        if zone is not None:
            summary.zones[zone.value - 1] += 1
    return summaries


def zone_histogram(match: MatchRecord, side: Side) -> List[int]:
    """
    Where the winning balls of one player landed, as counts per zone 1..9.

    :param match:
    :param side: the player
    :return: nine counts
    """
    return list(match_summary(match)[side].zones)


def _derived_winner(match: MatchRecord) -> Optional[Side]:
    """Winner implied by the rallies: sets won, falling back to total points."""
    points: Dict[int, Counter] = {}
    for rally in match.rallies:
        points.setdefault(rally.set_number, Counter())[rally_winner(rally)] += 1
    sets = Counter()
    for counter in points.values():
        if counter[Side.a] != counter[Side.b]:
            sets[Side.a if counter[Side.a] > counter[Side.b] else Side.b] += 1
    if sets[Side.a] != sets[Side.b]:
        return Side.a if sets[Side.a] > sets[Side.b] else Side.b
    totals = Counter(rally_winner(rally) for rally in match.rallies)
    if totals[Side.a] != totals[Side.b]:
        return Side.a if totals[Side.a] > totals[Side.b] else Side.b
    return None


def validate_match(match: MatchRecord) -> Verdict:
    """
    Decide whether a match can be used for training.

    Checks, in order: both ranks present, player identity, at least one rally, every rally
    well-formed, and, for a complete record, the declared winner agreeing with the winner derived
    from the rallies.

    :param match:
    :return: keep, or drop naming the first failing check
    """
    if match.rank_a is None or match.rank_b is None:
        return Verdict.drop("missing rank")
    if match.validate():
        return Verdict.drop("invalid players")
    if not match.rallies:
        return Verdict.drop("no rallies")
    if match.rally_errors():
        return Verdict.drop("invalid rally")
    if not match.complete:
        return Verdict()
    derived = _derived_winner(match)
    if derived is not None and derived is not match.winner:
        return Verdict.drop("winner mismatch")
    return Verdict()
