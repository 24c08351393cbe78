"""Generates synthetic singles matches from a latent player skill model.

Players carry a latent skill, serve advantage, forehand bias and long-rally bias. Matches are
played point by point under ITTF scoring and every point is written out as a rally whose
bounces reproduce the point winner, rally length and winning stroke through the rally
semantics of :mod:`ttpredict.datamodel.match`.
"""

import logging
import math
from dataclasses import dataclass
from typing import Annotated, Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt

from ttpredict.datamodel.match import (
    LONG_RALLY_SHOTS,
    BounceEvent,
    BounceKind,
    MatchRecord,
    Rally,
    Side,
    Stroke,
)
from ttpredict.errors import DomainError
from ttpredict.rng import derive_seed, get_rng

__all__ = [
    "SynthConfig",
    "SynthPlayer",
    "BayesEstimate",
    "POINTS_TO_WIN_SET",
    "SETS_TO_WIN_MATCH",
    "synth_players",
    "synth_generate",
    "bayes_accuracy",
]

POINTS_TO_WIN_SET = 11
SETS_TO_WIN_MATCH = 4
MAX_RALLY_SHOTS = 12
BASE_LONG_RALLY_SHARE = 0.35
MIN_BAYES_SIMULATIONS = 1000

logger = logging.getLogger(__name__)

Spread = Annotated[float, Field(ge=0.0, allow_inf_nan=False)]
Probability = Annotated[float, Field(ge=0.0, le=1.0)]


class SynthConfig(BaseModel):
    """Parameters of the synthetic match generator."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_players: int = Field(default=40, ge=2)
    n_matches: int = Field(default=400, ge=1)
    skill_spread: Spread = 0.176
    """Standard deviation of latent skill, in logits of point-win probability."""

    serve_adv_spread: Spread = 0.05
    stroke_bias_spread: Spread = 0.5
    rally_len_bias_spread: Spread = 0.5
    noise: Spread = 0.0
    """Standard deviation of a per-match form swing added to the skill gap."""

    seed: NonNegativeInt = 0
    rank_offset: NonNegativeInt = 0
    """Added to every generated rank; above 99 all players count as unreliably ranked."""

    service_fault_rate: Probability = 0.05
    """Share of receiver-won points that are service faults."""

    missing_stroke_rate: Probability = 0.0
    """Share of shots left without a stroke annotation."""

    rally_capture_rate: Probability = 0.4
    """Share of rallies the event feed recorded; the winner still comes from every point."""


@dataclass(frozen=True)
class SynthPlayer:
    player_id: str
    skill: float
    serve_advantage: float
    forehand_bias: float
    long_rally_bias: float
    rank: int


@dataclass(frozen=True)
class BayesEstimate:
    """Monte-Carlo estimate of the best achievable prediction accuracy."""

    accuracy: float
    standard_error: float
    n_sim: int


def _logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def synth_players(cfg: SynthConfig) -> List[SynthPlayer]:
    """
    Draw the latent player population of a configuration.

    Ranks order the players by skill, the strongest first.

    :param cfg:
    :return: players in id order
    """
    rng = get_rng(cfg.seed)
    n = cfg.n_players
    skills = rng.normal(0.0, 1.0, n) * cfg.skill_spread
    serve = rng.normal(0.0, 1.0, n) * cfg.serve_adv_spread
    forehand = rng.normal(0.0, 1.0, n) * cfg.stroke_bias_spread
    long_rally = rng.normal(0.0, 1.0, n) * cfg.rally_len_bias_spread
    ranks = np.empty(n, dtype=int)
    ranks[np.argsort(-skills, kind="stable")] = np.arange(1, n + 1)
    width = len(str(n))
    return [
        SynthPlayer(
            player_id=f"P{index + 1:0{width}d}",
            skill=float(skills[index]),
            serve_advantage=float(serve[index]),
            forehand_bias=float(forehand[index]),
            long_rally_bias=float(long_rally[index]),
            rank=int(ranks[index]) + cfg.rank_offset,
        )
        for index in range(n)
    ]


def _server(first: Side, a_points: int, b_points: int) -> Side:
    """Service changes every two points, and every point from 10-10."""
    played = a_points + b_points
    deuce = 2 * (POINTS_TO_WIN_SET - 1)
    turns = played // 2 if played < deuce else deuce // 2 + (played - deuce)
    return first if turns % 2 == 0 else first.other


def _play_match(
    rng: np.random.Generator,
    point_probability: Callable[[Side], float],
    on_point: Optional[Callable[[int, Side, Side], None]] = None,
) -> Side:
    """
    Play a best of seven match point by point.

    :param rng:
    :param point_probability: chance that the server wins a point, given the serving side
    :param on_point: called with (set number, server, point winner) for every point
    :return: the match winner
    """
    first_server = Side.a if rng.random() < 0.5 else Side.b
    sets = {Side.a: 0, Side.b: 0}
    set_number = 0
    while max(sets.values()) < SETS_TO_WIN_MATCH:
        set_number += 1
        first = first_server if set_number % 2 == 1 else first_server.other
        points = {Side.a: 0, Side.b: 0}
        while not (
            max(points.values()) >= POINTS_TO_WIN_SET
            and abs(points[Side.a] - points[Side.b]) >= 2
        ):
            server = _server(first, points[Side.a], points[Side.b])
            winner = server if rng.random() < point_probability(server) else server.other
            points[winner] += 1
            if on_point is not None:
                on_point(set_number, server, winner)
        sets[Side.a if points[Side.a] > points[Side.b] else Side.b] += 1
    return Side.a if sets[Side.a] > sets[Side.b] else Side.b


def _point_model(
    players: Tuple[SynthPlayer, SynthPlayer], form: float
) -> Callable[[Side], float]:
    """Server's point-win probability: logistic of skill gap, serve advantage and form."""

    def probability(server: Side) -> float:
        s, r = (players[0], players[1]) if server is Side.a else (players[1], players[0])
        swing = form if server is Side.a else -form
        return _logistic(s.skill - r.skill + s.serve_advantage + swing)

    return probability


def _rally_length(rng: np.random.Generator, server_won: bool, long_rally: bool) -> int:
    # the player who plays the last shot loses; the server plays the even-numbered shots
    if long_rally:
        lengths = range(LONG_RALLY_SHOTS, MAX_RALLY_SHOTS + 1)
    else:
        lengths = range(2, LONG_RALLY_SHOTS)
    choices = [n for n in lengths if (n % 2 == 0) == server_won]
    return int(choices[rng.integers(len(choices))])


def _stroke(rng: np.random.Generator, forehand_probability: float, missing: float):
    if rng.random() < missing:
        return None
    return Stroke.forehand if rng.random() < forehand_probability else Stroke.backhand


def _emit_rally(
    rng: np.random.Generator,
    cfg: SynthConfig,
    players: Tuple[SynthPlayer, SynthPlayer],
    set_number: int,
    server: Side,
    winner: Side,
) -> Rally:
    server_won = winner is server
    if not server_won and rng.random() < cfg.service_fault_rate:
        fault = BounceEvent(BounceKind.error, server, *_coordinates(rng))
        return Rally(set_number, server, (fault,))
    player = players[0] if winner is Side.a else players[1]
    long_probability = _logistic(
        math.log(BASE_LONG_RALLY_SHARE / (1 - BASE_LONG_RALLY_SHARE)) + player.long_rally_bias
    )
    length = _rally_length(rng, server_won, rng.random() < long_probability)
    bounces = []
    for shot in range(length):
        hitter = server if shot % 2 == 0 else server.other
        if shot == 0:
            kind = BounceKind.serve
        elif shot == length - 1:
            kind = BounceKind.error
        else:
            kind = BounceKind.play
        if shot == length - 2:
            forehand_probability = _logistic(player.forehand_bias)
        else:
            forehand_probability = 0.5
        stroke = _stroke(rng, forehand_probability, cfg.missing_stroke_rate)
        bounces.append(BounceEvent(kind, hitter, *_coordinates(rng), stroke=stroke))
    return Rally(set_number, server, tuple(bounces))


def _coordinates(rng: np.random.Generator) -> Tuple[float, float]:
    x, y = rng.random(2)
    return round(float(x), 4), round(float(y), 4)


def _pair(rng: np.random.Generator, n_players: int) -> Tuple[int, int]:
    first, second = rng.choice(n_players, size=2, replace=False)
    return int(first), int(second)


def synth_generate(cfg: SynthConfig) -> List[MatchRecord]:
    """
    Generate matches between random pairs of the configuration's players.

    :param cfg:
    :return: matches in generation order
    """
    players = synth_players(cfg)
    rng = get_rng(derive_seed(cfg.seed, 1))
    width = len(str(cfg.n_matches))
    matches = []
    for index in range(cfg.n_matches):
        a, b = _pair(rng, cfg.n_players)
        pair = (players[a], players[b])
        form = float(rng.normal(0.0, 1.0)) * cfg.noise
        rallies: List[Rally] = []

        played = [0]

        def record(set_number: int, server: Side, winner: Side) -> None:
            played[0] += 1
            rally = _emit_rally(rng, cfg, pair, set_number, server, winner)
            if rng.random() < cfg.rally_capture_rate:
                rallies.append(rally)

        winner = _play_match(rng, _point_model(pair, form), record)
        matches.append(
            MatchRecord(
                match_id=f"M{index + 1:0{width}d}",
                player_a_id=pair[0].player_id,
                player_b_id=pair[1].player_id,
                rank_a=pair[0].rank,
                rank_b=pair[1].rank,
                rallies=tuple(rallies),
                winner=winner,
                complete=len(rallies) == played[0],
            )
        )
    logger.info(f"generated {len(matches)} matches between {cfg.n_players} players")
    return matches


def _favorite(players: Tuple[SynthPlayer, SynthPlayer]) -> Side:
    """The player with the higher mean point-win probability over serve and receive."""
    serve_a = _point_model(players, 0.0)(Side.a)
    receive_a = 1.0 - _point_model(players, 0.0)(Side.b)
    return Side.a if (serve_a + receive_a) / 2 >= 0.5 else Side.b


def bayes_accuracy(cfg: SynthConfig, n_sim: int = 10_000, seed: Optional[int] = None) -> BayesEstimate:
    """
    Estimate how often knowing every latent parameter predicts the match winner.

    Simulated matches pair random players of the configuration's population; the prediction
    is the player with the higher point-win probability. The per-match form swing is not known
    to the predictor.

    :param cfg:
    :param n_sim: number of simulated matches, at least 1000
    :param seed: simulation seed, derived from ``cfg.seed`` if absent
    :return: accuracy with its standard error
    """
    if n_sim < MIN_BAYES_SIMULATIONS:
        raise DomainError(f"n_sim={n_sim}, at least {MIN_BAYES_SIMULATIONS} are needed")
    players = synth_players(cfg)
    rng = get_rng(derive_seed(cfg.seed if seed is None else seed, 2))
    correct = 0
    for _ in range(n_sim):
        a, b = _pair(rng, cfg.n_players)
        pair = (players[a], players[b])
        form = float(rng.normal(0.0, 1.0)) * cfg.noise
        if _play_match(rng, _point_model(pair, form)) is _favorite(pair):
            correct += 1
    accuracy = correct / n_sim
    standard_error = math.sqrt(accuracy * (1 - accuracy) / n_sim)
    logger.info(f"Bayes accuracy {accuracy:.4f} +- {standard_error:.4f} from {n_sim} matches")
    return BayesEstimate(accuracy, standard_error, n_sim)
