"""Per-match and aggregate player features, and feature standardization."""

import logging
from dataclasses import astuple, dataclass, fields
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ttpredict.datamodel.match import MATCH_ID, PLAYER_ID, MatchRecord, Side, match_summary
from ttpredict.errors import DomainError, InsufficientHistoryError

__all__ = [
    "FeatureSet",
    "FeatureMode",
    "RawFeatures",
    "Standardizer",
    "LabeledSample",
    "FEATURE_NAMES",
    "DERIVED_FEATURES",
    "feature_names",
    "compute_raw_features",
    "rank_diff",
    "balance",
    "standardize_fit",
    "standardize_apply",
    "aggregate_features",
    "build_samples",
    "feature_matrix",
]

RANKDIFF_CUTOFF = 100
"""Rank differences between two players both ranked beyond this are treated as zero."""

STD_EPSILON = 1e-12
DEFAULT_MISSING_STROKE_THRESHOLD = 0.2

logger = logging.getLogger(__name__)

FeatureCache = Dict[Tuple[MATCH_ID, Side], "RawFeatures"]


class FeatureSet(Enum):
    """Which feature columns enter the model."""

    full = "full"
    """All twelve features."""

    without_derived = "without_derived"
    """Only the base statistics and the player's own rank."""


class FeatureMode(Enum):
    """How a sample's features are obtained."""

    per_match = "per-match"
    """Statistics of the match being predicted."""

    aggregate = "aggregate"
    """Mean statistics over the player's other matches."""


@dataclass(frozen=True)
class RawFeatures:
    """The twelve feature values for one match seen from one player's perspective."""

    sp: float
    """Share of points won while serving."""

    rp: float
    """Share of points won while receiving."""

    lrp: float
    """Share of won rallies that were long."""

    srp: float
    """Share of won rallies that were short."""

    fhp: float
    """Share of won rallies finished with a forehand."""

    bhp: float
    """Share of won rallies finished with a backhand."""

    rank: float
    rankdiff: float
    """Own rank minus opponent rank, see :func:`rank_diff`."""

    sa: float
    """Serve advantage, ``sp - rp``."""

    sra: float
    """Short rally advantage, ``srp - lrp``."""

    fha: float
    """Forehand advantage, ``fhp - bhp``."""

    balance: float
    """Mean magnitude of the three advantages, see :func:`balance`."""

    def as_vector(self, feature_set: FeatureSet = FeatureSet.full) -> np.ndarray:
        values = dict(zip(FEATURE_NAMES, astuple(self)))
        return np.array([values[name] for name in feature_names(feature_set)], dtype=float)


FEATURE_NAMES: Tuple[str, ...] = tuple(f.name for f in fields(RawFeatures))
DERIVED_FEATURES = frozenset({"rankdiff", "sa", "sra", "fha", "balance"})


def feature_names(feature_set: FeatureSet = FeatureSet.full) -> List[str]:
    if feature_set is FeatureSet.full:
        return list(FEATURE_NAMES)
    return [name for name in FEATURE_NAMES if name not in DERIVED_FEATURES]


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-column means and population standard deviations fitted on training rows."""

    means: np.ndarray
    stds: np.ndarray

    @classmethod
    def fit(cls, samples: Sequence[Sequence[float]]) -> "Standardizer":
        matrix = np.asarray(samples, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] == 0:
            raise DomainError("standardizer needs a non-empty two-dimensional sample matrix")
        return cls(means=matrix.mean(axis=0), stds=matrix.std(axis=0))

    @property
    def dimension(self) -> int:
        return len(self.means)

    def apply(self, values: Sequence) -> np.ndarray:
        """
        Standardize one vector or a matrix of row vectors.

        Columns whose fitted deviation is below ``1e-12`` map to zero.

        :param values:
        :return: array of the same shape
        """
        array = np.asarray(values, dtype=float)
        if array.shape[-1] != self.dimension:
            raise DomainError(
                f"expected dimension {self.dimension}, got {array.shape[-1]}"
            )
        degenerate = self.stds < STD_EPSILON
        scale = np.where(degenerate, 1.0, self.stds)
        return np.where(degenerate, 0.0, (array - self.means) / scale)

    def to_dict(self) -> Dict[str, List[float]]:
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, obj: Mapping[str, List[float]]) -> "Standardizer":
        return cls(means=np.asarray(obj["means"], dtype=float), stds=np.asarray(obj["stds"]))


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """A feature vector with its match outcome label, +1 if the perspective player won."""

    features: np.ndarray
    label: int
    match_id: MATCH_ID
    perspective: Side
    raw: RawFeatures


def standardize_fit(samples: Sequence[Sequence[float]]) -> Standardizer:
    return Standardizer.fit(samples)


def standardize_apply(standardizer: Standardizer, values: Sequence[float]) -> np.ndarray:
    return standardizer.apply(values)


def rank_diff(rank_self: float, rank_opp: float) -> float:
    """
    Rank difference from a player's perspective; negative means a rank advantage.

    Differences between two players who are both ranked beyond 100 are unreliable and
    set to zero.

    :param rank_self:
    :param rank_opp:
    :return: the difference
    """
    if rank_self > RANKDIFF_CUTOFF and rank_opp > RANKDIFF_CUTOFF:
        return 0.0
    return float(rank_self - rank_opp)


def balance(sa: float, sra: float, fha: float) -> float:
    return (abs(sa) + abs(sra) + abs(fha)) / 3


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.5


def compute_raw_features(
    match: MatchRecord,
    side: Side,
    missing_stroke_threshold: float = DEFAULT_MISSING_STROKE_THRESHOLD,
) -> RawFeatures:
    """
    Compute the features of one match from one player's perspective.

    Serve and receive shares are conditional on who served. If the player won no rallies, or
    served/received none, the affected shares are 0.5. Forehand and backhand shares count
    annotated winning shots only, and fall back to 0.5 when more than
    ``missing_stroke_threshold`` of the won rallies lack a stroke.

    :param match: a match that passed :func:`validate_match`
    :param side: the perspective player
    :param missing_stroke_threshold:
    :return: the feature values
    """
    if not match.rallies:
        raise DomainError(f"match {match.match_id} has no rallies")
    rank_self, rank_opp = match.rank(side), match.rank(side.other)
    if rank_self is None or rank_opp is None:
        raise DomainError(f"match {match.match_id} lacks a rank")
    summary = match_summary(match)[side]
    sp = _ratio(summary.won_on_serve, summary.served)
    rp = _ratio(summary.won_on_receive, summary.received)
    lrp = _ratio(summary.won_long, summary.won)
    srp = _ratio(summary.won_short, summary.won)
    annotated = summary.won_forehand + summary.won_backhand
    if summary.won and summary.won_unannotated / summary.won > missing_stroke_threshold:
        logger.debug(
            f"{match.match_id}/{side.value}: {summary.won_unannotated} of {summary.won} won"
            " rallies lack a stroke, forehand share left uninformative"
        )
        fhp = bhp = 0.5
    else:
        fhp = _ratio(summary.won_forehand, annotated)
        bhp = _ratio(summary.won_backhand, annotated)
    sa, sra, fha = sp - rp, srp - lrp, fhp - bhp
    return RawFeatures(
        sp=sp,
        rp=rp,
        lrp=lrp,
        srp=srp,
        fhp=fhp,
        bhp=bhp,
        rank=float(rank_self),
        rankdiff=rank_diff(rank_self, rank_opp),
        sa=sa,
        sra=sra,
        fha=fha,
        balance=balance(sa, sra, fha),
    )


def _find_match(all_matches: Iterable[MatchRecord], match_id: MATCH_ID) -> MatchRecord:
    for match in all_matches:
        if match.match_id == match_id:
            return match
    raise DomainError(f"no match with id {match_id}")


def aggregate_features(
    player_id: PLAYER_ID,
    all_matches: Sequence[MatchRecord],
    exclude: MATCH_ID,
    *,
    cache: Optional[FeatureCache] = None,
    include_target: bool = False,
    missing_stroke_threshold: float = DEFAULT_MISSING_STROKE_THRESHOLD,
) -> RawFeatures:
    """
    Average a player's features over their other matches, for pre-match prediction.

    The rank difference is a property of the pairing, so it is computed from the ranks of the
    target match. No rally of the target match is read unless ``include_target`` is set.

    :param player_id:
    :param all_matches:
    :param exclude: id of the target match
    :param cache: per-match features keyed by (match id, side), filled as a side effect
    :param include_target: if True, average over the target match as well
    :param missing_stroke_threshold: see :func:`compute_raw_features`
    :return: the averaged features
    """
    target = _find_match(all_matches, exclude)
    side = target.side_of(player_id)
    if side is None:
        raise DomainError(f"player {player_id} did not play match {exclude}")
    cache = {} if cache is None else cache
    history = []
    for match in all_matches:
        if match.match_id == exclude and not include_target:
            continue
        match_side = match.side_of(player_id)
        if match_side is None:
            continue
        key = (match.match_id, match_side)
        if key not in cache:
            cache[key] = compute_raw_features(match, match_side, missing_stroke_threshold)
        history.append(cache[key].as_vector())
    if not history:
        raise InsufficientHistoryError(
            f"player {player_id} has no matches other than {exclude} to aggregate"
        )
    values = dict(zip(FEATURE_NAMES, np.mean(history, axis=0).tolist()))
    values["rankdiff"] = rank_diff(target.rank(side), target.rank(side.other))
    return RawFeatures(**values)


def _history_counts(matches: Sequence[MatchRecord]) -> Dict[PLAYER_ID, int]:
    counts: Dict[PLAYER_ID, int] = {}
    for match in matches:
        for side in Side:
            player = match.player_id(side)
            counts[player] = counts.get(player, 0) + 1
    return counts


def build_samples(
    matches: Sequence[MatchRecord],
    mode: FeatureMode = FeatureMode.per_match,
    feature_set: FeatureSet = FeatureSet.full,
    *,
    include_target: bool = False,
    missing_stroke_threshold: float = DEFAULT_MISSING_STROKE_THRESHOLD,
) -> List[LabeledSample]:
    """
    Turn matches into labeled samples, two per match, one from each player's perspective.

    In aggregate mode a match is skipped, with both its samples, when either player has no
    other match to aggregate over.

    :param matches: validated matches
    :param mode:
    :param feature_set:
    :param include_target: aggregate mode only, see :func:`aggregate_features`
    :param missing_stroke_threshold:
    :return: samples in match order, perspective a before b
    """
    samples = []
    cache: FeatureCache = {}
    counts = _history_counts(matches)
    dropped = 0
    for match in matches:
        if mode is FeatureMode.aggregate and not include_target:
            novices = [
                match.player_id(side) for side in Side if counts[match.player_id(side)] < 2
            ]
            if novices:
                logger.info(
                    f"dropping match {match.match_id}: no history for {', '.join(novices)}"
                )
                dropped += 1
                continue
        for side in Side:
            if mode is FeatureMode.aggregate:
                raw = aggregate_features(
                    match.player_id(side),
                    matches,
                    match.match_id,
                    cache=cache,
                    include_target=include_target,
                    missing_stroke_threshold=missing_stroke_threshold,
                )
            else:
                raw = compute_raw_features(match, side, missing_stroke_threshold)
            samples.append(
                LabeledSample(
                    features=raw.as_vector(feature_set),
                    label=1 if side is match.winner else -1,
                    match_id=match.match_id,
                    perspective=side,
                    raw=raw,
                )
            )
    if dropped:
        logger.warning(f"dropped {dropped} of {len(matches)} matches for insufficient history")
    if matches and not samples:
        raise InsufficientHistoryError("every match was dropped for insufficient history")
    return samples


def feature_matrix(samples: Sequence[LabeledSample]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Stack samples into a feature matrix and a label vector.

    :param samples:
    :return: (n x d matrix, labels in {-1, +1})
    """
    if not samples:
        raise DomainError("no samples")
    x = np.vstack([sample.features for sample in samples])
    y = np.array([sample.label for sample in samples], dtype=int)
    return x, y
