"""Match-grouped train/validation/test splits and k-fold partitions."""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Hashable, List, Optional, Sequence, Tuple

from ttpredict.datamodel.features import LabeledSample
from ttpredict.errors import DomainError
from ttpredict.rng import derive_seed, get_rng

__all__ = [
    "Fold",
    "SplitPlan",
    "MIN_MATCHES",
    "train_val_test_split",
    "kfold_split",
    "fold_fingerprint",
]

MIN_MATCHES = 10
DEFAULT_TEST_FRACTION = 0.1

logger = logging.getLogger(__name__)

Fold = Tuple[List[int], List[int]]
"""(training indices, validation indices) of one cross-validation iteration."""


@dataclass(frozen=True)
class SplitPlan:
    """
    Assignment of sample indices to training, validation and test.

    The test partition is fixed. The rest is the cross-validation pool, partitioned by
    :attr:`folds`; :attr:`train_idx` and :attr:`val_idx` are those of the first iteration.
    """

    train_idx: List[int]
    val_idx: List[int]
    test_idx: List[int]
    seed: int
    folds: List[Fold] = field(default_factory=list)

    @property
    def pool_idx(self) -> List[int]:
        return sorted(self.train_idx + self.val_idx)

    def fingerprint(self) -> str:
        return fold_fingerprint(self.folds, self.test_idx)


def _units(
    indices: Sequence[int], groups: Optional[Sequence[Hashable]]
) -> List[List[int]]:
    """Indices bundled by group, in order of first appearance."""
    if groups is None:
        return [[index] for index in indices]
    if len(groups) != len(indices):
        raise DomainError(f"{len(indices)} indices but {len(groups)} group keys")
    bundles = {}
    for index, group in zip(indices, groups):
        bundles.setdefault(group, []).append(index)
    return list(bundles.values())


def kfold_split(
    indices: Sequence[int],
    k: int,
    seed: int,
    groups: Optional[Sequence[Hashable]] = None,
    labels: Optional[Sequence[int]] = None,
    stratify: bool = False,
) -> List[Fold]:
    """
    Partition indices into ``k`` validation folds after a seeded shuffle.

    When ``groups`` is given the folds are built from whole groups, so indices sharing a group
    key (the two perspectives of one match) always land in the same fold. Fold sizes, counted
    in groups, differ by at most one; the first ``n mod k`` folds take the extra group. With
    ``stratify`` the shuffled groups are ordered by the label of their first index and dealt
    round-robin.

    :param indices: sample indices to partition
    :param k: number of folds, at least 2
    :param seed:
    :param groups: optional group key per index
    :param labels: label per index, needed for ``stratify``
    :param stratify:
    :return: one (train, validation) pair per fold, indices sorted
    """
    if k < 2:
        raise DomainError(f"k={k}, expected at least 2 folds")
    indices = [int(index) for index in indices]
    units = _units(indices, groups)
    if k > len(units):
        raise DomainError(f"cannot make {k} folds from {len(units)} items")
    order = get_rng(seed).permutation(len(units))
    shuffled = [units[position] for position in order]
    if stratify:
        if labels is None:
            raise DomainError("stratified folds need labels")
        label_of = dict(zip(indices, labels))
        shuffled.sort(key=lambda unit: label_of[unit[0]])
        buckets: List[List[List[int]]] = [[] for _ in range(k)]
        for position, unit in enumerate(shuffled):
            buckets[position % k].append(unit)
    else:
        size, extra = divmod(len(shuffled), k)
        buckets, start = [], 0
        for fold in range(k):
            stop = start + size + (1 if fold < extra else 0)
            buckets.append(shuffled[start:stop])
            start = stop
    validation = [sorted(index for unit in bucket for index in unit) for bucket in buckets]
    everything = sorted(index for unit in units for index in unit)
    folds = []
    for val in validation:
        held_out = set(val)
        folds.append(([index for index in everything if index not in held_out], val))
    return folds


def train_val_test_split(
    samples: Sequence[LabeledSample],
    seed: int,
    k: int = 5,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    stratify: bool = False,
) -> SplitPlan:
    """
    Hold out a test set of whole matches and cut the remainder into ``k`` folds.

    ``test_fraction`` of the matches, rounded to nearest and at least one, go to test. With the
    defaults this is the 72:18:10 protocol: 10% test, and 80:20 train/validation within the rest.

    :param samples: labeled samples, two per match
    :param seed:
    :param k: folds over the remaining matches
    :param test_fraction:
    :param stratify: see :func:`kfold_split`
    :return: the plan
    """
    match_ids = [sample.match_id for sample in samples]
    matches = _units(range(len(samples)), match_ids)
    if len(matches) < MIN_MATCHES:
        raise DomainError(f"{len(matches)} matches, at least {MIN_MATCHES} are needed")
    n_test = max(1, int(test_fraction * len(matches) + 0.5))
    order = get_rng(seed).permutation(len(matches))
    test_idx = sorted(index for position in order[:n_test] for index in matches[position])
    pool = sorted(index for position in order[n_test:] for index in matches[position])
    folds = kfold_split(
        pool,
        k,
        derive_seed(seed, 1),
        groups=[match_ids[index] for index in pool],
        labels=[samples[index].label for index in pool],
        stratify=stratify,
    )
    logger.info(
        f"split {len(matches)} matches: {n_test} test, {len(matches) - n_test} in {k} folds"
    )
    train_idx, val_idx = folds[0]
    return SplitPlan(train_idx, val_idx, test_idx, seed, folds)


def fold_fingerprint(folds: Sequence[Fold], test_idx: Sequence[int] = ()) -> str:
    """
    Digest of a fold assignment, equal for two runs exactly when they used the same splits.

    :param folds:
    :param test_idx:
    :return: hex digest
    """
    document = {
        "folds": [[list(train), list(val)] for train, val in folds],
        "test": list(test_idx),
    }
    encoded = json.dumps(document, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(encoded).hexdigest()
