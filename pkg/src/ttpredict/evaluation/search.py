"""Cross-validation, brute-force grid search and learning curves."""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from ttpredict.datamodel.features import LabeledSample, feature_matrix
from ttpredict.errors import AllFoldsDegenerateError, DomainError, GridTooLargeError
from ttpredict.evaluation.metrics import Metrics, evaluate_predictions
from ttpredict.evaluation.splits import Fold, fold_fingerprint, kfold_split
from ttpredict.models.base import ModelFamily, Params
from ttpredict.models.pipeline import fit_pipeline
from ttpredict.models.registry import ModelSpec
from ttpredict.rng import derive_seed, get_rng

__all__ = [
    "CvResult",
    "GridResult",
    "LearningPoint",
    "DEFAULT_GRID_CAP",
    "cross_validate",
    "expand_grid",
    "grid_search",
    "learning_curve",
]

DEFAULT_GRID_CAP = 512

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CvResult:
    """
    Validation metrics of every evaluated fold with their mean and standard error.

    The standard error of each metric is the sample standard deviation over folds divided by
    the square root of the number of folds.
    """

    per_fold: List[Metrics]
    mean: Metrics
    standard_error: Metrics
    warnings: List[str] = field(default_factory=list)
    """One message per fold skipped for single-class training labels."""

    fingerprint: str = ""
    """Digest of the fold assignment, see :func:`fold_fingerprint`."""


@dataclass(frozen=True)
class GridResult:
    params: Dict[str, Any]
    """The grid values of this combination."""

    cv: CvResult


@dataclass(frozen=True)
class LearningPoint:
    fraction: float
    n_train: int
    """Training rows per fold, averaged over folds and rounded down."""

    cv: CvResult


def _summarize(per_fold: List[Metrics]) -> Tuple[Metrics, Metrics]:
    table = np.array([[getattr(m, name) for name in Metrics.names()] for m in per_fold])
    mean = table.mean(axis=0)
    if len(per_fold) > 1:
        se = table.std(axis=0, ddof=1) / np.sqrt(len(per_fold))
    else:
        se = np.zeros(table.shape[1])
    return Metrics(*mean.tolist()), Metrics(*se.tolist())


def _subsample(
    train: List[int], samples: Sequence[LabeledSample], fraction: float, seed: int
) -> List[int]:
    """Keep a seeded random ``fraction`` of the training matches, at least one."""
    matches = sorted({samples[index].match_id for index in train})
    keep = max(1, int(fraction * len(matches) + 0.5))
    chosen = {matches[position] for position in get_rng(seed).permutation(len(matches))[:keep]}
    return [index for index in train if samples[index].match_id in chosen]


def cross_validate(
    spec: ModelSpec,
    samples: Sequence[LabeledSample],
    k: int = 5,
    seed: int = 0,
    *,
    params: Optional[Params] = None,
    folds: Optional[Sequence[Fold]] = None,
    stratify: bool = False,
    train_fraction: float = 1.0,
) -> CvResult:
    """
    Estimate a model's validation performance by k-fold cross-validation.

    Each fold fits its own standardizer and model on the training rows only. A fold whose
    training rows hold a single class is skipped and noted in :attr:`CvResult.warnings`.

    :param spec: the model
    :param samples: labeled samples
    :param k: number of folds, ignored when ``folds`` is given
    :param seed: master seed; fold ``i`` fits with a seed derived from it and ``i``
    :param params: hyperparameters to use instead of ``spec.params``
    :param folds: a precomputed fold assignment over ``samples``
    :param stratify: see :func:`kfold_split`
    :param train_fraction: share of each fold's training matches to fit on
    :return: per-fold metrics with mean and standard error
    :raises AllFoldsDegenerateError: if no fold could be fitted
    """
    if not 0.0 < train_fraction <= 1.0:
        raise DomainError(f"train_fraction={train_fraction} is not in (0, 1]")
    x, y = feature_matrix(samples)
    if folds is None:
        folds = kfold_split(
            range(len(samples)),
            k,
            seed,
            groups=[sample.match_id for sample in samples],
            labels=y.tolist(),
            stratify=stratify,
        )
    params = params if params is not None else spec.build_params()
    per_fold, warnings = [], []
    for index, (train, val) in enumerate(folds):
        if train_fraction < 1.0:
            train = _subsample(train, samples, train_fraction, derive_seed(seed, index))
        if len(np.unique(y[train])) < 2:
            message = f"fold {index}: training labels hold a single class, fold skipped"
            logger.warning(f"{spec.name} {message}")
            warnings.append(message)
            continue
        pipeline = fit_pipeline(spec, x[train], y[train], derive_seed(seed, index), params)
        _, predicted = pipeline.score(x[val])
        per_fold.append(evaluate_predictions(y[val], predicted))
    if not per_fold:
        raise AllFoldsDegenerateError(f"all {len(folds)} folds of {spec.name} were degenerate")
    mean, standard_error = _summarize(per_fold)
    return CvResult(per_fold, mean, standard_error, warnings, fold_fingerprint(folds))


def _sort_value(value: Any) -> Tuple[int, Any]:
    if isinstance(value, bool):
        return 1, str(value)
    if isinstance(value, (int, float)):
        return 0, float(value)
    return 1, str(value)


def expand_grid(
    grid: Mapping[str, Sequence[Any]], cap: int = DEFAULT_GRID_CAP
) -> List[Dict[str, Any]]:
    """
    All combinations of a grid, in lexicographic order of hyperparameter name and value.

    :param grid: values per hyperparameter name
    :param cap: largest acceptable number of combinations
    :return: one dict per combination
    :raises GridTooLargeError: if the product exceeds ``cap``
    """
    if not grid:
        raise DomainError("empty grid")
    names = sorted(grid)
    for name in names:
        if not grid[name]:
            raise DomainError(f"grid lists no values for {name}")
    size = int(np.prod([len(grid[name]) for name in names]))
    if size > cap:
        raise GridTooLargeError(size, cap)
    return [dict(zip(names, values)) for values in itertools.product(*(grid[n] for n in names))]


def grid_search(
    model: Union[ModelSpec, ModelFamily],
    grid: Mapping[str, Sequence[Any]],
    samples: Sequence[LabeledSample],
    k: int = 5,
    seed: int = 0,
    *,
    cap: int = DEFAULT_GRID_CAP,
    folds: Optional[Sequence[Fold]] = None,
    stratify: bool = False,
    progress: bool = False,
) -> List[GridResult]:
    """
    Cross-validate every combination of a hyperparameter grid.

    All combinations share one fold assignment. Results are ranked by mean validation accuracy,
    then mean F1, both descending, then by hyperparameter values.

    :param model: a model whose ``params`` the grid values override, or a bare family
    :param grid: values per hyperparameter name
    :param samples:
    :param k:
    :param seed:
    :param cap: largest acceptable number of combinations
    :param folds: precomputed fold assignment
    :param stratify:
    :param progress: show a progress bar
    :return: ranked results, best first
    """
    spec = model if isinstance(model, ModelSpec) else ModelSpec(name=model.value, family=model)
    combinations = expand_grid(grid, cap)
    if folds is None:
        folds = kfold_split(
            range(len(samples)),
            k,
            seed,
            groups=[sample.match_id for sample in samples],
            labels=[sample.label for sample in samples],
            stratify=stratify,
        )
    logger.info(f"grid search over {len(combinations)} combinations for {spec.name}")
    results = []
    for combination in tqdm(combinations, desc=f"grid {spec.name}", disable=not progress):
        cv = cross_validate(
            spec, samples, k, seed, params=spec.build_params(combination), folds=folds
        )
        results.append(GridResult(combination, cv))
    results.sort(
        key=lambda result: (
            -result.cv.mean.accuracy,
            -result.cv.mean.f1,
            [(name, _sort_value(value)) for name, value in sorted(result.params.items())],
        )
    )
    best = results[0]
    logger.info(
        f"best {spec.name} parameters {best.params}: accuracy {best.cv.mean.accuracy:.3f}"
    )
    return results


def learning_curve(
    spec: ModelSpec,
    samples: Sequence[LabeledSample],
    fractions: Sequence[float],
    k: int = 5,
    seed: int = 0,
    *,
    params: Optional[Params] = None,
) -> List[LearningPoint]:
    """
    Cross-validated performance as a function of the amount of training data.

    Every fraction uses the same folds; within fold ``i`` the training matches are subsampled
    with a seed derived from ``seed`` and ``i``.

    :param spec:
    :param samples:
    :param fractions: training shares in (0, 1]
    :param k:
    :param seed:
    :param params:
    :return: one point per fraction, in the given order
    """
    folds = kfold_split(
        range(len(samples)), k, seed, groups=[sample.match_id for sample in samples]
    )
    points = []
    for fraction in fractions:
        cv = cross_validate(
            spec, samples, k, seed, params=params, folds=folds, train_fraction=fraction
        )
        n_train = [
            len(_subsample(train, samples, fraction, derive_seed(seed, index)))
            if fraction < 1.0
            else len(train)
            for index, (train, _) in enumerate(folds)
        ]
        points.append(LearningPoint(fraction, int(np.mean(n_train)), cv))
    return points
