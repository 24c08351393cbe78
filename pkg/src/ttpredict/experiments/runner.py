"""Runs experiments: split, tune, cross-validate and test every configured model."""

import logging
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Collection, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from ttpredict.datamodel.features import (
    FeatureMode,
    FeatureSet,
    LabeledSample,
    build_samples,
    feature_matrix,
    feature_names,
)
from ttpredict.datamodel.match import MatchRecord, validate_match
from ttpredict.errors import DomainError, StageError, TTPredictError
from ttpredict.evaluation.metrics import (
    ConfusionMatrix,
    Metrics,
    RocCurve,
    compute_metrics,
    confusion_matrix,
    roc_auc,
)
from ttpredict.evaluation.search import CvResult, GridResult, LearningPoint, cross_validate, grid_search, learning_curve
from ttpredict.evaluation.splits import SplitPlan, train_val_test_split
from ttpredict.experiments.config import ExperimentConfig
from ttpredict.ingest.ingest_synth import synth_generate
from ttpredict.io.parser import load_curated_grids, load_matches
from ttpredict.io.writer import (
    ABLATION_FIELDS,
    CONFUSION_FIELDS,
    EVALUATION_FIELDS,
    GRID_FIELDS,
    IMPORTANCE_FIELDS,
    LEARNING_CURVE_FIELDS,
    RESULTS_FIELDS,
    ROC_FIELDS,
    table_to_file,
)
from ttpredict.models.base import ModelFamily, Params
from ttpredict.models.forest import rf_feature_importances
from ttpredict.models.pipeline import FittedPipeline, fit_pipeline
from ttpredict.models.registry import ModelSpec

__all__ = [
    "MIN_EXPERIMENT_MATCHES",
    "ModelReport",
    "EvalReport",
    "AblationReport",
    "stage",
    "usable_matches",
    "load_dataset",
    "grid_rows",
    "write_evaluation",
    "evaluate_pipeline",
    "evaluate_models",
    "run_experiment",
    "run_ablation",
    "run_prematch",
    "dropped_matches",
    "write_report",
]

MIN_EXPERIMENT_MATCHES = 20

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Attribute any failure inside the block to the named experiment stage."""
    logger.debug(f"stage {name}")
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        raise StageError(name, e) from e


@dataclass(frozen=True)
class ModelReport:
    """Everything measured for one model on one split."""

    name: str
    family: ModelFamily
    params: Params
    """Hyperparameters of the tested model, the grid winner when tuned."""

    cv: CvResult
    test: Metrics
    confusion: ConfusionMatrix
    roc: RocCurve
    untuned_cv: Optional[CvResult] = None
    untuned_test: Optional[Metrics] = None
    grid: Optional[List[GridResult]] = None
    importances: Optional[np.ndarray] = None
    learning_curve: Optional[List[LearningPoint]] = None


@dataclass(frozen=True)
class EvalReport:
    test_seed: int
    fingerprint: str
    """Digest of the split, equal between runs that used the same folds and test set."""

    feature_names: List[str]
    n_matches: int
    models: List[ModelReport]


@dataclass(frozen=True)
class AblationReport:
    full: EvalReport
    without_derived: EvalReport


def usable_matches(matches: Sequence[MatchRecord]) -> List[MatchRecord]:
    """
    Keep the matches that pass :func:`validate_match`, logging how many were dropped and why.

    :param matches:
    :return: kept matches in input order
    """
    kept: List[MatchRecord] = []
    reasons: Dict[str, int] = {}
    for match in matches:
        verdict = validate_match(match)
        if verdict.keep:
            kept.append(match)
        else:
            reasons[verdict.reason] = reasons.get(verdict.reason, 0) + 1
    for reason, count in sorted(reasons.items()):
        logger.warning(f"dropped {count} matches: {reason}")
    return kept


def load_dataset(cfg: ExperimentConfig) -> List[MatchRecord]:
    """
    Load or generate the matches of an experiment and keep the usable ones.

    :param cfg:
    :return: matches passing :func:`validate_match`
    """
    with stage("load"):
        matches = load_matches(cfg.input) if cfg.input else synth_generate(cfg.synth)
    with stage("validate"):
        kept = usable_matches(matches)
        if len(kept) < MIN_EXPERIMENT_MATCHES:
            raise DomainError(
                f"{len(kept)} usable matches, an experiment needs {MIN_EXPERIMENT_MATCHES}"
            )
    return kept


def _samples(cfg: ExperimentConfig, matches: Sequence[MatchRecord]) -> List[LabeledSample]:
    with stage("features"):
        return build_samples(
            matches,
            cfg.feature_mode,
            cfg.feature_set,
            include_target=cfg.include_target,
            missing_stroke_threshold=cfg.missing_stroke_threshold,
        )


def evaluate_pipeline(
    pipeline: FittedPipeline, x: np.ndarray, y: np.ndarray
) -> Tuple[Metrics, ConfusionMatrix, RocCurve]:
    """
    Score a fitted pipeline on labeled rows.

    :param pipeline:
    :param x: raw feature rows
    :param y: labels, both classes present
    :return: (metrics, confusion matrix, ROC curve)
    """
    scores, predicted = pipeline.score(x)
    cm = confusion_matrix(y, predicted)
    return compute_metrics(cm), cm, roc_auc(y, scores)


def _evaluate_model(
    cfg: ExperimentConfig,
    spec: ModelSpec,
    samples: Sequence[LabeledSample],
    plan: SplitPlan,
    feature_set: FeatureSet,
    curated: Dict[str, Dict[str, list]],
) -> ModelReport:
    seed = plan.seed
    x, y = feature_matrix(samples)
    pool, test = plan.pool_idx, plan.test_idx
    grid = spec.grid or (curated.get(spec.name) if cfg.curated_grids else None)
    with stage("gridsearch"):
        preset_params = spec.build_params()
        grid_results = None
        if grid and cfg.tune:
            grid_results = grid_search(
                spec, grid, samples, cfg.k, seed, cap=cfg.grid_cap, folds=plan.folds
            )
            params = spec.build_params(grid_results[0].params)
        else:
            params = preset_params
    with stage("crossvalidate"):
        untuned_cv = None
        if grid_results:
            cv = grid_results[0].cv
            untuned_cv = cross_validate(
                spec, samples, cfg.k, seed, params=preset_params, folds=plan.folds
            )
        else:
            cv = cross_validate(spec, samples, cfg.k, seed, params=params, folds=plan.folds)
    with stage("test"):
        pipeline = fit_pipeline(spec, x[pool], y[pool], seed, params, feature_set)
        metrics, cm, roc = evaluate_pipeline(pipeline, x[test], y[test])
        untuned_test = None
        if grid_results:
            untuned = fit_pipeline(spec, x[pool], y[pool], seed, preset_params, feature_set)
            untuned_test = evaluate_pipeline(untuned, x[test], y[test])[0]
        importances = None
        if spec.family is ModelFamily.forest:
            importances = rf_feature_importances(pipeline.classifier)
    curve = None
    if cfg.learning_curve and spec.family is not ModelFamily.baseline:
        with stage("crossvalidate"):
            curve = learning_curve(
                spec, [samples[i] for i in pool], cfg.learning_curve, cfg.k, seed, params=params
            )
    logger.info(
        f"{spec.name}: validation accuracy {cv.mean.accuracy:.3f} +- "
        f"{cv.standard_error.accuracy:.3f}, test accuracy {metrics.accuracy:.3f}"
    )
    return ModelReport(
        name=spec.name,
        family=spec.family,
        params=params,
        cv=cv,
        test=metrics,
        confusion=cm,
        roc=roc,
        untuned_cv=untuned_cv,
        untuned_test=untuned_test,
        grid=grid_results,
        importances=importances,
        learning_curve=curve,
    )


def evaluate_models(
    cfg: ExperimentConfig,
    samples: Sequence[LabeledSample],
    feature_set: FeatureSet,
    test_seed: int,
    progress: bool = False,
) -> EvalReport:
    """
    Split the samples and evaluate every configured model on the same split.

    :param cfg:
    :param samples: samples built with ``feature_set``
    :param feature_set:
    :param test_seed: seed of the split and of every fit
    :param progress: show a progress bar over models
    :return: the report
    """
    with stage("split"):
        plan = train_val_test_split(
            samples, test_seed, k=cfg.k, test_fraction=cfg.test_fraction, stratify=cfg.stratify
        )
    curated = load_curated_grids() if cfg.curated_grids else {}
    models = [
        _evaluate_model(cfg, spec, samples, plan, feature_set, curated)
        for spec in tqdm(cfg.models, desc="models", disable=not progress)
    ]
    return EvalReport(
        test_seed=test_seed,
        fingerprint=plan.fingerprint(),
        feature_names=feature_names(feature_set),
        n_matches=len({sample.match_id for sample in samples}),
        models=models,
    )


def _cv_columns(cv: CvResult) -> Dict[str, float]:
    return {
        "acc_val": cv.mean.accuracy,
        "acc_val_se": cv.standard_error.accuracy,
        "f1_val": cv.mean.f1,
        "f1_val_se": cv.standard_error.f1,
    }


def _write(path: Path, field_names: Sequence[str], rows: List[Dict]) -> None:
    with path.open("w", encoding="utf-8", newline="") as file:
        table_to_file(field_names, rows, file)


def write_report(
    report: EvalReport, directory: PathLike, results_name: str = "results.csv"
) -> None:
    """
    Write the tables of one report.

    ``results.csv`` (validation and test metrics), ``confusion.csv`` and ``roc.csv`` are always
    written; ``results.untuned.csv`` and one ``grid.<model>.csv`` per model when models were
    tuned, ``importances.csv`` for forests, ``learning_curve.csv`` when one was computed.

    :param report:
    :param directory: created if missing
    :param results_name: file name of the main table
    :return:
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    models = report.models
    _write(
        directory / results_name,
        RESULTS_FIELDS,
        [
            {"model": m.name, **_cv_columns(m.cv), "acc_test": m.test.accuracy, "f1_test": m.test.f1}
            for m in models
        ],
    )
    _write(
        directory / "confusion.csv",
        CONFUSION_FIELDS,
        [
            {"model": m.name, "tp": m.confusion.tp, "tn": m.confusion.tn, "fp": m.confusion.fp, "fn": m.confusion.fn}
            for m in models
        ],
    )
    _write(
        directory / "roc.csv",
        ROC_FIELDS,
        [{"model": m.name, "fpr": fpr, "tpr": tpr} for m in models for fpr, tpr in m.roc.points],
    )
    tuned = [m for m in models if m.untuned_cv is not None]
    if tuned:
        _write(
            directory / "results.untuned.csv",
            RESULTS_FIELDS,
            [
                {
                    "model": m.name,
                    **_cv_columns(m.untuned_cv),
                    "acc_test": m.untuned_test.accuracy,
                    "f1_test": m.untuned_test.f1,
                }
                for m in tuned
            ],
        )
        for m in tuned:
            _write(directory / f"grid.{m.name}.csv", GRID_FIELDS, grid_rows(m.grid))
    forests = [m for m in models if m.importances is not None]
    if forests:
        _write(
            directory / "importances.csv",
            IMPORTANCE_FIELDS,
            [
                {"model": m.name, "feature": name, "importance": float(value)}
                for m in forests
                for name, value in zip(report.feature_names, m.importances)
            ],
        )
    curves = [m for m in models if m.learning_curve]
    if curves:
        _write(
            directory / "learning_curve.csv",
            LEARNING_CURVE_FIELDS,
            [
                {"model": m.name, "fraction": float(p.fraction), "n_train": p.n_train, **_cv_columns(p.cv)}
                for m in curves
                for p in m.learning_curve
            ],
        )


def grid_rows(results: Sequence[GridResult]) -> List[Dict]:
    return [
        {
            "rank": rank,
            "params": " ".join(f"{name}={value}" for name, value in sorted(result.params.items())),
            **_cv_columns(result.cv),
        }
        for rank, result in enumerate(results, start=1)
    ]


def write_evaluation(
    name: str,
    metrics: Metrics,
    cm: ConfusionMatrix,
    roc: RocCurve,
    directory: PathLike,
) -> None:
    """Write the test metrics, confusion matrix and ROC curve of one fitted model."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write(
        directory / "evaluation.csv",
        EVALUATION_FIELDS,
        [{"model": name, **metrics.as_dict(), "auc": roc.auc}],
    )
    _write(
        directory / "confusion.csv",
        CONFUSION_FIELDS,
        [{"model": name, "tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn}],
    )
    _write(
        directory / "roc.csv",
        ROC_FIELDS,
        [{"model": name, "fpr": fpr, "tpr": tpr} for fpr, tpr in roc.points],
    )


def _report_directory(out_dir: PathLike, index: int, seed: int) -> Path:
    return Path(out_dir) if index == 0 else Path(out_dir) / f"seed_{seed}"


def run_experiment(
    cfg: ExperimentConfig, out_dir: Optional[PathLike] = None, progress: bool = False
) -> List[EvalReport]:
    """
    Compare the configured models: split, optional grid search, cross-validation and a final
    test evaluation.

    One report is made per test seed. The first is written to ``out_dir``, every further one to
    ``out_dir/seed_<seed>``.

    :param cfg:
    :param out_dir: where to write the tables, nothing is written if None
    :param progress:
    :return: one report per test seed
    :raises StageError: naming the stage that failed
    """
    samples = _samples(cfg, load_dataset(cfg))
    reports = [
        evaluate_models(cfg, samples, cfg.feature_set, seed, progress) for seed in cfg.report_seeds
    ]
    if out_dir is not None:
        with stage("write"):
            for index, report in enumerate(reports):
                write_report(report, _report_directory(out_dir, index, report.test_seed))
    return reports


def _restrict(samples: Sequence[LabeledSample], feature_set: FeatureSet) -> List[LabeledSample]:
    return [replace(s, features=s.raw.as_vector(feature_set)) for s in samples]


def run_ablation(
    cfg: ExperimentConfig, out_dir: Optional[PathLike] = None, progress: bool = False
) -> AblationReport:
    """
    Evaluate every model with and without the derived features on identical splits.

    :param cfg:
    :param out_dir: receives ``ablation.csv`` plus the full tables of both runs as
        ``results.full.csv`` and ``results.without_derived.csv``
    :param progress:
    :return: paired reports
    """
    matches = load_dataset(cfg)
    full_samples = _samples(cfg.model_copy(update={"feature_set": FeatureSet.full}), matches)
    with stage("features"):
        reduced_samples = _restrict(full_samples, FeatureSet.without_derived)
    full = evaluate_models(cfg, full_samples, FeatureSet.full, cfg.seed, progress)
    reduced = evaluate_models(
        cfg, reduced_samples, FeatureSet.without_derived, cfg.seed, progress
    )
    if full.fingerprint != reduced.fingerprint:
        raise StageError("split", TTPredictError("ablation runs used different splits"))
    if out_dir is not None:
        with stage("write"):
            directory = Path(out_dir)
            directory.mkdir(parents=True, exist_ok=True)
            _write(
                directory / "ablation.csv",
                ABLATION_FIELDS,
                [
                    {
                        "model": a.name,
                        "acc_full": a.cv.mean.accuracy,
                        "f1_full": a.cv.mean.f1,
                        "acc_without": b.cv.mean.accuracy,
                        "f1_without": b.cv.mean.f1,
                    }
                    for a, b in zip(full.models, reduced.models)
                ],
            )
            write_report(full, directory / "full", "results.full.csv")
            write_report(reduced, directory / "without_derived", "results.without_derived.csv")
    return AblationReport(full, reduced)


def run_prematch(
    cfg: ExperimentConfig, out_dir: Optional[PathLike] = None, progress: bool = False
) -> EvalReport:
    """
    Evaluate pre-match prediction: each sample's features average the player's other matches.

    Matches with a player who has no other match are dropped.

    :param cfg: run in aggregate mode whatever its ``feature_mode``
    :param out_dir: receives ``prematch.csv`` and the usual tables
    :param progress:
    :return: the report
    :raises StageError: wrapping :class:`InsufficientHistoryError` if every match is dropped
    """
    cfg = cfg.model_copy(update={"feature_mode": FeatureMode.aggregate})
    matches = load_dataset(cfg)
    samples = _samples(cfg, matches)
    dropped = dropped_matches(matches, samples)
    logger.info(f"pre-match samples for {len(matches) - len(dropped)} of {len(matches)} matches")
    report = evaluate_models(cfg, samples, cfg.feature_set, cfg.seed, progress)
    if out_dir is not None:
        with stage("write"):
            write_report(report, out_dir, "prematch.csv")
    return report


def dropped_matches(matches: Collection[MatchRecord], samples: Sequence[LabeledSample]) -> List[str]:
    """Ids of matches that have no samples."""
    kept = {sample.match_id for sample in samples}
    return [match.match_id for match in matches if match.match_id not in kept]
