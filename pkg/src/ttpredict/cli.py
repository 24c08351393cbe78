"""Command line interface for ttpredict."""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
import yaml
from pydantic import ValidationError

from ttpredict.datamodel.features import FeatureMode, FeatureSet, build_samples, feature_matrix
from ttpredict.errors import InputValidationError, StageError, TTPredictError
from ttpredict.evaluation.search import DEFAULT_GRID_CAP, grid_search
from ttpredict.experiments.runner import (
    evaluate_pipeline,
    grid_rows,
    run_ablation,
    run_experiment,
    run_prematch,
    usable_matches,
    write_evaluation,
)
from ttpredict.ingest.ingest_synth import bayes_accuracy, synth_generate
from ttpredict.io.parser import (
    load_curated_grids,
    load_experiment_config,
    load_matches,
    load_pipeline,
    load_synth_config,
    load_yaml,
)
from ttpredict.io.writer import (
    GRID_FIELDS,
    matches_to_file,
    pipeline_to_file,
    samples_to_file,
    table_to_file,
)
from ttpredict.models.pipeline import fit_pipeline
from ttpredict.models.registry import PRESETS, get_preset

__all__ = [
    "cli",
    "main",
]

logger = logging.getLogger(__name__)

existing_file = click.Path(exists=True, dir_okay=False, path_type=Path)
output_file = click.Path(dir_okay=False, writable=True, path_type=Path)
output_directory = click.Path(file_okay=False, path_type=Path)

input_option = click.option(
    "--in", "input_path", type=existing_file, help="Match file (JSON list of matches)."
)
seed_option = click.option("--seed", type=click.IntRange(min=0), help="Master random seed.")
mode_option = click.option(
    "--mode",
    type=click.Choice([mode.value for mode in FeatureMode]),
    default=FeatureMode.per_match.value,
    show_default=True,
    help="Features of the predicted match, or averages over the players' other matches.",
)
feature_set_option = click.option(
    "--feature-set",
    type=click.Choice([feature_set.value for feature_set in FeatureSet]),
    default=FeatureSet.full.value,
    show_default=True,
)
model_option = click.option(
    "--model",
    type=click.Choice(sorted(PRESETS)),
    default="logreg",
    show_default=True,
    help="Model preset.",
)


def _samples(input_path: Path, mode: str, feature_set: str = FeatureSet.full.value):
    matches = usable_matches(load_matches(input_path))
    return build_samples(matches, FeatureMode(mode), FeatureSet(feature_set))


def _parse_mapping(text: Optional[str], what: str) -> Dict[str, Any]:
    if not text:
        return {}
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise InputValidationError(f"{what} is not valid JSON or YAML: {e}") from e
    if not isinstance(value, dict):
        raise InputValidationError(f"{what} must be a mapping, got {text!r}")
    return value


def _parse_seeds(text: Optional[str]) -> Optional[List[int]]:
    if not text:
        return None
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"{text!r} is not a comma-separated list of integers")


@click.group()
@click.option("-v", "--verbose", count=True, help="Log more; repeat for debug output.")
def cli(verbose: int):
    """Predict table tennis singles match outcomes from rally-level data."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--config", type=existing_file, help="Generator configuration (YAML).")
@click.option("--out", type=output_file, required=True, help="Match file to write.")
@seed_option
@click.option("--n-matches", type=click.IntRange(min=1), help="Number of matches.")
@click.option("--bayes", is_flag=True, help="Also estimate the Bayes-optimal accuracy.")
def synth(config: Optional[Path], out: Path, seed: Optional[int], n_matches: Optional[int], bayes: bool):
    """Generate synthetic matches."""
    cfg = load_synth_config(config, {"seed": seed, "n_matches": n_matches})
    matches = synth_generate(cfg)
    with out.open("w", encoding="utf-8") as file:
        matches_to_file(matches, file)
    if bayes:
        estimate = bayes_accuracy(cfg)
        click.echo(f"bayes_accuracy\t{estimate.accuracy:.4f}\t{estimate.standard_error:.4f}")


@cli.command()
@click.option("--in", "input_path", type=existing_file, required=True, help="Match file.")
@click.option("--out", type=output_file, required=True, help="Feature CSV to write.")
@mode_option
@click.option("--include-target", is_flag=True, help="Aggregate mode: include the target match.")
def features(input_path: Path, out: Path, mode: str, include_target: bool):
    """Write the feature matrix of a match file, two rows per match."""
    matches = usable_matches(load_matches(input_path))
    samples = build_samples(matches, FeatureMode(mode), include_target=include_target)
    with out.open("w", encoding="utf-8", newline="") as file:
        samples_to_file(samples, file)


@cli.command()
@click.option("--in", "input_path", type=existing_file, required=True, help="Match file.")
@model_option
@click.option("--params", help="Hyperparameter overrides as a JSON or YAML mapping.")
@seed_option
@mode_option
@feature_set_option
@click.option("--save", type=output_file, required=True, help="Model file to write.")
def train(
    input_path: Path,
    model: str,
    params: Optional[str],
    seed: Optional[int],
    mode: str,
    feature_set: str,
    save: Path,
):
    """Fit a model on every match of a file and save it."""
    spec = get_preset(model)
    x, y = feature_matrix(_samples(input_path, mode, feature_set))
    pipeline = fit_pipeline(
        spec,
        x,
        y,
        seed or 0,
        spec.build_params(_parse_mapping(params, "--params")),
        FeatureSet(feature_set),
    )
    with save.open("w", encoding="utf-8") as file:
        pipeline_to_file(pipeline, file)


@cli.command()
@click.option("--in", "input_path", type=existing_file, required=True, help="Match file.")
@click.option("--model-file", type=existing_file, required=True, help="Model file from train.")
@click.option("--out-dir", type=output_directory, required=True)
@mode_option
def evaluate(input_path: Path, model_file: Path, out_dir: Path, mode: str):
    """Evaluate a saved model on a match file."""
    pipeline = load_pipeline(model_file)
    x, y = feature_matrix(_samples(input_path, mode, pipeline.feature_set.value))
    metrics, cm, roc = evaluate_pipeline(pipeline, x, y)
    write_evaluation(pipeline.name or model_file.stem, metrics, cm, roc, out_dir)
    click.echo(f"accuracy\t{metrics.accuracy:.4f}\tf1\t{metrics.f1:.4f}\tauc\t{roc.auc:.4f}")


@cli.command()
@click.option("--in", "input_path", type=existing_file, required=True, help="Match file.")
@model_option
@click.option("--grid", type=existing_file, help="YAML mapping of parameter to values.")
@click.option("--k", type=click.IntRange(min=2), default=5, show_default=True)
@seed_option
@click.option("--cap", type=click.IntRange(min=1), default=DEFAULT_GRID_CAP, show_default=True)
@mode_option
@click.option("--out", type=output_file, help="Ranked table to write; stdout if absent.")
def gridsearch(
    input_path: Path,
    model: str,
    grid: Optional[Path],
    k: int,
    seed: Optional[int],
    cap: int,
    mode: str,
    out: Optional[Path],
):
    """Cross-validate a hyperparameter grid; the curated grid of the model if none is given."""
    if grid is not None:
        values = load_yaml(grid)
        if not isinstance(values, dict):
            raise InputValidationError(f"{grid} must hold a mapping of parameter to values")
    else:
        values = load_curated_grids().get(model)
        if not values:
            raise InputValidationError(f"no curated grid for {model}, pass --grid")
    results = grid_search(
        get_preset(model), values, _samples(input_path, mode), k, seed or 0, cap=cap, progress=True
    )
    if out is None:
        table_to_file(GRID_FIELDS, grid_rows(results), sys.stdout)
    else:
        with out.open("w", encoding="utf-8", newline="") as file:
            table_to_file(GRID_FIELDS, grid_rows(results), file)


def experiment_options(command):
    """Options shared by the experiment commands."""
    options = [
        click.option("--config", type=existing_file, help="Experiment configuration (YAML)."),
        input_option,
        click.option("--out-dir", type=output_directory, required=True),
        seed_option,
        click.option("--k", type=click.IntRange(min=2), help="Number of folds."),
        click.option("--test-seeds", help="Comma-separated seeds of the reported test splits."),
        click.option("--model", "models", multiple=True, help="Model preset; repeatable."),
        click.option("--progress/--no-progress", default=False, help="Show progress bars."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _config(
    config: Optional[Path],
    input_path: Optional[Path],
    seed: Optional[int],
    k: Optional[int],
    test_seeds: Optional[str],
    models: Sequence[str],
):
    return load_experiment_config(
        config,
        {
            "input": input_path,
            "seed": seed,
            "k": k,
            "test_seeds": _parse_seeds(test_seeds),
            "models": list(models) or None,
        },
    )


def _echo_results(models) -> None:
    for model in models:
        click.echo(
            f"{model.name}\tval {model.cv.mean.accuracy:.4f} +- {model.cv.standard_error.accuracy:.4f}"
            f"\ttest {model.test.accuracy:.4f}"
        )


@cli.command()
@experiment_options
def experiment(config, input_path, out_dir, seed, k, test_seeds, models, progress):
    """Compare models on one split per test seed and write the result tables."""
    cfg = _config(config, input_path, seed, k, test_seeds, models)
    for report in run_experiment(cfg, out_dir, progress):
        click.echo(f"# test seed {report.test_seed}")
        _echo_results(report.models)


@cli.command()
@experiment_options
def ablate(config, input_path, out_dir, seed, k, test_seeds, models, progress):
    """Compare every model with and without the derived features."""
    cfg = _config(config, input_path, seed, k, test_seeds, models)
    report = run_ablation(cfg, out_dir, progress)
    for full, reduced in zip(report.full.models, report.without_derived.models):
        click.echo(
            f"{full.name}\tfull {full.cv.mean.accuracy:.4f}\twithout {reduced.cv.mean.accuracy:.4f}"
        )


@cli.command()
@experiment_options
def prematch(config, input_path, out_dir, seed, k, test_seeds, models, progress):
    """Predict from the players' other matches only."""
    cfg = _config(config, input_path, seed, k, test_seeds, models)
    _echo_results(run_prematch(cfg, out_dir, progress).models)


def _exit_code(error: BaseException) -> int:
    if isinstance(error, StageError):
        return _exit_code(error.cause)
    if isinstance(error, (click.ClickException, ValidationError)):
        return 1
    if isinstance(error, TTPredictError):
        return error.exit_code
    return 2


def main(args: Optional[Sequence[str]] = None) -> None:
    """
    Run the command line.

    Exits with 0 on success, 1 for invalid input or usage, 2 for any other failure.

    :param args: arguments, ``sys.argv[1:]`` if None
    """
    try:
        cli.main(args=list(args) if args is not None else None, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except click.ClickException as e:
        e.show()
        sys.exit(1)
    except (ValidationError, TTPredictError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(_exit_code(e))
    except Exception as e:
        logger.exception("unexpected failure")
        click.echo(f"error: {e!r}", err=True)
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
