"""Readers for match files, model files and YAML configuration."""

import json
import logging
from pathlib import Path
from typing import IO, Any, Dict, List, Mapping, Optional, Union

import yaml
from pydantic import ValidationError

from ttpredict.data import data_path
from ttpredict.datamodel.match import BounceEvent, BounceKind, MatchRecord, Rally, Side, Stroke
from ttpredict.errors import DomainError, InputValidationError, MatchParseError, MatchValidationError
from ttpredict.experiments.config import ExperimentConfig
from ttpredict.ingest.ingest_synth import SynthConfig
from ttpredict.models.pipeline import FittedPipeline

__all__ = [
    "parse_matches",
    "load_matches",
    "load_yaml",
    "load_synth_config",
    "load_experiment_config",
    "load_curated_grids",
    "load_pipeline",
]

logger = logging.getLogger(__name__)

Source = Union[str, bytes, IO]


def _read(source: Source) -> str:
    content = source.read() if hasattr(source, "read") else source
    if isinstance(content, bytes):
        try:
            return content.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MatchParseError(f"input is not UTF-8: {e}") from e
    return content


def _require(obj: Any, key: str, record: int, where: str) -> Any:
    if not isinstance(obj, dict):
        raise MatchParseError(f"{where} must be an object", record=record)
    if key not in obj:
        raise MatchParseError(f"{where} lacks required key '{key}'", record=record)
    return obj[key]


def _enum(cls, value: Any, record: int, where: str):
    try:
        return cls(value)
    except (TypeError, ValueError):
        allowed = ", ".join(repr(member.value) for member in cls)
        raise MatchParseError(f"{where}: {value!r} is not one of {allowed}", record=record)


def _number(value: Any, record: int, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MatchParseError(f"{where}: {value!r} is not a number", record=record)
    return float(value)


def _integer(value: Any, record: int, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise MatchParseError(f"{where}: {value!r} is not an integer", record=record)
    return value


def _boolean(value: Any, record: int, where: str) -> bool:
    if not isinstance(value, bool):
        raise MatchParseError(f"{where}: {value!r} is not a boolean", record=record)
    return value


def _string(value: Any, record: int, where: str) -> str:
    if not isinstance(value, str):
        raise MatchParseError(f"{where}: {value!r} is not a string", record=record)
    return value


def _list(value: Any, record: int, where: str) -> list:
    if not isinstance(value, list):
        raise MatchParseError(f"{where} must be a list", record=record)
    return value


def _bounce(obj: Any, record: int, where: str) -> BounceEvent:
    # "stroke" is optional: serves and errors of most feeds carry none, absent reads as null
    stroke = obj.get("stroke") if isinstance(obj, dict) else None
    return BounceEvent(
        kind=_enum(BounceKind, _require(obj, "kind", record, where), record, where),
        side=_enum(Side, _require(obj, "side", record, where), record, where),
        x=_number(_require(obj, "x", record, where), record, f"{where}.x"),
        y=_number(_require(obj, "y", record, where), record, f"{where}.y"),
        stroke=None if stroke is None else _enum(Stroke, stroke, record, where),
    )


def _rally(obj: Any, record: int, where: str) -> Rally:
    bounces = _list(_require(obj, "bounces", record, where), record, f"{where}.bounces")
    return Rally(
        set_number=_integer(_require(obj, "set", record, where), record, f"{where}.set"),
        server=_enum(Side, _require(obj, "server", record, where), record, where),
        bounces=tuple(
            _bounce(bounce, record, f"{where}.bounces[{index}]")
            for index, bounce in enumerate(bounces)
        ),
    )


def _player(players: Any, side: Side, record: int) -> Dict[str, Any]:
    obj = _require(players, side.value, record, "players")
    where = f"players.{side.value}"
    rank = _require(obj, "rank", record, where)
    return {
        "id": _string(_require(obj, "id", record, where), record, f"{where}.id"),
        "rank": None if rank is None else _integer(rank, record, f"{where}.rank"),
    }


def match_from_obj(obj: Any, record: int = 0) -> MatchRecord:
    """
    Build a match from its JSON object and check its invariants.

    Unknown keys are ignored. The optional keys are a bounce's ``stroke`` (default null) and the
    match's ``complete`` (default true, false when the feed lost rallies).

    :param obj: decoded JSON object
    :param record: index of the object in its file, for error messages
    :return: the match
    :raises MatchParseError: for a missing key or a value of the wrong type
    :raises MatchValidationError: for a match violating an invariant
    """
    players = _require(obj, "players", record, "match")
    a, b = _player(players, Side.a, record), _player(players, Side.b, record)
    rallies = _list(_require(obj, "rallies", record, "match"), record, "rallies")
    match = MatchRecord(
        match_id=_string(_require(obj, "match_id", record, "match"), record, "match_id"),
        player_a_id=a["id"],
        player_b_id=b["id"],
        rank_a=a["rank"],
        rank_b=b["rank"],
        rallies=tuple(
            _rally(rally, record, f"rallies[{index}]") for index, rally in enumerate(rallies)
        ),
        winner=_enum(Side, _require(obj, "winner", record, "match"), record, "winner"),
        complete=_boolean(obj.get("complete", True), record, "complete"),
    )
    messages = match.validate()
    if messages:
        raise MatchValidationError(match.match_id, "; ".join(messages))
    for rally_index, message in match.rally_errors():
        raise MatchValidationError(match.match_id, message, rally_index=rally_index)
    return match


def parse_matches(source: Source) -> List[MatchRecord]:
    """
    Parse a match file.

    The file is a JSON list of match objects. Every returned match satisfies the invariants of
    its types; whether it is usable for training is decided by :func:`validate_match`.

    :param source: text, bytes, or a text or binary stream
    :return: matches in file order
    :raises MatchParseError: on malformed JSON (with its line) or a malformed record (with its
        index)
    :raises MatchValidationError: naming the match and rally that violate an invariant
    """
    text = _read(source)
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise MatchParseError(e.msg, line=e.lineno) from e
    if not isinstance(document, list):
        raise MatchParseError("top level of a match file must be a list")
    return [match_from_obj(obj, record) for record, obj in enumerate(document)]


def load_matches(path: Union[str, Path]) -> List[MatchRecord]:
    with open(path, "rb") as file:
        matches = parse_matches(file)
    logger.info(f"loaded {len(matches)} matches from {path}")
    return matches


def load_yaml(path: Union[str, Path]) -> Any:
    """
    Load a YAML document.

    :param path:
    :return: the decoded document, ``{}`` for an empty file
    """
    try:
        with open(path, encoding="utf-8") as file:
            document = yaml.safe_load(file)
    except yaml.YAMLError as e:
        raise InputValidationError(f"{path} is not valid YAML: {e}") from e
    return {} if document is None else document


def _load_mapping(path: Union[str, Path]) -> Dict[str, Any]:
    document = load_yaml(path)
    if not isinstance(document, dict):
        raise InputValidationError(f"{path} must hold a mapping of configuration keys")
    return document


def load_synth_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None
) -> SynthConfig:
    """
    Load a generator configuration.

    Values come from ``overrides``, then the file, then the packaged ``synth.default.yaml``.

    :param path: YAML file, or None for the packaged default only
    :param overrides: values taking precedence over the file
    :return: validated configuration
    """
    values = _load_mapping(data_path / "synth.default.yaml")
    if path is not None:
        values.update(_load_mapping(path))
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    return SynthConfig.model_validate(values)


def load_experiment_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None
) -> ExperimentConfig:
    """
    Load an experiment configuration.

    Values come from ``overrides``, then the file, then the packaged
    ``experiment.default.yaml``. A relative ``input`` path is resolved against the directory of
    the file naming it.

    :param path: YAML file, or None for the packaged default only
    :param overrides: values taking precedence over the file; None values are ignored
    :return: validated configuration
    """
    values = _load_mapping(data_path / "experiment.default.yaml")
    if path is not None:
        document = _load_mapping(path)
        if document.get("input") is not None:
            document["input"] = str(Path(path).parent / document["input"])
        values.update(document)
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    return ExperimentConfig.model_validate(values)


def load_curated_grids() -> Dict[str, Dict[str, List[Any]]]:
    """Curated hyperparameter grids keyed by model name."""
    return load_yaml(data_path / "grids.curated.yaml")


def load_pipeline(path: Union[str, Path]) -> FittedPipeline:
    """
    Load a model file written by :func:`ttpredict.io.writer.pipeline_to_file`.

    :param path:
    :return: the fitted pipeline
    """
    try:
        with open(path, encoding="utf-8") as file:
            return FittedPipeline.from_dict(json.load(file))
    except json.JSONDecodeError as e:
        raise InputValidationError(f"{path} is not a model file: {e.msg} at line {e.lineno}")
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, (ValidationError, InputValidationError)):
            raise
        raise DomainError(f"{path} is not a model file: {e!r}") from e
