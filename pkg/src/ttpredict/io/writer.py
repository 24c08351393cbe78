"""Writers for match files, feature matrices, model files and report tables."""

import json
from csv import DictWriter
from typing import Any, Dict, Iterable, List, Mapping, Sequence, TextIO

from ttpredict.datamodel.features import FEATURE_NAMES, LabeledSample
from ttpredict.datamodel.match import MatchRecord, Rally, Side
from ttpredict.models.pipeline import FittedPipeline

__all__ = [
    "RESULTS_FIELDS",
    "CONFUSION_FIELDS",
    "EVALUATION_FIELDS",
    "ROC_FIELDS",
    "IMPORTANCE_FIELDS",
    "ABLATION_FIELDS",
    "LEARNING_CURVE_FIELDS",
    "GRID_FIELDS",
    "SAMPLE_FIELDS",
    "format_value",
    "match_to_obj",
    "matches_to_file",
    "samples_to_file",
    "table_to_file",
    "pipeline_to_file",
]

RESULTS_FIELDS = ["model", "acc_val", "acc_val_se", "f1_val", "f1_val_se", "acc_test", "f1_test"]
EVALUATION_FIELDS = ["model", "accuracy", "precision", "recall", "f1", "auc"]
CONFUSION_FIELDS = ["model", "tp", "tn", "fp", "fn"]
ROC_FIELDS = ["model", "fpr", "tpr"]
IMPORTANCE_FIELDS = ["model", "feature", "importance"]
ABLATION_FIELDS = ["model", "acc_full", "f1_full", "acc_without", "f1_without"]
LEARNING_CURVE_FIELDS = ["model", "fraction", "n_train", "acc_val", "acc_val_se", "f1_val", "f1_val_se"]
GRID_FIELDS = ["rank", "params", "acc_val", "acc_val_se", "f1_val", "f1_val_se"]
SAMPLE_FIELDS = ["match_id", "perspective", "label", *FEATURE_NAMES]


def format_value(value: Any) -> Any:
    """Floats with 9 significant digits; everything else unchanged."""
    if isinstance(value, float):
        return f"{value:.9g}"
    return value


def _rally_to_obj(rally: Rally) -> Dict[str, Any]:
    return {
        "set": rally.set_number,
        "server": rally.server.value,
        "bounces": [
            {
                "kind": bounce.kind.value,
                "side": bounce.side.value,
                "x": bounce.x,
                "y": bounce.y,
                "stroke": None if bounce.stroke is None else bounce.stroke.value,
            }
            for bounce in rally.bounces
        ],
    }


def match_to_obj(match: MatchRecord) -> Dict[str, Any]:
    obj = {
        "match_id": match.match_id,
        "players": {
            side.value: {"id": match.player_id(side), "rank": match.rank(side)} for side in Side
        },
        "winner": match.winner.value,
        "rallies": [_rally_to_obj(rally) for rally in match.rallies],
    }
    if not match.complete:
        obj["complete"] = False
    return obj


def matches_to_file(matches: Iterable[MatchRecord], file: TextIO) -> None:
    """
    Write matches in the JSON match file format read by
    :func:`ttpredict.io.parser.parse_matches`.

    :param matches:
    :param file:
    :return:
    """
    json.dump([match_to_obj(match) for match in matches], file, indent=1)
    file.write("\n")


def table_to_file(field_names: Sequence[str], rows: Iterable[Mapping[str, Any]], file: TextIO) -> None:
    """
    Write rows as CSV with a header line.

    :param field_names: columns, in order
    :param rows: one mapping per row; floats are written with 9 significant digits
    :param file:
    :return:
    """
    writer = DictWriter(file, fieldnames=list(field_names), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: format_value(value) for key, value in row.items()})


def samples_to_file(samples: Iterable[LabeledSample], file: TextIO) -> None:
    """
    Write the feature matrix, one row per sample with all twelve features.

    :param samples:
    :param file:
    :return:
    """
    rows: List[Dict[str, Any]] = []
    for sample in samples:
        row = {
            "match_id": sample.match_id,
            "perspective": sample.perspective.value,
            "label": sample.label,
        }
        row.update({name: float(getattr(sample.raw, name)) for name in FEATURE_NAMES})
        rows.append(row)
    table_to_file(SAMPLE_FIELDS, rows, file)


def pipeline_to_file(pipeline: FittedPipeline, file: TextIO) -> None:
    json.dump(pipeline.to_dict(), file, indent=1)
    file.write("\n")
