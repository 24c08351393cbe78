"""Configuration of experiment runs."""

from pathlib import Path
from typing import Any, List, Optional

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, field_validator, model_validator

from ttpredict.datamodel.features import DEFAULT_MISSING_STROKE_THRESHOLD, FeatureMode, FeatureSet
from ttpredict.evaluation.search import DEFAULT_GRID_CAP
from ttpredict.ingest.ingest_synth import SynthConfig
from ttpredict.models.registry import PRESETS, ModelSpec

__all__ = [
    "ExperimentConfig",
    "DEFAULT_MODELS",
]

DEFAULT_MODELS = ["logreg", "forest", "svm_linear", "mlp", "baseline"]


class ExperimentConfig(BaseModel):
    """
    What to run: the data source, the models, and the evaluation protocol.

    Models are given as preset names or as full model entries. A preset name may be followed by
    overrides, e.g. ``{name: svm_rbf, params: {c: 1.0}}`` keeps the preset's other values.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    input: Optional[Path] = None
    """Match file; when absent, matches are generated from :attr:`synth`."""

    synth: SynthConfig = SynthConfig()
    models: List[ModelSpec] = Field(default_factory=lambda: [PRESETS[n] for n in DEFAULT_MODELS])
    k: int = Field(default=5, ge=2)
    seed: NonNegativeInt = 0
    test_seeds: List[NonNegativeInt] = Field(default_factory=list)
    """Seeds of the test splits to report; only :attr:`seed` when empty."""

    test_fraction: float = Field(default=0.1, gt=0.0, lt=1.0)
    feature_mode: FeatureMode = FeatureMode.per_match
    feature_set: FeatureSet = FeatureSet.full
    include_target: bool = False
    """Aggregate mode only: average over the target match as well."""

    missing_stroke_threshold: float = Field(default=DEFAULT_MISSING_STROKE_THRESHOLD, ge=0, le=1)
    stratify: bool = False
    tune: bool = True
    """Grid-search every model that has a grid."""

    curated_grids: bool = False
    """Give every model without a grid its packaged curated grid."""

    grid_cap: PositiveInt = DEFAULT_GRID_CAP
    learning_curve: List[float] = Field(default_factory=list)
    """Training fractions of the learning curve; no curve when empty."""

    @field_validator("models", mode="before")
    @classmethod
    def _expand_presets(cls, value: Any) -> Any:
        if not isinstance(value, list):
            return value
        expanded = []
        for entry in value:
            if isinstance(entry, str):
                entry = {"name": entry}
            if isinstance(entry, dict) and "family" not in entry and entry.get("name") in PRESETS:
                preset = PRESETS[entry["name"]]
                entry = {
                    "name": preset.name,
                    "family": preset.family,
                    "params": {**preset.params, **entry.get("params", {})},
                    "grid": entry.get("grid"),
                }
            expanded.append(entry)
        return expanded

    @field_validator("learning_curve")
    @classmethod
    def _fractions(cls, value: List[float]) -> List[float]:
        for fraction in value:
            if not 0.0 < fraction <= 1.0:
                raise ValueError(f"learning curve fraction {fraction} is not in (0, 1]")
        return value

    @model_validator(mode="after")
    def _unique_names(self) -> "ExperimentConfig":
        names = [model.name for model in self.models]
        if not names:
            raise ValueError("no models configured")
        if len(set(names)) != len(names):
            raise ValueError(f"model names must be unique, got {names}")
        return self

    @property
    def report_seeds(self) -> List[int]:
        return list(self.test_seeds) if self.test_seeds else [self.seed]
