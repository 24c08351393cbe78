from .datamodel.features import FeatureMode, FeatureSet, LabeledSample, build_samples
from .datamodel.match import BounceEvent, MatchRecord, Rally, validate_match
from .experiments.config import ExperimentConfig
from .experiments.runner import run_ablation, run_experiment, run_prematch
from .ingest.ingest_synth import SynthConfig, bayes_accuracy, synth_generate
from .io.parser import load_experiment_config, load_matches, parse_matches

try:
    from importlib.metadata import version
except ImportError:  # for Python<3.8
    from importlib_metadata import version

__all__ = [
    "parse_matches",
    "load_matches",
    "load_experiment_config",
    "run_experiment",
    "run_ablation",
    "run_prematch",
    "MatchRecord",
    "Rally",
    "BounceEvent",
    "validate_match",
    "LabeledSample",
    "FeatureMode",
    "FeatureSet",
    "build_samples",
    "ExperimentConfig",
    "SynthConfig",
    "synth_generate",
    "bayes_accuracy",
]
__version__ = version(__name__)
