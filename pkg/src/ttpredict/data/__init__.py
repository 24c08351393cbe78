from pathlib import Path
from typing import Mapping

__all__ = [
    "data_path",
    "config_paths",
]

data_path = Path(__file__).parent

#: A mapping from packaged configuration names to their paths
config_paths: Mapping[str, Path] = {path.stem: path for path in data_path.glob("*.yaml")}
