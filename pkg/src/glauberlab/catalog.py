"""Model specs shipped with the package, addressable by name."""

from __future__ import annotations

from importlib import resources

from .modelfile import ModelSpec, parse_model_spec
from .models import GibbsMeasure

_DIR = "shipped"


def shipped_model_names() -> list[str]:
    root = resources.files(__package__) / _DIR
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def shipped_spec(name: str) -> ModelSpec:
    path = resources.files(__package__) / _DIR / f"{name}.yaml"
    if not path.is_file():
        raise KeyError(f"no shipped model named {name!r}; have {shipped_model_names()}")
    return parse_model_spec(path.read_text(), f"{name}.yaml")


def shipped_model(name: str) -> GibbsMeasure:
    return shipped_spec(name).build()


def shipped_spec_path(name: str):
    """Filesystem path of a shipped spec, for the command line."""
    return resources.files(__package__) / _DIR / f"{name}.yaml"
