"""Run configuration: defaults, ``key=value`` files and overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .classify import DEFAULT_RIDGE
from .corpus import FORMATS
from .evaluate import DEFAULT_GRID_STEP, EvalConfig, lambda_grid
from .features import resolve_feature_set

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    input: str | None = None
    format: str = "jsonl"
    alias: str = "all"
    features: str = "default"
    kappa: int = 5
    m: float = 2.0
    grid_step: float = DEFAULT_GRID_STEP
    folds: int = 10
    threshold: float = 0.9
    ridge: float = DEFAULT_RIDGE
    seed: int = 0
    out: str = "out"
    weighted: bool = False
    keep_intermediates: bool = False

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        resolve_feature_set(self.features)
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.m <= 1:
            raise ValueError("m must be > 1")
        lambda_grid(self.grid_step)
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")

    @classmethod
    def from_layers(cls, *layers: Mapping[str, Any]) -> "RunConfig":
        """Merge mappings left to right (later wins), coercing string values."""
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        merged: dict[str, Any] = {}
        for layer in layers:
            for key, value in layer.items():
                key = key.replace("-", "_")
                if key not in types:
                    raise ValueError(f"unknown configuration key {key!r}")
                if value is not None:
                    merged[key] = _coerce(key, types[key], value)
        return cls(**merged)

    def eval_config(self) -> EvalConfig:
        return EvalConfig(
            kappa=self.kappa,
            m=self.m,
            ridge=self.ridge,
            n_folds=self.folds,
            topo_fields=resolve_feature_set(self.features),
            weighted=self.weighted,
        )

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(key: str, annotation: str, value: Any) -> Any:
    if not isinstance(value, str):
        return value
    text = value.strip()
    try:
        if annotation == "bool":
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError
        if annotation == "int":
            return int(text)
        if annotation == "float":
            return float(text)
    except ValueError:
        raise ValueError(f"invalid value {value!r} for {key}") from None
    return text


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values
