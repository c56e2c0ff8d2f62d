"""Run configuration shared by all experiment pipelines and the CLI."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from importlib import resources
from typing import Optional

import jsonschema


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    a_sq: float = 0.15
    n_atoms: int = 100
    theta: float = 0.3 * math.pi
    scale: float = 1.5
    gamma_I: float = 1.0
    delta_min: float = -5.0
    delta_max: float = 15.0
    n_points: int = 2001
    refine: bool = True
    include_poles: bool = True
    resonance_factor: float = 10.0
    method: str = "eigen"
    substitution: str = "auto"
    triangular: str = "auto"
    grid_n: int = 41
    threads: int = 1
    seed: Optional[int] = None

    @property
    def grid_step(self) -> float:
        return (self.delta_max - self.delta_min) / (self.n_points - 1)

    def sweep_kwargs(self) -> dict:
        return dict(delta_min=self.delta_min, delta_max=self.delta_max, n_points=self.n_points,
                    refine=self.refine, include_poles=self.include_poles,
                    resonance_factor=self.resonance_factor)

    def replace(self, **changes) -> "ExperimentConfig":
        return ExperimentConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(data, config_schema())
        except jsonschema.ValidationError as exc:
            raise ConfigError(exc.message) from exc
        cfg = cls(**data)
        if not cfg.delta_min < cfg.delta_max:
            raise ConfigError("delta_min must be below delta_max")
        if not 0 < cfg.theta < math.pi:
            raise ConfigError("theta must lie in (0, pi)")
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)


def config_schema() -> dict:
    text = resources.files("impurity_decay").joinpath("config.schema.json").read_text()
    return json.loads(text)


CONFIG_KEYS = tuple(f.name for f in fields(ExperimentConfig))
