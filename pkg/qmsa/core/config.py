"""Configuration management using Pydantic Settings."""

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from qmsa.core.errors import InvalidInputError

logger = logging.getLogger(__name__)

ENV_FILES = [".env", "../.env", "~/.qmsa/.env"]


class PenaltyConfig(BaseSettings):
    """Penalty weights for the three hard-constraint families."""

    p1: float = Field(10.0, ge=0, description="exactly one column per letter")
    p2: float = Field(1.0, ge=0, description="at most one letter per row and column")
    p3: float = Field(1.0, ge=0, description="letter order preserved")

    model_config = SettingsConfigDict(env_prefix="QMSA_PENALTY_")

    @model_validator(mode="after")
    def _warn_disabled(self) -> "PenaltyConfig":
        for name in ("p1", "p2", "p3"):
            if getattr(self, name) == 0:
                logger.warning(f"Penalty {name} is 0: that constraint family is disabled")
        return self

    @property
    def minimum(self) -> float:
        return min(self.p1, self.p2, self.p3)


class OptimizerConfig(BaseSettings):
    """Classical outer-loop configuration."""

    method: Literal["COBYLA", "Nelder-Mead", "Powell"] = "COBYLA"
    max_evaluations: int = Field(500, ge=1)
    starts: int = Field(10, ge=1)
    beta_range: Tuple[float, float] = (0.0, math.pi)
    gamma_range: Tuple[float, float] = (0.0, 2 * math.pi)
    tolerance: float = Field(1e-6, gt=0)
    rhobeg: float = Field(0.5, gt=0)
    # Random candidates drawn per random start; the best `starts` of them are refined.
    screening: int = Field(20, ge=1)
    # Annealing-ramp starts, one per time step; cost angles scale with the energy spread.
    ramp_steps: Tuple[float, ...] = (0.4, 0.8, 1.6)
    # Local minima of the previous depth carried into the next one.
    beam: int = Field(3, ge=1)
    polish: bool = True
    seed: int = Field(1234, ge=0)
    objective: Literal["exact", "shots"] = "exact"
    objective_shots: int = Field(1000, ge=1)

    model_config = SettingsConfigDict(env_prefix="QMSA_OPTIMIZER_")

    @field_validator("beta_range", "gamma_range")
    @classmethod
    def _ordered(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] >= value[1]:
            raise ValueError(f"empty angle interval {value}")
        return value


class SimulationConfig(BaseSettings):
    """Statevector and enumeration limits."""

    max_qubits: int = Field(24, ge=1)
    enumeration_cap: int = Field(10**6, ge=1)
    shots: int = Field(5000, ge=1)
    top_k: int = Field(10, ge=1)
    # Results never depend on the thread count, so it is left out of provenance.
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1, exclude=True)

    model_config = SettingsConfigDict(env_prefix="QMSA_")


class OutputConfig(BaseSettings):
    """Where and how results are written."""

    # Not part of provenance: the same run may be replayed into another directory.
    out_dir: str = Field("results", exclude=True)
    formats: List[Literal["json", "csv"]] = ["json", "csv"]

    model_config = SettingsConfigDict(env_prefix="QMSA_OUTPUT_")


class Config(BaseSettings):
    """Main configuration object."""

    penalties: PenaltyConfig = Field(default_factory=PenaltyConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    model_config = SettingsConfigDict(
        env_prefix="QMSA_",
        env_file=ENV_FILES,
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        env_nested_delimiter="__",
    )


class RunConfig(BaseModel):
    """Validated description of one CLI run, embedded in every output file."""

    sequences: List[str] = []
    names: List[str] = []
    fasta: Optional[str] = None
    lengths: List[int] = []
    width: Optional[int] = None
    p_values: List[int] = [1]
    scoring_file: Optional[str] = None
    penalties: PenaltyConfig = Field(default_factory=PenaltyConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @field_validator("p_values")
    @classmethod
    def _positive_layers(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one layer count is required")
        if any(p < 1 for p in value):
            raise ValueError(f"layer counts must be >= 1, got {value}")
        return value

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``override`` into a copy of ``base``."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigLoader:
    """Loads YAML/JSON config files and builds validated run configurations."""

    @staticmethod
    def _environment_defaults() -> Dict[str, Any]:
        """Settings from the environment, including fields left out of provenance."""
        env = Config()
        base = env.model_dump()
        base["simulation"]["threads"] = env.simulation.threads
        base["output"]["out_dir"] = env.output.out_dir
        return base

    @classmethod
    def load_raw(cls, config_path: Optional[str] = None) -> Dict[str, Any]:
        """Read a config file into a plain dict.

        Result files written by the CLI are accepted too: their embedded
        ``run_config`` block is returned.
        """
        if not config_path:
            return {}
        path = Path(config_path).expanduser()
        if not path.exists():
            raise InvalidInputError(f"Config file not found: {config_path}")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as e:
            raise InvalidInputError(f"Could not parse config file {config_path}: {e}")
        if not isinstance(data, dict):
            raise InvalidInputError(f"Config file {config_path} must contain a mapping")
        if "run_config" in data:
            data = data["run_config"]
        return data

    @classmethod
    def load(cls, config_path: Optional[str] = None) -> Config:
        """Load the settings sections, file values over environment defaults."""
        raw = cls.load_raw(config_path)
        sections = {k: v for k, v in raw.items() if k in Config.model_fields}
        base = cls._environment_defaults()
        try:
            return Config.model_validate(deep_merge(base, sections))
        except ValidationError as e:
            raise InvalidInputError(f"Invalid configuration: {e}")

    @classmethod
    def build_run_config(
        cls,
        config_path: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> RunConfig:
        """Environment defaults, then the config file, then CLI flag overrides."""
        raw = cls.load_raw(config_path)
        base = cls._environment_defaults()
        merged = deep_merge(deep_merge(base, raw), overrides or {})
        try:
            return RunConfig.model_validate(merged)
        except ValidationError as e:
            raise InvalidInputError(f"Invalid run configuration: {e}")


def dump_json(data: Any) -> str:
    """Canonical JSON used for every output file."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
