"""Experiment configuration: a strict JSON schema with defaults."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .play_engine import BeliefPolicy
from .signal_model import GaussianModel, QuadratureSettings


@dataclass(frozen=True)
class ModelConfig:
    sigma0: float = 1.0
    sigma_a: float = 1.0
    sigma_b: float = 1.0


@dataclass(frozen=True)
class DiscountConfig:
    delta_a: float = 0.9
    delta_b: float = 0.9


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 200
    tail_mass_cutoff: float = 1e-12


@dataclass(frozen=True)
class TypeGridConfig:
    points: int = 41
    width_sd: float = 3.0


@dataclass(frozen=True)
class EpsilonConfig:
    high: float = 1e-1
    low: float = 1e-6
    ratio: float = 10.0


@dataclass(frozen=True)
class AggregationConfig:
    points: int = 200
    width_sd: float = 3.0
    exclude_band: float = 1e-3
    horizon: int = 200
    factors: tuple[float, ...] = (0.5, 2.0)
    history: tuple[tuple[int, int], ...] = ((-1, 1),)


@dataclass(frozen=True)
class SimulateConfig:
    s_a: float = -0.1
    s_b: float = 2.0


@dataclass(frozen=True)
class OracleConfig:
    draws: int = 200_000
    s_own: float = 0.7
    horizon: int = 20
    quadrature_pairs: int = 200


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    discount: DiscountConfig = field(default_factory=DiscountConfig)
    horizon: int = 60
    policies: tuple[str, ...] = ("inertia", "reset")
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    root_tol: float = 1e-9
    symmetry_tol: float = 0.0
    gap_tol: float = 1e-7
    type_grid: TypeGridConfig = field(default_factory=TypeGridConfig)
    context_depth: int = 10
    indifference_band: float = 1e-3
    epsilon: EpsilonConfig = field(default_factory=EpsilonConfig)
    asymmetric_horizon: int | None = None
    max_iterations: int = 10_000
    aggregation: AggregationConfig = field(default_factory=AggregationConfig)
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self) -> None:
        validate(self)

    @property
    def gaussian_model(self) -> GaussianModel:
        return GaussianModel(self.model.sigma0, self.model.sigma_a, self.model.sigma_b)

    @property
    def quadrature_settings(self) -> QuadratureSettings:
        return QuadratureSettings(**dataclasses.asdict(self.quadrature))

    @property
    def belief_policies(self) -> tuple[BeliefPolicy, ...]:
        return tuple(BeliefPolicy(p) for p in self.policies)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be positive and finite, got {value!r}")


def _positive_int(name: str, value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")


def validate(cfg: ExperimentConfig) -> None:
    for name in ("sigma0", "sigma_a", "sigma_b"):
        _positive(f"model.{name}", getattr(cfg.model, name))
    for name in ("delta_a", "delta_b"):
        value = getattr(cfg.discount, name)
        if not (isinstance(value, (int, float)) and 0.0 < value < 1.0):
            raise ConfigError(f"discount.{name} must lie in (0, 1), got {value!r}")
    _positive_int("horizon", cfg.horizon)
    if not cfg.policies or any(p not in [b.value for b in BeliefPolicy] for p in cfg.policies):
        raise ConfigError(f"policies must be a non-empty subset of inertia/reset, got {cfg.policies!r}")
    try:
        QuadratureSettings(**dataclasses.asdict(cfg.quadrature))
    except ValueError as exc:
        raise ConfigError(f"quadrature: {exc}") from exc
    for name in ("root_tol", "gap_tol", "indifference_band"):
        _positive(name, getattr(cfg, name))
    if not (isinstance(cfg.symmetry_tol, (int, float)) and cfg.symmetry_tol >= 0):
        raise ConfigError("symmetry_tol must be nonnegative")
    _positive_int("type_grid.points", cfg.type_grid.points)
    _positive("type_grid.width_sd", cfg.type_grid.width_sd)
    if isinstance(cfg.context_depth, bool) or not isinstance(cfg.context_depth, int) or cfg.context_depth < 0:
        raise ConfigError("context_depth must be a nonnegative integer")
    _positive("epsilon.high", cfg.epsilon.high)
    _positive("epsilon.low", cfg.epsilon.low)
    if not (cfg.epsilon.low <= cfg.epsilon.high and cfg.epsilon.ratio > 1):
        raise ConfigError("epsilon needs low <= high and ratio > 1")
    if cfg.asymmetric_horizon is not None:
        _positive_int("asymmetric_horizon", cfg.asymmetric_horizon)
    _positive_int("max_iterations", cfg.max_iterations)
    agg = cfg.aggregation
    _positive_int("aggregation.points", agg.points)
    _positive("aggregation.width_sd", agg.width_sd)
    _positive("aggregation.exclude_band", agg.exclude_band)
    _positive_int("aggregation.horizon", agg.horizon)
    for f in agg.factors:
        _positive("aggregation.factors[]", f)
    for move in agg.history:
        if len(move) != 2 or any(z not in (-1, 1) for z in move):
            raise ConfigError(f"aggregation.history moves must be pairs of +-1, got {move!r}")
    for name in ("s_a", "s_b"):
        value = getattr(cfg.simulate, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value)):
            raise ConfigError(f"simulate.{name} must be finite")
    _positive_int("oracle.draws", cfg.oracle.draws)
    _positive_int("oracle.horizon", cfg.oracle.horizon)
    _positive_int("oracle.quadrature_pairs", cfg.oracle.quadrature_pairs)
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'} must be a JSON object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        sub = fields[name].default_factory if fields[name].default_factory is not dataclasses.MISSING else None
        path = f"{where}.{name}" if where else name
        if sub is not None and dataclasses.is_dataclass(sub):
            kwargs[name] = _build(sub, value, path)
        elif isinstance(value, list):
            kwargs[name] = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        else:
            kwargs[name] = value
    return cls(**kwargs) if cls is not ExperimentConfig else kwargs


def config_from_dict(data: dict) -> ExperimentConfig:
    kwargs = _build(ExperimentConfig, data, "")
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path | None) -> tuple[ExperimentConfig, str]:
    """Parse and validate a config file; returns it with the sha256 of its bytes."""
    if path is None:
        raw = b"{}"
    else:
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data), hashlib.sha256(raw).hexdigest()
