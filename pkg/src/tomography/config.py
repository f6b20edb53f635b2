"""Experiment configuration: one JSON document, unknown keys rejected."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .neural.adam import AdamConfig

KINDS = ("quadratic-sweep", "nn-sweep", "width-estimate", "affine-distance", "lottery", "ticket")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field path."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _geom(lo: float, hi: float, n: int) -> list[float]:
    return [float(x) for x in np.geomspace(lo, hi, n)]


def _lin(lo: float, hi: float, n: int) -> list[float]:
    return [round(float(x), 12) for x in np.linspace(lo, hi, n)]


class SpectrumParams(_Strict):
    kind: Literal["bimodal", "bulk"] = "bimodal"
    D: int = Field(100, ge=1)
    num_small: int = Field(50, ge=0)
    lambda_small: float = Field(0.01, gt=0)
    lambda_large: float = Field(10.0, gt=0)
    lambda_min: float = Field(1e-3, gt=0)
    lambda_max: float = Field(10.0, gt=0)

    @model_validator(mode="after")
    def _check(self):
        if self.num_small > self.D:
            raise ValueError("num_small must not exceed D")
        if self.lambda_min > self.lambda_max:
            raise ValueError("lambda_min must not exceed lambda_max")
        return self


class QuadraticParams(_Strict):
    spectrum: SpectrumParams = SpectrumParams()
    R: float = Field(1.0, gt=0)
    dims: Optional[list[int]] = None
    epsilons: list[float] = Field(default_factory=lambda: _geom(0.05, 5.0, 11), min_length=1)

    def dim_grid(self) -> list[int]:
        return self.dims if self.dims is not None else list(range(1, self.spectrum.D + 1))


class OptimizerParams(_Strict):
    learning_rate: float = Field(5e-2, gt=0)
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    eps: float = Field(1e-7, gt=0)
    batch_size: int = Field(128, ge=1)
    epochs: int = Field(3, ge=0)

    def to_adam(self) -> AdamConfig:
        return AdamConfig(**self.model_dump())


class DataParams(_Strict):
    source: Literal["blobs", "idx"] = "blobs"
    num_classes: int = Field(10, ge=2)
    samples_per_class: int = Field(200, ge=1)
    input_dim: int = Field(20, ge=1)
    separation: float = Field(4.0, ge=0)
    images: Optional[str] = None
    labels: Optional[str] = None
    limit: int = Field(2000, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if self.source == "idx" and (self.images is None or self.labels is None):
            raise ValueError("idx source needs both 'images' and 'labels' paths")
        return self


class NetworkParams(_Strict):
    data: DataParams = DataParams()
    hidden: list[int] = Field(default_factory=lambda: [256, 64], min_length=1)
    dims: list[int] = Field(default_factory=lambda: [2 ** i for i in range(10)], min_length=1)
    accuracy_thresholds: list[float] = Field(default_factory=lambda: _lin(0.1, 0.9, 17),
                                             min_length=1)
    loss_thresholds: list[float] = Field(default_factory=lambda: _geom(0.2, 2.5, 12),
                                         min_length=1)
    burn_in: list[int] = Field(default_factory=lambda: [0, 4, 8, 16], min_length=1)
    optimizer: OptimizerParams = OptimizerParams()
    full_optimizer: OptimizerParams = OptimizerParams(learning_rate=1e-2)
    eval_every: int = Field(1, ge=1)
    # nn-sweep: optional linearized-model sweep around a full-training optimum
    linearized: bool = False
    linearize_examples: int = Field(256, ge=1)
    linearize_max_bytes: int = Field(1 << 30, ge=1)
    # lottery
    trajectory_mode: Literal["deltas", "snapshots"] = "deltas"
    snapshot_every: int = Field(1, ge=1)
    rewind_step: int = Field(0, ge=0)
    compare_random: bool = True
    # ticket
    keep_fractions: list[float] = Field(
        default_factory=lambda: [1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001], min_length=1)
    pretrain_epochs: int = Field(2, ge=0)

    @model_validator(mode="after")
    def _check(self):
        if any(d < 0 for d in self.dims):
            raise ValueError("dims must be non-negative")
        if any(t < 0 for t in self.burn_in):
            raise ValueError("burn_in steps must be non-negative")
        if any(not 0 < f <= 1 for f in self.keep_fractions):
            raise ValueError("keep_fractions must lie in (0, 1]")
        return self


class WidthParams(_Strict):
    spectrum: SpectrumParams = SpectrumParams()
    R: float = Field(1.0, gt=0)
    epsilons: list[float] = Field(default_factory=lambda: _geom(1e-3, 10.0, 13), min_length=1)
    num_gaussians: int = Field(10_000, ge=2)


class AffineParams(_Strict):
    D: int = Field(100, ge=2)
    pairs: list[tuple[int, int]] = Field(
        default_factory=lambda: [(n, d) for n in (10, 30, 50) for d in (10, 20, 40)]
        + [(50, 50), (60, 50), (30, 80)], min_length=1)
    trials: int = Field(1000, ge=2)

    @model_validator(mode="after")
    def _check(self):
        for n, d in self.pairs:
            if not (0 <= n < self.D and 0 <= d <= self.D):
                raise ValueError(f"pair (n={n}, d={d}) outside 0 <= n < D, 0 <= d <= D")
        return self


class ExperimentConfig(_Strict):
    kind: Literal["quadratic-sweep", "nn-sweep", "width-estimate", "affine-distance",
                  "lottery", "ticket"]
    name: Optional[str] = None
    seed: int = Field(0, ge=0, lt=2 ** 64)
    runs: int = Field(10, ge=1)
    delta: float = Field(0.1, gt=0, lt=1)
    workers: int = Field(1, ge=1)
    out: Optional[str] = None
    svg: bool = False
    quadratic: QuadraticParams = QuadraticParams()
    network: NetworkParams = NetworkParams()
    width: WidthParams = WidthParams()
    affine: AffineParams = AffineParams()

    @property
    def experiment(self) -> str:
        return self.name or self.kind

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return parse_config({**self.model_dump(), **kw}) if kw else self


def _format_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{path}: {e['msg']}")
    return "; ".join(lines)


def parse_config(doc: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as err:
        raise ConfigError(_format_error(err)) from None


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON ({err.msg} at line {err.lineno})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(doc)
