"""Top-level pipeline config file: ``{sampler, tolerances, gripper, training, paths, seed}``."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from .collision import GripperModel
from .config import Tolerances, from_dict
from .errors import SchemaError
from .sampling import SamplerConfig


@dataclass(frozen=True)
class TrainingConfig:
    sigma: float = 2.0
    r: int = 55
    out_size: int = 112


@dataclass(frozen=True)
class Paths:
    mesh: Optional[str] = None
    scene: Optional[str] = None
    grasps: Optional[str] = None
    anno: Optional[str] = None
    rgb: Optional[str] = None
    depth: Optional[str] = None
    out: Optional[str] = None


@dataclass(frozen=True)
class PipelineConfig:
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    gripper: GripperModel = field(default_factory=GripperModel)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    paths: Paths = field(default_factory=Paths)
    seed: Optional[int] = None

    @classmethod
    def from_dict(cls, data: dict | None) -> "PipelineConfig":
        data = {} if data is None else data
        if not isinstance(data, dict):
            raise SchemaError("config must be a JSON object")
        known = {"sampler", "tolerances", "gripper", "training", "paths", "seed"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SchemaError(f"config: unknown keys {unknown}")
        seed = data.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64):
            raise SchemaError("config.seed must be a 64-bit unsigned integer")
        paths = data.get("paths", {})
        if not isinstance(paths, dict) or set(paths) - {f.name for f in dataclasses.fields(Paths)}:
            raise SchemaError("config.paths: unknown keys")
        if any(v is not None and not isinstance(v, str) for v in paths.values()):
            raise SchemaError("config.paths values must be strings")
        return cls(
            sampler=from_dict(SamplerConfig, data.get("sampler"), "config.sampler"),
            tolerances=from_dict(Tolerances, data.get("tolerances"), "config.tolerances"),
            gripper=from_dict(GripperModel, data.get("gripper"), "config.gripper"),
            training=from_dict(TrainingConfig, data.get("training"), "config.training"),
            paths=Paths(**paths),
            seed=seed,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
