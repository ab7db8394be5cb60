"""Scenario configuration.

A scenario is one YAML (or JSON) mapping. Every key is optional; unknown keys
are rejected. The raw text is kept so dataset manifests can embed it verbatim.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .curves import CURVE_TYPES, DEFAULT_SAMPLES
from .field import ConeField, PreManipulationField, SphericalField
from .reward import REWARD_MODES
from .rollout import CHUNK_SIZE, DEFAULT_BETA
from .so3 import rotation_exp

DIVERSITY_LEVELS = ("low", "middle", "high")


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    # field
    goal_position: list[float] = field(default_factory=lambda: [0.5, 0.0, 0.1])
    goal_orientation: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.5])
    cone_axis: list[float] = field(default_factory=lambda: [0.0, 0.0, 1.0])
    cone_half_angle_rad: float = float(np.pi / 6)
    k_r: float | str = "auto"
    gripper_close_dist_m: float = 0.01
    # curve and rollout
    curve_type: str = "cycloid"
    path_samples: int = DEFAULT_SAMPLES
    beta_m: float = DEFAULT_BETA
    chunk_size: int = CHUNK_SIZE
    chunk_stride: int = CHUNK_SIZE
    # reward
    reward_mode: str = "off"
    reward_sphere_radius_m: float = 0.02
    episodes_per_goal: int = 10
    # sampler
    workspace_min: list[float] = field(default_factory=lambda: [0.3, -0.25, 0.15])
    workspace_max: list[float] = field(default_factory=lambda: [0.7, 0.25, 0.45])
    orientation_perturbation_rad: float = 0.5
    episodes: int = 100
    master_seed: int = 0
    diversity_level: str = "high"
    baseline_jitter_m: float = 0.002
    # metrics
    coverage_resolution: int = 16

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def vec3(name):
            v = getattr(self, name)
            if not (isinstance(v, (list, tuple)) and len(v) == 3):
                raise ConfigError(f"{name} must be a list of 3 numbers")
            setattr(self, name, [float(x) for x in v])

        for name in ("goal_position", "goal_orientation", "cone_axis", "workspace_min", "workspace_max"):
            vec3(name)
        if not 0 < self.cone_half_angle_rad < np.pi / 2:
            raise ConfigError("cone_half_angle_rad must lie in (0, pi/2)")
        if np.linalg.norm(self.cone_axis) == 0:
            raise ConfigError("cone_axis must be nonzero")
        if self.k_r != "auto":
            try:
                self.k_r = float(self.k_r)
            except (TypeError, ValueError):
                raise ConfigError("k_r must be 'auto' or a number in (0, 1]") from None
            if not 0 < self.k_r <= 1:
                raise ConfigError("k_r must lie in (0, 1]")
        if not self.gripper_close_dist_m > 0:
            raise ConfigError("gripper_close_dist_m must be positive")
        if self.curve_type not in CURVE_TYPES:
            raise ConfigError(f"curve_type must be one of {CURVE_TYPES}")
        if self.reward_mode not in REWARD_MODES:
            raise ConfigError(f"reward_mode must be one of {REWARD_MODES}")
        if self.diversity_level not in DIVERSITY_LEVELS:
            raise ConfigError(f"diversity_level must be one of {DIVERSITY_LEVELS}")
        if not self.beta_m > 0:
            raise ConfigError("beta_m must be positive")
        if not self.reward_sphere_radius_m > 0:
            raise ConfigError("reward_sphere_radius_m must be positive")
        for name in ("path_samples", "chunk_size", "chunk_stride", "episodes_per_goal", "coverage_resolution"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.path_samples < 2:
            raise ConfigError("path_samples must be >= 2")
        if self.episodes < 0:
            raise ConfigError("episodes must be >= 0")
        if not np.all(np.array(self.workspace_min) < np.array(self.workspace_max)):
            raise ConfigError("workspace_min must be below workspace_max on every axis")
        if self.orientation_perturbation_rad < 0:
            raise ConfigError("orientation_perturbation_rad must be >= 0")
        if self.baseline_jitter_m < 0:
            raise ConfigError("baseline_jitter_m must be >= 0")

    @classmethod
    def from_mapping(cls, data: dict[str, Any] | None) -> "ScenarioConfig":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def replace(self, **changes) -> "ScenarioConfig":
        d = self.to_dict()
        d.update(changes)
        return ScenarioConfig.from_mapping(d)

    def build_field(self) -> PreManipulationField:
        cone = ConeField(self.goal_position, self.cone_axis, self.cone_half_angle_rad)
        gain = None if self.k_r == "auto" else self.k_r
        sphere = SphericalField(rotation_exp(self.goal_orientation), gain)
        return PreManipulationField(cone, sphere, self.gripper_close_dist_m)

    @property
    def total_episodes(self) -> int:
        """Episodes emitted; reward mode multiplies by ``episodes_per_goal``."""
        if self.reward_mode == "off":
            return self.episodes
        return self.episodes * self.episodes_per_goal


def load_config(path: str | Path | None) -> tuple[ScenarioConfig, str]:
    """Parse a scenario file; returns the config and its raw text."""
    if path is None:
        return ScenarioConfig(), ""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return ScenarioConfig.from_mapping(data), text


def describe_keys() -> str:
    """One line per key with its default, for ``--help``."""
    defaults = ScenarioConfig().to_dict()
    return "\n".join(f"  {k}: {v!r}" for k, v in defaults.items())
