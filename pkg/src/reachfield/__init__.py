"""Field-guided reach trajectory generation.

A cone field for position and a spherical field for orientation turn random
start poses into delta-pose action chunks that end at a goal manipulation
pose.
"""

from .config import ScenarioConfig, load_config
from .curves import Path3D, PlanarCurve, build_bezier_path, build_path, build_reach_path, cycloid_position
from .field import (
    ConeField,
    DegenerateStartError,
    PreManipulationField,
    SphericalField,
    is_inside_cone,
    orientation_step,
    project_onto_cone,
)
from .rollout import ActionChunk, BetaError, DeltaAction, Trajectory, discretize, extract_chunk
from .so3 import Pose, axial_radial_decompose, rotation_exp, rotation_log

__version__ = "0.1.0"

__all__ = [
    "ActionChunk",
    "BetaError",
    "ConeField",
    "DegenerateStartError",
    "DeltaAction",
    "Path3D",
    "PlanarCurve",
    "Pose",
    "PreManipulationField",
    "ScenarioConfig",
    "SphericalField",
    "Trajectory",
    "axial_radial_decompose",
    "build_bezier_path",
    "build_path",
    "build_reach_path",
    "cycloid_position",
    "discretize",
    "extract_chunk",
    "is_inside_cone",
    "load_config",
    "orientation_step",
    "project_onto_cone",
    "rotation_exp",
    "rotation_log",
]
