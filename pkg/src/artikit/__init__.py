"""Toolkit for procedural articulated 3D objects: grid layouts, assembly,
forward kinematics, URDF round-trips, augmentation, and evaluation metrics."""

__version__ = "0.1.0"

from artikit.core import (
    Aabb,
    ArticulatedObject,
    ArticulationGraph,
    JointSpec,
    JointType,
    Part,
    PartLabel,
    build_graph,
    normalize_object,
    validate_object,
)

__all__ = [
    "Aabb",
    "ArticulatedObject",
    "ArticulationGraph",
    "JointSpec",
    "JointType",
    "Part",
    "PartLabel",
    "build_graph",
    "normalize_object",
    "validate_object",
    "__version__",
]
