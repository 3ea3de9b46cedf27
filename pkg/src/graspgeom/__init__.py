"""Grasp geometry: five-parameter monocular grasps, pose recovery, and label generation."""

__version__ = "0.1.0"
