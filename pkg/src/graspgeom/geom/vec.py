"""Small 3-vector helpers.

Vectors are plain ``float64`` numpy arrays of shape ``(3,)``; cross and dot
products are spelled out component-wise so that batched and single-item
calls produce bit-identical results.
"""

from __future__ import annotations

import numpy as np

from ..config import DEFAULT_TOLERANCES
from ..errors import NotUnitVector

PLATFORM_NORMAL = np.array([0.0, 0.0, 1.0])


def vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite components")
    return a


def unit_vec3(v, tol: float = DEFAULT_TOLERANCES.unit_norm) -> np.ndarray:
    """Validate that ``v`` is unit length (no silent renormalization)."""
    a = vec3(v)
    n = float(np.sqrt(dot(a, a)))
    if abs(n - 1.0) > tol:
        raise NotUnitVector(f"norm {n!r} deviates from 1 by more than {tol}")
    return a


def dot(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def cross(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    x = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    y = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    z = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return np.stack([x, y, z], axis=-1)


def norm(a):
    return np.sqrt(dot(a, a))


def normalize(a):
    a = np.asarray(a, dtype=np.float64)
    return a / norm(a)[..., None]


def angle_between(a, b):
    """Angle in [0, pi] between (batches of) vectors; atan2 form, stable near 0 and pi."""
    return np.arctan2(norm(cross(a, b)), dot(a, b))
