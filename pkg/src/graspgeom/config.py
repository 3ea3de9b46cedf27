"""Central tolerance record.

All numeric thresholds used across the package live here so that a single
config file can override them.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any

from .errors import SchemaError


@dataclass(frozen=True)
class Tolerances:
    unit_norm: float = 1e-9          # |‖v‖ - 1| for unit vectors
    orthonormal: float = 1e-9        # RᵀR = I and det R = 1
    ray_epsilon: float = 1e-6        # minimum hit distance, meters
    degenerate_axis: float = 1e-9    # sin of the grasp axis' tilt from vertical
    angle_feasibility: float = 1e-9
    branch_tie: float = 1e-12
    min_contact_distance: float = 1e-6
    orthogonality: float = 1e-6      # |n_x·n_z| accepted for contact-net grasps
    w_max: float = 0.08
    d_vis: float = 0.005
    # pass thresholds for the analytic self-checks
    sphere_width_rel: float = 0.01
    sphere_center: float = 0.02
    cube_width: float = 1e-6
    plane_normal_rad: float = 1e-3
    sphere_normal_deg: float = 2.0
    ny_residual: float = 1e-9


DEFAULT_TOLERANCES = Tolerances()


def from_dict(cls, data: dict[str, Any] | None, where: str = ""):
    """Build dataclass ``cls`` from ``data``, rejecting unknown keys."""
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise SchemaError(f"{where or cls.__name__}: expected an object, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise SchemaError(f"{where or cls.__name__}: unknown keys {unknown}")
    kwargs = {}
    for key, value in data.items():
        default = getattr(cls(), key)
        if isinstance(default, bool):
            ok = isinstance(value, bool)
        elif isinstance(default, int):
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif isinstance(default, float):
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            value = float(value) if ok else value
        else:
            ok = True
        if not ok:
            raise SchemaError(f"{where or cls.__name__}.{key}: bad type {type(value).__name__}")
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{where or cls.__name__}: {exc}") from exc
