"""Pinhole camera model.

Camera frame convention: x right, y down, z forward (optical axis).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonPositiveDepth, SchemaError


@dataclass(frozen=True)
class PinholeCamera:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise SchemaError("focal lengths must be positive")
        if not (int(self.width) == self.width and int(self.height) == self.height):
            raise SchemaError("image dimensions must be integers")
        if self.width <= 0 or self.height <= 0:
            raise SchemaError("image dimensions must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise SchemaError("principal point must lie inside the image")

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width), numpy order."""
        return int(self.height), int(self.width)

    def scaled(self, k: float) -> "PinholeCamera":
        """Same camera on a pixel grid scaled by ``k``."""
        return PinholeCamera(self.fx * k, self.fy * k, self.cx * k, self.cy * k,
                             int(round(self.width * k)), int(round(self.height * k)))

    def to_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": int(self.width), "height": int(self.height)}

    @classmethod
    def from_dict(cls, d: dict) -> "PinholeCamera":
        keys = {"fx", "fy", "cx", "cy", "width", "height"}
        if not isinstance(d, dict) or set(d) != keys:
            raise SchemaError(f"camera record must have exactly the keys {sorted(keys)}")
        return cls(float(d["fx"]), float(d["fy"]), float(d["cx"]), float(d["cy"]),
                   int(d["width"]), int(d["height"]))


def project(P, cam: PinholeCamera) -> np.ndarray:
    """Camera-frame point(s) to pixel coordinates ``(u, v)``; not clamped to the image."""
    P = np.asarray(P, dtype=np.float64)
    z = P[..., 2]
    if np.any(~(z > 0)):
        raise NonPositiveDepth("point lies at or behind the camera plane")
    u = cam.fx * P[..., 0] / z + cam.cx
    v = cam.fy * P[..., 1] / z + cam.cy
    return np.stack([u, v], axis=-1)


def backproject(p, d, cam: PinholeCamera) -> np.ndarray:
    """Pixel coordinates plus depth (meters) to a camera-frame point."""
    p = np.asarray(p, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if np.any(~(d > 0)):
        raise NonPositiveDepth("depth must be strictly positive")
    x = (p[..., 0] - cam.cx) / cam.fx * d
    y = (p[..., 1] - cam.cy) / cam.fy * d
    return np.stack([x, y, np.broadcast_to(d, x.shape)], axis=-1)


def pixel_rays(cam: PinholeCamera) -> np.ndarray:
    """Unnormalized ray direction (z = 1) through every pixel centre, shape (H, W, 3)."""
    vs, us = np.mgrid[0:cam.height, 0:cam.width].astype(np.float64)
    return np.stack([(us - cam.cx) / cam.fx, (vs - cam.cy) / cam.fy, np.ones_like(us)], axis=-1)
