"""Depth and normal maps, their file formats, and point-cloud queries."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import EmptyDepthMap, InputError, SchemaError
from .camera import PinholeCamera
from .vec import norm

DEPTH_MAGIC = b"GGDM"
# 16-bit PNG depth: one unit = 0.1 mm
DEFAULT_PNG_SCALE = 1e-4
# query points x cloud points evaluated per chunk in nearest-pixel searches
_NN_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class DepthMap:
    """Per-pixel metric depth; 0 marks invalid pixels."""

    depth: np.ndarray

    def __post_init__(self):
        D = np.array(self.depth, dtype=np.float64)
        if D.ndim != 2:
            raise SchemaError(f"depth map must be 2-D, got {D.shape}")
        if not np.all(np.isfinite(D)) or np.any(D < 0):
            raise SchemaError("depth values must be finite and non-negative")
        D.setflags(write=False)
        object.__setattr__(self, "depth", D)

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @property
    def valid(self) -> np.ndarray:
        return self.depth > 0

    def check_camera(self, cam: PinholeCamera) -> None:
        if self.depth.shape != cam.shape:
            raise SchemaError(f"depth map {self.depth.shape} does not match camera {cam.shape}")

    def point_cloud(self, cam: PinholeCamera):
        """Back-project valid pixels; returns ``(points (N,3), pixels (N,2) as (u, v))`` in row-major order."""
        self.check_camera(cam)
        vs, us = np.nonzero(self.valid)
        d = self.depth[vs, us]
        P = np.stack([(us - cam.cx) / cam.fx * d, (vs - cam.cy) / cam.fy * d, d], axis=1)
        return P, np.stack([us, vs], axis=1)


@dataclass(frozen=True, eq=False)
class NormalMap:
    """Per-pixel unit normals, shape (H, W, 3); all-zero vectors mark invalid pixels."""

    normals: np.ndarray

    def __post_init__(self):
        N = np.array(self.normals, dtype=np.float64)
        if N.ndim != 3 or N.shape[2] != 3:
            raise SchemaError(f"normal map must be (H, W, 3), got {N.shape}")
        N.setflags(write=False)
        object.__setattr__(self, "normals", N)

    @property
    def valid(self) -> np.ndarray:
        return norm(self.normals) > 0.5


def nearest_surface_pixel(P, depth: DepthMap, cam: PinholeCamera):
    """Pixel ``(u, v)`` whose back-projected point is closest to camera-frame ``P``.

    Exhaustive over all valid pixels; ties resolve to the first pixel in
    row-major order.  Accepts a single point or an ``(M, 3)`` batch.
    """
    cloud, pixels = depth.point_cloud(cam)
    if len(cloud) == 0:
        raise EmptyDepthMap("depth map has no valid pixels")
    Q = np.asarray(P, dtype=np.float64)
    single = Q.ndim == 1
    Q = Q.reshape(-1, 3)
    idx = _nearest_indices(Q, cloud)
    out = pixels[idx]
    return (int(out[0, 0]), int(out[0, 1])) if single else out


def nearest_surface_points(P, depth: DepthMap, cam: PinholeCamera):
    """Like :func:`nearest_surface_pixel` but also returns the matched 3-D points."""
    cloud, pixels = depth.point_cloud(cam)
    if len(cloud) == 0:
        raise EmptyDepthMap("depth map has no valid pixels")
    Q = np.asarray(P, dtype=np.float64).reshape(-1, 3)
    idx = _nearest_indices(Q, cloud)
    return pixels[idx], cloud[idx]


def _nearest_indices(Q: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    step = max(1, _NN_CHUNK // len(cloud))
    out = np.empty(len(Q), dtype=np.int64)
    for s in range(0, len(Q), step):
        q = Q[s:s + step, None, :]
        d2 = ((cloud[None, :, 0] - q[..., 0]) ** 2 + (cloud[None, :, 1] - q[..., 1]) ** 2
              + (cloud[None, :, 2] - q[..., 2]) ** 2)
        out[s:s + step] = np.argmin(d2, axis=1)
    return out


# -- file formats -------------------------------------------------------------

def save_depth(depth: DepthMap, path, scale: float = DEFAULT_PNG_SCALE) -> None:
    """Write ``.png`` (16-bit, ``scale`` meters per unit) or ``.bin`` (float32 with header)."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        units = np.round(depth.depth / scale)
        if units.max(initial=0) > 65535:
            raise SchemaError("depth exceeds the 16-bit range at this scale")
        Image.fromarray(units.astype(np.uint16)).save(path)
    else:
        h, w = depth.depth.shape
        with open(path, "wb") as fh:
            fh.write(DEPTH_MAGIC + struct.pack("<III", w, h, 0))
            fh.write(depth.depth.astype("<f4").tobytes())


def load_depth(path, scale: float = DEFAULT_PNG_SCALE) -> DepthMap:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"depth file not found: {path}")
    if path.suffix.lower() == ".png":
        with Image.open(path) as im:
            arr = np.array(im)
        if arr.ndim != 2:
            raise SchemaError(f"{path}: depth PNG must be single-channel")
        return DepthMap(arr.astype(np.float64) * scale)
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:4] != DEPTH_MAGIC:
        raise SchemaError(f"{path}: not a float depth file (bad magic)")
    w, h, _ = struct.unpack("<III", raw[4:16])
    if len(raw) != 16 + 4 * w * h:
        raise SchemaError(f"{path}: payload size does not match {w}x{h}")
    return DepthMap(np.frombuffer(raw, dtype="<f4", offset=16).reshape(h, w).astype(np.float64))
