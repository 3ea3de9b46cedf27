"""Network input/target tensors: keypoint heatmaps, RGB+normal crops, RoI Align."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateWindow, SchemaError
from .geom.camera import PinholeCamera
from .geom.depth import DepthMap, NormalMap
from .geom.vec import cross, dot, norm

CHANNEL_ORDER = ["Rn", "Gn", "Bn", "nx", "ny", "nz"]
ALIGNED_SIZE = 112


def make_heatmap(keypoints, size, sigma: float = 2.0) -> np.ndarray:
    """Max-composed unnormalized Gaussians, shape ``size = (height, width)``.

    Keypoints are ``(u, v)`` pixel coordinates and may lie off-image.
    """
    if not sigma > 0:
        raise SchemaError("sigma must be positive")
    H, W = size
    out = np.zeros((H, W))
    us = np.arange(W, dtype=np.float64)
    vs = np.arange(H, dtype=np.float64)
    for u0, v0 in keypoints:
        gu = np.exp(-((us - u0) ** 2) / (2 * sigma ** 2))
        gv = np.exp(-((vs - v0) ** 2) / (2 * sigma ** 2))
        np.maximum(out, gv[:, None] * gu[None, :], out=out)
    return out


@dataclass(frozen=True, eq=False)
class CropTensor:
    data: np.ndarray          # (h, w, 6)
    keypoint: tuple
    r: int

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != 6:
            raise SchemaError(f"crop must be (h, w, 6), got {self.data.shape}")

    def sidecar(self) -> dict:
        return {"shape": list(self.data.shape), "channel-order": CHANNEL_ORDER,
                "keypoint": [int(self.keypoint[0]), int(self.keypoint[1])], "r": int(self.r)}

    def save(self, path) -> None:
        """Raw little-endian float32 plus a ``.json`` sidecar next to it."""
        path = Path(path)
        path.write_bytes(np.ascontiguousarray(self.data, dtype="<f4").tobytes())
        path.with_suffix(".json").write_text(json.dumps(self.sidecar(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "CropTensor":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        data = np.frombuffer(path.read_bytes(), dtype="<f4").reshape(meta["shape"]).astype(np.float64)
        return cls(data, tuple(meta["keypoint"]), meta["r"])


def crop_pair(rgb, normals, p, r: int) -> CropTensor:
    """Cut the same window from the RGB image and the normal map and stack to 6 channels.

    The window ``[u-r, u+r] x [v-r, v+r]`` is clipped to the image.  RGB is
    standardized per crop and channel (zero-variance channels become 0);
    normals pass through unchanged.
    """
    if r < 1:
        raise SchemaError("crop radius must be >= 1")
    rgb = np.asarray(rgb, dtype=np.float64)
    N = normals.normals if isinstance(normals, NormalMap) else np.asarray(normals, dtype=np.float64)
    if rgb.shape[:2] != N.shape[:2] or rgb.ndim != 3 or rgb.shape[2] != 3:
        raise SchemaError("rgb (H, W, 3) and normal map must share spatial size")
    H, W = rgb.shape[:2]
    u, v = int(round(p[0])), int(round(p[1]))
    u0, u1 = max(0, u - r), min(W, u + r + 1)
    v0, v1 = max(0, v - r), min(H, v + r + 1)
    if u0 >= u1 or v0 >= v1:
        raise DegenerateWindow(f"crop around {p} with r={r} misses the image")
    c = rgb[v0:v1, u0:u1]
    mean = c.mean(axis=(0, 1))
    std = c.std(axis=(0, 1))
    safe = np.where(std > 0, std, 1.0)
    c = np.where(std > 0, (c - mean) / safe, 0.0)
    return CropTensor(np.concatenate([c, N[v0:v1, u0:u1]], axis=2), (u, v), r)


def _axis_samples(n_in: int, n_out: int, ratio):
    """Sample coordinates (pixel-centre units) per output cell along one axis, shape (n_out, ratio)."""
    bin_size = n_in / n_out
    k = int(np.ceil(bin_size)) if ratio is None else int(ratio)
    k = max(k, 1)
    start = -0.5  # region [0, n_in] in continuous coordinates, pixel centres at i + 0.5
    cells = np.arange(n_out)[:, None]
    offs = (np.arange(k)[None, :] + 0.5) / k
    return start + (cells + offs) * bin_size


def _interp_weights(coords, n):
    """Edge-clamped linear-interpolation matrix, shape (len(coords), n)."""
    c = np.clip(coords, 0.0, n - 1.0)
    lo = np.floor(c).astype(int)
    hi = np.minimum(lo + 1, n - 1)
    frac = c - lo
    M = np.zeros((len(c), n))
    rows = np.arange(len(c))
    np.add.at(M, (rows, lo), 1.0 - frac)
    np.add.at(M, (rows, hi), frac)
    # samples beyond one pixel outside the input contribute zero
    M[(coords < -1.0) | (coords > n)] = 0.0
    return M


def roi_align(t, out: int = ALIGNED_SIZE, sampling_ratio: int | None = None):
    """Resample a whole crop onto an ``out x out`` grid with RoI Align.

    Each output cell averages ``k x k`` bilinear samples spread evenly
    over its source sub-window; ``k = ceil(input / out)`` per axis unless
    ``sampling_ratio`` is given.  Accepts a :class:`CropTensor` or an
    ``(h, w, C)`` array and returns the same kind.
    """
    crop = t if isinstance(t, CropTensor) else None
    data = np.asarray(crop.data if crop else t, dtype=np.float64)
    h, w = data.shape[:2]
    if h < 1 or w < 1:
        raise SchemaError("roi_align needs a non-empty input")
    ys = _axis_samples(h, out, sampling_ratio)
    xs = _axis_samples(w, out, sampling_ratio)
    # separable: bilinear weights factor into row and column interpolation, averaged per cell
    Wy = _interp_weights(ys.reshape(-1), h).reshape(out, ys.shape[1], h).mean(axis=1)
    Wx = _interp_weights(xs.reshape(-1), w).reshape(out, xs.shape[1], w).mean(axis=1)
    res = np.tensordot(Wy, data, axes=(1, 0))                  # (out, w, C)
    res = np.moveaxis(np.tensordot(Wx, res, axes=(1, 1)), 0, 1)  # (out, out, C)
    if crop is not None:
        return CropTensor(res, crop.keypoint, crop.r)
    return res


def normals_from_depth(depth: DepthMap, cam: PinholeCamera) -> NormalMap:
    """Surface normals from central differences of the back-projected point cloud.

    Normals face the camera (negative dot product with the viewing ray).
    Pixels missing any of their four neighbours, and border pixels, are
    marked invalid (zero vector).
    """
    depth.check_camera(cam)
    D = depth.depth
    H, W = D.shape
    vs, us = np.mgrid[0:H, 0:W].astype(np.float64)
    P = np.stack([(us - cam.cx) / cam.fx * D, (vs - cam.cy) / cam.fy * D, D], axis=-1)
    valid = D > 0
    N = np.zeros((H, W, 3))
    if H < 3 or W < 3:
        return NormalMap(N)
    tu = P[1:-1, 2:] - P[1:-1, :-2]
    tv = P[2:, 1:-1] - P[:-2, 1:-1]
    n = cross(tu, tv)
    ok = (valid[1:-1, 1:-1] & valid[1:-1, 2:] & valid[1:-1, :-2]
          & valid[2:, 1:-1] & valid[:-2, 1:-1])
    length = norm(n)
    ok &= length > 0
    n = np.where(ok[..., None], n / np.where(length > 0, length, 1.0)[..., None], 0.0)
    flip = dot(n, P[1:-1, 1:-1]) > 0
    n[flip] *= -1.0
    N[1:-1, 1:-1] = n
    return NormalMap(N)


def save_heatmap(heatmap: np.ndarray, path, keypoints) -> None:
    path = Path(path)
    path.write_bytes(np.ascontiguousarray(heatmap, dtype="<f4").tobytes())
    meta = {"shape": list(heatmap.shape), "keypoints": [[int(u), int(v)] for u, v in keypoints]}
    path.with_suffix(".json").write_text(json.dumps(meta, sort_keys=True) + "\n")
