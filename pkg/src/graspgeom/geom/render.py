"""Ray-cast depth rendering for synthetic scenes."""

from __future__ import annotations

import numpy as np

from .camera import PinholeCamera, pixel_rays
from .depth import DepthMap
from .mesh import TriangleMesh, _ray_triangle_t, merge
from .transform import RigidTransform


def render_depth(scene, cam: PinholeCamera, T_cam_world: RigidTransform | None = None,
                 return_faces: bool = False):
    """Render a pixel-perfect depth map by casting one ray per pixel centre.

    ``scene`` is a mesh or a list of meshes expressed in the world frame
    (or directly in the camera frame when ``T_cam_world`` is None).
    """
    meshes = [scene] if isinstance(scene, TriangleMesh) else list(scene)
    mesh = merge(meshes)
    if T_cam_world is not None:
        mesh = mesh.transformed(T_cam_world)
    faces, dist = camera_raycast(mesh, cam)
    dirs = pixel_directions(cam)
    depth = np.where(faces >= 0, dist * dirs[..., 2], 0.0)
    dm = DepthMap(np.where(depth > 0, depth, 0.0))
    if return_faces:
        return dm, faces, mesh
    return dm


def pixel_directions(cam: PinholeCamera) -> np.ndarray:
    rays = pixel_rays(cam)
    return rays / np.linalg.norm(rays, axis=-1, keepdims=True)


def camera_raycast(mesh: TriangleMesh, cam: PinholeCamera, eps: float = 0.0):
    """Nearest hit along every pixel-centre ray from the camera origin.

    ``mesh`` is in the camera frame.  Each triangle is only tested against
    the pixels inside its projected bounding box (all pixels when a vertex
    is behind the camera); faces are visited in index order with strict
    improvement, so results equal the exhaustive :meth:`TriangleMesh.raycast`.
    Returns ``(faces, distances)`` of shape (H, W); misses are -1 / inf.
    """
    H, W = cam.shape
    dirs = pixel_directions(cam)
    best = np.full((H, W), np.inf)
    faces = np.full((H, W), -1, dtype=np.int64)
    v0, e1, e2 = mesh._edges
    corners = mesh.corners
    z = corners[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = cam.fx * corners[..., 0] / z + cam.cx
        v = cam.fy * corners[..., 1] / z + cam.cy
    front = np.all(z > 0, axis=1)
    origin = np.zeros((1, 1, 3))
    for f in range(mesh.n_faces):
        if front[f]:
            u0 = max(0, int(np.floor(u[f].min())) - 1)
            u1 = min(W, int(np.ceil(u[f].max())) + 2)
            r0 = max(0, int(np.floor(v[f].min())) - 1)
            r1 = min(H, int(np.ceil(v[f].max())) + 2)
            if u0 >= u1 or r0 >= r1:
                continue
        else:
            u0, u1, r0, r1 = 0, W, 0, H
        d = dirs[r0:r1, u0:u1].reshape(-1, 1, 3)
        t = _ray_triangle_t(origin, d, v0[f:f + 1], e1[f:f + 1], e2[f:f + 1], eps)[:, 0]
        t = t.reshape(r1 - r0, u1 - u0)
        win = best[r0:r1, u0:u1]
        better = t < win
        win[better] = t[better]
        faces[r0:r1, u0:u1][better] = f
    return faces, best


def plane_depth(cam: PinholeCamera, point, normal) -> DepthMap:
    """Analytic depth of the plane through ``point`` with ``normal`` (camera frame).

    Pixels whose ray misses the plane or meets it behind the camera get 0.
    """
    rays = pixel_rays(cam)
    n = np.asarray(normal, dtype=np.float64)
    num = float(np.dot(n, point))
    den = rays @ n
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(den != 0, num / den, 0.0)
    return DepthMap(np.where(np.isfinite(z) & (z > 0), z, 0.0))


def sphere_depth(cam: PinholeCamera, center, radius: float) -> DepthMap:
    """Analytic depth of the front surface of a sphere (camera frame)."""
    rays = pixel_rays(cam)
    c = np.asarray(center, dtype=np.float64)
    # |z r - c|² = R² with r = (x, y, 1): a z² - 2 b z + (|c|² - R²) = 0
    a = np.sum(rays * rays, axis=-1)
    b = rays @ c
    disc = b * b - a * (float(c @ c) - radius ** 2)
    z = np.where(disc >= 0, (b - np.sqrt(np.maximum(disc, 0.0))) / a, 0.0)
    return DepthMap(np.where(z > 0, z, 0.0))
