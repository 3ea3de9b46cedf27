"""Parallel-jaw gripper collision model: oriented boxes vs. triangle soups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom.mesh import TriangleMesh
from .geom.vec import cross


@dataclass(frozen=True)
class GripperModel:
    """Two fingers and a palm bar, expressed in the grasp frame.

    Grasp frame: x closes the jaws, z is the approach direction (the palm sits
    on the -z side of the grasp centre), y completes the right-handed frame.
    Defaults are roughly a Franka hand.
    """

    finger_length: float = 0.05
    finger_thickness: float = 0.01
    finger_width: float = 0.02
    palm_depth: float = 0.02
    tip_extension: float = 0.01   # how far fingertips reach past the grasp centre along +z

    def boxes(self, stroke: float):
        """``[(center, half_extents), ...]`` for finger, finger, palm in the grasp frame."""
        ft, fl = self.finger_thickness, self.finger_length
        tip = self.tip_extension
        half_finger = np.array([ft / 2, self.finger_width / 2, fl / 2])
        zf = tip - fl / 2
        xf = stroke / 2 + ft / 2
        palm_half = np.array([stroke / 2 + ft, self.finger_width / 2, self.palm_depth / 2])
        zp = tip - fl - self.palm_depth / 2
        return [
            (np.array([-xf, 0.0, zf]), half_finger),
            (np.array([xf, 0.0, zf]), half_finger),
            (np.array([0.0, 0.0, zp]), palm_half),
        ]


def box_triangles_overlap(center, axes, half, tris) -> np.ndarray:
    """Separating-axis test of one oriented box against triangles ``(M, 3, 3)``.

    ``axes`` holds the box axes as columns.  Touching counts as overlap.
    """
    tris = np.asarray(tris, dtype=np.float64)
    if len(tris) == 0:
        return np.zeros(0, dtype=bool)
    local = (tris - center) @ axes                # (M, 3, 3) in box coordinates
    overlap = np.ones(len(tris), dtype=bool)
    # box face normals
    overlap &= np.all(local.min(axis=1) <= half, axis=1) & np.all(local.max(axis=1) >= -half, axis=1)
    edges = np.stack([local[:, 1] - local[:, 0], local[:, 2] - local[:, 1], local[:, 0] - local[:, 2]], axis=1)
    cand = [cross(local[:, 1] - local[:, 0], local[:, 2] - local[:, 0])]
    eye = np.eye(3)
    for i in range(3):
        for j in range(3):
            cand.append(cross(np.broadcast_to(eye[i], edges[:, j].shape), edges[:, j]))
    for a in cand:
        p = np.einsum("mkc,mc->mk", local, a)
        r = np.abs(a) @ half
        overlap &= ~((p.min(axis=1) > r) | (p.max(axis=1) < -r))
    return overlap


def collision_check(grasp_pose, gripper: GripperModel, scene, stroke: float) -> bool:
    """True iff the gripper at ``grasp_pose`` with opening ``stroke`` touches no scene triangle.

    ``scene`` is an iterable of meshes or ``(mesh, RigidTransform)`` pairs, all
    in the grasp pose's frame.
    """
    R, t = np.asarray(grasp_pose.R), np.asarray(grasp_pose.t)
    tris = []
    for item in scene:
        if isinstance(item, TriangleMesh):
            tris.append(item.corners)
        else:
            mesh, T = item
            tris.append(T.apply(mesh.corners.reshape(-1, 3)).reshape(-1, 3, 3))
    if not tris:
        return True
    tris = np.concatenate(tris)
    lo, hi = tris.min(axis=1), tris.max(axis=1)
    for c_local, half in gripper.boxes(stroke):
        c = R @ c_local + t
        reach = float(np.linalg.norm(half))
        near = np.all(lo <= c + reach, axis=1) & np.all(hi >= c - reach, axis=1)
        if np.any(near) and np.any(box_triangles_overlap(c, R, half, tris[near])):
            return False
    return True


def gripper_corners(grasp_pose, gripper: GripperModel, stroke: float) -> list[np.ndarray]:
    """World-frame corners ``(8, 3)`` of each gripper box (for plotting and tests)."""
    R, t = np.asarray(grasp_pose.R), np.asarray(grasp_pose.t)
    signs = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=np.float64)
    return [(c + signs * h) @ R.T + t for c, h in gripper.boxes(stroke)]
