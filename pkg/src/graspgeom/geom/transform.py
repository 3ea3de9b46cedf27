"""Rigid transforms tagged with source and target frames."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import DEFAULT_TOLERANCES
from ..errors import FrameMismatch, InvalidRotation, SchemaError


def check_rotation(R, tol: float = DEFAULT_TOLERANCES.orthonormal) -> np.ndarray:
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise InvalidRotation(f"rotation must be a finite 3x3 matrix, got shape {R.shape}")
    err = np.max(np.abs(R.T @ R - np.eye(3)))
    if err > tol:
        raise InvalidRotation(f"RᵀR deviates from identity by {err:.3g}")
    det = np.linalg.det(R)
    if abs(det - 1.0) > tol:
        raise InvalidRotation(f"det(R) = {det:.12g}, expected +1")
    return R


def rotation_about(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a unit ``axis``."""
    k = np.asarray(axis, dtype=np.float64)
    k = k / np.linalg.norm(k)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed rotation (via a random unit quaternion)."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Maps coordinates expressed in ``from_frame`` into ``to_frame``.

    ``T_base_cam = RigidTransform(R, t, from_frame="cam", to_frame="base")``
    is the usual T_base←cam.  Composition ``A @ B`` requires
    ``A.from_frame == B.to_frame``.
    """

    rotation: np.ndarray
    translation: np.ndarray
    from_frame: str = "src"
    to_frame: str = "dst"
    tol: float = field(default=DEFAULT_TOLERANCES.orthonormal, repr=False)

    def __post_init__(self):
        R = check_rotation(self.rotation, self.tol).copy()
        t = np.asarray(self.translation, dtype=np.float64).reshape(3).copy()
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls, from_frame: str = "src", to_frame: str = "dst") -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3), from_frame, to_frame)

    @classmethod
    def from_matrix(cls, M, from_frame: str = "src", to_frame: str = "dst") -> "RigidTransform":
        M = np.asarray(M, dtype=np.float64)
        return cls(M[:3, :3], M[:3, 3], from_frame, to_frame)

    @property
    def matrix(self) -> np.ndarray:
        M = np.eye(4)
        M[:3, :3] = self.rotation
        M[:3, 3] = self.translation
        return M

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation, self.to_frame, self.from_frame)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        if not isinstance(other, RigidTransform):
            return NotImplemented
        if self.from_frame != other.to_frame:
            raise FrameMismatch(
                f"cannot compose {self.to_frame}<-{self.from_frame} with "
                f"{other.to_frame}<-{other.from_frame}"
            )
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
            other.from_frame,
            self.to_frame,
        )

    def apply(self, points) -> np.ndarray:
        """Transform points of shape ``(3,)`` or ``(N, 3)``."""
        P = np.asarray(points, dtype=np.float64)
        return P @ self.rotation.T + self.translation

    def rotate(self, vectors) -> np.ndarray:
        return np.asarray(vectors, dtype=np.float64) @ self.rotation.T

    def expect(self, from_frame: str, to_frame: str) -> "RigidTransform":
        if (self.from_frame, self.to_frame) != (from_frame, to_frame):
            raise FrameMismatch(
                f"expected a {to_frame}<-{from_frame} transform, got "
                f"{self.to_frame}<-{self.from_frame}"
            )
        return self

    def to_dict(self) -> dict:
        return {
            "R": [float(x) for x in self.rotation.reshape(-1)],
            "t": [float(x) for x in self.translation],
            "from": self.from_frame,
            "to": self.to_frame,
        }

    @classmethod
    def from_dict(cls, d: dict, tol: float = DEFAULT_TOLERANCES.orthonormal) -> "RigidTransform":
        try:
            R = np.asarray(d["R"], dtype=np.float64).reshape(3, 3)
            t = np.asarray(d["t"], dtype=np.float64).reshape(3)
            return cls(R, t, str(d["from"]), str(d["to"]), tol=tol)
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"bad transform record: {exc}") from exc


def look_at(eye, target, up=(0.0, 0.0, 1.0), camera_frame: str = "cam",
            world_frame: str = "base") -> RigidTransform:
    """Camera pose T_world←cam for a camera at ``eye`` looking at ``target`` (x right, y down, z forward)."""
    eye = np.asarray(eye, dtype=np.float64)
    f = np.asarray(target, dtype=np.float64) - eye
    f /= np.linalg.norm(f)
    r = np.cross(f, np.asarray(up, dtype=np.float64))
    if np.linalg.norm(r) < 1e-12:
        raise ValueError("viewing direction is parallel to 'up'")
    r /= np.linalg.norm(r)
    d = np.cross(f, r)
    return RigidTransform(np.column_stack([r, d, f]), eye, camera_frame, world_frame)
