"""Five-parameter monocular grasps and their closed-form 6-DoF recovery.

A grasp is ``{n_x, p, d, w, phi}``: closing axis (camera frame), 2-D
keypoint of the visible contact, its depth, the jaw width and the dihedral
angle between the gripper plane and the platform (measured in the robot
base frame, platform normal ``n = [0, 0, 1]``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DegenerateAxis, FrameMismatch, InfeasibleAngle, InvalidGrasp, SchemaError
from .geom.camera import PinholeCamera, backproject, project
from .geom.transform import RigidTransform, check_rotation
from .geom.vec import PLATFORM_NORMAL, cross, dot, norm, unit_vec3, vec3


@dataclass(frozen=True, eq=False)
class GraspMono:
    p: np.ndarray       # (u, v) pixels
    d: float            # meters
    w: float            # meters
    phi: float          # radians, base frame
    n_x: np.ndarray     # closing axis, camera frame

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64).reshape(2)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n_x", vec3(self.n_x))
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "w", float(self.w))
        object.__setattr__(self, "phi", float(self.phi))

    def validate(self, tol: Tolerances = DEFAULT_TOLERANCES) -> "GraspMono":
        if not (self.d > 0):
            raise InvalidGrasp(f"depth must be positive, got {self.d}")
        # 1e-12 m slack so a width recomputed from two contacts can sit exactly at the limit
        if not (0 < self.w <= tol.w_max + 1e-12):
            raise InvalidGrasp(f"width {self.w} outside (0, {tol.w_max}]")
        if not (0.0 <= self.phi <= math.pi):
            raise InvalidGrasp(f"phi {self.phi} outside [0, pi]")
        unit_vec3(self.n_x, tol.unit_norm)
        return self

    def to_dict(self) -> dict:
        return {"u": float(self.p[0]), "v": float(self.p[1]), "d": self.d, "w": self.w,
                "phi": self.phi, "nx": [float(x) for x in self.n_x]}

    @classmethod
    def from_dict(cls, rec: dict) -> "GraspMono":
        try:
            return cls((rec["u"], rec["v"]), rec["d"], rec["w"], rec["phi"], rec["nx"])
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"bad mono grasp record: {exc}") from exc


@dataclass(frozen=True, eq=False)
class GraspSE3:
    """Rigid grasp pose; columns of ``R`` are the closing, normal and approach axes."""

    R: np.ndarray
    t: np.ndarray
    frame: str = "base"
    tol: float = field(default=DEFAULT_TOLERANCES.orthonormal, repr=False)

    def __post_init__(self):
        R = check_rotation(self.R, self.tol).copy()
        t = vec3(self.t).copy()
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @property
    def n_x(self) -> np.ndarray:
        return self.R[:, 0]

    @property
    def n_y(self) -> np.ndarray:
        return self.R[:, 1]

    @property
    def n_z(self) -> np.ndarray:
        return self.R[:, 2]

    @property
    def matrix(self) -> np.ndarray:
        M = np.eye(4)
        M[:3, :3] = self.R
        M[:3, 3] = self.t
        return M

    def as_transform(self, grasp_frame: str = "grasp") -> RigidTransform:
        return RigidTransform(self.R, self.t, grasp_frame, self.frame)

    def transformed(self, T: RigidTransform) -> "GraspSE3":
        """Re-express this pose in ``T.to_frame``."""
        if T.from_frame != self.frame:
            raise FrameMismatch(f"grasp is in {self.frame!r}, transform expects {T.from_frame!r}")
        return GraspSE3(T.rotation @ self.R, T.apply(self.t), T.to_frame)

    def contacts(self, w: float) -> tuple[np.ndarray, np.ndarray]:
        """Jaw contact points for opening ``w``: ``t ∓ (w/2) n_x``."""
        return self.t - 0.5 * w * self.n_x, self.t + 0.5 * w * self.n_x

    def to_dict(self) -> dict:
        return {"R": [float(x) for x in self.R.reshape(-1)], "t": [float(x) for x in self.t],
                "frame": self.frame}

    @classmethod
    def from_dict(cls, rec: dict, tol: float = DEFAULT_TOLERANCES.orthonormal) -> "GraspSE3":
        try:
            return cls(np.asarray(rec["R"], dtype=np.float64).reshape(3, 3), rec["t"],
                       str(rec["frame"]), tol=tol)
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"bad pose record: {exc}") from exc


@dataclass(frozen=True, eq=False)
class ContactPair:
    P1: np.ndarray   # visible contact
    P2: np.ndarray   # occluded contact
    frame: str = "cam"

    def __post_init__(self):
        object.__setattr__(self, "P1", vec3(self.P1))
        object.__setattr__(self, "P2", vec3(self.P2))

    @property
    def width(self) -> float:
        return float(norm(self.P1 - self.P2))


class BaseContacts(NamedTuple):
    P1: np.ndarray
    P2: np.ndarray
    Pc: np.ndarray


class NySolution(NamedTuple):
    plus: np.ndarray
    minus: np.ndarray
    selected: np.ndarray


def grasp_axis_from_normal(v_star, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Closing axis from the estimated outward surface normal at the visible contact."""
    return -unit_vec3(v_star, tol.unit_norm)


def contact_points(g: GraspMono, cam: PinholeCamera) -> ContactPair:
    """Back-project the visible contact and step ``w`` along the closing axis."""
    P1 = backproject(g.p, g.d, cam)
    return ContactPair(P1, P1 + g.w * g.n_x, "cam")


def to_base(pair: ContactPair, T_base_cam: RigidTransform) -> BaseContacts:
    T = T_base_cam.expect(pair.frame, "base")
    P1, P2 = T.apply(pair.P1), T.apply(pair.P2)
    return BaseContacts(P1, P2, 0.5 * (P1 + P2))


def _ny_basis(n_x, tol: Tolerances):
    c = float(dot(n_x, PLATFORM_NORMAL))
    s = math.sqrt(max(0.0, 1.0 - c * c))
    if s < tol.degenerate_axis:
        raise DegenerateAxis("closing axis is vertical; the dihedral angle does not fix the roll")
    e1 = (PLATFORM_NORMAL - c * n_x) / s
    e2 = cross(n_x, e1)
    return s, e1, e2


def feasible_phi_range(n_x, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """Closed interval of dihedral angles reachable for closing axis ``n_x`` (base frame)."""
    s, _, _ = _ny_basis(unit_vec3(n_x, tol.unit_norm), tol)
    lo = math.acos(min(1.0, s))
    return lo, math.pi - lo


def solve_ny(n_x, phi: float, tol: Tolerances = DEFAULT_TOLERANCES) -> NySolution:
    """Both unit vectors ``n_y`` with ``n_y ⊥ n_x`` and ``angle(n_y, n) = phi``.

    Writing ``n_y = cosθ e1 ± sinθ e2`` in the orthonormal basis of the plane
    orthogonal to ``n_x`` (``e1`` the normalized projection of the platform
    normal) turns the quadratic into ``s cosθ = cos phi``.  The selected
    root is the one whose ``n_z = n_x × n_y`` points into the platform
    (smallest ``n_z · n``); near-ties go to the ``+`` root.
    """
    n_x = unit_vec3(n_x, tol.unit_norm)
    if not (0.0 <= phi <= math.pi):
        raise InfeasibleAngle(f"phi {phi} outside [0, pi]")
    s, e1, e2 = _ny_basis(n_x, tol)
    cphi = math.cos(phi)
    if abs(cphi) > s + tol.angle_feasibility:
        raise InfeasibleAngle(
            f"phi={phi:.6g} unreachable: |cos phi|={abs(cphi):.6g} exceeds {s:.6g}"
        )
    cos_t = max(-1.0, min(1.0, cphi / s))
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    plus = cos_t * e1 + sin_t * e2
    minus = cos_t * e1 - sin_t * e2
    nz_plus = float(dot(cross(n_x, plus), PLATFORM_NORMAL))
    nz_minus = float(dot(cross(n_x, minus), PLATFORM_NORMAL))
    selected = minus if nz_minus < nz_plus - tol.branch_tie else plus
    return NySolution(plus, minus, selected)


def rotation_from_axis_phi(n_x, phi: float, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    n_y = solve_ny(n_x, phi, tol).selected
    return np.column_stack([n_x, n_y, cross(n_x, n_y)])


def dihedral_angle(n_y) -> float:
    """Angle between ``n_y`` and the platform normal, in [0, pi]."""
    n_y = np.asarray(n_y, dtype=np.float64)
    return float(math.atan2(float(norm(cross(n_y, PLATFORM_NORMAL))), float(dot(n_y, PLATFORM_NORMAL))))


def recover_pose(g: GraspMono, cam: PinholeCamera, T_base_cam: RigidTransform,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> GraspSE3:
    """Full 6-DoF grasp pose in the robot base frame."""
    g.validate(tol)
    T_base_cam.expect("cam", "base")
    base = to_base(contact_points(g, cam), T_base_cam)
    n_x = T_base_cam.rotate(g.n_x)
    R = rotation_from_axis_phi(n_x, g.phi, tol)
    return GraspSE3(R, base.Pc, "base", tol=max(tol.orthonormal, 1e-9))


def mono_from_pose(G: GraspSE3, w: float, cam: PinholeCamera, T_base_cam: RigidTransform,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> GraspMono:
    """Inverse of :func:`recover_pose` for a base-frame pose with jaw width ``w``.

    The visible contact is taken as ``t - (w/2) n_x`` (the closing axis points
    from the visible contact into the object).
    """
    T_cam_base = T_base_cam.expect("cam", "base").inverse()
    if G.frame == "cam":
        G = G.transformed(T_base_cam)
    P1_base, _ = G.contacts(w)
    P1 = T_cam_base.apply(P1_base)
    n_x = T_cam_base.rotate(G.n_x)
    return GraspMono(project(P1, cam), float(P1[2]), w, dihedral_angle(G.n_y), n_x).validate(tol)
