"""Conversions between the grasp parameterizations.

* ``mono``: ``{n_x, p, d, w, phi}`` (this package's native form)
* ``l2g``: two contacts plus the dihedral angle ``{P1, P2, phi}``
* ``contactnet``: visible contact, closing and approach axes, width ``{P1, n_x, n_z, w}``

Camera-frame grasps need intrinsics; anything involving ``phi`` also needs
T_base←cam because the dihedral angle is measured against the platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DegenerateContactPair, FrameMismatch, InvalidGrasp, NonOrthogonalFrame, SchemaError
from .geom.camera import PinholeCamera, project
from .geom.transform import RigidTransform
from .geom.vec import cross, dot, norm, unit_vec3, vec3
from .pose import GraspMono, contact_points, dihedral_angle, recover_pose


@dataclass(frozen=True, eq=False)
class GraspL2G:
    P1: np.ndarray
    P2: np.ndarray
    phi: float
    frame: str = "cam"

    def __post_init__(self):
        object.__setattr__(self, "P1", vec3(self.P1))
        object.__setattr__(self, "P2", vec3(self.P2))
        object.__setattr__(self, "phi", float(self.phi))
        if not (0.0 <= self.phi <= math.pi):
            raise InvalidGrasp(f"phi {self.phi} outside [0, pi]")

    def to_dict(self) -> dict:
        return {"P1": self.P1.tolist(), "P2": self.P2.tolist(), "phi": self.phi, "frame": self.frame}

    @classmethod
    def from_dict(cls, rec: dict) -> "GraspL2G":
        try:
            return cls(rec["P1"], rec["P2"], rec["phi"], str(rec["frame"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"bad l2g record: {exc}") from exc


@dataclass(frozen=True, eq=False)
class GraspContactNet:
    P1: np.ndarray
    n_x: np.ndarray
    n_z: np.ndarray
    w: float
    frame: str = "cam"

    def __post_init__(self):
        for name in ("P1", "n_x", "n_z"):
            object.__setattr__(self, name, vec3(getattr(self, name)))
        object.__setattr__(self, "w", float(self.w))

    def to_dict(self) -> dict:
        return {"P1": self.P1.tolist(), "nx": self.n_x.tolist(), "nz": self.n_z.tolist(),
                "w": self.w, "frame": self.frame}

    @classmethod
    def from_dict(cls, rec: dict) -> "GraspContactNet":
        try:
            return cls(rec["P1"], rec["nx"], rec["nz"], rec["w"], str(rec["frame"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"bad contactnet record: {exc}") from exc


def _in_cam(frame: str):
    if frame != "cam":
        raise FrameMismatch(f"expected a camera-frame grasp, got frame {frame!r}")


def l2g_to_mono(g: GraspL2G, cam: PinholeCamera, tol: Tolerances = DEFAULT_TOLERANCES) -> GraspMono:
    _in_cam(g.frame)
    delta = g.P2 - g.P1
    w = float(norm(delta))
    if w < tol.min_contact_distance:
        raise DegenerateContactPair(f"contacts coincide (distance {w:.3g} m)")
    return GraspMono(project(g.P1, cam), g.P1[2], w, g.phi, delta / w).validate(tol)


def mono_to_l2g(g: GraspMono, cam: PinholeCamera, tol: Tolerances = DEFAULT_TOLERANCES) -> GraspL2G:
    pair = contact_points(g.validate(tol), cam)
    return GraspL2G(pair.P1, pair.P2, g.phi, "cam")


def mono_to_contactnet(g: GraspMono, cam: PinholeCamera, T_base_cam: RigidTransform,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> GraspContactNet:
    G = recover_pose(g, cam, T_base_cam, tol)
    n_z = T_base_cam.inverse().rotate(G.n_z)
    return GraspContactNet(contact_points(g, cam).P1, g.n_x, n_z, g.w, "cam")


def contactnet_to_mono(g: GraspContactNet, cam: PinholeCamera, T_base_cam: RigidTransform,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> GraspMono:
    """``phi`` is read off ``n_y = n_z × n_x`` in the base frame.

    Only grasps whose approach axis points into the platform survive a round
    trip through ``mono``; the other branch is not representable there.
    """
    _in_cam(g.frame)
    T_base_cam.expect("cam", "base")
    n_x = unit_vec3(g.n_x, tol.unit_norm)
    n_z = unit_vec3(g.n_z, tol.unit_norm)
    if abs(float(dot(n_x, n_z))) > tol.orthogonality:
        raise NonOrthogonalFrame(f"n_x·n_z = {float(dot(n_x, n_z)):.3g}")
    n_y_base = T_base_cam.rotate(cross(n_z, n_x))
    return GraspMono(project(g.P1, cam), g.P1[2], g.w, dihedral_angle(n_y_base), n_x).validate(tol)


def l2g_to_contactnet(g: GraspL2G, cam: PinholeCamera, T_base_cam: RigidTransform,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> GraspContactNet:
    return mono_to_contactnet(l2g_to_mono(g, cam, tol), cam, T_base_cam, tol)


def contactnet_to_l2g(g: GraspContactNet, cam: PinholeCamera, T_base_cam: RigidTransform,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> GraspL2G:
    return mono_to_l2g(contactnet_to_mono(g, cam, T_base_cam, tol), cam, tol)


FORMATS = {"mono": GraspMono, "l2g": GraspL2G, "contactnet": GraspContactNet}


def convert(g, to: str, cam: PinholeCamera, T_base_cam: RigidTransform | None = None,
            tol: Tolerances = DEFAULT_TOLERANCES):
    """Convert ``g`` (any of the three classes) into format ``to``."""
    if to not in FORMATS:
        raise SchemaError(f"unknown grasp format {to!r}")
    if isinstance(g, FORMATS[to]):
        return g
    if isinstance(g, GraspContactNet) or to == "contactnet":
        if T_base_cam is None:
            raise SchemaError("conversions involving contactnet need T_base<-cam extrinsics")
    mono = g
    if isinstance(g, GraspL2G):
        mono = l2g_to_mono(g, cam, tol)
    elif isinstance(g, GraspContactNet):
        mono = contactnet_to_mono(g, cam, T_base_cam, tol)
    if to == "mono":
        return mono
    if to == "l2g":
        return mono_to_l2g(mono, cam, tol)
    return mono_to_contactnet(mono, cam, T_base_cam, tol)
