"""View-level grasp annotation: object grasps to per-camera keypoint labels.

Pipeline per grasp: object frame -> base frame (collision check against the
background and the other objects) -> camera frame -> choose the visible
contact from the ground-truth depth -> keypoint pixel and the
``{d, w, phi, n_x}`` targets.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .collision import GripperModel, collision_check
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import EmptyWindow, InputError, InvalidGrasp, MissingDepth, SchemaError
from .geom.camera import PinholeCamera, project
from .geom.depth import DepthMap, NormalMap, load_depth, nearest_surface_points
from .geom.mesh import TriangleMesh
from .geom.meshio import load_mesh
from .geom.transform import RigidTransform
from .geom.vec import PLATFORM_NORMAL, dot, norm
from .pose import GraspMono, GraspSE3, dihedral_angle

log = logging.getLogger(__name__)

# rotation by pi about the approach axis: same parallel-jaw grasp, jaws swapped
_SWAP_JAWS = np.diag([-1.0, -1.0, 1.0])


@dataclass(frozen=True, eq=False)
class SceneObject:
    name: str
    mesh: TriangleMesh
    T_base_obj: RigidTransform
    mesh_ref: Optional[str] = None

    def in_base(self) -> TriangleMesh:
        return self.mesh.transformed(self.T_base_obj)


@dataclass(frozen=True, eq=False)
class SceneView:
    camera: PinholeCamera
    T_cam_base: RigidTransform
    depth: Optional[DepthMap] = None
    depth_ref: Optional[str] = None
    rgb_ref: Optional[str] = None


@dataclass(frozen=True, eq=False)
class SceneConfig:
    objects: list
    background: list = field(default_factory=list)
    views: list = field(default_factory=list)

    def object(self, name: str) -> SceneObject:
        for o in self.objects:
            if o.name == name:
                return o
        raise KeyError(name)

    @classmethod
    def from_json(cls, path, load_depths: bool = True) -> "SceneConfig":
        path = Path(path)
        if not path.is_file():
            raise InputError(f"scene file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data, path.parent, load_depths)

    @classmethod
    def from_dict(cls, data: dict, root=".", load_depths: bool = True) -> "SceneConfig":
        root = Path(root)
        unknown = set(data) - {"objects", "background", "views", "depth_scale"}
        if unknown:
            raise SchemaError(f"scene: unknown keys {sorted(unknown)}")
        scale = float(data.get("depth_scale", 1e-4))

        def objects(key):
            out = []
            for i, rec in enumerate(data.get(key, [])):
                if set(rec) - {"name", "mesh", "T_base_obj"}:
                    raise SchemaError(f"scene.{key}[{i}]: unknown keys {sorted(set(rec) - {'name', 'mesh', 'T_base_obj'})}")
                try:
                    name, ref = str(rec["name"]), str(rec["mesh"])
                    T = _transform(rec["T_base_obj"], "obj", "base")
                except KeyError as exc:
                    raise SchemaError(f"scene.{key}[{i}]: missing {exc}") from exc
                out.append(SceneObject(name, load_mesh(root / ref), T, ref))
            return out

        views = []
        for i, rec in enumerate(data.get("views", [])):
            if set(rec) - {"camera", "T_cam_base", "depth", "rgb"}:
                raise SchemaError(f"scene.views[{i}]: unknown keys")
            try:
                cam = PinholeCamera.from_dict(rec["camera"])
                T = _transform(rec["T_cam_base"], "base", "cam")
            except KeyError as exc:
                raise SchemaError(f"scene.views[{i}]: missing {exc}") from exc
            depth = None
            ref = rec.get("depth")
            if ref is not None and load_depths:
                depth = load_depth(root / ref, scale)
                depth.check_camera(cam)
            views.append(SceneView(cam, T, depth, ref, rec.get("rgb")))
        scene = cls(objects("objects"), objects("background"), views)
        names = [o.name for o in scene.objects + scene.background]
        if len(set(names)) != len(names):
            raise SchemaError("scene object names must be unique")
        return scene


def _transform(rec: dict, frm: str, to: str) -> RigidTransform:
    rec = dict(rec)
    rec.setdefault("from", frm)
    rec.setdefault("to", to)
    return RigidTransform.from_dict(rec).expect(frm, to)


@dataclass(frozen=True, eq=False)
class GraspLabel:
    """Object-frame grasp pose with its jaw opening."""

    grasp_id: str
    pose: GraspSE3
    w: float


def labels_from_antipodal(object_name: str, grasps, tol: Tolerances = DEFAULT_TOLERANCES) -> list[GraspLabel]:
    out = []
    for g in grasps:
        for k, pose in enumerate(g.poses(tol)):
            out.append(GraspLabel(f"{object_name}/{g.sample_index:06d}/{k:02d}", pose, g.w))
    return out


@dataclass(frozen=True, eq=False)
class AnnotationRecord:
    view: int
    grasp_id: str
    object: str
    G_cam: GraspSE3          # closing axis points from the visible contact to the other one
    keypoint: tuple          # integer pixel of the nearest visible surface point
    uv: np.ndarray           # exact projection of the visible contact
    d: float
    w: float
    phi: float
    n_x_cam: np.ndarray
    visible: int             # which source contact (1 or 2) is visible
    nn_distance: float

    def mono(self) -> GraspMono:
        return GraspMono(self.uv, self.d, self.w, self.phi, self.n_x_cam)

    def to_dict(self) -> dict:
        rec = {"view": self.view, "grasp_id": self.grasp_id, "object": self.object}
        rec.update(self.mono().to_dict())
        rec.update({"keypoint": [int(self.keypoint[0]), int(self.keypoint[1])],
                    "visible": self.visible, "nn_distance": float(self.nn_distance),
                    "G_cam": self.G_cam.to_dict()})
        return rec

    @classmethod
    def from_dict(cls, rec: dict) -> "AnnotationRecord":
        try:
            return cls(int(rec["view"]), str(rec["grasp_id"]), str(rec["object"]),
                       GraspSE3.from_dict(rec["G_cam"]), tuple(int(x) for x in rec["keypoint"]),
                       np.array([rec["u"], rec["v"]], dtype=np.float64), float(rec["d"]),
                       float(rec["w"]), float(rec["phi"]), np.asarray(rec["nx"], dtype=np.float64),
                       int(rec["visible"]), float(rec["nn_distance"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"bad annotation record: {exc}") from exc


def grasps_to_camera(G_obj, T_base_obj: RigidTransform, T_cam_base: RigidTransform) -> list[GraspSE3]:
    """Re-express object-frame grasps in the camera frame via T_cam←obj = T_cam←base · T_base←obj."""
    T_cam_obj = T_cam_base.expect("base", "cam") @ T_base_obj.expect("obj", "base")
    return [g.transformed(T_cam_obj) for g in G_obj]


def annotate_view(scene: SceneConfig, view_index: int, grasps: dict,
                  gripper: GripperModel = GripperModel(), tol: Tolerances = DEFAULT_TOLERANCES,
                  stats: Counter | None = None) -> list[AnnotationRecord]:
    """Annotate one view.

    ``grasps`` maps object names to lists of :class:`GraspLabel` (object
    frame).  Records come back sorted by ``grasp_id``.  ``stats`` (if given)
    is updated with per-reason drop counts.
    """
    view = scene.views[view_index]
    if view.depth is None:
        raise MissingDepth(f"view {view_index} has no ground-truth depth map")
    view.depth.check_camera(view.camera)
    stats = Counter() if stats is None else stats
    cam, T_cam_base = view.camera, view.T_cam_base.expect("base", "cam")
    placed = {o.name: o.in_base() for o in scene.objects}
    background = [o.in_base() for o in scene.background]

    candidates = []   # (object, label, G_base, G_cam)
    for obj in scene.objects:
        obstacles = background + [m for name, m in placed.items() if name != obj.name]
        labels = grasps.get(obj.name, [])
        T_cam_obj = T_cam_base @ obj.T_base_obj.expect("obj", "base")
        for label in labels:
            stats["total"] += 1
            G_base = label.pose.transformed(obj.T_base_obj)
            if not collision_check(G_base, gripper, obstacles, label.w):
                stats["collision"] += 1
                continue
            if not _representable(G_base, tol):
                stats["unrepresentable"] += 1
                continue
            candidates.append((obj, label, G_base, label.pose.transformed(T_cam_obj)))
    if not candidates:
        return []

    ends = np.array([G_cam.contacts(lab.w) for _, lab, _, G_cam in candidates])   # (N, 2, 3)
    in_front = ends[..., 2] > 0
    pix, pts = nearest_surface_points(ends.reshape(-1, 3), view.depth, cam)
    pix, pts = pix.reshape(-1, 2, 2), pts.reshape(-1, 2, 3)
    dist = norm(pts - ends)
    dist = np.where(in_front, dist, np.inf)

    records = []
    for i, (obj, label, G_base, G_cam) in enumerate(candidates):
        if not np.any(dist[i] <= tol.d_vis):
            stats["occluded"] += 1
            continue
        k = 0 if dist[i, 0] <= dist[i, 1] else 1
        vis, other = ends[i, k], ends[i, 1 - k]
        if k == 1:
            G_cam = GraspSE3(G_cam.R @ _SWAP_JAWS, G_cam.t, "cam")
            G_base = GraspSE3(G_base.R @ _SWAP_JAWS, G_base.t, "base")
        n_x = (other - vis) / norm(other - vis)
        rec = AnnotationRecord(
            view=view_index, grasp_id=label.grasp_id, object=obj.name, G_cam=G_cam,
            keypoint=(int(pix[i, k, 0]), int(pix[i, k, 1])), uv=project(vis, cam),
            d=float(vis[2]), w=float(label.w), phi=dihedral_angle(G_base.n_y), n_x_cam=n_x,
            visible=k + 1, nn_distance=float(dist[i, k]),
        )
        try:
            rec.mono().validate(tol)
        except InvalidGrasp:
            stats["invalid"] += 1
            continue
        stats["emitted"] += 1
        records.append(rec)
    records.sort(key=lambda r: r.grasp_id)
    return records


def _representable(G_base: GraspSE3, tol: Tolerances) -> bool:
    """Five-parameter grasps always approach the platform and need a non-vertical closing axis."""
    n_x = G_base.n_x
    c = float(dot(n_x, PLATFORM_NORMAL))
    if (1.0 - c * c) ** 0.5 < tol.degenerate_axis:
        return False
    return float(dot(G_base.n_z, PLATFORM_NORMAL)) <= tol.branch_tie


def annotate_scene(scene: SceneConfig, grasps: dict, gripper: GripperModel = GripperModel(),
                   tol: Tolerances = DEFAULT_TOLERANCES, jobs: int = 1):
    """All views; returns ``(records per view, stats per view)``."""
    def one(i):
        st = Counter()
        return annotate_view(scene, i, grasps, gripper, tol, st), st

    idx = range(len(scene.views))
    if jobs > 1 and len(scene.views) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, idx))
    else:
        results = [one(i) for i in idx]
    return [r for r, _ in results], [s for _, s in results]


def normal_consistency(normals: NormalMap, p, radius: int) -> float:
    """Mean pairwise cosine similarity of valid normals in a square window, mapped to [0, 1].

    The window is ``(2 radius + 1)²`` pixels centred on ``p = (u, v)``, clipped
    to the image.  A single valid normal scores 1.
    """
    u, v = int(round(p[0])), int(round(p[1]))
    H, W = normals.normals.shape[:2]
    u0, u1 = max(0, u - radius), min(W, u + radius + 1)
    v0, v1 = max(0, v - radius), min(H, v + radius + 1)
    if u0 >= u1 or v0 >= v1:
        raise EmptyWindow(f"window around {p} does not intersect the image")
    win = normals.normals[v0:v1, u0:u1].reshape(-1, 3)
    win = win[normals.valid[v0:v1, u0:u1].reshape(-1)]
    n = len(win)
    if n == 0:
        raise EmptyWindow(f"no valid normals around {p}")
    if n == 1:
        return 1.0
    win = win / norm(win)[:, None]
    s = win.sum(axis=0)
    mean_cos = (float(dot(s, s)) - n) / (n * (n - 1))
    return float(np.clip(0.5 * (mean_cos + 1.0), 0.0, 1.0))
