"""Synthetic tabletop scenes with pixel-perfect depth, for demos and tests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .annotation import SceneConfig, SceneObject, SceneView
from .geom.camera import PinholeCamera
from .geom.depth import save_depth
from .geom.mesh import TriangleMesh, box, icosphere, merge, plane
from .geom.meshio import save_mesh
from .geom.render import render_depth
from .geom.transform import RigidTransform, look_at, rotation_about

DEFAULT_CAMERA = PinholeCamera(300.0, 300.0, 79.5, 59.5, 160, 120)


def place(mesh: TriangleMesh, xy=(0.0, 0.0), yaw: float = 0.0) -> RigidTransform:
    """Rest ``mesh`` on the table (z = 0) at ``xy`` with a rotation about z."""
    R = rotation_about([0.0, 0.0, 1.0], yaw)
    z = -float(mesh.vertices[:, 2].min())
    return RigidTransform(R, [xy[0], xy[1], z], "obj", "base")


def tabletop(kind: str = "sphere"):
    """Objects for one of the stock scenes: ``sphere``, ``cube`` or ``composite``."""
    sphere = icosphere(3, 0.03)
    cube = box((0.05, 0.05, 0.05))
    if kind == "sphere":
        return [SceneObject("sphere", sphere, place(sphere, yaw=0.3))]
    if kind == "cube":
        return [SceneObject("cube", cube, place(cube, yaw=0.5))]
    if kind == "composite":
        slab = box((0.03, 0.07, 0.04))
        return [
            SceneObject("sphere", sphere, place(sphere, (-0.04, 0.02), 0.2)),
            SceneObject("cube", cube, place(cube, (0.05, -0.01), 0.7)),
            SceneObject("slab", slab, place(slab, (0.0, -0.07), -0.4)),
        ]
    raise ValueError(f"unknown scene kind {kind!r}")


def ring_cameras(n_views: int = 3, radius: float = 0.35, height: float = 0.4,
                 target=(0.0, 0.0, 0.03)) -> list[RigidTransform]:
    """T_cam←base for cameras spaced around the workspace, looking at ``target``."""
    out = []
    for k in range(n_views):
        a = -np.pi / 2 + 2 * np.pi * k / n_views
        eye = [radius * np.cos(a), radius * np.sin(a), height]
        out.append(look_at(eye, target).inverse())
    return out


def make_scene(kind: str = "sphere", n_views: int = 3, cam: PinholeCamera = DEFAULT_CAMERA,
               table_size: float = 0.6) -> SceneConfig:
    objects = tabletop(kind)
    table = SceneObject("table", plane(table_size), RigidTransform.identity("obj", "base"))
    world = [o.in_base() for o in objects] + [table.in_base()]
    views = [SceneView(cam, T, render_depth(world, cam, T)) for T in ring_cameras(n_views)]
    return SceneConfig(objects, [table], views)


def shade(scene: SceneConfig, view_index: int) -> np.ndarray:
    """Simple Lambertian RGB render (uint8) of a view, one flat colour per object."""
    view = scene.views[view_index]
    parts = [o.in_base() for o in scene.objects + scene.background]
    colors = np.array([[200, 60, 60], [60, 160, 220], [90, 200, 90], [230, 200, 80]], dtype=np.float64)
    owner = np.concatenate([np.full(m.n_faces, k % len(colors)) for k, m in enumerate(parts[:-1])]
                           + [np.full(parts[-1].n_faces, len(colors) - 1)])
    _, faces, mesh = render_depth(parts, view.camera, view.T_cam_base, return_faces=True)
    light = np.array([0.3, -0.5, -0.8])
    light /= np.linalg.norm(light)
    img = np.zeros(view.camera.shape + (3,))
    hit = faces >= 0
    lam = np.clip(-(mesh.face_normals[faces[hit]] @ light), 0.0, 1.0)
    img[hit] = colors[owner[faces[hit]]] * (0.3 + 0.7 * lam[:, None])
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def write_scene(scene: SceneConfig, root, depth_format: str = "bin", with_rgb: bool = True) -> Path:
    """Write meshes, depth maps, RGB images and ``scene.json`` under ``root``."""
    root = Path(root)
    (root / "meshes").mkdir(parents=True, exist_ok=True)
    (root / "depth").mkdir(exist_ok=True)
    if with_rgb:
        (root / "rgb").mkdir(exist_ok=True)

    def obj_rec(o):
        ref = f"meshes/{o.name}.ply"
        save_mesh(o.mesh, root / ref)
        T = o.T_base_obj
        return {"name": o.name, "mesh": ref,
                "T_base_obj": {"R": T.rotation.reshape(-1).tolist(), "t": T.translation.tolist()}}

    views = []
    for i, v in enumerate(scene.views):
        ref = f"depth/view_{i:04d}.{depth_format}"
        save_depth(v.depth, root / ref)
        rec = {"camera": v.camera.to_dict(),
               "T_cam_base": {"R": v.T_cam_base.rotation.reshape(-1).tolist(),
                              "t": v.T_cam_base.translation.tolist()},
               "depth": ref}
        if with_rgb:
            rec["rgb"] = f"rgb/view_{i:04d}.png"
            Image.fromarray(shade(scene, i)).save(root / rec["rgb"])
        views.append(rec)
    data = {"objects": [obj_rec(o) for o in scene.objects],
            "background": [obj_rec(o) for o in scene.background],
            "views": views}
    path = root / "scene.json"
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path


__all__ = ["DEFAULT_CAMERA", "make_scene", "place", "ring_cameras", "shade", "tabletop", "write_scene", "merge"]
