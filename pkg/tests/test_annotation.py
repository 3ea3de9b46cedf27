import math
from collections import Counter

import numpy as np
import pytest

from graspgeom.annotation import (AnnotationRecord, GraspLabel, SceneConfig, SceneObject, SceneView,
                                  annotate_scene, annotate_view, grasps_to_camera, labels_from_antipodal,
                                  normal_consistency)
from graspgeom.config import Tolerances
from graspgeom.errors import EmptyWindow, MissingDepth
from graspgeom.geom import (NormalMap, PinholeCamera, RigidTransform, box, icosphere, look_at,
                            nearest_surface_points, random_rotation, render_depth)
from graspgeom.pose import GraspSE3, recover_pose, rotation_from_axis_phi
from graspgeom.sampling import SamplerConfig, sample_grasps
from graspgeom.synthetic import make_scene

from conftest import rotation_error

# fine pixels so the sphere silhouette is sampled at ~0.2 mm
OVERHEAD = PinholeCamera(4800.0, 4800.0, 159.5, 159.5, 320, 320)


def overhead_view(objects, background=(), height=1.0):
    T_cam_base = look_at([0, 0, height], [0, 0, 0], up=[0, 1, 0]).inverse()
    world = [o.in_base() for o in list(objects) + list(background)]
    return SceneView(OVERHEAD, T_cam_base, render_depth(world, OVERHEAD, T_cam_base))


def horizontal_labels(name, w, n=12):
    out = []
    for k in range(n):
        a = math.pi * k / n
        n_x = np.array([math.cos(a), math.sin(a), 0.0])
        out.append(GraspLabel(f"{name}/{k:06d}/00", GraspSE3(rotation_from_axis_phi(n_x, math.pi / 2), [0, 0, 0], "obj"), w))
    return out


def check_roundtrip(scene, records, labels, tol_t=1e-6, tol_r=1e-6):
    by_id = {lab.grasp_id: lab for labs in labels.values() for lab in labs}
    for rec in records:
        view = scene.views[rec.view]
        T_base_cam = view.T_cam_base.inverse()
        G = recover_pose(rec.mono(), view.camera, T_base_cam)
        want = rec.G_cam.transformed(T_base_cam)
        assert np.linalg.norm(G.t - want.t) <= tol_t
        assert rotation_error(G.R, want.R) <= tol_r
        # the stored pose is the source pose, possibly with the jaws swapped
        src = by_id[rec.grasp_id].pose.transformed(view.T_cam_base @ scene.object(rec.object).T_base_obj)
        R = src.R if rec.visible == 1 else src.R @ np.diag([-1.0, -1.0, 1.0])
        assert np.allclose(R, rec.G_cam.R, atol=1e-12) and np.allclose(src.t, rec.G_cam.t, atol=1e-12)


# ---- frame composition ----------------------------------------------------

def test_grasps_to_camera_identity(rng):
    G = [GraspSE3(random_rotation(rng), rng.normal(size=3), "obj") for _ in range(5)]
    out = grasps_to_camera(G, RigidTransform.identity("obj", "base"), RigidTransform.identity("base", "cam"))
    for a, b in zip(G, out):
        assert np.array_equal(a.R, b.R) and np.array_equal(a.t, b.t) and b.frame == "cam"


def test_grasps_to_camera_composition(rng):
    for _ in range(200):
        G = GraspSE3(random_rotation(rng), rng.normal(size=3), "obj")
        Tbo = RigidTransform(random_rotation(rng), rng.normal(size=3), "obj", "base")
        Tcb = RigidTransform(random_rotation(rng), rng.normal(size=3), "base", "cam")
        (out,) = grasps_to_camera([G], Tbo, Tcb)
        seq = G.transformed(Tbo).transformed(Tcb)
        assert np.allclose(out.R, seq.R, atol=1e-12) and np.allclose(out.t, seq.t, atol=1e-12)
        a, b = G.contacts(0.05), out.contacts(0.05)
        assert np.linalg.norm(a[0] - a[1]) == pytest.approx(np.linalg.norm(b[0] - b[1]), abs=1e-12)


# ---- annotate_view --------------------------------------------------------

def test_sphere_rim_grasps_one_record_each():
    r = 0.03
    sphere = SceneObject("sphere", icosphere(4, r), RigidTransform.identity("obj", "base"))
    scene = SceneConfig([sphere], [], [overhead_view([sphere])])
    labels = {"sphere": horizontal_labels("sphere", 2 * r)}
    stats = Counter()
    records = annotate_view(scene, 0, labels, stats=stats)
    assert len(records) == len(labels["sphere"]) and stats["emitted"] == len(records)
    assert len({rec.grasp_id for rec in records}) == len(records)
    view = scene.views[0]
    for rec, lab in zip(records, labels["sphere"]):
        ends = np.array(lab.pose.transformed(view.T_cam_base @ sphere.T_base_obj).contacts(lab.w))
        _, pts = nearest_surface_points(ends, view.depth, view.camera)
        dist = np.linalg.norm(pts - ends, axis=1)
        assert np.all(dist <= 0.005)                       # both rim endpoints are near-visible
        assert rec.nn_distance == pytest.approx(dist.min(), abs=1e-15)
        assert rec.visible == 1 + int(dist[1] < dist[0])
    check_roundtrip(scene, records, labels)


def test_occluded_grasps_dropped():
    sphere = SceneObject("sphere", icosphere(3, 0.03), RigidTransform.identity("obj", "base"))
    lid = SceneObject("lid", box((0.3, 0.3, 0.01), center=(0, 0, 0.25)), RigidTransform.identity("obj", "base"))
    scene = SceneConfig([sphere], [lid], [overhead_view([sphere], [lid])])
    labels = {"sphere": horizontal_labels("sphere", 0.06)}
    stats = Counter()
    assert annotate_view(scene, 0, labels, stats=stats) == []
    assert stats["occluded"] == len(labels["sphere"]) and stats["collision"] == 0


def test_missing_depth():
    sphere = SceneObject("sphere", icosphere(2, 0.03), RigidTransform.identity("obj", "base"))
    view = overhead_view([sphere])
    scene = SceneConfig([sphere], [], [SceneView(view.camera, view.T_cam_base, None)])
    with pytest.raises(MissingDepth):
        annotate_view(scene, 0, {"sphere": horizontal_labels("sphere", 0.06)})


@pytest.fixture(scope="module")
def composite():
    scene = make_scene("composite", n_views=2)
    cfg = SamplerConfig(n_surface_samples=60, seed=5)
    labels = {o.name: labels_from_antipodal(o.name, sample_grasps(o.mesh, cfg)) for o in scene.objects}
    return scene, labels


def test_composite_roundtrip_and_stats(composite):
    scene, labels = composite
    per_view, stats = annotate_scene(scene, labels, jobs=2)
    assert sum(len(r) for r in per_view) > 30
    for records, st in zip(per_view, stats):
        check_roundtrip(scene, records, labels)
        assert st["total"] == sum(st[k] for k in ("collision", "unrepresentable", "occluded", "invalid", "emitted"))
        assert st["emitted"] == len(records)
        assert [r.grasp_id for r in records] == sorted(r.grasp_id for r in records)
        for rec in records:
            assert rec.nn_distance <= 0.005
            view = scene.views[rec.view]
            assert 0 <= rec.keypoint[0] < view.camera.width and 0 <= rec.keypoint[1] < view.camera.height
            assert view.depth.depth[rec.keypoint[1], rec.keypoint[0]] > 0


def test_jobs_do_not_change_output(composite):
    scene, labels = composite
    a, _ = annotate_scene(scene, labels, jobs=1)
    b, _ = annotate_scene(scene, labels, jobs=3)
    assert [[r.to_dict() for r in v] for v in a] == [[r.to_dict() for r in v] for v in b]


def test_d_vis_monotone(composite):
    scene, labels = composite
    prev = set()
    for d_vis in (0.0005, 0.002, 0.005, 0.02):
        ids = {r.grasp_id for r in annotate_view(scene, 0, labels, tol=Tolerances(d_vis=d_vis))}
        assert prev <= ids
        prev = ids


def test_record_roundtrip(composite):
    scene, labels = composite
    rec = annotate_view(scene, 0, labels)[0]
    again = AnnotationRecord.from_dict(rec.to_dict())
    assert again.to_dict() == rec.to_dict()


# ---- normal consistency ---------------------------------------------------

def _pairs_oracle(vecs):
    n = len(vecs)
    if n == 1:
        return 1.0
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            a, b = vecs[i], vecs[j]
            total += float(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return 0.5 * (total / (n * (n - 1) / 2) + 1.0)


def test_normal_consistency_constant():
    nm = NormalMap(np.tile([0.0, 0.0, -1.0], (10, 10, 1)))
    assert normal_consistency(nm, (5, 5), 3) == pytest.approx(1.0, abs=1e-15)


def test_normal_consistency_radius_zero(rng):
    nm = NormalMap(rng.normal(size=(6, 6, 3)))
    assert normal_consistency(nm, (2, 3), 0) == 1.0


def test_normal_consistency_half_split():
    # 2x2 window clipped at the corner: two up, two down -> 2 agreeing pairs, 4 opposing pairs
    n = np.zeros((8, 8, 3))
    n[:, :1, 2] = 1.0
    n[:, 1:, 2] = -1.0
    assert normal_consistency(NormalMap(n), (0, 0), 1) == pytest.approx((2 - 4) / 6 * 0.5 + 0.5, abs=1e-15)
    # full 8x8 split: n = 32 per side -> (n - 1) / (2n - 1)
    n[:, :4, 2] = 1.0
    assert normal_consistency(NormalMap(n), (4, 4), 10) == pytest.approx(31 / 63, abs=1e-15)


def test_normal_consistency_bruteforce(rng):
    for _ in range(30):
        n = rng.normal(size=(9, 9, 3))
        n[rng.random((9, 9)) < 0.2] = 0.0
        nm = NormalMap(n)
        p = tuple(rng.integers(0, 9, 2))
        r = int(rng.integers(0, 4))
        v0, v1 = max(0, p[1] - r), min(9, p[1] + r + 1)
        u0, u1 = max(0, p[0] - r), min(9, p[0] + r + 1)
        win = [n[v, u] for v in range(v0, v1) for u in range(u0, u1) if nm.valid[v, u]]
        if not win:
            with pytest.raises(EmptyWindow):
                normal_consistency(nm, p, r)
            continue
        assert normal_consistency(nm, p, r) == pytest.approx(_pairs_oracle(win), abs=1e-12)


def test_normal_consistency_outside():
    with pytest.raises(EmptyWindow):
        normal_consistency(NormalMap(np.ones((4, 4, 3))), (20, 20), 2)
