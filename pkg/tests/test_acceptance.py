"""End-to-end acceptance criteria; each test reports one PASS/FAIL line."""

import filecmp
import math
import time
from collections import Counter

import numpy as np
from scipy.ndimage import binary_erosion

from graspgeom.annotation import annotate_view, labels_from_antipodal
from graspgeom.cli import main
from graspgeom.collision import GripperModel, collision_check
from graspgeom.convert import (contactnet_to_l2g, contactnet_to_mono, l2g_to_contactnet, l2g_to_mono,
                               mono_to_contactnet, mono_to_l2g)
from graspgeom.geom import (PinholeCamera, RigidTransform, box, camera_raycast, icosphere, look_at, merge, plane,
                            pixel_directions, plane_depth, random_rotation, sphere_depth)
from graspgeom.pose import recover_pose, solve_ny
from graspgeom.sampling import SamplerConfig, force_closure, sample_grasps
from graspgeom.synthetic import make_scene
from graspgeom.training import normals_from_depth, roi_align

from conftest import report, rotation_error, run_pipeline, write_workspace
from test_pose import random_feasible, random_valid_grasp
from test_sampling import angle_oracle
from test_training import roi_oracle

N = np.array([0.0, 0.0, 1.0])
SWAP = np.diag([-1.0, -1.0, 1.0])


def test_criterion_1_pose_constraints():
    rng = np.random.default_rng(101)
    pairs = [random_feasible(rng) for _ in range(10_000)]
    start = time.perf_counter()
    worst, argmin_ok = 0.0, True
    for n_x, phi in pairs:
        sol = solve_ny(n_x, phi)
        for n_y in (sol.plus, sol.minus):
            worst = max(worst, abs(np.linalg.norm(n_y) - 1), abs(n_y @ n_x),
                        abs(math.acos(max(-1.0, min(1.0, n_y @ N))) - phi))
        nz_sel = np.cross(n_x, sol.selected) @ N
        argmin_ok &= bool(nz_sel <= min(np.cross(n_x, y) @ N for y in (sol.plus, sol.minus)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9 and argmin_ok and elapsed < 5.0
    report(1, "pose-recovery constraints", ok, f"max residual {worst:.2e}, argmin rule {argmin_ok}, {elapsed:.2f} s")
    assert ok


def test_criterion_2_roundtrips():
    rng = np.random.default_rng(202)
    cam = PinholeCamera(600.0, 600.0, 319.5, 239.5, 640, 480)
    worst = 0.0
    for _ in range(10_000):
        T = RigidTransform(random_rotation(rng), rng.normal(size=3), "cam", "base")
        g = random_valid_grasp(rng, cam, T)
        l2g, cn = mono_to_l2g(g, cam), mono_to_contactnet(g, cam, T)
        for m in (l2g_to_mono(l2g, cam), contactnet_to_mono(cn, cam, T)):
            worst = max(worst, np.max(np.abs(m.p - g.p)) / max(1.0, np.abs(g.p).max()), abs(m.d - g.d),
                        abs(m.w - g.w), abs(m.phi - g.phi), np.max(np.abs(m.n_x - g.n_x)))
        for a in (mono_to_l2g(l2g_to_mono(l2g, cam), cam), contactnet_to_l2g(l2g_to_contactnet(l2g, cam, T), cam, T)):
            worst = max(worst, np.max(np.abs(a.P1 - l2g.P1)), np.max(np.abs(a.P2 - l2g.P2)), abs(a.phi - l2g.phi))
        for c in (mono_to_contactnet(contactnet_to_mono(cn, cam, T), cam, T),
                  l2g_to_contactnet(contactnet_to_l2g(cn, cam, T), cam, T)):
            worst = max(worst, np.max(np.abs(c.P1 - cn.P1)), np.max(np.abs(c.n_x - cn.n_x)),
                        np.max(np.abs(c.n_z - cn.n_z)), abs(c.w - cn.w))
    ok = worst <= 1e-9
    report(2, "six representation round trips", ok, f"max deviation {worst:.2e} over 10^4 grasps")
    assert ok


def _visible_by_ray(world, cam, point, d_vis):
    """Independent visibility: the first hit on the camera ray through the point lies within d_vis of it."""
    if point[2] <= 0:
        return False
    u = cam.fx * point[0] / point[2] + cam.cx
    v = cam.fy * point[1] / point[2] + cam.cy
    if not (-0.5 <= u < cam.width - 0.5 and -0.5 <= v < cam.height - 0.5):
        return False
    dist = np.linalg.norm(point)
    hit = world.raycast(np.zeros(3), point / dist, eps=0.0)
    return hit is not None and hit.distance >= dist - d_vis


def test_criterion_3_annotation_consistency():
    gripper = GripperModel()
    worst_t = worst_r = 0.0
    eligible = emitted_eligible = emitted = unrepresentable = 0
    for kind in ("sphere", "cube", "composite"):
        scene = make_scene(kind, n_views=3)
        cfg = SamplerConfig(n_surface_samples=120, seed=17)
        labels = {o.name: labels_from_antipodal(o.name, sample_grasps(o.mesh, cfg)) for o in scene.objects}
        by_id = {lab.grasp_id: lab for labs in labels.values() for lab in labs}
        placed = {o.name: o.in_base() for o in scene.objects}
        background = [o.in_base() for o in scene.background]
        for i, view in enumerate(scene.views):
            stats = Counter()
            records = annotate_view(scene, i, labels, gripper, stats=stats)
            unrepresentable += stats["unrepresentable"]
            emitted += len(records)
            T_base_cam = view.T_cam_base.inverse()
            for rec in records:
                # recovered pose vs the stored camera-frame pose
                G = recover_pose(rec.mono(), view.camera, T_base_cam)
                want = rec.G_cam.transformed(T_base_cam)
                # stored pose vs the source label (jaws swapped when the second contact is the visible one)
                src = by_id[rec.grasp_id].pose.transformed(view.T_cam_base @ scene.object(rec.object).T_base_obj)
                R_src = src.R if rec.visible == 1 else src.R @ SWAP
                worst_t = max(worst_t, np.linalg.norm(G.t - want.t), np.linalg.norm(rec.G_cam.t - src.t))
                worst_r = max(worst_r, rotation_error(G.R, want.R), rotation_error(rec.G_cam.R, R_src))
            emitted_ids = {r.grasp_id for r in records}
            world = merge(list(placed.values()) + background).transformed(view.T_cam_base)
            for obj in scene.objects:
                obstacles = background + [m for n, m in placed.items() if n != obj.name]
                for lab in labels[obj.name]:
                    if not collision_check(lab.pose.transformed(obj.T_base_obj), gripper, obstacles, lab.w):
                        continue
                    ends = lab.pose.transformed(view.T_cam_base @ obj.T_base_obj).contacts(lab.w)
                    if any(_visible_by_ray(world, view.camera, e, 0.005) for e in ends):
                        eligible += 1
                        emitted_eligible += lab.grasp_id in emitted_ids
    frac = emitted_eligible / max(1, eligible)
    ok = worst_t <= 1e-6 and worst_r <= 1e-6 and frac >= 0.95 and emitted > 0
    report(3, "end-to-end annotation consistency", ok,
           f"{emitted} records, max error {worst_t:.1e} m / {worst_r:.1e} rad, emitted {emitted_eligible}/{eligible}"
           f" = {frac:.3f} of visible collision-free grasps, {unrepresentable} unrepresentable")
    assert ok


def test_criterion_4_sampler_oracles():
    sphere = icosphere(4, radius=1.0)
    sg = sample_grasps(sphere, SamplerConfig(mu=0.3, w_max=3.0, n_surface_samples=1000, seed=41))
    width_dev = max(abs(g.w - 2.0) / 2.0 for g in sg)
    line_dist = max(np.linalg.norm(np.cross(g.P1, g.n_x)) for g in sg)
    cube = box((1.0, 1.0, 1.0))
    cg = sample_grasps(cube, SamplerConfig(mu=0.05, w_max=3.0, n_surface_samples=1000, seed=42))
    opposing = 0
    for g in cg:
        k = int(np.argmax(np.abs(g.n_x)))
        opposing += (abs(abs(g.P1[k]) - 0.5) < 1e-9 and abs(abs(g.P2[k]) - 0.5) < 1e-9
                     and np.sign(g.P1[k]) != np.sign(g.P2[k]))
    cube_dev = max(abs(g.w - 1.0) for g in cg)
    ok = (sg and width_dev <= 0.01 and line_dist <= 0.02 and cg and opposing == len(cg) and cube_dev <= 1e-6)
    report(4, "sampler analytic oracles", bool(ok),
           f"sphere {len(sg)} grasps, width dev {width_dev:.1e} rel, line offset {line_dist:.1e}; "
           f"cube {len(cg)} grasps, {opposing} opposing, width dev {cube_dev:.1e}")
    assert ok


def test_criterion_5_force_closure_oracle():
    rng = np.random.default_rng(505)
    n = 100_000
    P1 = rng.normal(size=(n, 3))
    P2 = P1 + rng.normal(size=(n, 3))
    line = (P2 - P1) / np.linalg.norm(P2 - P1, axis=1, keepdims=True)
    v1 = -line + rng.uniform(0.1, 1.5, (n, 1)) * rng.normal(size=(n, 3))
    v2 = line + rng.uniform(0.1, 1.5, (n, 1)) * rng.normal(size=(n, 3))
    v1 /= np.linalg.norm(v1, axis=1, keepdims=True)
    v2 /= np.linalg.norm(v2, axis=1, keepdims=True)
    mu = rng.uniform(0.01, 3.0, n)
    got = force_closure(P1, v1, P2, v2, mu)
    want = np.array([angle_oracle(P1[i].tolist(), v1[i].tolist(), P2[i].tolist(), v2[i].tolist(), float(mu[i]))
                     for i in range(n)])
    bad = int(np.sum(got != want))
    ok = bad == 0
    report(5, "force-closure oracle equivalence", ok,
           f"{bad} disagreements over {n} configurations ({want.mean():.2f} in closure)")
    assert ok


def test_criterion_6_roi_align():
    rng = np.random.default_rng(606)
    const_err = max(np.max(np.abs(roi_align(np.broadcast_to(c, (h, w, 6))) - c))
                    for h, w, c in [(1, 1, 0.3), (17, 40, -2.5), (111, 111, 7.0), (230, 180, 1e3)])
    x = rng.normal(size=(112, 112, 6))
    ident_err = np.max(np.abs(roi_align(x) - x))
    oracle_err = 0.0
    for _ in range(100):
        h, w = rng.integers(1, 65, size=2)
        t = rng.normal(size=(h, w, 6))
        oracle_err = max(oracle_err, np.max(np.abs(roi_align(t) - roi_oracle(t, 112))))
    ok = const_err <= 1e-12 and ident_err <= 1e-12 and oracle_err <= 1e-9
    report(6, "RoI Align", ok, f"constant {const_err:.1e}, identity {ident_err:.1e}, oracle {oracle_err:.1e}")
    assert ok


def _angles(a, b):
    return np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), np.sum(a * b, axis=-1))


def test_criterion_7_normals():
    cam = PinholeCamera(400.0, 400.0, 159.5, 119.5, 320, 240)
    plane_err = 0.0
    for n in ([0, 0, -1], [math.sqrt(0.5), 0, -math.sqrt(0.5)], [0, -math.sqrt(0.5), -math.sqrt(0.5)]):
        n = np.array(n)
        nm = normals_from_depth(plane_depth(cam, [0, 0, 0.8], n), cam)
        plane_err = max(plane_err, np.max(_angles(nm.normals[nm.valid], n)))
    c, r = np.array([0.02, -0.01, 0.6]), 0.15
    D = sphere_depth(cam, c, r)
    nm = normals_from_depth(D, cam)
    keep = binary_erosion(D.valid, iterations=3)
    vs, us = np.nonzero(keep)
    P = np.stack([(us - cam.cx) / cam.fx, (vs - cam.cy) / cam.fy, np.ones(len(us))], 1) * D.depth[vs, us][:, None]
    sphere_err = np.degrees(np.max(_angles(nm.normals[vs, us], (P - c) / r)))
    ok = plane_err <= 1e-3 and sphere_err <= 2.0
    report(7, "normals from depth", ok, f"planes {plane_err:.1e} rad, sphere {sphere_err:.3f} deg over {len(us)} px")
    assert ok


def test_criterion_8_determinism(tmp_path, monkeypatch):
    roots = []
    for name, jobs in (("a", 1), ("b", 1), ("c", 4)):
        root = tmp_path / name
        root.mkdir()
        write_workspace(root, kind="composite", n_views=2, n_samples=80)
        monkeypatch.chdir(root)
        run_pipeline(main, root, ["sphere", "cube", "slab"], jobs=jobs, seed=8)
        roots.append(root)
    files = [{str(p.relative_to(r)) for p in r.rglob("*") if p.is_file()} for r in roots]
    outputs = sorted(files[0])
    mismatched = [f for f in outputs for other in roots[1:]
                  if not (other / f).is_file() or not filecmp.cmp(roots[0] / f, other / f, shallow=False)]
    extra = (files[1] | files[2]) - files[0]
    ok = len(outputs) > 10 and not mismatched and not extra
    report(8, "determinism across runs and --jobs", ok,
           f"{len(outputs)} output files compared across 3 runs, {len(mismatched)} differ, {len(extra)} extra")
    assert ok


def _oracle_hits(mesh, origins, dirs):
    """Exhaustive nearest hit by plane intersection plus a barycentric inside test (closed triangles)."""
    tri = mesh.corners
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    n = np.cross(b - a, c - a)
    faces = np.full(len(origins), -1)
    dist = np.full(len(origins), np.inf)
    for k, (o, d) in enumerate(zip(origins, dirs)):
        den = n @ d
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.einsum("fc,fc->f", n, a - o) / den
        p = o + t[:, None] * d
        # inside test: p is on the inner side of all three edges
        s0 = np.einsum("fc,fc->f", np.cross(b - a, p - a), n)
        s1 = np.einsum("fc,fc->f", np.cross(c - b, p - b), n)
        s2 = np.einsum("fc,fc->f", np.cross(a - c, p - c), n)
        ok = (np.abs(den) > 1e-12 * np.linalg.norm(n, axis=1)) & (t > 0) & (s0 >= 0) & (s1 >= 0) & (s2 >= 0)
        if ok.any():
            f = int(np.flatnonzero(ok)[np.argmin(t[ok])])
            faces[k], dist[k] = f, t[f]
    return faces, dist


def test_criterion_9_raycast():
    rng = np.random.default_rng(909)
    meshes = {
        "icosphere": icosphere(4, 0.1),
        # box lifted off the plane: coincident faces would make the nearest hit ambiguous
        "composite": merge([icosphere(4, 0.05, center=(0.03, 0, 0.05)), box((0.06, 0.1, 0.04), center=(-0.05, 0, 0.025)),
                            icosphere(3, 0.03, center=(0, 0.08, 0.03)), plane(0.4)]),
    }
    bad_single = bad_oracle = bad_camera = 0
    total_rays = total_hits = 0
    for name, mesh in meshes.items():
        assert mesh.n_faces <= 10_000
        # random rays aimed at random points around the mesh
        lo, hi = mesh.bounds
        origins = rng.uniform(lo - 0.3, hi + 0.3, size=(1000, 3))
        targets = rng.uniform(lo, hi, size=(1000, 3))
        dirs = targets - origins
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        _, bf, bd = mesh.raycast_batch(origins, dirs, eps=0.0)
        for k in range(len(origins)):
            hit = mesh.raycast(origins[k], dirs[k], eps=0.0)
            if (hit is None) != (bf[k] < 0) or (hit is not None and (hit.face != bf[k] or hit.distance != bd[k])):
                bad_single += 1
        of, od = _oracle_hits(mesh, origins, dirs)
        hit = bf >= 0
        bad_oracle += int(np.sum(of != bf)) + int(np.sum(np.abs(od[hit] - bd[hit]) > 1e-9))
        total_rays += len(origins)
        total_hits += int(np.sum(bf >= 0))
        # the accelerated camera path against the exhaustive one, 1000 pixel rays per camera
        cam = PinholeCamera(45.0, 45.0, 19.5, 12.0, 40, 25)
        for _ in range(3):
            eye = rng.normal(size=3)
            eye = 0.5 * eye / np.linalg.norm(eye) + np.array([0, 0, 0.2])
            T_cam_world = look_at(eye, rng.uniform(lo, hi)).inverse()
            local = mesh.transformed(T_cam_world)
            faces, dist = camera_raycast(local, cam)
            rays = pixel_directions(cam).reshape(-1, 3)
            _, ef, ed = local.raycast_batch(np.zeros_like(rays), rays, eps=0.0)
            bad_camera += int(np.sum((faces.reshape(-1) != ef) | (dist.reshape(-1) != ed)))
            total_rays += len(rays)
    ok = bad_single == 0 and bad_oracle == 0 and bad_camera == 0 and total_hits > 500
    report(9, "raycast correctness", ok,
           f"{total_rays} rays; single vs batch {bad_single}, independent oracle {bad_oracle}, "
           f"accelerated camera path {bad_camera} mismatches")
    assert ok
