"""``graspgeom`` batch command line.

Subcommands: sample-grasps, annotate, gen-training, convert, recover, selfcheck.
Exit status: 0 ok, 2 I/O, 3 schema/config, 4 geometry, 1 anything else.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .annotation import AnnotationRecord, SceneConfig, annotate_view, labels_from_antipodal
from .convert import FORMATS, convert
from .errors import GraspGeomError, InputError, SchemaError
from .geom.camera import PinholeCamera
from .geom.depth import load_depth
from .geom.meshio import load_mesh
from .geom.transform import RigidTransform
from .io import (load_camera, load_transform, read_json, read_jsonl, write_json, write_jsonl,
                 write_manifest)
from .pipeline_config import PipelineConfig
from .pose import GraspMono, recover_pose
from .sampling import AntipodalGrasp, sample_grasps
from .training import crop_pair, make_heatmap, normals_from_depth, roi_align, save_heatmap

log = logging.getLogger("graspgeom")


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="pipeline config JSON")
    parser.add_argument("--seed", type=int, default=d, help="overrides the config seed")
    parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="worker threads (outputs do not depend on this)")
    parser.add_argument("--dry-run", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="validate inputs and config without writing anything")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graspgeom", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"graspgeom {__version__}")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample-grasps", help="antipodal grasp labels for one mesh")
    _common(s, suppress=True)
    s.add_argument("--mesh")
    s.add_argument("--out")

    s = sub.add_parser("annotate", help="per-view keypoint annotations for a scene")
    _common(s, suppress=True)
    s.add_argument("--scene")
    s.add_argument("--grasps", help="directory with one <object>.jsonl per scene object")
    s.add_argument("--out")

    s = sub.add_parser("gen-training", help="heatmaps and aligned RGB+normal crops")
    _common(s, suppress=True)
    s.add_argument("--anno")
    s.add_argument("--rgb")
    s.add_argument("--depth")
    s.add_argument("--r", type=int)
    s.add_argument("--out")

    s = sub.add_parser("convert", help="convert a grasp file between representations")
    _common(s, suppress=True)
    s.add_argument("--from", dest="src", required=True, choices=sorted(FORMATS))
    s.add_argument("--to", dest="dst", required=True, choices=sorted(FORMATS))
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--camera", required=True, help="intrinsics JSON")
    s.add_argument("--extrinsics", help="T_base<-cam JSON {R, t}")

    s = sub.add_parser("recover", help="6-DoF base-frame poses from five-parameter grasps")
    _common(s, suppress=True)
    s.add_argument("--anno", help="annotation directory written by 'annotate'")
    s.add_argument("--grasps", help="mono grasp JSON-lines (needs --camera and --extrinsics)")
    s.add_argument("--camera")
    s.add_argument("--extrinsics")
    s.add_argument("--out", required=True)

    s = sub.add_parser("selfcheck", help="run the analytic-shape oracles")
    _common(s, suppress=True)
    return p


def _need(value, flag: str):
    if value is None:
        raise SchemaError(f"missing required option {flag}")
    return value


def _load_config(args) -> PipelineConfig:
    if args.config is None:
        return PipelineConfig()
    return PipelineConfig.from_dict(read_json(args.config))


def _seed(args, cfg: PipelineConfig) -> int:
    if args.seed is not None:
        return args.seed
    if cfg.seed is not None:
        return cfg.seed
    return cfg.sampler.seed


def _pick(args, cfg: PipelineConfig, name: str):
    v = getattr(args, name, None)
    return v if v is not None else getattr(cfg.paths, name)


# -- subcommands --------------------------------------------------------------

def cmd_sample(args, cfg: PipelineConfig) -> int:
    mesh_path = _need(_pick(args, cfg, "mesh"), "--mesh")
    out = Path(_need(_pick(args, cfg, "out"), "--out"))
    mesh = load_mesh(mesh_path)
    scfg = dataclasses.replace(cfg.sampler, seed=_seed(args, cfg))
    if args.dry_run:
        print(f"ok: {mesh_path} ({mesh.n_faces} faces)")
        return 0
    grasps = sample_grasps(mesh, scfg, jobs=args.jobs, tol=cfg.tolerances)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(out, [g.to_dict() for g in grasps])
    write_manifest(out.with_name(out.name + ".manifest.json"), "sample-grasps", scfg.seed, cfg.to_dict(),
                   [mesh_path], out.parent, [out])
    log.info("%d grasps from %d samples", len(grasps), scfg.n_surface_samples)
    return 0


def _read_scene_grasps(scene: SceneConfig, grasp_dir: Path, tol) -> dict:
    labels = {}
    for obj in scene.objects:
        f = grasp_dir / f"{obj.name}.jsonl"
        grasps = [AntipodalGrasp.from_dict(r) for r in read_jsonl(f)]
        labels[obj.name] = labels_from_antipodal(obj.name, grasps, tol)
    return labels


def cmd_annotate(args, cfg: PipelineConfig) -> int:
    scene_path = Path(_need(_pick(args, cfg, "scene"), "--scene"))
    grasp_dir = Path(_need(_pick(args, cfg, "grasps"), "--grasps"))
    out = Path(_need(_pick(args, cfg, "out"), "--out"))
    tol = cfg.tolerances
    scene = SceneConfig.from_json(scene_path)
    labels = _read_scene_grasps(scene, grasp_dir, tol)
    if args.dry_run:
        print(f"ok: {len(scene.objects)} objects, {len(scene.views)} views")
        return 0
    out.mkdir(parents=True, exist_ok=True)

    def one(i):
        st = Counter()
        recs = annotate_view(scene, i, labels, cfg.gripper, tol, st)
        path = out / f"view_{i:04d}.jsonl"
        write_jsonl(path, [r.to_dict() for r in recs])
        return path, st

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(one, range(len(scene.views))))
    raw = read_json(scene_path)
    views = []
    for i, (view, (path, st)) in enumerate(zip(scene.views, results)):
        views.append({
            "index": i, "camera": view.camera.to_dict(), "T_cam_base": view.T_cam_base.to_dict(),
            "depth": view.depth_ref, "rgb": view.rgb_ref, "records": path.name,
            "stats": dict(sorted(st.items())),
        })
    index = out / "views.json"
    write_json(index, {"scene": str(scene_path), "depth_scale": raw.get("depth_scale", 1e-4), "views": views})
    outputs = [p for p, _ in results] + [index]
    write_manifest(out / "manifest.json", "annotate", _seed(args, cfg), cfg.to_dict(),
                   [scene_path, grasp_dir], out, outputs)
    return 0


def _anno_index(anno: Path) -> dict:
    return read_json(anno / "views.json")


def cmd_gen_training(args, cfg: PipelineConfig) -> int:
    anno = Path(_need(_pick(args, cfg, "anno"), "--anno"))
    rgb_dir = Path(_need(_pick(args, cfg, "rgb"), "--rgb"))
    depth_dir = Path(_need(_pick(args, cfg, "depth"), "--depth"))
    out = Path(_need(_pick(args, cfg, "out"), "--out"))
    r = args.r if args.r is not None else cfg.training.r
    index = _anno_index(anno)
    scale = float(index.get("depth_scale", 1e-4))
    jobs = []
    for v in index["views"]:
        i = int(v["index"])
        rgb_path = rgb_dir / (Path(v["rgb"]).name if v.get("rgb") else f"view_{i:04d}.png")
        if not v.get("depth"):
            raise InputError(f"view {i} has no depth reference")
        depth_path = depth_dir / Path(v["depth"]).name
        for p in (rgb_path, depth_path):
            if not p.is_file():
                raise InputError(f"file not found: {p}")
        jobs.append((i, v, rgb_path, depth_path))
    if args.dry_run:
        print(f"ok: {len(jobs)} views")
        return 0
    out.mkdir(parents=True, exist_ok=True)

    def one(job):
        i, v, rgb_path, depth_path = job
        cam = PinholeCamera.from_dict(v["camera"])
        with Image.open(rgb_path) as im:
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
        depth = load_depth(depth_path, scale)
        normals = normals_from_depth(depth, cam)
        recs = [AnnotationRecord.from_dict(x) for x in read_jsonl(anno / v["records"])]
        vdir = out / f"view_{i:04d}"
        vdir.mkdir(exist_ok=True)
        written = []
        kps = sorted({tuple(rc.keypoint) for rc in recs})
        hm = make_heatmap(kps, cam.shape, cfg.training.sigma)
        save_heatmap(hm, vdir / "heatmap.f32", kps)
        written += [vdir / "heatmap.f32", vdir / "heatmap.json"]
        for k, rc in enumerate(recs):
            crop = roi_align(crop_pair(rgb, normals, rc.keypoint, r), cfg.training.out_size)
            path = vdir / f"crop_{k:05d}.f32"
            crop.save(path)
            side = read_json(path.with_suffix(".json"))
            side.update({"grasp_id": rc.grasp_id, "targets": {"d": rc.d, "w": rc.w, "phi": rc.phi}})
            write_json(path.with_suffix(".json"), side)
            written += [path, path.with_suffix(".json")]
        return written

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        outputs = [p for ws in pool.map(one, jobs) for p in ws]
    write_manifest(out / "manifest.json", "gen-training", _seed(args, cfg), cfg.to_dict(),
                   [anno, rgb_dir, depth_dir], out, outputs)
    return 0


def cmd_convert(args, cfg: PipelineConfig) -> int:
    cam = load_camera(args.camera)
    T = load_transform(args.extrinsics, "cam", "base") if args.extrinsics else None
    cls = FORMATS[args.src]
    grasps = [cls.from_dict(r) for r in read_jsonl(args.inp)]
    converted = [convert(g, args.dst, cam, T, cfg.tolerances).to_dict() for g in grasps]
    if args.dry_run:
        print(f"ok: {len(converted)} grasps")
        return 0
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(out, converted)
    inputs = [args.inp, args.camera] + ([args.extrinsics] if args.extrinsics else [])
    write_manifest(out.with_name(out.name + ".manifest.json"), f"convert {args.src}->{args.dst}",
                   _seed(args, cfg), cfg.to_dict(), inputs, out.parent, [out])
    return 0


def cmd_recover(args, cfg: PipelineConfig) -> int:
    tol = cfg.tolerances
    rows = []
    if args.anno:
        anno = Path(args.anno)
        inputs = [anno]
        for v in _anno_index(anno)["views"]:
            cam = PinholeCamera.from_dict(v["camera"])
            T_base_cam = RigidTransform.from_dict(v["T_cam_base"]).expect("base", "cam").inverse()
            for rec in read_jsonl(anno / v["records"]):
                G = recover_pose(GraspMono.from_dict(rec), cam, T_base_cam, tol)
                rows.append({"view": int(v["index"]), "grasp_id": rec["grasp_id"], **G.to_dict()})
    else:
        grasps = _need(args.grasps, "--grasps or --anno")
        cam = load_camera(_need(args.camera, "--camera"))
        T_base_cam = load_transform(_need(args.extrinsics, "--extrinsics"), "cam", "base")
        inputs = [grasps, args.camera, args.extrinsics]
        for k, rec in enumerate(read_jsonl(grasps)):
            G = recover_pose(GraspMono.from_dict(rec), cam, T_base_cam, tol)
            rows.append({"index": k, **G.to_dict()})
    if args.dry_run:
        print(f"ok: {len(rows)} grasps")
        return 0
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(out, rows)
    write_manifest(out.with_name(out.name + ".manifest.json"), "recover", _seed(args, cfg), cfg.to_dict(),
                   inputs, out.parent, [out])
    return 0


def cmd_selfcheck(args, cfg: PipelineConfig) -> int:
    from .selfcheck import run_selfcheck

    results = run_selfcheck(cfg.tolerances, seed=_seed(args, cfg))
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 4 if failed else 0


COMMANDS = {
    "sample-grasps": cmd_sample,
    "annotate": cmd_annotate,
    "gen-training": cmd_gen_training,
    "convert": cmd_convert,
    "recover": cmd_recover,
    "selfcheck": cmd_selfcheck,
}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("GRASPGEOM_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    for name, default in (("config", None), ("seed", None), ("jobs", 1), ("dry_run", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        if args.jobs < 1:
            raise SchemaError("--jobs must be >= 1")
        cfg = _load_config(args)
        return COMMANDS[args.command](args, cfg)
    except GraspGeomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
