"""JSON-lines streams, sidecar records and run manifests."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__
from .errors import InputError, SchemaError
from .geom.camera import PinholeCamera
from .geom.transform import RigidTransform


def dumps(rec) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def write_jsonl(path, records) -> None:
    Path(path).write_text("".join(dumps(r) + "\n" for r in records), encoding="utf-8")


def read_jsonl(path) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"file not found: {path}")
    out = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
    return out


def read_json(path):
    path = Path(path)
    if not path.is_file():
        raise InputError(f"file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc.msg})") from exc


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_camera(path) -> PinholeCamera:
    return PinholeCamera.from_dict(read_json(path))


def load_transform(path, from_frame: str, to_frame: str) -> RigidTransform:
    """Extrinsics sidecar ``{R: [9], t: [3], from?, to?}``; missing frame tags default to the expected ones."""
    rec = dict(read_json(path))
    rec.setdefault("from", from_frame)
    rec.setdefault("to", to_frame)
    T = RigidTransform.from_dict(rec)
    if (T.from_frame, T.to_frame) == (to_frame, from_frame):
        return T.inverse()
    return T.expect(from_frame, to_frame)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def hash_inputs(paths) -> dict:
    """sha256 per input; directories expand to their files in sorted order."""
    out = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for f in sorted(q for q in p.rglob("*") if q.is_file()):
                out[str(f)] = sha256_file(f)
        elif p.is_file():
            out[str(p)] = sha256_file(p)
    return out


def write_manifest(path, command: str, seed, config: dict, inputs, outputs_root, outputs) -> None:
    """Traceability record; contains no timestamps or worker counts so reruns are byte-identical."""
    root = Path(outputs_root)
    manifest = {
        "tool": "graspgeom",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config_sha256": hashlib.sha256(dumps(config).encode()).hexdigest(),
        "inputs": hash_inputs(inputs),
        "outputs": {str(Path(o).relative_to(root)): sha256_file(o) for o in sorted(map(str, outputs))},
    }
    write_json(path, manifest)
