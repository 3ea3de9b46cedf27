"""Mesh file readers and writers (ASCII OBJ, ASCII/binary PLY)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from plyfile import PlyData, PlyElement

from ..errors import InputError, InvalidMesh
from .mesh import TriangleMesh


def load_mesh(path) -> TriangleMesh:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"mesh file not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return _load_obj(path)
    if suffix == ".ply":
        return _load_ply(path)
    raise InputError(f"unsupported mesh format {suffix!r}: {path}")


def save_mesh(mesh: TriangleMesh, path) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        _save_obj(mesh, path)
    elif suffix == ".ply":
        _save_ply(mesh, path)
    else:
        raise InputError(f"unsupported mesh format {suffix!r}: {path}")


def _load_obj(path: Path) -> TriangleMesh:
    verts, normals, faces, corner_normals = [], [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                if parts[0] == "v":
                    verts.append([float(x) for x in parts[1:4]])
                elif parts[0] == "vn":
                    normals.append([float(x) for x in parts[1:4]])
                elif parts[0] == "f":
                    idx, nidx = [], []
                    for tok in parts[1:]:
                        fields = tok.split("/")
                        i = int(fields[0])
                        idx.append(i - 1 if i > 0 else len(verts) + i)
                        if len(fields) == 3 and fields[2]:
                            j = int(fields[2])
                            nidx.append(j - 1 if j > 0 else len(normals) + j)
                    # fan-triangulate polygons
                    for k in range(1, len(idx) - 1):
                        faces.append([idx[0], idx[k], idx[k + 1]])
                        if len(nidx) == len(idx):
                            corner_normals.append([nidx[0], nidx[k], nidx[k + 1]])
            except (ValueError, IndexError) as exc:
                raise InvalidMesh(f"{path}:{lineno}: cannot parse {line.strip()!r}") from exc
    V = np.array(verts, dtype=np.float64).reshape(-1, 3)
    F = np.array(faces, dtype=np.int64).reshape(-1, 3)
    VN = None
    # per-vertex normals only when every face corner references the normal of the same index
    if normals and len(corner_normals) == len(faces) and len(normals) == len(verts):
        if np.array_equal(np.array(corner_normals), F):
            VN = np.array(normals, dtype=np.float64)
    return TriangleMesh(V, F, VN)


def _save_obj(mesh: TriangleMesh, path: Path) -> None:
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    if mesh.vertex_normals is not None:
        lines += [f"vn {x!r} {y!r} {z!r}" for x, y, z in mesh.vertex_normals.tolist()]
        lines += [f"f {a}//{a} {b}//{b} {c}//{c}" for a, b, c in (mesh.triangles + 1).tolist()]
    else:
        lines += [f"f {a} {b} {c}" for a, b, c in (mesh.triangles + 1).tolist()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_ply(path: Path) -> TriangleMesh:
    try:
        ply = PlyData.read(str(path))
        v = ply["vertex"]
        V = np.stack([v["x"], v["y"], v["z"]], axis=1).astype(np.float64)
        names = v.data.dtype.names
        VN = None
        if {"nx", "ny", "nz"} <= set(names):
            VN = np.stack([v["nx"], v["ny"], v["nz"]], axis=1).astype(np.float64)
        face = ply["face"]
        key = "vertex_indices" if "vertex_indices" in face.data.dtype.names else "vertex_index"
        faces = []
        for poly in face[key]:
            for k in range(1, len(poly) - 1):
                faces.append([poly[0], poly[k], poly[k + 1]])
    except (KeyError, ValueError, IndexError) as exc:
        raise InvalidMesh(f"{path}: malformed PLY ({exc})") from exc
    return TriangleMesh(V, np.array(faces, dtype=np.int64).reshape(-1, 3), VN)


def _save_ply(mesh: TriangleMesh, path: Path, binary: bool = True) -> None:
    fields = [("x", "f8"), ("y", "f8"), ("z", "f8")]
    if mesh.vertex_normals is not None:
        fields += [("nx", "f8"), ("ny", "f8"), ("nz", "f8")]
    vert = np.empty(len(mesh.vertices), dtype=fields)
    for i, c in enumerate("xyz"):
        vert[c] = mesh.vertices[:, i]
        if mesh.vertex_normals is not None:
            vert["n" + c] = mesh.vertex_normals[:, i]
    face = np.empty(mesh.n_faces, dtype=[("vertex_indices", "i4", (3,))])
    face["vertex_indices"] = mesh.triangles
    PlyData([PlyElement.describe(vert, "vertex"), PlyElement.describe(face, "face")],
            text=not binary).write(str(path))
