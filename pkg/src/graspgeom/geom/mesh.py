"""Indexed triangle meshes with exhaustive ray casting."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from ..config import DEFAULT_TOLERANCES
from ..errors import EmptyMesh, InvalidMesh
from .transform import RigidTransform
from .vec import cross, dot, norm

log = logging.getLogger(__name__)

# rays closer than this to a triangle's plane (as a cosine) are treated as parallel
_PARALLEL_COS = 1e-12
# upper bound on rays x triangles evaluated per batch
_BATCH_ELEMS = 1 << 21


class RayHit(NamedTuple):
    point: np.ndarray
    face: int
    distance: float


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Triangle mesh with outward face normals derived from the winding order.

    ``vertex_normals`` is optional; when present, surface normals at interior
    points are interpolated barycentrically (smooth shading), otherwise the
    flat face normal is used.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    vertex_normals: Optional[np.ndarray] = None

    def __post_init__(self):
        V = np.ascontiguousarray(self.vertices, dtype=np.float64)
        F = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] != 3:
            raise InvalidMesh(f"vertices must be (N, 3), got {V.shape}")
        if F.size == 0:
            raise EmptyMesh("mesh has no triangles")
        if F.ndim != 2 or F.shape[1] != 3:
            raise InvalidMesh(f"triangles must be (M, 3), got {F.shape}")
        if F.min() < 0 or F.max() >= len(V):
            raise InvalidMesh("triangle index out of range")
        if not np.all(np.isfinite(V)):
            raise InvalidMesh("non-finite vertex coordinates")
        tri = V[F]
        n = cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        if np.any(norm(n) == 0):
            raise InvalidMesh("mesh contains zero-area triangles")
        VN = None
        if self.vertex_normals is not None:
            VN = np.ascontiguousarray(self.vertex_normals, dtype=np.float64)
            if VN.shape != V.shape:
                raise InvalidMesh("vertex_normals must match vertices in shape")
            VN = VN / norm(VN)[:, None]
            VN.setflags(write=False)
        for a in (V, F):
            a.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "triangles", F)
        object.__setattr__(self, "vertex_normals", VN)
        if self.is_watertight and self.signed_volume < 0:
            raise InvalidMesh("closed mesh is inward-oriented (negative signed volume)")

    @property
    def n_faces(self) -> int:
        return len(self.triangles)

    @cached_property
    def corners(self) -> np.ndarray:
        """Triangle vertex coordinates, shape (M, 3, 3)."""
        return self.vertices[self.triangles]

    @cached_property
    def _edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = self.corners
        return c[:, 0], c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]

    @cached_property
    def face_normals(self) -> np.ndarray:
        _, e1, e2 = self._edges
        n = cross(e1, e2)
        return n / norm(n)[:, None]

    @cached_property
    def face_areas(self) -> np.ndarray:
        _, e1, e2 = self._edges
        return 0.5 * norm(cross(e1, e2))

    @cached_property
    def signed_volume(self) -> float:
        c = self.corners
        return float(np.sum(dot(c[:, 0], cross(c[:, 1], c[:, 2]))) / 6.0)

    @cached_property
    def is_watertight(self) -> bool:
        F = self.triangles
        directed = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
        undirected = np.sort(directed, axis=1)
        _, counts = np.unique(undirected, axis=0, return_counts=True)
        if not np.all(counts == 2):
            return False
        # consistent winding: every directed edge appears exactly once
        _, dcounts = np.unique(directed, axis=0, return_counts=True)
        return bool(np.all(dcounts == 1))

    @property
    def bounds(self) -> np.ndarray:
        return np.stack([self.vertices.min(axis=0), self.vertices.max(axis=0)])

    def transformed(self, T: RigidTransform) -> "TriangleMesh":
        VN = None if self.vertex_normals is None else T.rotate(self.vertex_normals)
        return TriangleMesh(T.apply(self.vertices), self.triangles, VN)

    def normal_at(self, face, point) -> np.ndarray:
        """Outward surface normal at ``point`` lying on ``face`` (batched over both)."""
        face = np.asarray(face)
        if self.vertex_normals is None:
            return self.face_normals[face]
        bary = barycentric(self.corners[face], np.asarray(point, dtype=np.float64))
        vn = self.vertex_normals[self.triangles[face]]
        n = np.sum(bary[..., None] * vn, axis=-2)
        return n / norm(n)[..., None]

    def raycast(self, origin, direction, eps: float = DEFAULT_TOLERANCES.ray_epsilon) -> Optional[RayHit]:
        """Nearest hit with distance > ``eps`` by exhaustive test against every triangle.

        ``direction`` must be unit length so distances are metric.  Ties go to
        the lowest face index.
        """
        o = np.asarray(origin, dtype=np.float64).reshape(1, 3)
        d = np.asarray(direction, dtype=np.float64).reshape(1, 3)
        t = _ray_triangle_t(o[:, None, :], d[:, None, :], *self._edges, eps)[0]
        face = int(np.argmin(t))
        if not np.isfinite(t[face]):
            return None
        dist = float(t[face])
        return RayHit(o[0] + dist * d[0], face, dist)

    def raycast_batch(self, origins, directions, eps: float = DEFAULT_TOLERANCES.ray_epsilon):
        """Vectorized :meth:`raycast` over many rays.

        Returns ``(points, faces, distances)``; misses have face ``-1`` and
        infinite distance.  Results are identical to calling :meth:`raycast`
        ray by ray.
        """
        O = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
        D = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
        n = len(O)
        faces = np.full(n, -1, dtype=np.int64)
        dist = np.full(n, np.inf)
        step = max(1, _BATCH_ELEMS // self.n_faces)
        edges = self._edges
        for s in range(0, n, step):
            t = _ray_triangle_t(O[s:s + step, None, :], D[s:s + step, None, :], *edges, eps)
            f = np.argmin(t, axis=1)
            best = t[np.arange(len(f)), f]
            hit = np.isfinite(best)
            faces[s:s + step] = np.where(hit, f, -1)
            dist[s:s + step] = best
        points = O + np.where(np.isfinite(dist), dist, np.nan)[:, None] * D
        return points, faces, dist


def _ray_triangle_t(o, d, v0, e1, e2, eps):
    """Moller-Trumbore ray parameter for every (ray, triangle) pair; inf on miss."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = cross(d, e2)
        det = dot(e1, p)
        area2 = norm(cross(e1, e2))
        ok = np.abs(det) > _PARALLEL_COS * area2
        inv = 1.0 / det
        s = o - v0
        u = dot(s, p) * inv
        q = cross(s, e1)
        v = dot(d, q) * inv
        t = dot(e2, q) * inv
        ok &= (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > eps)
    return np.where(ok, t, np.inf)


def barycentric(tri, p) -> np.ndarray:
    """Barycentric coordinates of ``p`` in triangle(s) ``tri`` of shape (..., 3, 3)."""
    a, b, c = tri[..., 0, :], tri[..., 1, :], tri[..., 2, :]
    v0, v1, v2 = b - a, c - a, p - a
    d00, d01, d11 = dot(v0, v0), dot(v0, v1), dot(v1, v1)
    d20, d21 = dot(v2, v0), dot(v2, v1)
    den = d00 * d11 - d01 * d01
    v = (d11 * d20 - d01 * d21) / den
    w = (d00 * d21 - d01 * d20) / den
    return np.stack([1.0 - v - w, v, w], axis=-1)


# -- primitive shapes ---------------------------------------------------------

def icosphere(subdivisions: int = 4, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Geodesic sphere with 20·4^k faces and radial vertex normals."""
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    V = [np.array(v, dtype=np.float64) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = V[i] + V[j]
                V.append(m / np.linalg.norm(m))
                cache[key] = len(V) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    U = np.array(V)
    return TriangleMesh(U * radius + np.asarray(center, dtype=np.float64), np.array(faces), U)


def box(extents=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Axis-aligned box, two triangles per face, flat normals."""
    h = np.asarray(extents, dtype=np.float64) / 2.0
    V = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=np.float64)
    V = V * h + np.asarray(center, dtype=np.float64)
    # vertex index = 4*ix + 2*iy + iz
    F = np.array([
        [0, 1, 3], [0, 3, 2],   # -x
        [4, 6, 7], [4, 7, 5],   # +x
        [0, 4, 5], [0, 5, 1],   # -y
        [2, 3, 7], [2, 7, 6],   # +y
        [0, 2, 6], [0, 6, 4],   # -z
        [1, 5, 7], [1, 7, 3],   # +z
    ])
    return TriangleMesh(V, F)


def plane(size: float = 2.0, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Square z-up quad (two triangles), e.g. a tabletop."""
    h = size / 2.0
    V = np.array([[-h, -h, 0], [h, -h, 0], [h, h, 0], [-h, h, 0]], dtype=np.float64)
    return TriangleMesh(V + np.asarray(center, dtype=np.float64), np.array([[0, 1, 2], [0, 2, 3]]))


def merge(meshes) -> TriangleMesh:
    """Concatenate meshes; vertex normals kept only if every part has them."""
    meshes = list(meshes)
    if not meshes:
        raise EmptyMesh("nothing to merge")
    offs = np.cumsum([0] + [len(m.vertices) for m in meshes[:-1]])
    V = np.concatenate([m.vertices for m in meshes])
    F = np.concatenate([m.triangles + o for m, o in zip(meshes, offs)])
    VN = None
    if all(m.vertex_normals is not None for m in meshes):
        VN = np.concatenate([m.vertex_normals for m in meshes])
    return TriangleMesh(V, F, VN)
