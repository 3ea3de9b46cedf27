"""Mesh-level antipodal grasp sampling."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DegenerateAxis, DegenerateContactPair, EmptyMesh, SchemaError
from .geom.mesh import TriangleMesh
from .geom.vec import angle_between, dot, norm
from .pose import GraspSE3, feasible_phi_range, rotation_from_axis_phi

log = logging.getLogger(__name__)

# samples per work unit; fixed so results do not depend on the worker count
CHUNK = 256


@dataclass(frozen=True)
class SamplerConfig:
    mu: float = 0.4
    n_surface_samples: int = 1000
    w_max: float = 0.08
    phi_grid: int = 8
    seed: int = 0
    ray_offset: float = 1e-6

    def __post_init__(self):
        if not self.mu > 0:
            raise SchemaError("mu must be positive")
        if not self.w_max > 0:
            raise SchemaError("w_max must be positive")
        if self.n_surface_samples < 0 or self.phi_grid < 1:
            raise SchemaError("n_surface_samples must be >= 0 and phi_grid >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise SchemaError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class AntipodalGrasp:
    """Two-contact grasp in the object frame.

    ``v1``/``v2`` are outward normals at the contacts; the closing axis is
    ``-v1``.  ``phi_samples`` is empty when the closing axis is vertical.
    """

    P1: np.ndarray
    P2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    w: float
    phi_samples: tuple = ()
    quality: float = 1.0
    sample_index: int = -1

    @property
    def n_x(self) -> np.ndarray:
        return -self.v1

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.P1 + self.P2)

    def poses(self, tol: Tolerances = DEFAULT_TOLERANCES) -> list[GraspSE3]:
        """One object-frame pose per dihedral sample (object z treated as up)."""
        return [GraspSE3(rotation_from_axis_phi(self.n_x, phi, tol), self.center, "obj")
                for phi in self.phi_samples]

    def to_dict(self) -> dict:
        return {
            "sample_index": int(self.sample_index),
            "P1": [float(x) for x in self.P1], "P2": [float(x) for x in self.P2],
            "v1": [float(x) for x in self.v1], "v2": [float(x) for x in self.v2],
            "w": float(self.w), "phi_samples": [float(x) for x in self.phi_samples],
            "quality": float(self.quality),
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "AntipodalGrasp":
        try:
            return cls(*(np.asarray(rec[k], dtype=np.float64).reshape(3) for k in ("P1", "P2", "v1", "v2")),
                       w=float(rec["w"]), phi_samples=tuple(float(x) for x in rec["phi_samples"]),
                       quality=float(rec["quality"]), sample_index=int(rec["sample_index"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"bad antipodal grasp record: {exc}") from exc


def force_closure(P1, v1, P2, v2, mu):
    """Two-contact friction-cone test with closed cones.

    The contact line must lie within ``arctan(mu)`` of the inward normal at
    both contacts.  Broadcasts over leading dimensions.
    """
    P1, P2 = np.asarray(P1, dtype=np.float64), np.asarray(P2, dtype=np.float64)
    v1, v2 = np.asarray(v1, dtype=np.float64), np.asarray(v2, dtype=np.float64)
    line = P2 - P1
    if np.any(norm(line) < DEFAULT_TOLERANCES.min_contact_distance):
        raise DegenerateContactPair("contact points coincide")
    half_angle = np.arctan(mu)
    ok = (angle_between(line, -v1) <= half_angle) & (angle_between(-line, -v2) <= half_angle)
    return bool(ok) if np.ndim(ok) == 0 else ok


def grasp_quality(P1, v1, P2):
    """Cosine between the contact line and the inward normal at the first contact."""
    line = np.asarray(P2, dtype=np.float64) - np.asarray(P1, dtype=np.float64)
    return np.clip(dot(line, -np.asarray(v1)) / norm(line), 0.0, 1.0)


def phi_grid(n_x, count: int, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple:
    try:
        lo, hi = feasible_phi_range(n_x, tol)
    except DegenerateAxis:
        return ()
    if count == 1:
        return (0.5 * (lo + hi),)
    return tuple(float(x) for x in np.linspace(lo, hi, count))


def _surface_samples(mesh: TriangleMesh, indices, seed: int):
    """Area-weighted surface points; each index draws from its own seeded stream."""
    cdf = np.cumsum(mesh.face_areas)
    total = cdf[-1]
    r = np.array([np.random.default_rng([seed, int(i)]).random(3) for i in indices]).reshape(-1, 3)
    faces = np.minimum(np.searchsorted(cdf, r[:, 0] * total, side="right"), mesh.n_faces - 1)
    s = np.sqrt(r[:, 1])
    bary = np.stack([1.0 - s, s * (1.0 - r[:, 2]), s * r[:, 2]], axis=1)
    points = np.einsum("nk,nkc->nc", bary, mesh.corners[faces])
    return faces, points


def _sample_chunk(mesh: TriangleMesh, cfg: SamplerConfig, indices, tol: Tolerances):
    faces, P1 = _surface_samples(mesh, indices, cfg.seed)
    v1 = mesh.normal_at(faces, P1)
    origins = P1 - cfg.ray_offset * v1
    P2, faces2, _ = mesh.raycast_batch(origins, -v1, eps=tol.ray_epsilon)
    out = []
    for k, idx in enumerate(indices):
        if faces2[k] < 0:
            continue
        p1, p2, n1 = P1[k], P2[k], v1[k]
        w = float(norm(p2 - p1))
        if w < tol.min_contact_distance or w > cfg.w_max:
            continue
        n2 = mesh.normal_at(faces2[k], p2)
        if not force_closure(p1, n1, p2, n2, cfg.mu):
            continue
        out.append(AntipodalGrasp(
            p1, p2, n1, n2, w,
            phi_samples=phi_grid(-n1, cfg.phi_grid, tol),
            quality=float(grasp_quality(p1, n1, p2)),
            sample_index=int(idx),
        ))
    return out


def sample_grasps(mesh: TriangleMesh, cfg: SamplerConfig = SamplerConfig(), jobs: int = 1,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> list[AntipodalGrasp]:
    """Antipodal grasps from ``cfg.n_surface_samples`` surface points, ordered by sample index.

    Each surface point casts a ray into the object along its inward normal;
    the exit point is the second contact.  Pairs that pass the friction-cone
    test and fit in ``w_max`` are kept.  Output does not depend on ``jobs``.
    """
    if mesh is None or mesh.n_faces == 0:
        raise EmptyMesh("cannot sample an empty mesh")
    if not mesh.is_watertight:
        log.warning("mesh is not watertight; rays may escape through holes")
    n = cfg.n_surface_samples
    chunks = [range(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda c: _sample_chunk(mesh, cfg, c, tol), chunks))
    else:
        parts = [_sample_chunk(mesh, cfg, c, tol) for c in chunks]
    return [g for part in parts for g in part]
