"""Analytic-shape oracles run by ``graspgeom selfcheck``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .geom.camera import PinholeCamera
from .geom.mesh import box, icosphere
from .geom.render import plane_depth, sphere_depth
from .geom.vec import PLATFORM_NORMAL, angle_between, cross, dot, norm
from .pose import solve_ny
from .sampling import SamplerConfig, sample_grasps
from .training import normals_from_depth


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    bound: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        s = f"{tag} {self.name}: residual={self.residual:.3e} bound={self.bound:.3e}"
        return s + (f" ({self.detail})" if self.detail else "")


def _check(name, bound, fn) -> CheckResult:
    try:
        residual, detail = fn()
    except Exception as exc:  # a crashing oracle is a failed check, not a crashed run
        return CheckResult(name, False, math.inf, bound, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, bool(residual <= bound), float(residual), bound, detail)


def sphere_antipodality(tol: Tolerances, seed: int = 0, samples: int = 400):
    """Worst relative width error and worst grasp-line distance from the centre."""
    mesh = icosphere(4)
    grasps = sample_grasps(mesh, SamplerConfig(mu=0.3, w_max=3.0, n_surface_samples=samples, seed=seed), tol=tol)
    if not grasps:
        raise RuntimeError("no grasps accepted on the sphere")
    P1 = np.array([g.P1 for g in grasps])
    P2 = np.array([g.P2 for g in grasps])
    w = norm(P2 - P1)
    line = (P2 - P1) / w[:, None]
    offset = norm(cross(line, -P1))
    return float(np.max(np.abs(w - 2.0) / 2.0)), float(np.max(offset)), len(grasps)


def cube_faces(tol: Tolerances, seed: int = 0, samples: int = 400):
    """Worst |w - 1| and count of grasps not joining opposite faces."""
    grasps = sample_grasps(box(), SamplerConfig(mu=0.05, w_max=3.0, n_surface_samples=samples, seed=seed), tol=tol)
    if not grasps:
        raise RuntimeError("no grasps accepted on the cube")
    bad = 0
    for g in grasps:
        axis = int(np.argmax(np.abs(g.v1)))
        if not (abs(abs(g.P1[axis]) - 0.5) < 1e-9 and abs(g.P2[axis] + g.P1[axis]) < 1e-9):
            bad += 1
    return float(max(abs(g.w - 1.0) for g in grasps)), bad, len(grasps)


def _camera():
    return PinholeCamera(200.0, 200.0, 79.5, 59.5, 160, 120)


def plane_normal_error(tilt_deg: float) -> float:
    """Max angular error (rad) of depth-derived normals on a plane tilted about the camera x axis."""
    cam = _camera()
    t = math.radians(tilt_deg)
    n = np.array([0.0, math.sin(t), -math.cos(t)])
    N = normals_from_depth(plane_depth(cam, [0.0, 0.0, 1.0], n), cam)
    valid = N.valid
    return float(np.max(angle_between(N.normals[valid], n)))


def sphere_normal_error(band: int = 3) -> float:
    """Max angular error (deg) on an analytic sphere, ignoring a band around the silhouette."""
    from scipy.ndimage import binary_erosion

    cam = _camera()
    c = np.array([0.0, 0.0, 0.6])
    depth = sphere_depth(cam, c, 0.2)
    N = normals_from_depth(depth, cam)
    inner = binary_erosion(depth.valid, iterations=band) & N.valid
    vs, us = np.nonzero(inner)
    d = depth.depth[vs, us]
    P = np.stack([(us - cam.cx) / cam.fx * d, (vs - cam.cy) / cam.fy * d, d], axis=1)
    truth = (P - c) / 0.2
    return float(np.degrees(np.max(angle_between(N.normals[vs, us], truth))))


def ny_residual(tol: Tolerances, seed: int = 0, n: int = 2000) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        v = rng.normal(size=3)
        n_x = v / np.linalg.norm(v)
        s = math.sqrt(1 - n_x[2] ** 2)
        lo = math.acos(s)
        phi = rng.uniform(lo, math.pi - lo)
        sol = solve_ny(n_x, phi, tol)
        for n_y in (sol.plus, sol.minus):
            worst = max(worst, abs(float(dot(n_y, n_x))), abs(float(norm(n_y)) - 1.0),
                        abs(float(dot(n_y, PLATFORM_NORMAL)) - math.cos(phi)))
    return worst


def run_selfcheck(tol: Tolerances = DEFAULT_TOLERANCES, seed: int = 0) -> list[CheckResult]:
    results = []
    cache = {}

    def sphere():
        if "sphere" not in cache:
            cache["sphere"] = sphere_antipodality(tol, seed)
        return cache["sphere"]

    def cube():
        if "cube" not in cache:
            cache["cube"] = cube_faces(tol, seed)
        return cache["cube"]

    results.append(_check("sphere width", tol.sphere_width_rel,
                          lambda: (sphere()[0], f"{sphere()[2]} grasps")))
    results.append(_check("sphere grasp line through centre", tol.sphere_center,
                          lambda: (sphere()[1], f"{sphere()[2]} grasps")))
    results.append(_check("cube width", tol.cube_width, lambda: (cube()[0], f"{cube()[2]} grasps")))
    results.append(_check("cube opposite faces", 0.0, lambda: (float(cube()[1]), "non-opposing grasps")))
    results.append(_check("fronto-parallel plane normals", tol.plane_normal_rad,
                          lambda: (plane_normal_error(0.0), "rad")))
    results.append(_check("45 deg plane normals", tol.plane_normal_rad,
                          lambda: (plane_normal_error(45.0), "rad")))
    results.append(_check("sphere normals", tol.sphere_normal_deg, lambda: (sphere_normal_error(), "deg")))
    results.append(_check("n_y constraint residual", tol.ny_residual, lambda: (ny_residual(tol, seed), "")))
    return results
