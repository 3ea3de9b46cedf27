from .camera import PinholeCamera, backproject, pixel_rays, project
from .depth import (DepthMap, NormalMap, load_depth, nearest_surface_pixel,
                    nearest_surface_points, save_depth)
from .mesh import RayHit, TriangleMesh, box, icosphere, merge, plane
from .meshio import load_mesh, save_mesh
from .render import camera_raycast, pixel_directions, plane_depth, render_depth, sphere_depth
from .transform import RigidTransform, look_at, random_rotation, rotation_about
from .vec import PLATFORM_NORMAL, angle_between, cross, dot, normalize, unit_vec3, vec3

__all__ = [
    "PinholeCamera", "project", "backproject", "pixel_rays",
    "DepthMap", "NormalMap", "load_depth", "save_depth",
    "nearest_surface_pixel", "nearest_surface_points",
    "TriangleMesh", "RayHit", "icosphere", "box", "plane", "merge",
    "load_mesh", "save_mesh", "render_depth", "camera_raycast", "pixel_directions", "plane_depth", "sphere_depth",
    "RigidTransform", "look_at", "random_rotation", "rotation_about",
    "PLATFORM_NORMAL", "angle_between", "cross", "dot", "normalize", "unit_vec3", "vec3",
]
