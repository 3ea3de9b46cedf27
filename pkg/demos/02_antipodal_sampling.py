# Antipodal grasp labels on a mesh: friction cones, widths, quality and
# a collision check against the table.
import numpy as np

from graspgeom.collision import GripperModel, collision_check
from graspgeom.geom import RigidTransform, box, icosphere, plane
from graspgeom.sampling import SamplerConfig, force_closure, sample_grasps

# a perfectly antipodal pair passes for any friction
print(force_closure([1, 0, 0], [1, 0, 0], [-1, 0, 0], [-1, 0, 0], mu=0.01))
# tilt the normals 45 deg off the contact line: needs mu >= 1
s = np.sqrt(0.5)
for mu in (0.5, 1.0):
    print(mu, force_closure([0, 0, 0], [-s, s, 0], [1, 0, 0], [s, s, 0], mu))

# %% a 6 cm ball
ball = icosphere(4, radius=0.03)
grasps = sample_grasps(ball, SamplerConfig(mu=0.3, n_surface_samples=500, seed=1))
w = np.array([g.w for g in grasps])
print(len(grasps), "grasps, width", w.min().round(5), "to", w.max().round(5))
print("mean quality", np.mean([g.quality for g in grasps]).round(4))

# %% a 5 cm cube with a tight cone only keeps face-to-face pairs
cube = box((0.05, 0.05, 0.05))
cg = sample_grasps(cube, SamplerConfig(mu=0.05, n_surface_samples=500, seed=2))
axes = np.array([np.argmax(np.abs(g.n_x)) for g in cg])
print(len(cg), "cube grasps, per axis:", np.bincount(axes, minlength=3))

# %% same seed, more threads, same answer
again = sample_grasps(ball, SamplerConfig(mu=0.3, n_surface_samples=500, seed=1), jobs=4)
print("identical with 4 threads:", [g.to_dict() for g in again] == [g.to_dict() for g in grasps])

# %% drop the ball on a table and see which poses the hand can reach
T = RigidTransform(np.eye(3), [0, 0, 0.03], "obj", "base")
table = plane(0.5)
free = 0
poses = [(G.transformed(T), g.w) for g in grasps for G in g.poses()]
for G, width in poses:
    free += collision_check(G, GripperModel(), [table], width)
print(f"{free} of {len(poses)} poses clear the table")
