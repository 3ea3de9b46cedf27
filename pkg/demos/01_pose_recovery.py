# Recover a 6-DoF parallel-jaw grasp from the five image-space parameters
# and push it through the other grasp formats.
import math

import numpy as np

from graspgeom.convert import mono_to_contactnet, mono_to_l2g
from graspgeom.geom import PinholeCamera, look_at
from graspgeom.pose import GraspMono, contact_points, mono_from_pose, recover_pose, solve_ny

cam = PinholeCamera(600.0, 600.0, 319.5, 239.5, 640, 480)

# camera 40 cm above the table, tilted down at the origin
T_base_cam = look_at([0.0, -0.35, 0.4], [0.0, 0.0, 0.0])

# %% a grasp as the keypoint network would predict it
g = GraspMono(p=[352.0, 260.0], d=0.52, w=0.045, phi=1.9, n_x=[0.8, 0.0, -0.6])
pair = contact_points(g, cam)
print("contacts in the camera frame:\n", pair.P1, "\n", pair.P2)

# %% n_y from the closing axis and the dihedral angle
n_x_base = T_base_cam.rotate(g.n_x)
sol = solve_ny(n_x_base, g.phi)
print("n_y candidates:", sol.plus.round(4), sol.minus.round(4))
print("picked (approach points into the table):", sol.selected.round(4))

G = recover_pose(g, cam, T_base_cam)
print("R =\n", G.R.round(4))
print("t =", G.t.round(4), " det R =", round(float(np.linalg.det(G.R)), 12))
print("approach axis . platform normal =", round(float(G.n_z[2]), 4))

# %% and back again
back = mono_from_pose(G, g.w, cam, T_base_cam)
print("round trip pixel error:", np.abs(back.p - g.p).max(), " phi error:", abs(back.phi - g.phi))

# %% other representations
print("two-contact form:", mono_to_l2g(g, cam).to_dict())
print("contact + axes form:", mono_to_contactnet(g, cam, T_base_cam).to_dict())

# %% which dihedral angles does this closing axis allow?
s = math.sqrt(1 - n_x_base[2] ** 2)
print(f"feasible phi range: [{math.degrees(math.acos(s)):.1f}, {math.degrees(math.pi - math.acos(s)):.1f}] deg")
