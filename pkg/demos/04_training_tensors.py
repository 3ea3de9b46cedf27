# Network inputs from one annotated view: heatmap, normals, and aligned
# 112x112x6 crops around keypoints.
import numpy as np

from graspgeom.annotation import annotate_view, labels_from_antipodal, normal_consistency
from graspgeom.sampling import SamplerConfig, sample_grasps
from graspgeom.synthetic import make_scene, shade
from graspgeom.training import crop_pair, make_heatmap, normals_from_depth, roi_align

scene = make_scene("cube", n_views=1)
view = scene.views[0]
cube = scene.objects[0]
labels = {cube.name: labels_from_antipodal(cube.name, sample_grasps(cube.mesh, SamplerConfig(n_surface_samples=200)))}
records = annotate_view(scene, 0, labels)
kps = sorted({r.keypoint for r in records})
print(len(records), "records on", len(kps), "distinct keypoints")

# %% heatmap target
hm = make_heatmap(kps, view.camera.shape, sigma=2.0)
print("heatmap", hm.shape, "peak", hm.max(), "mass", hm.sum().round(2))

# %% normals from the ground-truth depth
normals = normals_from_depth(view.depth, view.camera)
print("valid normal pixels:", int(normals.valid.sum()), "of", normals.valid.size)
u, v = kps[0]
print("normal consistency around the first keypoint:", round(normal_consistency(normals, (u, v), 3), 4))

# %% crops
rgb = shade(scene, 0).astype(np.float64) / 255.0
crop = crop_pair(rgb, normals, kps[0], r=20)
aligned = roi_align(crop)
print("crop", crop.data.shape, "-> aligned", aligned.data.shape)
print("rgb channel means after normalization:", crop.data[..., :3].mean(axis=(0, 1)).round(12))

# a crop near the image corner is clipped, alignment still gives 112x112
corner = crop_pair(rgb, normals, (2, 3), r=20)
print("corner crop", corner.data.shape, "->", roi_align(corner).data.shape)
