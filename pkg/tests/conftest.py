import numpy as np
import pytest

from graspgeom.geom import PinholeCamera, RigidTransform


@pytest.fixture
def cam():
    return PinholeCamera(1000.0, 1000.0, 640.0, 480.0, 1280, 960)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def horizontal_view():
    """T_base<-cam for a camera looking along base +x (cam x -> -y, cam y -> -z)."""
    R = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
    return RigidTransform(R, [0.0, 0.0, 0.3], "cam", "base")


def rotation_error(R1, R2):
    """Geodesic angle between rotations, stable for tiny differences."""
    chord = np.linalg.norm(R1 - R2)
    return 2.0 * np.arcsin(min(1.0, chord / (2.0 * np.sqrt(2.0))))


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = []


def report(number, name, passed, detail):
    line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {name} ({detail})"
    ACCEPTANCE.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)


def write_workspace(root, kind="sphere", n_views=2, n_samples=120):
    """Synthetic scene on disk plus a small pipeline config; returns the config path."""
    from graspgeom.io import write_json
    from graspgeom.synthetic import make_scene, write_scene

    write_scene(make_scene(kind, n_views=n_views), root)
    cfg = root / "config.json"
    write_json(cfg, {"sampler": {"n_surface_samples": n_samples}, "training": {"r": 20}})
    return cfg


def run_pipeline(main, root, objects, jobs=1, seed=3):
    """sample-grasps, annotate, gen-training, recover with paths relative to ``root`` (the cwd)."""
    common = ["--config", "config.json", "--seed", str(seed), "--jobs", str(jobs)]
    for name in objects:
        assert main(["sample-grasps", "--mesh", f"meshes/{name}.ply", "--out", f"grasps/{name}.jsonl"] + common) == 0
    assert main(["annotate", "--scene", "scene.json", "--grasps", "grasps", "--out", "anno"] + common) == 0
    assert main(["gen-training", "--anno", "anno", "--rgb", "rgb", "--depth", "depth", "--out", "tensors"]
                + common) == 0
    assert main(["recover", "--anno", "anno", "--out", "recovered.jsonl"] + common) == 0
