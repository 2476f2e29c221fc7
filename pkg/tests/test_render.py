import cmath
import json
import math

import numpy as np
import pytest

from antipode.dynamics import antipode, critical_points
from antipode.render import (
    DEFAULT_PALETTE,
    J_INF,
    J_UNDECIDED,
    J_ZERO,
    PlaneImage,
    Projection,
    Viewport,
    classify_points,
    default_threads,
    estimate_rotation_hue,
    grid_points,
    load_palette,
    render_julia,
    render_param,
)


def test_grid_is_exactly_symmetric():
    for w, h in ((64, 64), (63, 40)):
        Z, M = grid_points(w, h, Viewport.square(0j, 3.0))
        assert M.all()
        assert np.array_equal(Z, -Z[::-1, ::-1])
    Z, _ = grid_points(4, 2, Viewport(0j, 2 + 1j))
    assert Z[0, 0] == complex(-1.5, 0.5) and Z[-1, -1] == complex(1.5, -0.5)


def test_sphere_projection_orientation():
    Z, M = grid_points(101, 101, Viewport.square(0j, 1.0), Projection.SPHERE)
    assert abs(Z[50, 50] - 1) < 1e-12
    assert abs(Z[-1, 50]) < 0.2 and abs(Z[0, 50]) > 5
    assert not M[0, 0] and M[50, 50]
    # the hemisphere view puts the unit circle on the horizontal diameter
    assert np.allclose(np.abs(Z[50, M[50]]), 1.0)


def test_circled_projection_radius():
    Z, M = grid_points(201, 201, Viewport.square(0j, 1.0), Projection.CIRCLED)
    u = (2.0 * np.arange(201) + 1 - 201) / 201
    r = np.hypot(*np.meshgrid(u, u))
    R = np.abs(Z[M])
    assert np.allclose(R / np.sqrt(1 + R * R), r[M])


def test_q_zero_julia_is_unit_circle():
    img = render_julia(0j, 96, 96, Viewport.square(0j, 2.0), budget=500, threads=1)
    Z, _ = grid_points(96, 96, Viewport.square(0j, 2.0))
    inside = np.abs(Z) < 0.97
    outside = np.abs(Z) > 1.03
    assert (img.codes[inside] == J_ZERO).all()
    assert (img.codes[outside] == J_INF).all()


def test_julia_antipodal_symmetry():
    rng = np.random.default_rng(3)
    for q in (0.3 + 0.2j, 1.2 - 0.5j, 3j):
        z = rng.standard_normal(300) + 1j * rng.standard_normal(300)
        a = classify_points(q, z)
        b = classify_points(q, np.array([antipode(w) for w in z]))
        swap = {J_ZERO: J_INF, J_INF: J_ZERO}
        assert all(int(y) == swap.get(int(x), int(x)) for x, y in zip(a, b))


def test_herman_annulus_is_undecided():
    q = 1 - 6j
    circle = np.exp(2j * np.pi * np.arange(256) / 256)
    assert (classify_points(q, circle, budget=5000) == J_UNDECIDED).all()
    assert (classify_points(q, 0.01 * circle) == J_ZERO).all()


def test_param_plane_point_symmetry_and_threads():
    vp = Viewport.square(0j, 3.0)
    a = render_param("q", "component", 48, 48, vp, budget=500, threads=1)
    b = render_param("q", "component", 48, 48, vp, budget=500, threads=2)
    assert np.array_equal(a.codes, b.codes)
    assert np.array_equal(a.codes, a.codes[::-1, ::-1])
    assert a.counts()["Central"] > 0


def test_param_plane_small_q_is_central():
    img = render_param("q2", "component", 16, 16, Viewport.square(0j, 0.2), budget=500, threads=1)
    assert (img.codes == 0).all()


def test_rotation_hue_examples():
    assert estimate_rotation_hue(0.1) is None
    assert estimate_rotation_hue(3j) == 0.5
    q = cmath.sqrt(10 * cmath.exp(2j * math.pi * 0.78))
    assert estimate_rotation_hue(q) == 0.75
    h = estimate_rotation_hue(1 - 6j)
    assert h is not None and 0 < h < 1


def test_rotation_coloring_matches_hue():
    img = render_param("q", "rotation", 8, 8, Viewport.square(3j, 0.02), budget=1000, threads=1)
    assert img.hue is not None and np.allclose(img.hue, 0.5)
    rgb = img.to_rgb()
    assert rgb.shape == (8, 8, 3) and len({tuple(p) for p in rgb.reshape(-1, 3)}) == 1


def test_save_writes_ppm_and_sidecar(tmp_path):
    img = render_julia(0.5j, 20, 10, budget=200, threads=1)
    side = img.save(tmp_path / "j.ppm")
    raw = (tmp_path / "j.ppm").read_bytes()
    assert raw.startswith(b"P6\n20 10\n255\n") and len(raw) == len(b"P6\n20 10\n255\n") + 600
    info = json.loads(side.read_text())
    assert info["width"] == 20 and info["kind"] == "julia"
    assert sum(info["counts"].values()) == 200
    assert "git_describe" in info and info["palette"] == DEFAULT_PALETTE


def test_render_is_deterministic():
    a = render_julia(0.394 - 2.24j, 32, 32, budget=300, threads=1)
    b = render_julia(0.394 - 2.24j, 32, 32, budget=300, threads=1)
    assert np.array_equal(a.codes, b.codes)


def test_palette_loading(tmp_path):
    p = tmp_path / "pal.json"
    p.write_text(json.dumps({"julia": {"BasinZero": [1, 2, 3]}}))
    pal = load_palette(p)
    assert pal["julia"]["BasinZero"] == [1, 2, 3]
    assert pal["param"] == DEFAULT_PALETTE["param"]
    img = PlaneImage(1, 1, Viewport(), Projection.PLANE, "julia", np.zeros((1, 1), np.uint8))
    assert img.to_rgb(pal)[0, 0].tolist() == [1, 2, 3]


def test_threads_env(monkeypatch):
    monkeypatch.setenv("ANTIPODE_THREADS", "3")
    assert default_threads() == 3


def test_bad_plane_rejected():
    with pytest.raises(ValueError):
        render_param("z", "component", 4, 4)
    with pytest.raises(ValueError):
        render_param("q", "hue", 4, 4)
