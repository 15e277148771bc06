import numpy as np
import pytest

from staflow.colorize import color_wheel, flow_to_color, load_ppm, save_image, save_ppm
from staflow.flow import FlowField


def test_wheel_has_55_entries():
    wheel = color_wheel()
    assert wheel.shape == (55, 3)
    assert wheel.min() >= 0.0 and wheel.max() <= 1.0


def test_zero_field_renders_white():
    image = flow_to_color(FlowField.zeros(6, 8))
    assert image.shape == (6, 8, 3)
    assert np.all(image == 255)


def test_output_dimensions_match():
    rng = np.random.default_rng(0)
    flow = FlowField(u=rng.normal(size=(10, 14)), v=rng.normal(size=(10, 14)))
    assert flow_to_color(flow).shape == (10, 14, 3)


def test_scaling_invariance_with_auto_max():
    rng = np.random.default_rng(1)
    u = rng.normal(size=(9, 9))
    v = rng.normal(size=(9, 9))
    a = flow_to_color(FlowField(u=u, v=v))
    b = flow_to_color(FlowField(u=4.0 * u, v=4.0 * v))  # power of two: exact ratios
    assert np.array_equal(a, b)


def test_equal_vectors_equal_colors():
    u = np.asarray([[1.0, 1.0], [0.0, -2.0]])
    v = np.asarray([[0.5, 0.5], [1.0, 0.3]])
    image = flow_to_color(FlowField(u=u, v=v), max_magnitude=3.0)
    assert np.array_equal(image[0, 0], image[0, 1])


def test_nonfinite_rendered_black_with_warning():
    u = np.ones((4, 4))
    u[1, 2] = np.nan
    v = np.ones((4, 4))
    v[3, 0] = np.inf
    with pytest.warns(UserWarning, match="2 non-finite"):
        image = flow_to_color(FlowField(u=u, v=v))
    assert image[1, 2].tolist() == [0, 0, 0]
    assert image[3, 0].tolist() == [0, 0, 0]


def test_ppm_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    image = rng.integers(0, 256, size=(5, 7, 3)).astype(np.uint8)
    path = tmp_path / "img.ppm"
    save_ppm(image, path)
    assert np.array_equal(load_ppm(path), image)


def test_png_write(tmp_path):
    flow = FlowField(u=np.ones((6, 6)), v=np.zeros((6, 6)))
    path = tmp_path / "img.png"
    save_image(flow_to_color(flow), path)
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
