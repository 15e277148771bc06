import numpy as np
import pytest

from staflow.synth import smooth_texture, translated_pair


@pytest.fixture(scope="session")
def texture():
    return smooth_texture(160, 120, seed=[7, 0])


@pytest.fixture(scope="session")
def small_texture():
    return smooth_texture(80, 60, seed=[7, 1])


@pytest.fixture(scope="session")
def shifted_pair(texture):
    """(prev, next, shift) with next(x) = prev(x - shift)."""
    shift = (2.0, 0.0)
    prev, nxt = translated_pair(texture, shift)
    return prev, nxt, shift


def median_epe(flow, shift, margin=10):
    inner = (slice(margin, -margin), slice(margin, -margin))
    return float(
        np.median(np.hypot(flow.u[inner] - shift[0], flow.v[inner] - shift[1]))
    )
