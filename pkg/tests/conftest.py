import numpy as np
import pytest

from tonepipe import DisplayImage, RadianceImage


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def radiance(values) -> RadianceImage:
    """Wrap nested lists / arrays as a RadianceImage without fuss."""
    return RadianceImage(np.asarray(values, dtype=np.float32))


def display(values, bit_depth=0) -> DisplayImage:
    return DisplayImage(np.asarray(values, dtype=np.float32), bit_depth=bit_depth)


def random_radiance(rng, width=16, height=16, low=0.0, high=1.0) -> RadianceImage:
    data = rng.uniform(low, high, size=(height, width, 3)).astype(np.float32)
    return RadianceImage(data)
