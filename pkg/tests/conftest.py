import numpy as np
import pytest

from cipher_audit import image_io


@pytest.fixture(scope="session")
def portrait_256() -> np.ndarray:
    return image_io.make_portrait_image(256)


@pytest.fixture(scope="session")
def portrait_64() -> np.ndarray:
    return image_io.make_portrait_image(64)
