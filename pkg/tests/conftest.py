from __future__ import annotations

import numpy as np
import pytest

from msc3d import Volume3D


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def dyadic_array(rng: np.random.Generator, shape, steps: int = 256) -> np.ndarray:
    """Random values quantized to 1/steps so small sums stay exact in float64."""
    return np.floor(rng.random(shape) * steps) / steps


def random_volume(rng: np.random.Generator, shape) -> Volume3D:
    return Volume3D(rng.random(shape))
