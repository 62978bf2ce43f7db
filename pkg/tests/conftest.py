import dataclasses

import numpy as np
import pytest

from decsim.model import default_body_model


@pytest.fixture(scope="session")
def body():
    return default_body_model()


@pytest.fixture(scope="session")
def point_mass_body():
    """Default body with segment rotational inertia zeroed (point-mass chain)."""
    d = default_body_model()
    segments = tuple(dataclasses.replace(s, inertia=0.0) for s in d.segments)
    return dataclasses.replace(d, segments=segments)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
