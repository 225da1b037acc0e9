import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ewjn.scene import Environment, Material, Scene, SpherePrimitive

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SIGMA = 1.44e17
OMEGA = 1e10


@pytest.fixture
def unit_sphere():
    return SpherePrimitive(np.zeros(3), 1.0, Material(SIGMA))


@pytest.fixture
def baseline_scene():
    sphere = SpherePrimitive(np.zeros(3), 1e-5, Material.from_si(1.6e7))
    return Scene(Environment(OMEGA, 0.0), [sphere])
