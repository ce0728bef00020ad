import numpy as np
import pytest

from surfink import meshes as meshlib
from surfink.geodesic import GeodesicSolver
from surfink.harness import build_surface_map

# Builders for every mesh any test may ask for. Benchmark meshes are
# built once per session; maps and solvers are built lazily because a
# surface map can take seconds.
_BUILDERS = {
    "plane": meshlib.plane,
    "icosphere": meshlib.icosphere,
    "capsule": meshlib.capsule,
    "vgroove": meshlib.vgroove,
    "bumpy": meshlib.bumpy_sphere,
    "torus": meshlib.torus,
    "ico2": lambda: meshlib.icosphere(2),
    "plane8": lambda: meshlib.plane(8),
    "quad": lambda: meshlib.plane(1),
}


@pytest.fixture(scope="session")
def get_mesh():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = _BUILDERS[name]()
        return cache[name]

    return get


@pytest.fixture(scope="session")
def get_solver(get_mesh):
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = GeodesicSolver(get_mesh(name))
        return cache[name]

    return get


@pytest.fixture(scope="session")
def get_smap(get_mesh):
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = build_surface_map(get_mesh(name), seed=0)
        return cache[name]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
