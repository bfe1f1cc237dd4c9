import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stickydisks.generators import (
    GeneratorConfig,
    hexagonal_patch,
    sequential_packing,
    triangle_packing,
    unit_chain,
)
from stickydisks.packing import contact_graph

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def triangle():
    p = triangle_packing()
    return p, contact_graph(p)


@pytest.fixture
def hex_patch():
    p = hexagonal_patch(1)
    return p, contact_graph(p)


@pytest.fixture
def chain3():
    p = unit_chain(3)
    return p, contact_graph(p)


@pytest.fixture(scope="session")
def seq10():
    return sequential_packing(GeneratorConfig(seed=7, n=10))


def random_rotation(rng):
    th = rng.uniform(0, 2 * np.pi)
    c, s = np.cos(th), np.sin(th)
    return np.array([[c, -s], [s, c]])


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
