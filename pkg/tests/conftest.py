import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cosserat_shell import geometry as geo
from cosserat_shell.material import MaterialParams

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

POLY = ((2, 0, 0.5), (1, 1, 0.3), (0, 3, -0.4), (2, 2, 0.2))


def catalog():
    return [geo.builtin_surface("plate"), geo.builtin_surface("cylinder", (1.3,)),
            geo.builtin_surface("sphere", (1.0,)), geo.builtin_surface("hyperbolic_paraboloid", (1.0, 1.5)),
            geo.builtin_surface("polynomial", coeffs=POLY)]


@pytest.fixture
def params():
    return MaterialParams(mu=1.0, lam=0.7, mu_c=0.3, L_c=0.5, b1=1.1, b2=0.9, b3=1 / 3, h=0.05)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(2024))


@pytest.fixture(params=catalog(), ids=lambda s: s.kind)
def surface(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
