import numpy as np
import pytest
from pathlib import Path

from scenarios.hopf import HopfScenario, hopf_system
from scenarios.optics import OpticsScenario, optics_system
from scenarios.plasma import PlasmaScenario, vlasov_system


SCENARIO_DIR = Path(__file__).parent.parent / "data" / "scenarios"


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    """Return the directory holding the sample scenario files."""
    return SCENARIO_DIR


@pytest.fixture(scope="session")
def hopf_linear() -> HopfScenario:
    """Hopf problem with U(x) = -x and eps = 0.1."""
    return HopfScenario(eps=0.1, profile="-x")


@pytest.fixture(scope="session")
def hopf_sinh() -> HopfScenario:
    """Hopf problem with U(x) = -sinh(x) on [-2, 2]."""
    return HopfScenario(eps=0.1, profile="-sinh(x)", x_range=(-2.0, 2.0), x_points=801)


@pytest.fixture(scope="session")
def parabolic_beam() -> OpticsScenario:
    """Cylindrical beam with intensity 1 - x^2 at alpha = 0.1."""
    return OpticsScenario(alpha=0.1, nu=1, profile="parabolic")


@pytest.fixture(scope="session")
def soliton_beam() -> OpticsScenario:
    """Plane beam with intensity cosh(x)^-2 at alpha = 0.1."""
    return OpticsScenario(alpha=0.1, nu=0, profile="soliton")


@pytest.fixture(scope="session")
def plasma() -> PlasmaScenario:
    """Carbon/proton plasma with cold and hot electrons."""
    return PlasmaScenario()


@pytest.fixture(scope="session")
def hopf_frame():
    """Hopf equation with eps as a group variable."""
    return hopf_system()


@pytest.fixture(scope="session")
def optics_frame():
    """Cylindrical optics system."""
    return optics_system(nu=1)


@pytest.fixture(scope="session")
def vlasov_frame():
    """One-species Vlasov equation."""
    return vlasov_system()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(20240601)
