import numpy as np
import pytest

from sobolev_lab.exponents import SobolevExponents
from sobolev_lab.geometry import StarDomain2D, triangulate
from sobolev_lab.rearrangement import distribution
from sobolev_lab.variational import minimize_rayleigh

E22 = SobolevExponents(2, 2, 2)
E12 = SobolevExponents(2, 1, 2)
E15 = SobolevExponents(2, 1.5, 1.5)


def two_lobe(theta):
    return 1.0 + 0.25 * np.cos(2 * theta)


def limacon(theta):
    return 1.0 + 0.3 * np.cos(theta)


@pytest.fixture(scope="session")
def disk_domain():
    return StarDomain2D.disk(1.0)


@pytest.fixture(scope="session")
def square_domain():
    return StarDomain2D.square(1.0)


@pytest.fixture(scope="session")
def twolobe_domain():
    return StarDomain2D.from_function(two_lobe)


@pytest.fixture(scope="session")
def limacon_domain():
    return StarDomain2D.from_function(limacon)


@pytest.fixture(scope="session")
def disk_mesh(disk_domain):
    return triangulate(disk_domain, 0.02)


@pytest.fixture(scope="session")
def square_mesh(square_domain):
    return triangulate(square_domain, 0.02)


@pytest.fixture(scope="session")
def twolobe_mesh(twolobe_domain):
    return triangulate(twolobe_domain, 0.02)


@pytest.fixture(scope="session")
def limacon_mesh(limacon_domain):
    return triangulate(limacon_domain, 0.02)


@pytest.fixture(scope="session")
def disk_field_p22(disk_mesh):
    return minimize_rayleigh(disk_mesh, E22, domain_id="disk")


@pytest.fixture(scope="session")
def square_field_p22(square_mesh):
    return minimize_rayleigh(square_mesh, E22, domain_id="square")


@pytest.fixture(scope="session")
def twolobe_field_p22(twolobe_mesh):
    return minimize_rayleigh(twolobe_mesh, E22, domain_id="twolobe")


@pytest.fixture(scope="session")
def limacon_field_p22(limacon_mesh):
    return minimize_rayleigh(limacon_mesh, E22, domain_id="limacon")


@pytest.fixture(scope="session")
def disk_field_p12(disk_mesh):
    return minimize_rayleigh(disk_mesh, E12, domain_id="disk")


@pytest.fixture(scope="session")
def square_field_p12(square_mesh):
    return minimize_rayleigh(square_mesh, E12, domain_id="square")


@pytest.fixture(scope="session")
def twolobe_field_p12(twolobe_mesh):
    return minimize_rayleigh(twolobe_mesh, E12, domain_id="twolobe")


@pytest.fixture(scope="session")
def disk_field_p15():
    mesh = triangulate(StarDomain2D.disk(1.0), 0.03)
    return minimize_rayleigh(mesh, E15, domain_id="disk")


@pytest.fixture(scope="session")
def square_field_p15(square_mesh):
    return minimize_rayleigh(square_mesh, E15, domain_id="square")


@pytest.fixture(scope="session")
def twolobe_field_p15(twolobe_mesh):
    return minimize_rayleigh(twolobe_mesh, E15, domain_id="twolobe")


@pytest.fixture(scope="session")
def disk_profile_p22(disk_field_p22):
    return distribution(disk_field_p22, 400)


@pytest.fixture(scope="session")
def square_profile_p22(square_field_p22):
    return distribution(square_field_p22, 400)
