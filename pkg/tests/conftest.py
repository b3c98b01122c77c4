import numpy as np
import pytest

from shearlab.measures import make_lattice_bump, make_thin_bump
from shearlab.modforms import delta_qexp, form_observable


@pytest.fixture(scope="session")
def delta():
    # 4000 coefficients puts the Gaussian smoothing cutoff around 615,
    # enough for every L-value tolerance asserted below
    return delta_qexp(4000)


@pytest.fixture(scope="session")
def delta_psi(delta):
    return form_observable(delta)


@pytest.fixture(scope="session")
def lattice_bump():
    return make_lattice_bump()


@pytest.fixture(scope="session")
def thin_bump():
    return make_thin_bump()
