import numpy as np
import pytest

from quadbem import config
from quadbem.bem import RotorOperatingPoint, build_quadrature


@pytest.fixture(scope="session")
def vehicle():
    return config.load_vehicle()


@pytest.fixture(scope="session")
def geometry():
    return config.load_geometry()


@pytest.fixture(scope="session")
def grid(geometry):
    return build_quadrature(geometry)


@pytest.fixture(scope="session")
def make_op(vehicle):
    def _make(omega, v_hor=0.0, v_ver=0.0, spin=1.0, rates=(0.0, 0.0)):
        return RotorOperatingPoint(
            omega=omega,
            v_hor=v_hor,
            v_ver=v_ver,
            body_rates_p=np.asarray(rates, dtype=float),
            rho=vehicle.rho,
            spin=spin,
        )

    return _make
