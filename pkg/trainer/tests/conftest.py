import numpy as np
import pytest

from quadbem import config
from quadbem.core import Wrench
from quadbem.harness import SimConfig, TrajectorySpec, identify_quadratic_from_bem, track_and_simulate
from quadbem.pipeline import split_dataset

DRAG_GAIN = 0.3  # injected linear-drag residual: f_res = -0.3 * v_body


@pytest.fixture(scope="session")
def vehicle():
    return config.load_vehicle()


@pytest.fixture(scope="session")
def geometry():
    return config.load_geometry()


@pytest.fixture(scope="session")
def coeffs(geometry, vehicle):
    return identify_quadratic_from_bem(geometry, rho=vehicle.rho)


def linear_drag(state, speeds):
    return Wrench(f=-DRAG_GAIN * state.v_body(), tau=np.zeros(3))


def simulate_log(vehicle, geometry, coeffs, trajectory, duration=4.0, disturb=True):
    sim = SimConfig(
        vehicle=vehicle,
        geometry=geometry,
        trajectory=trajectory,
        model="fit",
        coeffs=coeffs,
        duration=duration,
        disturbance=linear_drag if disturb else None,
    )
    result = track_and_simulate(sim)
    assert not result.crashed
    return result.log


DRAG_SPECS = [
    TrajectorySpec(family="lemniscate", speed_scale=1.0, size=3.0),
    TrajectorySpec(family="lemniscate", speed_scale=1.8, size=3.0),
    TrajectorySpec(family="ellipse", speed_scale=1.4, size=3.0),
    TrajectorySpec(family="ellipse", speed_scale=2.2, size=2.5),
    TrajectorySpec(family="slanted-circle", speed_scale=1.4, size=2.5),
    TrajectorySpec(family="slanted-circle", speed_scale=2.0, size=2.0),
    TrajectorySpec(family="linear-oscillation", speed_scale=1.6, size=2.5),
    TrajectorySpec(family="random-points", speed_scale=1.0, seed=3),
    TrajectorySpec(family="random-points", speed_scale=1.2, seed=9),
]


@pytest.fixture(scope="session")
def drag_logs(vehicle, geometry, coeffs):
    """Simulator-generated logs with the injected linear-drag residual."""
    return [simulate_log(vehicle, geometry, coeffs, spec, duration=4.0) for spec in DRAG_SPECS]


@pytest.fixture(scope="session")
def drag_split(drag_logs):
    """Whole-trajectory train/val/test split, stratified by mean speed."""
    return split_dataset(drag_logs)
