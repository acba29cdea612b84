"""YAML configuration loading for vehicle and propeller parameters.

File formats (all SI units)
---------------------------
Vehicle file keys::

    mass: 0.752                      # [kg]
    inertia: [0.0025, 0.0021, 0.0043]  # diagonal J [kg m^2]
    rotor_positions:                 # body frame [m], one row per rotor
      - [ 0.0884, -0.0884, 0.0]
      - ...
    rotor_spin: [-1, -1, 1, 1]       # +1 clockwise seen from above
    motor_time_constant: 0.033       # [s]
    air_density: 1.204               # [kg/m^3]
    gravity: [0.0, 0.0, -9.81]       # optional
    propeller_geometry: propeller_5inch.yaml   # optional reference

Propeller file keys::

    radius, blade_count, chord_samples ([[r, c], ...]), theta0, theta1,
    cl0, cd0, k_beta, hinge_offset, blade_mass, blade_inertia
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .bem.geometry import PropellerGeometry
from .core import VehicleParams


def _read_yaml(path: str | Path) -> dict:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    return data


def _packaged(name: str) -> Path:
    return Path(str(resources.files("quadbem").joinpath("data", name)))


def vehicle_from_dict(data: dict) -> VehicleParams:
    kwargs = dict(
        mass=float(data["mass"]),
        inertia=np.asarray(data["inertia"], dtype=float),
        rotor_positions=np.asarray(data["rotor_positions"], dtype=float),
        rotor_spin=np.asarray(data["rotor_spin"], dtype=float),
        tau_motor=float(data.get("motor_time_constant", 0.033)),
        rho=float(data.get("air_density", 1.204)),
    )
    if "gravity" in data:
        kwargs["gravity"] = np.asarray(data["gravity"], dtype=float)
    return VehicleParams(**kwargs)


def geometry_from_dict(data: dict) -> PropellerGeometry:
    return PropellerGeometry(
        radius=float(data["radius"]),
        blade_count=int(data["blade_count"]),
        chord_samples=np.asarray(data["chord_samples"], dtype=float),
        theta0=float(data["theta0"]),
        theta1=float(data["theta1"]),
        cl0=float(data["cl0"]),
        cd0=float(data["cd0"]),
        k_beta=float(data["k_beta"]),
        hinge_offset=float(data["hinge_offset"]),
        blade_mass=float(data["blade_mass"]),
        blade_inertia=float(data["blade_inertia"]),
    )


def load_vehicle(path: str | Path | None = None) -> VehicleParams:
    """Load vehicle parameters; no path loads the packaged default."""
    if path is None:
        path = _packaged("vehicle_default.yaml")
    return vehicle_from_dict(_read_yaml(path))


def load_geometry(path: str | Path | None = None) -> PropellerGeometry:
    """Load propeller geometry; no path loads the packaged default."""
    if path is None:
        path = _packaged("propeller_5inch.yaml")
    return geometry_from_dict(_read_yaml(path))


def geometry_path_for_vehicle(vehicle_path: str | Path) -> Path | None:
    """Resolve a vehicle file's propeller_geometry reference, if present."""
    data = _read_yaml(vehicle_path)
    ref = data.get("propeller_geometry")
    if ref is None:
        return None
    ref_path = Path(ref)
    if not ref_path.is_absolute():
        ref_path = Path(vehicle_path).parent / ref_path
    return ref_path
