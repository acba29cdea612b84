"""Blade-element-momentum rotor model."""

from .geometry import PropellerGeometry, QuadratureGrid, build_quadrature
from .inflow import RotorOperatingPoint, propeller_frame_inflow
from .model import (
    BladeElementLoads,
    FlappingAngles,
    InducedVelocityResult,
    bem_rotor_wrench,
    bem_wrench_from_op,
    blade_element_integrals,
    flapping_angles,
    momentum_thrust,
    solve_induced_velocity,
    vortex_ring_induced_velocity,
)

__all__ = [
    "PropellerGeometry",
    "QuadratureGrid",
    "build_quadrature",
    "RotorOperatingPoint",
    "propeller_frame_inflow",
    "BladeElementLoads",
    "FlappingAngles",
    "InducedVelocityResult",
    "bem_rotor_wrench",
    "bem_wrench_from_op",
    "blade_element_integrals",
    "flapping_angles",
    "momentum_thrust",
    "solve_induced_velocity",
    "vortex_ring_induced_velocity",
]
