"""Quadrotor flight dynamics: BEM rotors, residual-network wrench, tooling."""

from .core import (
    QuadrotorState,
    RotorSpeeds,
    StateDerivative,
    VehicleParams,
    Wrench,
    aggregate_wrench,
    motor_step,
    rigid_body_derivative,
    symplectic_euler_step,
)
from .rotor_quadratic import QuadraticCoeffs, fit_quadratic, quadratic_rotor_wrench

__all__ = [
    "QuadrotorState",
    "RotorSpeeds",
    "StateDerivative",
    "VehicleParams",
    "Wrench",
    "aggregate_wrench",
    "motor_step",
    "rigid_body_derivative",
    "symplectic_euler_step",
    "QuadraticCoeffs",
    "fit_quadratic",
    "quadratic_rotor_wrench",
]

__version__ = "0.1.0"
