"""Propeller geometry and the quadrature grids built from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PropellerGeometry:
    """Physical description of one propeller for blade-element integration.

    Parameters
    ----------
    radius : float
        Rotor radius R [m].
    blade_count : int
        Number of blades b (2 or 3 on small multirotors).
    chord_samples : np.ndarray
        Piecewise-linear chord c(r): rows of (radius [m], chord [m]) sorted
        by radius and spanning [0, R].  Interpolated linearly in between.
    theta0, theta1 : float
        Blade pitch at the root and total twist [rad]; the local pitch is
        theta0 + (r/R) * theta1.
    cl0, cd0 : float
        Lift/drag coefficient scales of the full-range airfoil model
        c_l = cl0 sin(a) cos(a), c_d = cd0 sin^2(a).
    k_beta : float
        Torsional stiffness of the blade hinge spring [N*m/rad].
    hinge_offset : float
        Flapping hinge offset e from the hub centre [m], 0 <= e < R.
    blade_mass : float
        Mass of a single blade [kg].
    blade_inertia : float
        Flapping inertia of a single blade about the hinge [kg*m^2].
    """

    radius: float
    blade_count: int
    chord_samples: np.ndarray
    theta0: float
    theta1: float
    cl0: float
    cd0: float
    k_beta: float
    hinge_offset: float
    blade_mass: float
    blade_inertia: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.blade_count not in (2, 3):
            raise ValueError(f"blade_count must be 2 or 3, got {self.blade_count}")
        if not 0.0 <= self.hinge_offset < self.radius:
            raise ValueError(f"hinge offset must lie in [0, R), got {self.hinge_offset}")
        if self.k_beta <= 0:
            raise ValueError(f"k_beta must be positive, got {self.k_beta}")
        if self.blade_mass <= 0 or self.blade_inertia <= 0:
            raise ValueError("blade mass and inertia must be positive")
        samples = np.atleast_2d(np.asarray(self.chord_samples, dtype=float))
        if samples.shape[0] < 2 or samples.shape[1] != 2:
            raise ValueError("chord_samples must be at least two (radius, chord) rows")
        if np.any(np.diff(samples[:, 0]) <= 0):
            raise ValueError("chord sample radii must be strictly increasing")
        if samples[0, 0] > 0.0 or samples[-1, 0] < self.radius:
            raise ValueError("chord samples must cover [0, R]")
        if np.any(samples[:, 1] <= 0.0):
            raise ValueError("chord must be positive everywhere")
        object.__setattr__(self, "chord_samples", samples)

    @property
    def disk_area(self) -> float:
        return math.pi * self.radius**2

    def chord(self, r) -> np.ndarray:
        """Chord length at radius r, linearly interpolated."""
        return np.interp(r, self.chord_samples[:, 0], self.chord_samples[:, 1])

    def pitch(self, r) -> np.ndarray:
        """Local blade pitch theta0 + (r/R) theta1 at radius r."""
        return self.theta0 + (np.asarray(r, dtype=float) / self.radius) * self.theta1

    def blade_static_moment(self) -> float:
        """First mass moment of a blade about the hinge (uniform blade)."""
        return 0.5 * self.blade_mass * (self.radius - self.hinge_offset)


@dataclass(frozen=True)
class QuadratureGrid:
    """Radial Gauss-Legendre x azimuthal trapezoid quadrature for one rotor.

    The radial rule is composite per chord segment so piecewise-linear
    chord kinks never cross a panel, keeping spectral convergence.  The
    azimuthal rule is the uniform periodic trapezoid.
    """

    r_nodes: np.ndarray
    r_weights: np.ndarray
    chord_nodes: np.ndarray
    theta_nodes: np.ndarray
    psi_nodes: np.ndarray
    n_radial: int
    n_azimuth: int


def build_quadrature(geometry: PropellerGeometry, n_radial: int = 16, n_azimuth: int = 32) -> QuadratureGrid:
    """Construct the blade-element quadrature grid for a geometry.

    ``n_radial`` counts nodes across the full span [e, R]; each chord
    segment receives a share proportional to its length (at least two).
    """
    if n_radial < 2 or n_azimuth < 4:
        raise ValueError("need n_radial >= 2 and n_azimuth >= 4")
    lo, hi = geometry.hinge_offset, geometry.radius
    breaks = [lo] + [float(r) for r in geometry.chord_samples[:, 0] if lo < r < hi] + [hi]
    span = hi - lo
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        n_seg = max(2, math.ceil(n_radial * (b - a) / span))
        x, w = np.polynomial.legendre.leggauss(n_seg)
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    r_nodes = np.concatenate(nodes)
    r_weights = np.concatenate(weights)
    psi = np.arange(n_azimuth) * (2.0 * math.pi / n_azimuth)
    return QuadratureGrid(
        r_nodes=r_nodes,
        r_weights=r_weights,
        chord_nodes=geometry.chord(r_nodes),
        theta_nodes=geometry.pitch(r_nodes),
        psi_nodes=psi,
        n_radial=n_radial,
        n_azimuth=n_azimuth,
    )
