"""Quadratic single-rotor model: thrust and drag torque proportional to Omega^2.

This is the classic static-thrust-stand model.  It captures no in-plane
forces or moments; thrust acts along +z_B and the drag-torque reaction
along the spin-signed z_B axis.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Wrench
from .errors import SingularFitError


@dataclass(frozen=True)
class QuadraticCoeffs:
    """Thrust and drag-torque coefficients in SI units (rad/s based).

    thrust = c_lq * Omega^2 [N], drag torque = c_dq * Omega^2 [N*m].
    """

    c_lq: float
    c_dq: float

    def __post_init__(self):
        if self.c_lq <= 0:
            raise ValueError(f"c_lq must be positive, got {self.c_lq}")
        if self.c_dq <= 0:
            raise ValueError(f"c_dq must be positive, got {self.c_dq}")


def quadratic_rotor_wrench(omega: float, coeffs: QuadraticCoeffs, spin: float) -> Wrench:
    """Body-frame wrench of one rotor under the quadratic model.

    ``spin`` is +1 for a clockwise rotor (seen from above), -1 for
    counter-clockwise; the aerodynamic reaction torque on the airframe is
    spin * c_dq * Omega^2 about +z_B.
    """
    if not np.isfinite(omega) or omega < 0:
        raise ValueError(f"rotor speed must be finite and non-negative, got {omega}")
    if spin not in (-1.0, 1.0, -1, 1):
        raise ValueError(f"spin must be +/-1, got {spin}")
    w2 = omega * omega
    return Wrench(
        f=np.array([0.0, 0.0, coeffs.c_lq * w2]),
        tau=np.array([0.0, 0.0, float(spin) * coeffs.c_dq * w2]),
    )


def fit_quadratic(samples) -> QuadraticCoeffs:
    """Identify (c_lq, c_dq) from (Omega, thrust, torque) triples.

    Linear least squares through the origin in Omega^2, solved in closed
    form: c = sum(y * w^2) / sum(w^4).  Torque magnitudes are used, so
    spin-signed test-stand data may be passed directly.
    """
    data = np.asarray(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError("samples must be (omega, thrust, torque) triples")
    if data.shape[0] < 2:
        raise SingularFitError("need at least two samples to fit")
    w2 = data[:, 0] ** 2
    denom = float(np.sum(w2 * w2))
    if denom <= 0 or np.ptp(data[:, 0]) == 0.0:
        raise SingularFitError("samples must contain at least two distinct rotor speeds")
    c_lq = float(np.sum(data[:, 1] * w2) / denom)
    c_dq = float(np.sum(np.abs(data[:, 2]) * w2) / denom)
    if c_lq <= 0 or c_dq <= 0:
        raise SingularFitError(f"fit produced non-positive coefficients ({c_lq}, {c_dq})")
    return QuadraticCoeffs(c_lq=c_lq, c_dq=c_dq)


def load_thrust_map(path: str | Path) -> np.ndarray:
    """Read a static thrust-map CSV (omega_rad_s, thrust_N, torque_Nm)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append((float(row["omega_rad_s"]), float(row["thrust_N"]), float(row["torque_Nm"])))
    return np.asarray(rows, dtype=float)


def save_thrust_map(path: str | Path, table: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["omega_rad_s", "thrust_N", "torque_Nm"])
        for omega, thrust, torque in np.asarray(table, dtype=float):
            writer.writerow([repr(float(omega)), repr(float(thrust)), repr(float(torque))])


def r_squared(y: np.ndarray, y_pred: np.ndarray) -> float:
    """Coefficient of determination of a fit."""
    y = np.asarray(y, dtype=float)
    resid = float(np.sum((y - y_pred) ** 2))
    total = float(np.sum((y - y.mean()) ** 2))
    if total == 0.0:
        return 1.0 if resid == 0.0 else 0.0
    return 1.0 - resid / total
