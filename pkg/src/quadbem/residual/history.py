"""Fixed-length state/motor history feeding the residual network.

Feature rows are 10-dimensional: body-frame linear velocity (3), body
rates (3), rotor speeds (4).  The buffer holds 20 rows nominally spaced
2.5 ms apart, time-ascending (row 0 oldest, row 19 the current sample).
"""

from __future__ import annotations

import numpy as np

from ..errors import HistoryNotReadyError

HISTORY_LENGTH = 20
FEATURES = 10
STEP_MS = 2.5


def feature_row(v_body: np.ndarray, omega_body: np.ndarray, rotor_speeds: np.ndarray) -> np.ndarray:
    return np.concatenate([np.asarray(v_body, float), np.asarray(omega_body, float), np.asarray(rotor_speeds, float)])


def decimation_offsets(length: int = HISTORY_LENGTH, step_ms: float = STEP_MS, base_ms: float = 1.0) -> np.ndarray:
    """Nearest-sample offsets (in base-rate steps) behind the current sample.

    For the 1 ms simulator grid the 2.5 ms spacing lands between samples,
    so strides alternate 2/3 steps; each selected sample sits within half
    a base step of its ideal time.  Offsets are returned oldest-first:
    ``[48, 45, 43, ..., 3, 0]`` for the defaults.
    """
    idx = np.array([int(step_ms * j / base_ms + 0.5) for j in range(length)])
    return idx[::-1].copy()


class HistoryBuffer:
    """Single-writer ring of the last ``length`` feature rows."""

    def __init__(self, length: int = HISTORY_LENGTH, features: int = FEATURES):
        self._rows = np.zeros((length, features))
        self._count = 0
        self.length = length
        self.features = features

    @property
    def full(self) -> bool:
        return self._count >= self.length

    def push(self, row: np.ndarray) -> None:
        row = np.asarray(row, dtype=float)
        if row.shape != (self.features,):
            raise ValueError(f"feature row must have shape ({self.features},), got {row.shape}")
        self._rows = np.roll(self._rows, -1, axis=0)
        self._rows[-1] = row
        self._count += 1

    def as_array(self) -> np.ndarray:
        """(length, features) array, oldest row first."""
        if not self.full:
            raise HistoryNotReadyError(f"history holds {self._count}/{self.length} rows")
        return self._rows.copy()

    @classmethod
    def from_rows(cls, rows: np.ndarray) -> "HistoryBuffer":
        rows = np.asarray(rows, dtype=float)
        buf = cls(length=rows.shape[0], features=rows.shape[1])
        buf._rows = rows.copy()
        buf._count = rows.shape[0]
        return buf


def history_from_dense(rows: np.ndarray, length: int = HISTORY_LENGTH, step_ms: float = STEP_MS,
                       base_ms: float = 1.0) -> np.ndarray:
    """Decimate a dense base-rate feature block into one history window.

    ``rows`` must end at the current sample; the window picks the
    nearest-sample offsets going back from the last row.
    """
    rows = np.asarray(rows, dtype=float)
    offsets = decimation_offsets(length, step_ms, base_ms)
    if rows.shape[0] <= offsets[0]:
        raise HistoryNotReadyError(f"need at least {offsets[0] + 1} dense rows, got {rows.shape[0]}")
    return rows[rows.shape[0] - 1 - offsets]
