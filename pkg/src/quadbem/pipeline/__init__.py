"""Flight-log ingestion: splines, clock sync, filtering, assembly, splits."""

from .assemble import assemble_flight_log, filter_logs_by_speed, measured_wrench, split_dataset
from .filtering import FILTFILT_CUTOFF_CORRECTION, filter_motor_speeds, motor_cutoff_hz
from .flightlog import FLIGHTLOG_COLUMNS, FlightLog, RawLog, load_raw_log
from .splines import QuaternionTrajectory, ScalarSpline, VectorSpline, fit_scalar_spline, fit_splines
from .sync import SyncResult, sync_clocks

__all__ = [
    "assemble_flight_log",
    "filter_logs_by_speed",
    "measured_wrench",
    "split_dataset",
    "FILTFILT_CUTOFF_CORRECTION",
    "filter_motor_speeds",
    "motor_cutoff_hz",
    "FLIGHTLOG_COLUMNS",
    "FlightLog",
    "RawLog",
    "load_raw_log",
    "QuaternionTrajectory",
    "ScalarSpline",
    "VectorSpline",
    "fit_scalar_spline",
    "fit_splines",
    "SyncResult",
    "sync_clocks",
]
