"""Robust scale estimators and calibrated Shewhart S-charts."""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .chart import ChartConfig, ControlLimits, calibrate_alpha, limits_for_alpha, signal_probability  # noqa: E402
from .contamination import OutlierModel, sample_phase1  # noqa: E402
from .estimators import LocationEstimatorSpec, ScaleEstimatorSpec, correction_factor, locate, scale_estimate  # noqa: E402

__all__ = [
    "__version__",
    "BACKEND",
    "ChartConfig",
    "ControlLimits",
    "LocationEstimatorSpec",
    "OutlierModel",
    "ScaleEstimatorSpec",
    "calibrate_alpha",
    "correction_factor",
    "limits_for_alpha",
    "locate",
    "sample_phase1",
    "scale_estimate",
    "signal_probability",
]
