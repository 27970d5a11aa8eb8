"""Location and scale estimators for rational subgroups.

Scalar functions take a 1-D sample. The ``*_rows`` functions take a 2-D
array and estimate every row at once through the selected kernel backend;
they also return an int8 flag per row (0 ok, 1 degenerate, 2 not
converged).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from ._backend import kernels
from .rng import Role, substream
from .special import normal_quantile, reg_inc_beta

__all__ = [
    "SCALE_NAMES",
    "LOCATION_KINDS",
    "MAD_CONSISTENCY",
    "EstimationWarning",
    "ScaleEstimatorSpec",
    "LocationEstimatorSpec",
    "mean",
    "median",
    "huber_m",
    "harrell_davis_median",
    "hd_weights",
    "hodges_lehmann",
    "sample_sd",
    "mad_raw",
    "qn_raw",
    "mslog_raw",
    "correction_factor",
    "scale_estimate",
    "locate",
    "scale_raw_rows",
    "scale_rows",
    "locate_rows",
]

MEDIAN_OF_PAIRS = "median-of-pairs"
ORDER_STATISTIC = "order-statistic"
QN_VARIANTS = (MEDIAN_OF_PAIRS, ORDER_STATISTIC)

SCALE_KINDS = ("sd", "mad", "qn", "mslog")
# command-line names; qn-rc is the order-statistic Qn
SCALE_NAMES = ("sd", "mad", "qn", "qn-rc", "mslog")
LOCATION_KINDS = ("mean", "huber", "hd", "hl")

MAD_CONSISTENCY = 1.0 / normal_quantile(0.75)
MSLOG_RHO_INF = 1.0

OK, DEGENERATE, NOT_CONVERGED = 0, 1, 2


class EstimationWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ScaleEstimatorSpec:
    """A subgroup scale estimator and its tuning.

    ``correction`` multiplies the raw estimate; it is 1.0 until calibrated
    for a subgroup size with :func:`correction_factor`.
    """

    kind: str
    qn_variant: str = MEDIAN_OF_PAIRS
    kappa: float = MSLOG_RHO_INF / 2
    correction: float = 1.0

    def __post_init__(self):
        if self.kind not in SCALE_KINDS:
            raise ValueError(f"unknown scale estimator {self.kind!r}")
        if self.qn_variant not in QN_VARIANTS:
            raise ValueError(f"unknown Qn variant {self.qn_variant!r}")
        if not 0.0 < self.kappa < MSLOG_RHO_INF:
            raise ValueError(f"kappa must lie in (0, {MSLOG_RHO_INF}), got {self.kappa}")
        if not self.correction > 0.0:
            raise ValueError(f"correction must be positive, got {self.correction}")

    @classmethod
    def from_name(cls, name: str, **kwargs) -> "ScaleEstimatorSpec":
        if name == "qn-rc":
            return cls("qn", qn_variant=ORDER_STATISTIC, **kwargs)
        return cls(name, **kwargs)

    @property
    def name(self) -> str:
        if self.kind == "qn" and self.qn_variant == ORDER_STATISTIC:
            return "qn-rc"
        return self.kind

    def with_correction(self, correction: float) -> "ScaleEstimatorSpec":
        return replace(self, correction=float(correction))

    def identity(self) -> dict:
        """Fields that determine the raw estimator (used in cache keys)."""
        ident = {"scale": self.name}
        if self.kind == "mslog":
            ident["kappa"] = self.kappa
        return ident


@dataclass(frozen=True)
class LocationEstimatorSpec:
    kind: str
    huber_c: float = 1.5
    huber_tol: float = 1e-9
    huber_max_iter: int = 500

    def __post_init__(self):
        if self.kind not in LOCATION_KINDS:
            raise ValueError(f"unknown location estimator {self.kind!r}")
        if not self.huber_c > 0.0:
            raise ValueError(f"huber_c must be positive, got {self.huber_c}")
        if not self.huber_tol > 0.0 or self.huber_max_iter < 1:
            raise ValueError("huber_tol and huber_max_iter must be positive")

    @property
    def name(self) -> str:
        return self.kind

    def identity(self) -> dict:
        ident = {"location": self.kind}
        if self.kind == "huber":
            ident.update(huber_c=self.huber_c, huber_tol=self.huber_tol, huber_max_iter=self.huber_max_iter)
        return ident


def _sample(s, min_n: int = 1) -> np.ndarray:
    x = np.asarray(s, dtype=np.float64).ravel()
    if x.size < min_n:
        if x.size == 0:
            raise ValueError("empty sample")
        raise ValueError(f"need at least {min_n} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    return x


def _warn_flags(flag, what: str) -> None:
    if np.any(flag == NOT_CONVERGED):
        warnings.warn(f"{what} did not converge; returning last iterate", EstimationWarning, stacklevel=3)


# -- location ---------------------------------------------------------------

def mean(s) -> float:
    x = _sample(s)
    return float(kernels.mean_rows(x[None, :])[0])


def median(s) -> float:
    """Sample median; even sizes average the two central order statistics."""
    x = _sample(s)
    return float(kernels.median_rows(x[None, :])[0])


def huber_m(s, spec: LocationEstimatorSpec | None = None) -> float:
    """Huber M-estimate of location.

    Iteratively reweighted means started at the median, with the
    normal-consistent MAD of ``s`` as auxiliary scale. A zero auxiliary
    scale returns the median.
    """
    spec = spec or LocationEstimatorSpec("huber")
    x = _sample(s)
    t, flag = kernels.huber_rows(x[None, :], spec.huber_c, spec.huber_tol, spec.huber_max_iter, MAD_CONSISTENCY)
    _warn_flags(flag, "Huber iteration")
    return float(t[0])


@lru_cache(maxsize=None)
def _hd_weights_cached(n: int) -> tuple:
    a = b = (n + 1) / 2.0
    cdf = [reg_inc_beta(i / n, a, b) for i in range(n + 1)]
    return tuple(cdf[i] - cdf[i - 1] for i in range(1, n + 1))


def hd_weights(n: int) -> np.ndarray:
    """Harrell-Davis median weights for the order statistics of ``n`` values."""
    if n < 1:
        raise ValueError("n must be positive")
    return np.array(_hd_weights_cached(int(n)))


def harrell_davis_median(s) -> float:
    x = _sample(s)
    return float(kernels.hd_rows(x[None, :], hd_weights(x.size))[0])


def hodges_lehmann(s) -> float:
    """Median of the Walsh averages (x_i + x_j)/2 over i < j."""
    x = _sample(s)
    if x.size == 1:
        return float(x[0])
    return float(kernels.hl_rows(x[None, :])[0])


# -- scale ------------------------------------------------------------------

def sample_sd(s) -> float:
    x = _sample(s, 2)
    return float(kernels.sd_rows(x[None, :])[0])


def mad_raw(s) -> float:
    x = _sample(s, 2)
    return float(kernels.mad_rows(x[None, :])[0])


def qn_raw(s, variant: str = MEDIAN_OF_PAIRS) -> float:
    """Pairwise-difference scale before correction.

    ``median-of-pairs`` takes the median of all |x_i - x_j|, i < j;
    ``order-statistic`` takes the C(h, 2)-th smallest, h = n//2 + 1.
    """
    if variant not in QN_VARIANTS:
        raise ValueError(f"unknown Qn variant {variant!r}")
    x = _sample(s, 2)
    return float(kernels.qn_rows(x[None, :], variant == ORDER_STATISTIC)[0])


def mslog_raw(s, kappa: float = 0.5) -> float:
    """Logistic M-scale about the median, before correction.

    Returns 0.0 (with an :class:`EstimationWarning`) when too many points
    sit on the median for a positive root to exist.
    """
    x = _sample(s, 2)
    sigma, flag = kernels.mslog_rows(x[None, :], float(kappa))
    if flag[0] == DEGENERATE:
        warnings.warn("MSLOG scale is degenerate (no positive root)", EstimationWarning, stacklevel=2)
    _warn_flags(flag, "MSLOG iteration")
    return float(sigma[0])


def scale_raw_rows(x, spec: ScaleEstimatorSpec):
    """Uncorrected scale of every row; returns ``(values, flags)``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError("scale estimation needs a 2-D array with at least 2 columns")
    if spec.kind == "sd":
        vals = kernels.sd_rows(x)
    elif spec.kind == "mad":
        vals = kernels.mad_rows(x)
    elif spec.kind == "qn":
        vals = kernels.qn_rows(x, spec.qn_variant == ORDER_STATISTIC)
    else:
        vals, flag = kernels.mslog_rows(x, spec.kappa)
        return vals, flag
    flag = np.where(vals > 0.0, OK, DEGENERATE).astype(np.int8)
    return vals, flag


def scale_rows(x, spec: ScaleEstimatorSpec):
    vals, flag = scale_raw_rows(x, spec)
    return spec.correction * vals, flag


def scale_estimate(s, spec: ScaleEstimatorSpec) -> float:
    x = _sample(s, 2)
    vals, flag = scale_rows(x[None, :], spec)
    _warn_flags(flag, f"{spec.name} iteration")
    return float(vals[0])


def locate_rows(x, spec: LocationEstimatorSpec):
    """Location of every row; returns ``(values, flags)``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError("location estimation needs a nonempty 2-D array")
    flag = np.zeros(x.shape[0], dtype=np.int8)
    if spec.kind == "mean":
        vals = kernels.mean_rows(x)
    elif spec.kind == "hd":
        vals = kernels.hd_rows(x, hd_weights(x.shape[1]))
    elif spec.kind == "hl":
        vals = kernels.hl_rows(x)
    else:
        vals, flag = kernels.huber_rows(x, spec.huber_c, spec.huber_tol, spec.huber_max_iter, MAD_CONSISTENCY)
    return vals, flag


def locate(values, spec: LocationEstimatorSpec) -> float:
    """Location of a list of reals (e.g. the k subgroup scale estimates)."""
    x = _sample(values)
    vals, flag = locate_rows(x[None, :], spec)
    _warn_flags(flag, f"{spec.name} iteration")
    return float(vals[0])


# -- finite-sample correction -----------------------------------------------

_CORRECTION_CHUNK = 1 << 16


def raw_scale_mean(spec: ScaleEstimatorSpec, n: int, replicates: int, seed: int) -> float:
    """Monte Carlo mean of the raw estimator on N(0, 1) samples of size ``n``.

    Samples come from the correction substream keyed by ``n`` alone, so all
    estimator kinds are calibrated on the same draws.
    """
    stream = substream(seed, n, Role.CORRECTION)
    total = 0.0
    done = 0
    while done < replicates:
        rows = min(_CORRECTION_CHUNK, replicates - done)
        x = stream.normal(0.0, 1.0, size=(rows, n))
        vals, _ = scale_raw_rows(x, spec)
        total += float(vals.sum())
        done += rows
    return total / replicates


def correction_factor(spec: ScaleEstimatorSpec | str, n: int, replicates: int = 1_000_000, seed: int = 0) -> float:
    """Factor f with E[f * raw] = 1 under N(0, 1) samples of size ``n``."""
    if isinstance(spec, str):
        spec = ScaleEstimatorSpec.from_name(spec)
    if replicates < 100:
        raise ValueError(f"at least 100 calibration replicates required, got {replicates}")
    if n < 2:
        raise ValueError("subgroup size must be at least 2")
    return 1.0 / raw_scale_mean(spec, int(n), int(replicates), int(seed))
