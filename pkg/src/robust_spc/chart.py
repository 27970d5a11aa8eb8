"""Shewhart S-chart: Phase I estimate, probability limits, exact Phase II
signal probabilities, and calibration of the limits to a target
unconditional in-control ARL.

The Phase II statistic is the plain sample standard deviation of each new
subgroup, so (n - 1) S^2 / (phi sigma)^2 is chi-square with n - 1 degrees
of freedom and the per-subgroup signal probability is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contamination import CLEAN, OutlierModel, phase1_replicates
from .estimators import LocationEstimatorSpec, ScaleEstimatorSpec, locate_rows, scale_rows
from .rng import Role, RngStream
from .special import chi2_cdf, chi2_cdf_array, chi2_quantile, chi2_sf, chi2_sf_array

__all__ = [
    "DEFAULT_TARGET_ARL0",
    "ALPHA_BRACKET",
    "CalibrationError",
    "ChartConfig",
    "ControlLimits",
    "RunLengthModel",
    "ArlEstimate",
    "phase1_sigma_hat",
    "sigma_hat_rows",
    "limit_factors",
    "limits_for_alpha",
    "signal_probability",
    "signal_probability_array",
    "arl_from_sigma_hats",
    "alpha_for_target",
    "calibrate_alpha",
    "unconditional_arl",
    "phase2_statistics",
    "simulate_run_lengths",
]

DEFAULT_TARGET_ARL0 = 370.4
ALPHA_BRACKET = (1e-6, 0.2)
# share of excluded replicates above which an ARL estimate is flagged invalid
MAX_EXCLUDED_FRACTION = 0.01


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChartConfig:
    n: int
    k: int
    scale_spec: ScaleEstimatorSpec
    location_spec: LocationEstimatorSpec
    target_arl0: float = DEFAULT_TARGET_ARL0

    def __post_init__(self):
        if self.n < 2 or self.k < 2:
            raise ValueError(f"need n >= 2 and k >= 2, got n={self.n}, k={self.k}")
        if not self.target_arl0 > 1.0:
            raise ValueError("target ARL0 must exceed 1")


@dataclass(frozen=True)
class ControlLimits:
    lcl: float
    ucl: float
    center: float
    alpha_star: float
    l_factor: float
    u_factor: float
    n: int

    def signals(self, stat):
        """True where a Phase II statistic falls outside [lcl, ucl]."""
        stat = np.asarray(stat, dtype=float)
        return (stat < self.lcl) | (stat > self.ucl)


@dataclass(frozen=True)
class RunLengthModel:
    p: float
    phi: float = 1.0

    @property
    def conditional_arl(self) -> float:
        return 1.0 / self.p


@dataclass(frozen=True)
class ArlEstimate:
    arl: float
    se: float
    excluded: int
    replicates: int

    @property
    def valid(self) -> bool:
        return self.excluded <= MAX_EXCLUDED_FRACTION * self.replicates


def sigma_hat_rows(data, scale_spec: ScaleEstimatorSpec, location_spec: LocationEstimatorSpec):
    """Phase I estimates for a stack of datasets of shape (R, k, n).

    Returns ``(sigma_hat, ok)`` where ``ok`` is False for replicates whose
    estimate is unusable (nonpositive, non-finite, or location iteration
    not converged).
    """
    data = np.ascontiguousarray(data, dtype=np.float64)
    r, k, n = data.shape
    scales, _ = scale_rows(data.reshape(r * k, n), scale_spec)
    sig, flag = locate_rows(scales.reshape(r, k), location_spec)
    ok = (flag == 0) & np.isfinite(sig) & (sig > 0.0)
    return sig, ok


def phase1_sigma_hat(data, scale_spec: ScaleEstimatorSpec, location_spec: LocationEstimatorSpec) -> float:
    """Locate the k corrected subgroup scale estimates of one Phase I dataset."""
    x = getattr(data, "subgroups", data)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("Phase I data must be a (k, n) array")
    sig, ok = sigma_hat_rows(x[None], scale_spec, location_spec)
    if not ok[0]:
        raise ValueError("Phase I data are degenerate: no positive scale estimate")
    return float(sig[0])


def limit_factors(n: int, alpha: float) -> tuple[float, float]:
    """Equal-tailed multipliers (L_n, U_n) for the sample SD of n points."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    df = n - 1
    lo = math.sqrt(chi2_quantile(alpha / 2.0, df) / df)
    hi = math.sqrt(chi2_quantile(1.0 - alpha / 2.0, df) / df)
    return lo, hi


def limits_for_alpha(sigma_hat: float, n: int, alpha: float) -> ControlLimits:
    if not sigma_hat > 0.0:
        raise ValueError("sigma_hat must be positive")
    lo, hi = limit_factors(n, alpha)
    return ControlLimits(lo * sigma_hat, hi * sigma_hat, sigma_hat, alpha, lo, hi, n)


def signal_probability(limits: ControlLimits, sigma_true: float = 1.0, phi: float = 1.0, n: int | None = None) -> float:
    """P(sample SD of n N(mu, (phi sigma)^2) points falls outside the limits)."""
    if not (sigma_true > 0.0 and phi > 0.0):
        raise ValueError("sigma_true and phi must be positive")
    n = limits.n if n is None else n
    df = n - 1
    s = phi * sigma_true
    below = chi2_cdf(df * (limits.lcl / s) ** 2, df)
    above = chi2_sf(df * (limits.ucl / s) ** 2, df) if math.isfinite(limits.ucl) else 0.0
    return below + above


def signal_probability_array(sigma_hat, l_factor: float, u_factor: float, n: int, phi: float = 1.0,
                             sigma_true: float = 1.0) -> np.ndarray:
    """Vectorised :func:`signal_probability` over Phase I estimates."""
    sig = np.asarray(sigma_hat, dtype=float)
    df = n - 1
    ratio2 = (sig / (phi * sigma_true)) ** 2
    return chi2_cdf_array(df * l_factor**2 * ratio2, df) + chi2_sf_array(df * u_factor**2 * ratio2, df)


def arl_from_sigma_hats(sigma_hat, ok, n: int, alpha: float, phi: float = 1.0) -> ArlEstimate:
    """Mean of the conditional ARLs 1/p over the usable replicates."""
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    ok = np.asarray(ok, dtype=bool)
    lo, hi = limit_factors(n, alpha)
    p = np.zeros_like(sigma_hat)
    p[ok] = signal_probability_array(sigma_hat[ok], lo, hi, n, phi)
    use = ok & (p > 0.0)
    rl = 1.0 / p[use]
    m = rl.size
    arl = float(rl.mean()) if m else math.nan
    se = float(rl.std(ddof=1) / math.sqrt(m)) if m > 1 else math.nan
    return ArlEstimate(arl, se, int(sigma_hat.size - m), int(sigma_hat.size))


def alpha_for_target(sigma_hat, ok, n: int, target_arl0: float = DEFAULT_TARGET_ARL0,
                     bracket: tuple[float, float] = ALPHA_BRACKET, max_iter: int = 200) -> float:
    """Bisection on log(alpha) so that mean(1/p) over fixed replicates hits the target.

    The replicates are held fixed across trials, so the objective is
    deterministic and decreasing in alpha.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=float)[np.asarray(ok, dtype=bool)]
    if sigma_hat.size == 0:
        raise CalibrationError("no usable calibration replicates")

    def arl(alpha):
        lo, hi = limit_factors(n, alpha)
        p = signal_probability_array(sigma_hat, lo, hi, n)
        return float(np.mean(1.0 / p))

    a_lo, a_hi = bracket
    arl_lo, arl_hi = arl(a_lo), arl(a_hi)
    if not arl_hi <= target_arl0 <= arl_lo:
        raise CalibrationError(
            f"target ARL0 {target_arl0} not reachable for alpha in {bracket}: "
            f"achievable range [{arl_hi:.6g}, {arl_lo:.6g}]"
        )
    u_lo, u_hi = math.log(a_lo), math.log(a_hi)
    for _ in range(max_iter):
        mid = 0.5 * (u_lo + u_hi)
        if arl(math.exp(mid)) > target_arl0:
            u_lo = mid
        else:
            u_hi = mid
        if u_hi - u_lo < 1e-13:
            break
    return math.exp(0.5 * (u_lo + u_hi))


def calibrate_alpha(config: ChartConfig, replicates: int = 20_000, seed: int = 0) -> float:
    """Calibrate alpha* on clean Phase I replicates from the calibration substreams."""
    if replicates < 2:
        raise ValueError("need at least 2 calibration replicates")
    data = phase1_replicates(OutlierModel(CLEAN), config.k, config.n, seed, 0, replicates, Role.CALIBRATION)
    sig, ok = sigma_hat_rows(data, config.scale_spec, config.location_spec)
    return alpha_for_target(sig, ok, config.n, config.target_arl0)


def unconditional_arl(config: ChartConfig, alpha_star: float, model: OutlierModel, phi: float = 1.0,
                      replicates: int = 10_000, seed: int = 0) -> ArlEstimate:
    """Average conditional run length over contaminated Phase I replicates."""
    data = phase1_replicates(model, config.k, config.n, model.cell_seed(seed), 0, replicates)
    sig, ok = sigma_hat_rows(data, config.scale_spec, config.location_spec)
    return arl_from_sigma_hats(sig, ok, config.n, alpha_star, phi)


def phase2_statistics(subgroups) -> np.ndarray:
    """Sample standard deviation of every Phase II subgroup (rows)."""
    x = np.asarray(subgroups, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError("Phase II data must be a (rows, n >= 2) array")
    return x.std(axis=1, ddof=1)


def simulate_run_lengths(limits: ControlLimits, count: int, stream: RngStream, sigma_true: float = 1.0,
                         phi: float = 1.0, block: int = 4096) -> np.ndarray:
    """Run lengths (subgroups up to and including each signal) from direct
    Phase II sampling. Subgroups are i.i.d. given the limits, so successive
    gaps between signals are independent run lengths.
    """
    n = limits.n
    gen = stream.generator
    lengths: list[int] = []
    since = 0
    while len(lengths) < count:
        stats = phase2_statistics(gen.standard_normal((block, n)) * (phi * sigma_true))
        idx = np.flatnonzero(limits.signals(stats))
        if idx.size == 0:
            since += block
            continue
        gaps = np.diff(np.concatenate(([-1], idx)))
        gaps[0] += since
        lengths.extend(int(g) for g in gaps)
        since = block - 1 - int(idx[-1])
    return np.array(lengths[:count], dtype=np.int64)
