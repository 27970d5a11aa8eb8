"""Special functions used by the estimators and the chart.

Scalar routines follow the classic continued-fraction / series recipes.
``chi2_cdf_array`` and ``chi2_sf_array`` are vectorised closed forms for
integer degrees of freedom, used on the hot path of ARL evaluation.
"""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np

__all__ = [
    "reg_inc_beta",
    "reg_inc_gamma",
    "reg_inc_gamma_upper",
    "chi2_cdf",
    "chi2_sf",
    "chi2_quantile",
    "chi2_cdf_array",
    "chi2_sf_array",
    "normal_cdf",
    "normal_quantile",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_CF_ITER = 10_000
_STD_NORMAL = NormalDist()


def _betacf(x: float, a: float, b: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})")


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Raises
    ------
    ValueError
        If ``x`` is outside [0, 1] or ``a``/``b`` are not positive.
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(x, a, b) / a
    return 1.0 - front * _betacf(1.0 - x, b, a) / b


def _gamma_series(s: float, x: float) -> float:
    total = term = 1.0 / s
    ap = s
    for _ in range(_MAX_CF_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + s * math.log(x) - math.lgamma(s))
    raise ArithmeticError(f"incomplete gamma series did not converge (s={s}, x={x})")


def _gamma_cf(s: float, x: float) -> float:
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_CF_ITER + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(-x + s * math.log(x) - math.lgamma(s))
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (s={s}, x={x})")


def _check_gamma_args(s: float, x: float) -> None:
    if not s > 0.0:
        raise ValueError(f"shape must be positive, got {s}")
    if not x >= 0.0:
        raise ValueError(f"x must be nonnegative, got {x}")


def reg_inc_gamma(s: float, x: float) -> float:
    """Regularized lower incomplete gamma P(s, x)."""
    _check_gamma_args(s, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < s + 1.0:
        return _gamma_series(s, x)
    return 1.0 - _gamma_cf(s, x)


def reg_inc_gamma_upper(s: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x)."""
    _check_gamma_args(s, x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return 1.0 - _gamma_series(s, x)
    return _gamma_cf(s, x)


def _check_df(df: int) -> None:
    if int(df) != df or df <= 0:
        raise ValueError(f"degrees of freedom must be a positive integer, got {df}")


def chi2_cdf(x: float, df: int) -> float:
    """Chi-square CDF with ``df`` degrees of freedom."""
    _check_df(df)
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return reg_inc_gamma(df / 2.0, x / 2.0)


def chi2_sf(x: float, df: int) -> float:
    """Chi-square survival function, accurate in the upper tail."""
    _check_df(df)
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return reg_inc_gamma_upper(df / 2.0, x / 2.0)


def chi2_quantile(p: float, df: int, max_iter: int = 200) -> float:
    """Inverse of :func:`chi2_cdf` by a safeguarded Newton/bisection hybrid.

    Upper-half probabilities are solved against the survival function so
    that tail quantiles keep full relative precision.
    """
    _check_df(df)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    s = df / 2.0
    upper = p > 0.5
    target = 1.0 - p if upper else p

    def resid(x: float) -> float:
        # signed so that resid is increasing in x
        if upper:
            return target - chi2_sf(x, df)
        return chi2_cdf(x, df) - target

    def density(x: float) -> float:
        if x <= 0.0:
            return 0.0
        return math.exp((s - 1.0) * math.log(x) - x / 2.0 - s * math.log(2.0) - math.lgamma(s))

    lo, hi = 0.0, float(max(df, 1))
    while resid(hi) < 0.0:
        lo, hi = hi, hi * 2.0
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f = resid(x)
        if f == 0.0:
            return x
        if f < 0.0:
            lo = x
        else:
            hi = x
        dens = density(x)
        x_new = x - f / dens if dens > 0.0 else 0.5 * (lo + hi)
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * x_new or hi - lo <= 1e-15 * hi:
            return x_new
        x = x_new
    return x


def normal_cdf(z: float) -> float:
    """Standard normal CDF."""
    return _STD_NORMAL.cdf(z)


def normal_quantile(p: float) -> float:
    """Standard normal quantile function."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return _STD_NORMAL.inv_cdf(p)


_erfc_vec = np.vectorize(math.erfc, otypes=[float])


def _chi2_lower_series(y: np.ndarray, s: float) -> np.ndarray:
    # P(s, y) by its power series; only called where y < s + 1
    term = np.full_like(y, 1.0 / s)
    total = term.copy()
    ap = s
    for _ in range(500):
        ap += 1.0
        term = term * y / ap
        total += term
        if np.all(term <= total * _EPS):
            break
    with np.errstate(divide="ignore"):
        log_front = -y + s * np.log(y) - math.lgamma(s)
    return np.where(y > 0.0, total * np.exp(log_front), 0.0)


def _chi2_upper_closed(y: np.ndarray, df: int) -> np.ndarray:
    # Q(df/2, y) for integer df by the finite Poisson-type sums
    m = df // 2
    out = np.zeros_like(y)
    if df % 2 == 0:
        term = np.exp(-y)
        for j in range(m):
            out += term
            term = term * y / (j + 1)
        return out
    root = np.sqrt(y)
    out = _erfc_vec(root) if y.size else np.zeros_like(y)
    term = np.exp(-y) * root / math.gamma(1.5)
    for j in range(m):
        out = out + term
        term = term * y / (j + 1.5)
    return out


def _chi2_split(x, df):
    _check_df(df)
    y = np.asarray(x, dtype=float) / 2.0
    if np.any(y < 0.0):
        raise ValueError("x must be nonnegative")
    s = df / 2.0
    small = y < s + 1.0
    lower = np.empty_like(y)
    upper = np.empty_like(y)
    if np.any(small):
        p = _chi2_lower_series(y[small], s)
        lower[small] = p
        upper[small] = 1.0 - p
    big = ~small
    if np.any(big):
        finite = np.isfinite(y[big])
        q = np.zeros(int(big.sum()))
        q[finite] = _chi2_upper_closed(y[big][finite], df)
        upper[big] = q
        lower[big] = 1.0 - q
    return lower, upper


def chi2_cdf_array(x, df: int) -> np.ndarray:
    """Vectorised chi-square CDF for integer ``df``."""
    return _chi2_split(x, df)[0]


def chi2_sf_array(x, df: int) -> np.ndarray:
    """Vectorised chi-square survival function for integer ``df``."""
    return _chi2_split(x, df)[1]
