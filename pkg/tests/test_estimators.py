import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robust_spc import _kernels_py, estimators as est
from robust_spc.estimators import LocationEstimatorSpec, ScaleEstimatorSpec

try:
    from robust_spc import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None

SCALES = ["sd", "mad", "qn", "qn-rc", "mslog"]
LOCATIONS = ["mean", "huber", "hd", "hl"]

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def samples(min_size=2, max_size=12):
    return st.lists(finite, min_size=min_size, max_size=max_size).map(np.array)


def spread(x, min_unique=None):
    # enough distinct values that no scale estimate is degenerate
    u = np.unique(x)
    return u.size >= (min_unique or x.size) and np.ptp(x) > 1e-3


def scale_of(name, x):
    return est.scale_estimate(x, ScaleEstimatorSpec.from_name(name))


def loc_of(name, x):
    return est.locate(x, LocationEstimatorSpec(name))


# -- oracle values ------------------------------------------------------------

def test_known_values():
    assert est.sample_sd([1, 2, 3, 4]) == pytest.approx(math.sqrt(5 / 3), rel=1e-15)
    assert est.mad_raw([1, 2, 3, 4, 100]) == 1.0
    assert est.qn_raw([1, 2, 4]) == 2.0
    assert est.qn_raw([1, 2, 4], est.ORDER_STATISTIC) == 1.0
    assert est.hodges_lehmann([1, 2, 4]) == 2.5
    assert est.median([3, 1, 2, 10]) == 2.5
    assert est.mean([1, 2, 6]) == 3.0


def test_harrell_davis_matches_scipy(rng):
    mstats = pytest.importorskip("scipy.stats.mstats")
    for n in (2, 5, 17, 50):
        x = rng.standard_normal(n)
        assert est.harrell_davis_median(x) == pytest.approx(float(mstats.hdmedian(x)), rel=1e-12, abs=1e-14)


def test_hd_weights():
    for n in (1, 4, 5, 30):
        w = est.hd_weights(n)
        assert w.sum() == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(w, w[::-1], atol=1e-15)
    with pytest.raises(ValueError):
        est.hd_weights(0)


def test_huber_fixed_point(rng):
    x = np.concatenate([rng.standard_normal(40), [8.0, 9.0, 12.0]])
    t = est.huber_m(x)
    s = est.MAD_CONSISTENCY * est.mad_raw(x)
    psi = np.clip((x - t) / s, -1.5, 1.5)
    assert abs(psi.sum()) < 1e-7
    assert t != pytest.approx(est.mean(x), abs=1e-3)


def test_huber_zero_scale_returns_median():
    assert est.huber_m([2.0, 2.0, 2.0, 2.0, 50.0]) == 2.0


def test_mslog_defining_equation(rng):
    x = rng.standard_normal(9)
    s = est.mslog_raw(x, 0.5)
    r = (x - np.median(x)) / s
    assert np.mean(np.tanh(r**2 / 2)) == pytest.approx(0.5, abs=1e-9)


def test_mslog_degenerate_warns():
    with pytest.warns(est.EstimationWarning):
        assert est.mslog_raw([1.0, 1.0, 1.0, 1.0, 3.0]) == 0.0


def test_c4_correction_for_sd():
    # E[S] = c4(n) sigma for normal samples
    n, reps = 5, 200_000
    c4 = math.sqrt(2 / (n - 1)) * math.exp(math.lgamma(n / 2) - math.lgamma((n - 1) / 2))
    f = est.correction_factor("sd", n, reps, seed=3)
    se = math.sqrt(1 - c4**2) / math.sqrt(reps) / c4**2
    assert f == pytest.approx(1 / c4, abs=4 * se)


def test_correction_deterministic_and_validated():
    assert est.correction_factor("mad", 5, 1000, 1) == est.correction_factor("mad", 5, 1000, 1)
    assert est.correction_factor("mad", 5, 1000, 1) != est.correction_factor("mad", 5, 1000, 2)
    with pytest.raises(ValueError):
        est.correction_factor("mad", 5, 99)
    with pytest.raises(ValueError):
        est.correction_factor("mad", 1, 1000)


@pytest.mark.parametrize("bad", [[], [np.nan, 1.0], [1.0, np.inf]])
def test_invalid_samples(bad):
    with pytest.raises(ValueError):
        est.mean(bad)


def test_scale_needs_two_points():
    with pytest.raises(ValueError):
        est.sample_sd([1.0])


def test_spec_validation():
    with pytest.raises(ValueError):
        ScaleEstimatorSpec("iqr")
    with pytest.raises(ValueError):
        ScaleEstimatorSpec("mslog", kappa=1.0)
    with pytest.raises(ValueError):
        LocationEstimatorSpec("trimmed")
    assert ScaleEstimatorSpec.from_name("qn-rc").qn_variant == est.ORDER_STATISTIC
    assert ScaleEstimatorSpec.from_name("qn-rc").name == "qn-rc"


def test_degenerate_rows_flagged():
    vals, flag = est.scale_rows(np.array([[1.0, 1.0, 1.0, 2.0], [0.0, 1.0, 2.0, 3.0]]), ScaleEstimatorSpec("mad"))
    assert vals[0] == 0.0 and flag[0] == est.DEGENERATE and flag[1] == est.OK


# -- brute-force pair enumeration ---------------------------------------------

@settings(max_examples=150, deadline=None)
@given(x=samples(2, 8))
def test_pairwise_estimators_match_enumeration(x):
    pairs = list(itertools.combinations(x.tolist(), 2))
    diffs = sorted(abs(a - b) for a, b in pairs)
    walsh = sorted((a + b) / 2 for a, b in pairs)
    h = x.size // 2 + 1
    kth = h * (h - 1) // 2
    assert est.qn_raw(x) == pytest.approx(float(np.median(diffs)), abs=1e-12)
    assert est.qn_raw(x, est.ORDER_STATISTIC) == pytest.approx(diffs[kth - 1], abs=1e-12)
    assert est.hodges_lehmann(x) == pytest.approx(float(np.median(walsh)), abs=1e-12)


# -- equivariance and invariance ------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(x=samples(3, 10), lam=st.floats(0.01, 100), shift=finite, name=st.sampled_from(SCALES))
def test_scale_equivariance(x, lam, shift, name):
    assume(spread(x))
    base = scale_of(name, x)
    assume(base > 1e-6)
    rel = 1e-7 if name == "mslog" else 1e-9
    assert scale_of(name, lam * x + shift) == pytest.approx(lam * base, rel=rel)
    assert scale_of(name, -x) == pytest.approx(base, rel=rel)


@settings(max_examples=60, deadline=None)
@given(x=samples(3, 10), lam=st.floats(0.01, 100), sign=st.sampled_from([-1, 1]), shift=finite,
       name=st.sampled_from(LOCATIONS))
def test_location_affine_equivariance(x, lam, sign, shift, name):
    assume(spread(x))
    b = sign * lam
    got = loc_of(name, b * x + shift)
    want = b * loc_of(name, x) + shift
    tol = 1e-6 * lam * max(1.0, np.ptp(x)) if name == "huber" else 1e-9 * (abs(shift) + lam * np.abs(x).max() + 1)
    assert got == pytest.approx(want, abs=tol)


@settings(max_examples=60, deadline=None)
@given(x=samples(2, 10), data=st.data())
def test_permutation_invariance(x, data):
    perm = np.array(data.draw(st.permutations(range(x.size))))
    y = x[perm]
    for name in SCALES:
        if not spread(x, 2):
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", est.EstimationWarning)
            a, b = scale_of(name, x), scale_of(name, y)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
    for name in LOCATIONS:
        assert loc_of(name, x) == pytest.approx(loc_of(name, y), rel=1e-9, abs=1e-9)


# -- breakdown probes -------------------------------------------------------------

N_PROBE = 20


def _contaminate(rng, fraction, value):
    x = rng.standard_normal(N_PROBE)
    m = int(round(fraction * N_PROBE))
    x[:m] = value
    return x


def _bounded_scale(name, fraction, rng):
    for value in (1e3, 1e6, 1e9):
        x = _contaminate(rng, fraction, value)
        if not scale_of(name, x) <= 10 * scale_of(name, x[int(round(fraction * N_PROBE)):]):
            return False
    return True


def _bounded_location(name, fraction, rng):
    for value in (1e3, 1e6, 1e9):
        x = _contaminate(rng, fraction, value)
        clean = x[int(round(fraction * N_PROBE)):]
        if not abs(loc_of(name, x) - loc_of(name, clean)) <= 10 * clean.std(ddof=1):
            return False
    return True


@pytest.mark.parametrize("name", ["mad", "qn-rc", "mslog"])
def test_robust_scales_bounded_at_45_percent(name, rng):
    assert _bounded_scale(name, 0.45, rng)


def test_median_of_pairs_qn_bounded_at_25_percent(rng):
    assert _bounded_scale("qn", 0.25, rng)
    assert not _bounded_scale("qn", 0.45, rng)


def test_sd_unbounded_at_one_point(rng):
    assert not _bounded_scale("sd", 1 / N_PROBE, rng)


def test_huber_bounded_at_45_percent(rng):
    assert _bounded_location("huber", 0.45, rng)


def test_mean_unbounded_at_one_point(rng):
    assert not _bounded_location("mean", 1 / N_PROBE, rng)


def test_hodges_lehmann_breakdown(rng):
    assert _bounded_location("hl", 0.25, rng)
    assert not _bounded_location("hl", 0.45, rng)


# -- compiled vs numpy backend ------------------------------------------------------

row_arrays = st.integers(2, 12).flatmap(
    lambda n: arrays(np.float64, st.tuples(st.integers(1, 6), st.just(n)), elements=st.floats(-50, 50))
)


@pytest.mark.skipif(_kernels_cy is None, reason="compiled backend not built")
@settings(max_examples=100, deadline=None)
@given(x=row_arrays)
def test_backends_agree(x):
    cy, py = _kernels_cy, _kernels_py
    for fn in ("median_rows", "mean_rows", "sd_rows", "mad_rows", "hl_rows"):
        np.testing.assert_allclose(getattr(cy, fn)(x), getattr(py, fn)(x), rtol=1e-12, atol=1e-12)
    for order_stat in (False, True):
        np.testing.assert_allclose(cy.qn_rows(x, order_stat), py.qn_rows(x, order_stat), rtol=1e-12, atol=1e-12)
    w = est.hd_weights(x.shape[1])
    np.testing.assert_allclose(cy.hd_rows(x, w), py.hd_rows(x, w), rtol=1e-12, atol=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s_cy, f_cy = cy.mslog_rows(x, 0.5)
        s_py, f_py = py.mslog_rows(x, 0.5)
        t_cy, g_cy = cy.huber_rows(x, 1.5, 1e-9, 500, est.MAD_CONSISTENCY)
        t_py, g_py = py.huber_rows(x, 1.5, 1e-9, 500, est.MAD_CONSISTENCY)
    np.testing.assert_array_equal(f_cy, f_py)
    # both must solve the defining equation; sigma itself is compared only
    # where the root is well conditioned
    ok = f_cy == 0
    for s in (s_cy, s_py):
        r2 = ((x[ok] - np.median(x[ok], axis=1)[:, None]) / s[ok, None]) ** 2
        np.testing.assert_allclose(np.tanh(r2 / 2).mean(axis=1), 0.5, atol=1e-9)
    r2 = ((x[ok] - np.median(x[ok], axis=1)[:, None]) / s_py[ok, None]) ** 2
    th = np.tanh(r2 / 2)
    slope = ((1 - th**2) * r2).mean(axis=1)
    well = slope > 1e-3
    np.testing.assert_allclose(s_cy[ok][well], s_py[ok][well], rtol=1e-8)
    np.testing.assert_array_equal(g_cy, g_py)
    np.testing.assert_allclose(t_cy, t_py, rtol=1e-8, atol=1e-8)


def test_backend_selected():
    from robust_spc import BACKEND

    assert BACKEND in ("cython", "python")
