import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robust_spc.rng import Role, RngStream, derive_seed, sample_chisquare, sample_normal, substream


def test_same_address_same_draws():
    a = substream(7, 3, Role.PHASE1_DATA).normal(size=20)
    b = substream(7, 3, Role.PHASE1_DATA).normal(size=20)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("other", [(8, 3, 0), (7, 4, 0), (7, 3, 2)])
def test_distinct_addresses_differ(other):
    a = substream(7, 3, 0).normal(size=20)
    b = substream(*other).normal(size=20)
    assert not np.array_equal(a, b)


def test_draw_order_independent_of_other_replicates():
    # drawing replicate 5 first must not change replicate 2
    first = substream(1, 2, 0).normal(size=8)
    substream(1, 5, 0).normal(size=1000)
    np.testing.assert_array_equal(first, substream(1, 2, 0).normal(size=8))


def test_huge_replicate_ids():
    a = substream(1, 2**70, 0).uniform(size=4)
    b = substream(1, 2**70 + 1, 0).uniform(size=4)
    assert not np.array_equal(a, b)


def test_with_role():
    s = RngStream(9, 4, Role.PHASE1_DATA).with_role(Role.MODEL3_SELECTION)
    assert (s.root_seed, s.replicate_id, s.role_tag) == (9, 4, Role.MODEL3_SELECTION)


def test_sigma_zero_and_negative():
    s = substream(0, 0, 0)
    np.testing.assert_array_equal(sample_normal(s, 2.5, 0.0, size=3), [2.5, 2.5, 2.5])
    with pytest.raises(ValueError):
        sample_normal(s, 0.0, -1.0)
    with pytest.raises(ValueError):
        RngStream(0, -1)


def test_chisquare_validation_and_scalar():
    s = substream(0, 0, 0)
    assert isinstance(sample_chisquare(s, 3), float)
    for bad in (0, 2.5, -1):
        with pytest.raises(ValueError):
            sample_chisquare(s, bad)


def test_normal_moments():
    x = substream(11, 0, 0).normal(1.0, 2.0, size=200_000)
    assert x.mean() == pytest.approx(1.0, abs=4 * 2 / np.sqrt(2e5))
    assert x.std() == pytest.approx(2.0, rel=0.01)


@pytest.mark.parametrize("df", [1, 2, 4])
def test_chisquare_moments(df):
    x = sample_chisquare(substream(12, df, 0), df, size=200_000)
    se = np.sqrt(2 * df / 2e5)
    assert x.mean() == pytest.approx(df, abs=4 * se)
    assert x.var() == pytest.approx(2 * df, rel=0.05)


def test_derive_seed():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    assert 0 <= derive_seed(-1, 5) < 2**64


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**63), rep=st.integers(0, 10**9))
def test_streams_reproducible(seed, rep):
    a = substream(seed, rep, Role.CALIBRATION).uniform(size=3)
    b = substream(seed, rep, Role.CALIBRATION).uniform(size=3)
    np.testing.assert_array_equal(a, b)
    assert np.all((a >= 0) & (a < 1))
