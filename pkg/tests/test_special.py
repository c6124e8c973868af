from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp
from scipy import stats

from sdsc_nis.special import chi2_cdf, chi2_sf, gammainc_lower, gammainc_upper, norm_cdf, norm_sf


@settings(max_examples=300, deadline=None)
@given(st.floats(0.05, 200), st.floats(0, 400))
def test_incomplete_gamma_matches_scipy(a, x):
    assert gammainc_lower(a, x) == pytest.approx(sp.gammainc(a, x), abs=1e-13)
    assert gammainc_upper(a, x) == pytest.approx(sp.gammaincc(a, x), abs=1e-13)


@settings(max_examples=300, deadline=None)
@given(st.floats(-38, 38))
def test_normal_matches_scipy(z):
    assert norm_cdf(z) == pytest.approx(stats.norm.cdf(z), abs=1e-15, rel=1e-12)
    assert norm_sf(z) == pytest.approx(stats.norm.sf(z), abs=1e-15, rel=1e-12)


@pytest.mark.parametrize("df", [1, 2, 3, 5, 14, 30])
def test_chi2_matches_scipy(df):
    for x in np.linspace(0, 80, 161):
        assert chi2_cdf(x, df) == pytest.approx(stats.chi2.cdf(x, df), abs=1e-13)
        assert chi2_sf(x, df) == pytest.approx(stats.chi2.sf(x, df), abs=1e-13, rel=1e-10)


def test_known_values():
    assert norm_cdf(0) == 0.5
    assert norm_sf(1.959963984540054) == pytest.approx(0.025, rel=1e-12)
    assert chi2_sf(0.0, 3) == 1.0
    # chi-square with 2 df is exponential with mean 2
    assert chi2_sf(5.0, 2) == pytest.approx(math.exp(-2.5), rel=1e-14)


def test_domain_errors():
    with pytest.raises(ValueError):
        gammainc_lower(0.0, 1.0)
    with pytest.raises(ValueError):
        gammainc_lower(1.0, -1.0)
