import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from taperfda.errors import DimensionMismatch, InvalidParameter, NoBracket, NotSPD
from taperfda.numerics import (
    RandomStream,
    bisect,
    chisq_isf,
    chisq_sf,
    derive_seed,
    gaussian_block,
    gaussian_vector,
    std_normal,
    sym_inv_sqrt,
)


def _spd(seed, k):
    a = np.random.default_rng(seed).normal(size=(k, k))
    return a @ a.T + k * np.eye(k)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 8))
def test_inv_sqrt_product_is_inverse(seed, k):
    a = _spd(seed, k)
    h = sym_inv_sqrt(a)
    np.testing.assert_allclose(h, h.T, atol=1e-12)
    np.testing.assert_allclose(h @ a @ h, np.eye(k), atol=1e-10)


def test_inv_sqrt_diagonal():
    np.testing.assert_allclose(sym_inv_sqrt(np.diag([4.0, 9.0])), np.diag([0.5, 1 / 3]))


def test_inv_sqrt_errors():
    with pytest.raises(DimensionMismatch):
        sym_inv_sqrt(np.ones((2, 3)))
    with pytest.raises(NotSPD):
        sym_inv_sqrt(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotSPD):
        sym_inv_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))


@pytest.mark.parametrize("x", [-3.0, -0.5, 0.0, 1.2, 6.0])
def test_std_normal(x):
    pdf, cdf = std_normal(x)
    assert pdf == pytest.approx(stats.norm.pdf(x), rel=1e-14)
    assert cdf == pytest.approx(stats.norm.cdf(x), rel=1e-13)


@pytest.mark.parametrize("df,nc,x", [(1, 0, 3.84), (127, 0, 154.3), (5, 2.5, 9.0), (127, 23.3, 154.3),
                                     (3, 40.0, 30.0), (10, 0.1, 0.5)])
def test_chisq_sf_against_integrated_density(df, nc, x):
    pdf = (lambda t: stats.chi2.pdf(t, df)) if nc == 0 else (lambda t: stats.ncx2.pdf(t, df, nc))
    lower, _ = integrate.quad(pdf, 0, x, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(chisq_sf(df, nc, x) - (1 - lower)) <= 1e-8


def test_chisq_quantile_known_value():
    # derived: inverse of the regularized gamma tail at 0.05, 127 df
    assert chisq_isf(127, 0, 0.05) == pytest.approx(stats.chi2.isf(0.05, 127), abs=1e-7)
    assert chisq_isf(127, 0, 0.05) == pytest.approx(154.3015, abs=1e-4)


def test_chisq_isf_round_trip():
    for df, nc, q in [(4, 0, 0.3), (20, 7.5, 0.01), (1, 0.2, 0.9)]:
        assert chisq_sf(df, nc, chisq_isf(df, nc, q)) == pytest.approx(q, abs=1e-9)


def test_chisq_parameter_errors():
    with pytest.raises(InvalidParameter):
        chisq_sf(0, 0, 1)
    with pytest.raises(InvalidParameter):
        chisq_sf(3, -1, 1)
    with pytest.raises(InvalidParameter):
        chisq_isf(3, 0, 1.0)


def test_bisect_and_no_bracket():
    assert bisect(lambda v: v * v - 2, 0, 2, 1e-14) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(NoBracket):
        bisect(lambda v: v * v + 1, -1, 1, 1e-10)


def test_random_stream_reproducible_and_distinct():
    a = RandomStream(42, 3)
    np.testing.assert_array_equal(gaussian_vector(a, 10), gaussian_vector(RandomStream(42, 3), 10))
    assert not np.array_equal(a.normals(10), RandomStream(42, 4).normals(10))
    assert not np.array_equal(a.normals(10), RandomStream(43, 3).normals(10))
    np.testing.assert_array_equal(gaussian_block(42, 3, 1, 10)[0], a.normals(10))
    with pytest.raises(InvalidParameter):
        RandomStream(-1)
    with pytest.raises(InvalidParameter):
        gaussian_vector(a, 0)


def test_derive_seed_labels():
    assert derive_seed(1, 2) == derive_seed(1, 2)
    assert len({derive_seed(1, 2), derive_seed(1, 3), derive_seed(2, 2), derive_seed(1, 2, 0)}) == 4
    assert 0 <= derive_seed(7, 1) < 2**64
