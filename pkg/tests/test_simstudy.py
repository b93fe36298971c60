import math

import numpy as np
import pytest
from scipy import stats

from taperfda import simstudy as ss
from taperfda.errors import IndexOutOfRange, InvalidB, InvalidParameter
from taperfda.numerics import chisq_sf

LAM = ss.calibrate_lambda(127, 64)


def test_spiked_theta():
    np.testing.assert_array_equal(ss.spiked_theta(1, 4.0, 3), [2.0, 0.0, 0.0])
    np.testing.assert_array_equal(ss.spiked_theta(3, 0.0, 3), [0.0, 0.0, 0.0])
    for j0, lam in [(5, 0.3), (127, 2.2)]:
        assert (ss.spiked_theta(j0, lam, 127) ** 2).sum() == pytest.approx(lam, abs=1e-12)
    with pytest.raises(IndexOutOfRange):
        ss.spiked_theta(4, 1.0, 3)


def test_smooth_theta():
    np.testing.assert_allclose(ss.smooth_theta(0.8, 0.5, 127), math.sqrt(0.5 / 127), rtol=1e-12)
    assert ss.smooth_exponent(0.5) == pytest.approx(0.66096, abs=1e-5)
    for b in (0.01, 0.2, 0.5, 0.8):
        assert (ss.smooth_theta(b, 0.37, 127) ** 2).sum() == pytest.approx(0.37, abs=1e-10)
    cum = np.cumsum(ss.smooth_theta(0.2, 1.0, 127) ** 2)
    J = int(np.argmax(cum >= 0.8)) + 1
    assert 0.15 <= J / 127 <= 0.25
    for b in (0.0, 1.0, -0.1):
        with pytest.raises(InvalidB):
            ss.smooth_theta(b, 1.0, 10)


def test_calibrate_lambda_against_scipy_ncx2():
    q = stats.chi2.isf(0.05, 127)
    assert abs(stats.ncx2.sf(q, 127, 64 * LAM) - 0.4) <= 1e-4
    # frozen from the root-find above; the noncentrality is n * lambda
    assert 64 * LAM == pytest.approx(23.3008, abs=1e-3)
    assert ss.calibrate_lambda(127, 64, target_power=0.05) == 0.0
    lam = ss.calibrate_lambda(20, 10, nu=2, alpha=0.1, target_power=0.7)
    assert chisq_sf(40, 10 * lam, stats.chi2.isf(0.1, 40)) == pytest.approx(0.7, abs=1e-4)
    with pytest.raises(InvalidParameter):
        ss.calibrate_lambda(10, 10, target_power=1.0)


def test_grids():
    assert ss.spiked_grid(127) == [1, 8, 14, 21, 28, 34, 41, 47, 54, 61, 67, 74, 81, 87, 94, 100, 107, 114, 120, 127]
    b = ss.smooth_grid()
    assert len(b) == 20 and b[0] == 0.01 and b[-1] == 0.8


def test_sobolev_fit_spiked():
    assert round(ss.sobolev_fit_spiked(127, LAM, 127).s, 4) == 0.5008
    top = ss.sobolev_fit_spiked(1, LAM, 127)
    assert round(top.s, 4) == 1.1667
    assert top == ss.sobolev_fit_spiked(8, LAM, 127)
    for j0 in (2, 14, 60, 127):
        f = ss.sobolev_fit_spiked(j0, LAM, 127)
        assert j0 ** (2 * f.s) * LAM == pytest.approx(f.M, rel=1e-9)
    with pytest.raises(IndexOutOfRange):
        ss.sobolev_fit_spiked(0, LAM, 127)


def test_sobolev_fit_smooth():
    lo = ss.sobolev_fit_smooth(0.80, LAM, 127)
    hi = ss.sobolev_fit_smooth(0.01, LAM, 127)
    assert round(lo.s, 3) == 0.502 and round(hi.s, 3) == 2.468
    for b in (0.01, 0.3, 0.8):
        f = ss.sobolev_fit_smooth(b, LAM, 127)
        assert abs(ss.sobolev_norm(ss.smooth_theta(b, LAM, 127), f.s) - f.M) / f.M <= 1e-6
    with pytest.raises(InvalidB):
        ss.sobolev_fit_smooth(0.85, LAM, 127)


def test_alternatives_s_ranges():
    spiked, smooth = ss.build_alternatives(127, LAM)
    assert len(spiked) == len(smooth) == 20
    s_sp = [a.fit.s for a in spiked]
    assert min(s_sp) == pytest.approx(0.5008095, abs=1e-6) and max(s_sp) == pytest.approx(7 / 6)
    s_sm = [a.fit.s for a in smooth]
    assert np.all(np.diff(s_sm) < 0)


def test_run_figure4_small_shape_and_determinism():
    cfg = ss.Figure4Config(p=31, n=16, null_iterations=2000, power_iterations=1000, n_spiked=4, n_smooth=3)
    a = ss.run_figure4(cfg, seed=5)
    assert len(a.rows) == (4 + 3) * len(ss.STATISTICS)
    assert a.rows == ss.run_figure4(cfg, seed=5).rows
    assert {r["statistic"] for r in a.rows} == set(ss.STATISTICS)
    assert all(0 <= r["power"] <= 1 for r in a.rows)
    threaded = ss.run_figure4(ss.Figure4Config(**{**cfg.__dict__, "n_jobs": 2}), seed=5)
    assert threaded.rows == a.rows


def test_full_scale_config():
    cfg = ss.Figure4Config.full_scale()
    assert cfg.null_iterations == cfg.power_iterations == 250_000
