import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spectral_metrics import distances as di
from spectral_metrics import geodesics, prediction
from spectral_metrics.core import SpectrumGrid
from spectral_metrics.distances import Measure
from spectral_metrics.errors import BadOrder, LengthMismatch

from conftest import ma1, ones, paper

pairs = st.integers(16, 48).flatmap(
    lambda n: st.tuples(
        arrays(float, n, elements=st.floats(1e-2, 1e2)),
        arrays(float, n, elements=st.floats(1e-2, 1e2)),
    )
)

ALL = [("ag", None, None), ("sym", None, None), ("kl", None, None), ("smooth", None, None), ("rs", -2.0, 0.5)]


def test_delta_ag_examples():
    f = paper("paper_f1", 1024)
    assert di.delta_ag(f, f) == 0.0
    assert di.delta_ag(f, SpectrumGrid(7.3 * f.values)) == 0.0
    assert di.delta_ag(ones(8192), ma1(8192)) == pytest.approx(math.log(4 / 3), abs=1e-12)


def test_delta_ag_value_type():
    d = di.delta_ag(ones(64), ma1(64))
    assert isinstance(d, float)
    assert d.kind is Measure.AG
    assert di.rho_ag(ones(64), ma1(64)) == pytest.approx(math.exp(d), rel=1e-14)


def test_delta_sym_examples(paper_spectra):
    f1, f2 = paper_spectra["paper_f1"], paper_spectra["paper_f2"]
    assert di.delta_sym(f1, f1) == 0.0
    assert di.delta_sym(ones(8192), ma1(8192)) == pytest.approx(math.log(5 / 3), abs=1e-12)
    assert di.delta_sym(f1, f2) == pytest.approx(di.delta_sym(f2, f1), abs=1e-13)
    assert di.delta_sym(f1, f2) == pytest.approx(di.delta_ag(f1, f2) + di.delta_ag(f2, f1), abs=1e-12)


def test_delta_kl_examples():
    f = paper("paper_f2", 1024)
    assert di.delta_kl(f, SpectrumGrid(0.01 * f.values)) == 0.0
    assert di.delta_kl(ones(8192), ma1(8192)) == pytest.approx(math.log(1.25), abs=1e-12)
    n = 1 << 20
    a, b = paper("paper_f1", n).values, paper("paper_f2", n).values
    a, b = a / np.mean(a), b / np.mean(b)
    oracle = np.mean(a * np.log(a / b))
    assert di.delta_kl(paper("paper_f1", 4096), paper("paper_f2", 4096)) == pytest.approx(oracle, rel=1e-8)


def test_rho_smooth_examples(paper_spectra):
    f = paper_spectra["paper_f3"]
    assert di.rho_smooth(f, f) == pytest.approx(1.0, abs=1e-14)
    assert di.rho_smooth(ones(8192), ma1(8192)) == pytest.approx(5 / 3, rel=1e-12)
    f1, f2 = paper_spectra["paper_f1"], paper_spectra["paper_f2"]
    rho = di.rho_smooth(f1, f2)
    assert rho >= 1
    oracle = prediction.mismatched_smoothing_variance(f1, f2) / prediction.smoothing_variance(f1)
    assert rho == pytest.approx(oracle, rel=1e-8)


def test_delta_smooth_examples(paper_spectra):
    f1, f2 = paper_spectra["paper_f1"], paper_spectra["paper_f2"]
    assert di.delta_smooth(f1, f1) == 0.0
    assert di.delta_smooth(ones(8192), ma1(8192)) == pytest.approx(math.log(5 / 3), abs=1e-12)
    scaled = di.delta_smooth(SpectrumGrid(3 * f1.values), SpectrumGrid(5 * f2.values))
    assert scaled == pytest.approx(di.delta_smooth(f1, f2), abs=1e-12)


def test_delta_rs_examples(paper_spectra):
    f = paper_spectra["paper_f2"]
    for r, s in [(-math.inf, math.inf), (-1, 2), (0, 0.5)]:
        assert di.delta_rs(f, f, r, s) == 0.0
    assert di.delta_rs(ones(8192), ma1(8192), 0, 1) == pytest.approx(math.log(4 / 3), abs=1e-12)
    assert di.delta_rs(ones(8192), ma1(8192), -1, 1) == pytest.approx(math.log(5 / 3), abs=1e-12)
    f1, f2 = paper_spectra["paper_f1"], paper_spectra["paper_f3"]
    assert di.delta_rs(f1, f2, 0, 1) == pytest.approx(di.delta_ag(f1, f2), abs=1e-12)
    assert di.delta_rs(f1, f2, -1, 1) == pytest.approx(di.delta_sym(f1, f2), abs=1e-12)
    assert di.delta_rs(f1, f2, -2, 3).orders == (-2.0, 3.0)


def test_delta_rs_bad_order():
    with pytest.raises(BadOrder):
        di.delta_rs(ones(16), ma1(16), 1, 0)
    with pytest.raises(BadOrder):
        di.delta_rs(ones(16), ma1(16), 0.5, 0.5)


def test_overflow_gives_infinity():
    f = SpectrumGrid(np.r_[np.full(15, 1e-200), 1e200])
    g = ones(16)
    assert di.delta_rs(f, g, 1, 2) == math.inf
    assert di.delta_rs(f, g, 1, 2).kind is Measure.RS


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        di.delta_ag(ones(16), ones(32))


def test_distance_by_name():
    a, b = ones(64), ma1(64)
    assert di.distance("sym", a, b) == di.delta_sym(a, b)
    assert di.distance("rs", a, b, 0, 1) == di.delta_rs(a, b, 0, 1)
    with pytest.raises(ValueError):
        di.distance("l2", a, b)


@settings(max_examples=80, deadline=None)
@given(pairs)
def test_nonnegative(pair):
    a, b = SpectrumGrid(pair[0]), SpectrumGrid(pair[1])
    for name, r, s in ALL:
        assert di.distance(name, a, b, r, s) >= 0.0


@settings(max_examples=80, deadline=None)
@given(pairs, st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_scale_invariance_and_rays(pair, c1, c2):
    a, b = SpectrumGrid(pair[0]), SpectrumGrid(pair[1])
    for name, r, s in ALL:
        d = di.distance(name, a, b, r, s)
        scaled = di.distance(name, SpectrumGrid(c1 * a.values), SpectrumGrid(c2 * b.values), r, s)
        assert scaled == pytest.approx(d, rel=1e-11, abs=1e-12)
        assert di.distance(name, a, SpectrumGrid(c1 * a.values), r, s) <= 1e-10


def test_monotone_and_convex_along_log_intervals(paper_spectra):
    f1, f2, f3 = (paper_spectra[k] for k in ("paper_f1", "paper_f2", "paper_f3"))
    taus = np.linspace(0, 1, 101)
    for fb in (f2, f3):
        d = [di.delta_ag(f1, geodesics.log_interval(f1, fb, t)) for t in taus]
        assert np.min(np.diff(d)) >= -1e-10
    d = [di.delta_ag(f1, geodesics.log_interval(f2, f3, t)) for t in taus]
    assert np.min(np.diff(d, 2)) >= -1e-8
