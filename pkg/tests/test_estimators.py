import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fr3chan.errors import DegenerateFit, DegenerateInput, DomainError
from fr3chan.estimators import (angular_spread, coherence_bw, corr_matrix, fit_lognormal,
                                fit_path_loss, mean_delay, pearson_corr, probability_plot,
                                rms_delay_spread, threshold_taps)
from fr3chan.padp import Padp, Tap

NS = 1e-9


def taps(*pairs):
    return [Tap(d, p) for d, p in pairs]


def test_threshold_examples():
    kept = threshold_taps(taps((0, 1.0), (1e-9, 0.1), (2e-9, 1e-5)), 30)
    assert [t.power_lin for t in kept] == [1.0, 0.1]
    flat = taps((0, 2.0), (1e-9, 2.0))
    assert threshold_taps(flat) == flat
    assert threshold_taps(taps((0, 1.0))) == taps((0, 1.0))


def test_threshold_profile_type():
    p = Padp.from_taps(taps((0, 1.0), (1e-9, 1e-4)))
    out = threshold_taps(p, 30)
    assert isinstance(out, Padp) and len(out) == 1


def test_mean_delay_examples():
    assert mean_delay(taps((0, 1))) == 0
    assert mean_delay(taps((0, 1), (100 * NS, 1))) == pytest.approx(50 * NS, rel=1e-15)
    assert mean_delay(taps((0, 1), (100 * NS, 3))) == pytest.approx(75 * NS, rel=1e-15)


def test_rms_examples():
    assert rms_delay_spread(taps((5 * NS, 1))) == 0
    assert rms_delay_spread(taps((0, 1), (40 * NS, 1))) == pytest.approx(20 * NS, rel=1e-12)


def test_coherence_bw_examples():
    assert coherence_bw(10 ** -7.61, 0.5) / 1e6 == pytest.approx(8.15, abs=0.005)
    assert coherence_bw(10 ** -7.94, 0.9) / 1e6 == pytest.approx(1.74, abs=0.005)
    assert coherence_bw(3e-8, 0.5) == pytest.approx(10 * coherence_bw(3e-8, 0.9), rel=1e-15)
    with pytest.raises(DomainError):
        coherence_bw(1e-8, 0.7)


def test_angular_spread_examples():
    assert angular_spread([123.0], [1.0]) == 0.0
    assert angular_spread([60.0, -60.0], [1, 1]) == pytest.approx(67.46, abs=0.005)
    a, p = [10.0, 50.0, -30.0], [1.0, 0.3, 0.6]
    assert angular_spread([x + 37 for x in a], p) == pytest.approx(angular_spread(a, p), abs=1e-9)


def test_fit_path_loss_noiseless_uma():
    d = np.linspace(50, 500, 40)
    pl = 103.0 + 68.0 * np.log10(d / 100)
    pl0, ple, sigma = fit_path_loss(np.column_stack([d, pl]))
    assert abs(pl0 - 103.0) < 1e-9 and abs(ple - 6.8) < 1e-12 and sigma < 1e-9


def test_fit_path_loss_two_points():
    pl0, ple, _ = fit_path_loss([(100, 90.0), (1000, 90.0 + 10 * 3.1)])
    assert pl0 == pytest.approx(90.0, abs=1e-12) and ple == pytest.approx(3.1, abs=1e-12)


def test_fit_path_loss_sigma_monte_carlo():
    rng = np.random.default_rng(5)
    d = 10 ** rng.uniform(1.7, 3, 5000)
    pl = 100 + 35 * np.log10(d / 100) + rng.normal(0, 6.6, d.size)
    assert fit_path_loss(np.column_stack([d, pl]))[2] == pytest.approx(6.6, abs=0.2)


def test_fit_path_loss_degenerate():
    with pytest.raises(DegenerateFit):
        fit_path_loss([(100, 90.0)])
    with pytest.raises(DegenerateFit):
        fit_path_loss([(100, 90.0), (100, 91.0)])


def test_fit_lognormal_examples():
    s = fit_lognormal([10 ** -7.5] * 4)
    assert s.mu_log10 == pytest.approx(-7.5, abs=1e-12) and s.sigma_log10 == pytest.approx(0, abs=1e-12)
    s = fit_lognormal([1e-8, 1e-7])
    assert s.mu_log10 == pytest.approx(-7.5) and s.sigma_log10 == pytest.approx(math.sqrt(0.5))
    rng = np.random.default_rng(1)
    s = fit_lognormal(10 ** rng.normal(-7.46, 0.73, 100_000))
    assert abs(s.mu_log10 + 7.46) < 0.01 and abs(s.sigma_log10 - 0.73) < 0.01


def test_probability_plot_examples():
    pairs = probability_plot([1.0, 0.0, -1.0])
    assert pairs[0][0] == pytest.approx(-pairs[2][0]) and pairs[1][0] == pytest.approx(0.0)
    assert [v for _, v in pairs] == [-1.0, 0.0, 1.0]
    q, v = np.array(probability_plot(np.random.default_rng(2).standard_normal(10_000))).T
    assert np.polyfit(q, v, 1)[0] == pytest.approx(1.0, abs=0.03)
    assert {v for _, v in probability_plot([4.0] * 5)} == {4.0}


def test_pearson_examples():
    x = np.arange(20.0)
    assert pearson_corr(x, 2 * x + 3) == 1.0
    assert pearson_corr(x, -x) == -1.0
    rng = np.random.default_rng(3)
    assert abs(pearson_corr(rng.standard_normal(100_000), rng.standard_normal(100_000))) < 0.01
    with pytest.raises(DegenerateInput):
        pearson_corr(x, np.ones_like(x))


def test_corr_matrix_partial_axes():
    rng = np.random.default_rng(4)
    m = corr_matrix({"SF": rng.standard_normal(50), "DS": rng.standard_normal(50)})
    assert m.axes == ("SF", "DS")
    assert np.isnan(m.get("SF", "ASA"))


positive = st.floats(1e-3, 1e3)
tap_lists = st.lists(st.tuples(st.floats(0, 1e-6), positive), min_size=1, max_size=20)


@given(tap_lists, positive)
def test_delay_spread_power_scale_invariant(pairs, alpha):
    a = rms_delay_spread(taps(*pairs))
    b = rms_delay_spread(taps(*[(d, alpha * p) for d, p in pairs]))
    assert b == pytest.approx(a, rel=1e-9, abs=1e-18)


@given(tap_lists, st.floats(0, 1e-6), st.floats(0.01, 100))
def test_delay_spread_translation_and_homogeneity(pairs, shift, alpha):
    a = rms_delay_spread(taps(*pairs))
    assert rms_delay_spread(taps(*[(d + shift, p) for d, p in pairs])) == pytest.approx(
        a, rel=1e-6, abs=1e-15)
    assert rms_delay_spread(taps(*[(alpha * d, p) for d, p in pairs])) == pytest.approx(
        alpha * a, rel=1e-9, abs=1e-18)


angle_lists = st.lists(st.tuples(st.floats(-180, 180), positive), min_size=1, max_size=20)


@given(angle_lists, st.floats(-360, 360), positive, st.randoms())
def test_angular_spread_invariances(pairs, rot, alpha, rnd):
    a, p = map(list, zip(*pairs))
    ref = angular_spread(a, p)
    assert angular_spread([x + rot for x in a], p) == pytest.approx(ref, abs=1e-6)
    assert angular_spread(a, [alpha * x for x in p]) == pytest.approx(ref, abs=1e-6)
    idx = list(range(len(a)))
    rnd.shuffle(idx)
    assert angular_spread([a[i] for i in idx], [p[i] for i in idx]) == pytest.approx(ref, abs=1e-6)


@given(st.floats(1e-10, 1e-5))
def test_coherence_ratio(tau):
    assert coherence_bw(tau, 0.5) == pytest.approx(10 * coherence_bw(tau, 0.9), rel=1e-14)


@settings(max_examples=50)
@given(st.floats(20, 150), st.floats(0.5, 7))
def test_fit_path_loss_exact_recovery(pl0, ple):
    d = np.geomspace(20, 2000, 30)
    got = fit_path_loss(np.column_stack([d, pl0 + 10 * ple * np.log10(d / 100)]))
    assert abs(got[0] - pl0) < 1e-9 and abs(got[1] - ple) < 1e-11
