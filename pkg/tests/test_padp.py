import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fr3chan.errors import DomainError
from fr3chan.estimators import angular_spread, rms_delay_spread, threshold_taps
from fr3chan.padp import MAX_ZSA_DEG, Padp, Tap, link_seed, rescale_delays, synth_padp, synth_padp_batch

NS = 1e-9


def test_synth_hits_targets():
    p = synth_padp(100 * NS, 30.0, 10.0, 50, seed=7)
    kept = threshold_taps(p, 30)
    assert rms_delay_spread(kept) == pytest.approx(100 * NS, abs=0.001 * NS)
    assert angular_spread(kept.azimuths_deg, kept.powers_lin) == pytest.approx(30.0, abs=1e-4)
    assert angular_spread(kept.zeniths_deg, kept.powers_lin) == pytest.approx(10.0, abs=1e-4)
    assert np.all(np.abs(p.zeniths_deg) <= 90)


def test_synth_single_tap_rejected():
    with pytest.raises(DomainError):
        synth_padp(100 * NS, 30.0, 10.0, 1, seed=0)


def test_synth_deterministic():
    assert synth_padp(50 * NS, 20.0, 5.0, 40, seed=3) == synth_padp(50 * NS, 20.0, 5.0, 40, seed=3)


def test_synth_delay_only():
    p = synth_padp(30 * NS, n_taps=20, seed=1)
    assert not p.has_angles
    assert rms_delay_spread(threshold_taps(p)) == pytest.approx(30 * NS, rel=1e-6)


@pytest.mark.parametrize("asa", [0.5, 56.0, 120.0, 150.0, 180.0])
def test_synth_azimuth_range(asa):
    p = threshold_taps(synth_padp(40 * NS, asa, 8.0, 50, seed=11))
    assert angular_spread(p.azimuths_deg, p.powers_lin) == pytest.approx(asa, rel=1e-6)


def test_synth_zenith_cap():
    with pytest.raises(DomainError):
        synth_padp(40 * NS, 30.0, MAX_ZSA_DEG + 1, 50, seed=0)


def test_batch_independent_of_neighbours():
    seeds = [link_seed(5, k) for k in range(6)]
    ds = np.full(6, 80 * NS)
    full = synth_padp_batch(ds, np.full(6, 25.0), np.full(6, 9.0), 30, seeds)
    alone = synth_padp_batch(ds[3:4], [25.0], [9.0], 30, seeds[3:4])
    assert full[3] == alone[0]


def test_rescale_examples():
    p = Padp.from_taps([Tap(0, 1.0), Tap(100 * NS, 1.0)])
    out = rescale_delays(p, 100 * NS)
    np.testing.assert_allclose(out.delays_s, [0, 200 * NS], rtol=1e-12)
    q = Padp.from_taps([Tap(0, 1.0), Tap(30 * NS, 0.5), Tap(100 * NS, 0.2)])
    spread = rms_delay_spread(q)
    np.testing.assert_allclose(rescale_delays(q, 2 * spread).delays_s, 2 * q.delays_s, rtol=1e-12)
    np.testing.assert_allclose(rescale_delays(q, spread).delays_s, q.delays_s, rtol=1e-12)


def test_padp_csv_roundtrip():
    p = synth_padp(70 * NS, 33.0, 7.0, 12, seed=2)
    assert Padp.from_csv(p.to_csv()) == p
    q = synth_padp(70 * NS, n_taps=12, seed=2)
    assert Padp.from_csv(q.to_csv()) == q


def test_padp_validation():
    with pytest.raises(DomainError):
        Padp.from_taps([])
    with pytest.raises(DomainError):
        Padp.from_taps([Tap(0, -1.0)])


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-9, 1e-6), st.floats(1.0, 170.0), st.floats(0.5, 50.0), st.integers(0, 2**32))
def test_synth_property(ds, asa, zsa, seed):
    p = threshold_taps(synth_padp(ds, asa, zsa, 50, seed=seed))
    assert rms_delay_spread(p) == pytest.approx(ds, rel=1e-6)
    assert angular_spread(p.azimuths_deg, p.powers_lin) == pytest.approx(asa, rel=1e-6)
    assert angular_spread(p.zeniths_deg, p.powers_lin) == pytest.approx(zsa, rel=1e-6)


@given(st.floats(0.01, 100))
def test_rms_homogeneity(alpha):
    p = Padp.from_taps([Tap(0, 1.0), Tap(13 * NS, 0.4), Tap(77 * NS, 0.05)])
    scaled = Padp.from_taps([Tap(alpha * t.delay_s, t.power_lin) for t in p])
    assert rms_delay_spread(scaled) == pytest.approx(alpha * rms_delay_spread(p), rel=1e-12)
