import math

import pytest
from hypothesis import given, strategies as st

from fr3chan.errors import DomainError
from fr3chan.pathloss import LinkBudget, fspl, max_range, path_loss, received_power
from fr3chan.registry import PathLossParams

UMI_B15_LOS = PathLossParams(90.2, 2.5, 2.5)
UMA_B7_NLOS = PathLossParams(103.0, 6.8, 6.6)


def test_fspl_values():
    assert fspl(100, 6.9e9) == pytest.approx(89.22, abs=0.01)
    assert fspl(100, 14.5e9) == pytest.approx(95.67, abs=0.01)


def test_fspl_decade_is_20_db():
    assert fspl(1000, 8.3e9) - fspl(100, 8.3e9) == pytest.approx(20.0, abs=1e-12)


def test_fspl_domain():
    with pytest.raises(DomainError):
        fspl(0, 6.9e9)


def test_path_loss_examples():
    assert path_loss(UMI_B15_LOS, 100) == 90.2
    assert path_loss(UMI_B15_LOS, 1000) == pytest.approx(115.2, abs=1e-12)
    assert path_loss(UMI_B15_LOS, 100, 3.5) == 90.2 + 3.5


def test_path_loss_domain():
    with pytest.raises(DomainError):
        path_loss(UMI_B15_LOS, 0)


def test_max_range_examples():
    assert max_range(UMI_B15_LOS, 115.2) == pytest.approx(1000.0, rel=1e-12)
    assert max_range(UMI_B15_LOS, 90.2) == 100.0
    assert max_range(UMA_B7_NLOS, 109.8) == pytest.approx(125.9, abs=0.05)


def test_received_power_examples():
    assert received_power(LinkBudget(), 115.2) == pytest.approx(-72.2, abs=1e-12)
    assert received_power(LinkBudget(rx_gain_dbi=4.0), 0.0) == 47.0
    assert received_power(LinkBudget(43.0, 10.0), 89.22) == pytest.approx(-36.22, abs=1e-12)


params = st.builds(PathLossParams, st.floats(20, 150), st.floats(0.5, 7), st.floats(0, 10))
dist = st.floats(1.0, 1e5)


@given(params, dist)
def test_max_range_inverts_path_loss(p, d):
    assert max_range(p, path_loss(p, d)) == pytest.approx(d, rel=1e-12)


@given(params, dist, st.floats(1.01, 10))
def test_path_loss_increasing_and_log_linear(p, d, k):
    a, b = path_loss(p, d), path_loss(p, k * d)
    assert b > a
    assert b - a == pytest.approx(10 * p.ple * math.log10(k), abs=1e-9)


@given(dist, st.floats(1e8, 1e11), st.floats(1e8, 1e11))
def test_fspl_frequency_difference(d, f1, f2):
    assert fspl(d, f1) - fspl(d, f2) == pytest.approx(20 * math.log10(f1 / f2), abs=1e-9)
