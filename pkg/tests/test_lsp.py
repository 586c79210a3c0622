import math

import numpy as np
import pytest

from fr3chan.errors import DomainError, MissingData
from fr3chan.lsp import (ASA_MAX_LOG10, ZSA_MAX_LOG10, SpatialModel, correlated_field, draw_lsp,
                         draw_route_lsp, nearest_psd, ou_filter, psd_report)
from fr3chan.registry import CrossCorrMatrix

from conftest import lc


def test_nearest_psd_identity():
    assert np.array_equal(nearest_psd(np.eye(4)), np.eye(4))


def test_nearest_psd_two_by_two():
    out = nearest_psd(np.array([[1.0, 1.2], [1.2, 1.0]]))
    np.testing.assert_allclose(out, [[1.0, 1.0], [1.0, 1.0]], atol=1e-12)


def test_nearest_psd_leaves_table_matrices(registry):
    for key in registry.populated():
        m = registry[key].corr
        assert nearest_psd(m) is m
        assert not psd_report(m).repaired


def test_nearest_psd_idempotent():
    bad = np.array([[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1.0]])
    once = nearest_psd(bad)
    assert np.linalg.eigvalsh(once).min() > -1e-12
    np.testing.assert_allclose(nearest_psd(once), once, atol=1e-12)


def test_draw_zero(registry):
    assert len(draw_lsp(registry[lc("SMa-B15-NLOS")], 0, seed=1)) == 0


def test_draw_deterministic(registry):
    p = registry[lc("UMi-B8-NLOS")]
    assert draw_lsp(p, 500, seed=9) == draw_lsp(p, 500, seed=9)
    assert not draw_lsp(p, 500, seed=9) == draw_lsp(p, 500, seed=10)


def test_draw_prefix_stable(registry):
    p = registry[lc("SMa-B8-NLOS")]
    long, short = draw_lsp(p, 1000, seed=4), draw_lsp(p, 10, seed=4)
    assert np.array_equal(long.sf_db[:10], short.sf_db)


def test_asa_ds_correlation(registry):
    s = draw_lsp(registry[lc("SMa-B15-NLOS")], 100_000, seed=2)
    assert np.corrcoef(s.asa_log10, s.ds_log10)[0, 1] == pytest.approx(0.77, abs=0.05)


def test_identity_correlation_independent(registry):
    p = registry[lc("SMa-B15-NLOS")]
    from dataclasses import replace
    q = replace(p, corr=CrossCorrMatrix(np.eye(4)))
    s = draw_lsp(q, 100_000, seed=3)
    c = np.corrcoef(np.vstack(list(s.columns().values())))
    assert np.max(np.abs(c - np.eye(4))) < 0.02


def test_clamps(registry):
    s = draw_lsp(registry[lc("SMa-B8-LOS")], 20_000, seed=5)
    assert s.asa_log10.max() <= ASA_MAX_LOG10
    assert s.zsa_log10.max() > ZSA_MAX_LOG10
    t = draw_lsp(registry[lc("SMa-B8-LOS")], 20_000, seed=5, emulate_limits=True)
    assert t.zsa_log10.max() <= ZSA_MAX_LOG10


def test_clamp_rate_sma_b15_nlos(registry):
    s = draw_lsp(registry[lc("SMa-B15-NLOS")], 100_000, seed=6)
    assert np.mean(s.asa_log10 >= ASA_MAX_LOG10) < 0.02


def test_angular_requested_without_data(registry):
    with pytest.raises(MissingData):
        draw_lsp(registry[lc("UMi-B7-LOS")], 10, seed=0, angular=True)
    assert draw_lsp(registry[lc("UMi-B7-LOS")], 10, seed=0).asa_log10 is None


def test_route_same_position_identical_sf(registry):
    s = draw_route_lsp(registry[lc("UMi-B7-NLOS")], [(10, 10), (10, 10)], SpatialModel(), seed=1)
    assert s.sf_db[0] == s.sf_db[1]


def test_route_single_point_matches_draw(registry):
    p = registry[lc("SMa-B15-LOS")]
    assert draw_route_lsp(p, [(3, 4)], SpatialModel(), seed=8) == draw_lsp(p, 1, seed=8)


def test_route_correlation_at_decorrelation_distance():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((2, 100_000))
    out = ou_filter(z, np.array([0.0, 50.0]), 50.0)
    assert np.corrcoef(out)[0, 1] == pytest.approx(math.exp(-1), abs=0.05)


def test_route_correlation_end_to_end(registry):
    p = registry[lc("UMi-B7-LOS")]
    a, b = [], []
    for seed in range(3000):
        s = draw_route_lsp(p, [(0, 0), (50, 0)], SpatialModel(50), seed)
        a.append(s.sf_db[0])
        b.append(s.sf_db[1])
    assert np.corrcoef(a, b)[0, 1] == pytest.approx(math.exp(-1), abs=0.05)


def test_spatial_model_domain():
    with pytest.raises(DomainError):
        SpatialModel(0)


def test_field_stats():
    f = correlated_field((200, 200), 5.0, SpatialModel(50), seed=1)
    assert abs(f.mean()) < 0.3 and f.std() == pytest.approx(1.0, abs=0.15)
    lag = np.corrcoef(f[:, :-10].ravel(), f[:, 10:].ravel())[0, 1]
    assert lag == pytest.approx(math.exp(-1), abs=0.05)
    assert np.array_equal(f, correlated_field((200, 200), 5.0, SpatialModel(50), seed=1))
