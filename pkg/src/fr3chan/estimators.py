"""Channel statistics estimated from tap lists and measurement series.

Taps are given as any iterable of objects with ``delay_s`` and ``power_lin``
attributes, or as parallel arrays where noted.  Delay moments use the
power-weighted definitions; the angular spread is the circular
``sqrt(-2 ln |R|)`` form with ``R`` the power-weighted mean resultant.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtri

from .errors import DegenerateFit, DegenerateInput, DomainError, EmptyResult
from .registry import AXES, CrossCorrMatrix, LogNormalStat

DEFAULT_DYNAMIC_RANGE_DB = 30.0
R_FLOOR = 1e-12
_PAIRWISE_MAX = 4096

_COHERENCE_K = {0.5: 5.0, 0.9: 50.0}


def _delays_powers(taps):
    if hasattr(taps, "delays_s"):
        delays, powers = np.asarray(taps.delays_s, float), np.asarray(taps.powers_lin, float)
        if delays.size == 0:
            raise DomainError("empty tap list")
        return delays, powers
    delays = np.array([t.delay_s for t in taps], dtype=float)
    powers = np.array([t.power_lin for t in taps], dtype=float)
    if delays.size == 0:
        raise DomainError("empty tap list")
    if not powers.sum() > 0:
        raise DomainError("total tap power must be positive")
    return delays, powers


def threshold_taps(taps, dynamic_range_db: float = DEFAULT_DYNAMIC_RANGE_DB):
    """Keep taps whose power is within ``dynamic_range_db`` of the strongest.

    A profile object (anything with ``select``) comes back as the same type.
    """
    if not dynamic_range_db > 0:
        raise DomainError("dynamic_range_db must be positive")
    if hasattr(taps, "select"):
        if len(taps) == 0:
            raise EmptyResult("no taps to threshold")
        floor = taps.powers_lin.max() * 10.0 ** (-dynamic_range_db / 10.0)
        return taps.select(taps.powers_lin >= floor)
    taps = list(taps)
    if not taps:
        raise EmptyResult("no taps to threshold")
    floor = max(t.power_lin for t in taps) * 10.0 ** (-dynamic_range_db / 10.0)
    kept = [t for t in taps if t.power_lin >= floor]
    if not kept:
        raise EmptyResult("no taps above threshold")
    return kept


def mean_delay(taps) -> float:
    delays, powers = _delays_powers(taps)
    return float(np.dot(delays, powers) / powers.sum())


def rms_delay_spread(taps) -> float:
    delays, powers = _delays_powers(taps)
    return _rms_spread(delays, powers)


def _rms_spread(delays, powers) -> float:
    w = powers / powers.sum()
    tau_m = np.dot(w, delays)
    return float(np.sqrt(np.dot(w, (delays - tau_m) ** 2)))


def coherence_bw(tau_rms_s: float, rho: float = 0.5) -> float:
    """Coherence bandwidth in Hz, ``1 / (K tau_rms)`` with K=5 (rho=0.5) or 50 (rho=0.9)."""
    if not tau_rms_s > 0:
        raise DomainError("tau_rms_s must be positive")
    try:
        k = _COHERENCE_K[rho]
    except KeyError:
        raise DomainError(f"rho must be 0.5 or 0.9, got {rho}") from None
    return 1.0 / (k * tau_rms_s)


def angular_spread(angles_deg, powers) -> float:
    """Circular angular spread in degrees.

    Rotation- and power-scale-invariant; a single path gives exactly 0.
    """
    angles = np.asarray(angles_deg, dtype=float)
    p = np.asarray(powers, dtype=float)
    if angles.shape != p.shape:
        raise DomainError("angles and powers must have the same length")
    if angles.size == 0:
        raise DomainError("empty angle list")
    total = p.sum()
    if not total > 0:
        raise DomainError("total power must be positive")
    phi = np.deg2rad(angles)
    w = p / total
    if phi.size > _PAIRWISE_MAX:
        return float(_spread_deg(phi, w))
    # 1 - |R|^2 = sum_ij w_i w_j 2 sin^2((phi_i - phi_j) / 2): exact zero for
    # coincident paths and no cancellation at small spreads.
    half = 0.5 * (phi[:, None] - phi[None, :])
    deficit = float(w @ (2.0 * np.sin(half) ** 2) @ w)
    r2 = max(1.0 - deficit, R_FLOOR ** 2)
    return math.degrees(math.sqrt(-math.log(r2))) if deficit > 0 else 0.0


def _spread_deg(phi_rad, w):
    """Vectorised core: ``w`` normalised weights, last axis is taps."""
    c = np.sum(w * np.cos(phi_rad), axis=-1)
    s = np.sum(w * np.sin(phi_rad), axis=-1)
    r = np.clip(np.hypot(c, s), R_FLOOR, 1.0)
    return np.rad2deg(np.sqrt(-2.0 * np.log(r)))


def fit_path_loss(samples, d0_m: float = 100.0) -> tuple[float, float, float]:
    """Least-squares fit of PL = PL0 + PLE * 10 log10(d/d0).

    Returns ``(pl0_db, ple, sigma_s_db)``; sigma is the population standard
    deviation of the residuals.
    """
    arr = np.asarray(list(samples), dtype=float).reshape(-1, 2)
    if len(arr) < 2:
        raise DegenerateFit("need at least two samples")
    d, pl = arr[:, 0], arr[:, 1]
    if np.any(d <= 0):
        raise DomainError("distances must be positive")
    x = 10.0 * np.log10(d / d0_m)
    xc = x - x.mean()
    sxx = np.dot(xc, xc)
    if sxx == 0:
        raise DegenerateFit("all distances are equal")
    ple = np.dot(xc, pl - pl.mean()) / sxx
    pl0 = pl.mean() - ple * x.mean()
    resid = pl - (pl0 + ple * x)
    return float(pl0), float(ple), float(np.sqrt(np.mean(resid ** 2)))


def path_loss_residuals(samples, pl0_db: float, ple: float, d0_m: float = 100.0) -> np.ndarray:
    arr = np.asarray(list(samples), dtype=float).reshape(-1, 2)
    return arr[:, 1] - (pl0_db + ple * 10.0 * np.log10(arr[:, 0] / d0_m))


def fit_lognormal(values) -> LogNormalStat:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise DomainError("need at least two values")
    if np.any(~(v > 0)):
        raise DomainError("values must be positive")
    lv = np.log10(v)
    return LogNormalStat(float(lv.mean()), float(lv.std(ddof=1)))


def probability_plot(values) -> list[tuple[float, float]]:
    """Normal probability plot pairs ``(theoretical_quantile, ordered_value)``.

    Plotting positions are ``(i - 0.5) / n``.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n < 2:
        raise DomainError("need at least two values")
    q = ndtri((np.arange(1, n + 1) - 0.5) / n)
    return list(zip(q.tolist(), v.tolist()))


def pearson_corr(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DomainError("series must have equal length")
    if x.size < 2:
        raise DomainError("need at least two samples")
    xc, yc = x - x.mean(), y - y.mean()
    sxx, syy = np.dot(xc, xc), np.dot(yc, yc)
    if sxx == 0 or syy == 0:
        raise DegenerateInput("zero variance series")
    r = np.dot(xc, yc) / math.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def corr_matrix(series: Mapping[str, Sequence[float]]) -> CrossCorrMatrix:
    """Pairwise Pearson matrix over any subset of the SF/DS/ASA/ZSA axes."""
    unknown = set(series) - set(AXES)
    if unknown:
        raise DomainError(f"unknown axes {sorted(unknown)}")
    axes = [a for a in AXES if a in series]
    pairs = {(a, b): pearson_corr(series[a], series[b])
             for i, a in enumerate(axes) for b in axes[i + 1:]}
    return CrossCorrMatrix.from_pairs(pairs, axes)
