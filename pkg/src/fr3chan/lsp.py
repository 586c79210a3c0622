"""Correlated large-scale parameter generation.

Each draw is a 4-vector (SF, DS, ASA, ZSA): shadow fading in dB and the
three spreads in log10 of seconds / degrees.  Standard normals come from the
inverse CDF applied to a counter-based Philox stream.  Draw ``k`` of a
given seed always consumes Philox block ``k`` (four 64-bit words), so any
link's values can be regenerated on its own, in any order or process, with
``_normal_rows(key, start=k, n=1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, MissingData
from .registry import AXES, CrossCorrMatrix

ASA_MAX_LOG10 = math.log10(180.0)
ZSA_MAX_LOG10 = 1.37
DEFAULT_DECORRELATION_M = 50.0
PSD_TOLERANCE = 1e-12

_PURPOSE_LSP = 0x15B
_PURPOSE_GRID = 0x6D1D


@dataclass(frozen=True)
class SpatialModel:
    decorrelation_distance_m: float = DEFAULT_DECORRELATION_M

    def __post_init__(self):
        if not self.decorrelation_distance_m > 0:
            raise DomainError("decorrelation distance must be positive")


@dataclass(frozen=True)
class LspVector:
    sf_db: float
    ds_log10: float
    asa_log10: Optional[float] = None
    zsa_log10: Optional[float] = None


class LspSamples(Sequence):
    """Column-oriented batch of draws; indexing yields :class:`LspVector`."""

    def __init__(self, sf_db, ds_log10, asa_log10=None, zsa_log10=None):
        self.sf_db = np.asarray(sf_db, dtype=float)
        self.ds_log10 = np.asarray(ds_log10, dtype=float)
        self.asa_log10 = None if asa_log10 is None else np.asarray(asa_log10, dtype=float)
        self.zsa_log10 = None if zsa_log10 is None else np.asarray(zsa_log10, dtype=float)

    def __len__(self):
        return len(self.sf_db)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return LspVector(
            float(self.sf_db[i]), float(self.ds_log10[i]),
            None if self.asa_log10 is None else float(self.asa_log10[i]),
            None if self.zsa_log10 is None else float(self.zsa_log10[i]))

    def columns(self) -> dict[str, np.ndarray]:
        cols = {"SF": self.sf_db, "DS": self.ds_log10}
        if self.asa_log10 is not None:
            cols["ASA"] = self.asa_log10
            cols["ZSA"] = self.zsa_log10
        return cols

    def __eq__(self, other):
        if not isinstance(other, LspSamples):
            return NotImplemented
        return all(
            (a is None and b is None) or (a is not None and b is not None and np.array_equal(a, b))
            for a, b in zip(self._cols(), other._cols()))

    def _cols(self):
        return (self.sf_db, self.ds_log10, self.asa_log10, self.zsa_log10)


# -- correlation repair ---------------------------------------------------------

@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    repaired: bool
    max_change: float


def _nearest_psd_array(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    vals, vecs = np.linalg.eigh(m)
    if vals.min() >= -PSD_TOLERANCE:
        return m
    out = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    d = np.sqrt(np.diag(out))
    out = out / np.outer(d, d)
    out = 0.5 * (out + out.T)
    np.fill_diagonal(out, 1.0)
    return np.clip(out, -1.0, 1.0)


def nearest_psd(m):
    """Clip negative eigenvalues and renormalise to a unit diagonal.

    Accepts a dense array or a :class:`CrossCorrMatrix` (only the present axes
    are touched).  PSD input is returned unchanged.
    """
    if isinstance(m, CrossCorrMatrix):
        block = m.sub()
        fixed = _nearest_psd_array(block)
        if fixed is block:
            return m
        full = np.array(m.matrix)
        idx = [AXES.index(a) for a in m.axes]
        full[np.ix_(idx, idx)] = fixed
        return CrossCorrMatrix(full)
    return _nearest_psd_array(m)


def psd_report(m) -> PsdReport:
    block = m.sub() if isinstance(m, CrossCorrMatrix) else np.asarray(m, dtype=float)
    fixed = _nearest_psd_array(block)
    return PsdReport(float(np.linalg.eigvalsh(block).min()), fixed is not block,
                     float(np.max(np.abs(fixed - block))))


def _psd_cholesky(c: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^T = c, tolerating zero pivots."""
    n = c.shape[0]
    low = np.zeros_like(c)
    for j in range(n):
        piv = c[j, j] - np.dot(low[j, :j], low[j, :j])
        if piv <= 1e-14:
            continue
        low[j, j] = math.sqrt(piv)
        for i in range(j + 1, n):
            low[i, j] = (c[i, j] - np.dot(low[i, :j], low[j, :j])) / low[j, j]
    return low


# -- random streams -----------------------------------------------------------------

def stream_key(seed: int, purpose: int, *extra: int) -> int:
    """128-bit Philox key derived from the master seed and a purpose tag."""
    words = np.random.SeedSequence(seed, spawn_key=(purpose, *extra)).generate_state(2, np.uint64)
    return int(words[0]) << 64 | int(words[1])


def _normal_rows(key: int, start: int, n: int, width: int = 4) -> np.ndarray:
    bg = np.random.Philox(key=key)
    bg.advance(start)
    raw = bg.random_raw(4 * n).reshape(n, 4)[:, :width]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) / 2.0 ** 53
    return ndtri(u)


def ou_filter(z: np.ndarray, steps_m: np.ndarray, decorrelation_m: float) -> np.ndarray:
    """Exponentially correlated unit-variance sequence along axis 0.

    ``steps_m[k]`` is the distance between element ``k-1`` and ``k``
    (``steps_m[0]`` is ignored); element pairs are correlated by
    ``exp(-path_distance / decorrelation_m)``.
    """
    out = np.empty_like(z, dtype=float)
    rho = np.exp(-np.asarray(steps_m, dtype=float) / decorrelation_m)
    innov = np.sqrt(1.0 - rho ** 2)
    out[0] = z[0]
    for k in range(1, len(z)):
        out[k] = rho[k] * out[k - 1] + innov[k] * z[k]
    return out


# -- generation ---------------------------------------------------------------------

def _resolve_axes(params, angular):
    if angular is None:
        angular = params.has_angular
    if angular and not params.has_angular:
        raise MissingData(params.link_class, ("asa", "zsa"))
    return AXES if angular else AXES[:2]


def _scale(params, axes, x, emulate_limits, clamp_asa=True):
    sf = params.path_loss.sigma_s_db * x[:, 0]
    ds = params.ds.mu_log10 + params.ds.sigma_log10 * x[:, 1]
    if len(axes) == 2:
        return LspSamples(sf, ds)
    asa = params.asa.mu_log10 + params.asa.sigma_log10 * x[:, 2]
    if clamp_asa:
        asa = np.minimum(asa, ASA_MAX_LOG10)
    zsa = params.zsa.mu_log10 + params.zsa.sigma_log10 * x[:, 3]
    if emulate_limits:
        zsa = np.minimum(zsa, ZSA_MAX_LOG10)
    return LspSamples(sf, ds, asa, zsa)


def correlation_factor(params, axes) -> np.ndarray:
    return _psd_cholesky(nearest_psd(params.corr.sub(axes)))


def draw_lsp(params, n: int, seed: int, angular: Optional[bool] = None,
             emulate_limits: bool = False, clamp_asa: bool = True) -> LspSamples:
    """``n`` independent correlated LSP draws for one link class.

    ``angular=None`` generates whatever axes the class has; ``True`` demands
    ASA/ZSA and raises MissingData where they were not measured.  With
    ``emulate_limits`` the ZSA is capped at the sounder's measurable maximum.
    ``clamp_asa=False`` exposes the pre-clamp azimuth law (diagnostics only;
    values above 180 degrees are not physical spreads).
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    axes = _resolve_axes(params, angular)
    z = _normal_rows(stream_key(seed, _PURPOSE_LSP), 0, n)[:, :len(axes)]
    x = z @ correlation_factor(params, axes).T
    return _scale(params, axes, x, emulate_limits, clamp_asa)


def draw_route_lsp(params, positions, spatial: SpatialModel, seed: int,
                   angular: Optional[bool] = None, emulate_limits: bool = False) -> LspSamples:
    """LSP draws along an ordered route.

    The standardised SF follows an Ornstein-Uhlenbeck process in travelled
    distance, so consecutive points separated by ``dd`` are correlated by
    ``exp(-dd / d_corr)``.  The remaining axes use fresh normals per point
    combined with the SF value through the same triangular factor as
    :func:`draw_lsp`, so the per-point joint law is unchanged.
    """
    if not isinstance(spatial, SpatialModel):
        spatial = SpatialModel(spatial)
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(pos) == 0:
        raise DomainError("route must contain at least one position")
    axes = _resolve_axes(params, angular)
    z = _normal_rows(stream_key(seed, _PURPOSE_LSP), 0, len(pos))[:, :len(axes)]
    steps = np.r_[0.0, np.hypot(*np.diff(pos, axis=0).T)]
    z[:, 0] = ou_filter(z[:, 0], steps, spatial.decorrelation_distance_m)
    x = z @ correlation_factor(params, axes).T
    return _scale(params, axes, x, emulate_limits)


def correlated_field(shape: tuple[int, int], spacing_m: float, spatial: SpatialModel,
                     seed: int) -> np.ndarray:
    """Unit-variance Gaussian field on a regular grid.

    Covariance is ``exp(-(|dx| + |dy|) / d_corr)``, the separable product of
    two exponential kernels, built by filtering along each axis in turn.
    """
    ny, nx = shape
    z = _normal_rows(stream_key(seed, _PURPOSE_GRID), 0, ny * nx, width=1).reshape(ny, nx)
    d = spatial.decorrelation_distance_m
    z = ou_filter(z, np.full(ny, spacing_m), d)
    z = ou_filter(z.T, np.full(nx, spacing_m), d).T
    return z
