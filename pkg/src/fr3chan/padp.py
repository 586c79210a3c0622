"""Tap-level power-angular-delay profile synthesis.

A profile is drawn from a simple stochastic law (exponential tap arrivals,
exponentially decaying powers with log-normal ripple, wrapped-Gaussian
azimuths, clipped-Gaussian zeniths) and then shaped so the estimators in
:mod:`fr3chan.estimators` return prescribed spreads:

* delays are scaled by ``target / achieved`` (the RMS spread is
  1-homogeneous in delay);
* the angular scale is found by bisection on the circular spread.

Wide azimuth targets are out of reach of the Gaussian scale family, because
the resultant of a finite tap set stops shrinking once the angles wrap.  For
those, the taps (kept in the same angular order) are instead spread over an
arrangement whose power-weighted resultant is exactly zero; scaling that
arrangement from 0 to 1 drives the spread from 0 to the estimator ceiling,
so every target up to 180 degrees is bracketed.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, Unattainable
from .estimators import DEFAULT_DYNAMIC_RANGE_DB, _rms_spread, _spread_deg

DEFAULT_N_TAPS = 50
RIPPLE_DB = 3.0
MAX_ASA_DEG = 180.0
MAX_ZSA_DEG = 60.0
SPREAD_RTOL = 1e-6

_GRID = 64
_BISECT_ITERS = 80
_PURPOSE_PADP = 0xADB


@dataclass(frozen=True)
class Tap:
    delay_s: float
    power_lin: float
    azimuth_deg: float = math.nan
    zenith_deg: float = math.nan


@dataclass(frozen=True, eq=False)
class Padp:
    """Tap list stored column-wise; delays ascend from 0.

    Angles are NaN when the profile carries no angular information.
    """

    delays_s: np.ndarray
    powers_lin: np.ndarray
    azimuths_deg: np.ndarray
    zeniths_deg: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("delays_s", "powers_lin", "azimuths_deg", "zeniths_deg"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.delays_s.size
        if n < 1:
            raise DomainError("a profile needs at least one tap")
        if any(a.shape != (n,) for a in (self.powers_lin, self.azimuths_deg, self.zeniths_deg)):
            raise DomainError("tap columns must have equal length")
        if np.any(self.powers_lin <= 0):
            raise DomainError("tap powers must be positive")
        if np.any(np.diff(self.delays_s) < 0) or self.delays_s[0] < 0:
            raise DomainError("delays must be non-negative and ascending")

    @classmethod
    def from_taps(cls, taps: Sequence[Tap], meta=None) -> "Padp":
        taps = sorted(taps, key=lambda t: t.delay_s)
        return cls(np.array([t.delay_s for t in taps]), np.array([t.power_lin for t in taps]),
                   np.array([t.azimuth_deg for t in taps]), np.array([t.zenith_deg for t in taps]),
                   dict(meta or {}))

    @property
    def taps(self) -> list[Tap]:
        return [Tap(*map(float, row)) for row in
                zip(self.delays_s, self.powers_lin, self.azimuths_deg, self.zeniths_deg)]

    def __iter__(self):
        return iter(self.taps)

    def __len__(self):
        return self.delays_s.size

    def select(self, mask) -> "Padp":
        mask = np.asarray(mask, dtype=bool)
        return Padp(self.delays_s[mask], self.powers_lin[mask], self.azimuths_deg[mask],
                    self.zeniths_deg[mask], dict(self.meta))

    @property
    def has_angles(self) -> bool:
        return bool(np.all(np.isfinite(self.azimuths_deg)) and np.all(np.isfinite(self.zeniths_deg)))

    def __eq__(self, other):
        if not isinstance(other, Padp):
            return NotImplemented
        return all(np.array_equal(a, b, equal_nan=True) for a, b in
                   zip(self._cols(), other._cols()))

    def _cols(self):
        return (self.delays_s, self.powers_lin, self.azimuths_deg, self.zeniths_deg)

    # CSV interchange ---------------------------------------------------------

    CSV_HEADER = ("delay_s", "power_lin", "azimuth_deg", "zenith_deg")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        for row in zip(*self._cols()):
            w.writerow(["" if math.isnan(x) else repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, meta=None) -> "Padp":
        rows = list(csv.DictReader(io.StringIO(text)))
        cols = [[float(r[h]) if r[h].strip() else math.nan for r in rows] for h in cls.CSV_HEADER]
        return cls(*cols, meta=dict(meta or {}))


def rescale_delays(padp: Padp, target_ds_s: float) -> Padp:
    """Scale every delay so the RMS delay spread equals ``target_ds_s``."""
    if not target_ds_s > 0:
        raise DomainError("target delay spread must be positive")
    current = _rms_spread(padp.delays_s, padp.powers_lin)
    if current == 0:
        raise DomainError("profile has zero delay spread")
    if current == target_ds_s:
        return padp
    return Padp(padp.delays_s * (target_ds_s / current), padp.powers_lin,
                padp.azimuths_deg, padp.zeniths_deg, dict(padp.meta))


# -- synthesis ---------------------------------------------------------------

MAX_ATTEMPTS = 8


def link_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Sub-seed for link ``index`` of a run with master ``seed``."""
    return np.random.SeedSequence(seed, spawn_key=(_PURPOSE_PADP, index))


def _check_targets(ds, asa, zsa, n_taps):
    if n_taps < 2:
        raise DomainError("at least two taps are needed for a non-zero spread")
    if not ds > 0:
        raise DomainError(f"target delay spread must be positive, got {ds}")
    if (asa is None) != (zsa is None):
        raise DomainError("give both angular targets or neither")
    if asa is not None:
        if not 0 < asa <= MAX_ASA_DEG:
            raise DomainError(f"azimuth spread target must be in (0, {MAX_ASA_DEG}], got {asa}")
        if not 0 < zsa <= MAX_ZSA_DEG:
            raise DomainError(f"zenith spread target must be in (0, {MAX_ZSA_DEG}], got {zsa}")


def synth_padp(target_ds_s: float, target_asa_deg: Optional[float] = None,
               target_zsa_deg: Optional[float] = None, n_taps: int = DEFAULT_N_TAPS,
               seed=0, dynamic_range_db: float = DEFAULT_DYNAMIC_RANGE_DB,
               meta=None) -> Padp:
    """Draw a profile whose delay, azimuth and zenith spreads hit the targets.

    Angular targets may be omitted together, giving a delay-only profile.
    Taps weaker than ``dynamic_range_db`` below the peak are dropped before
    shaping, so thresholding the result at that range changes nothing.
    """
    return synth_padp_batch([target_ds_s], None if target_asa_deg is None else [target_asa_deg],
                            None if target_zsa_deg is None else [target_zsa_deg],
                            n_taps, [seed], dynamic_range_db, [meta])[0]


def synth_padp_batch(target_ds_s, target_asa_deg, target_zsa_deg, n_taps: int, seeds,
                     dynamic_range_db: float = DEFAULT_DYNAMIC_RANGE_DB, metas=None) -> list[Padp]:
    """Vectorised :func:`synth_padp`; link ``k`` depends on ``seeds[k]`` only.

    A link whose prior draw cannot be shaped to its targets is redrawn from
    the child seed ``(seeds[k], attempt)``, up to ``MAX_ATTEMPTS`` times.
    """
    ds = np.asarray(target_ds_s, dtype=float).reshape(-1)
    n = ds.size
    angular = target_asa_deg is not None
    asa = np.asarray(target_asa_deg, dtype=float).reshape(-1) if angular else np.full(n, np.nan)
    zsa = np.asarray(target_zsa_deg, dtype=float).reshape(-1) if angular else np.full(n, np.nan)
    if len(seeds) != n or asa.size != n or zsa.size != n:
        raise DomainError("targets and seeds must have equal length")
    for k in range(n):
        _check_targets(ds[k], asa[k] if angular else None, zsa[k] if angular else None, n_taps)
    metas = list(metas) if metas is not None else [None] * n
    seeds = [s if isinstance(s, np.random.SeedSequence) else np.random.SeedSequence(s)
             for s in seeds]

    out = [None] * n
    pending = np.arange(n)
    for attempt in range(MAX_ATTEMPTS):
        if attempt:
            tried = [seeds[k] for k in pending]
            attempt_seeds = [np.random.SeedSequence(s.entropy, spawn_key=s.spawn_key + (attempt,))
                             for s in tried]
        else:
            attempt_seeds = [seeds[k] for k in pending]
        padps, ok = _shape(ds[pending], asa[pending], zsa[pending], angular, n_taps,
                           attempt_seeds, dynamic_range_db)
        for j, k in enumerate(pending):
            if ok[j]:
                meta = dict(metas[k] or {})
                meta.update(target_ds_s=float(ds[k]), attempt=attempt)
                if angular:
                    meta.update(target_asa_deg=float(asa[k]), target_zsa_deg=float(zsa[k]))
                d, p, a, z = padps[j]
                out[k] = Padp(d, p, a, z, meta)
        pending = pending[~ok]
        if pending.size == 0:
            return out
    raise Unattainable(f"no profile reached the targets of links {pending.tolist()} "
                       f"after {MAX_ATTEMPTS} draws")


def _shape(ds, asa, zsa, angular, n_taps, seeds, dynamic_range_db):
    delays, powers, az0, u, v = _draw_prior(seeds, n_taps)
    keep = powers >= powers.max(axis=1, keepdims=True) * 10.0 ** (-dynamic_range_db / 10.0)
    ok = keep.sum(axis=1) >= 2
    w = np.where(keep, powers, 0.0)
    w = w / w.sum(axis=1, keepdims=True)

    first = np.where(keep, delays, np.inf).min(axis=1, keepdims=True)
    delays = delays - first
    mean = np.sum(w * delays, axis=1, keepdims=True)
    current = np.sqrt(np.sum(w * (delays - mean) ** 2, axis=1))
    delays = delays * (ds / np.where(current > 0, current, 1.0))[:, None]

    if angular:
        phi, ok_az = _fit_azimuth(w, u, asa)
        az = np.mod(az0[:, None] + np.rad2deg(phi) + 180.0, 360.0) - 180.0
        zen, ok_zen = _fit_zenith(w, v, zsa)
        ok &= ok_az & ok_zen
    else:
        az = zen = np.full_like(delays, np.nan)
    cols = [(delays[k, m], powers[k, m], az[k, m], zen[k, m]) for k, m in enumerate(keep)]
    return cols, ok


def _draw_prior(seeds, n_taps):
    n = len(seeds)
    delays = np.empty((n, n_taps))
    powers = np.empty((n, n_taps))
    az0 = np.empty(n)
    u = np.empty((n, n_taps))
    v = np.empty((n, n_taps))
    decay = n_taps / math.log(100.0)  # mean last tap ~20 dB below the first
    for k, s in enumerate(seeds):
        rng = np.random.Generator(np.random.Philox(s))
        gaps = rng.exponential(1.0, n_taps)
        gaps[0] = 0.0
        delays[k] = np.cumsum(gaps)
        ripple = rng.normal(0.0, RIPPLE_DB, n_taps)
        powers[k] = np.exp(-delays[k] / decay) * 10.0 ** (ripple / 10.0)
        az0[k] = rng.uniform(-180.0, 180.0)
        u[k] = rng.standard_normal(n_taps)
        v[k] = rng.standard_normal(n_taps)
    return delays, powers, az0, u, v


def _bisect(f, lo, hi, target, f_lo, f_hi):
    """Vectorised bisection for ``f(x) = target`` on brackets with
    ``f_lo < target <= f_hi``.  Returns the root and a mask that is False for
    rows where an interior value left the bracket (non-monotone segment)."""
    ok = np.ones(len(lo), dtype=bool)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        ok &= (f_mid >= f_lo - 1e-12) & (f_mid <= f_hi + 1e-12)
        up = f_mid < target
        lo, f_lo = np.where(up, mid, lo), np.where(up, f_mid, f_lo)
        hi, f_hi = np.where(up, hi, mid), np.where(up, f_hi, f_mid)
    return hi, ok


def _first_crossing(values, target):
    """Index of the first grid value >= target and whether the prefix up to
    it is non-decreasing.  Index is -1 when no crossing exists."""
    hit = values >= target[:, None]
    idx = np.where(hit.any(axis=1), hit.argmax(axis=1), -1)
    dec = np.diff(values, axis=1) < -1e-12
    steps = np.arange(values.shape[1] - 1)[None, :]
    monotone = ~np.any(dec & (steps < idx[:, None]), axis=1)
    return idx, monotone


def _scale_search(base, w, step, target_deg, to_rad=None, limit=None):
    """Solve ``spread(base * s) == target`` per row for a scale ``s``.

    Scales ``k * step`` (k = 0.._GRID) are scanned to the first crossing,
    ignoring grid points past ``limit``; the bracketing cell is bisected.
    Returns ``(s, ok)``; rows that never cross or are not monotone up to
    the crossing fail.
    """
    to_rad = to_rad or (lambda a: a)
    n = len(w)
    scales = step[:, None] * np.arange(_GRID + 1)
    grid = _spread_deg(to_rad(scales[:, :, None] * base[:, None, :]), w[:, None, :])
    if limit is not None:
        grid = np.where(np.arange(_GRID + 1)[None, :] <= limit[:, None], grid, -1.0)
    idx, monotone = _first_crossing(grid, target_deg)
    ok = monotone & (idx >= 1)
    idx = np.where(ok, idx, 1)
    rows = np.arange(n)
    f = lambda s: _spread_deg(to_rad(s[:, None] * base), w)
    s, ok_b = _bisect(f, scales[rows, idx - 1], scales[rows, idx], target_deg,
                      grid[rows, idx - 1], grid[rows, idx])
    return s, ok & ok_b


def _weighted_sd(w, x):
    mu = np.sum(w * x, axis=1, keepdims=True)
    return np.sqrt(np.sum(w * (x - mu) ** 2, axis=1))


def _fit_azimuth(w, u, target_deg):
    """Azimuth offsets in radians; returns ``(phi, ok)``."""
    step = np.deg2rad(target_deg) / _weighted_sd(w, u) / 8.0
    scales = step[:, None] * np.arange(_GRID + 1)
    grid = _spread_deg(scales[:, :, None] * u[:, None, :], w[:, None, :])
    # The Gaussian scale family is used only up to its first local maximum.
    falling = np.diff(grid, axis=1) < -1e-12
    peak = np.where(falling.any(axis=1), falling.argmax(axis=1), _GRID)
    easy = grid[np.arange(len(w)), peak] >= target_deg

    phi = np.zeros_like(u)
    ok = np.zeros(len(w), dtype=bool)
    if easy.any():
        s, ok[easy] = _scale_search(u[easy], w[easy], step[easy], target_deg[easy],
                                    limit=peak[easy])
        phi[easy] = s[:, None] * u[easy]
    hard = ~easy
    if hard.any():
        end, ok_end = _zero_resultant_angles(w[hard], u[hard])
        s, ok_s = _scale_search(end, w[hard], np.full(len(end), 1.0 / _GRID), target_deg[hard])
        phi[hard] = s[:, None] * end
        ok[hard] = ok_end & ok_s
    ok &= np.abs(_spread_deg(phi, w) - target_deg) <= SPREAD_RTOL * target_deg
    return phi, ok


def _zero_resultant_angles(w, u):
    """Angles in [-pi, pi) with power-weighted resultant exactly zero,
    preserving the angular order of ``u``; returns ``(angles, ok)``.

    Tap ``i`` sits at the midpoint of an arc of length ``2 asin(lam pi w_i)``
    with the arcs tiling the circle, so the arc integrals of ``exp(jx)``
    (which sum to zero) are proportional to the tap weights.  Infeasible
    when one tap dominates the power.
    """
    order = np.argsort(u, axis=1)
    ws = np.take_along_axis(w, order, axis=1)
    lam_hi = 1.0 / (math.pi * ws.max(axis=1, keepdims=True))

    def total(lam):
        return np.sum(np.arcsin(np.minimum(lam * math.pi * ws, 1.0)), axis=1, keepdims=True) / math.pi

    ok = (total(lam_hi) >= 1.0)[:, 0]
    lo, hi = np.zeros_like(lam_hi), lam_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        big = total(mid) >= 1.0
        lo, hi = np.where(big, lo, mid), np.where(big, mid, hi)
    arcs = np.arcsin(np.minimum(hi * math.pi * ws, 1.0)) / math.pi
    arcs = arcs / arcs.sum(axis=1, keepdims=True)
    mids = np.cumsum(arcs, axis=1) - 0.5 * arcs
    out = np.empty_like(w)
    np.put_along_axis(out, order, 2.0 * math.pi * mids - math.pi, axis=1)
    return out, ok


def _fit_zenith(w, v, target_deg):
    """Zenith angles in degrees, clipped to [-90, 90]; returns ``(zen, ok)``."""
    clip = lambda a: np.deg2rad(np.clip(a, -90.0, 90.0))
    step = target_deg / _weighted_sd(w, v) / 8.0
    s, ok = _scale_search(v, w, step, target_deg, to_rad=clip)
    zen = np.clip(s[:, None] * v, -90.0, 90.0)
    ok &= np.abs(_spread_deg(np.deg2rad(zen), w) - target_deg) <= SPREAD_RTOL * target_deg
    return zen, ok
