"""Measurement records, binning, route simulation and report extraction.

Everything here composes the lower modules.  CSV is the interchange format
for records, tap profiles, reports, diff reports and coverage grids; floats
are written with ``repr`` so a write/read cycle is lossless.
"""
from __future__ import annotations

import csv
import io
import math
import os
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy.special import ndtr

from . import estimators as est
from .errors import DegenerateFit, DomainError, MissingData, SuspectDataWarning
from .lsp import (LspVector, SpatialModel, correlated_field, draw_route_lsp,
                  stream_key, _normal_rows)
from .padp import MAX_ASA_DEG, MAX_ZSA_DEG, DEFAULT_N_TAPS, Padp, link_seed, synth_padp_batch
from .pathloss import LinkBudget, path_loss, received_power
from .registry import (AXES, D0_M, Band, CrossCorrMatrix, LinkClass, LogNormalStat, PathLossParams,
                       Registry, Visibility, load_embedded, lookup)

DEFAULT_BIN_M = 2.0
DEFAULT_TX_HEIGHT_M = 25.0
ROUTE_MIN_M = 50.0
ROUTE_MAX_M = 1000.0

_PURPOSE_ROUTE = 0x80


# -- records ----------------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementRecord:
    rx_xy_m: tuple[float, float]
    tx_xy_m: tuple[float, float]
    tx_height_m: float
    band: Band
    visibility: Visibility
    pl_db: float
    taps: Optional[Padp] = field(default=None, compare=False)
    taps_file: Optional[str] = None
    lsp: Optional[LspVector] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not math.isfinite(self.pl_db):
            raise DomainError("pl_db must be finite")
        if self.distance_m(use_3d=False) == 0 and not self.tx_height_m:
            raise DomainError("receiver coincides with transmitter")

    def distance_m(self, use_3d: bool = True) -> float:
        """TX-RX separation; 3-D adds the TX height above the receiver."""
        dx = self.rx_xy_m[0] - self.tx_xy_m[0]
        dy = self.rx_xy_m[1] - self.tx_xy_m[1]
        h = (self.tx_height_m or 0.0) if use_3d else 0.0
        return math.sqrt(dx * dx + dy * dy + h * h)

    def bin_key(self, bin_m: float = DEFAULT_BIN_M) -> tuple[int, int]:
        return bin_key(self.rx_xy_m, bin_m)

    def _sort_key(self):
        return (self.pl_db, self.rx_xy_m, self.tx_xy_m, self.tx_height_m,
                self.band.value, self.visibility.value, self.taps_file or "")


def bin_key(xy, bin_m: float = DEFAULT_BIN_M) -> tuple[int, int]:
    return (math.floor(xy[0] / bin_m), math.floor(xy[1] / bin_m))


def bin_records(records: Iterable[MeasurementRecord],
                bin_m: float = DEFAULT_BIN_M) -> list[MeasurementRecord]:
    """One representative per square bin: the record with the median path
    loss (lower median for even counts).  Output is sorted by bin index."""
    if not bin_m > 0:
        raise DomainError("bin size must be positive")
    bins: dict[tuple[int, int], list[MeasurementRecord]] = {}
    for r in records:
        bins.setdefault(r.bin_key(bin_m), []).append(r)
    out = []
    for key in sorted(bins):
        members = sorted(bins[key], key=MeasurementRecord._sort_key)
        out.append(members[(len(members) - 1) // 2])
    return out


RECORD_FIELDS = ("rx_x_m", "rx_y_m", "tx_x_m", "tx_y_m", "tx_h_m", "band", "vis", "pl_db",
                 "taps_file")


def write_records(records: Sequence[MeasurementRecord], path: str,
                  taps_dir: Optional[str] = None) -> None:
    """Write a records CSV; tap profiles go to ``taps_dir`` (one CSV each,
    referenced relative to the records file)."""
    base = os.path.dirname(os.path.abspath(path))
    if taps_dir is not None:
        os.makedirs(taps_dir, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_FIELDS)
        for i, r in enumerate(records):
            ref = r.taps_file or ""
            if r.taps is not None and taps_dir is not None:
                tpath = os.path.join(taps_dir, f"taps_{i:06d}.csv")
                with open(tpath, "w", newline="") as th:
                    th.write(r.taps.to_csv())
                ref = os.path.relpath(tpath, base)
            w.writerow([repr(float(r.rx_xy_m[0])), repr(float(r.rx_xy_m[1])),
                        repr(float(r.tx_xy_m[0])), repr(float(r.tx_xy_m[1])),
                        repr(float(r.tx_height_m)), r.band.label, r.visibility.value,
                        repr(float(r.pl_db)), ref])


def read_records(path: str, load_taps: bool = True) -> list[MeasurementRecord]:
    base = os.path.dirname(os.path.abspath(path))
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ref = (row.get("taps_file") or "").strip() or None
            taps = None
            if ref and load_taps:
                with open(os.path.join(base, ref)) as th:
                    taps = Padp.from_csv(th.read())
            h = (row.get("tx_h_m") or "").strip()
            out.append(MeasurementRecord(
                (float(row["rx_x_m"]), float(row["rx_y_m"])),
                (float(row["tx_x_m"]), float(row["tx_y_m"])),
                float(h) if h else 0.0, Band.parse(row["band"]), Visibility.parse(row["vis"]),
                float(row["pl_db"]), taps, ref))
    return out


# -- simulation -------------------------------------------------------------------

@dataclass(frozen=True)
class RoutePoint:
    x_m: float
    y_m: float
    visibility: Optional[Visibility] = None


def _warn_if_suspect(params):
    if params.suspect:
        warnings.warn(f"{params.link_class}: generating from suspect cell(s) "
                      f"{sorted(params.suspect)}", SuspectDataWarning, stacklevel=3)


def simulate_route(tx_xy, tx_height_m: float, route: Sequence, link_class: LinkClass,
                   registry: Optional[Registry] = None, spatial: Optional[SpatialModel] = None,
                   seed: int = 0, *, n_taps: int = DEFAULT_N_TAPS, with_taps: bool = True,
                   emulate_limits: bool = False, dynamic_range_db: float = est.DEFAULT_DYNAMIC_RANGE_DB,
                   use_3d: bool = True, sf_override_db: Optional[float] = None
                   ) -> list[MeasurementRecord]:
    """Emulate a drive test along ``route``.

    ``route`` items are ``RoutePoint`` or ``(x, y[, visibility])`` tuples;
    points without a visibility flag take ``link_class.visibility``.  The
    standardised SF process is shared by all visibility states along the
    route, each state scaling it with its own parameters.  Tap profiles for
    point ``k`` come from sub-seed ``link_seed(seed, k)``.
    """
    registry = registry or load_embedded()
    spatial = spatial or SpatialModel()
    pts = [p if isinstance(p, RoutePoint) else RoutePoint(*p) for p in route]
    if not pts:
        raise DomainError("route must contain at least one position")
    vis = [Visibility.parse(p.visibility) if p.visibility is not None else link_class.visibility
           for p in pts]
    xy = np.array([(p.x_m, p.y_m) for p in pts], dtype=float)
    tx = (float(tx_xy[0]), float(tx_xy[1]))

    n = len(pts)
    sf = np.empty(n)
    ds = np.empty(n)
    asa = np.full(n, np.nan)
    zsa = np.full(n, np.nan)
    pl = np.empty(n)
    params_by_vis = {}
    for v in sorted(set(vis), key=lambda v: v.value):
        lc = LinkClass(link_class.scenario, link_class.band, v)
        params = lookup(registry, lc)
        _warn_if_suspect(params)
        params_by_vis[v] = params
        draws = draw_route_lsp(params, xy, spatial, seed, emulate_limits=emulate_limits)
        sel = np.array([x is v for x in vis])
        sf[sel] = draws.sf_db[sel]
        ds[sel] = draws.ds_log10[sel]
        if draws.asa_log10 is not None:
            asa[sel] = draws.asa_log10[sel]
            zsa[sel] = draws.zsa_log10[sel]
    if sf_override_db is not None:
        sf[:] = sf_override_db

    recs_geom = [MeasurementRecord(tuple(p), tx, tx_height_m, link_class.band, v, 0.0)
                 for p, v in zip(xy, vis)]
    dist = np.array([r.distance_m(use_3d) for r in recs_geom])
    for k, v in enumerate(vis):
        pl[k] = path_loss(params_by_vis[v].path_loss, dist[k], sf[k])

    taps: list[Optional[Padp]] = [None] * n
    if with_taps:
        angular = bool(np.all(np.isfinite(asa)))
        asa_t = np.minimum(10.0 ** asa, MAX_ASA_DEG) if angular else None
        zsa_t = np.minimum(10.0 ** zsa, MAX_ZSA_DEG) if angular else None
        taps = synth_padp_batch(10.0 ** ds, asa_t, zsa_t, n_taps,
                                [link_seed(seed, k) for k in range(n)], dynamic_range_db,
                                [{"index": k} for k in range(n)])

    out = []
    for k, r in enumerate(recs_geom):
        lsp = LspVector(float(sf[k]), float(ds[k]),
                        None if math.isnan(asa[k]) else float(asa[k]),
                        None if math.isnan(zsa[k]) else float(zsa[k]))
        out.append(replace(r, pl_db=float(pl[k]), taps=taps[k], lsp=lsp))
    return out


def synthetic_route(n: int, seed: int, tx_xy=(0.0, 0.0), tx_height_m: float = DEFAULT_TX_HEIGHT_M,
                    d_min_m: float = ROUTE_MIN_M, d_max_m: float = ROUTE_MAX_M,
                    bin_m: float = DEFAULT_BIN_M) -> list[tuple[float, float]]:
    """``n`` receiver positions with log-uniform 3-D distance and uniform
    bearing, each snapped to the centre of a distinct bin so that binning
    keeps every point."""
    if n < 1:
        raise DomainError("route needs at least one point")
    key = stream_key(seed, _PURPOSE_ROUTE)
    taken = set()
    out = []
    start = 0
    while len(out) < n:
        batch = max(2 * (n - len(out)), 16)
        u = _normal_rows(key, start, batch, width=2)
        start += batch
        u = ndtr(u)
        d3 = d_min_m * (d_max_m / d_min_m) ** u[:, 0]
        d2 = np.sqrt(np.maximum(d3 ** 2 - tx_height_m ** 2, 0.0))
        theta = 2.0 * math.pi * u[:, 1]
        for x, y in zip(tx_xy[0] + d2 * np.cos(theta), tx_xy[1] + d2 * np.sin(theta)):
            k = bin_key((x, y), bin_m)
            if k in taken:
                continue
            taken.add(k)
            out.append(((k[0] + 0.5) * bin_m, (k[1] + 0.5) * bin_m))
            if len(out) == n:
                break
    return out


# -- reports --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioReport:
    link_class: LinkClass
    path_loss_fit: PathLossParams
    n_bins: int
    ds_stat: Optional[LogNormalStat] = None
    asa_stat: Optional[LogNormalStat] = None
    zsa_stat: Optional[LogNormalStat] = None
    cb_mhz: Optional[tuple[float, float]] = None
    corr: Optional[CrossCorrMatrix] = None

    def to_csv(self) -> str:
        rows = [("scenario", self.link_class.scenario.name), ("band", self.link_class.band.label),
                ("vis", self.link_class.visibility.value), ("n_bins", str(self.n_bins)),
                ("pl0_db", repr(self.path_loss_fit.pl0_db)), ("ple", repr(self.path_loss_fit.ple)),
                ("sigma_s_db", repr(self.path_loss_fit.sigma_s_db))]
        for name, stat in (("ds", self.ds_stat), ("asa", self.asa_stat), ("zsa", self.zsa_stat)):
            rows.append((f"{name}_mu", "null" if stat is None else repr(stat.mu_log10)))
            rows.append((f"{name}_sigma", "null" if stat is None else repr(stat.sigma_log10)))
        cb = self.cb_mhz or (None, None)
        rows += [("cb05_mhz", "null" if cb[0] is None else repr(cb[0])),
                 ("cb09_mhz", "null" if cb[1] is None else repr(cb[1]))]
        for i, a in enumerate(AXES):
            for b in AXES[i + 1:]:
                r = math.nan if self.corr is None else self.corr.get(a, b)
                rows.append((f"r_{a.lower()}_{b.lower()}", "null" if math.isnan(r) else repr(r)))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("field", "value"))
        w.writerows(rows)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScenarioReport":
        kv = {r["field"]: r["value"] for r in csv.DictReader(io.StringIO(text))}
        num = lambda k: None if kv[k] == "null" else float(kv[k])
        stat = lambda n: (None if num(f"{n}_mu") is None
                          else LogNormalStat(num(f"{n}_mu"), num(f"{n}_sigma")))
        pairs = {}
        axes = set()
        for i, a in enumerate(AXES):
            for b in AXES[i + 1:]:
                r = num(f"r_{a.lower()}_{b.lower()}")
                if r is not None:
                    pairs[(a, b)] = r
                    axes |= {a, b}
        corr = CrossCorrMatrix.from_pairs(pairs, [a for a in AXES if a in axes]) if pairs else None
        cb = None if num("cb05_mhz") is None else (num("cb05_mhz"), num("cb09_mhz"))
        return cls(LinkClass.of(kv["scenario"], kv["band"], kv["vis"]),
                   PathLossParams(num("pl0_db"), num("ple"), num("sigma_s_db")),
                   int(kv["n_bins"]), stat("ds"), stat("asa"), stat("zsa"), cb, corr)


@dataclass
class RecordStatistics:
    """Per-bin quantities behind a report (also what ``plotdata`` emits)."""

    distance_m: np.ndarray
    pl_db: np.ndarray
    sf_db: np.ndarray
    ds_s: Optional[np.ndarray] = None
    asa_deg: Optional[np.ndarray] = None
    zsa_deg: Optional[np.ndarray] = None


def record_statistics(records: Sequence[MeasurementRecord], *, bin_m: float = DEFAULT_BIN_M,
                      dynamic_range_db: float = est.DEFAULT_DYNAMIC_RANGE_DB,
                      use_3d: bool = True) -> tuple[RecordStatistics, tuple[float, float, float]]:
    binned = bin_records(records, bin_m)
    if len(binned) < 2:
        raise DegenerateFit("need at least two binned records")
    d = np.array([r.distance_m(use_3d) for r in binned])
    pl = np.array([r.pl_db for r in binned])
    fit = est.fit_path_loss(np.column_stack([d, pl]), D0_M)
    sf = est.path_loss_residuals(np.column_stack([d, pl]), fit[0], fit[1], D0_M)
    stats = RecordStatistics(d, pl, sf)
    if all(r.taps is not None for r in binned):
        profiles = [est.threshold_taps(r.taps, dynamic_range_db) for r in binned]
        stats.ds_s = np.array([est.rms_delay_spread(p) for p in profiles])
        if all(p.has_angles for p in profiles):
            stats.asa_deg = np.array([est.angular_spread(p.azimuths_deg, p.powers_lin)
                                      for p in profiles])
            stats.zsa_deg = np.array([est.angular_spread(p.zeniths_deg, p.powers_lin)
                                      for p in profiles])
    return stats, fit


def extract_report(records: Sequence[MeasurementRecord], scenario=None, *,
                   bin_m: float = DEFAULT_BIN_M,
                   dynamic_range_db: float = est.DEFAULT_DYNAMIC_RANGE_DB,
                   use_3d: bool = True) -> ScenarioReport:
    """Bin, fit path loss, and summarise spreads and cross-correlations.

    Records must share band and visibility; ``scenario`` labels the report
    (it is not part of the record schema).  Records without taps yield a
    path-loss-only report.
    """
    records = list(records)
    if not records:
        raise DegenerateFit("no records")
    bands = {r.band for r in records}
    vis = {r.visibility for r in records}
    if len(bands) != 1 or len(vis) != 1:
        raise DomainError("records mix bands or visibility states")
    from .registry import Scenario
    lc = LinkClass(Scenario.parse(scenario) if scenario is not None else Scenario.UMI,
                   bands.pop(), vis.pop())
    stats, (pl0, ple, sigma) = record_statistics(records, bin_m=bin_m,
                                                 dynamic_range_db=dynamic_range_db, use_3d=use_3d)
    report = dict(link_class=lc, path_loss_fit=PathLossParams(pl0, ple, sigma),
                  n_bins=len(stats.sf_db))
    if stats.ds_s is not None:
        ds = est.fit_lognormal(stats.ds_s)
        tau = 10.0 ** ds.mu_log10
        report.update(ds_stat=ds, cb_mhz=(est.coherence_bw(tau, 0.5) / 1e6,
                                          est.coherence_bw(tau, 0.9) / 1e6))
        series = {"SF": stats.sf_db, "DS": np.log10(stats.ds_s)}
        if stats.asa_deg is not None:
            report.update(asa_stat=est.fit_lognormal(stats.asa_deg),
                          zsa_stat=est.fit_lognormal(stats.zsa_deg))
            series.update(ASA=np.log10(stats.asa_deg), ZSA=np.log10(stats.zsa_deg))
        report["corr"] = est.corr_matrix(series)
    return ScenarioReport(**report)


# -- round trip -------------------------------------------------------------------------

DEFAULT_TOLERANCES = {
    "pl0_db": 0.5, "ple": 0.05, "sigma_s_db": 0.2,
    "ds_mu": 0.03, "ds_sigma": 0.03,
    "asa_mu": 0.04, "asa_sigma": 0.04, "zsa_mu": 0.04, "zsa_sigma": 0.04,
    "corr": 0.06,
}


@dataclass(frozen=True)
class DiffRow:
    parameter: str
    reference: float
    recovered: float
    tolerance: float

    @property
    def error(self) -> float:
        return self.recovered - self.reference

    @property
    def passed(self) -> bool:
        return abs(self.error) <= self.tolerance


@dataclass(frozen=True)
class DiffReport:
    link_class: LinkClass
    rows: tuple[DiffRow, ...] = ()
    notes: tuple[str, ...] = ()
    report: Optional[ScenarioReport] = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[DiffRow]:
        return [r for r in self.rows if not r.passed]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("link_class", "parameter", "reference", "recovered", "error", "tolerance",
                    "passed"))
        for r in self.rows:
            w.writerow((str(self.link_class), r.parameter, repr(r.reference), repr(r.recovered),
                        repr(r.error), repr(r.tolerance), "pass" if r.passed else "fail"))
        for note in self.notes:
            w.writerow((str(self.link_class), "note", "", "", "", "", note))
        return buf.getvalue()


def roundtrip(link_class: LinkClass, n: int = 10_000, seed: int = 0,
              tolerances: Optional[dict] = None, registry: Optional[Registry] = None,
              spatial: Optional[SpatialModel] = None, *, emulate_limits: bool = True,
              tx_height_m: float = DEFAULT_TX_HEIGHT_M, n_taps: int = DEFAULT_N_TAPS,
              dynamic_range_db: float = est.DEFAULT_DYNAMIC_RANGE_DB,
              bin_m: float = DEFAULT_BIN_M) -> DiffReport:
    """Simulate ``n`` links of one class, re-estimate, and diff against the
    registry.  A class without data gives an empty (passing) report with a
    note; failures are data, never exceptions."""
    registry = registry or load_embedded()
    if isinstance(tolerances, (int, float)):
        tol = {k: float(tolerances) for k in DEFAULT_TOLERANCES}
    else:
        tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    try:
        params = lookup(registry, link_class)
    except MissingData as exc:
        return DiffReport(link_class, notes=(f"MissingData: {exc}",))

    route = synthetic_route(n, seed, tx_height_m=tx_height_m, bin_m=bin_m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SuspectDataWarning)
        records = simulate_route((0.0, 0.0), tx_height_m, route, link_class, registry, spatial, seed,
                                 n_taps=n_taps, emulate_limits=emulate_limits,
                                 dynamic_range_db=dynamic_range_db)
    rep = extract_report(records, link_class.scenario, bin_m=bin_m,
                         dynamic_range_db=dynamic_range_db)

    rows = [DiffRow("pl0_db", params.path_loss.pl0_db, rep.path_loss_fit.pl0_db, tol["pl0_db"]),
            DiffRow("ple", params.path_loss.ple, rep.path_loss_fit.ple, tol["ple"]),
            DiffRow("sigma_s_db", params.path_loss.sigma_s_db, rep.path_loss_fit.sigma_s_db,
                    tol["sigma_s_db"])]
    for name in ("ds", "asa", "zsa"):
        ref, got = getattr(params, name), getattr(rep, f"{name}_stat")
        if ref is None:
            continue
        rows.append(DiffRow(f"{name}_mu", ref.mu_log10, got.mu_log10, tol[f"{name}_mu"]))
        rows.append(DiffRow(f"{name}_sigma", ref.sigma_log10, got.sigma_log10, tol[f"{name}_sigma"]))
    for (a, b), r in params.corr.pairs().items():
        rows.append(DiffRow(f"r_{a.lower()}_{b.lower()}", r, rep.corr.get(a, b), tol["corr"]))
    notes = ()
    if params.suspect:
        notes = (f"suspect cell(s): {', '.join(sorted(params.suspect))}",)
    return DiffReport(link_class, tuple(rows), notes, rep)


# -- coverage ---------------------------------------------------------------------------

GRID_FIELDS = ("x_m", "y_m", "d_m", "pl_db", "rsrp_dbm")

Extent = Union[float, tuple[float, float, float, float]]


def coverage_grid(tx_xy, extent_m: Extent, resolution_m: float, link_class: LinkClass,
                  registry: Optional[Registry] = None, seed: int = 0,
                  visibility_mask: Union[None, Callable, np.ndarray] = None, *,
                  spatial: Optional[SpatialModel] = None, budget: Optional[LinkBudget] = None,
                  tx_height_m: float = 0.0, shadowing: bool = True, use_3d: bool = True) -> str:
    """Path-loss / received-power raster as CSV.

    ``extent_m`` is either the side of a square centred on the transmitter
    or an ``(x_min, y_min, x_max, y_max)`` box.  Cells are
    ``resolution_m`` squares reported at their centres.  Shadow fading is a
    separable exponentially correlated field.  The cell containing the
    transmitter has null path loss.
    """
    if not resolution_m > 0:
        raise DomainError("resolution must be positive")
    registry = registry or load_embedded()
    spatial = spatial or SpatialModel()
    budget = budget or LinkBudget()
    if isinstance(extent_m, (int, float)):
        if not extent_m > 0:
            raise DomainError("extent must be positive")
        half = extent_m / 2.0
        box = (tx_xy[0] - half, tx_xy[1] - half, tx_xy[0] + half, tx_xy[1] + half)
    else:
        box = tuple(float(v) for v in extent_m)
        if not (box[2] > box[0] and box[3] > box[1]):
            raise DomainError("extent must be positive")
    nx = max(1, int(round((box[2] - box[0]) / resolution_m)))
    ny = max(1, int(round((box[3] - box[1]) / resolution_m)))
    xs = box[0] + (np.arange(nx) + 0.5) * resolution_m
    ys = box[1] + (np.arange(ny) + 0.5) * resolution_m
    field_ = correlated_field((ny, nx), resolution_m, spatial, seed) if shadowing else np.zeros((ny, nx))

    params = {}
    for v in Visibility:
        try:
            params[v] = lookup(registry, LinkClass(link_class.scenario, link_class.band, v))
        except MissingData:
            pass
    if link_class.visibility not in params:
        lookup(registry, link_class)
    _warn_if_suspect(params[link_class.visibility])

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GRID_FIELDS)
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            if visibility_mask is None:
                vis = link_class.visibility
            elif callable(visibility_mask):
                vis = Visibility.parse(visibility_mask(x, y))
            else:
                vis = Visibility.parse(visibility_mask[iy][ix])
            p = params.get(vis)
            if p is None:
                raise MissingData(LinkClass(link_class.scenario, link_class.band, vis), ("path_loss",))
            dx, dy = x - tx_xy[0], y - tx_xy[1]
            h = tx_height_m if use_3d else 0.0
            d = math.sqrt(dx * dx + dy * dy + h * h)
            half = resolution_m / 2
            contains_tx = -half <= dx < half and -half <= dy < half
            if contains_tx:
                w.writerow((repr(float(x)), repr(float(y)), repr(d), "null", "null"))
                continue
            pl = float(path_loss(p.path_loss, d, p.path_loss.sigma_s_db * field_[iy, ix]))
            w.writerow((repr(float(x)), repr(float(y)), repr(d), repr(pl),
                        repr(received_power(budget, pl))))
    return buf.getvalue()


# -- plot data ---------------------------------------------------------------------------

def plot_data(records: Sequence[MeasurementRecord], *, bin_m: float = DEFAULT_BIN_M,
              dynamic_range_db: float = est.DEFAULT_DYNAMIC_RANGE_DB) -> dict[str, str]:
    """CSV texts for probability plots and per-bin quantity-vs-distance."""
    stats, _ = record_statistics(records, bin_m=bin_m, dynamic_range_db=dynamic_range_db)
    series = {"sf_db": stats.sf_db}
    if stats.ds_s is not None:
        series["ds_log10"] = np.log10(stats.ds_s)
    if stats.asa_deg is not None:
        series["asa_log10"] = np.log10(stats.asa_deg)
        series["zsa_log10"] = np.log10(stats.zsa_deg)
    out = {}
    for name, values in series.items():
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("normal_quantile", name))
        for q, v in est.probability_plot(values):
            w.writerow((repr(q), repr(v)))
        out[f"probplot_{name}.csv"] = buf.getvalue()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("d_m", "pl_db", *series))
    for k in range(len(stats.distance_m)):
        w.writerow((repr(float(stats.distance_m[k])), repr(float(stats.pl_db[k])),
                    *(repr(float(v[k])) for v in series.values())))
    out["vs_distance.csv"] = buf.getvalue()
    return out
