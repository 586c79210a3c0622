"""Measured FR3 outdoor large-scale parameter set.

The embedded dataset covers three scenarios (UMi, UMa, SMa), three sounding
bands (6.9, 8.3 and 14.5 GHz) and two visibility states.  UMa was only
measured in NLOS, and angular statistics exist only for the two upper bands.
Values are transcribed exactly as printed in the consolidated parameter
table; cells that disagree with the accompanying text carry the text value
in ``LinkClassParams.prose`` and questionable cells are flagged ``suspect``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterator, Mapping, Optional

import numpy as np

from .errors import DomainError, MissingData

D0_M = 100.0

AXES = ("SF", "DS", "ASA", "ZSA")


class Scenario(str, Enum):
    UMI = "UMi"
    UMA = "UMa"
    SMA = "SMa"

    @classmethod
    def parse(cls, text) -> "Scenario":
        if isinstance(text, cls):
            return text
        key = str(text).strip().upper()
        for member in cls:
            if member.name == key:
                return member
        raise DomainError(f"unknown scenario {text!r}")

    def __str__(self) -> str:
        return self.name


class Band(Enum):
    B7 = 6.9e9
    B8 = 8.3e9
    B15 = 14.5e9

    @property
    def label(self) -> str:
        return self.name

    @property
    def center_frequency(self) -> float:
        """Sounding frequency in Hz."""
        return self.value

    @classmethod
    def parse(cls, text) -> "Band":
        if isinstance(text, cls):
            return text
        key = str(text).strip().upper()
        if not key.startswith("B"):
            key = "B" + key
        try:
            return cls[key]
        except KeyError:
            raise DomainError(f"unknown band {text!r}") from None

    @classmethod
    def from_frequency(cls, f_hz: float) -> "Band":
        for member in cls:
            if member.value == f_hz:
                return member
        raise DomainError(f"no band at {f_hz} Hz")

    def __str__(self) -> str:
        return self.name


class Visibility(str, Enum):
    LOS = "LOS"
    NLOS = "NLOS"

    @classmethod
    def parse(cls, text) -> "Visibility":
        if isinstance(text, cls):
            return text
        return cls[str(text).strip().upper()]

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LinkClass:
    scenario: Scenario
    band: Band
    visibility: Visibility

    @classmethod
    def of(cls, scenario, band, visibility) -> "LinkClass":
        return cls(Scenario.parse(scenario), Band.parse(band), Visibility.parse(visibility))

    def __str__(self) -> str:
        return f"{self.scenario}-{self.band}-{self.visibility}"

    def __lt__(self, other):  # enums do not order; sort by declaration index
        return _class_index(self) < _class_index(other)


def _class_index(lc: LinkClass) -> tuple[int, int, int]:
    return (list(Band).index(lc.band), list(Scenario).index(lc.scenario),
            list(Visibility).index(lc.visibility))


@dataclass(frozen=True)
class PathLossParams:
    pl0_db: float
    ple: float
    sigma_s_db: float
    d0_m: float = D0_M

    def __post_init__(self):
        if self.d0_m != D0_M:
            raise DomainError("reference distance is fixed at 100 m")
        if not (self.pl0_db > 0 and self.ple > 0 and self.sigma_s_db >= 0):
            raise DomainError(f"invalid path-loss parameters {self}")


@dataclass(frozen=True)
class LogNormalStat:
    """Mean and standard deviation of log10 of a quantity in base units
    (seconds for delay spread, degrees for angular spreads)."""

    mu_log10: float
    sigma_log10: float

    def __post_init__(self):
        if not self.sigma_log10 >= 0:
            raise DomainError("sigma_log10 must be non-negative")


class CrossCorrMatrix:
    """Symmetric 4x4 correlation matrix over (SF, DS, ASA, ZSA).

    Entries for unmeasured axes are NaN and are never handed to the
    generator; ``sub`` returns the dense block for the present axes.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.shape != (4, 4):
            raise DomainError("correlation matrix must be 4x4")
        finite = np.isfinite(m)
        if not np.array_equal(finite, finite.T):
            raise DomainError("mask must be symmetric")
        if not np.allclose(np.where(finite, m, 0.0), np.where(finite, m, 0.0).T, atol=0.0):
            raise DomainError("correlation matrix must be symmetric")
        if np.any(np.abs(m[finite]) > 1.0):
            raise DomainError("correlation entries must lie in [-1, 1]")
        present = np.diag(finite)
        if not np.all(finite[np.ix_(present, present)]):
            raise DomainError("entries among present axes may not be masked")
        if np.any(finite[~present, :]):
            raise DomainError("an absent axis may not carry correlation entries")
        if not np.all(np.diag(m)[present] == 1.0):
            raise DomainError("diagonal must be exactly 1")
        m.setflags(write=False)
        self._m = m

    @classmethod
    def from_pairs(cls, pairs: Mapping[tuple[str, str], float], axes=AXES) -> "CrossCorrMatrix":
        m = np.full((4, 4), np.nan)
        for name in axes:
            i = AXES.index(name)
            m[i, i] = 1.0
        for (a, b), r in pairs.items():
            i, j = AXES.index(a), AXES.index(b)
            m[i, j] = m[j, i] = r
        return cls(m)

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def axes(self) -> tuple[str, ...]:
        return tuple(a for a, d in zip(AXES, np.diag(self._m)) if np.isfinite(d))

    def get(self, a: str, b: str) -> float:
        return float(self._m[AXES.index(a), AXES.index(b)])

    def sub(self, axes=None) -> np.ndarray:
        axes = self.axes if axes is None else tuple(axes)
        idx = [AXES.index(a) for a in axes]
        block = self._m[np.ix_(idx, idx)]
        if not np.all(np.isfinite(block)):
            raise DomainError(f"masked entries among {axes}")
        return block.copy()

    def pairs(self) -> dict[tuple[str, str], float]:
        present = self.axes
        return {(a, b): self.get(a, b)
                for i, a in enumerate(present) for b in present[i + 1:]}

    def __eq__(self, other):
        if not isinstance(other, CrossCorrMatrix):
            return NotImplemented
        return np.array_equal(self._m, other._m, equal_nan=True)

    def __repr__(self):
        return f"CrossCorrMatrix(axes={self.axes}, pairs={self.pairs()})"


@dataclass(frozen=True)
class LinkClassParams:
    link_class: LinkClass
    path_loss: PathLossParams
    ds: LogNormalStat
    corr: CrossCorrMatrix
    cb_mhz: tuple[float, float]
    n_points_thousands: float
    asa: Optional[LogNormalStat] = None
    zsa: Optional[LogNormalStat] = None
    suspect: frozenset = frozenset()
    prose: Mapping[str, float] = field(default_factory=dict)

    @property
    def has_angular(self) -> bool:
        return self.asa is not None and self.zsa is not None

    @property
    def axes(self) -> tuple[str, ...]:
        return AXES if self.has_angular else AXES[:2]


@dataclass(frozen=True)
class Range:
    low: float
    high: float


@dataclass(frozen=True)
class ScenarioMetadata:
    """Descriptive site geometry; nothing in the package branches on it."""

    vegetation_height_m: Range
    building_height_m: Range
    street_length_m: Range
    street_width_m: Range


SCENARIO_METADATA = MappingProxyType({
    Scenario.UMI: ScenarioMetadata(Range(2, 20), Range(2, 200), Range(550, 550), Range(4, 10)),
    Scenario.UMA: ScenarioMetadata(Range(1, 22), Range(2, 90), Range(100, 400), Range(4, 10)),
    Scenario.SMA: ScenarioMetadata(Range(1, 25), Range(2, 35), Range(200, 700), Range(4, 10)),
})


# Column order of each band block: UMi LOS, UMi NLOS, UMa LOS, UMa NLOS, SMa LOS, SMa NLOS.
_COLUMNS = [(s, v) for s in Scenario for v in Visibility]

_ROWS = (
    "pl0_db", "ple", "sigma_s_db", "ds_mu", "ds_sigma", "cb05", "cb09",
    "asa_mu", "asa_sigma", "zsa_mu", "zsa_sigma",
    "r_asa_ds", "r_asa_sf", "r_ds_sf", "r_zsa_sf", "r_zsa_ds", "r_zsa_asa", "n_k",
)

_ = None
_TABLE = {
    Band.B7: (
        (84.6, 104.4, _, 103.0, 45.9, 99.6),
        (2.1, 4.3, _, 6.8, 1.9, 3.8),
        (2.4, 7.1, _, 6.5, 2.5, 6.0),
        (-7.61, -6.77, _, -6.77, -7.75, -7.20),
        (0.44, 0.70, _, 0.38, 0.36, 0.59),
        (8.1, 1.2, _, 1.2, 11.2, 3.2),
        (0.8, 0.1, _, 0.1, 1.1, 0.3),
        (_, _, _, _, _, _),
        (_, _, _, _, _, _),
        (_, _, _, _, _, _),
        (_, _, _, _, _, _),
        (_, _, _, _, _, _),
        (_, _, _, _, _, _),
        (-0.57, 0.15, _, 0.10, -0.62, 0.29),
        (_, _, _, _, _, _),
        (_, _, _, _, _, _),
        (_, _, _, _, _, _),
        (1.0, 4.6, _, 6.4, 0.7, 21.2),
    ),
    Band.B8: (
        (86.2, 108.0, _, 108.6, 40.1, 104.2),
        (2.2, 4.6, _, 7.3, 2.3, 3.9),
        (2.8, 7.3, _, 5.6, 2.9, 7.4),
        (-7.65, -6.63, _, -6.81, -7.67, -7.18),
        (0.44, 0.63, _, 0.41, 0.36, 0.58),
        (8.9, 0.9, _, 1.3, 9.4, 3.0),
        (0.9, 0.1, _, 0.1, 0.9, 0.3),
        (1.62, 1.57, _, 1.71, 1.75, 1.69),
        (0.05, 0.24, _, 0.18, 0.45, 0.51),
        (1.30, 1.26, _, 1.32, 1.31, 1.32),
        (0.02, 0.09, _, 0.06, 0.02, 0.09),
        (0.19, 0.39, _, -0.38, 0.61, 0.50),
        (-0.12, 0.32, _, 0.27, -0.30, 0.25),
        (0.08, 0.04, _, -0.18, -0.45, 0.13),
        (0.09, 0.49, _, 0.67, -0.29, 0.47),
        (-0.15, 0.04, _, -0.66, 0.12, -0.06),
        (0.40, 0.49, _, 0.55, 0.16, 0.36),
        (1.0, 5.7, _, 6.8, 0.8, 22.5),
    ),
    Band.B15: (
        (90.2, 116.6, _, 115.6, 50.8, 45.7),
        (2.5, 4.3, _, 6.5, 2.0, 3.4),
        (3.3, 7.3, _, 6.6, 2.9, 6.7),
        (-7.65, -7.04, _, -7.03, -7.94, -7.46),
        (0.44, 0.79, _, 0.50, 0.45, 0.73),
        (8.9, 2.2, _, 2.1, 17.4, 5.8),
        (0.9, 0.2, _, 0.2, 1.7, 0.6),
        (1.29, 1.34, _, 1.44, 1.07, 1.51),
        (0.15, 0.37, _, 0.30, 0.74, 0.34),
        (0.91, 0.95, _, 0.96, 1.04, 1.03),
        (0.07, 0.18, _, 0.22, 0.08, 0.19),
        (0.79, 0.46, _, 0.49, 0.80, 0.77),
        (0.19, 0.23, _, 0.13, -0.66, 0.21),
        (0.06, 0.17, _, 0.06, -0.27, 0.17),
        (-0.38, -0.14, _, 0.48, 0.08, -0.03),
        (-0.22, 0.20, _, -0.10, 0.15, -0.09),
        (-0.09, 0.22, _, 0.29, 0.09, 0.06),
        (1.5, 7.6, _, 6.7, 1.2, 24.7),
    ),
}
del _

# Values quoted in the running text where they differ from the table.
_PROSE = {
    (Scenario.UMI, Visibility.LOS): {
        "pl0_db": (84.0, 85.2, 89.9), "ple": (2.1, 2.3, 2.5)},
    (Scenario.UMI, Visibility.NLOS): {"pl0_db": (101.7, 106.9, 115.8)},
    (Scenario.SMA, Visibility.LOS): {
        "pl0_db": (43.8, 43.4, 53.4), "ple": (2.0, 2.1, 1.9), "sigma_s_db": (2.3, 2.5, 2.5)},
    (Scenario.SMA, Visibility.NLOS): {
        "pl0_db": (23.5, 26.3, 45.7), "ple": (2.0, 2.1, 1.9), "sigma_s_db": (2.3, 2.5, 2.5)},
}

_SUSPECT = {
    LinkClass(Scenario.SMA, Band.B15, Visibility.NLOS): frozenset({"pl0_db"}),
}

_CORR_ROWS = {
    "r_asa_ds": ("ASA", "DS"), "r_asa_sf": ("ASA", "SF"), "r_ds_sf": ("DS", "SF"),
    "r_zsa_sf": ("ZSA", "SF"), "r_zsa_ds": ("ZSA", "DS"), "r_zsa_asa": ("ZSA", "ASA"),
}


def _build_params(lc: LinkClass, row: Mapping[str, Optional[float]],
                  suspect=frozenset(), prose=None) -> Optional[LinkClassParams]:
    if row["pl0_db"] is None:
        return None
    angular = row["asa_mu"] is not None
    axes = AXES if angular else AXES[:2]
    pairs = {pair: row[key] for key, pair in _CORR_ROWS.items()
             if row[key] is not None and set(pair) <= set(axes)}
    return LinkClassParams(
        link_class=lc,
        path_loss=PathLossParams(row["pl0_db"], row["ple"], row["sigma_s_db"]),
        ds=LogNormalStat(row["ds_mu"], row["ds_sigma"]),
        asa=LogNormalStat(row["asa_mu"], row["asa_sigma"]) if angular else None,
        zsa=LogNormalStat(row["zsa_mu"], row["zsa_sigma"]) if angular else None,
        corr=CrossCorrMatrix.from_pairs(pairs, axes),
        cb_mhz=(row["cb05"], row["cb09"]),
        n_points_thousands=row["n_k"],
        suspect=frozenset(suspect),
        prose=MappingProxyType(dict(prose or {})),
    )


class Registry(Mapping):
    """Immutable mapping from every ``LinkClass`` to its parameters.

    All 18 classes are keys; unmeasured classes map to ``None``.
    """

    def __init__(self, entries: Mapping[LinkClass, Optional[LinkClassParams]]):
        missing = set(all_link_classes()) - set(entries)
        if missing:
            raise DomainError(f"registry lacks {sorted(missing)}")
        self._entries = MappingProxyType(dict(sorted(entries.items())))

    def __getitem__(self, lc):
        return self._entries[lc]

    def __iter__(self) -> Iterator[LinkClass]:
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def populated(self) -> list[LinkClass]:
        return [lc for lc, p in self._entries.items() if p is not None]

    def lookup(self, link_class: LinkClass, require_angular: bool = False) -> LinkClassParams:
        return lookup(self, link_class, require_angular)


def all_link_classes() -> list[LinkClass]:
    return sorted(LinkClass(s, b, v) for b in Band for s in Scenario for v in Visibility)


def load_embedded() -> Registry:
    entries = {}
    for band, block in _TABLE.items():
        for col, (scenario, vis) in enumerate(_COLUMNS):
            lc = LinkClass(scenario, band, vis)
            row = {name: values[col] for name, values in zip(_ROWS, block)}
            entries[lc] = _build_params(lc, row, _SUSPECT.get(lc, ()), load_prose(lc))
    return Registry(entries)


def lookup(registry: Registry, link_class: LinkClass,
           require_angular: bool = False) -> LinkClassParams:
    """Parameters for ``link_class``.

    Raises MissingData for unmeasured classes, and for classes without
    angular statistics when ``require_angular`` is set.
    """
    params = registry[link_class]
    if params is None:
        raise MissingData(link_class, ("path_loss", "ds", "asa", "zsa", "corr"))
    if require_angular and not params.has_angular:
        raise MissingData(link_class, ("asa", "zsa"))
    return params


# -- consistency checks -----------------------------------------------------

CB_TOLERANCE_MHZ = 0.05
FSPL_INTERCEPT_TOLERANCE_DB = 6.0
SIBLING_INTERCEPT_TOLERANCE_DB = 20.0


@dataclass(frozen=True)
class Finding:
    check: str
    link_class: LinkClass
    severity: str  # "ok", "info", "warning"
    message: str
    value: Optional[float] = None


def validate(registry: Registry) -> list[Finding]:
    from .estimators import coherence_bw
    from .pathloss import fspl

    findings = []
    for lc in registry.populated():
        p = registry[lc]
        tau = 10.0 ** p.ds.mu_log10
        for rho, printed in zip((0.5, 0.9), p.cb_mhz):
            cb = coherence_bw(tau, rho) / 1e6
            err = abs(cb - printed)
            ok = err <= CB_TOLERANCE_MHZ + 1e-9
            findings.append(Finding(
                f"cb_rho{rho}", lc, "ok" if ok else "warning",
                f"1/(K*10^{p.ds.mu_log10}) = {cb:.4f} MHz vs printed {printed}", err))

        if lc.visibility is Visibility.LOS:
            free = fspl(D0_M, lc.band.center_frequency)
            gap = p.path_loss.pl0_db - free
            ok = abs(gap) <= FSPL_INTERCEPT_TOLERANCE_DB
            findings.append(Finding(
                "los_intercept_vs_fspl", lc, "ok" if ok else "info",
                f"PL0 {p.path_loss.pl0_db} dB vs free space {free:.2f} dB at 100 m", gap))

        m = p.corr.sub()
        sym = bool(np.array_equal(m, m.T))
        in_range = bool(np.all(np.abs(m) <= 1.0))
        min_eig = float(np.linalg.eigvalsh(m).min())
        ok = sym and in_range and min_eig >= -1e-12
        findings.append(Finding(
            "corr_matrix", lc, "ok" if ok else "warning",
            f"axes {p.corr.axes}: symmetric={sym}, in_range={in_range}, min eigenvalue {min_eig:.4f}",
            min_eig))

        # Median over all bands (this one included) so a single outlier
        # cannot drag the reference and implicate its siblings.
        siblings = [registry[LinkClass(lc.scenario, b, lc.visibility)] for b in Band]
        sib_pl0 = [s.path_loss.pl0_db for s in siblings if s is not None]
        dev = p.path_loss.pl0_db - float(np.median(sib_pl0))
        outlier = len(sib_pl0) > 2 and abs(dev) > SIBLING_INTERCEPT_TOLERANCE_DB
        if outlier or "pl0_db" in p.suspect:
            findings.append(Finding(
                "suspect_cell", lc, "warning",
                f"PL0 {p.path_loss.pl0_db} dB vs median {np.median(sib_pl0)} dB across bands", dev))
    return findings


# -- serialization ------------------------------------------------------------

CSV_FIELDS = ("scenario", "band", "vis", "pl0_db", "d0_m", "ple", "sigma_s_db",
              "ds_mu", "ds_sigma", "cb05", "cb09", "asa_mu", "asa_sigma", "zsa_mu", "zsa_sigma",
              "r_asa_ds", "r_asa_sf", "r_ds_sf", "r_zsa_sf", "r_zsa_ds", "r_zsa_asa",
              "n_k", "suspect")
NULL = "null"


def _fmt(x) -> str:
    return NULL if x is None else repr(float(x))


def _row(lc: LinkClass, p: Optional[LinkClassParams]) -> dict[str, str]:
    row = {"scenario": lc.scenario.name, "band": lc.band.label, "vis": lc.visibility.value}
    if p is None:
        row.update({k: NULL for k in CSV_FIELDS[3:]})
        return row
    pl = p.path_loss
    row.update(pl0_db=_fmt(pl.pl0_db), d0_m=_fmt(pl.d0_m), ple=_fmt(pl.ple),
               sigma_s_db=_fmt(pl.sigma_s_db), ds_mu=_fmt(p.ds.mu_log10),
               ds_sigma=_fmt(p.ds.sigma_log10), cb05=_fmt(p.cb_mhz[0]), cb09=_fmt(p.cb_mhz[1]),
               asa_mu=_fmt(p.asa and p.asa.mu_log10), asa_sigma=_fmt(p.asa and p.asa.sigma_log10),
               zsa_mu=_fmt(p.zsa and p.zsa.mu_log10), zsa_sigma=_fmt(p.zsa and p.zsa.sigma_log10),
               n_k=_fmt(p.n_points_thousands), suspect=";".join(sorted(p.suspect)) or NULL)
    for key, (a, b) in _CORR_ROWS.items():
        r = p.corr.get(a, b)
        row[key] = NULL if math.isnan(r) else repr(r)
    return row


def to_csv(registry: Registry) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for lc in registry:
        writer.writerow(_row(lc, registry[lc]))
    return buf.getvalue()


def from_csv(text: str) -> Registry:
    entries = {}
    for raw in csv.DictReader(io.StringIO(text)):
        lc = LinkClass.of(raw["scenario"], raw["band"], raw["vis"])
        row = {k: (None if raw[k].strip().lower() == NULL else raw[k]) for k in CSV_FIELDS[3:]}
        if row.get("d0_m") is not None and float(row["d0_m"]) != D0_M:
            raise DomainError(f"{lc}: d0_m must be 100")
        suspect = row.pop("suspect")
        nums = {k: None if v is None else float(v) for k, v in row.items()}
        entries[lc] = _build_params(lc, nums, suspect.split(";") if suspect else (), load_prose(lc))
    return Registry(entries)


def load_prose(lc: LinkClass) -> dict[str, float]:
    band_idx = list(Band).index(lc.band)
    block = _TABLE[lc.band]
    col = _COLUMNS.index((lc.scenario, lc.visibility))
    table_row = {name: values[col] for name, values in zip(_ROWS, block)}
    prose = {k: v[band_idx] for k, v in _PROSE.get((lc.scenario, lc.visibility), {}).items()}
    return {k: v for k, v in prose.items() if v != table_row[k]}
