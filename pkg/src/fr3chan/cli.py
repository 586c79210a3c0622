"""Command-line interface: ``fr3chan <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import warnings
from typing import Optional, Sequence

from . import estimators as est
from . import pipeline as pl
from .errors import Fr3ChanError, MissingData, SuspectDataWarning
from .lsp import DEFAULT_DECORRELATION_M, SpatialModel
from .padp import DEFAULT_N_TAPS
from .pathloss import DEFAULT_EIRP_DBM, LinkBudget
from .registry import LinkClass, load_embedded, to_csv, validate


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _link_class(args) -> LinkClass:
    return LinkClass.of(args.scenario, args.band, args.visibility)


def _spatial(args) -> SpatialModel:
    return SpatialModel(args.decorr_m)


def _read_route(path: str):
    with open(path, newline="") as fh:
        return [pl.RoutePoint(float(r["x_m"]), float(r["y_m"]), (r.get("vis") or "").strip() or None)
                for r in csv.DictReader(fh)]


# -- commands ---------------------------------------------------------------------

def cmd_table(args) -> int:
    registry = load_embedded()
    if not args.validate:
        _emit(to_csv(registry), args.out)
        return 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("check", "link_class", "severity", "value", "message"))
    for f in validate(registry):
        w.writerow((f.check, str(f.link_class), f.severity,
                    "" if f.value is None else repr(float(f.value)), f.message))
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_generate(args) -> int:
    if not args.out or args.out == "-":
        raise ValueError("generate needs --out (tap files are written next to it)")
    lc = _link_class(args)
    route = (_read_route(args.route) if args.route
             else pl.synthetic_route(args.n, args.seed, tx_height_m=args.tx_h_m, bin_m=args.bin_m))
    records = pl.simulate_route((0.0, 0.0), args.tx_h_m, route, lc, load_embedded(),
                                _spatial(args), args.seed, n_taps=args.n_taps,
                                with_taps=not args.no_taps,
                                emulate_limits=args.emulate_measurement_limits,
                                dynamic_range_db=args.dyn_range_db)
    taps_dir = None
    if not args.no_taps:
        taps_dir = args.taps_dir or os.path.splitext(args.out)[0] + "_taps"
    pl.write_records(records, args.out, taps_dir)
    return 0


def cmd_estimate(args) -> int:
    records = pl.read_records(args.records)
    report = pl.extract_report(records, args.scenario, bin_m=args.bin_m,
                               dynamic_range_db=args.dyn_range_db)
    _emit(report.to_csv(), args.out)
    return 0


def cmd_roundtrip(args) -> int:
    registry = load_embedded()
    classes = registry.populated() if args.all else [_link_class(args)]
    tol = None if args.tol is None else args.tol
    text, ok = [], True
    for i, lc in enumerate(classes):
        diff = pl.roundtrip(lc, args.n, args.seed, tol, registry, _spatial(args),
                            emulate_limits=not args.no_emulate_zsa_limit,
                            n_taps=args.n_taps, dynamic_range_db=args.dyn_range_db,
                            bin_m=args.bin_m)
        csv_text = diff.to_csv()
        text.append(csv_text if i == 0 else csv_text.split("\n", 1)[1])
        ok &= diff.passed
    _emit("".join(text), args.out)
    return 0 if ok else 1


def cmd_coverage(args) -> int:
    extent = args.extent_m if args.bbox is None else tuple(args.bbox)
    text = pl.coverage_grid((0.0, 0.0), extent, args.resolution_m, _link_class(args),
                            load_embedded(), args.seed, spatial=_spatial(args),
                            budget=LinkBudget(eirp_dbm=args.eirp_dbm), tx_height_m=args.tx_h_m,
                            shadowing=not args.no_shadowing)
    _emit(text, args.out)
    return 0


def cmd_plotdata(args) -> int:
    records = pl.read_records(args.records)
    os.makedirs(args.out_dir, exist_ok=True)
    for name, text in pl.plot_data(records, bin_m=args.bin_m,
                                   dynamic_range_db=args.dyn_range_db).items():
        with open(os.path.join(args.out_dir, name), "w", newline="") as fh:
            fh.write(text)
    return 0


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=str.lower, choices=("umi", "uma", "sma"), default="umi")
    common.add_argument("--band", choices=("7", "8", "15"), default="7")
    vis = common.add_mutually_exclusive_group()
    vis.add_argument("--los", dest="visibility", action="store_const", const="LOS")
    vis.add_argument("--nlos", dest="visibility", action="store_const", const="NLOS")
    common.set_defaults(visibility="LOS")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--n", type=int, default=10_000, help="number of route points / links")
    common.add_argument("--bin-m", type=float, default=pl.DEFAULT_BIN_M)
    common.add_argument("--dyn-range-db", type=float, default=est.DEFAULT_DYNAMIC_RANGE_DB)
    common.add_argument("--decorr-m", type=float, default=DEFAULT_DECORRELATION_M)
    common.add_argument("--emulate-measurement-limits", action="store_true",
                        help="cap generated ZSA at the sounder's measurable maximum")
    common.add_argument("--n-taps", type=int, default=DEFAULT_N_TAPS)
    common.add_argument("--tx-h-m", type=float, default=pl.DEFAULT_TX_HEIGHT_M)
    common.add_argument("--out", "-o", default=None, help="output file (default stdout)")

    p = argparse.ArgumentParser(prog="fr3chan", description="FR3 statistical channel model toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("table", parents=[common], help="dump the parameter registry")
    s.add_argument("--validate", action="store_true", help="print consistency findings instead")
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("generate", parents=[common], help="simulate a drive route to a records CSV")
    s.add_argument("--route", help="CSV with x_m, y_m[, vis]; default is a synthetic route")
    s.add_argument("--taps-dir", help="directory for per-record tap CSVs")
    s.add_argument("--no-taps", action="store_true")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("estimate", parents=[common], help="records CSV to a scenario report")
    s.add_argument("records")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("roundtrip", parents=[common], help="simulate, re-estimate and diff")
    s.add_argument("--all", action="store_true", help="every populated link class")
    s.add_argument("--tol", type=float, help="one tolerance applied to every parameter")
    s.add_argument("--no-emulate-zsa-limit", action="store_true")
    s.set_defaults(func=cmd_roundtrip)

    s = sub.add_parser("coverage", parents=[common], help="path-loss raster CSV")
    s.add_argument("--extent-m", type=float, default=1000.0)
    s.add_argument("--bbox", type=float, nargs=4, metavar=("XMIN", "YMIN", "XMAX", "YMAX"))
    s.add_argument("--resolution-m", type=float, default=10.0)
    s.add_argument("--eirp-dbm", type=float, default=DEFAULT_EIRP_DBM)
    s.add_argument("--no-shadowing", action="store_true")
    s.set_defaults(func=cmd_coverage)

    s = sub.add_parser("plotdata", parents=[common], help="probability-plot and vs-distance CSVs")
    s.add_argument("records")
    s.add_argument("--out-dir", default="plotdata")
    s.set_defaults(func=cmd_plotdata)
    return p


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"fr3chan: warning: {message}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", SuspectDataWarning)
            warnings.showwarning = _show_warning
            return args.func(args)
    except MissingData as exc:
        print(f"fr3chan: {exc}", file=sys.stderr)
        return 2
    except (Fr3ChanError, ValueError, OSError) as exc:
        print(f"fr3chan: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
