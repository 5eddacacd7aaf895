"""Command-line pipeline: simulate, validate, build, fit, features, detect.

Configuration precedence is flags > config file (JSON) > defaults, and every
run writes a machine-readable manifest.  All artifacts except the manifest
are byte-deterministic for a fixed seed: files are written atomically, keys
sorted, floats in repr form, timestamps only in the manifest.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .detector import DetectorConfig, detect_corpus
from .features import compute_features, daily_series
from .ingest import (StockMeta, load_corpus, parse_transactions,
                     read_stock_meta, write_transactions)
from .network import (build_network, degree_sequences, strength_sequences,
                      write_edge_list)
from .powerlaw import GofConfig, ccdf_points, fit_tail
from .sim import CorpusSpec, GroupSpec, SimConfig, generate_corpus

DEFAULTS = {
    "seed": 0,
    "bootstrap": 1000,
    "significance": 0.01,
    "min_tail": 50,
    "corr_threshold": 0.2,
    "elevation_factor": 1.25,
    "decision_threshold": 0.5,
    "jobs": 1,
    "honest": 10,
    "manipulated": 2,
    "partial": 0,
    "days": 250,
    "traders": 1200,
    "trades_per_day": 150.0,
    "colluders": 150,
    "wash_fraction": 0.5,
    "bucket": "mid",
    "sector": "industrials",
}

STAT_SAMPLES = ("degree_in", "degree_out", "strength_in", "strength_out",
                "strength_total")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _dump_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _effective_config(args: argparse.Namespace) -> dict:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(DEFAULTS) - {"groups"}
        if unknown:
            raise ValueError(f"unknown config file keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _write_manifest(out: Path, subcommand: str, cfg: dict, inputs: list[str]) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": {k: cfg[k] for k in sorted(cfg) if k != "groups"},
        "inputs": sorted(inputs),
        "toolkit_version": __version__,
        "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(),
    }
    if "groups" in cfg:
        manifest["config"]["groups"] = cfg["groups"]
    _atomic_write(out / "manifest.json", _dump_json(manifest))


def _gof_config(cfg: dict) -> tuple[GofConfig, bool]:
    """Map CLI numbers onto GofConfig; bootstrap 0 means skip p-values."""
    replicas = int(cfg["bootstrap"])
    with_pvalue = replicas > 0
    return GofConfig(bootstrap_replicas=max(replicas, 1),
                     significance=float(cfg["significance"]),
                     rng_seed=int(cfg["seed"]),
                     min_tail_size=int(cfg["min_tail"])), with_pvalue


def _detector_config(cfg: dict) -> DetectorConfig:
    return DetectorConfig(corr_threshold=float(cfg["corr_threshold"]),
                          elevation_factor=float(cfg["elevation_factor"]),
                          decision_threshold=float(cfg["decision_threshold"]))


def _stat_samples(log):
    net = build_network(log)
    deg = degree_sequences(net)
    stren = strength_sequences(net)
    return {
        "degree_in": (deg.in_deg[deg.in_deg > 0], None),
        "degree_out": (deg.out_deg[deg.out_deg > 0], None),
        "strength_in": (stren.s_in[stren.s_in > 0], 160),
        "strength_out": (stren.s_out[stren.s_out > 0], 160),
        "strength_total": (stren.s_tot, 160),
    }


def _map_jobs(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- simulate

def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    base = SimConfig(n_days=int(cfg["days"]), n_traders=int(cfg["traders"]),
                     trades_per_day=float(cfg["trades_per_day"]),
                     n_colluders=int(cfg["colluders"]),
                     wash_volume_fraction=float(cfg["wash_fraction"]))
    if "groups" in cfg:
        groups = tuple(GroupSpec(**g) for g in cfg["groups"])
    else:
        groups = (GroupSpec(capitalization_bucket=str(cfg["bucket"]),
                            sector=str(cfg["sector"]),
                            honest=int(cfg["honest"]),
                            manipulated=int(cfg["manipulated"]),
                            partial=int(cfg["partial"])),)
    spec = CorpusSpec(groups=groups, master_seed=int(cfg["seed"]), base=base)
    results = generate_corpus(spec)

    files = []
    for res in results:
        sym = res.log.meta.symbol
        csv_path = out / f"{sym}.csv"
        tmp = csv_path.with_name(csv_path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            write_transactions(res.log, fh)
        os.replace(tmp, csv_path)
        _atomic_write(out / f"{sym}.json", _dump_json(res.log.meta.to_dict()))
        files.append(sym)
        if args.verbose:
            print(f"{sym}: {res.log.n_records} records "
                  f"({'manipulated' if res.truth.manipulated else 'honest'})",
                  file=sys.stderr)

    corpus_manifest = {
        "master_seed": int(cfg["seed"]),
        "stocks": [{"symbol": s,
                    "csv": f"{s}.csv",
                    "meta": f"{s}.json"} for s in files],
        "toolkit_version": __version__,
    }
    _atomic_write(out / "corpus_manifest.json", _dump_json(corpus_manifest))
    _write_manifest(out, "simulate", cfg, [])
    print(f"wrote {len(files)} stocks to {out}")
    return 0


# ---------------------------------------------------------------- validate

def _cmd_validate(args: argparse.Namespace) -> int:
    paths: list[Path] = []
    if args.corpus:
        paths.extend(sorted(Path(args.corpus).glob("*.csv")))
    paths.extend(Path(p) for p in args.files)
    if not paths:
        print("error: no input files", file=sys.stderr)
        return 2
    for path in paths:
        meta_path = path.with_suffix(".json")
        if meta_path.exists():
            meta = read_stock_meta(meta_path)
        else:
            meta = StockMeta(symbol=path.stem, capitalization_bucket="unknown",
                             sector="unknown")
        log = parse_transactions(path, meta)
        print(f"{path.name}: {log.n_records} records")
    return 0


# ---------------------------------------------------------------- build

def _cmd_build(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    logs = load_corpus(args.corpus)
    for sym in sorted(logs):
        net = build_network(logs[sym])
        path = out / "networks" / f"{sym}_edges.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            write_edge_list(net, fh)
        os.replace(tmp, path)
        print(f"{sym}: n={net.node_count} m={net.edge_count} "
              f"volume={net.total_volume()}")
    _write_manifest(out, "build", cfg, [str(args.corpus)])
    return 0


# ---------------------------------------------------------------- fit

def _fit_stock(task):
    sym, log, gof_cfg, with_pvalue = task
    fits = {}
    for stat, (samples, max_cands) in _stat_samples(log).items():
        fit = fit_tail(samples, gof_cfg, with_pvalue=with_pvalue,
                       max_candidates=max_cands)
        fits[stat] = fit.to_dict()
    return sym, fits


def _cmd_fit(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    gof_cfg, with_pvalue = _gof_config(cfg)
    logs = load_corpus(args.corpus)
    tasks = [(sym, logs[sym], gof_cfg, with_pvalue) for sym in sorted(logs)]
    for sym, fits in _map_jobs(_fit_stock, tasks, int(cfg["jobs"])):
        _atomic_write(out / "fits" / f"{sym}.json",
                      _dump_json({"symbol": sym, "fits": fits}))
        if args.verbose:
            print(f"{sym}: fitted {len(fits)} statistics", file=sys.stderr)
    _write_manifest(out, "fit", cfg, [str(args.corpus)])
    print(f"wrote fits for {len(tasks)} stocks to {out / 'fits'}")
    return 0


# ---------------------------------------------------------------- features

def _feature_columns() -> list[str]:
    cols = ["symbol", "n_days", "avg_degree", "return_ratio_corr"]
    for stat in STAT_SAMPLES:
        for field in ("xmin", "alpha", "ccdf_exponent", "ks_distance",
                      "p_value", "n_tail", "levy_stable"):
            cols.append(f"{stat}_{field}")
    return cols


def _feature_row(feats) -> list[str]:
    def cell(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return str(v).lower()
        if isinstance(v, float):
            return repr(v)
        return str(v)

    row = [feats.symbol, str(feats.n_days), repr(feats.avg_degree),
           cell(feats.return_ratio_corr)]
    fit_map = {"degree_in": feats.degree_fits.get("in"),
               "degree_out": feats.degree_fits.get("out"),
               "strength_in": feats.strength_fits.get("in"),
               "strength_out": feats.strength_fits.get("out"),
               "strength_total": feats.strength_fits.get("total")}
    for stat in STAT_SAMPLES:
        fit = fit_map[stat]
        if fit is None:
            row.extend([""] * 7)
        else:
            row.extend([str(fit.x_min), repr(fit.alpha), repr(fit.ccdf_exponent),
                        repr(fit.ks_distance), cell(fit.p_value),
                        str(fit.n_tail), str(fit.levy_stable).lower()])
    return row


def _features_stock(task):
    sym, log, gof_cfg, with_pvalue = task
    return sym, compute_features(log, gof_cfg, with_pvalue=with_pvalue)


def _write_features_csv(path: Path, features_by_symbol: dict) -> None:
    lines = [",".join(_feature_columns())]
    for sym in sorted(features_by_symbol):
        lines.append(",".join(_feature_row(features_by_symbol[sym])))
    _atomic_write(path, "\n".join(lines) + "\n")


def _cmd_features(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    gof_cfg, with_pvalue = _gof_config(cfg)
    logs = load_corpus(args.corpus)
    tasks = [(sym, logs[sym], gof_cfg, with_pvalue) for sym in sorted(logs)]
    feats = dict(_map_jobs(_features_stock, tasks, int(cfg["jobs"])))
    _write_features_csv(out / "features.csv", feats)

    for sym in sorted(logs):
        log = logs[sym]
        for stat, (samples, _) in _stat_samples(log).items():
            if samples.size == 0:
                continue
            xs, cc = ccdf_points(samples)
            lines = ["x,ccdf"] + [f"{x},{float(c)!r}" for x, c in zip(xs, cc)]
            _atomic_write(out / "plotdata" / f"{sym}_ccdf_{stat}.csv",
                          "\n".join(lines) + "\n")
        series = daily_series(log)
        lines = ["date,avg_price,n_sellers,n_buyers"]
        for i, day in enumerate(series.days):
            lines.append(f"{day.isoformat()},{float(series.avg_price[i])!r},"
                         f"{series.n_sellers[i]},{series.n_buyers[i]}")
        _atomic_write(out / "plotdata" / f"{sym}_daily.csv", "\n".join(lines) + "\n")

    _write_manifest(out, "features", cfg, [str(args.corpus)])
    print(f"wrote {out / 'features.csv'} ({len(feats)} stocks)")
    return 0


# ---------------------------------------------------------------- detect

def _cmd_detect(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    gof_cfg, with_pvalue = _gof_config(cfg)
    logs = load_corpus(args.corpus)
    reports = detect_corpus(logs, gof_cfg, _detector_config(cfg),
                            with_pvalue=with_pvalue)
    _atomic_write(out / "reports.json",
                  _dump_json([r.to_dict() for r in reports]))
    _write_manifest(out, "detect", cfg, [str(args.corpus)])
    flagged = [r.symbol for r in reports if r.verdict]
    print(f"{len(reports)} stocks evaluated, {len(flagged)} flagged"
          + (f": {', '.join(flagged)}" if flagged else ""))
    return 1 if flagged else 0


# ---------------------------------------------------------------- parser

def _add_common(p: argparse.ArgumentParser, *, out_required: bool = True) -> None:
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective configuration and exit")
    p.add_argument("--seed", type=int, help="master RNG seed")
    p.add_argument("--jobs", type=int, help="parallel workers for per-stock work")
    p.add_argument("-v", "--verbose", action="store_true")
    if out_required:
        p.add_argument("--out", required=True, help="output directory")


def _add_gof(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bootstrap", type=int,
                   help="bootstrap replicas for p-values (0 skips them)")
    p.add_argument("--significance", type=float, help="GoF test level")
    p.add_argument("--min-tail", dest="min_tail", type=int,
                   help="minimum tail size for the x_min scan")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tradenet",
        description="Trading-network forensics: build networks from "
                    "transaction logs, calibrate power-law tails, and flag "
                    "trade-based manipulation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic corpus")
    _add_common(p)
    p.add_argument("--honest", type=int, help="honest stocks to generate")
    p.add_argument("--manipulated", type=int, help="manipulated stocks")
    p.add_argument("--partial", type=int,
                   help="of the manipulated, how many get a partial window")
    p.add_argument("--days", type=int, help="trading days per stock")
    p.add_argument("--traders", type=int, help="trader population per stock")
    p.add_argument("--trades-per-day", dest="trades_per_day", type=float)
    p.add_argument("--colluders", type=int, help="colluder ring size")
    p.add_argument("--wash-fraction", dest="wash_fraction", type=float,
                   help="target colluder share of traded volume")
    p.add_argument("--bucket", help="capitalization bucket label")
    p.add_argument("--sector", help="industry sector label")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("validate", help="parse-only check of transaction CSVs")
    p.add_argument("files", nargs="*", help="transaction CSV files")
    p.add_argument("--corpus", help="directory of SYMBOL.csv files")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--dump-config", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("build", help="export merged trading networks")
    _add_common(p)
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("fit", help="power-law tail fits per stock")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    _add_gof(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("features", help="feature table and plot data")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    _add_gof(p)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("detect", help="reference comparison and verdicts")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    _add_gof(p)
    p.add_argument("--corr-threshold", dest="corr_threshold", type=float)
    p.add_argument("--elevation-factor", dest="elevation_factor", type=float)
    p.add_argument("--decision-threshold", dest="decision_threshold", type=float)
    p.set_defaults(func=_cmd_detect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "dump_config", False):
            print(_dump_json(_effective_config(args)), end="")
            return 0
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # single-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
