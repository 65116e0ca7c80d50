"""
Command-line front end.

Every subcommand writes one data file (CSV or JSON) plus a ``run.json``
manifest holding the resolved configuration, seed, package versions and
timings. Exit status: 0 success, 1 configuration/validation failure,
2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from importlib import metadata
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import experiments as ex
from . import validation
from .chain import eigenmode_analysis
from .config import RunConfig, load_document
from .errors import ChainsqError, ConfigInvalid, NotStable

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2
MANIFEST_VERSION = 1


class Table:
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self.rows: list[list[Any]] = []

    def add(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError("row length does not match header")
        self.rows.append(list(values))


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else f"{float(value):.15e}"
    return str(value)


def _json_cell(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else float(value)
    return value


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()
    records = [{c: _json_cell(v) for c, v in zip(table.columns, row)} for row in table.rows]
    return json.dumps(records, indent=1) + "\n"


def versions() -> dict[str, str]:
    out = {"python": platform.python_version()}
    for dist in ("artifact", "numpy", "scipy", "jsonschema"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = "unknown"
    return out


def _nan_pairs(n: int) -> np.ndarray:
    return np.full(n, np.nan)


# subcommands: each returns (stem, table, summary, exit code)


def cmd_steady(cfg: RunConfig, args) -> tuple[str, Table, dict, int]:
    scenario = cfg.scenario()
    pairs, report, unique, stab, diag = ex.evaluate(scenario, cfg.variant)
    t = Table(["j1", "j2", "opposite", "E_N"])
    for (j1, j2), value in sorted(report.values.items()):
        t.add(j1, j2, (j1, j2) in report.opposite, value)
    summary = {"unique": unique, "max_real_drift": stab.max_real, "diagnostics": diag}
    return "steady", t, summary, EXIT_OK


def cmd_eigenmodes(cfg: RunConfig, args) -> tuple[str, Table, dict, int]:
    scenario = cfg.scenario()
    chain = scenario.implementation().resolved_chain() if scenario.kind != "ideal" else scenario.chain_spec()
    ana = eigenmode_analysis(chain)
    t = Table(["k", "frequency", "projection", "abs_projection"])
    for k, (f, p) in enumerate(zip(ana.frequencies, ana.projections)):
        t.add(k, f, p, abs(p))
    summary = {"unique": ana.unique, "min_abs_projection": ana.min_abs_projection, "spread": ana.spread}
    return "eigenmodes", t, summary, EXIT_OK


def cmd_optimize_delta(cfg: RunConfig, args) -> tuple[str, Table, dict, int]:
    scenario = cfg.scenario()
    search, points = cfg.search()
    opt = ex.optimize_detuning(scenario.chain, scenario.N, search, points)
    t = Table(["N", "Delta", "spread", "min_abs_projection", "unique"])
    t.add(scenario.N, opt.Delta, opt.spread, opt.analysis.min_abs_projection, opt.analysis.unique)
    return "optimize_delta", t, {"Delta": opt.Delta}, EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> tuple[str, Table, dict, int]:
    spec = cfg.sweep_spec()
    results = ex.sweep(spec, seed=cfg.seed, threads=args.threads)
    t = Table(["value", "j", "E_N", "stable", "unique", "xi", "ancilla_occupancy", "error"])
    for r in results:
        n = len(r.pair_EN) if r.pair_EN is not None else 0
        if n == 0:
            t.add(r.value, 0, math.nan, r.stable, r.unique, math.nan, math.nan, r.error)
        for j in range(1, n + 1):
            t.add(
                r.value, j, r.pair_EN[j - 1], r.stable, r.unique,
                r.diagnostics.get("xi", math.nan), r.diagnostics.get("ancilla_occupancy", math.nan), r.error,
            )
    failed = [r.value for r in results if not r.ok]
    return "sweep", t, {"points": len(results), "failed_points": failed}, EXIT_OK


def cmd_disorder(cfg: RunConfig, args) -> tuple[str, Table, dict, int]:
    scenario = cfg.scenario()
    dspec = cfg.disorder_spec()
    res = ex.disorder_monte_carlo(scenario, dspec, threads=args.threads)
    t = Table(["realization", "stable", "j", "E_N"])
    for j, value in enumerate(res.reference, start=1):
        t.add(-1, True, j, value)
    for i, (ok, row) in enumerate(zip(res.stable, res.realizations)):
        for j, value in enumerate(row, start=1):
            t.add(i, ok, j, value)
    kept = int(res.stable.sum())
    summary = {
        "realizations": dspec.realizations,
        "unstable": res.unstable_count,
        "median_degradation": res.median_degradation() if kept else None,
        "fraction_all_entangled": res.fraction_all_entangled(),
        "median": res.median.tolist() if kept else None,
        "min": res.minimum.tolist() if kept else None,
        "max": res.maximum.tolist() if kept else None,
    }
    return "disorder", t, summary, EXIT_OK


def cmd_size_scan(cfg: RunConfig, args) -> tuple[str, Table, dict, int]:
    search, points = cfg.search()
    rows = ex.size_scan(cfg.scenario(), cfg.sizes(), args.threads, search, points, cfg.variant)
    t = Table(["N", "Delta", "j", "E_N"])
    for row in rows:
        for j, value in enumerate(row.pair_EN, start=1):
            t.add(row.N, row.Delta, j, value)
    return "size_scan", t, {"sizes": [r.N for r in rows]}, EXIT_OK


def cmd_compare(cfg: RunConfig, args) -> tuple[str, Table, dict, int]:
    spec = cfg.sweep_spec()
    comp = ex.compare_full_vs_effective(spec, seed=cfg.seed, threads=args.threads)
    t = Table(["value", "xi", "j", "E_N_full", "E_N_effective", "relative_deviation", "ancilla_occupancy", "error"])
    for p in comp.points:
        ef = p.full.pair_EN if p.full.ok else None
        ee = p.effective.pair_EN if p.effective.ok else None
        n = len(ef) if ef is not None else len(ee) if ee is not None else 0
        ef = ef if ef is not None else _nan_pairs(n)
        ee = ee if ee is not None else _nan_pairs(n)
        err = p.full.error or p.effective.error
        occ = p.full.diagnostics.get("ancilla_occupancy", math.nan)
        xi = p.xi if p.xi is not None else math.nan
        if n == 0:
            t.add(p.value, xi, 0, math.nan, math.nan, math.nan, occ, err)
        for j in range(n):
            diff = abs(ef[j] - ee[j])
            rel = 0.0 if diff == 0 else diff / ee[j] if ee[j] != 0 else math.inf
            t.add(p.value, xi, j + 1, ef[j], ee[j], rel, occ, err)
    return "compare", t, {"max_relative_deviation": comp.max_deviation}, EXIT_OK


def cmd_validate(cfg: RunConfig | None, args) -> tuple[str, Table, dict, int]:
    checks = validation.run_all()
    t = Table(["check", "value", "reference", "tolerance", "passed"])
    for c in checks:
        t.add(c.name, c.value, c.reference, c.tolerance, c.passed)
    failed = [c.name for c in checks if not c.passed]
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  (error {c.error:.2e}, tol {c.tolerance:.0e})")
    return "validate", t, {"checks": len(checks), "failed": failed}, EXIT_INVALID if failed else EXIT_OK


COMMANDS = {
    "steady": cmd_steady,
    "eigenmodes": cmd_eigenmodes,
    "optimize-delta": cmd_optimize_delta,
    "sweep": cmd_sweep,
    "disorder": cmd_disorder,
    "size-scan": cmd_size_scan,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config leaf by dotted path (repeatable)")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--seed", type=int, help="master seed (overrides seed)")
    common.add_argument("--format", choices=["csv", "json"], help="data file format")
    common.add_argument("--threads", type=int, default=1, help="worker threads, 0 = one per CPU")

    parser = argparse.ArgumentParser(prog="chainsq", description="Steady-state entanglement of harmonic chains with a squeezed central bath.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    rerun = sub.add_parser("rerun", help="repeat the run recorded in a manifest")
    rerun.add_argument("manifest")
    rerun.add_argument("--out", required=True)
    rerun.add_argument("--threads", type=int, default=1)
    return parser


def _load(args, command: str) -> RunConfig | None:
    if args.config is None:
        if command == "validate":
            return None
        raise ConfigInvalid(f"{command} needs --config")
    doc = load_document(args.config)
    if doc.get("manifest_version") is not None:
        doc = doc["config"]
    overrides = list(args.overrides)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigInvalid("--seed must be an unsigned 64-bit integer")
        overrides.append(f"seed={args.seed}")
    if args.format is not None:
        overrides.append(f'output.format="{args.format}"')
    if args.out is not None:
        overrides.append(f"output.dir={json.dumps(args.out)}")
    return RunConfig.from_document(doc, overrides)


def execute(command: str, args) -> int:
    start = time.perf_counter()
    try:
        cfg = _load(args, command)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return EXIT_INVALID

    fmt = cfg.output_format if cfg is not None else (args.format or "csv")
    out_dir = Path(cfg.output_dir if cfg is not None else (args.out or "out"))
    try:
        stem, table, summary, code = COMMANDS[command](cfg, args)
    except NotStable as exc:
        point = cfg.document if cfg is not None else {}
        print(f"error: {exc} at configuration {json.dumps(point, sort_keys=True)}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ChainsqError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / f"{stem}.{fmt}"
    data_path.write_text(render(table, fmt), encoding="utf-8")
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "command": command,
        "config": cfg.document if cfg is not None else None,
        "seed": cfg.seed if cfg is not None else None,
        "threads": args.threads,
        "format": fmt,
        "outputs": [data_path.name],
        "summary": summary,
        "exit_code": code,
        "versions": versions(),
        "timings": {"wall_seconds": time.perf_counter() - start},
    }
    (out_dir / "run.json").write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n", encoding="utf-8")
    print(f"wrote {data_path}")
    return code


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serializable: {type(obj).__name__}")


def rerun(args) -> int:
    try:
        manifest = load_document(args.manifest)
    except (ConfigInvalid, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if manifest.get("manifest_version") is None or manifest.get("command") not in COMMANDS:
        print("error: not a run manifest", file=sys.stderr)
        return EXIT_INVALID
    ns = argparse.Namespace(
        config=args.manifest, overrides=[], out=args.out, seed=None, format=None, threads=args.threads
    )
    return execute(manifest["command"], ns)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "rerun":
        return rerun(args)
    return execute(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
