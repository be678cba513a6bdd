"""Command line front end.

    alphapatch run <config.json> [--resume <checkpoint.json>]
    alphapatch analyze <records.csv> [--C <real>]
    alphapatch validate <config.json>

Outputs go to the scenario's ``outputs.directory`` (relative paths resolve
against the config file's directory) unless ALPHAPATCH_OUTPUT_DIR is set.
Exit status: 0 on success (t_end reached), 2 on a splash stop, 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .diagnostics import (CSV_COLUMNS, DiagnosticsRecord, fitted_constant, gronwall_floor,
                          record_to_row, residual_series, row_to_record, splash_criterion_report)
from .evolution import RunState, run
from .scenario import ScenarioConfig, ScenarioError, read_config

OUTPUT_ENV = "ALPHAPATCH_OUTPUT_DIR"
EXIT_OK, EXIT_ERROR, EXIT_SPLASH = 0, 1, 2

RECORDS_FILE = "records.csv"
SUMMARY_FILE = "summary.json"
ANALYSIS_TABLE = "analysis.csv"
ANALYSIS_FILE = "analysis.json"

log = logging.getLogger("alphapatch")


def output_dir(default: Path) -> Path:
    env = os.environ.get(OUTPUT_ENV)
    return Path(env) if env else default


def _scenario_output_dir(config: ScenarioConfig, config_path: Path) -> Path:
    base = Path(config.outputs.directory)
    if not base.is_absolute():
        base = config_path.parent / base
    return output_dir(base)


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _write_curves(path: Path, state: RunState) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "x", "y"])
        for patch in state.system.patches:
            for x, y in patch.nodes:
                w.writerow([patch.label, _fmt(x), _fmt(y)])


def run_command(config_path: str | Path, resume: str | Path | None = None) -> int:
    """Run a scenario, streaming records, checkpoints and a summary to the output directory.

    A checkpoint holds the run state plus every CSV row written before it, so
    a resumed run rewrites the full records file.
    """
    config_path = Path(config_path)
    config = read_config(config_path)
    system = config.build()
    out = _scenario_output_dir(config, config_path)
    out.mkdir(parents=True, exist_ok=True)
    ckpt_dir = out / "checkpoints"
    curve_dir = out / "curves"
    if config.outputs.emit_plot_data:
        curve_dir.mkdir(exist_ok=True)

    rows: list[list[str]] = []
    state = None
    if resume is not None:
        saved = json.loads(Path(resume).read_text())
        state = RunState.from_dict(saved["state"])
        rows = [list(r) for r in saved["rows"]]

    records_path = out / RECORDS_FILE
    with records_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)
        fh.flush()

        def on_record(rec: DiagnosticsRecord, st: RunState) -> None:
            row = record_to_row(rec)
            rows.append(row)
            writer.writerow(row)
            fh.flush()
            if config.outputs.emit_plot_data:
                _write_curves(curve_dir / f"curve_{st.steps:07d}.csv", st)

        def on_checkpoint(st: RunState) -> None:
            ckpt_dir.mkdir(exist_ok=True)
            payload = {"state": st.to_dict(), "rows": rows}
            (ckpt_dir / f"checkpoint_{st.steps:07d}.json").write_text(json.dumps(payload))

        result = run(system, config.evolution, config.outputs.record_every, state=state,
                     on_record=on_record, checkpoint_every=config.outputs.checkpoint_every or None,
                     on_checkpoint=on_checkpoint, raise_errors=False)

    records = [row_to_record(dict(zip(CSV_COLUMNS, r)), system.exponent) for r in rows]
    summary = splash_criterion_report(records)
    summary.update({
        "termination": result.reason,
        "message": result.message,
        "steps": result.final.steps,
        "alpha": system.alpha,
        "k": system.k,
        "gamma": system.gamma,
        "bound_exponent": system.exponent,
        # velocities are reported with the normalizing constant set to one
        "velocity_prefactor": 1.0,
    })
    (out / SUMMARY_FILE).write_text(json.dumps(summary, indent=2))
    log.info("run ended: %s %s", result.reason, result.message)
    return {"t_end": EXIT_OK, "splash": EXIT_SPLASH}.get(result.reason, EXIT_ERROR)


def read_records(path: str | Path) -> list[DiagnosticsRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: header must be {','.join(CSV_COLUMNS)}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            try:
                records.append(row_to_record(row))
            except (ValueError, AttributeError) as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    if not records:
        raise ValueError(f"{path}: no data rows")
    return records


def analyze_command(records_path: str | Path, C: float | None = None) -> int:
    """Recompute floor, residual and verdict offline from a records CSV.

    Prints the (t, d, floor, residual) table and the verdict JSON, and writes
    both next to the records (or into the override directory).
    """
    records_path = Path(records_path)
    records = read_records(records_path)
    c_used = 2.0 * fitted_constant(records) if C is None else float(C)
    floor = gronwall_floor(records, c_used)
    resid = residual_series(records, c_used) if len(records) >= 3 else np.full(len(records), np.nan)
    report = splash_criterion_report(records, C=c_used)

    out = output_dir(records_path.parent)
    out.mkdir(parents=True, exist_ok=True)
    lines = [["time", "d", "floor", "residual"]]
    for rec, f, r in zip(records, floor, resid):
        lines.append([_fmt(rec.time), _fmt(rec.d), _fmt(f), "" if np.isnan(r) else _fmt(float(r))])
    with (out / ANALYSIS_TABLE).open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(lines)
    (out / ANALYSIS_FILE).write_text(json.dumps(report, indent=2))

    widths = [24, 24, 24, 24]
    for row in lines:
        print("".join(cell.rjust(w) for cell, w in zip(row, widths)))
    print(json.dumps(report, indent=2))
    return EXIT_OK


def validate_command(config_path: str | Path) -> int:
    config = read_config(config_path)
    system = config.build()
    print(json.dumps({"alpha": system.alpha, "k": system.k, "gamma": system.gamma,
                      "bound_exponent": system.exponent, "patches": len(system.patches)}))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the splash exit status
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alphapatch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="simulate a scenario")
    p_run.add_argument("config")
    p_run.add_argument("--resume", metavar="CHECKPOINT")
    p_an = sub.add_parser("analyze", help="recompute the floor and verdict from a records CSV")
    p_an.add_argument("records")
    p_an.add_argument("--C", type=float, default=None, dest="C")
    p_val = sub.add_parser("validate", help="check a scenario file and print derived exponents")
    p_val.add_argument("config")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return run_command(args.config, args.resume)
        if args.command == "analyze":
            return analyze_command(args.records, args.C)
        return validate_command(args.config)
    except (ScenarioError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
