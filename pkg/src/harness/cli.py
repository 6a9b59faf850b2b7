"""
Command-line entry point.

Subcommands:
- sweep:   Monte-Carlo BER sweep from a YAML config plus flag overrides
- oracle:  detector-vs-exhaustive-search equivalence suite
- tables:  complexity and storage tables as CSV
- curves:  plot-data CSV from BER record files
- pulses:  frequency/phase pulse samples as CSV

Run as `python -m src.harness.cli <subcommand> ...`. Failures print one
JSON line {"error": ..., "message": ...} on stderr and exit with code 1.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from src.harness.config import load_config, full_scale, parse_detector
from src.harness.oracle_suite import run_oracle_suite
from src.harness.reports import (
    dump_tables, emit_curves, read_records, write_records, write_run_summary,
)
from src.harness.runner import run_sweep
from src.schema.errors import CpmError
from src.waveforms.pulses import dump_pulse_csv, pulse_for
from src.waveforms.schemes import SchemeName, get_scheme

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

RECORDS_FILE = "ber_records.csv"
CURVES_FILE = "curves.csv"
SUMMARY_FILE = "run_summary.json"


def _sweep_overrides(args) -> dict:
    overrides = {
        "scheme": args.scheme,
        "ebn0_grid": args.ebn0,
        "n_frames": args.frames,
        "frame_len": args.frame_len,
        "master_seed": args.seed,
        "min_errors": args.min_errors,
        "max_bits": args.max_bits,
        "output_path": args.out,
        "k": args.oversample,
        "master": args.master,
        "noiseless": True if args.noiseless else None,
    }
    if args.detector:
        overrides["detectors"] = [parse_detector(d, args.survivors, args.window) for d in args.detector]
    return overrides


def cmd_sweep(args) -> int:
    config = load_config(args.config, _sweep_overrides(args))
    if args.full_scale:
        config = full_scale(config)
    logger.info(
        f"Sweep {config.scheme.value}: detectors {[d.label for d in config.detectors]}, "
        f"Eb/N0 {config.ebn0_grid} dB, {config.n_frames} frames x {config.frame_len} symbols"
    )
    started = time.perf_counter()
    records = run_sweep(config)
    wall = time.perf_counter() - started

    out_dir = Path(config.output_path)
    write_records(records, out_dir / RECORDS_FILE)
    emit_curves(records, out_dir / CURVES_FILE)
    write_run_summary(out_dir / SUMMARY_FILE, config, records, wall)
    return 0


def cmd_oracle(args) -> int:
    report = run_oracle_suite(get_scheme(args.scheme), args.trials, args.max_len, args.ebn0, args.seed,
                              k=args.oversample, n_survivors=args.survivors)
    payload = report.model_dump()
    payload.update(passed=report.passed, coherent_rate=report.coherent_rate,
                   noncoherent_rate=report.noncoherent_rate)
    text = json.dumps(payload, indent=2)
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
        logger.info(f"Wrote oracle report to {path}")
    else:
        print(text)
    return 0 if report.passed else 1


def cmd_tables(args) -> int:
    dump_tables(args.out, k=args.oversample, traceback_n=args.traceback_n)
    return 0


def cmd_curves(args) -> int:
    records = []
    for path in args.records:
        records.extend(read_records(path))
    emit_curves(records, args.out)
    return 0


def cmd_pulses(args) -> int:
    scheme = get_scheme(args.scheme)
    pulse = pulse_for(scheme, args.oversample)
    path = dump_pulse_csv(pulse, args.out, column=args.column)
    logger.info(f"Wrote {len(pulse.t)} {scheme.name.value} pulse samples to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='CPM telemetry detection workbench')
    parser.add_argument('--verbose', action='store_true', help='Log at DEBUG level')
    sub = parser.add_subparsers(dest='command', required=True)

    schemes = [s.value for s in SchemeName]

    sweep = sub.add_parser('sweep', help='Run a Monte-Carlo BER sweep')
    sweep.add_argument('--config', type=str, default=None, help='YAML experiment file')
    sweep.add_argument('--scheme', choices=schemes, default=None)
    sweep.add_argument('--detector', action='append', default=None,
                       help='Detector label, e.g. MLSD_COHERENT, PROPOSED(2), MSD(5); repeatable')
    sweep.add_argument('--survivors', type=int, default=None, help='Survivors per state for PROPOSED')
    sweep.add_argument('--window', type=int, default=None, help='Window length for MSD')
    sweep.add_argument('--ebn0', type=float, nargs='+', default=None, help='Eb/N0 grid in dB')
    sweep.add_argument('--frames', type=int, default=None, help='Frames per point')
    sweep.add_argument('--frame-len', type=int, default=None, help='Data symbols per frame')
    sweep.add_argument('--seed', type=int, default=None, help='Master seed')
    sweep.add_argument('--min-errors', type=int, default=None, help='Early-stop error target per point')
    sweep.add_argument('--max-bits', type=int, default=None, help='Bit cap per point')
    sweep.add_argument('--out', type=str, default=None, help='Output directory')
    sweep.add_argument('--oversample', type=int, default=None, help='Samples per symbol k')
    sweep.add_argument('--noiseless', action='store_true', help='Disable channel noise')
    sweep.add_argument('--paper-scale', '--full-scale', dest='full_scale', action='store_true',
                       help='10^4 frames of 10^3 symbols, no early stop')
    sweep.add_argument('--master', type=str, default=None, help='Spark master URL, e.g. local[*]')
    sweep.set_defaults(func=cmd_sweep)

    oracle = sub.add_parser('oracle', help='Check detectors against exhaustive search')
    oracle.add_argument('--scheme', choices=schemes, default='PCMFM')
    oracle.add_argument('--trials', type=int, default=100)
    oracle.add_argument('--max-len', type=int, default=8)
    oracle.add_argument('--ebn0', type=float, default=10.0)
    oracle.add_argument('--seed', type=int, default=0)
    oracle.add_argument('--survivors', type=int, default=1)
    oracle.add_argument('--oversample', type=int, default=4)
    oracle.add_argument('--out', type=str, default=None, help='JSON report path (stdout if omitted)')
    oracle.set_defaults(func=cmd_oracle)

    tables = sub.add_parser('tables', help='Write complexity and storage tables')
    tables.add_argument('--out', type=str, default='output/tables')
    tables.add_argument('--oversample', type=int, default=4)
    tables.add_argument('--traceback-n', type=int, default=None,
                        help='Also write the storage table evaluated at this traceback length')
    tables.set_defaults(func=cmd_tables)

    curves = sub.add_parser('curves', help='Build plot data from BER record files')
    curves.add_argument('--records', type=str, nargs='+', required=True)
    curves.add_argument('--out', type=str, required=True)
    curves.set_defaults(func=cmd_curves)

    pulses = sub.add_parser('pulses', help='Dump a scheme pulse as CSV')
    pulses.add_argument('--scheme', choices=schemes, default='PCMFM')
    pulses.add_argument('--oversample', type=int, default=16)
    pulses.add_argument('--column', choices=['g', 'q'], default='q')
    pulses.add_argument('--out', type=str, required=True)
    pulses.set_defaults(func=cmd_pulses)
    return parser


def main(argv=None) -> int:
    """Main entry point for the workbench CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        return args.func(args)
    except (CpmError, OSError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
