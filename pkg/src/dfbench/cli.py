"""Command-line entry point: ``dfbench eval|suite|ingest|serve``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import batch
from .config import load_settings
from .errors import DFBenchError
from .evaluate import evaluator_from_settings
from .ingest import ingest
from .metrics import Suite
from .store import Store


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dfbench", description="Score forensic tool output against ground truth.")
    p.add_argument("--config", help="TOML config file (default: $DFBENCH_CONFIG)")
    p.add_argument("--store", help="ground-truth/results store path (overrides config)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="score one batch CSV")
    e.add_argument("--test-case", required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--output", required=True)
    e.add_argument("--job-id")
    e.add_argument("--no-record", action="store_true", help="do not append to the results log")

    s = sub.add_parser("suite", help="score a directory of per-test-case batch CSVs")
    s.add_argument("--suite", required=True, choices=[x.value for x in Suite] + [x.short_name for x in Suite])
    s.add_argument("--input-dir", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--job-id")
    s.add_argument("--no-record", action="store_true")

    i = sub.add_parser("ingest", help="load ground truth from a manifest")
    i.add_argument("--suite", required=True)
    i.add_argument("--manifest", required=True)

    v = sub.add_parser("serve", help="run the HTTP evaluation service")
    v.add_argument("--host")
    v.add_argument("--port", type=int)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        settings = load_settings(args.config)
    except (OSError, ValueError) as exc:
        print(f"cannot load config: {exc}", file=sys.stderr)
        return batch.EXIT_INPUT
    if args.store:
        settings["store"] = args.store

    store = Store(settings["store"])
    try:
        if args.command == "ingest":
            try:
                count = ingest(store, args.manifest, args.suite)
            except (DFBenchError, ValueError, OSError) as exc:
                print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
                return batch.EXIT_GROUND_TRUTH
            print(f"ingested {count} {Suite.parse(args.suite).value} records")
            return batch.EXIT_OK

        if args.command == "serve":
            import uvicorn

            from .api import create_app

            app = create_app(evaluator_from_settings(store, settings), int(settings["max_upload_bytes"]))
            uvicorn.run(app, host=args.host or settings["host"], port=args.port or int(settings["port"]))
            return batch.EXIT_OK

        evaluator = evaluator_from_settings(store, settings, record=not args.no_record)
        if args.command == "eval":
            return batch.run_batch(evaluator, args.test_case, args.input, args.output, args.job_id)
        return batch.run_suite(evaluator, args.suite, args.input_dir, args.output, args.job_id)
    finally:
        store.close()


if __name__ == "__main__":
    sys.exit(main())
