"""Command-line entry point: ``bouncelab <command> [--config cfg.json] [--out rows.csv]``.

Every command writes a CSV of its rows and a JSON report next to it
(``rows.json`` unless ``--report`` is given).  The exit status is 0 when
every gate passes, 1 when a gate fails and 2 on invalid input, in which
case nothing is written.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

from .errors import BounceLabError, ParameterError
from .scans import COMMANDS, RUNNERS, make_config, table_loader

HELP = {
    "dispersion-scan": "sup_x |G| on an h ladder; resonant and off-resonant exponents",
    "parametrix-compare": "reflection sum against the dyadic spectral sum",
    "expsum-verify": "Airy-zero exponential sums against the regime table",
    "strichartz-scan": "time-integrated sup norms (q=4) or the resonance ledger (q=2)",
    "vdc-table": "derivative-test calculators and empirical ratios",
    "build-cache": "compute and store the Airy zero table",
}


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool) or v is None:
        return str(v).lower()
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bouncelab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", type=Path, help="JSON file overriding the defaults")
        sp.add_argument("--out", type=Path, help=f"CSV output (default {name}.csv)")
        sp.add_argument("--report", type=Path, help="JSON report (default: CSV path with .json)")
        sp.add_argument("--cache", type=Path, help="Airy zero table CSV, read or created")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0,
                        help="recorded in the report; all scans are deterministic")
        sp.add_argument("--show-defaults", action="store_true",
                        help="print the default config and exit")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.show_defaults:
        print(json.dumps(make_config(args.command), indent=2))
        return 0
    try:
        overrides = json.loads(args.config.read_text()) if args.config else {}
        if not isinstance(overrides, dict):
            raise ParameterError("config must be a JSON object")
        cfg = make_config(args.command, overrides)
        if args.threads < 1:
            raise ParameterError("--threads must be at least 1")
    except (OSError, json.JSONDecodeError, ParameterError) as exc:
        print(f"bouncelab {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2

    out = args.out or Path(f"{args.command}.csv")
    report = args.report or out.with_suffix(".json")
    start = time.perf_counter()
    try:
        result = RUNNERS[args.command](cfg, table_loader(args.cache), args.threads)
    except (ParameterError, ValueError) as exc:
        print(f"bouncelab {args.command}: precondition failed: {exc}", file=sys.stderr)
        return 2
    except BounceLabError as exc:
        print(f"bouncelab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start

    write_csv(out, result.header, result.rows)
    doc = {
        "command": args.command,
        "config_echo": {**cfg, "seed": args.seed, "threads": args.threads},
        "gates": [g.as_json() for g in result.gates],
        "details": result.extra,
        "runtime_seconds": elapsed,
    }
    report.write_text(json.dumps(_jsonable(doc), indent=2) + "\n")
    for g in result.gates:
        print(f"{'PASS' if g.passed else 'FAIL'}  {g.name}: measured {g.measured!r}, "
              f"target {g.target!r}")
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
