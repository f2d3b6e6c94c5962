"""``shuttle`` command line: ``run``, ``extrema`` and ``verify`` on a config file.

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
3 a verification check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigParseError, InvalidConfigError
from .sweep import format_extrema, report_extrema, run_sweep, run_verify, write_outputs

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_FLAGGED = 0, 1, 2, 3


def _output(explicit, from_cfg, config_path, suffix):
    if explicit:
        return Path(explicit)
    if from_cfg:
        return Path(from_cfg)
    return Path(Path(config_path).stem + suffix)


def _cmd_run(args, cfg):
    result = run_sweep(cfg, workers=args.workers)
    csv_path = _output(args.csv, cfg.output_csv, args.config, ".csv")
    json_path = _output(args.json, cfg.output_json, args.config, ".json")
    write_outputs(result, csv_path, json_path)
    print(f"wrote {len(result.rows)} rows to {csv_path} and run record to {json_path}")
    for flag in result.flags:
        row = result.rows[flag["row"]]
        print(f"flag: row {flag['row']} ({row['channel']}, tau={row['tau_over_T0']}, "
              f"T={row['T_over_T0']}) MC differs from quadrature by {flag['nsigma']:.1f} sigma")
    return EXIT_OK


def _cmd_extrema(args, cfg):
    summary = report_extrema(cfg)
    print(json.dumps(summary, indent=2) if args.as_json else format_extrema(summary))
    return EXIT_OK


def _cmd_verify(args, cfg):
    record = run_verify(cfg)
    path = _output(args.json, cfg.verify_json, args.config, ".verify.json")
    path.write_text(json.dumps(record, indent=2) + "\n")
    print(f"verification record written to {path}")
    if record["flags"]:
        for flag in record["flags"]:
            print(f"FAILED {flag['check']}: {flag['channel']} tau={flag['tau_over_T0']} T={flag['T_over_T0']}")
        return EXIT_FLAGGED
    print("all checks passed")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="shuttle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sweep sensitivities and write CSV + JSON run record")
    run.add_argument("config")
    run.add_argument("--csv", help="output CSV path (overrides output_csv)")
    run.add_argument("--json", help="run record path (overrides output_json)")
    run.add_argument("--workers", type=int, help="worker processes (env SHUTTLE_WORKERS wins)")
    run.set_defaults(func=_cmd_run)

    ext = sub.add_parser("extrema", help="print white-noise minima, crossing and ratios")
    ext.add_argument("config")
    ext.add_argument("--json", dest="as_json", action="store_true", help="print JSON")
    ext.set_defaults(func=_cmd_extrema)

    ver = sub.add_parser("verify", help="Monte-Carlo and lambda-scaling checks")
    ver.add_argument("config")
    ver.add_argument("--json", help="verification record path (overrides verify_json)")
    ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigParseError, InvalidConfigError) as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args, cfg)
    except (InvalidConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
