"""``starsep run|verify <manifest>`` and ``starsep example flat|cp1``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ManifestError
from .manifest import CHECKS, EXAMPLES, parse_manifest
from .pipeline import PipelineError, run

DEFAULT_VERIFY = ("associativity", "separation", "unit", "c1", "berezin", "duality", "omega-identity",
                  "dnu-identity", "kappa", "roundtrip")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="starsep", description="Star products with separation of variables on a chart.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "compute the full report"), ("verify", "run the checks only")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("manifest", help="path to a chart manifest, or - for stdin")
        p.add_argument("--order", type=int, help="override the manifest order")
        p.add_argument("--report", help="write the report to this path instead of stdout")
        p.add_argument("--machine", action="store_true", help="append a JSON section with the same data")
    p = sub.add_parser("example", help="print a built-in manifest")
    p.add_argument("name", choices=sorted(EXAMPLES))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "example":
        sys.stdout.write(EXAMPLES[args.name])
        return 0
    try:
        text = sys.stdin.read() if args.manifest == "-" else Path(args.manifest).read_text()
    except OSError as exc:
        print(f"starsep: cannot read manifest: {exc}", file=sys.stderr)
        return 2
    try:
        manifest = parse_manifest(text)
    except ManifestError as exc:
        print(f"starsep: {args.manifest}: {exc}", file=sys.stderr)
        return 2
    if args.order is not None:
        if args.order < 1:
            print("starsep: --order must be at least 1", file=sys.stderr)
            return 2
        manifest.order = args.order
    checks = None
    if args.command == "verify" and not manifest.checks:
        checks = tuple(c for c in DEFAULT_VERIFY if c in CHECKS)
    try:
        report = run(manifest, checks=checks, details=args.command == "run")
    except PipelineError as exc:
        print(f"starsep: error in {exc}", file=sys.stderr)
        return 2
    text_out = report.text(machine=args.machine)
    target = args.report or manifest.report
    if target:
        Path(target).write_text(text_out)
        print(f"report written to {target}")
        for c in report.checks:
            print(c.line())
    else:
        sys.stdout.write(text_out)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
