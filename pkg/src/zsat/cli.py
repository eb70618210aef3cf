"""Command-line entry point: ``zsat scan|validate|gen|bench``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .bench import BenchMode, IncomparableRunsError, run_bench
from .corpus import CorpusSpec, generate, manifest_path
from .ontology import (
    OntologyError,
    OntologyParseError,
    Taxonomy,
    default_config_text,
    load_taxonomy,
    parse_taxonomy,
    validate,
)
from .report import OutputFormat, serialize
from .scanner import ScanConfig, ScanError, scan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VIOLATIONS = 4

ONTOLOGY_ENV = "ZSAT_ONTOLOGY"

log = logging.getLogger("zsat")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _non_negative_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _read_ontology_text(path: str | None) -> str:
    path = path or os.environ.get(ONTOLOGY_ENV)
    if not path:
        return default_config_text()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read ontology {path}: {exc.strerror or exc}", EXIT_CONFIG) from None


def _load_ontology(path: str | None) -> Taxonomy:
    try:
        return load_taxonomy(_read_ontology_text(path))
    except OntologyError as exc:
        raise CliError(f"invalid ontology: {exc}", EXIT_CONFIG) from None


def _scan_config(args: argparse.Namespace) -> ScanConfig:
    overrides = {"music": True} if args.enable_music else None
    return ScanConfig(root=args.root, budget_ms=int(args.budget_secs * 1000),
                      worker_count=args.workers, enabled_family_overrides=overrides)


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    try:
        Path(output).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {output}: {exc.strerror or exc}", EXIT_IO) from None


def cmd_scan(args: argparse.Namespace) -> int:
    taxonomy = _load_ontology(args.ontology)
    try:
        report = scan(_scan_config(args), taxonomy)
    except ScanError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    _emit(serialize(report, OutputFormat(args.format)), args.output)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    taxonomy = _load_ontology(args.ontology)
    modes = {
        "both": (BenchMode.TYPE_ONLY, BenchMode.FILTERED),
        "filtered": (BenchMode.FILTERED,),
        "type-only": (BenchMode.TYPE_ONLY,),
    }[args.mode]
    try:
        result = run_bench(_scan_config(args), taxonomy, repeat=args.repeat, modes=modes)
    except ScanError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    except (IncomparableRunsError, ValueError) as exc:
        raise CliError(f"benchmark failed: {exc}", EXIT_CONFIG) from None
    _emit(json.dumps(result, indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        taxonomy = parse_taxonomy(_read_ontology_text(args.ontology))
    except OntologyParseError as exc:
        raise CliError(f"cannot parse ontology: {exc}", EXIT_CONFIG) from None
    violations = validate(taxonomy)
    for v in violations:
        print(f"violation: {v}")
    if violations:
        return EXIT_VIOLATIONS
    print(f"ok: {sum(len(f.formats) for f in taxonomy.families)} formats in "
          f"{len(taxonomy.families)} families ({taxonomy.digest})")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    spec = CorpusSpec(
        seed=args.seed,
        innocuous_files=args.innocuous,
        planted_images=args.plant_images,
        planted_videos=args.plant_videos,
        planted_keyword_files=args.plant_keyword_files,
        planted_mismatch_files=args.plant_mismatch_files,
        planted_music=args.plant_music,
        directories=args.directories,
        keyword=args.keyword,
    )
    taxonomy = _load_ontology(args.ontology)
    try:
        manifest = generate(spec, args.out, taxonomy)
    except FileExistsError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    except OSError as exc:
        raise CliError(f"cannot generate corpus: {exc}", EXIT_IO) from None
    print(manifest_path(args.out))
    log.info("%d files, %d planted", len(manifest.entries), len(manifest.planted()))
    return EXIT_OK


def _add_scan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--root", required=True, help="evidence directory to scan")
    p.add_argument("--ontology", help=f"taxonomy JSON (default: ${ONTOLOGY_ENV} or the built-in default)")
    p.add_argument("--budget-secs", type=_non_negative_float, default=300.0,
                   help="wall-clock budget in seconds (default 300)")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--enable-music", action="store_true", help="include the music family")
    p.add_argument("--output", help="write to FILE instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zsat", description="Time-budgeted forensic triage scanner.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="scan a directory tree and report possibly suspicious files")
    _add_scan_flags(p)
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("bench", help="time filtered versus type-only scans")
    _add_scan_flags(p)
    p.add_argument("--repeat", type=_positive_int, default=3)
    p.add_argument("--mode", choices=["both", "filtered", "type-only"], default="both")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="check a taxonomy file")
    p.add_argument("--ontology", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", help="generate a synthetic evidence tree and manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--innocuous", type=_non_negative_int, default=0)
    p.add_argument("--plant-images", type=_non_negative_int, default=0)
    p.add_argument("--plant-videos", type=_non_negative_int, default=0)
    p.add_argument("--plant-keyword-files", type=_non_negative_int, default=0)
    p.add_argument("--plant-mismatch-files", type=_non_negative_int, default=0)
    p.add_argument("--plant-music", type=_non_negative_int, default=0)
    p.add_argument("--directories", type=_positive_int, default=100)
    p.add_argument("--keyword", default="secret")
    p.add_argument("--ontology", help="taxonomy whose size thresholds the planted files must exceed")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"zsat: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"zsat: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # reader went away (e.g. `| head`); silence the flush at interpreter exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
