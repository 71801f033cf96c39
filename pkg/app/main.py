import argparse
import hashlib
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence, Set, Tuple

from app import __version__
from app.config import Settings, get_settings
from app.errors import CloudsiftError
from app.evidence import AppSnapshot, Provider, RecoveredObject
from app.services.analyzers import analyze_with_unclaimed, reconstruct_box_url
from app.services.analyzers.base import BOX_DOWNLOAD_HOST
from app.services.carver import builtin_signatures, carve, extract_carved
from app.services.corpus import Scenario, generate, iter_scenarios, write_corpus
from app.services.image import EvidenceTree, RawImage, open_image, open_tree
from app.services.locator import group_hits, scan
from app.services.merge import count_recovered, merge_snapshots
from app.services.registry import export_registry, load_registry
from app.services.report import Report, ReportInput, load_report, write_report
from app.services.storage import save_text, split_output
from app.validators import parse_identity, parse_seed, parse_state, parse_token

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2

NO_PROVIDERS = "no providers detected"


# ---------------- analyze ----------------


def _open_inputs(
    args: argparse.Namespace, settings: Settings, warnings: List[str]
) -> Tuple[List[EvidenceTree], Optional[RawImage], Dict[str, str]]:
    trees = [open_tree(args.internal, "internal", warnings, settings.case_fallback)]
    paths = {"internal": os.path.abspath(args.internal)}
    if args.sd:
        trees.append(open_tree(args.sd, "sd", warnings, settings.case_fallback))
        paths["sd"] = os.path.abspath(args.sd)
    image = None
    if args.raw:
        image = open_image(args.raw, "raw")
        paths["raw"] = os.path.abspath(args.raw)
    return trees, image, paths


def run_analysis(
    trees: Sequence[EvidenceTree],
    image: Optional[RawImage] = None,
    settings: Optional[Settings] = None,
    input_warnings: Sequence[str] = (),
) -> Report:
    """scan -> carve -> analyze every detected app; the report carries no host paths."""

    settings = settings or get_settings()
    registry = load_registry(settings.registry_path)
    hits = scan(list(trees), registry)
    carved: List[RecoveredObject] = []
    if image is not None:
        carved = carve(image, builtin_signatures(settings.carve_max_bytes))

    groups = group_hits(hits)
    # carved data has no owner on disk; hand it to an app only when there is one
    claim = len(groups) == 1
    snapshots: List[AppSnapshot] = []
    claimed: Set[int] = set()
    for (identity, _group), members in groups.items():
        snapshot, unclaimed = analyze_with_unclaimed(
            identity, members, trees, carved, claim_unlinked=claim, settings=settings
        )
        snapshots.append(snapshot)
        leftover = {id(obj) for obj in unclaimed}
        claimed.update(id(obj) for obj in carved if id(obj) not in leftover)

    warnings = list(input_warnings)
    if not groups:
        warnings.append(NO_PROVIDERS)
    inputs = [ReportInput(tree.label, "tree", tree.digest()) for tree in trees]
    if image is not None:
        inputs.append(ReportInput(image.label, "raw", image.sha1()))
    return Report(
        inputs=tuple(inputs),
        snapshots=tuple(sorted(snapshots, key=lambda s: s.identity)),
        unclaimed_carved=tuple(obj for obj in carved if id(obj) not in claimed),
        warnings=tuple(warnings),
    )


def cmd_analyze(args: argparse.Namespace) -> int:
    settings = get_settings(args.registry)
    warnings: List[str] = []
    trees, image, paths = _open_inputs(args, settings, warnings)
    try:
        report = run_analysis(trees, image, settings, warnings)
    finally:
        if image is not None:
            image.close()
    write_report(report, args.out, paths, args.format)
    partial = report.partial or any(w != NO_PROVIDERS for w in report.warnings)
    return EXIT_PARTIAL if partial else EXIT_OK


# ---------------- merge ----------------


def cmd_merge(args: argparse.Namespace) -> int:
    by_provider: Dict[Provider, List[Tuple[str, AppSnapshot]]] = {}
    inputs: List[ReportInput] = []
    paths: Dict[str, str] = {}
    for path in args.reports:
        label = os.path.basename(path)
        if label in paths:
            raise CloudsiftError(f"two input reports share the name {label}")
        paths[label] = os.path.abspath(path)
        report = load_report(path)
        with open(path, "rb") as handle:
            inputs.append(ReportInput(label, "report", hashlib.sha1(handle.read()).hexdigest()))
        for snapshot in report.snapshots:
            device = f"{label}:{snapshot.identity.label}"
            by_provider.setdefault(snapshot.identity.provider, []).append((device, snapshot))

    merged = []
    for provider in sorted(by_provider):
        dataset = merge_snapshots(by_provider[provider])
        logger.info("[MERGE] %s: %d recovered", provider.value, count_recovered(dataset))
        merged.append(dataset)
    report = Report(inputs=tuple(inputs), merged=tuple(merged))
    write_report(report, args.out, paths, args.format)
    return EXIT_OK


# ---------------- carve ----------------


def cmd_carve(args: argparse.Namespace) -> int:
    settings = get_settings()
    with open_image(args.image, "raw") as image:
        objects = carve(image, builtin_signatures(settings.carve_max_bytes))
        manifest = extract_carved(image, objects, args.out)
    print(manifest)
    return EXIT_OK


# ---------------- gen-corpus ----------------


def cmd_gen_corpus(args: argparse.Namespace) -> int:
    if args.all:
        for scenario in iter_scenarios(args.seed):
            write_corpus(generate(scenario), os.path.join(args.out, scenario.slug))
        return EXIT_OK
    write_corpus(generate(args.scenario), args.out)
    return EXIT_OK


# ---------------- box-url / registry ----------------


def cmd_box_url(args: argparse.Namespace) -> int:
    print(reconstruct_box_url(args.token, args.file_id, args.host or BOX_DOWNLOAD_HOST))
    return EXIT_OK


def cmd_registry_export(args: argparse.Namespace) -> int:
    text = export_registry(load_registry(get_settings(args.registry).registry_path))
    if args.out:
        directory, name = split_output(args.out)
        save_text(directory, name, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------- parser ----------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloudsift",
        description="Recover cloud-storage client residue from extracted smartphone evidence.",
    )
    parser.add_argument("--version", action="version", version=f"cloudsift {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="cmd", required=True)

    a = sub.add_parser("analyze", help="Scan evidence trees and report every detected app.")
    a.add_argument("--internal", required=True, help="internal storage tree (directory or TAR)")
    a.add_argument("--sd", help="SD card tree (directory or TAR)")
    a.add_argument("--raw", help="raw image to carve")
    a.add_argument("--registry", help="registry JSON (overrides CLOUDSIFT_REGISTRY)")
    a.add_argument("--out", required=True, help="report file")
    a.add_argument("--format", choices=("json", "text"), default="json")
    a.set_defaults(func=cmd_analyze)

    m = sub.add_parser("merge", help="Union snapshots from several analyze reports.")
    m.add_argument("reports", nargs="+")
    m.add_argument("--out", required=True)
    m.add_argument("--format", choices=("json", "text"), default="json")
    m.set_defaults(func=cmd_merge)

    c = sub.add_parser("carve", help="Carve JPEG, PDF, DOCX/ZIP, MP3 and MP4 files from an image.")
    c.add_argument("image")
    c.add_argument("--out", required=True, help="output directory")
    c.set_defaults(func=cmd_carve)

    g = sub.add_parser("gen-corpus", help="Generate synthetic evidence for one scenario.")
    g.add_argument("--provider")
    g.add_argument("--platform")
    g.add_argument("--app-version")
    g.add_argument("--state", help="APS, CC, PWD or CC&PWD")
    g.add_argument("--seed", default="0")
    g.add_argument("--all", action="store_true", help="every cataloged scenario, one folder each")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_corpus)

    b = sub.add_parser("box-url", help="Rebuild a Box direct download link.")
    b.add_argument("--token", required=True)
    b.add_argument("--file-id", required=True)
    b.add_argument("--host")
    b.set_defaults(func=cmd_box_url)

    r = sub.add_parser("registry", help="Artifact registry tools.")
    r_sub = r.add_subparsers(dest="registry_cmd", required=True)
    e = r_sub.add_parser("export", help="Dump the artifact registry as JSON.")
    e.add_argument("--registry")
    e.add_argument("--out")
    e.set_defaults(func=cmd_registry_export)
    return parser


def validate_args(args: argparse.Namespace) -> None:
    """Checks what argparse cannot and replaces raw strings with typed values.

    Raises ValueError with a user-facing message.
    """

    if args.cmd == "merge" and len(args.reports) < 2:
        raise ValueError("merge needs at least two reports")
    if args.cmd == "gen-corpus":
        args.seed = parse_seed(args.seed)
        args.scenario = None
        if not args.all:
            if not (args.provider and args.platform and args.app_version and args.state):
                raise ValueError(
                    "--provider, --platform, --app-version and --state are required without --all"
                )
            args.scenario = Scenario(
                parse_identity(args.provider, args.platform, args.app_version),
                parse_state(args.state),
                args.seed,
            )
    if args.cmd == "box-url":
        args.token = parse_token(args.token, error_message="auth token must be alphanumeric")
        args.file_id = parse_token(args.file_id, error_message="file id must be alphanumeric")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        validate_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    level = logging.DEBUG if args.verbose else get_settings().log_level
    logging.basicConfig(level=level, format="%(levelname)s %(name)s %(message)s")
    try:
        return args.func(args)
    except (CloudsiftError, OSError, ValueError):
        logger.exception("[%s] failed", args.cmd.upper())
        return EXIT_FATAL

