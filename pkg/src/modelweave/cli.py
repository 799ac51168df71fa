"""``modelweave`` command line.

Exit codes: 0 success, 1 domain failure (validation, conflict, capacity,
stale digest under ``--strict``), 2 usage or I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .aspect_model import AspectModel
from .core_model import CoreModel
from .dsl import (
    ParseResult,
    Severity,
    dumps_structured,
    export_diagram,
    parse_aspect,
    parse_requirements,
    parse_weaving,
    parse_woven,
    print_woven,
)
from .dsl.diagnostics import ParseDiagnostic
from .dsl.parser import span_for
from .errors import CapacityError, ModelweaveError, UnresolvedConflictError
from .requirements import DEFAULT_MAX_LEAVES, evaluate, expression_of, redundant_crs
from .weaver import WovenModel, weave
from .weaving_model import WeavingKind, WeavingModel, digest_check, validate_weaving

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

_PARSERS = {
    ".core": parse_woven,
    ".aspect": parse_aspect,
    ".weave": parse_weaving,
    ".reqs": parse_requirements,
}


class UsageError(Exception):
    """Bad arguments or unreadable input (exit 2)."""


class DomainFailure(Exception):
    """Inputs were read but rejected (exit 1)."""


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    output: Optional[str] = None
    strict: bool = False
    force_first: bool = False
    plan_only: bool = False
    format: Optional[str] = None
    verbosity: int = 0


@dataclass
class _Streams:
    out: TextIO
    err: TextIO

    def say(self, line: str = "") -> None:
        self.out.write(line + "\n")

    def diag(self, line: str) -> None:
        self.err.write(line + "\n")


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"{path}: cannot read file ({exc.strerror or exc})") from None


def _load(path: str) -> ParseResult:
    parse = _PARSERS.get(Path(path).suffix)
    if parse is None:
        known = ", ".join(_PARSERS)
        raise UsageError(f"{path}: unknown file type (expected one of {known})")
    return parse(_read(path), path)


def _load_ok(path: str, streams: _Streams):
    result = _load(path)
    for d in result.diagnostics:
        streams.diag(str(d))
    if result.model is None:
        raise DomainFailure(f"{path}: {len(result.errors)} error(s)")
    return result.model


def _core_of(value) -> CoreModel:
    return value.base if isinstance(value, WovenModel) else value


def _write(path: Optional[str], text: str, streams: _Streams) -> None:
    if path is None:
        streams.out.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise UsageError(f"{path}: cannot write file ({exc.strerror or exc})") from None


# -- validate -----------------------------------------------------------------


def _weaving_diagnostics(path: str, result: ParseResult) -> list[ParseDiagnostic]:
    w: WeavingModel = result.model
    base = Path(path).parent
    models = []
    diags: list[ParseDiagnostic] = []
    for ref in (w.left, w.right):
        ref_path = str(base / ref.source_path)
        loaded = _load(ref_path)
        if loaded.model is None:
            diags.append(
                ParseDiagnostic(Severity.ERROR, span_for(None, result.spans, path), f"{ref_path}: referenced model does not parse")
            )
            return diags
        models.append(_core_of(loaded.model))
    left, right = models
    if not isinstance(left, CoreModel):
        diags.append(ParseDiagnostic(Severity.ERROR, span_for(None, result.spans, path), "left model must be a core model"))
        return diags
    try:
        violations = validate_weaving(w, left, right)
    except ModelweaveError as exc:
        return [ParseDiagnostic(Severity.ERROR, span_for(None, result.spans, path), str(exc))]
    for v in violations:
        diags.append(ParseDiagnostic(Severity.ERROR, span_for(v.path, result.spans, path), str(v)))
    for ref in digest_check(w, left, right):
        diags.append(
            ParseDiagnostic(
                Severity.WARNING,
                span_for(None, result.spans, path),
                f"digest of {ref.logical_name!r} ({ref.source_path}) does not match the current model",
            )
        )
    return diags


def cmd_validate(cfg: RunConfig, streams: _Streams) -> int:
    worst = EXIT_OK
    for path in cfg.inputs:
        try:
            result = _load(path)
            diags = list(result.diagnostics)
            if result.model is not None and isinstance(result.model, WeavingModel):
                diags += _weaving_diagnostics(path, result)
        except UsageError as exc:
            streams.diag(f"error: {exc}")
            worst = EXIT_USAGE
            continue
        errors = [d for d in diags if d.severity is Severity.ERROR]
        warnings = [d for d in diags if d.severity is Severity.WARNING]
        if errors:
            streams.say(f"{path}: FAILED ({len(errors)} error(s), {len(warnings)} warning(s))")
            worst = max(worst, EXIT_DOMAIN)
        else:
            streams.say(f"{path}: ok ({len(warnings)} warning(s))")
        for d in diags:
            streams.say(f"  {d}")
    return worst


# -- weave ----------------------------------------------------------------------


class _InputAction(argparse.Action):
    """Collects ``--additional``/``--aspects`` files and the weavings that follow each."""

    def __call__(self, parser, namespace, values, option_string=None):
        pairs = getattr(namespace, "pairs", None) or []
        if option_string == "--with-weaving":
            if not pairs:
                parser.error("--with-weaving must follow --additional or --aspects")
            pairs[-1][2].append(values)
        else:
            pairs.append((option_string.lstrip("-"), values, []))
        namespace.pairs = pairs


def cmd_weave(cfg: RunConfig, pairs, streams: _Streams) -> int:
    core = _core_of(_load_ok(cfg.inputs[0], streams))
    steps = []
    stale = []
    for kind, right_path, weavings in pairs:
        if not weavings:
            raise UsageError(f"--{kind} {right_path} has no --with-weaving")
        right = _load_ok(right_path, streams)
        expected = AspectModel if kind == "aspects" else CoreModel
        right = _core_of(right) if expected is CoreModel else right
        if not isinstance(right, expected):
            raise UsageError(f"{right_path}: --{kind} expects a {'.aspect' if kind == 'aspects' else '.core'} file")
        for wpath in weavings:
            w = _load_ok(wpath, streams)
            if not isinstance(w, WeavingModel):
                raise UsageError(f"{wpath}: expected a .weave file")
            wanted = WeavingKind.CORE_ASPECT if kind == "aspects" else WeavingKind.CORE_ADDITIONAL
            if w.kind is not wanted:
                raise DomainFailure(f"{wpath}: {w.kind.value} weaving given with --{kind}")
            for ref in digest_check(w, core, right):
                stale.append(ref)
                streams.diag(f"{wpath}: warning: digest of {ref.logical_name!r} does not match the supplied model")
            steps.append((w, right))
    if stale and cfg.strict:
        raise DomainFailure(f"{len(stale)} stale digest(s) under --strict")

    try:
        woven, report = weave(core, steps, force_first=cfg.force_first)
    except UnresolvedConflictError as exc:
        for c in exc.conflicts:
            streams.say(f"unresolved {c}")
        raise DomainFailure(str(exc)) from None

    for warning in report.warnings:
        streams.diag(f"warning: {warning}")
    report_out = streams.say if (cfg.output is not None or cfg.plan_only) else streams.diag
    report_out(
        f"woven {woven.base.name}: {len(report.edits)} aspect edit(s), "
        f"{len(report.decisions)} conflict(s) resolved, {len(woven.ordering_constraints)} ordering constraint(s)"
    )
    for edit in report.edits:
        report_out(f"  {edit}")
    for decision in report.decisions:
        report_out(f"  resolved {decision}")
    if not cfg.plan_only:
        _write(cfg.output, print_woven(woven), streams)
    return EXIT_OK


# -- export ---------------------------------------------------------------------


def cmd_export(cfg: RunConfig, streams: _Streams) -> int:
    value = _load_ok(cfg.inputs[0], streams)
    if isinstance(value, WovenModel) and not value.ordering_constraints and not value.provenance:
        value = value.base
    if cfg.format == "structured":
        text = dumps_structured(value)
    else:
        if not isinstance(value, (CoreModel, WovenModel)):
            raise UsageError("diagram export needs a .core file")
        text = export_diagram(value)
    _write(cfg.output, text, streams)
    return EXIT_OK


# -- reqs -----------------------------------------------------------------------


def cmd_reqs(cfg: RunConfig, args, streams: _Streams) -> int:
    graph = _load_ok(cfg.inputs[0], streams)
    try:
        if args.check_redundancy:
            found = redundant_crs(graph, max_leaves=args.max_leaves)
            if not found:
                streams.say("no redundant cooperative requirements")
            for r in found:
                streams.say(f"{r.cr} inferable from {{{', '.join(r.inferred_from)}}}")
            return EXIT_OK
        if args.cr is None:
            raise UsageError("--eval and --expression need --cr")
        if args.expression:
            streams.say(f"{args.cr} = {expression_of(graph, args.cr)}")
        else:
            leaves = [s.strip() for s in args.eval.split(",") if s.strip()]
            unknown = sorted(set(leaves) - set(graph.leaf_ids))
            if unknown:
                raise UsageError(f"unknown leaf requirement(s): {', '.join(unknown)}")
            value = evaluate(graph, args.cr, leaves)
            streams.say(f"{args.cr} = {'true' if value else 'false'}")
    except CapacityError as exc:
        raise DomainFailure(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelweave", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate model files")
    p.add_argument("paths", nargs="+")

    p = sub.add_parser("weave", help="weave additional and aspect models into a core model")
    p.add_argument("core")
    p.add_argument("--additional", action=_InputAction, metavar="FILE")
    p.add_argument("--aspects", action=_InputAction, metavar="FILE")
    p.add_argument("--with-weaving", action=_InputAction, metavar="WEAVE")
    p.add_argument("-o", "--output")
    p.add_argument("--plan", action="store_true", help="print the edit plan without writing the woven model")
    p.add_argument("--strict", action="store_true", help="fail on stale model digests")
    p.add_argument("--force-first", action="store_true", help="break priority ties by declaration order")

    p = sub.add_parser("export", help="export a model as structured JSON or a DOT diagram")
    p.add_argument("input")
    p.add_argument("--format", choices=("structured", "diagram"), required=True)
    p.add_argument("-o", "--output")

    p = sub.add_parser("reqs", help="analyse a cooperative-requirement graph")
    p.add_argument("graph")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--check-redundancy", action="store_true")
    mode.add_argument("--eval", metavar="LEAVES", help="comma-separated satisfied leaf ids")
    mode.add_argument("--expression", action="store_true")
    p.add_argument("--cr")
    p.add_argument("--max-leaves", type=int, default=DEFAULT_MAX_LEAVES)
    return parser


def main(argv: Optional[Sequence[str]] = None, *, stdout: TextIO = None, stderr: TextIO = None) -> int:
    streams = _Streams(stdout or sys.stdout, stderr or sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.ERROR, stream=streams.err)

    cfg = RunConfig(command=args.command, verbosity=args.verbose)
    try:
        if args.command == "validate":
            cfg.inputs = list(args.paths)
            return cmd_validate(cfg, streams)
        if args.command == "weave":
            cfg.inputs = [args.core]
            cfg.output = args.output
            cfg.strict = args.strict
            cfg.force_first = args.force_first
            cfg.plan_only = args.plan
            return cmd_weave(cfg, getattr(args, "pairs", None) or [], streams)
        if args.command == "export":
            cfg.inputs = [args.input]
            cfg.output = args.output
            cfg.format = args.format
            return cmd_export(cfg, streams)
        cfg.inputs = [args.graph]
        return cmd_reqs(cfg, args, streams)
    except UsageError as exc:
        streams.diag(f"error: {exc}")
        return EXIT_USAGE
    except DomainFailure as exc:
        streams.diag(f"error: {exc}")
        return EXIT_DOMAIN
    except ModelweaveError as exc:
        streams.diag(f"error: {exc}")
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
