"""Batch checker: load a module graph, check it, and answer queries.

Verbs:
    check  [paths...]          type-check (bundled library first, then paths)
    normal <name> [paths...]   print the normal form of a checked definition
    axioms <name> [paths...]   print the axiom/admit closure of a declaration
    audit  [paths...]          one report row per declaration + anchor slugs

Flags: --no-prelude, --forbid-admit, --jobs N, --format human|machine.

Exit codes: 0 clean; 1 type/parse/audit errors; 2 module-graph errors
(missing module, import cycle, duplicate module); 3 internal invariant
violation.  Diagnostics go to stderr; reports go to stdout.  Output is
deterministic: modules are reported in manifest order then argument order,
regardless of --jobs.
"""
from __future__ import annotations

import argparse
import sys
import threading
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path

from .checker import Signature, check_declaration
from .core import (
    ADMIT,
    Declaration,
    Diagnostic,
    InternalCompilerError,
    pretty,
)
from .elaborator import elaborate_declaration
from .parser import SurfaceModule, lower_module, parse_module
from .registry import (
    FileHeader,
    OUT_OF_SCOPE_ANCHORS,
    PRELUDE_ORDER,
    declaration_tier,
    parse_header,
    prelude_dir,
    statement_audit,
)
from .semantics import eval_term, quote

# Proof checking recurses with the proof term; give it room.  Worker threads
# get a large stack so deep normalizations do not hit the C stack either.
_RECURSION_LIMIT = 150_000
_THREAD_STACK = 512 * 1024 * 1024


@dataclass
class ModuleJob:
    name: str
    path: Path
    text: str
    header: FileHeader
    bundled: bool
    surface: SurfaceModule | None = None
    parse_error: Diagnostic | None = None
    imports: tuple[str, ...] = ()
    # filled in by checking:
    decls: list[Declaration] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    skipped_on: str | None = None


def _load_jobs(paths: list[str], no_prelude: bool) -> list[ModuleJob]:
    """Collect module sources: bundled manifest first, then the arguments."""
    files: list[tuple[Path, bool]] = []
    if not no_prelude:
        base = prelude_dir()
        files += [(base / f"{name}.hott", True) for name in PRELUDE_ORDER]
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files += [(f, False) for f in sorted(p.glob("*.hott"))]
        else:
            files.append((p, False))
    jobs: list[ModuleJob] = []
    seen: dict[str, Path] = {}
    for path, bundled in files:
        if not path.exists():
            raise Diagnostic("error", None, "SCOPE", f"no such file: {path}")
        name = path.stem
        if name in seen:
            if seen[name] == path:
                continue  # same file listed twice is harmless
            raise Diagnostic(
                "error",
                None,
                "IMPORT-CYCLE",
                f"module {name} provided twice: {seen[name]} and {path}",
            )
        seen[name] = path
        text = path.read_text(encoding="utf-8")
        header = parse_header(text, path.name) if bundled else _optional_header(text)
        jobs.append(ModuleJob(name, path, text, header, bundled))
    return jobs


def _optional_header(text: str) -> FileHeader:
    try:
        return parse_header(text, "<arg>")
    except Diagnostic:
        return FileHeader(tier=1, anchors=(), levels=())


def _parse_all(jobs: list[ModuleJob]) -> None:
    for job in jobs:
        try:
            job.surface = parse_module(job.text, str(job.path), job.name)
            job.imports = tuple(name for name, _span in job.surface.imports)
        except Diagnostic as d:
            job.parse_error = d


def _order_graph(jobs: list[ModuleJob]) -> None:
    """Validate imports: every import resolves and the graph is acyclic."""
    known = {job.name for job in jobs}
    for job in jobs:
        for imp in job.imports:
            if imp not in known:
                raise Diagnostic(
                    "error",
                    None,
                    "SCOPE",
                    f"{job.path}: import {imp} does not match any module "
                    "on the command line or in the bundled library",
                )
    # Kahn's algorithm just to detect cycles; checking keeps manifest order.
    remaining = {job.name: set(job.imports) for job in jobs}
    while remaining:
        ready = [name for name, deps in remaining.items() if not deps]
        if not ready:
            cycle = " -> ".join(sorted(remaining))
            raise Diagnostic(
                "error", None, "IMPORT-CYCLE", f"import cycle among: {cycle}"
            )
        for name in ready:
            del remaining[name]
        for deps in remaining.values():
            deps.difference_update(ready)


def _check_module(job: ModuleJob, sig: Signature, exports: dict[str, list[str]],
                  forbid_admit: bool) -> None:
    if job.parse_error is not None:
        job.diagnostics.append(job.parse_error)
        return
    try:
        lowered = lower_module(job.surface, exports)
    except Diagnostic as d:
        job.diagnostics.append(d)
        return
    for low in lowered:
        try:
            decl = check_declaration(sig, elaborate_declaration(sig, low))
        except Diagnostic as d:
            job.diagnostics.append(d)
            return  # later declarations would only cascade
        decl.tier = declaration_tier(decl, job.header.tier)
        job.decls.append(decl)
        if forbid_admit:
            admits = sorted(
                m for m in decl.axiom_closure if m.startswith("admit:")
            )
            if admits:
                job.diagnostics.append(
                    Diagnostic(
                        "error",
                        low.span,
                        "ADMIT-FORBIDDEN",
                        f"{decl.name} depends on admitted statements "
                        "under --forbid-admit",
                        tuple(admits),
                    )
                )


def _run_graph(jobs: list[ModuleJob], n_workers: int, forbid_admit: bool) -> Signature:
    """Check all modules, parallel across independent modules.

    The signature is append-only and a module only reads names its imports
    already provide, so sharing it between worker threads is safe; results
    are buffered per module and reported in manifest order.
    """
    sig = Signature()
    exports: dict[str, list[str]] = {}
    done: set[str] = set()
    bad: set[str] = set()  # failed or skipped: dependents are skipped
    started: set[str] = set()
    pending: dict[object, ModuleJob] = {}

    def start(pool, job):
        module_exports = {imp: exports[imp] for imp in job.imports}
        started.add(job.name)
        fut = pool.submit(_check_module, job, sig, module_exports, forbid_admit)
        pending[fut] = job

    threading.stack_size(_THREAD_STACK)
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        while len(done) < len(jobs):
            for job in jobs:
                if job.name in done or job.name in started:
                    continue
                if not all(imp in done for imp in job.imports):
                    continue
                failed_dep = next((i for i in job.imports if i in bad), None)
                if failed_dep is not None:
                    job.skipped_on = failed_dep
                    done.add(job.name)
                    bad.add(job.name)
                    continue
                start(pool, job)
            if not pending:
                continue
            finished, _ = wait(pending, return_when=FIRST_COMPLETED)
            for fut in finished:
                job = pending.pop(fut)
                fut.result()  # re-raise internal errors
                done.add(job.name)
                if job.diagnostics:
                    bad.add(job.name)
                else:
                    exports[job.name] = [
                        d.name.split(".", 1)[1] for d in job.decls
                    ]
    return sig


# -- output -------------------------------------------------------------------


def _print_diagnostic(d: Diagnostic, texts: dict[str, str], machine: bool) -> None:
    where = "-"
    if d.span is not None:
        where = f"{d.span.file}:{d.span.line}:{d.span.column}"
    if machine:
        line = "\t".join([where, d.rule_id, d.message, *d.notes])
        print(line, file=sys.stderr)
        return
    print(f"{where}: error[{d.rule_id}]: {d.message}", file=sys.stderr)
    text = texts.get(d.span.file) if d.span is not None else None
    if text is not None:
        lines = text.splitlines()
        if 1 <= d.span.line <= len(lines):
            src = lines[d.span.line - 1]
            caret = " " * (d.span.column - 1) + "^" * max(1, d.span.length)
            print(f"    {src}", file=sys.stderr)
            print(f"    {caret}", file=sys.stderr)
    for note in d.notes:
        print(f"  note: {note}", file=sys.stderr)


def _closure_columns(decl: Declaration) -> tuple[str, str]:
    axioms = sorted(m for m in decl.axiom_closure if not m.startswith("admit:"))
    admits = sorted(m for m in decl.axiom_closure if m.startswith("admit:"))
    return (",".join(axioms) or "-", ",".join(admits) or "-")


def _audit_rows(jobs: list[ModuleJob]) -> list[tuple[str, str, str, str, str]]:
    modules = [
        (job.name, job.header, job.decls) for job in jobs if job.skipped_on is None
    ]
    anchored = {
        decl.name: slug
        for decl, slug in statement_audit(modules)
        if decl is not None
    }
    rows = []
    for job in jobs:
        for decl in job.decls:
            axioms, admits = _closure_columns(decl)
            rows.append(
                (
                    decl.name,
                    str(decl.tier),
                    axioms,
                    admits,
                    anchored.get(decl.name, "-"),
                )
            )
    for slug in OUT_OF_SCOPE_ANCHORS:
        rows.append(("-", "-", "-", "-", slug))
    return rows


def _emit_rows(rows: list[tuple[str, ...]], machine: bool) -> None:
    if machine:
        for row in rows:
            print("\t".join(row))
        return
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())


# -- verbs --------------------------------------------------------------------


def _report_check(jobs: list[ModuleJob], machine: bool, summary: bool) -> int:
    texts = {str(job.path): job.text for job in jobs}
    failures = 0
    checked = 0
    for job in jobs:
        for d in job.diagnostics:
            _print_diagnostic(d, texts, machine)
            failures += 1
        if job.skipped_on is not None:
            print(
                f"{job.path}: skipped (imports failed module {job.skipped_on})",
                file=sys.stderr,
            )
            failures += 1
        checked += len(job.decls)
    if failures:
        return 1
    if summary and not machine:
        print(f"ok: {len(jobs)} modules, {checked} declarations")
    return 0


def _find_declaration(jobs: list[ModuleJob], name: str) -> Declaration | None:
    for job in jobs:
        for decl in job.decls:
            if decl.name == name:
                return decl
    return None


def run(config: argparse.Namespace) -> int:
    jobs = _load_jobs(config.paths, config.no_prelude)
    _parse_all(jobs)
    _order_graph(jobs)
    sig = _run_graph(jobs, config.jobs, config.forbid_admit)
    machine = config.format == "machine"

    status = _report_check(jobs, machine, summary=config.command == "check")
    if config.command == "check":
        return status
    if status != 0:
        return status

    if config.command == "audit":
        try:
            rows = _audit_rows(jobs)
        except Diagnostic as d:
            _print_diagnostic(d, {}, machine)
            return 1
        _emit_rows(rows, machine)
        return 0

    decl = _find_declaration(jobs, config.name)
    if decl is None:
        print(f"unknown declaration: {config.name}", file=sys.stderr)
        return 1
    if config.command == "axioms":
        axioms, admits = _closure_columns(decl)
        if machine:
            _emit_rows([(decl.name, str(decl.tier), axioms, admits, "-")], True)
        else:
            print(f"{decl.name} (tier {decl.tier})")
            print(f"  axioms: {axioms}")
            print(f"  admits: {admits}")
        return 0
    # normal
    if decl.body is None:
        print(f"{decl.name} is a {decl.kind}; it has no body", file=sys.stderr)
        return 1
    value = eval_term(decl.body, (), sig.values)
    print(pretty(quote(value, 0), elide=True))
    return 0


def _build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hottc", description="type checker and library auditor"
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_name: bool) -> None:
        if with_name:
            p.add_argument("name", help="qualified declaration name")
        p.add_argument("paths", nargs="*", help=".hott files or directories")
        p.add_argument("--no-prelude", action="store_true",
                       help="do not load the bundled library")
        p.add_argument("--forbid-admit", action="store_true",
                       help="fail on any dependence on admitted statements")
        p.add_argument("--jobs", type=int, default=1, metavar="N",
                       help="parallel module checking (default 1)")
        p.add_argument("--format", choices=("human", "machine"),
                       default="human", help="report format")

    common(sub.add_parser("check", help="type-check modules"), False)
    common(sub.add_parser("normal", help="print a definition's normal form"), True)
    common(sub.add_parser("axioms", help="print a declaration's axiom closure"), True)
    common(sub.add_parser("audit", help="print the full audit table"), False)
    return ap


def main(argv: list[str] | None = None) -> int:
    sys.setrecursionlimit(_RECURSION_LIMIT)
    config = _build_arg_parser().parse_args(argv)
    if config.jobs < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return run(config)
    except Diagnostic as d:
        _print_diagnostic(d, {}, config.format == "machine")
        return 2 if d.rule_id in ("IMPORT-CYCLE", "SCOPE") else 1
    except InternalCompilerError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
