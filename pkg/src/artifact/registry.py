"""Bundled library manifest, file headers, and the statement audit.

Every bundled `.hott` file opens with a comment header:

    -- tier: 1
    -- anchors: id_fundamental=fundamental-id total_path=path-total-space
    -- levels: 0 1

`tier` is the default tier of the file's declarations (admits are always
tier 3, and a definition whose closure picks up an admit is demoted to
tier 3 so tiers stay truthful).  `anchors` attaches stable statement slugs
to declarations for the audit report; `levels` records which universe
levels the file instantiates (there is no level polymorphism, so leveled
variants are separate declarations).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .core import ADMIT, Declaration, Diagnostic

# Dependency order of the bundled library; `hottc check` and `hottc audit`
# process (and report) files in exactly this order.
PRELUDE_ORDER: tuple[str, ...] = (
    "Bootstrap",
    "Basics",
    "SigmaId",
    "Contr",
    "Equiv",
    "Fiberwise",
    "FundamentalId",
    "Funext",
    "EmbProp",
    "Pullback",
    "Univalence",
    "Smallness",
    "Pushout",
    "Shapes",
    "RGraph",
    "SeqColim",
    "JoinConstruction",
    "Descent",
    "Reflective",
    "Modal",
    "Compact",
    "ObjectClassifier",
)

# Anchored statements that deliberately have no home declaration (noted in
# the audit with `-` columns so the coverage table stays complete).
OUT_OF_SCOPE_ANCHORS: tuple[str, ...] = (
    "seqcolim-homotopy-groups",
    "codiscrete-graph-adjunction",
)


@dataclass(frozen=True)
class FileHeader:
    tier: int
    anchors: tuple[tuple[str, str], ...]  # (unqualified declaration, slug)
    levels: tuple[int, ...]


_HEADER_FIELD = re.compile(r"^--\s*(tier|anchors|levels):\s*(.*?)\s*$")


def parse_header(source: str, file: str) -> FileHeader:
    """Extract the header fields from a file's leading comment lines."""
    tier: int | None = None
    anchors: list[tuple[str, str]] = []
    levels: list[int] = []
    for line in source.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if not stripped.startswith("--"):
            break  # header is over once real source starts
        m = _HEADER_FIELD.match(stripped)
        if m is None:
            continue
        field, rest = m.group(1), m.group(2)
        if field == "tier":
            if not rest.isdigit() or int(rest) not in (1, 2, 3):
                raise Diagnostic(
                    "error", None, "PARSE", f"{file}: tier must be 1, 2, or 3"
                )
            tier = int(rest)
        elif field == "anchors":
            for part in rest.split():
                name, eq, slug = part.partition("=")
                if not eq or not name or not slug:
                    raise Diagnostic(
                        "error",
                        None,
                        "PARSE",
                        f"{file}: anchors entries look like name=slug, got {part!r}",
                    )
                anchors.append((name, slug))
        else:
            for part in rest.split():
                if not part.isdigit():
                    raise Diagnostic(
                        "error", None, "PARSE", f"{file}: levels must be numbers"
                    )
                levels.append(int(part))
    if tier is None:
        raise Diagnostic(
            "error", None, "PARSE", f"{file}: missing `-- tier:` header line"
        )
    return FileHeader(tier, tuple(anchors), tuple(levels))


def prelude_dir() -> Path:
    return Path(str(resources.files("artifact") / "stdlib"))


def prelude_manifest() -> list[tuple[Path, int]]:
    """The bundled files in dependency order with their header tiers."""
    out = []
    base = prelude_dir()
    for name in PRELUDE_ORDER:
        path = base / f"{name}.hott"
        header = parse_header(path.read_text(encoding="utf-8"), path.name)
        out.append((path, header.tier))
    return out


def declaration_tier(decl: Declaration, file_tier: int) -> int:
    """Admits are statements (tier 3); admit-tainted proofs are demoted too."""
    if decl.kind == ADMIT:
        return 3
    if any(marker.startswith("admit:") for marker in decl.axiom_closure):
        return 3
    return file_tier


def statement_audit(
    modules: list[tuple[str, FileHeader, list[Declaration]]]
) -> list[tuple[Declaration | None, str]]:
    """Pair anchored declarations with their slugs, in manifest order.

    Raises a Diagnostic if a header anchors a name the file never declares.
    Rows with a `None` declaration record anchors that deliberately have no
    corpus home.
    """
    rows: list[tuple[Declaration | None, str]] = []
    for module, header, decls in modules:
        by_name = {d.name: d for d in decls}
        for name, slug in header.anchors:
            qualified = f"{module}.{name}"
            if qualified not in by_name:
                raise Diagnostic(
                    "error",
                    None,
                    "SCOPE",
                    f"{module}: anchor {slug} names {name}, which the file "
                    "does not declare",
                )
            rows.append((by_name[qualified], slug))
    for slug in OUT_OF_SCOPE_ANCHORS:
        rows.append((None, slug))
    return rows
