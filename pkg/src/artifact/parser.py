"""Lexer, parser, and desugarer for the surface language (.hott files).

Surface syntax (informal):

    module  := {import Ident} {decl}
    decl    := "def" ident {group} ":" term ":=" term
             | "postulate" ident ":" term
             | "admit" ident ":" term
    group   := "(" ident+ ":" term ")" | "{" ident+ ":" term "}"
    term    := "λ" lam-binder+ "." term        (also "\\" or "lam")
             | "Π" group+ "." term             (also "Pi")
             | "Σ" group+ "." term             (also "Sig")
             | product ["→" term]              (also "->")
    product := app ["×" product]               (also "*")
    app     := atom {atom | "{" term "}"}
    atom    := ident | number | "_" | "(" term ")" | "(" term "," term ... ")"

A lambda binder is an identifier, `_`, an annotated group `(x y : T)` (the
annotation must be a hole), or a pattern pair `(x , y)` which projects the
bound pair.  Comments are `--` to end of line and nested `{- ... -}` blocks.
Identifiers may contain dashes (`po-inl`); a dash is part of an identifier
only when the next character continues it, so `a->b` and `x--c` still lex as
an arrow and a comment.  Qualified names attach a module prefix with a dot
(`Basics.add`); note that `λ x . x` needs the spaces, since `x.x` reads as a
qualified name.  Numeric literals abbreviate successor chains, and `_` in a
term is a hole for the elaborator to solve.  Primitive constructors and
eliminators are keywords applied in spine style; under-applied primitives
eta-expand to lambdas, so `suc` alone means `λ n . suc n`.
"""
from __future__ import annotations

import difflib
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from .core import (
    ADMIT,
    App,
    Const,
    DEFINITION,
    Diagnostic,
    Empty,
    Fst,
    Glue,
    Id,
    IndEmpty,
    IndId,
    IndNat,
    IndPush,
    IndSum,
    Inl,
    Inr,
    Lam,
    Meta,
    Nat,
    POSTULATE,
    Pair,
    Pi,
    PoInl,
    PoInr,
    Push,
    Refl,
    Sigma,
    Snd,
    Span,
    Suc,
    Sum,
    Term,
    Tt,
    U,
    Unit,
    Var,
    Zero,
    shift,
)

DECL_KEYWORDS = ("def", "postulate", "admit", "import")

# Primitive spine heads: keyword -> (arity, constructor over core terms).
PRIMITIVES: dict[str, tuple[int, object]] = {
    "Nat": (0, Nat),
    "zero": (0, Zero),
    "suc": (1, Suc),
    "ind-nat": (4, IndNat),
    "Empty": (0, Empty),
    "ind-empty": (2, IndEmpty),
    "Unit": (0, Unit),
    "tt": (0, Tt),
    "Sum": (2, Sum),
    "inl": (1, Inl),
    "inr": (1, Inr),
    "ind-sum": (4, IndSum),
    "Id": (3, Id),
    "refl": (1, Refl),
    "ind-id": (5, IndId),
    "Push": (5, Push),
    "po-inl": (1, PoInl),
    "po-inr": (1, PoInr),
    "glue": (1, Glue),
    "ind-push": (5, IndPush),
    "fst": (1, Fst),
    "snd": (1, Snd),
}

KEYWORDS = frozenset(DECL_KEYWORDS) | frozenset(PRIMITIVES) | {"U"}

_ETA_NAMES = ("a", "b", "c", "d", "e")


# -- tokens -------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "number" | "keyword" | "sym" | "eof"
    text: str
    span: Span


def _ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def lex(source: str, file: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def span(length: int) -> Span:
        return Span(file, line, col, length)

    def error(msg: str, length: int = 1) -> Diagnostic:
        return Diagnostic("error", span(length), "PARSE", msg)

    def advance(text: str) -> None:
        nonlocal line, col
        for c in text:
            if c == "\n":
                line += 1
                col = 1
            else:
                col += 1

    while i < n:
        c = source[i]
        if c in " \t\r\n":
            advance(c)
            i += 1
            continue
        if source.startswith("--", i):
            end = source.find("\n", i)
            end = n if end == -1 else end
            advance(source[i:end])
            i = end
            continue
        if source.startswith("{-", i):
            depth, j = 1, i + 2
            while j < n and depth:
                if source.startswith("{-", j):
                    depth += 1
                    j += 2
                elif source.startswith("-}", j):
                    depth -= 1
                    j += 2
                else:
                    j += 1
            if depth:
                raise error("unterminated block comment", 2)
            advance(source[i:j])
            i = j
            continue
        if source.startswith(":=", i):
            tokens.append(Token("sym", ":=", span(2)))
            advance(":=")
            i += 2
            continue
        if source.startswith("->", i):
            tokens.append(Token("sym", "->", span(2)))
            advance("->")
            i += 2
            continue
        if c in "(){}:.,":
            tokens.append(Token("sym", c, span(1)))
            advance(c)
            i += 1
            continue
        if c in "λ\\":
            tokens.append(Token("sym", "lam", span(1)))
            advance(c)
            i += 1
            continue
        if c == "Π":
            tokens.append(Token("sym", "pi", span(1)))
            advance(c)
            i += 1
            continue
        if c == "Σ":
            tokens.append(Token("sym", "sigma", span(1)))
            advance(c)
            i += 1
            continue
        if c in "→":
            tokens.append(Token("sym", "->", span(1)))
            advance(c)
            i += 1
            continue
        if c in "×*":
            tokens.append(Token("sym", "*", span(1)))
            advance(c)
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("number", source[i:j], span(j - i)))
            advance(source[i:j])
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n:
                if j < n and _ident_char(source[j]):
                    j += 1
                elif source[j] == "-" and j + 1 < n and _ident_char(source[j + 1]):
                    j += 1  # dash inside an identifier
                elif (
                    source[j] == "."
                    and j + 1 < n
                    and (source[j + 1].isalpha() or source[j + 1] == "_")
                    and j > i
                ):
                    j += 1  # qualified name
                else:
                    break
            text = source[i:j]
            if text == "_":
                tokens.append(Token("sym", "_", span(1)))
            elif text == "lam":
                tokens.append(Token("sym", "lam", span(3)))
            elif text == "Pi":
                tokens.append(Token("sym", "pi", span(2)))
            elif text == "Sig":
                tokens.append(Token("sym", "sigma", span(3)))
            elif text in KEYWORDS:
                tokens.append(Token("keyword", text, span(len(text))))
            else:
                tokens.append(Token("ident", text, span(len(text))))
            advance(text)
            i = j
            continue
        raise error(f"unexpected character {c!r}")
    tokens.append(Token("eof", "", Span(file, line, col, 1)))
    return tokens


# -- surface syntax trees -----------------------------------------------------


@dataclass(frozen=True)
class SName:
    text: str
    span: Span


@dataclass(frozen=True)
class SNum:
    value: int
    span: Span


@dataclass(frozen=True)
class SHole:
    span: Span


@dataclass(frozen=True)
class SUniverse:
    level: int
    span: Span


@dataclass(frozen=True)
class SSpine:
    head: "SNode"
    args: tuple[tuple["SNode", bool], ...]  # (argument, is-implicit)
    span: Span


@dataclass(frozen=True)
class SPair:
    items: tuple["SNode", ...]
    span: Span


@dataclass(frozen=True)
class SArrow:
    lhs: "SNode"
    rhs: "SNode"
    span: Span


@dataclass(frozen=True)
class SProd:
    lhs: "SNode"
    rhs: "SNode"
    span: Span


@dataclass(frozen=True)
class PlainBinder:
    name: str
    annotated: bool
    span: Span


@dataclass(frozen=True)
class PairBinder:
    first: str
    second: str
    span: Span


@dataclass(frozen=True)
class Group:
    names: tuple[str, ...]
    type: "SNode"
    implicit: bool
    span: Span


@dataclass(frozen=True)
class SLam:
    binders: tuple[object, ...]  # PlainBinder | PairBinder
    body: "SNode"
    span: Span


@dataclass(frozen=True)
class SBind:
    kind: str  # "pi" | "sigma"
    groups: tuple[Group, ...]
    body: "SNode"
    span: Span


SNode = SName | SNum | SHole | SUniverse | SSpine | SPair | SArrow | SProd | SLam | SBind


@dataclass(frozen=True)
class RawDecl:
    kind: str  # DEFINITION | POSTULATE | ADMIT
    name: str
    groups: tuple[Group, ...]
    type: SNode
    body: SNode | None
    span: Span  # span of the declared name


@dataclass
class SurfaceModule:
    name: str
    file: str
    source: str
    imports: list[tuple[str, Span]] = field(default_factory=list)
    decls: list[RawDecl] = field(default_factory=list)


# -- parser ---------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at_sym(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text == text

    def eat_sym(self, text: str) -> Token | None:
        if self.at_sym(text):
            return self.next()
        return None

    def expect_sym(self, text: str, what: str) -> Token:
        tok = self.eat_sym(text)
        if tok is None:
            raise self.error(f"expected {what}")
        return tok

    def expect_ident(self, what: str) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise self.error(f"expected {what}")
        return self.next()

    def error(self, msg: str) -> Diagnostic:
        t = self.peek()
        found = t.text or "end of file"
        return Diagnostic("error", t.span, "PARSE", f"{msg}, found {found!r}")

    # terms ------------------------------------------------------------------

    def term(self) -> SNode:
        t = self.peek()
        if t.kind == "sym" and t.text == "lam":
            return self.lam()
        if t.kind == "sym" and t.text in ("pi", "sigma"):
            return self.binder(t.text)
        return self.arrow()

    def lam(self) -> SNode:
        start = self.next()
        binders: list[object] = []
        while not self.at_sym("."):
            binders.append(self.lam_binder())
        self.expect_sym(".", "'.' after lambda binders")
        if not binders:
            raise self.error("lambda needs at least one binder")
        return SLam(tuple(binders), self.term(), start.span)

    def lam_binder(self) -> object:
        t = self.peek()
        if t.kind == "ident":
            self.next()
            return PlainBinder(t.text, False, t.span)
        if t.kind == "sym" and t.text == "_":
            self.next()
            return PlainBinder("_", False, t.span)
        if t.kind == "sym" and t.text == "(":
            self.next()
            first = self.expect_ident("a binder name")
            if self.eat_sym(","):
                second = self.expect_ident("the second name of a pattern pair")
                self.expect_sym(")", "')' closing the pattern pair")
                return PairBinder(first.text, second.text, first.span)
            names = [first]
            while self.peek().kind == "ident":
                names.append(self.next())
            self.expect_sym(":", "':' in an annotated binder")
            ann = self.term()
            self.expect_sym(")", "')' closing the binder")
            if not isinstance(ann, SHole):
                raise Diagnostic(
                    "error",
                    first.span,
                    "PARSE",
                    "lambda annotations must be holes; "
                    "give the type in the declaration signature",
                )
            if len(names) == 1:
                return PlainBinder(names[0].text, True, names[0].span)
            return tuple(PlainBinder(n.text, True, n.span) for n in names)
        raise self.error("expected a lambda binder")

    def binder(self, which: str) -> SNode:
        start = self.next()
        groups: list[Group] = []
        while not self.at_sym("."):
            groups.append(self.group(implicit_ok=which == "pi"))
        self.expect_sym(".", f"'.' after {which} binders")
        if not groups:
            raise self.error(f"{which} needs at least one binder group")
        return SBind(which, tuple(groups), self.term(), start.span)

    def group(self, implicit_ok: bool) -> Group:
        t = self.peek()
        implicit = t.kind == "sym" and t.text == "{"
        if implicit and not implicit_ok:
            raise self.error("implicit binders are only allowed on Π")
        if not (self.at_sym("(") or implicit):
            raise self.error("expected a binder group")
        close = "}" if implicit else ")"
        self.next()
        names = [self.expect_ident("a binder name")]
        while self.peek().kind == "ident":
            names.append(self.next())
        self.expect_sym(":", "':' in a binder group")
        ty = self.term()
        self.expect_sym(close, f"'{close}' closing the binder group")
        return Group(tuple(n.text for n in names), ty, implicit, names[0].span)

    def arrow(self) -> SNode:
        lhs = self.product()
        if self.at_sym("->"):
            arr = self.next()
            return SArrow(lhs, self.term(), arr.span)
        return lhs

    def product(self) -> SNode:
        lhs = self.app()
        if self.at_sym("*"):
            star = self.next()
            return SProd(lhs, self.product(), star.span)
        return lhs

    def app(self) -> SNode:
        head = self.atom()
        args: list[tuple[SNode, bool]] = []
        while True:
            if self.at_sym("{"):
                self.next()
                arg = self.term()
                self.expect_sym("}", "'}' closing the implicit argument")
                args.append((arg, True))
                continue
            if self._starts_atom():
                args.append((self.atom(), False))
                continue
            break
        if not args:
            return head
        return SSpine(head, tuple(args), _span_of(head))

    def _starts_atom(self) -> bool:
        t = self.peek()
        if t.kind in ("ident", "number"):
            return True
        if t.kind == "keyword" and t.text not in DECL_KEYWORDS:
            return True
        return t.kind == "sym" and t.text in ("(", "_")

    def atom(self) -> SNode:
        t = self.peek()
        if t.kind == "ident":
            self.next()
            return SName(t.text, t.span)
        if t.kind == "keyword" and t.text == "U":
            self.next()
            lvl = self.peek()
            if lvl.kind != "number":
                raise self.error("U needs a numeric universe level")
            self.next()
            return SUniverse(int(lvl.text), t.span)
        if t.kind == "keyword" and t.text not in DECL_KEYWORDS:
            self.next()
            return SName(t.text, t.span)
        if t.kind == "number":
            self.next()
            return SNum(int(t.text), t.span)
        if t.kind == "sym" and t.text == "_":
            self.next()
            return SHole(t.span)
        if t.kind == "sym" and t.text == "(":
            self.next()
            first = self.term()
            if self.at_sym(","):
                items = [first]
                while self.eat_sym(","):
                    items.append(self.term())
                self.expect_sym(")", "')' closing the pair")
                return SPair(tuple(items), _span_of(first))
            self.expect_sym(")", "')' closing the parenthesis")
            return first
        raise self.error("expected a term")


def _span_of(node: SNode) -> Span:
    return node.span


def parse_module(source: str, file: str, module_name: str) -> SurfaceModule:
    """Parse one source file into a surface module (no name resolution yet)."""
    parser = _Parser(lex(source, file))
    mod = SurfaceModule(module_name, file, source)
    while parser.peek().kind == "keyword" and parser.peek().text == "import":
        parser.next()
        name = parser.expect_ident("a module name to import")
        mod.imports.append((name.text, name.span))
    while parser.peek().kind != "eof":
        tok = parser.peek()
        if tok.kind != "keyword" or tok.text not in ("def", "postulate", "admit"):
            raise parser.error("expected a declaration (def, postulate, or admit)")
        parser.next()
        name = parser.expect_ident("a declaration name")
        groups: list[Group] = []
        if tok.text == "def":
            while parser.at_sym("(") or parser.at_sym("{"):
                groups.append(parser.group(implicit_ok=True))
        parser.expect_sym(":", "':' before the declared type")
        ty = parser.term()
        body = None
        if tok.text == "def":
            parser.expect_sym(":=", "':=' before the definition body")
            body = parser.term()
        kind = {"def": DEFINITION, "postulate": POSTULATE, "admit": ADMIT}[tok.text]
        mod.decls.append(RawDecl(kind, name.text, tuple(groups), ty, body, name.span))
    return mod


# -- desugaring / name resolution ------------------------------------------------


@dataclass(frozen=True)
class LoweredDecl:
    name: str  # qualified
    kind: str
    type: Term
    body: Term | None
    span: Span
    holes: tuple[Span, ...]  # span of each hole, indexed by meta id


class _Scope:
    """Binder frames, innermost last.  Each frame maps surface names to a
    projection path off that binder (pattern pairs bind two names to one
    de Bruijn slot)."""

    def __init__(self) -> None:
        self.frames: list[dict[str, tuple[str, ...]]] = []

    def push(self, frame: dict[str, tuple[str, ...]]) -> None:
        self.frames.append(frame)

    def pop(self) -> None:
        self.frames.pop()

    def resolve(self, name: str) -> tuple[int, tuple[str, ...]] | None:
        for i, frame in enumerate(reversed(self.frames)):
            if name in frame:
                return i, frame[name]
        return None

    def names(self) -> list[str]:
        out: list[str] = []
        for frame in self.frames:
            out.extend(frame)
        return out


class _Desugarer:
    def __init__(self, module: str, visible: dict[str, list[str]]):
        # visible: unqualified name -> qualified candidates (own module first).
        self.module = module
        self.visible = visible
        self.qualified = {q for qs in visible.values() for q in qs}
        self.scope = _Scope()
        self.holes: list[Span] = []

    # -- name resolution ----------------------------------------------------

    def resolve_name(self, node: SName) -> Term:
        hit = self.scope.resolve(node.text)
        if hit is not None:
            index, path = hit
            t: Term = Var(index)
            for proj in path:
                t = Fst(t) if proj == "fst" else Snd(t)
            return t
        if "." in node.text:
            if node.text in self.qualified:
                return Const(node.text)
            raise self.fail(node.span, node.text)
        candidates = self.visible.get(node.text, [])
        if len(candidates) == 1:
            return Const(candidates[0])
        if len(candidates) > 1:
            raise Diagnostic(
                "error",
                node.span,
                "SCOPE",
                f"ambiguous name {node.text}",
                tuple(f"could be {q}" for q in candidates),
            )
        raise self.fail(node.span, node.text)

    def fail(self, span: Span, name: str) -> Diagnostic:
        pool = list(self.visible) + self.scope.names() + sorted(self.qualified)
        close = difflib.get_close_matches(name, pool, n=3, cutoff=0.6)
        notes = tuple(f"did you mean {c}?" for c in close)
        return Diagnostic("error", span, "SCOPE", f"unknown name {name}", notes)

    # -- terms ----------------------------------------------------------------

    def term(self, node: SNode) -> Term:
        match node:
            case SName():
                if node.text in PRIMITIVES:
                    return self.primitive_spine(node, ())
                return self.resolve_name(node)
            case SNum(value, _):
                t: Term = Zero()
                for _ in range(value):
                    t = Suc(t)
                return t
            case SHole(span):
                self.holes.append(span)
                return Meta(len(self.holes) - 1, ())
            case SUniverse(level, _):
                return U(level)
            case SPair(items, _):
                parts = [self.term(item) for item in items]
                out = parts[-1]
                for part in reversed(parts[:-1]):
                    out = Pair(part, out)
                return out
            case SArrow(lhs, rhs, _):
                dom = self.term(lhs)
                return Pi("_", dom, shift(self.term(rhs), 0, 1))
            case SProd(lhs, rhs, _):
                first = self.term(lhs)
                return Sigma("_", first, shift(self.term(rhs), 0, 1))
            case SLam(binders, body, _):
                return self.lam(list(binders), body)
            case SBind("pi", groups, body, _):
                return self.bind_groups(list(groups), body, is_pi=True)
            case SBind("sigma", groups, body, _):
                return self.bind_groups(list(groups), body, is_pi=False)
            case SSpine():
                return self.spine(node)
        raise Diagnostic("error", _span_of(node), "PARSE", "malformed term")

    def lam(self, binders: list[object], body: SNode) -> Term:
        if not binders:
            return self.term(body)
        binder = binders[0]
        if isinstance(binder, tuple):  # annotated group of several names
            return self.lam(list(binder) + binders[1:], body)
        if isinstance(binder, PlainBinder):
            frame = {} if binder.name == "_" else {binder.name: ()}
            self.scope.push(frame)
            try:
                inner = self.lam(binders[1:], body)
            finally:
                self.scope.pop()
            return Lam(binder.name, inner)
        assert isinstance(binder, PairBinder)
        self.scope.push({binder.first: ("fst",), binder.second: ("snd",)})
        try:
            inner = self.lam(binders[1:], body)
        finally:
            self.scope.pop()
        return Lam("p", inner)

    def bind_groups(self, groups: list[Group], body: SNode, *, is_pi: bool) -> Term:
        if not groups:
            return self.term(body)
        group = groups[0]
        name = group.names[0]
        rest_group = groups[1:] if len(group.names) == 1 else [
            Group(group.names[1:], group.type, group.implicit, group.span)
        ] + groups[1:]
        dom = self.term(group.type)
        self.scope.push({} if name == "_" else {name: ()})
        try:
            inner = self.bind_groups(rest_group, body, is_pi=is_pi)
        finally:
            self.scope.pop()
        if is_pi:
            return Pi(name, dom, inner, group.implicit)
        return Sigma(name, dom, inner)

    def spine(self, node: SSpine) -> Term:
        head = node.head
        if isinstance(head, SName) and head.text in PRIMITIVES:
            return self.primitive_spine(head, node.args)
        out = self.term(head)
        for arg, implicit in node.args:
            out = App(out, self.term(arg), implicit)
        return out

    def primitive_spine(
        self, head: SName, args: tuple[tuple[SNode, bool], ...]
    ) -> Term:
        arity, ctor = PRIMITIVES[head.text]
        for arg, implicit in args:
            if implicit:
                raise Diagnostic(
                    "error",
                    _span_of(arg),
                    "PARSE",
                    f"{head.text} takes explicit arguments only",
                )
        lowered = [self.term(arg) for arg, _ in args]
        if len(lowered) >= arity:
            out = ctor(*lowered[:arity]) if arity else ctor()
            for extra in lowered[arity:]:
                out = App(out, extra)
            return out
        missing = arity - len(lowered)
        shifted = [shift(t, 0, missing) for t in lowered]
        fresh_vars = [Var(missing - 1 - i) for i in range(missing)]
        out = ctor(*(shifted + fresh_vars))
        for i in range(missing - 1, -1, -1):
            out = Lam(_ETA_NAMES[i % len(_ETA_NAMES)], out)
        return out


def parse_term(
    source: str,
    file: str = "<term>",
    visible: Mapping[str, Sequence[str]] | None = None,
) -> tuple[Term, tuple[Span, ...]]:
    """Parse a standalone term; returns the term and the spans of its holes.

    `visible` maps unqualified names to their qualified candidates, as in
    `lower_module`.  Useful for tests and tooling.
    """
    parser = _Parser(lex(source, file))
    node = parser.term()
    if parser.peek().kind != "eof":
        raise parser.error("trailing input after the term")
    desugarer = _Desugarer("<term>", {k: list(v) for k, v in (visible or {}).items()})
    term = desugarer.term(node)
    return term, tuple(desugarer.holes)


def lower_module(
    mod: SurfaceModule, exports: Mapping[str, Sequence[str]]
) -> list[LoweredDecl]:
    """Resolve names and desugar all declarations of a parsed module.

    `exports` maps each importable module name to its declared (unqualified)
    names; the module's own earlier declarations are visible unqualified too.
    """
    visible: dict[str, list[str]] = {}

    def add(unqualified: str, qualified: str) -> None:
        visible.setdefault(unqualified, [])
        if qualified not in visible[unqualified]:
            visible[unqualified].append(qualified)

    for imp, span in mod.imports:
        if imp not in exports:
            raise Diagnostic("error", span, "SCOPE", f"unknown module {imp}")
        for name in exports[imp]:
            add(name, f"{imp}.{name}")

    out: list[LoweredDecl] = []
    for raw in mod.decls:
        qualified = f"{mod.name}.{raw.name}"
        desugarer = _Desugarer(mod.name, visible)
        ty = desugarer.bind_groups(list(raw.groups), raw.type, is_pi=True)
        body: Term | None = None
        if raw.body is not None:
            binders: list[object] = []
            for group in raw.groups:
                binders.extend(
                    PlainBinder(n, False, group.span) for n in group.names
                )
            body = desugarer.lam(binders, raw.body)
        out.append(
            LoweredDecl(qualified, raw.kind, ty, body, raw.span, tuple(desugarer.holes))
        )
        add(raw.name, qualified)
    return out
