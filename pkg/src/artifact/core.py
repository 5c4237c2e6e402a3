"""Core term language: terms, declarations, diagnostics, and printing.

Terms use de Bruijn indices; binder names are kept only for printing and are
ignored by equality, so ``t1 == t2`` is alpha-equivalence.
"""
from __future__ import annotations

from dataclasses import dataclass, field


class InternalCompilerError(Exception):
    """Invariant violation inside the kernel (never a user-facing error)."""


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    column: int
    length: int


@dataclass(frozen=True)
class Diagnostic(Exception):
    severity: str  # "error" | "warning"
    span: Span | None
    rule_id: str
    message: str
    notes: tuple[str, ...] = ()

    def render(self, source: str | None = None) -> str:
        where = ""
        if self.span is not None:
            where = f"{self.span.file}:{self.span.line}:{self.span.column}: "
        out = [f"{where}{self.severity}[{self.rule_id}]: {self.message}"]
        if source is not None and self.span is not None and self.span.line >= 1:
            lines = source.splitlines()
            if self.span.line <= len(lines):
                text = lines[self.span.line - 1]
                out.append("  " + text)
                caret = " " * (self.span.column - 1) + "^" * max(1, self.span.length)
                out.append("  " + caret)
        out.extend("  note: " + n for n in self.notes)
        return "\n".join(out)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    index: int


@dataclass(frozen=True)
class U(Term):
    level: int


@dataclass(frozen=True)
class Pi(Term):
    name: str = field(compare=False)
    domain: Term
    codomain: Term
    implicit: bool = False


@dataclass(frozen=True)
class Lam(Term):
    name: str = field(compare=False)
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    implicit: bool = False


@dataclass(frozen=True)
class Sigma(Term):
    name: str = field(compare=False)
    first: Term
    second: Term


@dataclass(frozen=True)
class Pair(Term):
    a: Term
    b: Term


@dataclass(frozen=True)
class Fst(Term):
    pair: Term


@dataclass(frozen=True)
class Snd(Term):
    pair: Term


@dataclass(frozen=True)
class Id(Term):
    type: Term
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Refl(Term):
    point: Term


@dataclass(frozen=True)
class IndId(Term):
    base: Term
    motive: Term
    refl_case: Term
    endpoint: Term
    path: Term


@dataclass(frozen=True)
class Nat(Term):
    pass


@dataclass(frozen=True)
class Zero(Term):
    pass


@dataclass(frozen=True)
class Suc(Term):
    pred: Term


@dataclass(frozen=True)
class IndNat(Term):
    motive: Term
    z_case: Term
    s_case: Term
    scrutinee: Term


@dataclass(frozen=True)
class Empty(Term):
    pass


@dataclass(frozen=True)
class IndEmpty(Term):
    motive: Term
    scrutinee: Term


@dataclass(frozen=True)
class Unit(Term):
    pass


@dataclass(frozen=True)
class Tt(Term):
    pass


@dataclass(frozen=True)
class Sum(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Inl(Term):
    arg: Term


@dataclass(frozen=True)
class Inr(Term):
    arg: Term


@dataclass(frozen=True)
class IndSum(Term):
    motive: Term
    l_case: Term
    r_case: Term
    scrutinee: Term


@dataclass(frozen=True)
class Push(Term):
    src: Term
    left: Term
    right: Term
    f: Term
    g: Term


@dataclass(frozen=True)
class PoInl(Term):
    arg: Term


@dataclass(frozen=True)
class PoInr(Term):
    arg: Term


@dataclass(frozen=True)
class Glue(Term):
    arg: Term


@dataclass(frozen=True)
class IndPush(Term):
    motive: Term
    inl_case: Term
    inr_case: Term
    glue_case: Term
    scrutinee: Term


@dataclass(frozen=True)
class Const(Term):
    name: str


@dataclass(frozen=True)
class Meta(Term):
    mid: int
    spine: tuple[Term, ...] = ()


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------

DEFINITION = "definition"
POSTULATE = "postulate"
ADMIT = "admit"


@dataclass
class Declaration:
    name: str  # qualified, e.g. "Basics.concat"
    kind: str  # DEFINITION | POSTULATE | ADMIT
    type: Term
    body: Term | None
    tier: int = 1
    axiom_closure: frozenset[str] = frozenset()
    anchor: str | None = None
    span: Span | None = None

    def __post_init__(self) -> None:
        if self.kind == DEFINITION and self.body is None:
            raise InternalCompilerError(f"definition {self.name} lacks a body")
        if self.kind != DEFINITION and self.body is not None:
            raise InternalCompilerError(f"{self.kind} {self.name} must not have a body")


# ---------------------------------------------------------------------------
# de Bruijn shifting
# ---------------------------------------------------------------------------


def shift(t: Term, cutoff: int, amount: int) -> Term:
    """Shift free indices >= cutoff by amount (standard de Bruijn shifting)."""
    match t:
        case Var(k):
            if k < cutoff:
                return t
            if k + amount < 0:
                raise InternalCompilerError("de Bruijn index underflow in shift")
            return Var(k + amount)
        case U() | Nat() | Zero() | Empty() | Unit() | Tt() | Const():
            return t
        case Pi(x, dom, cod, imp):
            return Pi(x, shift(dom, cutoff, amount), shift(cod, cutoff + 1, amount), imp)
        case Lam(x, body):
            return Lam(x, shift(body, cutoff + 1, amount))
        case App(f, a, imp):
            return App(shift(f, cutoff, amount), shift(a, cutoff, amount), imp)
        case Sigma(x, first, second):
            return Sigma(x, shift(first, cutoff, amount), shift(second, cutoff + 1, amount))
        case Pair(a, b):
            return Pair(shift(a, cutoff, amount), shift(b, cutoff, amount))
        case Fst(p):
            return Fst(shift(p, cutoff, amount))
        case Snd(p):
            return Snd(shift(p, cutoff, amount))
        case Id(ty, lhs, rhs):
            return Id(shift(ty, cutoff, amount), shift(lhs, cutoff, amount), shift(rhs, cutoff, amount))
        case Refl(point):
            return Refl(shift(point, cutoff, amount))
        case IndId(base, motive, rc, end, path):
            return IndId(
                shift(base, cutoff, amount),
                shift(motive, cutoff, amount),
                shift(rc, cutoff, amount),
                shift(end, cutoff, amount),
                shift(path, cutoff, amount),
            )
        case Suc(n):
            return Suc(shift(n, cutoff, amount))
        case IndNat(motive, z, s, n):
            return IndNat(
                shift(motive, cutoff, amount),
                shift(z, cutoff, amount),
                shift(s, cutoff, amount),
                shift(n, cutoff, amount),
            )
        case IndEmpty(motive, e):
            return IndEmpty(shift(motive, cutoff, amount), shift(e, cutoff, amount))
        case Sum(l, r):
            return Sum(shift(l, cutoff, amount), shift(r, cutoff, amount))
        case Inl(a):
            return Inl(shift(a, cutoff, amount))
        case Inr(a):
            return Inr(shift(a, cutoff, amount))
        case IndSum(motive, lc, rc, s):
            return IndSum(
                shift(motive, cutoff, amount),
                shift(lc, cutoff, amount),
                shift(rc, cutoff, amount),
                shift(s, cutoff, amount),
            )
        case Push(s, a, b, f, g):
            return Push(
                shift(s, cutoff, amount),
                shift(a, cutoff, amount),
                shift(b, cutoff, amount),
                shift(f, cutoff, amount),
                shift(g, cutoff, amount),
            )
        case PoInl(a):
            return PoInl(shift(a, cutoff, amount))
        case PoInr(a):
            return PoInr(shift(a, cutoff, amount))
        case Glue(a):
            return Glue(shift(a, cutoff, amount))
        case IndPush(motive, ia, ib, ig, s):
            return IndPush(
                shift(motive, cutoff, amount),
                shift(ia, cutoff, amount),
                shift(ib, cutoff, amount),
                shift(ig, cutoff, amount),
                shift(s, cutoff, amount),
            )
        case Meta(mid, spine):
            return Meta(mid, tuple(shift(a, cutoff, amount) for a in spine))
    raise InternalCompilerError(f"shift: unhandled term {t!r}")


def occurs_free(t: Term, index: int) -> bool:
    """Does de Bruijn index `index` occur free in t?"""
    match t:
        case Var(k):
            return k == index
        case U() | Nat() | Zero() | Empty() | Unit() | Tt() | Const():
            return False
        case Pi(_, dom, cod, _):
            return occurs_free(dom, index) or occurs_free(cod, index + 1)
        case Lam(_, body):
            return occurs_free(body, index + 1)
        case Sigma(_, first, second):
            return occurs_free(first, index) or occurs_free(second, index + 1)
        case Meta(_, spine):
            return any(occurs_free(a, index) for a in spine)
        case _:
            return any(occurs_free(sub, index) for sub in _children(t))


def _children(t: Term) -> tuple[Term, ...]:
    """Immediate non-binding subterms (binding forms handled by callers)."""
    match t:
        case App(f, a, _):
            return (f, a)
        case Pair(a, b):
            return (a, b)
        case Fst(p) | Snd(p):
            return (p,)
        case Id(ty, lhs, rhs):
            return (ty, lhs, rhs)
        case Refl(p) | Suc(p) | Inl(p) | Inr(p) | PoInl(p) | PoInr(p) | Glue(p):
            return (p,)
        case Sum(left, right):
            return (left, right)
        case IndId(base, motive, rc, end, path):
            return (base, motive, rc, end, path)
        case IndNat(motive, z, s, n):
            return (motive, z, s, n)
        case IndEmpty(motive, e):
            return (motive, e)
        case IndSum(motive, lc, rc, s):
            return (motive, lc, rc, s)
        case Push(s, a, b, f, g):
            return (s, a, b, f, g)
        case IndPush(motive, ia, ib, ig, s):
            return (motive, ia, ib, ig, s)
        case _:
            raise InternalCompilerError(f"_children: unhandled term {t!r}")


# ---------------------------------------------------------------------------
# Pretty-printing
# ---------------------------------------------------------------------------

# Precedence levels: 0 binders (lambda/Pi/Sigma bodies), 1 arrow, 2 product,
# 3 application, 4 atoms.
_ARROW, _PRODUCT, _APP, _ATOM = 1, 2, 3, 4


def pretty(t: Term, names: tuple[str, ...] = (), *, elide: bool = False) -> str:
    """Render a term; output re-parses to an alpha-equal term.

    `names` supplies printing names for the enclosing binders, innermost last.
    With `elide`, lambda binders print as `λ x .` instead of `λ (x : _) .`.
    """
    return _pp(t, list(names), 0, elide)


def _fresh(hint: str, names: list[str]) -> str:
    name = hint if hint and hint != "_" else "x"
    while name in names:
        name += "'"
    return name


def _pp(t: Term, names: list[str], prec: int, elide: bool) -> str:
    def wrap(level: int, s: str) -> str:
        return f"({s})" if prec > level else s

    match t:
        case Var(k):
            if k < len(names):
                return names[len(names) - 1 - k]
            return f"!{k - len(names)}"  # out-of-supply index (diagnostics only)
        case U(i):
            return wrap(_APP, f"U {i}")
        case Const(name):
            return name
        case Meta(mid, spine):
            head = f"?{mid}"
            if not spine:
                return head
            args = " ".join(_pp(a, names, _ATOM, elide) for a in spine)
            return wrap(_APP, f"{head} {args}")
        case Pi(x, dom, cod, imp):
            if not imp and not occurs_free(cod, 0):
                lhs = _pp(dom, names, _PRODUCT, elide)
                rhs = _pp(shift(cod, 1, -1), names, _ARROW, elide)
                return wrap(_ARROW, f"{lhs} → {rhs}")
            x = _fresh(x, names)
            dom_s = _pp(dom, names, 0, elide)
            names.append(x)
            cod_s = _pp(cod, names, 0, elide)
            names.pop()
            braces = ("{", "}") if imp else ("(", ")")
            return wrap(0, f"Π {braces[0]}{x} : {dom_s}{braces[1]} . {cod_s}")
        case Lam(x, body):
            x = _fresh(x, names)
            names.append(x)
            body_s = _pp(body, names, 0, elide)
            names.pop()
            binder = x if elide else f"({x} : _)"
            return wrap(0, f"λ {binder} . {body_s}")
        case App(f, a, imp):
            f_s = _pp(f, names, _APP, elide)
            if imp:
                return wrap(_APP, f"{f_s} {{{_pp(a, names, 0, elide)}}}")
            return wrap(_APP, f"{f_s} {_pp(a, names, _ATOM, elide)}")
        case Sigma(x, first, second):
            if not occurs_free(second, 0):
                lhs = _pp(first, names, _APP, elide)
                rhs = _pp(shift(second, 1, -1), names, _PRODUCT, elide)
                return wrap(_PRODUCT, f"{lhs} × {rhs}")
            x = _fresh(x, names)
            first_s = _pp(first, names, 0, elide)
            names.append(x)
            second_s = _pp(second, names, 0, elide)
            names.pop()
            return wrap(0, f"Σ ({x} : {first_s}) . {second_s}")
        case Pair(a, b):
            return f"({_pp(a, names, 0, elide)} , {_pp(b, names, 0, elide)})"
        case Fst(p):
            return wrap(_APP, f"fst {_pp(p, names, _ATOM, elide)}")
        case Snd(p):
            return wrap(_APP, f"snd {_pp(p, names, _ATOM, elide)}")
        case Id(ty, lhs, rhs):
            return wrap(_APP, _spine("Id", (ty, lhs, rhs), names, elide))
        case Refl(point):
            return wrap(_APP, _spine("refl", (point,), names, elide))
        case IndId(base, motive, rc, end, path):
            return wrap(_APP, _spine("ind-id", (base, motive, rc, end, path), names, elide))
        case Nat():
            return "Nat"
        case Zero():
            return "zero"
        case Suc(n):
            return wrap(_APP, _spine("suc", (n,), names, elide))
        case IndNat(motive, z, s, n):
            return wrap(_APP, _spine("ind-nat", (motive, z, s, n), names, elide))
        case Empty():
            return "Empty"
        case IndEmpty(motive, e):
            return wrap(_APP, _spine("ind-empty", (motive, e), names, elide))
        case Unit():
            return "Unit"
        case Tt():
            return "tt"
        case Sum(l, r):
            return wrap(_APP, _spine("Sum", (l, r), names, elide))
        case Inl(a):
            return wrap(_APP, _spine("inl", (a,), names, elide))
        case Inr(a):
            return wrap(_APP, _spine("inr", (a,), names, elide))
        case IndSum(motive, lc, rc, s):
            return wrap(_APP, _spine("ind-sum", (motive, lc, rc, s), names, elide))
        case Push(s, a, b, f, g):
            return wrap(_APP, _spine("Push", (s, a, b, f, g), names, elide))
        case PoInl(a):
            return wrap(_APP, _spine("po-inl", (a,), names, elide))
        case PoInr(a):
            return wrap(_APP, _spine("po-inr", (a,), names, elide))
        case Glue(a):
            return wrap(_APP, _spine("glue", (a,), names, elide))
        case IndPush(motive, ia, ib, ig, s):
            return wrap(_APP, _spine("ind-push", (motive, ia, ib, ig, s), names, elide))
    raise InternalCompilerError(f"pretty: unhandled term {t!r}")


def _spine(head: str, args: tuple[Term, ...], names: list[str], elide: bool) -> str:
    parts = [head] + [_pp(a, names, _ATOM, elide) for a in args]
    return " ".join(parts)
