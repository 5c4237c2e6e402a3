"""Bidirectional type checker over the evaluated (NbE) semantics.

`infer` synthesizes a type value for a term; `check` pushes an expected type
value into a term.  Universe cumulativity is admitted in one place only: when
a synthesized universe is compared against an expected universe of at least
its level (the `CUMUL` rule).  There is no level polymorphism and `U i : U
(i+1)`, so `U 0 : U 0` is rejected.

Recursor typing builds the expected branch types directly as values.  The
glue branch of pushout elimination transports along the glue path, so its
expected type references the library transport constant by qualified name
(`Bootstrap.tr` and its universe-indexed variants); eliminating a pushout
therefore requires that constant to be in scope.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .core import (
    ADMIT,
    App,
    Const,
    DEFINITION,
    Declaration,
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
    InternalCompilerError,
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
    pretty,
)
from .semantics import (
    ClosureFn,
    HConst,
    VEmpty,
    VGlue,
    VId,
    VInl,
    VInr,
    VNat,
    VNeutral,
    VPi,
    VPoInl,
    VPoInr,
    VPush,
    VRefl,
    VSigma,
    VSuc,
    VSum,
    VU,
    VTop,
    VUnit,
    VZero,
    Value,
    apply_closure,
    conv,
    do_app,
    do_fst,
    eval_term,
    fresh,
    quote,
    unfold,
)

# Every diagnostic the toolchain can produce carries one of these rule ids.
RULE_IDS = (
    "PARSE",
    "SCOPE",
    "DUPLICATE",
    "IMPORT-CYCLE",
    "CANNOT-INFER",
    "NON-FUNCTION",
    "TYPE-MISMATCH",
    "CUMUL",
    "PI-FORM",
    "SIGMA-FORM",
    "SIGMA-ELIM",
    "ID-FORM",
    "SUM-FORM",
    "PUSH-FORM",
    "IND-NAT",
    "IND-EMPTY",
    "IND-SUM",
    "IND-ID",
    "IND-PUSH",
    "UNSOLVED-META",
    "ADMIT-FORBIDDEN",
    "INTERNAL",
)

# Transport constants the pushout recursor's glue branch refers to, indexed by
# (level of the pushout, level of the motive's codomain).
_TRANSPORT_MAX_LEVEL = 2


def transport_name(push_level: int, target_level: int) -> str:
    if push_level == 0 and target_level == 0:
        return "Bootstrap.tr"
    return f"Bootstrap.tr{push_level}{target_level}"


def axiom_family(name: str) -> str:
    """Collapse universe-indexed postulate variants onto one family name.

    `Funext.funext1` and `Funext.funext` both count as the `funext` axiom.
    """
    base = name.split(".")[-1]
    return re.sub(r"\d+$", "", base)


@dataclass
class Signature:
    """Checked global declarations: their types, cached values, and metadata."""

    types: dict[str, Value] = field(default_factory=dict)
    values: dict[str, Value] = field(default_factory=dict)
    decls: dict[str, Declaration] = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.types


@dataclass
class Context:
    """Local checking context: binder names, their types, and generic values."""

    sig: Signature
    names: tuple[str, ...] = ()
    types: tuple[Value, ...] = ()
    env: tuple[Value, ...] = ()
    span: Span | None = None

    @property
    def depth(self) -> int:
        return len(self.env)

    def bind(self, name: str, ty: Value) -> "Context":
        return replace(
            self,
            names=self.names + (name,),
            types=self.types + (ty,),
            env=self.env + (fresh(self.depth),),
        )

    def eval(self, t: Term) -> Value:
        return eval_term(t, self.env, self.sig.values)

    def show(self, v: Value) -> str:
        return pretty(quote(v, self.depth, unfold_tops=False), self.names, elide=True)

    def fail(self, rule: str, message: str, notes: tuple[str, ...] = ()) -> Diagnostic:
        return Diagnostic("error", self.span, rule, message, notes)


def _ensure_fits(ctx: Context, inferred: Value, expected: Value) -> None:
    """Conversion check with universe subsumption (the only cumulativity)."""
    if conv(inferred, expected, ctx.depth):
        return
    iv, ev = unfold(inferred), unfold(expected)
    if isinstance(iv, VU) and isinstance(ev, VU):
        if iv.level <= ev.level:
            return
        raise ctx.fail(
            "CUMUL",
            f"universe U {iv.level} does not fit inside U {ev.level}",
        )
    raise ctx.fail(
        "TYPE-MISMATCH",
        f"expected {ctx.show(expected)}, got {ctx.show(inferred)}",
    )


def check_is_type(ctx: Context, t: Term, rule: str = "TYPE-MISMATCH") -> int:
    """Check that t is a type and return its universe level."""
    ty = unfold(infer(ctx, t))
    if isinstance(ty, VU):
        return ty.level
    raise ctx.fail(rule, f"expected a type, got a term of type {ctx.show(ty)}")


def _expect_family(ctx: Context, motive: Term, index_types, rule: str) -> tuple[Value, int]:
    """Check that `motive` is a type family over the given index telescope.

    `index_types` is a tuple of callables; the i-th receives the generic
    values of the earlier indices and returns the i-th index type.  Motives
    written as bare lambdas are checked by peeling binders (their codomain
    universe is inferred from the body), so recursor motives need no
    annotations.  Returns the motive's value and its codomain universe level.
    """
    inner = ctx
    bound: list[Value] = []
    cur: Term = motive
    while len(bound) < len(index_types) and isinstance(cur, Lam):
        ity = index_types[len(bound)](*bound)
        bound.append(fresh(inner.depth))
        inner = inner.bind(cur.name, ity)
        cur = cur.body
    if len(bound) == len(index_types):
        level = check_is_type(inner, cur, rule)
        return ctx.eval(motive), level
    ty = unfold(infer(inner, cur))
    while len(bound) < len(index_types):
        ity = index_types[len(bound)](*bound)
        if not (isinstance(ty, VPi) and conv(ty.domain, ity, inner.depth)):
            raise inner.fail(
                rule,
                f"motive must be a type family over {inner.show(ity)}, "
                f"got one of type {inner.show(ty)}",
            )
        v = fresh(inner.depth)
        bound.append(v)
        ty = unfold(apply_closure(ty.codomain, v))
        inner = inner.bind("_", ity)
    if isinstance(ty, VU):
        return ctx.eval(motive), ty.level
    raise inner.fail(rule, f"motive codomain must be a universe, got {inner.show(ty)}")


def infer(ctx: Context, t: Term) -> Value:
    match t:
        case Var(k):
            if k >= ctx.depth:
                raise InternalCompilerError(f"unbound index {k} reached the checker")
            return ctx.types[ctx.depth - 1 - k]
        case Const(name):
            if name not in ctx.sig:
                raise ctx.fail("SCOPE", f"unknown constant {name}")
            return ctx.sig.types[name]
        case Meta(mid, _):
            raise ctx.fail("UNSOLVED-META", f"unsolved hole ?{mid}")
        case U(i):
            return VU(i + 1)
        case Pi(x, dom, cod, _):
            i = check_is_type(ctx, dom, "PI-FORM")
            j = check_is_type(ctx.bind(x, ctx.eval(dom)), cod, "PI-FORM")
            return VU(max(i, j))
        case Sigma(x, first, second):
            i = check_is_type(ctx, first, "SIGMA-FORM")
            j = check_is_type(ctx.bind(x, ctx.eval(first)), second, "SIGMA-FORM")
            return VU(max(i, j))
        case Lam():
            raise ctx.fail("CANNOT-INFER", "cannot infer the type of a bare lambda")
        case Pair():
            raise ctx.fail("CANNOT-INFER", "cannot infer the type of a bare pair")
        case Inl() | Inr():
            raise ctx.fail("CANNOT-INFER", "sum injections need an expected type")
        case PoInl() | PoInr() | Glue():
            raise ctx.fail("CANNOT-INFER", "pushout constructors need an expected type")
        case App(f, a, imp):
            fty = unfold(infer(ctx, f))
            if not isinstance(fty, VPi):
                raise ctx.fail(
                    "NON-FUNCTION",
                    f"application of a non-function of type {ctx.show(fty)}",
                )
            if fty.implicit != imp:
                kind = "an implicit" if fty.implicit else "an explicit"
                raise ctx.fail("NON-FUNCTION", f"function expects {kind} argument")
            check(ctx, a, fty.domain)
            return apply_closure(fty.codomain, ctx.eval(a))
        case Fst(p):
            pty = unfold(infer(ctx, p))
            if not isinstance(pty, VSigma):
                raise ctx.fail("SIGMA-ELIM", f"fst of a non-pair of type {ctx.show(pty)}")
            return pty.first
        case Snd(p):
            pty = unfold(infer(ctx, p))
            if not isinstance(pty, VSigma):
                raise ctx.fail("SIGMA-ELIM", f"snd of a non-pair of type {ctx.show(pty)}")
            return apply_closure(pty.second, do_fst(ctx.eval(p)))
        case Id(ty, lhs, rhs):
            i = check_is_type(ctx, ty, "ID-FORM")
            tv = ctx.eval(ty)
            check(ctx, lhs, tv)
            check(ctx, rhs, tv)
            return VU(i)
        case Refl(point):
            a = infer(ctx, point)
            pv = ctx.eval(point)
            return VId(a, pv, pv)
        case IndId(base, motive, rc, end, path):
            a = infer(ctx, base)
            av = ctx.eval(base)
            mv, _ = _expect_family(
                ctx, motive, (lambda: a, lambda vy: VId(a, av, vy)), "IND-ID"
            )
            check(ctx, rc, do_app(do_app(mv, av), VRefl(av)))
            check(ctx, end, a)
            xv = ctx.eval(end)
            check(ctx, path, VId(a, av, xv))
            return do_app(do_app(mv, xv), ctx.eval(path))
        case Nat() | Empty() | Unit():
            return VU(0)
        case Zero():
            return VNat()
        case Tt():
            return VUnit()
        case Suc(n):
            check(ctx, n, VNat())
            return VNat()
        case IndNat(motive, z, s, n):
            mv, _ = _expect_family(ctx, motive, (lambda: VNat(),), "IND-NAT")
            check(ctx, z, do_app(mv, VZero()))
            s_ty = VPi(
                "k",
                VNat(),
                ClosureFn(
                    lambda vk: VPi(
                        "ih", do_app(mv, vk), ClosureFn(lambda _: do_app(mv, VSuc(vk)))
                    )
                ),
            )
            check(ctx, s, s_ty)
            check(ctx, n, VNat())
            return do_app(mv, ctx.eval(n))
        case IndEmpty(motive, e):
            mv, _ = _expect_family(ctx, motive, (lambda: VEmpty(),), "IND-EMPTY")
            check(ctx, e, VEmpty())
            return do_app(mv, ctx.eval(e))
        case Sum(l, r):
            i = check_is_type(ctx, l, "SUM-FORM")
            j = check_is_type(ctx, r, "SUM-FORM")
            return VU(max(i, j))
        case IndSum(motive, lc, rc, s):
            sty = unfold(infer(ctx, s))
            if not isinstance(sty, VSum):
                raise ctx.fail(
                    "IND-SUM", f"scrutinee of ind-sum must be a sum, got {ctx.show(sty)}"
                )
            mv, _ = _expect_family(ctx, motive, (lambda: sty,), "IND-SUM")
            lc_ty = VPi("l", sty.left, ClosureFn(lambda vl: do_app(mv, VInl(vl))))
            rc_ty = VPi("r", sty.right, ClosureFn(lambda vr: do_app(mv, VInr(vr))))
            check(ctx, lc, lc_ty)
            check(ctx, rc, rc_ty)
            return do_app(mv, ctx.eval(s))
        case Push(s, a, b, f, g):
            i = check_is_type(ctx, s, "PUSH-FORM")
            j = check_is_type(ctx, a, "PUSH-FORM")
            k = check_is_type(ctx, b, "PUSH-FORM")
            sv, av, bv = ctx.eval(s), ctx.eval(a), ctx.eval(b)
            check(ctx, f, VPi("_", sv, ClosureFn(lambda _: av)))
            check(ctx, g, VPi("_", sv, ClosureFn(lambda _: bv)))
            return VU(max(i, j, k))
        case IndPush(motive, ia, ib, ig, s):
            return _infer_ind_push(ctx, motive, ia, ib, ig, s)
    raise InternalCompilerError(f"infer: unhandled term {t!r}")


def _infer_ind_push(
    ctx: Context, motive: Term, ia: Term, ib: Term, ig: Term, s: Term
) -> Value:
    sty = unfold(infer(ctx, s))
    if not isinstance(sty, VPush):
        raise ctx.fail(
            "IND-PUSH", f"scrutinee of ind-push must be a pushout, got {ctx.show(sty)}"
        )
    mv, target_level = _expect_family(ctx, motive, (lambda: sty,), "IND-PUSH")
    check(ctx, ia, VPi("a", sty.left, ClosureFn(lambda va: do_app(mv, VPoInl(va)))))
    check(ctx, ib, VPi("b", sty.right, ClosureFn(lambda vb: do_app(mv, VPoInr(vb)))))

    push_level = check_is_type(ctx, quote(sty, ctx.depth, unfold_tops=False), "IND-PUSH")
    if push_level > _TRANSPORT_MAX_LEVEL or target_level > _TRANSPORT_MAX_LEVEL:
        raise ctx.fail(
            "IND-PUSH",
            f"no transport constant at universe levels ({push_level}, {target_level})",
        )
    tr = transport_name(push_level, target_level)
    if tr not in ctx.sig:
        raise ctx.fail(
            "IND-PUSH",
            f"the glue branch of ind-push transports along glue and needs {tr} "
            "in scope (import Bootstrap)",
        )
    trv = VTop(tr, (), ctx.sig.values[tr])
    iav, ibv = ctx.eval(ia), ctx.eval(ib)

    def glue_branch_type(vs: Value) -> Value:
        fs = do_app(sty.f, vs)
        gs = do_app(sty.g, vs)
        transported = do_app(
            do_app(
                do_app(do_app(do_app(do_app(trv, sty), mv), VPoInl(fs)), VPoInr(gs)),
                VGlue(vs),
            ),
            do_app(iav, fs),
        )
        return VId(do_app(mv, VPoInr(gs)), transported, do_app(ibv, gs))

    check(ctx, ig, VPi("s", sty.src, ClosureFn(glue_branch_type)))
    return do_app(mv, ctx.eval(s))


def check(ctx: Context, t: Term, expected: Value) -> None:
    expected = unfold(expected)
    match t:
        case Lam(x, body):
            if not isinstance(expected, VPi):
                raise ctx.fail(
                    "TYPE-MISMATCH",
                    f"lambda cannot have non-function type {ctx.show(expected)}",
                )
            inner = ctx.bind(x, expected.domain)
            check(inner, body, apply_closure(expected.codomain, fresh(ctx.depth)))
        case Pair(a, b):
            if not isinstance(expected, VSigma):
                raise ctx.fail(
                    "TYPE-MISMATCH",
                    f"pair cannot have non-pair type {ctx.show(expected)}",
                )
            check(ctx, a, expected.first)
            check(ctx, b, apply_closure(expected.second, ctx.eval(a)))
        case Inl(a) if isinstance(expected, VSum):
            check(ctx, a, expected.left)
        case Inr(b) if isinstance(expected, VSum):
            check(ctx, b, expected.right)
        case PoInl(a) if isinstance(expected, VPush):
            check(ctx, a, expected.left)
        case PoInr(b) if isinstance(expected, VPush):
            check(ctx, b, expected.right)
        case Glue(s) if isinstance(expected, VId) and isinstance(
            unfold(expected.type), VPush
        ):
            push = unfold(expected.type)
            check(ctx, s, push.src)
            sv = ctx.eval(s)
            want_lhs = VPoInl(do_app(push.f, sv))
            want_rhs = VPoInr(do_app(push.g, sv))
            if not conv(expected.lhs, want_lhs, ctx.depth):
                raise ctx.fail(
                    "TYPE-MISMATCH",
                    f"glue path starts at {ctx.show(want_lhs)}, "
                    f"expected {ctx.show(expected.lhs)}",
                )
            if not conv(expected.rhs, want_rhs, ctx.depth):
                raise ctx.fail(
                    "TYPE-MISMATCH",
                    f"glue path ends at {ctx.show(want_rhs)}, "
                    f"expected {ctx.show(expected.rhs)}",
                )
        case Refl(point) if isinstance(expected, VId):
            check(ctx, point, expected.type)
            pv = ctx.eval(point)
            if not (
                conv(pv, expected.lhs, ctx.depth) and conv(pv, expected.rhs, ctx.depth)
            ):
                raise ctx.fail(
                    "TYPE-MISMATCH",
                    f"refl proves {ctx.show(VId(expected.type, pv, pv))}, "
                    f"expected {ctx.show(expected)}",
                )
        case Meta(mid, _):
            raise ctx.fail("UNSOLVED-META", f"unsolved hole ?{mid}")
        case _:
            _ensure_fits(ctx, infer(ctx, t), expected)


# -- declarations -----------------------------------------------------------------


def referenced_constants(t: Term) -> set[str]:
    """All constant names occurring in a term (iteratively, no recursion)."""
    out: set[str] = set()
    stack = [t]
    while stack:
        cur = stack.pop()
        match cur:
            case Const(name):
                out.add(name)
            case Var() | U() | Nat() | Zero() | Empty() | Unit() | Tt():
                pass
            case Pi(_, dom, cod, _):
                stack += [dom, cod]
            case Lam(_, body):
                stack.append(body)
            case Sigma(_, first, second):
                stack += [first, second]
            case Meta(_, spine):
                stack += list(spine)
            case _:
                from .core import _children

                stack += list(_children(cur))
    return out


def axiom_closure_of(sig: Signature, decl: Declaration) -> frozenset[str]:
    if decl.kind == POSTULATE:
        return frozenset({axiom_family(decl.name)})
    if decl.kind == ADMIT:
        return frozenset({f"admit:{decl.name}"})
    refs = referenced_constants(decl.type)
    if decl.body is not None:
        refs |= referenced_constants(decl.body)
    closure: set[str] = set()
    for name in refs:
        prior = sig.decls.get(name)
        if prior is not None:
            closure |= prior.axiom_closure
    return frozenset(closure)


def check_declaration(sig: Signature, decl: Declaration) -> Declaration:
    """Check one declaration and install it into the signature."""
    if decl.name in sig:
        raise Diagnostic(
            "error", decl.span, "DUPLICATE", f"duplicate declaration {decl.name}"
        )
    ctx = Context(sig, span=decl.span)
    ty_of_ty = unfold(infer(ctx, decl.type))
    if not isinstance(ty_of_ty, VU):
        raise ctx.fail(
            "TYPE-MISMATCH",
            f"declared type of {decl.name} is not a type "
            f"(it has type {ctx.show(ty_of_ty)})",
        )
    ty_v = ctx.eval(decl.type)
    if decl.kind == DEFINITION:
        assert decl.body is not None
        check(ctx, decl.body, ty_v)
        value = ctx.eval(decl.body)
    else:
        value = VNeutral(HConst(decl.name))
    checked = replace(decl, axiom_closure=axiom_closure_of(sig, decl))
    sig.types[decl.name] = ty_v
    sig.values[decl.name] = value
    sig.decls[decl.name] = checked
    return checked
