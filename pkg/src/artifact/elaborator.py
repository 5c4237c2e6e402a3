"""Surface-to-kernel elaboration: implicit arguments and hole solving.

The elaborator mirrors the kernel's bidirectional discipline but returns
rewritten terms: implicit function arguments are inserted as fresh metas at
application heads (and terms checked against implicit function types are
wrapped in lambdas), while holes written as `_` become metas applied to the
local context.  Metas are solved by first-order pattern unification with
occurs and scope checks; non-pattern problems fail rather than postpone.
Final terms are zonked (solutions substituted through, normalizing only the
patched region) and contain no metas.  The kernel re-checks the output from
scratch, so nothing in this module is trusted.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import (
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
from .checker import Context, Signature, transport_name, _TRANSPORT_MAX_LEVEL
from .parser import LoweredDecl
from .semantics import (
    ClosureFn,
    HConst,
    HGlue,
    HMeta,
    HVar,
    SApp,
    SFst,
    SIndEmpty,
    SIndId,
    SIndNat,
    SIndPush,
    SIndSum,
    SSnd,
    VEmpty,
    VGlue,
    VId,
    VInl,
    VInr,
    VLam,
    VNat,
    VNeutral,
    VPair,
    VPi,
    VPoInl,
    VPoInr,
    VPush,
    VRefl,
    VSigma,
    VSuc,
    VSum,
    VTop,
    VTt,
    VU,
    VUnit,
    VZero,
    Value,
    apply_closure,
    apply_frame,
    do_app,
    do_fst,
    do_snd,
    eval_term,
    fresh,
    quote,
)


class UnifyError(Exception):
    """Internal unification failure; call sites convert it to a diagnostic."""


@dataclass
class MetaEntry:
    origin: str  # "hole" | "hole type" | "implicit argument"
    span: Span | None
    note: str = ""
    solution: Value | None = None


class MetaStore:
    def __init__(self) -> None:
        self.entries: list[MetaEntry] = []

    def fresh(self, origin: str, span: Span | None, note: str = "") -> int:
        self.entries.append(MetaEntry(origin, span, note))
        return len(self.entries) - 1

    def solution(self, mid: int) -> Value | None:
        return self.entries[mid].solution

    def solve(self, mid: int, value: Value) -> None:
        if self.entries[mid].solution is not None:
            raise InternalCompilerError(f"meta ?{mid} solved twice")
        self.entries[mid].solution = value

    def unsolved(self) -> list[tuple[int, MetaEntry]]:
        return [(i, e) for i, e in enumerate(self.entries) if e.solution is None]


class Elaborator:
    def __init__(self, sig: Signature, decl: LoweredDecl):
        self.sig = sig
        self.decl = decl
        self.store = MetaStore()

    # -- metas --------------------------------------------------------------

    def fresh_meta(self, ctx: Context, origin: str, span: Span | None, note: str = "") -> Term:
        mid = self.store.fresh(origin, span, note)
        return Meta(mid, tuple(Var(i) for i in range(ctx.depth - 1, -1, -1)))

    def hole(self, ctx: Context, index: int, expected: Value | None) -> Term:
        span = (
            self.decl.holes[index]
            if index < len(self.decl.holes)
            else self.decl.span
        )
        note = "" if expected is None else f"expected type: {ctx.show(self.force(expected))}"
        return self.fresh_meta(ctx, "hole", span, note)

    def force(self, v: Value) -> Value:
        while (
            isinstance(v, VNeutral)
            and isinstance(v.head, HMeta)
            and self.store.solution(v.head.mid) is not None
        ):
            out = self.store.solution(v.head.mid)
            for frame in v.spine:
                out = apply_frame(out, frame)
            v = out
        return v

    def shape(self, v: Value) -> Value:
        """Force solved metas and strip definitional views: what the value
        actually is, for shape dispatch."""
        v = self.force(v)
        while isinstance(v, VTop):
            v = self.force(v.unfolded)
        return v

    # -- unification -----------------------------------------------------------

    def unify(self, level: int, a: Value, b: Value) -> None:
        a = self.force(a)
        b = self.force(b)
        if isinstance(a, VTt) or isinstance(b, VTt):
            return
        if (
            isinstance(a, VNeutral)
            and isinstance(b, VNeutral)
            and isinstance(a.head, HMeta)
            and isinstance(b.head, HMeta)
            and a.head.mid == b.head.mid
        ):
            self._unify_spines(level, a.spine, b.spine)
            return
        pat = self._pattern(a)
        if pat is not None:
            self._solve(level, a.head.mid, pat, b)
            return
        pat = self._pattern(b)
        if pat is not None:
            self._solve(level, b.head.mid, pat, a)
            return
        if (isinstance(a, VNeutral) and isinstance(a.head, HMeta)) or (
            isinstance(b, VNeutral) and isinstance(b.head, HMeta)
        ):
            raise UnifyError("a hole is applied to a non-variable spine")
        if isinstance(a, VLam) or isinstance(b, VLam):
            v = fresh(level)
            self.unify(level + 1, do_app(a, v), do_app(b, v))
            return
        if isinstance(a, VPair) or isinstance(b, VPair):
            self.unify(level, do_fst(a), do_fst(b))
            self.unify(level, do_snd(a), do_snd(b))
            return
        # Glued values: try the cheap spine problem first (rolling back any
        # speculative solutions on failure), then fall back to unfoldings.
        if isinstance(a, VTop) and isinstance(b, VTop):
            if a.name == b.name and len(a.spine) == len(b.spine):
                saved = [entry.solution for entry in self.store.entries]
                try:
                    self._unify_spines(level, a.spine, b.spine)
                    return
                except UnifyError:
                    for entry, solution in zip(self.store.entries, saved):
                        entry.solution = solution
            self.unify(level, a.unfolded, b.unfolded)
            return
        if isinstance(a, VTop):
            self.unify(level, a.unfolded, b)
            return
        if isinstance(b, VTop):
            self.unify(level, a, b.unfolded)
            return
        match a, b:
            case (VU(i), VU(j)) if i == j:
                return
            case (VPi(_, d1, c1, i1), VPi(_, d2, c2, i2)) if i1 == i2:
                self.unify(level, d1, d2)
                v = fresh(level)
                self.unify(level + 1, apply_closure(c1, v), apply_closure(c2, v))
                return
            case (VSigma(_, f1, s1), VSigma(_, f2, s2)):
                self.unify(level, f1, f2)
                v = fresh(level)
                self.unify(level + 1, apply_closure(s1, v), apply_closure(s2, v))
                return
            case (VNat(), VNat()) | (VZero(), VZero()) | (VEmpty(), VEmpty()) | (
                VUnit(),
                VUnit(),
            ):
                return
            case (VSuc(m), VSuc(n)):
                self.unify(level, m, n)
                return
            case (VSum(l1, r1), VSum(l2, r2)):
                self.unify(level, l1, l2)
                self.unify(level, r1, r2)
                return
            case (VInl(x), VInl(y)) | (VInr(x), VInr(y)):
                self.unify(level, x, y)
                return
            case (VId(t1, l1, r1), VId(t2, l2, r2)):
                self.unify(level, t1, t2)
                self.unify(level, l1, l2)
                self.unify(level, r1, r2)
                return
            case (VRefl(p), VRefl(q)):
                self.unify(level, p, q)
                return
            case (VPush(s1, a1, b1, f1, g1), VPush(s2, a2, b2, f2, g2)):
                for x, y in ((s1, s2), (a1, a2), (b1, b2), (f1, f2), (g1, g2)):
                    self.unify(level, x, y)
                return
            case (VPoInl(x), VPoInl(y)) | (VPoInr(x), VPoInr(y)) | (VGlue(x), VGlue(y)):
                self.unify(level, x, y)
                return
            case (VNeutral(h1, sp1), VNeutral(h2, sp2)):
                self._unify_heads(level, h1, h2)
                self._unify_spines(level, sp1, sp2)
                return
        raise UnifyError("the two sides have different shapes")

    def _unify_heads(self, level, h1, h2) -> None:
        match h1, h2:
            case (HVar(i), HVar(j)) if i == j:
                return
            case (HConst(m), HConst(n)) if m == n:
                return
            case (HGlue(x), HGlue(y)):
                self.unify(level, x, y)
                return
        raise UnifyError("stuck terms have different heads")

    def _unify_spines(self, level, sp1, sp2) -> None:
        if len(sp1) != len(sp2):
            raise UnifyError("stuck terms have different spine lengths")
        for f1, f2 in zip(sp1, sp2):
            match f1, f2:
                case (SApp(a1, _), SApp(a2, _)):
                    self.unify(level, a1, a2)
                case (SFst(), SFst()) | (SSnd(), SSnd()):
                    pass
                case (SIndNat(m1, z1, s1), SIndNat(m2, z2, s2)):
                    self.unify(level, m1, m2)
                    self.unify(level, z1, z2)
                    self.unify(level, s1, s2)
                case (SIndEmpty(m1), SIndEmpty(m2)):
                    self.unify(level, m1, m2)
                case (SIndSum(m1, l1, r1), SIndSum(m2, l2, r2)):
                    self.unify(level, m1, m2)
                    self.unify(level, l1, l2)
                    self.unify(level, r1, r2)
                case (SIndId(b1, m1, c1, e1), SIndId(b2, m2, c2, e2)):
                    self.unify(level, b1, b2)
                    self.unify(level, m1, m2)
                    self.unify(level, c1, c2)
                    self.unify(level, e1, e2)
                case (SIndPush(m1, a1, b1, g1), SIndPush(m2, a2, b2, g2)):
                    self.unify(level, m1, m2)
                    self.unify(level, a1, a2)
                    self.unify(level, b1, b2)
                    self.unify(level, g1, g2)
                case _:
                    raise UnifyError("stuck terms have different eliminations")

    def _pattern(self, v: Value) -> list[int] | None:
        if not (isinstance(v, VNeutral) and isinstance(v.head, HMeta)):
            return None
        levels: list[int] = []
        for frame in v.spine:
            if not isinstance(frame, SApp):
                return None
            arg = self.force(frame.arg)
            if (
                isinstance(arg, VNeutral)
                and isinstance(arg.head, HVar)
                and not arg.spine
                and arg.head.level not in levels
            ):
                levels.append(arg.head.level)
            else:
                return None
        return levels

    def _solve(self, level: int, mid: int, spine_levels: list[int], rhs: Value) -> None:
        ren = {lv: k for k, lv in enumerate(spine_levels)}
        arity = len(spine_levels)
        body = self._rename(rhs, mid, ren, arity, level, 0)
        term: Term = body
        for k in reversed(range(arity)):
            term = Lam(f"x{k}", term)
        self.store.solve(mid, eval_term(term, (), self.sig.values))

    def _rename(
        self, v: Value, mid: int, ren: dict[int, int], arity: int, base: int, depth: int
    ) -> Term:
        """Read `rhs` back as a solution body, mapping pattern variables to
        the solution's lambda binders and rejecting escapes and occurrences."""
        v = self.force(v)

        def rec(x: Value, extra: int = 0) -> Term:
            return self._rename(x, mid, ren, arity, base, depth + extra)

        def fold(acc: Term, spine: tuple) -> Term:
            for frame in spine:
                match frame:
                    case SApp(a, imp):
                        acc = App(acc, rec(a), imp)
                    case SFst():
                        acc = Fst(acc)
                    case SSnd():
                        acc = Snd(acc)
                    case SIndNat(m, z, s):
                        acc = IndNat(rec(m), rec(z), rec(s), acc)
                    case SIndEmpty(m):
                        acc = IndEmpty(rec(m), acc)
                    case SIndSum(m, lc, rc):
                        acc = IndSum(rec(m), rec(lc), rec(rc), acc)
                    case SIndId(b, m, c, e):
                        acc = IndId(rec(b), rec(m), rec(c), rec(e), acc)
                    case SIndPush(m, ia, ib, ig):
                        acc = IndPush(rec(m), rec(ia), rec(ib), rec(ig), acc)
            return acc

        match v:
            case VTop(name, spine, _):
                # Keep the constant view: solutions stay compact and, unlike
                # quoted unfoldings, always re-check.
                return fold(Const(name), spine)
            case VNeutral(head, spine):
                acc: Term
                match head:
                    case HVar(l):
                        if l >= base:
                            acc = Var(depth - 1 - (l - base))
                        elif l in ren:
                            acc = Var(depth + arity - 1 - ren[l])
                        else:
                            raise UnifyError(
                                "the solution would capture a variable outside the hole's scope"
                            )
                    case HConst(name):
                        acc = Const(name)
                    case HMeta(m2):
                        if m2 == mid:
                            raise UnifyError("occurs check: the hole would contain itself")
                        args = []
                        used = 0
                        for frame in spine:
                            if isinstance(frame, SApp):
                                args.append(rec(frame.arg))
                                used += 1
                            else:
                                break
                        acc = Meta(m2, tuple(args))
                        spine = spine[used:]
                    case HGlue(g):
                        acc = Glue(rec(g))
                    case _:
                        raise InternalCompilerError("unknown neutral head")
                return fold(acc, spine)
            case VU(i):
                return U(i)
            case VPi(x, dom, cod, imp):
                inner = apply_closure(cod, fresh(base + depth))
                return Pi(x, rec(dom), rec(inner, 1), imp)
            case VLam(x, clo):
                return Lam(x, rec(apply_closure(clo, fresh(base + depth)), 1))
            case VSigma(x, first, second):
                inner = apply_closure(second, fresh(base + depth))
                return Sigma(x, rec(first), rec(inner, 1))
            case VPair(a, b):
                return Pair(rec(a), rec(b))
            case VNat():
                return Nat()
            case VZero():
                return Zero()
            case VSuc(n):
                return Suc(rec(n))
            case VEmpty():
                return Empty()
            case VUnit():
                return Unit()
            case VTt():
                return Tt()
            case VSum(l, r):
                return Sum(rec(l), rec(r))
            case VInl(x):
                return Inl(rec(x))
            case VInr(x):
                return Inr(rec(x))
            case VId(t, l, r):
                return Id(rec(t), rec(l), rec(r))
            case VRefl(p):
                return Refl(rec(p))
            case VPush(s, a, b, f, g):
                return Push(rec(s), rec(a), rec(b), rec(f), rec(g))
            case VPoInl(x):
                return PoInl(rec(x))
            case VPoInr(x):
                return PoInr(rec(x))
            case VGlue(x):
                return Glue(rec(x))
        raise InternalCompilerError(f"rename: unhandled value {type(v).__name__}")

    # -- bidirectional elaboration ------------------------------------------------

    def fits(self, ctx: Context, inferred: Value, expected: Value) -> None:
        a = self.shape(inferred)
        b = self.shape(expected)
        if isinstance(a, VU) and isinstance(b, VU):
            if a.level <= b.level:
                return
            raise ctx.fail(
                "CUMUL",
                f"universe U {a.level} does not fit inside U {b.level}",
            )
        try:
            # Hand unify the glued values, not their unfoldings: same-headed
            # definitional views are solved spine-first, which keeps meta
            # spines in pattern form far more often.
            self.unify(ctx.depth, self.force(inferred), self.force(expected))
        except UnifyError as reason:
            raise ctx.fail(
                "TYPE-MISMATCH",
                f"expected {ctx.show(b)}, got {ctx.show(a)}",
                (str(reason),),
            ) from None

    def infer_type(self, ctx: Context, t: Term, rule: str) -> tuple[Term, int]:
        t2, ty = self.infer(ctx, t)
        ty = self.shape(ty)
        if isinstance(ty, VU):
            return t2, ty.level
        if isinstance(ty, VNeutral) and isinstance(ty.head, HMeta):
            raise ctx.fail(
                rule,
                "cannot infer a universe level for a hole in this position; "
                "write the type out",
            )
        raise ctx.fail(rule, f"expected a type, got a term of type {ctx.show(ty)}")

    def family(self, ctx: Context, motive: Term, index_types, rule: str):
        """Elaborated analogue of the kernel's motive handling: returns the
        rewritten motive, its value, and its codomain universe level."""
        inner = ctx
        bound: list[Value] = []
        names: list[str] = []
        cur: Term = motive
        while len(bound) < len(index_types) and isinstance(cur, Lam):
            ity = index_types[len(bound)](*bound)
            bound.append(fresh(inner.depth))
            names.append(cur.name)
            inner = inner.bind(cur.name, ity)
            cur = cur.body
        if len(bound) == len(index_types):
            cur2, level = self.infer_type(inner, cur, rule)
        else:
            cur2, ty = self.infer(inner, cur)
            while len(bound) < len(index_types):
                ity = index_types[len(bound)](*bound)
                ty = self.shape(ty)
                if not isinstance(ty, VPi):
                    raise inner.fail(
                        rule,
                        f"motive must be a type family over {inner.show(ity)}, "
                        f"got one of type {inner.show(ty)}",
                    )
                try:
                    self.unify(inner.depth, ty.domain, ity)
                except UnifyError:
                    raise inner.fail(
                        rule,
                        f"motive must be a type family over {inner.show(ity)}, "
                        f"got one over {inner.show(ty.domain)}",
                    ) from None
                v = fresh(inner.depth)
                bound.append(v)
                ty = apply_closure(ty.codomain, v)
                inner = inner.bind("_", ity)
            ty = self.shape(ty)
            if not isinstance(ty, VU):
                raise inner.fail(
                    rule, f"motive codomain must be a universe, got {inner.show(ty)}"
                )
            level = ty.level
        out = cur2
        for name in reversed(names):
            out = Lam(name, out)
        return out, ctx.eval(out), level

    def infer(self, ctx: Context, t: Term) -> tuple[Term, Value]:
        match t:
            case Var(k):
                if k >= ctx.depth:
                    raise InternalCompilerError(f"unbound index {k} in elaborator")
                return t, ctx.types[ctx.depth - 1 - k]
            case Const(name):
                if name not in ctx.sig:
                    raise ctx.fail("SCOPE", f"unknown constant {name}")
                return t, ctx.sig.types[name]
            case Meta(index, _):
                term = self.hole(ctx, index, None)
                ty_term = self.fresh_meta(
                    ctx, "hole type", self.store.entries[term.mid].span
                )
                return term, ctx.eval(ty_term)
            case U(i):
                return t, VU(i + 1)
            case Pi(x, dom, cod, imp):
                dom2, i = self.infer_type(ctx, dom, "PI-FORM")
                cod2, j = self.infer_type(ctx.bind(x, ctx.eval(dom2)), cod, "PI-FORM")
                return Pi(x, dom2, cod2, imp), VU(max(i, j))
            case Sigma(x, first, second):
                first2, i = self.infer_type(ctx, first, "SIGMA-FORM")
                second2, j = self.infer_type(
                    ctx.bind(x, ctx.eval(first2)), second, "SIGMA-FORM"
                )
                return Sigma(x, first2, second2), VU(max(i, j))
            case Lam():
                raise ctx.fail("CANNOT-INFER", "cannot infer the type of a bare lambda")
            case Pair():
                raise ctx.fail("CANNOT-INFER", "cannot infer the type of a bare pair")
            case Inl() | Inr():
                raise ctx.fail("CANNOT-INFER", "sum injections need an expected type")
            case PoInl() | PoInr() | Glue():
                raise ctx.fail(
                    "CANNOT-INFER", "pushout constructors need an expected type"
                )
            case App(f, a, False):
                f2, fty = self.infer(ctx, f)
                f2, fty = self.insert_implicits(ctx, f2, fty)
                fty = self.shape(fty)
                if not isinstance(fty, VPi):
                    raise ctx.fail(
                        "NON-FUNCTION",
                        f"application of a non-function of type {ctx.show(fty)}",
                    )
                a2 = self.check(ctx, a, fty.domain)
                return App(f2, a2, False), apply_closure(fty.codomain, ctx.eval(a2))
            case App(f, a, True):
                f2, fty = self.infer(ctx, f)
                fty = self.shape(fty)
                if not (isinstance(fty, VPi) and fty.implicit):
                    raise ctx.fail(
                        "NON-FUNCTION",
                        f"no implicit argument expected here (function type "
                        f"{ctx.show(fty)})",
                    )
                a2 = self.check(ctx, a, fty.domain)
                return App(f2, a2, True), apply_closure(fty.codomain, ctx.eval(a2))
            case Fst(p):
                p2, pty = self.infer(ctx, p)
                pty = self.shape(pty)
                if not isinstance(pty, VSigma):
                    raise ctx.fail(
                        "SIGMA-ELIM", f"fst of a non-pair of type {ctx.show(pty)}"
                    )
                return Fst(p2), pty.first
            case Snd(p):
                p2, pty = self.infer(ctx, p)
                pty = self.shape(pty)
                if not isinstance(pty, VSigma):
                    raise ctx.fail(
                        "SIGMA-ELIM", f"snd of a non-pair of type {ctx.show(pty)}"
                    )
                return Snd(p2), apply_closure(pty.second, do_fst(ctx.eval(p2)))
            case Id(ty, lhs, rhs) if isinstance(ty, Meta):
                # `Id _ a b`: recover the carrier from an endpoint, then solve
                # the hole with it (holes have no universe level of their own).
                try:
                    lhs2, tv = self.infer(ctx, lhs)
                    lhs2, tv = self.insert_implicits(ctx, lhs2, tv)
                    rhs2 = self.check(ctx, rhs, tv)
                except Diagnostic as d:
                    if d.rule_id != "CANNOT-INFER":
                        raise
                    rhs2, tv = self.infer(ctx, rhs)
                    rhs2, tv = self.insert_implicits(ctx, rhs2, tv)
                    lhs2 = self.check(ctx, lhs, tv)
                level = self._level_of(ctx, tv, "ID-FORM")
                ty2 = self.check(ctx, ty, VU(level))
                self.unify(ctx.depth, ctx.eval(ty2), tv)
                return Id(ty2, lhs2, rhs2), VU(level)
            case Id(ty, lhs, rhs):
                ty2, i = self.infer_type(ctx, ty, "ID-FORM")
                tv = ctx.eval(ty2)
                lhs2 = self.check(ctx, lhs, tv)
                rhs2 = self.check(ctx, rhs, tv)
                return Id(ty2, lhs2, rhs2), VU(i)
            case Refl(point):
                point2, a = self.infer(ctx, point)
                pv = ctx.eval(point2)
                return Refl(point2), VId(a, pv, pv)
            case IndId(base, motive, rc, end, path):
                base2, a = self.infer(ctx, base)
                av = ctx.eval(base2)
                motive2, mv, _ = self.family(
                    ctx, motive, (lambda: a, lambda vy: VId(a, av, vy)), "IND-ID"
                )
                rc2 = self.check(ctx, rc, do_app(do_app(mv, av), VRefl(av)))
                end2 = self.check(ctx, end, a)
                xv = ctx.eval(end2)
                path2 = self.check(ctx, path, VId(a, av, xv))
                out = IndId(base2, motive2, rc2, end2, path2)
                return out, do_app(do_app(mv, xv), ctx.eval(path2))
            case Nat() | Empty() | Unit():
                return t, VU(0)
            case Zero():
                return t, VNat()
            case Tt():
                return t, VUnit()
            case Suc(n):
                n2 = self.check(ctx, n, VNat())
                return Suc(n2), VNat()
            case IndNat(motive, z, s, n):
                motive2, mv, _ = self.family(ctx, motive, (lambda: VNat(),), "IND-NAT")
                z2 = self.check(ctx, z, do_app(mv, VZero()))
                s_ty = VPi(
                    "k",
                    VNat(),
                    _fn(
                        lambda vk: VPi(
                            "ih", do_app(mv, vk), _fn(lambda _: do_app(mv, VSuc(vk)))
                        )
                    ),
                )
                s2 = self.check(ctx, s, s_ty)
                n2 = self.check(ctx, n, VNat())
                return IndNat(motive2, z2, s2, n2), do_app(mv, ctx.eval(n2))
            case IndEmpty(motive, e):
                motive2, mv, _ = self.family(ctx, motive, (lambda: VEmpty(),), "IND-EMPTY")
                e2 = self.check(ctx, e, VEmpty())
                return IndEmpty(motive2, e2), do_app(mv, ctx.eval(e2))
            case Sum(l, r):
                l2, i = self.infer_type(ctx, l, "SUM-FORM")
                r2, j = self.infer_type(ctx, r, "SUM-FORM")
                return Sum(l2, r2), VU(max(i, j))
            case IndSum(motive, lc, rc, s):
                s2, sty = self.infer(ctx, s)
                sty = self.shape(sty)
                if not isinstance(sty, VSum):
                    raise ctx.fail(
                        "IND-SUM",
                        f"scrutinee of ind-sum must be a sum, got {ctx.show(sty)}",
                    )
                motive2, mv, _ = self.family(ctx, motive, (lambda: sty,), "IND-SUM")
                lc2 = self.check(
                    ctx, lc, VPi("l", sty.left, _fn(lambda vl: do_app(mv, VInl(vl))))
                )
                rc2 = self.check(
                    ctx, rc, VPi("r", sty.right, _fn(lambda vr: do_app(mv, VInr(vr))))
                )
                return IndSum(motive2, lc2, rc2, s2), do_app(mv, ctx.eval(s2))
            case Push(s, a, b, f, g):
                s2, i = self.infer_type(ctx, s, "PUSH-FORM")
                a2, j = self.infer_type(ctx, a, "PUSH-FORM")
                b2, k = self.infer_type(ctx, b, "PUSH-FORM")
                sv, av, bv = ctx.eval(s2), ctx.eval(a2), ctx.eval(b2)
                f2 = self.check(ctx, f, VPi("_", sv, _fn(lambda _: av)))
                g2 = self.check(ctx, g, VPi("_", sv, _fn(lambda _: bv)))
                return Push(s2, a2, b2, f2, g2), VU(max(i, j, k))
            case IndPush(motive, ia, ib, ig, s):
                return self._infer_ind_push(ctx, motive, ia, ib, ig, s)
        raise InternalCompilerError(f"elaborator infer: unhandled term {t!r}")

    def _infer_ind_push(self, ctx, motive, ia, ib, ig, s):
        s2, sty = self.infer(ctx, s)
        sty = self.shape(sty)
        if not isinstance(sty, VPush):
            raise ctx.fail(
                "IND-PUSH",
                f"scrutinee of ind-push must be a pushout, got {ctx.show(sty)}",
            )
        motive2, mv, target_level = self.family(ctx, motive, (lambda: sty,), "IND-PUSH")
        ia2 = self.check(
            ctx, ia, VPi("a", sty.left, _fn(lambda va: do_app(mv, VPoInl(va))))
        )
        ib2 = self.check(
            ctx, ib, VPi("b", sty.right, _fn(lambda vb: do_app(mv, VPoInr(vb))))
        )
        push_level = self._level_of(ctx, sty)
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
        iav, ibv = ctx.eval(ia2), ctx.eval(ib2)

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

        ig2 = self.check(ctx, ig, VPi("s", sty.src, _fn(glue_branch_type)))
        out = IndPush(motive2, ia2, ib2, ig2, s2)
        return out, do_app(mv, ctx.eval(s2))

    def _level_of(self, ctx: Context, ty: Value, rule: str = "IND-PUSH") -> int:
        """Universe level of a type value (via readback and inference)."""
        t = quote(ty, ctx.depth, unfold_tops=False)
        _, sort = self.infer(ctx, t)
        sort = self.shape(sort)
        if isinstance(sort, VU):
            return sort.level
        raise ctx.fail(rule, f"not a type: {ctx.show(ty)}")

    def insert_implicits(self, ctx: Context, t: Term, ty: Value) -> tuple[Term, Value]:
        # Dispatch on the shaped type but return the glued one: callers hand
        # the result to fits, where definitional views unify spine-first.
        shaped = self.shape(ty)
        while isinstance(shaped, VPi) and shaped.implicit:
            m = self.fresh_meta(
                ctx,
                "implicit argument",
                ctx.span,
                f"for {{{shaped.name}}} in {self.decl.name}",
            )
            t = App(t, m, True)
            ty = apply_closure(shaped.codomain, ctx.eval(m))
            shaped = self.shape(ty)
        return t, ty

    def check(self, ctx: Context, t: Term, expected: Value) -> Term:
        glued = expected
        expected = self.shape(expected)
        # A lambda checked against a function type binds its binder whether the
        # binder is implicit or explicit; any other term checked against an
        # implicit function type gets wrapped in a lambda so the argument can
        # still be inserted at use sites inside.
        if (
            isinstance(expected, VPi)
            and expected.implicit
            and not isinstance(t, Lam)
        ):
            inner = ctx.bind(expected.name, expected.domain)
            body = self.check(
                inner,
                shift(t, 0, 1),
                apply_closure(expected.codomain, fresh(ctx.depth)),
            )
            return Lam(expected.name, body)
        match t:
            case Lam(x, body):
                if not isinstance(expected, VPi):
                    raise ctx.fail(
                        "TYPE-MISMATCH",
                        f"lambda cannot have non-function type {ctx.show(expected)}",
                    )
                inner = ctx.bind(x, expected.domain)
                body2 = self.check(
                    inner, body, apply_closure(expected.codomain, fresh(ctx.depth))
                )
                return Lam(x, body2)
            case Pair(a, b) if isinstance(expected, VSigma):
                a2 = self.check(ctx, a, expected.first)
                b2 = self.check(ctx, b, apply_closure(expected.second, ctx.eval(a2)))
                return Pair(a2, b2)
            case Inl(a) if isinstance(expected, VSum):
                return Inl(self.check(ctx, a, expected.left))
            case Inr(b) if isinstance(expected, VSum):
                return Inr(self.check(ctx, b, expected.right))
            case PoInl(a) if isinstance(expected, VPush):
                return PoInl(self.check(ctx, a, expected.left))
            case PoInr(b) if isinstance(expected, VPush):
                return PoInr(self.check(ctx, b, expected.right))
            case Glue(s) if isinstance(expected, VId) and isinstance(
                self.shape(expected.type), VPush
            ):
                push = self.shape(expected.type)
                s2 = self.check(ctx, s, push.src)
                sv = ctx.eval(s2)
                try:
                    self.unify(ctx.depth, expected.lhs, VPoInl(do_app(push.f, sv)))
                    self.unify(ctx.depth, expected.rhs, VPoInr(do_app(push.g, sv)))
                except UnifyError as reason:
                    raise ctx.fail(
                        "TYPE-MISMATCH",
                        f"glue path does not span {ctx.show(expected.lhs)} to "
                        f"{ctx.show(expected.rhs)}",
                        (str(reason),),
                    ) from None
                return Glue(s2)
            case Refl(point) if isinstance(expected, VId):
                point2 = self.check(ctx, point, expected.type)
                pv = ctx.eval(point2)
                try:
                    self.unify(ctx.depth, pv, expected.lhs)
                    self.unify(ctx.depth, pv, expected.rhs)
                except UnifyError as reason:
                    raise ctx.fail(
                        "TYPE-MISMATCH",
                        f"refl proves {ctx.show(VId(expected.type, pv, pv))}, "
                        f"expected {ctx.show(expected)}",
                        (str(reason),),
                    ) from None
                return Refl(point2)
            case Meta(index, _):
                return self.hole(ctx, index, expected)
            case _:
                t2, inferred = self.infer(ctx, t)
                t2, inferred = self.insert_implicits(ctx, t2, inferred)
                self.fits(ctx, inferred, glued)
                return t2

    # -- zonking ---------------------------------------------------------------

    def zonk(self, t: Term, depth: int) -> Term:
        z = self.zonk
        match t:
            case Meta(mid, spine):
                spine_z = tuple(z(a, depth) for a in spine)
                sol = self.store.solution(mid)
                if sol is None:
                    return Meta(mid, spine_z)
                env = tuple(fresh(i) for i in range(depth))
                out = sol
                for a in spine_z:
                    out = do_app(out, eval_term(a, env, self.sig.values))
                return quote(out, depth, unfold_tops=False)
            case Var() | U() | Const() | Nat() | Zero() | Empty() | Unit() | Tt():
                return t
            case Pi(x, dom, cod, imp):
                return Pi(x, z(dom, depth), z(cod, depth + 1), imp)
            case Lam(x, body):
                return Lam(x, z(body, depth + 1))
            case App(f, a, imp):
                return App(z(f, depth), z(a, depth), imp)
            case Sigma(x, first, second):
                return Sigma(x, z(first, depth), z(second, depth + 1))
            case Pair(a, b):
                return Pair(z(a, depth), z(b, depth))
            case Fst(p):
                return Fst(z(p, depth))
            case Snd(p):
                return Snd(z(p, depth))
            case Id(ty, lhs, rhs):
                return Id(z(ty, depth), z(lhs, depth), z(rhs, depth))
            case Refl(p):
                return Refl(z(p, depth))
            case IndId(b, m, c, e, p):
                return IndId(z(b, depth), z(m, depth), z(c, depth), z(e, depth), z(p, depth))
            case Suc(n):
                return Suc(z(n, depth))
            case IndNat(m, zc, s, n):
                return IndNat(z(m, depth), z(zc, depth), z(s, depth), z(n, depth))
            case IndEmpty(m, e):
                return IndEmpty(z(m, depth), z(e, depth))
            case Sum(l, r):
                return Sum(z(l, depth), z(r, depth))
            case Inl(a):
                return Inl(z(a, depth))
            case Inr(a):
                return Inr(z(a, depth))
            case IndSum(m, lc, rc, s):
                return IndSum(z(m, depth), z(lc, depth), z(rc, depth), z(s, depth))
            case Push(s, a, b, f, g):
                return Push(z(s, depth), z(a, depth), z(b, depth), z(f, depth), z(g, depth))
            case PoInl(a):
                return PoInl(z(a, depth))
            case PoInr(a):
                return PoInr(z(a, depth))
            case Glue(a):
                return Glue(z(a, depth))
            case IndPush(m, ia, ib, ig, s):
                return IndPush(
                    z(m, depth), z(ia, depth), z(ib, depth), z(ig, depth), z(s, depth)
                )
        raise InternalCompilerError(f"zonk: unhandled term {t!r}")

    def report_unsolved(self) -> None:
        unsolved = self.store.unsolved()
        if not unsolved:
            return
        mid, entry = unsolved[0]
        notes = []
        if entry.note:
            notes.append(entry.note)
        if len(unsolved) > 1:
            notes.append(f"{len(unsolved) - 1} further unsolved holes follow")
        raise Diagnostic(
            "error",
            entry.span or self.decl.span,
            "UNSOLVED-META",
            f"unsolved {entry.origin} ?{mid} in {self.decl.name}",
            tuple(notes),
        )


def _fn(fn) -> ClosureFn:
    return ClosureFn(fn)


def elaborate_declaration(sig: Signature, lowered: LoweredDecl) -> Declaration:
    """Elaborate one declaration into kernel-ready (meta-free) form."""
    elab = Elaborator(sig, lowered)
    ctx = Context(sig, span=lowered.span)
    ty_term, _ = elab.infer_type(ctx, lowered.type, "TYPE-MISMATCH")
    body_term: Term | None = None
    if lowered.body is not None:
        ty_v = eval_term(ty_term, (), sig.values)
        body_term = elab.check(ctx, lowered.body, ty_v)
    elab.report_unsolved()
    ty_z = elab.zonk(ty_term, 0)
    body_z = elab.zonk(body_term, 0) if body_term is not None else None
    return Declaration(lowered.name, lowered.kind, ty_z, body_z, span=lowered.span)
