"""Evaluation, readback, and definitional equality (normalization by evaluation).

Terms evaluate into a semantic domain of values; stuck eliminations accumulate
as spine frames on neutral heads.  Readback (`quote`) maps values back to
terms, and `conv` decides definitional equality:

* beta (closures applied on the fly),
* delta (defined constants unfold, but keep a glued `VTop` view: the constant
  and its spine alongside the unfolded value, so readback can stay compact and
  conversion can compare spines before unfolding; postulates and admitted
  statements evaluate to bare neutral heads),
* iota (recursors reduce on constructor heads),
* eta for functions and pairs,
* `tt`-absorption: any value compared against `tt` is accepted, which is sound
  because `conv` is only called on values of a common type.

Identity elimination applied to a `glue` path is stuck: it becomes a neutral
whose head records the glue argument.  Values are compared with `conv`, never
with `==`.
"""
from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass

from .core import (
    App,
    Const,
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
    Suc,
    Sum,
    Term,
    Tt,
    U,
    Unit,
    Var,
    Zero,
)


class Value:
    __slots__ = ()


Consts = Mapping[str, Value]


@dataclass(eq=False)
class Closure:
    """A term body waiting for one more bound value."""

    env: tuple[Value, ...]
    consts: Consts
    body: Term


@dataclass(eq=False)
class ClosureFn:
    """A semantic closure given directly as a function (used by the checker
    to assemble expected types of recursor branches)."""

    fn: Callable[[Value], Value]


Clo = Closure | ClosureFn


def apply_closure(clo: Clo, v: Value) -> Value:
    if isinstance(clo, Closure):
        return eval_term(clo.body, clo.env + (v,), clo.consts)
    return clo.fn(v)


# -- neutral heads and spine frames ------------------------------------------


@dataclass(eq=False)
class HVar:
    level: int


@dataclass(eq=False)
class HConst:
    name: str


@dataclass(eq=False)
class HMeta:
    mid: int


@dataclass(eq=False)
class HGlue:
    """Identity elimination stuck on a glue path; carries the glue argument."""

    arg: Value


Head = HVar | HConst | HMeta | HGlue


@dataclass(eq=False)
class SApp:
    arg: Value
    implicit: bool = False


@dataclass(eq=False)
class SFst:
    pass


@dataclass(eq=False)
class SSnd:
    pass


@dataclass(eq=False)
class SIndNat:
    motive: Value
    z_case: Value
    s_case: Value


@dataclass(eq=False)
class SIndEmpty:
    motive: Value


@dataclass(eq=False)
class SIndSum:
    motive: Value
    l_case: Value
    r_case: Value


@dataclass(eq=False)
class SIndId:
    base: Value
    motive: Value
    refl_case: Value
    endpoint: Value


@dataclass(eq=False)
class SIndPush:
    motive: Value
    inl_case: Value
    inr_case: Value
    glue_case: Value


Frame = SApp | SFst | SSnd | SIndNat | SIndEmpty | SIndSum | SIndId | SIndPush


# -- values -------------------------------------------------------------------


@dataclass(eq=False)
class VNeutral(Value):
    head: Head
    spine: tuple[Frame, ...] = ()


@dataclass(eq=False)
class VU(Value):
    level: int


@dataclass(eq=False)
class VPi(Value):
    name: str
    domain: Value
    codomain: Clo
    implicit: bool = False


@dataclass(eq=False)
class VLam(Value):
    name: str
    body: Clo


@dataclass(eq=False)
class VSigma(Value):
    name: str
    first: Value
    second: Clo


@dataclass(eq=False)
class VPair(Value):
    a: Value
    b: Value


@dataclass(eq=False)
class VNat(Value):
    pass


@dataclass(eq=False)
class VZero(Value):
    pass


@dataclass(eq=False)
class VSuc(Value):
    pred: Value


@dataclass(eq=False)
class VEmpty(Value):
    pass


@dataclass(eq=False)
class VUnit(Value):
    pass


@dataclass(eq=False)
class VTt(Value):
    pass


@dataclass(eq=False)
class VSum(Value):
    left: Value
    right: Value


@dataclass(eq=False)
class VInl(Value):
    arg: Value


@dataclass(eq=False)
class VInr(Value):
    arg: Value


@dataclass(eq=False)
class VId(Value):
    type: Value
    lhs: Value
    rhs: Value


@dataclass(eq=False)
class VRefl(Value):
    point: Value


@dataclass(eq=False)
class VPush(Value):
    src: Value
    left: Value
    right: Value
    f: Value
    g: Value


@dataclass(eq=False)
class VPoInl(Value):
    arg: Value


@dataclass(eq=False)
class VPoInr(Value):
    arg: Value


@dataclass(eq=False)
class VGlue(Value):
    arg: Value


@dataclass(eq=False)
class VTop(Value):
    """A value headed by a defined constant, glued to its unfolding.

    The constant view (`name` applied to `spine`) is used for compact readback
    and for cheap conversion checks; `unfolded` carries the actual value and
    need not be neutral (the spine may well have computed underneath).
    """

    name: str
    spine: tuple[Frame, ...]
    unfolded: Value


def unfold(v: Value) -> Value:
    """Strip definitional views down to the shape-bearing value."""
    while isinstance(v, VTop):
        v = v.unfolded
    return v


def fresh(level: int) -> VNeutral:
    """The generic value of the binder at the given de Bruijn level."""
    return VNeutral(HVar(level))


# -- evaluation ----------------------------------------------------------------


def eval_term(t: Term, env: tuple[Value, ...], consts: Consts) -> Value:
    match t:
        case Var(k):
            if k >= len(env):
                raise InternalCompilerError(f"unbound de Bruijn index {k} in eval")
            return env[len(env) - 1 - k]
        case U(i):
            return VU(i)
        case Const(name):
            try:
                return VTop(name, (), consts[name])
            except KeyError:
                raise InternalCompilerError(f"unknown constant {name} in eval") from None
        case Meta(mid, spine):
            frames = tuple(SApp(eval_term(a, env, consts)) for a in spine)
            return VNeutral(HMeta(mid), frames)
        case Pi(x, dom, cod, imp):
            return VPi(x, eval_term(dom, env, consts), Closure(env, consts, cod), imp)
        case Lam(x, body):
            return VLam(x, Closure(env, consts, body))
        case App(f, a, imp):
            return do_app(eval_term(f, env, consts), eval_term(a, env, consts), imp)
        case Sigma(x, first, second):
            return VSigma(x, eval_term(first, env, consts), Closure(env, consts, second))
        case Pair(a, b):
            return VPair(eval_term(a, env, consts), eval_term(b, env, consts))
        case Fst(p):
            return do_fst(eval_term(p, env, consts))
        case Snd(p):
            return do_snd(eval_term(p, env, consts))
        case Id(ty, lhs, rhs):
            return VId(
                eval_term(ty, env, consts),
                eval_term(lhs, env, consts),
                eval_term(rhs, env, consts),
            )
        case Refl(point):
            return VRefl(eval_term(point, env, consts))
        case IndId(base, motive, rc, end, path):
            return do_ind_id(
                eval_term(base, env, consts),
                eval_term(motive, env, consts),
                eval_term(rc, env, consts),
                eval_term(end, env, consts),
                eval_term(path, env, consts),
            )
        case Nat():
            return VNat()
        case Zero():
            return VZero()
        case Suc(n):
            return VSuc(eval_term(n, env, consts))
        case IndNat(motive, z, s, n):
            return do_ind_nat(
                eval_term(motive, env, consts),
                eval_term(z, env, consts),
                eval_term(s, env, consts),
                eval_term(n, env, consts),
            )
        case Empty():
            return VEmpty()
        case IndEmpty(motive, e):
            return do_ind_empty(eval_term(motive, env, consts), eval_term(e, env, consts))
        case Unit():
            return VUnit()
        case Tt():
            return VTt()
        case Sum(l, r):
            return VSum(eval_term(l, env, consts), eval_term(r, env, consts))
        case Inl(a):
            return VInl(eval_term(a, env, consts))
        case Inr(a):
            return VInr(eval_term(a, env, consts))
        case IndSum(motive, lc, rc, s):
            return do_ind_sum(
                eval_term(motive, env, consts),
                eval_term(lc, env, consts),
                eval_term(rc, env, consts),
                eval_term(s, env, consts),
            )
        case Push(s, a, b, f, g):
            return VPush(
                eval_term(s, env, consts),
                eval_term(a, env, consts),
                eval_term(b, env, consts),
                eval_term(f, env, consts),
                eval_term(g, env, consts),
            )
        case PoInl(a):
            return VPoInl(eval_term(a, env, consts))
        case PoInr(a):
            return VPoInr(eval_term(a, env, consts))
        case Glue(a):
            return VGlue(eval_term(a, env, consts))
        case IndPush(motive, ia, ib, ig, s):
            return do_ind_push(
                eval_term(motive, env, consts),
                eval_term(ia, env, consts),
                eval_term(ib, env, consts),
                eval_term(ig, env, consts),
                eval_term(s, env, consts),
            )
    raise InternalCompilerError(f"eval: unhandled term {t!r}")


def do_app(f: Value, a: Value, implicit: bool = False) -> Value:
    match f:
        case VLam(_, body):
            return apply_closure(body, a)
        case VTop(name, sp, v):
            return VTop(name, sp + (SApp(a, implicit),), do_app(v, a, implicit))
        case VNeutral(h, sp):
            return VNeutral(h, sp + (SApp(a, implicit),))
    raise InternalCompilerError(f"application of non-function value {type(f).__name__}")


def do_fst(p: Value) -> Value:
    match p:
        case VPair(a, _):
            return a
        case VTop(name, sp, v):
            return VTop(name, sp + (SFst(),), do_fst(v))
        case VNeutral(h, sp):
            return VNeutral(h, sp + (SFst(),))
    raise InternalCompilerError(f"fst of non-pair value {type(p).__name__}")


def do_snd(p: Value) -> Value:
    match p:
        case VPair(_, b):
            return b
        case VTop(name, sp, v):
            return VTop(name, sp + (SSnd(),), do_snd(v))
        case VNeutral(h, sp):
            return VNeutral(h, sp + (SSnd(),))
    raise InternalCompilerError(f"snd of non-pair value {type(p).__name__}")


def do_ind_nat(motive: Value, z: Value, s: Value, n: Value) -> Value:
    match n:
        case VZero():
            return z
        case VSuc(m):
            return do_app(do_app(s, m), do_ind_nat(motive, z, s, m))
        case VTop(name, sp, v):
            return VTop(name, sp + (SIndNat(motive, z, s),), do_ind_nat(motive, z, s, v))
        case VNeutral(h, sp):
            return VNeutral(h, sp + (SIndNat(motive, z, s),))
    raise InternalCompilerError(f"ind-nat on non-numeral value {type(n).__name__}")


def do_ind_empty(motive: Value, e: Value) -> Value:
    match e:
        case VTop(name, sp, v):
            return VTop(name, sp + (SIndEmpty(motive),), do_ind_empty(motive, v))
        case VNeutral(h, sp):
            return VNeutral(h, sp + (SIndEmpty(motive),))
    raise InternalCompilerError(f"ind-empty on non-neutral value {type(e).__name__}")


def do_ind_sum(motive: Value, lc: Value, rc: Value, s: Value) -> Value:
    match s:
        case VInl(a):
            return do_app(lc, a)
        case VInr(b):
            return do_app(rc, b)
        case VTop(name, sp, v):
            return VTop(name, sp + (SIndSum(motive, lc, rc),), do_ind_sum(motive, lc, rc, v))
        case VNeutral(h, sp):
            return VNeutral(h, sp + (SIndSum(motive, lc, rc),))
    raise InternalCompilerError(f"ind-sum on non-injection value {type(s).__name__}")


def do_ind_id(base: Value, motive: Value, rc: Value, end: Value, path: Value) -> Value:
    match path:
        case VRefl(_):
            return rc
        case VGlue(s):
            # No computation rule for identity elimination over glue: stuck.
            return VNeutral(HGlue(s), (SIndId(base, motive, rc, end),))
        case VTop(name, sp, v):
            return VTop(
                name, sp + (SIndId(base, motive, rc, end),), do_ind_id(base, motive, rc, end, v)
            )
        case VNeutral(h, sp):
            return VNeutral(h, sp + (SIndId(base, motive, rc, end),))
    raise InternalCompilerError(f"ind-id on non-path value {type(path).__name__}")


def do_ind_push(motive: Value, ia: Value, ib: Value, ig: Value, s: Value) -> Value:
    match s:
        case VPoInl(a):
            return do_app(ia, a)
        case VPoInr(b):
            return do_app(ib, b)
        case VTop(name, sp, v):
            return VTop(
                name, sp + (SIndPush(motive, ia, ib, ig),), do_ind_push(motive, ia, ib, ig, v)
            )
        case VNeutral(h, sp):
            return VNeutral(h, sp + (SIndPush(motive, ia, ib, ig),))
    raise InternalCompilerError(f"ind-push on non-pushout value {type(s).__name__}")


def apply_frame(v: Value, frame: Frame) -> Value:
    """Replay one stuck elimination frame on a (no longer stuck) value."""
    match frame:
        case SApp(a, imp):
            return do_app(v, a, imp)
        case SFst():
            return do_fst(v)
        case SSnd():
            return do_snd(v)
        case SIndNat(m, z, s):
            return do_ind_nat(m, z, s, v)
        case SIndEmpty(m):
            return do_ind_empty(m, v)
        case SIndSum(m, lc, rc):
            return do_ind_sum(m, lc, rc, v)
        case SIndId(base, m, rc, end):
            return do_ind_id(base, m, rc, end, v)
        case SIndPush(m, ia, ib, ig):
            return do_ind_push(m, ia, ib, ig, v)
    raise InternalCompilerError(f"apply_frame: unhandled frame {type(frame).__name__}")


# -- readback -------------------------------------------------------------------


def quote(v: Value, level: int, unfold_tops: bool = True) -> Term:
    """Read a value back as a term with `level` binders in scope.

    With `unfold_tops` set (the default) defined constants are expanded away,
    giving genuine normal forms.  Without it, glued values read back as the
    constant applied to its spine, which keeps terms compact and re-checkable.
    """
    match v:
        case VTop(name, spine, unfolded):
            if unfold_tops:
                return quote(unfolded, level, True)
            return _quote_spine(Const(name), spine, level, False)
        case VNeutral(head, spine):
            return _quote_neutral(head, spine, level, unfold_tops)
        case VU(i):
            return U(i)
        case VPi(x, dom, cod, imp):
            body = quote(apply_closure(cod, fresh(level)), level + 1, unfold_tops)
            return Pi(x, quote(dom, level, unfold_tops), body, imp)
        case VLam(x, clo):
            return Lam(x, quote(apply_closure(clo, fresh(level)), level + 1, unfold_tops))
        case VSigma(x, first, second):
            body = quote(apply_closure(second, fresh(level)), level + 1, unfold_tops)
            return Sigma(x, quote(first, level, unfold_tops), body)
        case VPair(a, b):
            return Pair(quote(a, level, unfold_tops), quote(b, level, unfold_tops))
        case VNat():
            return Nat()
        case VZero():
            return Zero()
        case VSuc(n):
            return Suc(quote(n, level, unfold_tops))
        case VEmpty():
            return Empty()
        case VUnit():
            return Unit()
        case VTt():
            return Tt()
        case VSum(l, r):
            return Sum(quote(l, level, unfold_tops), quote(r, level, unfold_tops))
        case VInl(a):
            return Inl(quote(a, level, unfold_tops))
        case VInr(a):
            return Inr(quote(a, level, unfold_tops))
        case VId(ty, lhs, rhs):
            return Id(
                quote(ty, level, unfold_tops),
                quote(lhs, level, unfold_tops),
                quote(rhs, level, unfold_tops),
            )
        case VRefl(p):
            return Refl(quote(p, level, unfold_tops))
        case VPush(s, a, b, f, g):
            return Push(
                quote(s, level, unfold_tops),
                quote(a, level, unfold_tops),
                quote(b, level, unfold_tops),
                quote(f, level, unfold_tops),
                quote(g, level, unfold_tops),
            )
        case VPoInl(a):
            return PoInl(quote(a, level, unfold_tops))
        case VPoInr(a):
            return PoInr(quote(a, level, unfold_tops))
        case VGlue(a):
            return Glue(quote(a, level, unfold_tops))
    raise InternalCompilerError(f"quote: unhandled value {type(v).__name__}")


def _quote_neutral(
    head: Head, spine: tuple[Frame, ...], level: int, unfold_tops: bool
) -> Term:
    match head:
        case HVar(l):
            if l >= level:
                raise InternalCompilerError(f"level {l} escapes scope of depth {level}")
            acc: Term = Var(level - 1 - l)
        case HConst(name):
            acc = Const(name)
        case HMeta(mid):
            # Leading applications of a meta are folded into its spine so the
            # elaborator sees the pattern shape directly.
            args = []
            rest = 0
            for frame in spine:
                if isinstance(frame, SApp):
                    args.append(quote(frame.arg, level, unfold_tops))
                    rest += 1
                else:
                    break
            acc = Meta(mid, tuple(args))
            spine = spine[rest:]
        case HGlue(arg):
            acc = Glue(quote(arg, level, unfold_tops))
        case _:
            raise InternalCompilerError(f"quote: unhandled head {type(head).__name__}")
    return _quote_spine(acc, spine, level, unfold_tops)


def _quote_spine(
    acc: Term, spine: tuple[Frame, ...], level: int, unfold_tops: bool
) -> Term:
    for frame in spine:
        match frame:
            case SApp(a, imp):
                acc = App(acc, quote(a, level, unfold_tops), imp)
            case SFst():
                acc = Fst(acc)
            case SSnd():
                acc = Snd(acc)
            case SIndNat(m, z, s):
                acc = IndNat(
                    quote(m, level, unfold_tops),
                    quote(z, level, unfold_tops),
                    quote(s, level, unfold_tops),
                    acc,
                )
            case SIndEmpty(m):
                acc = IndEmpty(quote(m, level, unfold_tops), acc)
            case SIndSum(m, lc, rc):
                acc = IndSum(
                    quote(m, level, unfold_tops),
                    quote(lc, level, unfold_tops),
                    quote(rc, level, unfold_tops),
                    acc,
                )
            case SIndId(base, m, rc, end):
                acc = IndId(
                    quote(base, level, unfold_tops),
                    quote(m, level, unfold_tops),
                    quote(rc, level, unfold_tops),
                    quote(end, level, unfold_tops),
                    acc,
                )
            case SIndPush(m, ia, ib, ig):
                acc = IndPush(
                    quote(m, level, unfold_tops),
                    quote(ia, level, unfold_tops),
                    quote(ib, level, unfold_tops),
                    quote(ig, level, unfold_tops),
                    acc,
                )
            case _:
                raise InternalCompilerError(f"quote: unhandled frame {type(frame).__name__}")
    return acc


def nf(t: Term, env: tuple[Value, ...] = (), consts: Consts | None = None) -> Term:
    """Fully unfolded normal form of a term under the given environment."""
    return quote(eval_term(t, env, consts or {}), len(env))


# -- definitional equality --------------------------------------------------------


def conv(a: Value, b: Value, level: int) -> bool:
    """Definitional equality of two values of a common type."""
    # Unit proof-irrelevance: anything convertible with tt (sound because both
    # sides inhabit the same type, which must then be Unit).
    if isinstance(a, VTt) or isinstance(b, VTt):
        return True
    # Eta for functions: compare results on a generic argument.
    if isinstance(a, VLam) or isinstance(b, VLam):
        v = fresh(level)
        return conv(do_app(a, v), do_app(b, v), level + 1)
    # Eta for pairs: compare both projections.
    if isinstance(a, VPair) or isinstance(b, VPair):
        return conv(do_fst(a), do_fst(b), level) and conv(do_snd(a), do_snd(b), level)
    # Glued values: same constant with matching spines is equal without
    # unfolding; anything else falls back to the unfolded values.
    if isinstance(a, VTop) and isinstance(b, VTop):
        if (
            a.name == b.name
            and len(a.spine) == len(b.spine)
            and _conv_spine(a.spine, b.spine, level)
        ):
            return True
        return conv(a.unfolded, b.unfolded, level)
    if isinstance(a, VTop):
        return conv(a.unfolded, b, level)
    if isinstance(b, VTop):
        return conv(a, b.unfolded, level)
    match a, b:
        case (VU(i), VU(j)):
            return i == j
        case (VPi(_, dom1, cod1, imp1), VPi(_, dom2, cod2, imp2)):
            if imp1 != imp2 or not conv(dom1, dom2, level):
                return False
            v = fresh(level)
            return conv(apply_closure(cod1, v), apply_closure(cod2, v), level + 1)
        case (VSigma(_, f1, s1), VSigma(_, f2, s2)):
            if not conv(f1, f2, level):
                return False
            v = fresh(level)
            return conv(apply_closure(s1, v), apply_closure(s2, v), level + 1)
        case (VNat(), VNat()) | (VZero(), VZero()) | (VEmpty(), VEmpty()) | (VUnit(), VUnit()):
            return True
        case (VSuc(m), VSuc(n)):
            return conv(m, n, level)
        case (VSum(l1, r1), VSum(l2, r2)):
            return conv(l1, l2, level) and conv(r1, r2, level)
        case (VInl(x), VInl(y)) | (VInr(x), VInr(y)):
            return conv(x, y, level)
        case (VId(t1, l1, r1), VId(t2, l2, r2)):
            return conv(t1, t2, level) and conv(l1, l2, level) and conv(r1, r2, level)
        case (VRefl(p), VRefl(q)):
            return conv(p, q, level)
        case (VPush(s1, a1, b1, f1, g1), VPush(s2, a2, b2, f2, g2)):
            return (
                conv(s1, s2, level)
                and conv(a1, a2, level)
                and conv(b1, b2, level)
                and conv(f1, f2, level)
                and conv(g1, g2, level)
            )
        case (VPoInl(x), VPoInl(y)) | (VPoInr(x), VPoInr(y)) | (VGlue(x), VGlue(y)):
            return conv(x, y, level)
        case (VNeutral(h1, sp1), VNeutral(h2, sp2)):
            return _conv_head(h1, h2, level) and _conv_spine(sp1, sp2, level)
    return False


def _conv_head(h1: Head, h2: Head, level: int) -> bool:
    match h1, h2:
        case (HVar(i), HVar(j)):
            return i == j
        case (HConst(m), HConst(n)):
            return m == n
        case (HMeta(i), HMeta(j)):
            return i == j
        case (HGlue(x), HGlue(y)):
            return conv(x, y, level)
    return False


def _conv_spine(sp1: tuple[Frame, ...], sp2: tuple[Frame, ...], level: int) -> bool:
    if len(sp1) != len(sp2):
        return False
    for f1, f2 in zip(sp1, sp2):
        match f1, f2:
            case (SApp(a1, _), SApp(a2, _)):
                if not conv(a1, a2, level):
                    return False
            case (SFst(), SFst()) | (SSnd(), SSnd()):
                pass
            case (SIndNat(m1, z1, s1), SIndNat(m2, z2, s2)):
                if not (conv(m1, m2, level) and conv(z1, z2, level) and conv(s1, s2, level)):
                    return False
            case (SIndEmpty(m1), SIndEmpty(m2)):
                if not conv(m1, m2, level):
                    return False
            case (SIndSum(m1, l1, r1), SIndSum(m2, l2, r2)):
                if not (conv(m1, m2, level) and conv(l1, l2, level) and conv(r1, r2, level)):
                    return False
            case (SIndId(b1, m1, c1, e1), SIndId(b2, m2, c2, e2)):
                if not (
                    conv(b1, b2, level)
                    and conv(m1, m2, level)
                    and conv(c1, c2, level)
                    and conv(e1, e2, level)
                ):
                    return False
            case (SIndPush(m1, a1, b1, g1), SIndPush(m2, a2, b2, g2)):
                if not (
                    conv(m1, m2, level)
                    and conv(a1, a2, level)
                    and conv(b1, b2, level)
                    and conv(g1, g2, level)
                ):
                    return False
            case _:
                return False
    return True
