"""Hypothesis strategies for closed, well-typed terms of the small fragment
used by property tests: simple types over Nat, Unit, non-dependent functions
and products, with variables, applications, lambdas, pairs, projections, and
numeral arithmetic via the Nat recursor.

Types are kept closed (non-dependent), so a context is just a tuple of closed
type terms and `Var(i)` is well-typed whenever the context entry equals the
goal type (term equality is alpha-equivalence).
"""
from __future__ import annotations

from hypothesis import strategies as st

from artifact.core import (
    App,
    Fst,
    IndNat,
    Lam,
    Nat,
    Pair,
    Pi,
    Sigma,
    Snd,
    Suc,
    Term,
    Tt,
    Unit,
    Var,
    Zero,
    shift,
)


def simple_types(max_depth: int = 2) -> st.SearchStrategy[Term]:
    base = st.sampled_from([Nat(), Unit()])
    if max_depth == 0:
        return base
    sub = simple_types(max_depth - 1)
    return st.one_of(
        base,
        st.builds(lambda a, b: Pi("_", a, shift(b, 0, 1)), sub, sub),
        st.builds(lambda a, b: Sigma("_", a, shift(b, 0, 1)), sub, sub),
    )


def _codomain(ty: Term) -> Term:
    # Non-dependent Pi/Sigma built by this module: the bound variable never
    # occurs, so unshifting recovers the closed component type.
    assert isinstance(ty, (Pi, Sigma))
    body = ty.codomain if isinstance(ty, Pi) else ty.second
    return shift(body, 0, -1)


def _eliminable(ctx: tuple[Term, ...], ty: Term) -> list[tuple[str, int, Term | None]]:
    """Context variables that an elimination form can turn into `ty`."""
    heads: list[tuple[str, int, Term | None]] = []
    for i, entry in enumerate(reversed(ctx)):
        match entry:
            case Pi(_, dom, cod) if shift(cod, 0, -1) == ty:
                heads.append(("app", i, dom))
            case Sigma(_, first, second):
                if first == ty:
                    heads.append(("fst", i, None))
                if shift(second, 0, -1) == ty:
                    heads.append(("snd", i, None))
    return heads


@st.composite
def typed_terms(
    draw, ty: Term, ctx: tuple[Term, ...] = (), fuel: int = 3, checkable: bool = False
) -> Term:
    """A closed-context term of the given closed simple type.

    With `checkable=True`, elimination forms only ever target variables, so
    every application/projection head is inferable and the whole term passes
    a bidirectional checker without annotations.  The default allows literal
    lambda/pair heads (beta/proj redexes), which evaluation tests want.
    """
    options: list[str] = []
    hits = [i for i, entry in enumerate(reversed(ctx)) if entry == ty]
    if hits:
        options.append("var")
    match ty:
        case Nat():
            options += ["zero", "lit"]
            if fuel > 0:
                options += ["suc", "add"]
        case Unit():
            options.append("tt")
        case Pi():
            options.append("lam")
        case Sigma():
            options.append("pair")
    heads = _eliminable(ctx, ty) if checkable else []
    if fuel > 0:
        if checkable:
            if heads:
                options.append("call")
        else:
            options += ["app", "fst", "snd"]
    choice = draw(st.sampled_from(options))
    if choice == "var":
        return Var(draw(st.sampled_from(hits)))
    if choice == "zero":
        return Zero()
    if choice == "lit":
        n = draw(st.integers(min_value=0, max_value=4))
        t: Term = Zero()
        for _ in range(n):
            t = Suc(t)
        return t
    if choice == "tt":
        return Tt()
    if choice == "suc":
        return Suc(draw(typed_terms(Nat(), ctx, fuel - 1, checkable)))
    if choice == "add":
        m = draw(typed_terms(Nat(), ctx, fuel - 1, checkable))
        n = draw(typed_terms(Nat(), ctx, fuel - 1, checkable))
        return IndNat(Lam("_", Nat()), n, Lam("k", Lam("ih", Suc(Var(0)))), m)
    if choice == "lam":
        assert isinstance(ty, Pi)
        body = draw(typed_terms(_codomain(ty), ctx + (ty.domain,), fuel, checkable))
        return Lam("x", body)
    if choice == "pair":
        assert isinstance(ty, Sigma)
        return Pair(
            draw(typed_terms(ty.first, ctx, fuel, checkable)),
            draw(typed_terms(_codomain(ty), ctx, fuel, checkable)),
        )
    if choice == "call":
        kind, i, dom = draw(st.sampled_from(heads))
        if kind == "app":
            return App(Var(i), draw(typed_terms(dom, ctx, fuel - 1, checkable)))
        return Fst(Var(i)) if kind == "fst" else Snd(Var(i))
    if choice == "app":
        arg_ty = draw(simple_types(1))
        fn = draw(typed_terms(Pi("_", arg_ty, shift(ty, 0, 1)), ctx, fuel - 1))
        arg = draw(typed_terms(arg_ty, ctx, fuel - 1))
        return App(fn, arg)
    if choice == "fst":
        other = draw(simple_types(1))
        pair = draw(typed_terms(Sigma("_", ty, shift(other, 0, 1)), ctx, fuel - 1))
        return Fst(pair)
    if choice == "snd":
        other = draw(simple_types(1))
        pair = draw(typed_terms(Sigma("_", other, shift(ty, 0, 1)), ctx, fuel - 1))
        return Snd(pair)
    raise AssertionError(choice)


@st.composite
def closed_typed_terms(draw, fuel: int = 3) -> tuple[Term, Term]:
    """A (term, type) pair with no free variables."""
    ty = draw(simple_types(2))
    return draw(typed_terms(ty, (), fuel)), ty


@st.composite
def closed_checkable_terms(draw, fuel: int = 3) -> tuple[Term, Term]:
    """Like closed_typed_terms, but annotation-free checkable (see typed_terms)."""
    ty = draw(simple_types(2))
    return draw(typed_terms(ty, (), fuel, checkable=True)), ty


@st.composite
def same_type_term_pairs(draw, fuel: int = 3) -> tuple[Term, Term, Term]:
    """Two closed terms sharing one closed type: (s, t, type)."""
    ty = draw(simple_types(2))
    return draw(typed_terms(ty, (), fuel)), draw(typed_terms(ty, (), fuel)), ty
