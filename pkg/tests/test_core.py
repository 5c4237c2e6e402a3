"""Tests for the core term language: shifting, alpha-equivalence, printing."""
import pytest
from hypothesis import given, strategies as st

from artifact.core import (
    ADMIT,
    App,
    Const,
    DEFINITION,
    Declaration,
    Diagnostic,
    Fst,
    Id,
    IndNat,
    InternalCompilerError,
    Lam,
    Nat,
    Pair,
    Pi,
    Refl,
    Sigma,
    Snd,
    Span,
    Suc,
    Tt,
    U,
    Unit,
    Var,
    Zero,
    occurs_free,
    pretty,
    shift,
)


def _terms():
    base = st.one_of(
        st.builds(Var, st.integers(min_value=0, max_value=6)),
        st.builds(U, st.integers(min_value=0, max_value=2)),
        st.just(Nat()),
        st.just(Zero()),
        st.just(Unit()),
        st.just(Tt()),
        st.builds(Const, st.sampled_from(["f", "g", "Basics.add"])),
    )

    def extend(sub):
        names = st.sampled_from(["x", "y", "p", "_"])
        return st.one_of(
            st.builds(Lam, names, sub),
            st.builds(Pi, names, sub, sub),
            st.builds(Sigma, names, sub, sub),
            st.builds(App, sub, sub),
            st.builds(Pair, sub, sub),
            st.builds(Fst, sub),
            st.builds(Snd, sub),
            st.builds(Suc, sub),
            st.builds(Refl, sub),
            st.builds(Id, sub, sub, sub),
            st.builds(IndNat, sub, sub, sub, sub),
        )

    return st.recursive(base, extend, max_leaves=20)


# -- shifting ---------------------------------------------------------------


def test_shift_examples():
    assert shift(Var(0), 0, 1) == Var(1)
    assert shift(Var(3), 2, -1) == Var(2)
    assert shift(Var(1), 2, 5) == Var(1)  # below the cutoff: untouched
    assert shift(Lam("x", Var(0)), 0, 5) == Lam("x", Var(0))
    assert shift(Lam("x", Var(1)), 0, 2) == Lam("x", Var(3))


def test_shift_underflow_is_an_internal_error():
    with pytest.raises(InternalCompilerError):
        shift(Var(0), 0, -1)


@given(_terms())
def test_shift_by_zero_is_identity(t):
    assert shift(t, 0, 0) == t


@given(_terms(), st.integers(0, 3), st.integers(0, 3), st.integers(0, 2))
def test_shift_composes_additively(t, a, b, cutoff):
    assert shift(shift(t, cutoff, a), cutoff, b) == shift(t, cutoff, a + b)


@given(_terms())
def test_shift_up_then_down_roundtrips(t):
    assert shift(shift(t, 0, 1), 0, -1) == t


# -- alpha-equivalence ------------------------------------------------------


def test_binder_names_are_ignored_by_equality():
    assert Lam("x", Var(0)) == Lam("y", Var(0))
    assert Pi("A", U(0), Var(0)) == Pi("B", U(0), Var(0))
    assert Sigma("p", Nat(), Nat()) == Sigma("q", Nat(), Nat())
    assert Lam("x", Var(0)) != Lam("x", Var(1))
    assert hash(Lam("x", Var(0))) == hash(Lam("y", Var(0)))


def _rename(t, tag):
    """Replace every binder name in t with `tag` (structure untouched)."""
    match t:
        case Pi(_, dom, cod, imp):
            return Pi(tag, _rename(dom, tag), _rename(cod, tag), imp)
        case Lam(_, body):
            return Lam(tag, _rename(body, tag))
        case Sigma(_, first, second):
            return Sigma(tag, _rename(first, tag), _rename(second, tag))
        case App(f, a, imp):
            return App(_rename(f, tag), _rename(a, tag), imp)
        case Pair(a, b):
            return Pair(_rename(a, tag), _rename(b, tag))
        case Fst(p):
            return Fst(_rename(p, tag))
        case Snd(p):
            return Snd(_rename(p, tag))
        case Suc(n):
            return Suc(_rename(n, tag))
        case Refl(p):
            return Refl(_rename(p, tag))
        case Id(ty, l, r):
            return Id(_rename(ty, tag), _rename(l, tag), _rename(r, tag))
        case IndNat(m, z, s, n):
            return IndNat(_rename(m, tag), _rename(z, tag), _rename(s, tag), _rename(n, tag))
        case _:
            return t


@given(_terms())
def test_renaming_binders_preserves_equality(t):
    assert _rename(t, "w") == t


# -- occurs_free ------------------------------------------------------------


def test_occurs_free():
    assert occurs_free(Var(0), 0)
    assert not occurs_free(Var(1), 0)
    assert not occurs_free(Lam("x", Var(0)), 0)  # bound by the lambda
    assert occurs_free(Lam("x", Var(1)), 0)
    assert occurs_free(Pi("x", Var(0), Var(2)), 1)


# -- pretty-printing --------------------------------------------------------


def test_pretty_binders():
    assert pretty(Lam("x", Var(0))) == "λ (x : _) . x"
    assert pretty(Lam("x", Var(0)), elide=True) == "λ x . x"
    assert pretty(Pi("A", U(0), Pi("_", Var(0), Var(1)))) == "Π (A : U 0) . A → A"
    assert pretty(Pi("x", Nat(), Id(Nat(), Var(0), Zero()))) == "Π (x : Nat) . Id Nat x zero"
    assert pretty(Pi("A", U(0), Var(0), implicit=True)) == "Π {A : U 0} . A"


def test_pretty_arrows_and_products():
    assert pretty(Pi("_", Nat(), Nat())) == "Nat → Nat"
    assert pretty(Pi("_", Pi("_", Nat(), Nat()), Nat())) == "(Nat → Nat) → Nat"
    assert pretty(Pi("_", Nat(), Pi("_", Nat(), Nat()))) == "Nat → Nat → Nat"
    assert pretty(Sigma("_", Nat(), Nat())) == "Nat × Nat"
    assert pretty(Pi("_", Sigma("_", Nat(), Nat()), Nat())) == "Nat × Nat → Nat"
    assert pretty(Sigma("p", Nat(), Id(Nat(), Var(0), Zero()))) == "Σ (p : Nat) . Id Nat p zero"


def test_pretty_spines_and_literals():
    assert pretty(Refl(Zero())) == "refl zero"
    assert pretty(Suc(Suc(Zero()))) == "suc (suc zero)"
    assert pretty(App(Const("f"), Suc(Zero()))) == "f (suc zero)"
    assert pretty(App(App(Const("f"), Var(9)), Zero())) == "f !9 zero"
    assert pretty(Pair(Zero(), Tt())) == "(zero , tt)"


def test_pretty_avoids_binder_capture():
    t = Lam("x", Lam("x", App(Var(0), Var(1))))
    assert pretty(t, elide=True) == "λ x . λ x' . x' x"


def test_pretty_implicit_application():
    assert pretty(App(Const("f"), Nat(), implicit=True)) == "f {Nat}"


@given(_terms())
def test_pretty_total_on_generated_terms(t):
    assert isinstance(pretty(t), str)
    assert isinstance(pretty(t, elide=True), str)


# -- declarations and diagnostics -------------------------------------------


def test_declaration_body_validation():
    Declaration("M.ok", DEFINITION, Nat(), Zero())
    with pytest.raises(InternalCompilerError):
        Declaration("M.bad", DEFINITION, Nat(), None)
    with pytest.raises(InternalCompilerError):
        Declaration("M.bad2", ADMIT, Nat(), Zero())


def test_diagnostic_render_with_caret():
    span = Span("demo.hott", 1, 5, 3)
    d = Diagnostic("error", span, "TYPE-MISMATCH", "expected Nat, got Unit")
    text = d.render("def bad : Nat := tt")
    assert "demo.hott:1:5" in text
    assert "TYPE-MISMATCH" in text
    assert "^^^" in text
