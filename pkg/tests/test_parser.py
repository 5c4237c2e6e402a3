"""Surface syntax: lexing quirks, desugaring, scope resolution, round-trips."""
import pytest
from hypothesis import given, settings

from artifact.core import (
    App,
    Const,
    Diagnostic,
    Fst,
    Id,
    IndNat,
    Lam,
    Meta,
    Nat,
    Pair,
    Pi,
    PoInl,
    Push,
    Refl,
    Sigma,
    Snd,
    Suc,
    Sum,
    Tt,
    U,
    Unit,
    Var,
    Zero,
    pretty,
)
from artifact.parser import lower_module, parse_module, parse_term
from helpers_typed import closed_typed_terms


def term(src, visible=None):
    t, _holes = parse_term(src, visible=visible)
    return t


def num(n):
    t = Zero()
    for _ in range(n):
        t = Suc(t)
    return t


def parse_fails(rule, src):
    with pytest.raises(Diagnostic) as err:
        parse_term(src)
    assert err.value.rule_id == rule, err.value
    return err.value


class TestLexer:
    def test_lambda_aliases(self):
        expected = Lam("x", Var(0))
        assert term("λ x . x") == expected
        assert term("\\ x . x") == expected
        assert term("lam x . x") == expected

    def test_dot_binds_into_qualified_name(self):
        # `x.x` is one token (a qualified name), not a binder dot, so the
        # lambda never finds its dot.  Spaces fix it: `λ x . x`.
        parse_fails("PARSE", "λ x.x")

    def test_dash_identifiers_vs_arrow(self):
        assert term("Π (f : Nat -> Nat) . Nat") == Pi(
            "f", Pi("_", Nat(), Nat()), Nat()
        )
        assert term("λ po-blah . po-blah") == Lam("x", Var(0))

    def test_line_comment_after_dashes(self):
        assert term("3 -- x--c is still a comment\n") == num(3)

    def test_nested_block_comments(self):
        assert term("{- a {- nested -} comment -} 4") == num(4)

    def test_numeral(self):
        assert term("0") == Zero()
        assert term("3") == num(3)


class TestSugar:
    def test_arrow_is_right_associative(self):
        assert term("Nat -> Nat -> Nat") == Pi("_", Nat(), Pi("_", Nat(), Nat()))

    def test_product_binds_tighter_than_arrow(self):
        assert term("Nat × Nat -> Nat") == Pi("_", Sigma("_", Nat(), Nat()), Nat())
        assert term("Nat * Nat") == Sigma("_", Nat(), Nat())

    def test_pi_group_spreads_over_names(self):
        assert term("Π (A B : U 0) . A") == Pi("A", U(0), Pi("B", U(0), Var(1)))

    def test_implicit_group(self):
        t = term("Π {A : U 0} . A -> A")
        assert t == Pi("A", U(0), Pi("_", Var(0), Var(1)), implicit=True)
        assert isinstance(t, Pi) and t.implicit

    def test_implicit_application(self):
        t = term("λ f . f {Nat} 0")
        assert t == Lam("f", App(App(Var(0), Nat(), True), Zero()))

    def test_pattern_pair_binder(self):
        assert term("λ (x , y) . x") == Lam("p", Fst(Var(0)))
        assert term("λ (x , y) . y") == Lam("p", Snd(Var(0)))

    def test_nary_pair_nests_right(self):
        assert term("(1 , 2 , 3)") == Pair(num(1), Pair(num(2), num(3)))

    def test_hole_becomes_meta(self):
        t, holes = parse_term("Id _ 0 0")
        assert t == Id(Meta(0, ()), Zero(), Zero())
        assert len(holes) == 1

    def test_primitive_spine(self):
        assert term("suc 3") == num(4)
        assert term("Sum Unit Unit") == Sum(Unit(), Unit())

    def test_underapplied_primitive_eta_expands(self):
        assert term("suc") == Lam("a", Suc(Var(0)))
        t = term("ind-nat (λ _ . Nat) 0")
        assert t == Lam(
            "a", Lam("b", IndNat(Lam("_", Nat()), Zero(), Var(1), Var(0)))
        )

    def test_overapplied_primitive_keeps_extra_args(self):
        assert term("fst (0 , suc) 1") == App(Fst(Pair(Zero(), Lam("a", Suc(Var(0))))), num(1))

    def test_primitive_rejects_implicit_args(self):
        parse_fails("PARSE", "suc {0}")


class TestScope:
    def test_unknown_name_suggests(self):
        err = parse_fails("SCOPE", "λ count . coumt")
        assert any("count" in note for note in err.notes)

    def test_qualified_name_needs_visibility(self):
        assert term("Basics.add", visible={"add": ["Basics.add"]}) == Const(
            "Basics.add"
        )
        parse_fails("SCOPE", "Basics.add")

    def test_ambiguous_unqualified_name(self):
        with pytest.raises(Diagnostic) as err:
            parse_term("inc", visible={"inc": ["A.inc", "B.inc"]})
        assert err.value.rule_id == "SCOPE"
        assert "ambiguous" in err.value.message
        assert any("A.inc" in n for n in err.value.notes)

    def test_shadowing_prefers_innermost(self):
        t = term("λ x . λ x . x")
        assert t == Lam("x", Lam("x", Var(0)))


class TestParseErrors:
    def test_trailing_input(self):
        parse_fails("PARSE", "0 )")

    def test_missing_binder_dot(self):
        parse_fails("PARSE", "λ x x")

    def test_unclosed_paren(self):
        parse_fails("PARSE", "(0 , 1")

    def test_unterminated_block_comment(self):
        parse_fails("PARSE", "{- oops")

    def test_annotated_lambda_binder_requires_hole(self):
        parse_fails("PARSE", "λ (x : Nat) . x")

    def test_empty_source(self):
        parse_fails("PARSE", "")


MODULE_SRC = """
import Basics

def twice (f : Nat -> Nat) (n : Nat) : Nat := f (f n)

def plus_two : Nat -> Nat := twice suc

postulate magic : Π {A : U 0} . A

admit later : Nat
"""


class TestModules:
    def lower(self, src=MODULE_SRC, exports={"Basics": ["add"]}):
        mod = parse_module(src, "<test>", "M")
        return lower_module(mod, exports)

    def test_declaration_groups_become_pis_and_lambdas(self):
        decls = {d.name: d for d in self.lower()}
        twice = decls["M.twice"]
        assert twice.type == Pi(
            "f", Pi("_", Nat(), Nat()), Pi("n", Nat(), Nat())
        )
        assert twice.body == Lam(
            "f", Lam("n", App(Var(1), App(Var(1), Var(0))))
        )

    def test_earlier_declarations_visible_unqualified(self):
        decls = {d.name: d for d in self.lower()}
        body = decls["M.plus_two"].body
        assert body == App(Const("M.twice"), Lam("a", Suc(Var(0))))

    def test_postulate_and_admit_have_no_bodies(self):
        decls = {d.name: d for d in self.lower()}
        assert decls["M.magic"].kind == "postulate"
        assert decls["M.magic"].body is None
        assert decls["M.later"].kind == "admit"

    def test_unknown_import(self):
        mod = parse_module("import Missing\n", "<test>", "M")
        with pytest.raises(Diagnostic) as err:
            lower_module(mod, {})
        assert err.value.rule_id == "SCOPE"

    def test_import_makes_names_visible_both_ways(self):
        src = "import Basics\ndef a : Nat := add 0 0\ndef b : Nat := Basics.add 0 0\n"
        decls = self.lower(src)
        assert decls[0].body == App(App(Const("Basics.add"), Zero()), Zero())
        assert decls[1].body == decls[0].body

    def test_module_parse_error_reports_position(self):
        with pytest.raises(Diagnostic) as err:
            parse_module("def : Nat := 0\n", "<test>", "M")
        assert err.value.rule_id == "PARSE"
        assert err.value.span is not None


ROUND_TRIP_BATTERY = [
    Zero(),
    num(7),
    Tt(),
    Nat(),
    Unit(),
    U(0),
    U(3),
    Lam("x", Var(0)),
    Lam("f", Lam("x", App(Var(1), App(Var(1), Var(0))))),
    Pi("A", U(0), Pi("x", Var(0), Var(1))),
    Pi("A", U(1), Pi("B", U(0), Var(1)), implicit=True),
    Sigma("n", Nat(), Id(Nat(), Var(0), Zero())),
    Pair(Zero(), Tt()),
    Pair(num(1), Pair(num(2), num(3))),
    Fst(Pair(Zero(), Tt())),
    Snd(Pair(Zero(), Tt())),
    Id(Nat(), Zero(), num(2)),
    Refl(Zero()),
    IndNat(Lam("_", Nat()), Zero(), Lam("k", Lam("ih", Suc(Var(0)))), num(2)),
    Sum(Nat(), Unit()),
    Push(Unit(), Unit(), Unit(), Lam("u", Var(0)), Lam("u", Var(0))),
    PoInl(Tt()),
    App(Lam("x", Var(0)), Zero()),
    Lam("f", App(Var(0), Nat(), True)),
    Lam("x", Lam("x", Lam("x", Var(2)))),
]


@pytest.mark.parametrize("t", ROUND_TRIP_BATTERY, ids=lambda t: pretty(t, elide=True))
def test_round_trip_battery(t):
    assert term(pretty(t, elide=True)) == t
    assert term(pretty(t)) == t


@settings(max_examples=150, deadline=None)
@given(closed_typed_terms())
def test_round_trip_generated(pair):
    t, _ty = pair
    assert term(pretty(t, elide=True)) == t
    assert term(pretty(t)) == t
