"""Evaluation, readback, and definitional equality."""
import pytest
from hypothesis import given, settings

from artifact.core import (
    App,
    Const,
    Glue,
    IndId,
    IndNat,
    Lam,
    Nat,
    Pair,
    Pi,
    Refl,
    Sigma,
    Suc,
    Tt,
    Unit,
    Var,
    Zero,
    pretty,
    shift,
)
from artifact.oracle import num, oracle_nf
from artifact.semantics import (
    HGlue,
    VNeutral,
    VTop,
    VTt,
    conv,
    eval_term,
    fresh,
    nf,
    quote,
    unfold,
)
from helpers_typed import closed_typed_terms, same_type_term_pairs

ADD = Lam(
    "m",
    Lam("n", IndNat(Lam("_", Nat()), Var(0), Lam("k", Lam("ih", Suc(Var(0)))), Var(1))),
)
MUL = Lam(
    "m",
    Lam(
        "n",
        IndNat(
            Lam("_", Nat()),
            Zero(),
            Lam("k", Lam("ih", App(App(ADD, Var(2)), Var(0)))),
            Var(1),
        ),
    ),
)


def apply2(f, m, n):
    return App(App(f, num(m)), num(n))


class TestOracleAgreement:
    def test_addition_sample_grid(self):
        for m in range(6):
            for n in range(6):
                t = apply2(ADD, m, n)
                assert nf(t) == oracle_nf(t) == num(m + n)

    def test_multiplication_sample_grid(self):
        for m in range(6):
            for n in range(6):
                t = apply2(MUL, m, n)
                assert nf(t) == oracle_nf(t) == num(m * n)

    def test_open_term_normalization(self):
        # add zero n is stuck on neither route; add n zero is stuck on both.
        t = App(App(ADD, Zero()), Var(0))
        env = (fresh(0),)
        assert nf(t, env) == Var(0)


class TestEta:
    def test_function_eta(self):
        f = fresh(0)
        expanded = eval_term(Lam("x", App(Var(1), Var(0))), (f,), {})
        assert conv(f, expanded, 1)

    def test_pair_eta(self):
        p = fresh(0)
        expanded = eval_term(Pair(App(Lam("y", Var(0)), Var(0)), Var(0)), (p,), {})
        # (fst p, snd p) vs p
        from artifact.semantics import VPair, do_fst, do_snd

        assert conv(p, VPair(do_fst(p), do_snd(p)), 1)

    def test_unit_proof_irrelevance(self):
        u = fresh(0)
        assert conv(u, VTt(), 1)
        assert conv(VTt(), u, 1)


class TestGlued:
    def setup_method(self):
        self.consts = {"two": eval_term(num(2), (), {})}

    def test_const_evaluates_to_glued_view(self):
        v = eval_term(Const("two"), (), self.consts)
        assert isinstance(v, VTop) and v.name == "two"

    def test_compact_quote_keeps_the_constant(self):
        v = eval_term(Suc(Const("two")), (), self.consts)
        assert quote(v, 0, unfold_tops=False) == Suc(Const("two"))
        assert quote(v, 0) == num(3)

    def test_conv_through_definitions(self):
        v = eval_term(Const("two"), (), self.consts)
        w = eval_term(num(2), (), {})
        assert conv(v, w, 0)
        assert conv(w, v, 0)

    def test_unfold_strips_views(self):
        v = eval_term(Const("two"), (), self.consts)
        assert not isinstance(unfold(v), VTop)


class TestGlueStuck:
    def test_ind_id_on_glue_is_stuck(self):
        # J applied to a glue path does not compute; it becomes a neutral
        # remembering the glue argument.
        path = eval_term(Glue(Tt()), (), {})
        motive = eval_term(Lam("y", Lam("p", Unit())), (), {})
        from artifact.semantics import do_ind_id

        v = do_ind_id(fresh(0), motive, VTt(), fresh(0), path)
        assert isinstance(v, VNeutral) and isinstance(v.head, HGlue)

    def test_ind_id_on_refl_computes(self):
        from artifact.semantics import do_ind_id

        rc = eval_term(num(7), (), {})
        path = eval_term(Refl(Zero()), (), {})
        motive = eval_term(Lam("y", Lam("p", Nat())), (), {})
        out = do_ind_id(eval_term(Zero(), (), {}), motive, rc, fresh(0), path)
        assert quote(out, 1) == num(7)


@settings(max_examples=120, deadline=None)
@given(closed_typed_terms())
def test_nf_is_idempotent(pair):
    t, _ = pair
    once = nf(t)
    assert nf(once) == once


@settings(max_examples=120, deadline=None)
@given(closed_typed_terms())
def test_conv_reflexive_on_programs(pair):
    t, _ = pair
    assert conv(eval_term(t, (), {}), eval_term(t, (), {}), 0)


@settings(max_examples=120, deadline=None)
@given(same_type_term_pairs())
def test_conv_symmetric_at_a_common_type(triple):
    s, t, _ = triple
    a = eval_term(s, (), {})
    b = eval_term(t, (), {})
    assert conv(a, b, 0) == conv(b, a, 0)


@settings(max_examples=120, deadline=None)
@given(closed_typed_terms())
def test_eval_quote_roundtrip_preserves_conv(pair):
    t, _ = pair
    v = eval_term(t, (), {})
    again = eval_term(quote(v, 0), (), {})
    assert conv(v, again, 0)


def test_quote_rejects_escaping_levels():
    from artifact.core import InternalCompilerError

    with pytest.raises(InternalCompilerError):
        quote(fresh(3), 2)
