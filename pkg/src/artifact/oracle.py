"""Independent test oracle: substitution-based small-step normalizer.

Covers only the closed first-order Nat fragment (Nat constructors, IndNat,
App, Lam, Var). Deliberately shares no machinery with the NbE evaluator in
`semantics`; it exists so the two normalizers can be checked against each
other.
"""
from __future__ import annotations

from .core import App, IndNat, Lam, Nat, Suc, Term, Var, Zero


class OracleError(Exception):
    """Raised on fragment violations or when the step ceiling is exceeded."""


_FRAGMENT = (App, IndNat, Lam, Nat, Suc, Var, Zero)


def _check_fragment(t: Term) -> None:
    stack = [t]
    while stack:
        u = stack.pop()
        if not isinstance(u, _FRAGMENT):
            raise OracleError(f"term outside the oracle fragment: {type(u).__name__}")
        match u:
            case App(f, a, _):
                stack += [f, a]
            case Lam(_, body):
                stack.append(body)
            case Suc(n):
                stack.append(n)
            case IndNat(motive, z, s, n):
                stack += [motive, z, s, n]


def _shift(t: Term, cutoff: int, amount: int) -> Term:
    match t:
        case Var(k):
            return Var(k + amount) if k >= cutoff else t
        case Lam(x, body):
            return Lam(x, _shift(body, cutoff + 1, amount))
        case App(f, a, imp):
            return App(_shift(f, cutoff, amount), _shift(a, cutoff, amount), imp)
        case Suc(n):
            return Suc(_shift(n, cutoff, amount))
        case IndNat(motive, z, s, n):
            return IndNat(
                _shift(motive, cutoff, amount),
                _shift(z, cutoff, amount),
                _shift(s, cutoff, amount),
                _shift(n, cutoff, amount),
            )
        case _:
            return t


def _subst(t: Term, j: int, s: Term) -> Term:
    """Capture-avoiding substitution of s for Var j in t."""
    match t:
        case Var(k):
            return s if k == j else t
        case Lam(x, body):
            return Lam(x, _subst(body, j + 1, _shift(s, 0, 1)))
        case App(f, a, imp):
            return App(_subst(f, j, s), _subst(a, j, s), imp)
        case Suc(n):
            return Suc(_subst(n, j, s))
        case IndNat(motive, z, sc, n):
            return IndNat(_subst(motive, j, s), _subst(z, j, s), _subst(sc, j, s), _subst(n, j, s))
        case _:
            return t


def _subst_top(body: Term, arg: Term) -> Term:
    return _shift(_subst(body, 0, _shift(arg, 0, 1)), 0, -1)


def _step(t: Term) -> Term | None:
    """One leftmost-outermost reduction step, or None if t is normal."""
    match t:
        case App(Lam(_, body), a, _):
            return _subst_top(body, a)
        case IndNat(_, z, _, Zero()):
            return z
        case IndNat(motive, z, s, Suc(n)):
            return App(App(s, n), IndNat(motive, z, s, n))
        case App(f, a, imp):
            f2 = _step(f)
            if f2 is not None:
                return App(f2, a, imp)
            a2 = _step(a)
            if a2 is not None:
                return App(f, a2, imp)
            return None
        case IndNat(motive, z, s, n):
            n2 = _step(n)
            if n2 is not None:
                return IndNat(motive, z, s, n2)
            for i, sub in enumerate((motive, z, s)):
                sub2 = _step(sub)
                if sub2 is not None:
                    parts = [motive, z, s]
                    parts[i] = sub2
                    return IndNat(parts[0], parts[1], parts[2], n)
            return None
        case Suc(n):
            n2 = _step(n)
            return Suc(n2) if n2 is not None else None
        case Lam(x, body):
            body2 = _step(body)
            return Lam(x, body2) if body2 is not None else None
        case _:
            return None


def oracle_nf(t: Term, max_steps: int = 200_000) -> Term:
    """Normal form by small-step reduction to fixpoint (test oracle only)."""
    _check_fragment(t)
    for _ in range(max_steps):
        t2 = _step(t)
        if t2 is None:
            return t
        t = t2
    raise OracleError(f"step ceiling {max_steps} exceeded")


def num(n: int) -> Term:
    """Numeral n as a Suc-chain."""
    t: Term = Zero()
    for _ in range(n):
        t = Suc(t)
    return t
