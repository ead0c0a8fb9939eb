import random

import pytest
from hypothesis import given, settings, strategies as st

from ualw.errors import ArityMismatch, FormulaSyntaxError, UnknownAtom, UnknownSymbol
from ualw.signature import Signature
from ualw.terms import (App, Atom, apply_substitution, atoms_of, check_formula, compose, depth,
                        enumerate_formulas, format_formula, parse_formula, probe_corpus, random_formula, size)

CPL = Signature.of(("and", 2), ("not", 1), ("bot", 0))
ATOMS = ["p", "q", "r"]


def formulas(sig=CPL, atoms=ATOMS, max_depth=4):
    return st.randoms(use_true_random=False).map(lambda r: random_formula(r, sig, atoms, max_depth))


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_parse_format_round_trip(phi):
    assert parse_formula(format_formula(phi), CPL, ATOMS) == phi


def test_parse_infix_and_abbreviations():
    p, q = Atom("p"), Atom("q")
    assert parse_formula("p & q", CPL, ATOMS) == App("and", (p, q))
    neg = lambda a: App("not", (a,))
    assert parse_formula("p -> q", CPL, ATOMS) == neg(App("and", (p, neg(q))))
    assert parse_formula("or(p, q)", CPL, ATOMS) == neg(App("and", (neg(p), neg(q))))
    assert parse_formula("p | q", CPL, ATOMS) == parse_formula("or(p,q)", CPL, ATOMS)
    assert parse_formula("top", CPL, ATOMS) == neg(App("bot"))
    # '&' binds tighter than '|'
    assert parse_formula("p | q & r", CPL, ATOMS) == parse_formula("or(p, and(q, r))", CPL, ATOMS)


def test_parse_errors():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("and(p,", CPL, ATOMS)
    with pytest.raises(UnknownSymbol):
        parse_formula("s", CPL, ATOMS)
    with pytest.raises((ArityMismatch, FormulaSyntaxError)):
        parse_formula("not(p, q)", CPL, ATOMS)


def test_check_formula():
    with pytest.raises(UnknownSymbol):
        check_formula(App("xor", (Atom("p"), Atom("q"))), CPL)
    with pytest.raises(ArityMismatch):
        check_formula(App("not", (Atom("p"), Atom("q"))), CPL)
    with pytest.raises(UnknownAtom):
        check_formula(Atom("s"), CPL, {"p"})


def subs():
    return st.fixed_dictionaries({a: formulas(max_depth=2) for a in ATOMS})


@settings(max_examples=100, deadline=None)
@given(formulas(), subs(), subs())
def test_substitution_composition(phi, s, t):
    assert apply_substitution(compose(s, t), phi) == apply_substitution(s, apply_substitution(t, phi))


@settings(max_examples=100, deadline=None)
@given(formulas(), subs())
def test_substitution_atoms(phi, s):
    out = apply_substitution(s, phi)
    assert atoms_of(out) == set().union(set(), *(atoms_of(s[a]) for a in atoms_of(phi)))
    assert size(out) >= size(phi)
    ident = {a: Atom(a) for a in ATOMS}
    assert apply_substitution(ident, phi) == phi


def test_enumeration_counts():
    # depth 0: p, bot; depth 1 adds not(p), not(bot) and the 4 conjunctions
    got = list(enumerate_formulas(CPL, ["p"], 1))
    assert len(got) == 2 + 2 + 4
    assert len(set(got)) == len(got)
    assert all(depth(f) <= 1 for f in got)


def test_probe_corpus_deterministic():
    a = probe_corpus(CPL, ATOMS, exhaustive_limit=50, n_random=30)
    b = probe_corpus(CPL, ATOMS, exhaustive_limit=50, n_random=30)
    assert a == b and len(a) == 80
    c = probe_corpus(CPL, ATOMS, exhaustive_limit=50, n_random=30, seed=1)
    assert c[:50] == a[:50] and c != a


def test_random_formula_needs_leaves():
    with pytest.raises(ValueError):
        random_formula(random.Random(0), Signature.of(("not", 1)), [], 2)
