import itertools

import pytest
from hypothesis import given, settings, strategies as st

from ualw import scenarios
from ualw.algebra import FiniteAlgebra, evaluate, kernel
from ualw.errors import BudgetExceeded, InvariantViolation
from ualw.logic import (ModelPresentation, PresentedLogic, all_assignment_models, check_reduct,
                        entails_counterexample, hom_assignments, is_cond_substitutional, is_substitutional,
                        kernel_contains_taut, lindenbaum, meaning, restrict_logic, restriction_map,
                        si_counterexample, si_equivalent, taut_counterexample, taut_equivalent)
from ualw.signature import Signature
from ualw.terms import App, Atom, random_formula

import oracles

CPL = Signature.of(("and", 2), ("not", 1), ("bot", 0))
TWO = FiniteAlgebra(CPL, 2, {"and": (0, 0, 0, 1), "not": (1, 0), "bot": (0,)}, labels=("0", "1"), name="2")


def cpl(atoms):
    return PresentedLogic(atoms, CPL, all_assignment_models(atoms, TWO, [1], prefix="2"), f"CPL{len(atoms)}")


def dialectic():
    return scenarios.load("dialectic").logic("ND")


def semilattice():
    return scenarios.load("semilattice-no-patchwork").logic("U")


LOGICS = {"cpl0": lambda: cpl([]), "cpl1": lambda: cpl(["p"]), "cpl2": lambda: cpl(["p", "q"]),
          "dialectic": dialectic, "semilattice": semilattice}


@pytest.mark.parametrize("name", sorted(LOGICS))
def test_lindenbaum_matches_naive_closure(name):
    L = LOGICS[name]()
    li = lindenbaum(L)
    closure = oracles.meaning_tuples_closure(L)
    assert li.algebra.size == len(closure)
    # each element is the meaning tuple of its representative formula
    for i in range(li.algebra.size):
        phi = li.term(i, L.atoms)
        assert li.value(phi) == i
        assert tuple(li.construction.tuples[i]) == tuple(meaning(m, phi) for m in L.models)


def test_lindenbaum_sizes_cpl():
    assert [lindenbaum(cpl(a)).algebra.size for a in ([], ["p"], ["p", "q"], ["p", "q", "r"])] == [2, 4, 16, 256]


def test_lindenbaum_budget():
    with pytest.raises(BudgetExceeded):
        lindenbaum(cpl(["p", "q", "r"]), max_elements=100)


def pairs_of(L, depth=3):
    return st.randoms(use_true_random=False).map(
        lambda r: (random_formula(r, L.signature, L.atoms, depth), random_formula(r, L.signature, L.atoms, depth)))


_D = dialectic()
_C2 = cpl(["p", "q"])
_S = semilattice()


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([_D, _C2, _S]).flatmap(lambda L: st.tuples(st.just(L), pairs_of(L))))
def test_taut_equivalence_agrees_with_oracles(case):
    L, (phi, psi) = case
    t = taut_equivalent(L, phi, psi)
    assert t == oracles.taut_equal(L, phi, psi)
    li = lindenbaum(L)
    assert t == (li.value(phi) == li.value(psi))
    s = si_equivalent(L, phi, psi)
    assert s == oracles.si_equal(L, phi, psi)
    assert not s or t  # si is contained in the tautological congruence


@settings(max_examples=100, deadline=None)
@given(pairs_of(_C2))
def test_si_equals_taut_under_substitutionality(pair):
    assert is_substitutional(_C2).holds
    assert si_equivalent(_C2, *pair) == taut_equivalent(_C2, *pair)


def test_si_strictly_smaller_in_dialectic():
    # D is pinned to the fixed point of negation in every model, but not in the algebra
    D = Atom("D")
    phi, psi = D, App("not", (D,))
    assert taut_equivalent(_D, phi, psi)
    A, env = si_counterexample(_D, phi, psi)
    assert evaluate(A, phi, env) != evaluate(A, psi, env)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([_D, _C2]).flatmap(
    lambda L: st.tuples(st.just(L), st.lists(pairs_of(L, 2), max_size=2), pairs_of(L, 2))))
def test_entails_sound_and_witnessed(case):
    L, H, goal = case
    ce = entails_counterexample(L, H, goal)
    if ce is None:
        for m in L.models:
            if all(meaning(m, s) == meaning(m, t) for s, t in H):
                assert meaning(m, goal[0]) == meaning(m, goal[1])
    else:
        A, env = ce
        assert all(evaluate(A, s, env) == evaluate(A, t, env) for s, t in H)
        assert evaluate(A, goal[0], env) != evaluate(A, goal[1], env)


def test_taut_counterexample_names_a_model():
    p, q = Atom("p"), Atom("q")
    m = taut_counterexample(_C2, p, q)
    assert meaning(m, p) != meaning(m, q)
    assert taut_counterexample(_C2, p, p) is None


def test_substitutionality_verdicts():
    assert is_substitutional(_C2).holds
    v = is_substitutional(_D)
    assert not v.holds and v.witness["assignment"]["D"] == "T"
    assert is_cond_substitutional(_D).holds
    assert is_cond_substitutional(_C2).holds


@pytest.mark.parametrize("L", [_D, _C2, _S], ids=["dialectic", "cpl2", "semilattice"])
def test_meaning_functions_respect_taut(L):
    for m in L.models:
        assert kernel_contains_taut(L, m.assignment, m.algebra)


def test_hom_assignments_are_exactly_kernel_respecting():
    L = _D
    for A in L.targets():
        homs = set(hom_assignments(L, A))
        for vals in itertools.product(range(A.size), repeat=len(L.atoms)):
            assert (vals in homs) == kernel_contains_taut(L, dict(zip(L.atoms, vals)), A)


def test_reducts_of_restrictions():
    L1, mm = restrict_logic(_C2, ["p"], "P")
    assert lindenbaum(L1).algebra.size == 4
    assert check_reduct(L1, _C2, mm).holds
    assert check_reduct(L1, _C2, restriction_map(L1, _C2)).holds
    bad = {k: L1.models[0].label for k in mm}
    v = check_reduct(L1, _C2, bad)
    assert not v.holds


def test_presented_logic_invariants():
    with pytest.raises(InvariantViolation):
        PresentedLogic(["p"], CPL, [], "empty")
    with pytest.raises(InvariantViolation):
        PresentedLogic(["not"], CPL, all_assignment_models(["not"], TWO, [1]))
    with pytest.raises(InvariantViolation):
        ModelPresentation("m", TWO, {"p": 2}, [1])


def test_taut_congruence_is_intersection_of_meaning_kernels():
    li = lindenbaum(_D)
    tuples = li.construction.tuples
    kernels = [kernel(li.algebra, [t[c] for t in tuples]) for c in range(len(_D.models))]
    for x, y in itertools.combinations(range(li.algebra.size), 2):
        assert not all(k.related(x, y) for k in kernels)
