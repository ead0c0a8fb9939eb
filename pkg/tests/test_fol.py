import pytest
from hypothesis import given, settings, strategies as st

from ualw import scenarios
from ualw.errors import BudgetExceeded, InvariantViolation, NoSpareVariables
from ualw.fol import (FOModel, Refuted, SimilarityType, Space, VerifiedUpTo, concept_algebra,
                      converse_law_violations, fol_atoms, fol_meaning, fol_signature, generate_Dt, is_regular,
                      kernel_witness_model, r_star, restricted_rewrite, taut_equivalent_bounded)
from ualw.logic import lindenbaum, meaning
from ualw.terms import App, Atom, format_formula, parse_formula, random_formula

import oracles

T_UB = SimilarityType((("u", 1), ("b", 2)))


def fo_model(m, relations):
    return FOModel(m, relations)


@st.composite
def models(draw, t=T_UB, max_size=3):
    m = draw(st.integers(1, max_size))
    rels = {}
    for r, n in t.relations:
        rels[r] = draw(st.sets(st.tuples(*[st.integers(0, m - 1) for _ in range(n)]), max_size=m ** n))
    return FOModel(m, rels)


def fol_formulas(t=T_UB, k=2, depth=4):
    sig = fol_signature(k)
    atoms = fol_atoms(t, k)
    return st.randoms(use_true_random=False).map(lambda r: random_formula(r, sig, atoms, depth))


@settings(max_examples=150, deadline=None)
@given(models(), fol_formulas())
def test_bitset_semantics_matches_tarski(M, phi):
    bits = fol_meaning(M, phi, 2)
    sp = Space(M.size, 2)
    got = {sp.decode(e) for e in range(M.size ** 2) if bits >> e & 1}
    assert got == oracles.meaning_set(M, phi, 2)


@settings(max_examples=60, deadline=None)
@given(models(max_size=2), fol_formulas(k=3, depth=3))
def test_bitset_semantics_three_variables(M, phi):
    bits = fol_meaning(M, phi, 3)
    sp = Space(M.size, 3)
    assert {sp.decode(e) for e in range(M.size ** 3) if bits >> e & 1} == oracles.meaning_set(M, phi, 3)


def test_space_budget():
    with pytest.raises(BudgetExceeded):
        Space(50, 4, budget=1000)


def test_model_validation():
    with pytest.raises(InvariantViolation):
        FOModel(2, {"b": [(0, 2)]})
    with pytest.raises(InvariantViolation):
        FOModel(2, {"b": [(0, 1), (1,)]})
    with pytest.raises(ValueError):
        fol_signature(11)


# ------------------------------------------------------------ bounded oracle

@st.composite
def additive_formulas(draw, atoms, k, depth=3):
    if depth == 0 or draw(st.booleans()):
        return Atom(draw(st.sampled_from(atoms)))
    kind = draw(st.sampled_from(["E", "and"]))
    inner = draw(additive_formulas(atoms, k, depth - 1))
    if kind == "E":
        return App(f"E{draw(st.integers(0, k - 1))}", (inner,))
    i, j = draw(st.integers(0, k - 1)), draw(st.integers(0, k - 1))
    side = App(f"eq{i}{j}") if draw(st.booleans()) else App("not", (App(f"eq{i}{j}"),))
    return App("and", (side, inner) if draw(st.booleans()) else (inner, side))


def _as_result(r):
    if isinstance(r, VerifiedUpTo):
        return None
    return (r.model.size, {k: sorted(v) for k, v in r.model.relations.items()}, tuple(r.assignment))


T_U = SimilarityType((("u", 1),))
T_B = SimilarityType((("b", 2),))


@pytest.mark.parametrize("t", [T_U, T_B], ids=["unary", "binary"])
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_additive_fast_path_agrees_with_exhaustive(t, data):
    k = 2
    atoms = fol_atoms(t, k)
    phi = data.draw(additive_formulas(atoms, k))
    psi = data.draw(additive_formulas(atoms, k))
    rels = [(r, n) for r, n in t.relations if any(a.startswith(r + "[") for a in
                                                 {x.name for x in _atoms(phi) | _atoms(psi)})]
    want = oracles.least_refuter(rels, k, phi, psi, 2, fo_model)
    got = _as_result(taut_equivalent_bounded(t, k, phi, psi, max_size=2))
    if want is None:
        assert got is None
    else:
        m, relations, a = want
        assert got is not None
        assert got[0] == m and got[2] == a
        assert {r: got[1][r] for r in relations} == {r: sorted(v) for r, v in relations.items()}


def _atoms(phi):
    if isinstance(phi, Atom):
        return {phi}
    return set().union(set(), *(_atoms(a) for a in phi.args))


@settings(max_examples=40, deadline=None)
@given(fol_formulas(T_U, 2, 3), fol_formulas(T_U, 2, 3))
def test_exhaustive_bounded_search_matches_oracle(phi, psi):
    rels = [("u", 1)] if _atoms(phi) | _atoms(psi) else []
    want = oracles.least_refuter(rels, 2, phi, psi, 2, fo_model)
    got = _as_result(taut_equivalent_bounded(T_U, 2, phi, psi, max_size=2))
    assert (want is None) == (got is None)
    if want is not None:
        assert got[0] == want[0] and got[2] == want[2]


def test_substitution_counterexample_is_least():
    t = SimilarityType((("r", 1),))
    sig = fol_signature(2)
    valid = [parse_formula(s, sig, fol_atoms(t, 2)) for s in ("r[0]", "E1(and(eq01,r[1]))")]
    assert isinstance(taut_equivalent_bounded(t, 2, *valid, max_size=3), VerifiedUpTo)
    bad = [parse_formula(s, sig, fol_atoms(t, 2)) for s in ("r[1]", "E1(and(eq01,r[1]))")]
    r = taut_equivalent_bounded(t, 2, *bad, max_size=3)
    assert isinstance(r, Refuted)
    assert r.model.size == 2 and r.model.relations["r"] == frozenset({(0,)}) and tuple(r.assignment) == (1, 0)


def test_bounded_budget():
    t = SimilarityType((("b", 2),))
    phi = App("not", (Atom("b[0,1]"),))
    with pytest.raises(BudgetExceeded):
        taut_equivalent_bounded(t, 2, phi, App("not", (App("not", (phi,)),)), max_size=3, budget=100)


# ------------------------------------------------------------ rewriting

def test_rewrite_r100_chain():
    out = restricted_rewrite(Atom("r[1,0,0]"), 3)
    assert format_formula(out) == "E2(and(eq20,E0(and(eq01,E1(and(eq12,r[0,1,2]))))))"
    assert restricted_rewrite(Atom("r[0,1,2]"), 3) == Atom("r[0,1,2]")
    with pytest.raises(NoSpareVariables):
        restricted_rewrite(Atom("b[1,0]"), 2)


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[st.integers(0, 2)] * 3), models(SimilarityType((("r", 3),)), max_size=2))
def test_rewrites_preserve_meaning(sigma, M):
    phi = Atom(f"r[{','.join(map(str, sigma))}]")
    if sorted(sigma) == [0, 1, 2] and sigma != (0, 1, 2):
        # a proper permutation leaves no variable free to route through
        with pytest.raises(NoSpareVariables):
            restricted_rewrite(phi, 3)
        return
    out = restricted_rewrite(phi, 3)
    assert oracles.meaning_set(M, out, 3) == oracles.meaning_set(M, phi, 3)
    restricted = {a.name for a in _atoms(out)}
    assert restricted == {"r[0,1,2]"}


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["u[1]", "u[2]", "b[1,0]", "b[0,2]"]), models(max_size=2))
def test_r_star_preserves_meaning(name, M):
    k = 3 if name.startswith("u") else 5
    phi = Atom(name)
    out = r_star(phi, k)
    assert oracles.meaning_set(M, out, k) == oracles.meaning_set(M, phi, k)


def test_generate_Dt_counts():
    d = generate_Dt(SimilarityType((("u", 1),)), 3)
    assert sum(p.tag == "S" for p in d.pairs) == 2 and sum(p.tag == "E" for p in d.pairs) == 2
    assert not d.skipped
    d2 = generate_Dt(SimilarityType((("b", 2),)), 2)
    assert not d2.pairs and len(d2.skipped) == 3
    d3 = generate_Dt(SimilarityType((("b", 2),)), 3)
    assert len(d3.skipped) == 0 or all("fresh" in why for _, why in d3.skipped)


# ------------------------------------------------------------ concept algebras

FOL_SCENARIOS = ["mod5-not-condsub", "mod7-no-family", "fol-reducts", "fol-substitution-counterexample",
                 "restricted-rewrite-3var"]


def _fol_logics():
    for s in FOL_SCENARIOS:
        wb = scenarios.load(s)
        for name in wb.fol:
            yield s, name, wb.logic(name), wb.fol[name]


@pytest.mark.parametrize("s,name,L,info", list(_fol_logics()), ids=lambda x: x if isinstance(x, str) else "")
def test_concept_algebras_regular_and_Dt_sound(s, name, L, info):
    for m in L.models:
        assert all(is_regular(m, m.algebra.labels[e]) for e in range(m.algebra.size))
        assert converse_law_violations(m) == []
    for p in generate_Dt(info.type, info.k).pairs:
        for m in L.models:
            assert meaning(m, p.lhs) == meaning(m, p.rhs), (p.lhs, p.rhs, m.label)


def test_concept_algebra_budget():
    M = FOModel(3, {"r": [(0, 1, 1), (2, 0, 0)]})
    with pytest.raises(BudgetExceeded):
        concept_algebra(M, SimilarityType((("r", 3),)), 3, max_elements=64)


def test_mod5_facts():
    wb = scenarios.load("mod5-not-condsub")
    L = wb.logic("FOL2_RS")
    assert lindenbaum(L).algebra.size == L.models[0].algebra.size


def test_kernel_witness_models_mod7():
    wb = scenarios.load("mod7-no-family")
    A, _ = wb.algebra_ref({"logic": "FOL2_t", "model": "M7"})
    spec = next(c for c in wb.checks if c.id == "witness-model-1")
    from ualw.workbench import _assign
    h = _assign(A, spec.args["assignment"], wb.logic("FOL2_t").model("M7"))
    res = kernel_witness_model(SimilarityType((("R1", 2),)), 2, h, A, max_size=3)
    assert res is not None
    N, graph = res
    assert N.size == 3 and len(N.relations["R1"]) == 3
    # N is a directed 3-cycle
    succ = dict(N.relations["R1"])
    assert sorted(succ) == [0, 1, 2] and len({succ[succ[succ[0]]], 0}) == 1
    assert kernel_witness_model(SimilarityType((("R1", 2),)), 2, h, A, max_size=2) is None
