import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from ualw.algebra import (FiniteAlgebra, HomSearch, congruence_generated, find_isomorphism, generate_in_product,
                          is_compatible, is_homomorphism, kernel, product, quotient, subalgebra_generated)
from ualw.errors import IndexOutOfRange, SignatureMismatch
from ualw.signature import Signature

import oracles

SIG = Signature.of(("f", 2), ("g", 1))


@st.composite
def algebras(draw, max_size=4, sig=SIG):
    n = draw(st.integers(1, max_size))
    tables = {o.name: tuple(draw(st.lists(st.integers(0, n - 1), min_size=n ** o.arity, max_size=n ** o.arity)))
              for o in sig.ops}
    return FiniteAlgebra(sig, n, tables)


def random_algebra(rng, n, sig=SIG):
    return FiniteAlgebra(sig, n, {o.name: tuple(rng.randrange(n) for _ in range(n ** o.arity)) for o in sig.ops})


def test_tables_validated():
    with pytest.raises(IndexOutOfRange):
        FiniteAlgebra(SIG, 2, {"f": (0, 1, 2, 0), "g": (0, 1)})
    with pytest.raises(SignatureMismatch):
        FiniteAlgebra(SIG, 2, {"f": (0, 1, 1, 0)})
    with pytest.raises(ValueError):
        FiniteAlgebra(SIG, 2, {"f": (0, 1, 1), "g": (0, 1)})


def test_nested_round_trip():
    A = FiniteAlgebra(SIG, 3, {"f": tuple((i * 2) % 3 for i in range(9)), "g": (2, 0, 1)})
    B = FiniteAlgebra.from_nested(SIG, 3, {"f": A.nested_table("f"), "g": A.nested_table("g")})
    assert B.tables == A.tables
    assert A.apply("f", (1, 2)) == A.tables["f"][5]


@settings(max_examples=60, deadline=None)
@given(algebras(), st.data())
def test_congruence_generated_is_least(A, data):
    pairs = data.draw(st.lists(st.tuples(st.integers(0, A.size - 1), st.integers(0, A.size - 1)), max_size=3))
    c = congruence_generated(A, pairs)
    assert all(c.related(a, b) for a, b in pairs)
    assert is_compatible(A, c.class_of)
    assert c.class_of == oracles.least_congruence(A, pairs)


def test_congruence_identity_and_total():
    A = random_algebra(random.Random(1), 4)
    assert congruence_generated(A, []).class_of == oracles.least_congruence(A, [])
    tot = congruence_generated(A, [(0, 1), (1, 2), (2, 3)])
    assert tot.num_classes == 1


@settings(max_examples=40, deadline=None)
@given(algebras(max_size=3), algebras(max_size=3))
def test_hom_search_matches_brute_force(A, B):
    got = sorted(tuple(f) for _, f in HomSearch(A, B).enumerate(list(range(A.size)), full=True) if -1 not in f)
    assert got == sorted(oracles.all_homs(A, B))


@settings(max_examples=40, deadline=None)
@given(algebras(max_size=3), algebras(max_size=3))
def test_kernels_of_homs_are_congruences(A, B):
    for f in oracles.all_homs(A, B):
        assert is_homomorphism(A, B, list(f))
        assert is_compatible(A, kernel(A, f).class_of)


@settings(max_examples=40, deadline=None)
@given(algebras(), st.data())
def test_quotient_map_is_a_hom(A, data):
    pairs = data.draw(st.lists(st.tuples(st.integers(0, A.size - 1), st.integers(0, A.size - 1)), max_size=2))
    c = congruence_generated(A, pairs)
    Q, proj = quotient(A, c)
    assert Q.size == c.num_classes
    assert is_homomorphism(A, Q, proj)
    assert kernel(A, proj) == c


@settings(max_examples=40, deadline=None)
@given(algebras(), st.randoms(use_true_random=False))
def test_isomorphism_found_for_permuted_copy(A, rnd):
    n = A.size
    pi = list(range(n))
    rnd.shuffle(pi)
    inv = [pi.index(i) for i in range(n)]
    tabs = {}
    for o in A.signature.ops:
        tabs[o.name] = tuple(pi[A.apply(o.name, [inv[x] for x in xs])]
                             for xs in itertools.product(range(n), repeat=o.arity))
    B = FiniteAlgebra(A.signature, n, tabs)
    f = find_isomorphism(A, B)
    assert f is not None and is_homomorphism(A, B, f) and len(set(f)) == n
    assert is_homomorphism(A, B, pi)
    g = find_isomorphism(A, B, {0: pi[0]})
    assert g is not None and g[0] == pi[0]


def test_no_isomorphism_between_sizes():
    rng = random.Random(2)
    assert find_isomorphism(random_algebra(rng, 2), random_algebra(rng, 3)) is None


@settings(max_examples=40, deadline=None)
@given(algebras(max_size=3), algebras(max_size=3), st.data())
def test_generated_subproduct_is_closed(A, B, data):
    seeds = data.draw(st.lists(st.tuples(st.integers(0, A.size - 1), st.integers(0, B.size - 1)),
                               min_size=1, max_size=2))
    sp = generate_in_product([A, B], seeds)
    elems = set(sp.tuples)
    P = product([A, B])
    for o in SIG.ops:
        for args in itertools.product(sorted(elems), repeat=o.arity):
            r = tuple(F.apply(o.name, [a[c] for a in args]) for c, F in enumerate((A, B)))
            assert r in elems
    assert len(elems) <= P.size
    # decomposition: the projections are homomorphisms
    for c, F in enumerate((A, B)):
        assert is_homomorphism(sp.algebra, F, [t[c] for t in sp.tuples])


def test_subalgebra_generated_embedding():
    A = random_algebra(random.Random(5), 5)
    sub = subalgebra_generated(A, [0])
    assert is_homomorphism(sub.algebra, A, sub.embedding)
    assert sub.embedding[sub.position(0)] == 0
