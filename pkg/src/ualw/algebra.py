"""Finite universal algebra kernel.

Universes are 0..n-1.  A k-ary table is a flat tuple of length n**k indexed
mixed-radix with the *first* argument most significant.  Every algebra also
carries ``labels`` (one hashable per element); labels give elements an
identity that survives passing between algebras (e.g. a FOL concept and its
bitset) and are what presentations and reports show.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import itertools
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (ArityMismatch, BudgetExceeded, IndexOutOfRange, SignatureMismatch,
                     UnknownAtom, UnknownOp)
from .signature import OpSymbol, Signature
from .terms import App, Atom, Formula, atoms_of


@dataclass(eq=False)
class FiniteAlgebra:
    signature: Signature
    size: int
    tables: dict
    labels: tuple = None
    name: str = ""
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        n = self.size
        if n < 1:
            raise ValueError("algebras are nonempty")
        if set(self.tables) != set(self.signature.names):
            raise SignatureMismatch(f"tables {sorted(self.tables)} vs signature {self.signature.names}")
        tabs = {}
        for o in self.signature.ops:
            t = tuple(self.tables[o.name])
            if len(t) != n ** o.arity:
                raise ValueError(f"table {o.name} has {len(t)} entries, expected {n ** o.arity}")
            if any(not (0 <= v < n) for v in t):
                raise IndexOutOfRange(f"table {o.name} has an entry outside 0..{n - 1}")
            tabs[o.name] = t
        self.tables = tabs
        if self.labels is None:
            self.labels = tuple(range(n))
        self.labels = tuple(self.labels)
        if len(self.labels) != n:
            raise ValueError("one label per element required")
        self._index = {l: i for i, l in enumerate(self.labels)}
        if len(self._index) != n:
            raise ValueError("element labels must be distinct")

    @classmethod
    def from_nested(cls, signature: Signature, size: int, nested: Mapping, labels=None, name=""):
        """Build from nested-list tables (constants are bare values)."""
        flat = {o.name: _flatten(nested[o.name], o.arity) for o in signature.ops}
        return cls(signature, size, flat, labels, name)

    def __repr__(self):
        return f"FiniteAlgebra({self.name or '?'}, size={self.size}, ops={self.signature.names})"

    def apply(self, op: str, args: Sequence[int]) -> int:
        t = self.tables.get(op)
        if t is None:
            raise UnknownOp(op)
        return t[flat_index(args, self.size)]

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise IndexOutOfRange(f"no element labelled {label!r} in {self.name or 'algebra'}") from None

    def has_label(self, label) -> bool:
        return label in self._index

    def label(self, i: int):
        return self.labels[i]

    def nested_table(self, op: str):
        k = self.signature.arity(op)
        t = list(self.tables[op])
        return t[0] if k == 0 else _nest(t, self.size, k)


def _flatten(t, k):
    if k == 0:
        return [t]
    if k == 1:
        return list(t)
    return [x for row in t for x in _flatten(row, k - 1)]


def _nest(t, n, k):
    if k == 1:
        return t
    step = n ** (k - 1)
    return [_nest(t[i:i + step], n, k - 1) for i in range(0, len(t), step)]


def flat_index(args: Sequence[int], n: int) -> int:
    i = 0
    for a in args:
        i = i * n + a
    return i


def _op_list(algebra):
    return [(o.name, o.arity, algebra.tables[o.name]) for o in algebra.signature.ops]


# ----------------------------------------------------------------- Congruence

class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            ra, rb = rb, ra
        self.parent[ra] = rb  # the smaller index stays representative
        return True


@dataclass(eq=False)
class Congruence:
    algebra: FiniteAlgebra
    class_of: tuple  # element -> least element of its class

    def related(self, a, b) -> bool:
        return self.class_of[a] == self.class_of[b]

    def classes(self) -> list[list[int]]:
        out = {}
        for x, r in enumerate(self.class_of):
            out.setdefault(r, []).append(x)
        return [out[r] for r in sorted(out)]

    @property
    def num_classes(self):
        return len(set(self.class_of))

    def is_identity(self):
        return self.num_classes == self.algebra.size

    def pairs(self):
        """Non-trivial generating pairs (each element with its representative)."""
        return [(x, r) for x, r in enumerate(self.class_of) if x != r]

    def contains(self, other: "Congruence") -> bool:
        return all(self.class_of[x] == self.class_of[r] for x, r in enumerate(other.class_of))

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.class_of == other.class_of

    def __hash__(self):
        return hash(self.class_of)


def partition_from_keys(n, key) -> tuple:
    first = {}
    out = []
    for x in range(n):
        k = key(x)
        out.append(first.setdefault(k, x))
    return tuple(out)


def kernel(algebra: FiniteAlgebra, images: Sequence) -> Congruence:
    """Kernel of a map given by its image list (any hashables)."""
    return Congruence(algebra, partition_from_keys(algebra.size, lambda x: images[x]))


def is_compatible(algebra: FiniteAlgebra, class_of: Sequence[int]) -> bool:
    n = algebra.size
    for name, k, tab in _op_list(algebra):
        if k == 0:
            continue
        seen = {}
        for args in itertools.product(range(n), repeat=k):
            key = tuple(class_of[a] for a in args)
            r = class_of[tab[flat_index(args, n)]]
            if seen.setdefault(key, r) != r:
                return False
    return True


def congruence_generated(algebra: FiniteAlgebra, pairs: Iterable[tuple[int, int]]) -> Congruence:
    n = algebra.size
    uf = UnionFind(n)
    for a, b in pairs:
        if not (0 <= a < n and 0 <= b < n):
            raise IndexOutOfRange(f"pair ({a},{b}) outside 0..{n - 1}")
        uf.union(a, b)
    ops = [(k, tab) for _, k, tab in _op_list(algebra) if k > 0]
    changed = True
    while changed:
        changed = False
        for k, tab in ops:
            rep = {}
            for args in itertools.product(range(n), repeat=k):
                key = tuple(uf.find(a) for a in args)
                r = tab[flat_index(args, n)]
                if key in rep:
                    if uf.union(rep[key], r):
                        changed = True
                else:
                    rep[key] = r
    return Congruence(algebra, tuple(uf.find(x) for x in range(n)))


# ------------------------------------------------------------- evaluation

def evaluate(algebra: FiniteAlgebra, term: Formula, env: Mapping[str, int]) -> int:
    n = algebra.size
    tables = algebra.tables
    sig = algebra.signature
    memo = {}

    def ev(t):
        if isinstance(t, Atom):
            try:
                return env[t.name]
            except KeyError:
                raise UnknownAtom(t.name) from None
        r = memo.get(t)
        if r is not None:
            return r
        tab = tables.get(t.op)
        if tab is None:
            raise UnknownOp(t.op)
        if sig.arity(t.op) != len(t.args):
            raise ArityMismatch(f"{t.op} expects {sig.arity(t.op)} arguments")
        i = 0
        for a in t.args:
            i = i * n + ev(a)
        r = tab[i]
        memo[t] = r
        return r

    return ev(term)


# ------------------------------------------------------------- closures

@dataclass
class Closure:
    """Result of generating a subuniverse: elements in discovery order.

    ``derivation[i]`` is ('seed', j), ('op', name, arg positions) telling how
    element i was first reached; ``table`` holds every operation result over
    the closure, in positions.
    """
    elements: list
    derivation: list
    table: dict


def close(seeds: Sequence, ops: Sequence[tuple[str, int]], apply, max_elements: int | None = None) -> Closure:
    """Generic semi-naive closure.  ``apply(name, elems)`` computes an op."""
    elems, deriv, index = [], [], {}
    table = {name: {} for name, _ in ops}

    def add(e, d):
        i = index.get(e)
        if i is None:
            i = index[e] = len(elems)
            elems.append(e)
            deriv.append(d)
            if max_elements is not None and len(elems) > max_elements:
                raise BudgetExceeded(f"closure exceeds {max_elements} elements")
        return i

    for name, k in ops:
        if k == 0:
            table[name][()] = add(apply(name, ()), ("op", name, ()))
    for j, s in enumerate(seeds):
        add(s, ("seed", j))
    lo = 0
    inner = [(name, k) for name, k in ops if k > 0]
    while lo < len(elems):
        hi = len(elems)
        for name, k in inner:
            tab = table[name]
            for args in _new_tuples(lo, hi, k):
                r = add(apply(name, tuple(elems[a] for a in args)), ("op", name, args))
                tab[args] = r
        lo = hi
    return Closure(elems, deriv, table)


def _new_tuples(lo, hi, k):
    """k-tuples over range(hi) with at least one entry >= lo."""
    if k == 1:
        for a in range(lo, hi):
            yield (a,)
        return
    for p in range(k):
        ranges = [range(lo)] * p + [range(lo, hi)] + [range(hi)] * (k - p - 1)
        yield from itertools.product(*ranges)


def _closure_algebra(signature, cl: Closure, labels, name):
    n = len(cl.elements)
    tables = {}
    for o in signature.ops:
        tab = cl.table[o.name]
        tables[o.name] = [tab[args] for args in itertools.product(range(n), repeat=o.arity)]
    return FiniteAlgebra(signature, n, tables, labels, name)


@dataclass(eq=False)
class Subalgebra:
    algebra: FiniteAlgebra
    embedding: list  # new index -> old index
    derivation: list

    def position(self, old: int) -> int:
        return self.embedding.index(old)

    def positions(self) -> dict[int, int]:
        return {o: i for i, o in enumerate(self.embedding)}


def subalgebra_generated(algebra: FiniteAlgebra, seeds: Iterable[int], name: str = "",
                         max_elements: int | None = None) -> Subalgebra:
    seeds = list(seeds)
    for s in seeds:
        if not (0 <= s < algebra.size):
            raise IndexOutOfRange(f"seed {s} outside 0..{algebra.size - 1}")
    ops = [(o.name, o.arity) for o in algebra.signature.ops]
    cl = close(seeds, ops, algebra.apply, max_elements)
    labels = [algebra.labels[e] for e in cl.elements]
    sub = _closure_algebra(algebra.signature, cl, labels, name or (algebra.name + "'"))
    return Subalgebra(sub, list(cl.elements), cl.derivation)


@dataclass(eq=False)
class SubProduct:
    """Subalgebra of a (never materialised) product, generated by seed tuples."""
    algebra: FiniteAlgebra
    tuples: list  # position -> element tuple (factor indices)
    derivation: list
    factors: list


def generate_in_product(factors: Sequence[FiniteAlgebra], seeds: Sequence[tuple], name: str = "",
                        max_elements: int | None = None) -> SubProduct:
    if not factors:
        raise ValueError("empty product")
    sig = factors[0].signature
    for f in factors[1:]:
        sig.require_same(f.signature, "in product")
    tabs = [f.tables for f in factors]
    sizes = [f.size for f in factors]

    def apply(op, args):
        if not args:
            return tuple(t[op][0] for t in tabs)
        out = []
        for c in range(len(tabs)):
            n = sizes[c]
            i = 0
            for a in args:
                i = i * n + a[c]
            out.append(tabs[c][op][i])
        return tuple(out)

    ops = [(o.name, o.arity) for o in sig.ops]
    cl = close([tuple(s) for s in seeds], ops, apply, max_elements)
    labels = [tuple(factors[c].labels[x] for c, x in enumerate(e)) for e in cl.elements]
    alg = _closure_algebra(sig, cl, labels, name)
    return SubProduct(alg, list(cl.elements), cl.derivation, list(factors))


def product(algebras: Sequence[FiniteAlgebra], name: str = "") -> FiniteAlgebra:
    if not algebras:
        raise ValueError("empty product")
    sig = algebras[0].signature
    for a in algebras[1:]:
        sig.require_same(a.signature, "in product")
    elems = list(itertools.product(*[range(a.size) for a in algebras]))
    index = {e: i for i, e in enumerate(elems)}
    n = len(elems)
    tables = {}
    for o in sig.ops:
        tab = []
        for args in itertools.product(range(n), repeat=o.arity):
            tab.append(index[tuple(a.apply(o.name, [elems[x][c] for x in args]) for c, a in enumerate(algebras))])
        tables[o.name] = tab
    labels = [tuple(a.labels[x] for a, x in zip(algebras, e)) for e in elems]
    return FiniteAlgebra(sig, n, tables, labels, name or "x".join(a.name for a in algebras))


def quotient(algebra: FiniteAlgebra, cong: Congruence, labels=None, name="") -> tuple[FiniteAlgebra, list[int]]:
    if cong.algebra is not algebra:
        raise SignatureMismatch("congruence belongs to another algebra")
    reps = sorted(set(cong.class_of))
    pos = {r: i for i, r in enumerate(reps)}
    proj = [pos[cong.class_of[x]] for x in range(algebra.size)]
    m = len(reps)
    tables = {}
    for o in algebra.signature.ops:
        tables[o.name] = [proj[algebra.apply(o.name, [reps[a] for a in args])]
                          for args in itertools.product(range(m), repeat=o.arity)]
    if labels is None:
        cls = cong.classes()
        labels = ["{" + ",".join(str(algebra.labels[x]) for x in c) + "}" for c in cls]
    return FiniteAlgebra(algebra.signature, m, tables, labels, name or algebra.name + "/~"), proj


def is_homomorphism(source: FiniteAlgebra, target: FiniteAlgebra, f: Sequence[int]) -> bool:
    n, m = source.size, target.size
    for o in source.signature.ops:
        ts, tt = source.tables[o.name], target.tables[o.name]
        for args in itertools.product(range(n), repeat=o.arity):
            if f[ts[flat_index(args, n)]] != tt[flat_index([f[a] for a in args], m)]:
                return False
    return True


# ------------------------------------------------------------ hom search

class _State:
    __slots__ = ("f", "known", "inv")

    def __init__(self, f, known, inv):
        self.f, self.known, self.inv = f, known, inv

    def copy(self):
        return _State(self.f[:], self.known[:], None if self.inv is None else self.inv[:])


class HomSearch:
    """Backtracking search for homomorphisms source -> target fixed on generators.

    Images of already-reached source elements are propagated by closing
    under all operations as soon as a generator is assigned; a clash prunes
    the branch.
    """

    def __init__(self, source: FiniteAlgebra, target: FiniteAlgebra, injective=False):
        source.signature.require_same(target.signature, "for homomorphism search")
        self.S, self.T = source, target
        self.injective = injective
        self.ns, self.nt = source.size, target.size
        self.ops = [(o.arity, source.tables[o.name], target.tables[o.name])
                    for o in source.signature.ops if o.arity > 0]
        self.consts = [(source.tables[o.name][0], target.tables[o.name][0])
                       for o in source.signature.ops if o.arity == 0]

    def initial(self):
        st = _State([-1] * self.ns, [], [-1] * self.nt if self.injective else None)
        for s, t in self.consts:
            if not self._set(st, s, t):
                return None
        if not self._propagate(st, 0):
            return None
        return st

    def _set(self, st, s, t) -> bool:
        cur = st.f[s]
        if cur != -1:
            return cur == t
        if st.inv is not None:
            if st.inv[t] != -1:
                return False
            st.inv[t] = s
        st.f[s] = t
        st.known.append(s)
        return True

    def _propagate(self, st, lo) -> bool:
        f, known = st.f, st.known
        ns, nt = self.ns, self.nt
        while lo < len(known):
            hi = len(known)
            for k, ts, tt in self.ops:
                if k == 1:
                    for j in range(lo, hi):
                        a = known[j]
                        s, t = ts[a], tt[f[a]]
                        if f[s] == -1:
                            if not self._set(st, s, t):
                                return False
                        elif f[s] != t:
                            return False
                elif k == 2:
                    for j in range(lo, hi):
                        a = known[j]
                        fa = f[a]
                        ra, rta = a * ns, fa * nt
                        for i in range(hi):
                            b = known[i]
                            fb = f[b]
                            s, t = ts[ra + b], tt[rta + fb]
                            if f[s] == -1:
                                if not self._set(st, s, t):
                                    return False
                            elif f[s] != t:
                                return False
                            if i < lo:
                                s, t = ts[b * ns + a], tt[fb * nt + fa]
                                if f[s] == -1:
                                    if not self._set(st, s, t):
                                        return False
                                elif f[s] != t:
                                    return False
                else:
                    for pos in _new_tuples(lo, hi, k):
                        args = [known[p] for p in pos]
                        s = ts[flat_index(args, ns)]
                        t = tt[flat_index([f[a] for a in args], nt)]
                        if f[s] == -1:
                            if not self._set(st, s, t):
                                return False
                        elif f[s] != t:
                            return False
            lo = hi
        return True

    def assign(self, st, s, t):
        """Return a new state with s -> t propagated, or None on conflict."""
        st = st.copy()
        lo = len(st.known)
        if not self._set(st, s, t):
            return None
        if not self._propagate(st, lo):
            return None
        return st

    def extend(self, pairs: Mapping[int, int]):
        """Full hom map extending pairs, or None."""
        st = self.initial()
        if st is None:
            return None
        for s, t in pairs.items():
            lo = len(st.known)
            if not self._set(st, s, t) or not self._propagate(st, lo):
                return None
        return st.f

    def enumerate(self, gens: Sequence[int], partial: Mapping[int, int] | None = None, full=False) -> Iterator:
        """Yield image tuples of gens (lexicographic by element index).

        ``partial`` maps generator *positions* to required images.  With
        ``full`` the whole source map (with -1 outside the generated part)
        is yielded alongside.
        """
        partial = dict(partial or {})
        st = self.initial()
        if st is None:
            return
        for pos, t in sorted(partial.items()):
            st = self.assign(st, gens[pos], t)
            if st is None:
                return
        yield from self._rec(st, gens, 0, partial, full)

    def _rec(self, st, gens, i, partial, full):
        if i == len(gens):
            imgs = tuple(st.f[g] for g in gens)
            yield (imgs, st.f) if full else imgs
            return
        g = gens[i]
        if st.f[g] != -1:
            yield from self._rec(st, gens, i + 1, partial, full)
            return
        for t in range(self.nt):
            nxt = self.assign(st, g, t)
            if nxt is not None:
                yield from self._rec(nxt, gens, i + 1, partial, full)


def extend_to_hom(source: FiniteAlgebra, pairs: Mapping[int, int], target: FiniteAlgebra):
    """Extend a partial map on source elements to a homomorphism of the subalgebra they generate."""
    return HomSearch(source, target).extend(pairs)


def generating_set(algebra: FiniteAlgebra, start: Sequence[int] = ()) -> list[int]:
    gens = list(dict.fromkeys(start))

    def reach():
        if not gens and not algebra.signature.constants():
            return set()  # the empty subuniverse
        return set(subalgebra_generated(algebra, gens).embedding)

    reached = reach()
    while len(reached) < algebra.size:
        gens.append(min(set(range(algebra.size)) - reached))
        reached = reach()
    return gens


def find_isomorphism(A: FiniteAlgebra, B: FiniteAlgebra, anchor: Mapping[int, int] | None = None):
    """A bijection A -> B (as a list) respecting anchor, or None (exhaustive)."""
    A.signature.require_same(B.signature, "for isomorphism")
    if A.size != B.size:
        return None
    anchor = dict(anchor or {})
    gens = generating_set(A, sorted(anchor))
    partial = {gens.index(a): b for a, b in anchor.items()}
    search = HomSearch(A, B, injective=True)
    for _, f in search.enumerate(gens, partial, full=True):
        if -1 not in f:
            return list(f)
    return None


def enumerate_homs(generators: Sequence[str], target: FiniteAlgebra, relators: Iterable = (),
                   partial: Mapping[str, int] | None = None,
                   kernel_must_contain: Iterable = ()) -> Iterator[dict[str, int]]:
    """Assignments generators -> target whose extension identifies every given term pair.

    Order: lexicographic by (generator order, element index).  Pairs are
    checked as soon as their last atom is assigned.
    """
    gens = list(generators)
    pos = {g: i for i, g in enumerate(gens)}
    pairs = list(relators) + list(kernel_must_contain)
    buckets = [[] for _ in range(len(gens) + 1)]
    for s, t in pairs:
        for term in (s, t):
            _check_term(term, target.signature)
            for a in atoms_of(term):
                if a not in pos:
                    raise UnknownAtom(a)
        at = atoms_of(s) | atoms_of(t)
        level = max((pos[a] + 1 for a in at), default=0)
        buckets[level].append((s, t))
    partial = dict(partial or {})
    for g in partial:
        if g not in pos:
            raise UnknownAtom(g)

    env = {}

    def ok(level):
        return all(evaluate(target, s, env) == evaluate(target, t, env) for s, t in buckets[level])

    def rec(i):
        if i == len(gens):
            yield dict(env)
            return
        g = gens[i]
        choices = [partial[g]] if g in partial else range(target.size)
        for x in choices:
            env[g] = x
            if ok(i + 1):
                yield from rec(i + 1)
        env.pop(g, None)

    if ok(0):
        yield from rec(0)


def _check_term(term, sig):
    if isinstance(term, App):
        if term.op not in sig:
            raise UnknownOp(term.op)
        if sig.arity(term.op) != len(term.args):
            raise ArityMismatch(f"{term.op} expects {sig.arity(term.op)} arguments, got {len(term.args)}")
        for a in term.args:
            _check_term(a, sig)
