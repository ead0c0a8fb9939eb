"""Finite-variable first-order logic over finite relational models.

Quantifiers and equalities are ordinary connectives: ``E{i}`` (unary, the
cylindrification along v_i) and ``eq{i}{j}`` (nullary, the diagonal
v_i = v_j).  Atoms are named ``R[i0,...,i{n-1}]`` for R(v_i0, ..., v_i{n-1}).

Concept elements are Python ints used as bitsets over the assignment space
^V M: assignment (a0, ..., a{k-1}) has index a0 + a1*m + ... + a{k-1}*m^(k-1)
(v0 least significant).  Relation interpretations are bitsets over M^n
indexed the same way (first component least significant).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
import itertools
import re
from typing import Sequence

from .algebra import FiniteAlgebra, close, _closure_algebra, _new_tuples
from .errors import ArityVsVariables, BudgetExceeded, InvariantViolation, NoSpareVariables, UnknownAtom
from .logic import ModelPresentation, PresentedLogic
from .signature import Signature
from .terms import App, Atom, Formula, atoms_of

SPACE_BUDGET = 2 ** 20
CONCEPT_BUDGET = 1024

_ATOM = re.compile(r"([A-Za-z_][A-Za-z0-9_']*)\[([0-9]+(?:,[0-9]+)*)\]")


@dataclass(frozen=True)
class SimilarityType:
    relations: tuple  # ((name, arity), ...)

    def __post_init__(self):
        rels = tuple((str(n), int(a)) for n, a in (self.relations.items() if isinstance(self.relations, dict) else self.relations))
        names = [n for n, _ in rels]
        if len(set(names)) != len(names):
            raise ValueError("duplicate relation symbol")
        for n, a in rels:
            if a < 1:
                raise ValueError(f"relation {n}: arity must be >= 1 (no nullary relation symbols)")
        object.__setattr__(self, "relations", rels)

    def arity(self, name):
        for n, a in self.relations:
            if n == name:
                return a
        raise UnknownAtom(f"no relation symbol {name}")

    @property
    def names(self):
        return [n for n, _ in self.relations]

    def restrict(self, names) -> "SimilarityType":
        names = set(names)
        return SimilarityType(tuple((n, a) for n, a in self.relations if n in names))


@dataclass
class FOModel:
    size: int
    relations: dict  # name -> frozenset of tuples
    name: str = ""

    def __post_init__(self):
        rels = {}
        for r, tuples in self.relations.items():
            ts = frozenset(tuple(int(x) for x in t) for t in tuples)
            for t in ts:
                if any(not (0 <= x < self.size) for x in t):
                    raise InvariantViolation(f"model {self.name}: tuple {t} of {r} out of range")
            if len({len(t) for t in ts}) > 1:
                raise InvariantViolation(f"model {self.name}: {r} has tuples of different lengths")
            rels[r] = ts
        self.relations = rels

    def reduct(self, t: SimilarityType) -> "FOModel":
        return FOModel(self.size, {r: self.relations[r] for r in t.names}, self.name)

    def check_type(self, t: SimilarityType):
        for r, n in t.relations:
            if r not in self.relations:
                raise InvariantViolation(f"model {self.name} lacks relation {r}")
            if any(len(x) != n for x in self.relations[r]):
                raise InvariantViolation(f"model {self.name}: {r} is not {n}-ary")


def fol_signature(k: int) -> Signature:
    if k > 10:
        raise ValueError("at most 10 variables (connective names eqIJ use single digits)")
    ops = [("and", 2), ("not", 1), ("bot", 0)]
    ops += [(f"E{i}", 1) for i in range(k)]
    ops += [(f"eq{i}{j}", 0) for i in range(k) for j in range(k)]
    return Signature.of(*ops)


def atom_name(r: str, idx: Sequence[int]) -> str:
    return f"{r}[{','.join(str(i) for i in idx)}]"


def parse_atom(name: str):
    m = _ATOM.fullmatch(name)
    if not m:
        raise UnknownAtom(f"{name} is not a relational atom")
    return m.group(1), tuple(int(x) for x in m.group(2).split(","))


def fol_atoms(t: SimilarityType, k: int) -> list[str]:
    return [atom_name(r, idx) for r, n in t.relations for idx in itertools.product(range(k), repeat=n)]


def restricted_atom(r: str, n: int) -> Atom:
    return Atom(atom_name(r, range(n)))


# ---------------------------------------------------------------- spaces

class Space:
    """The assignment space ^k m with precomputed masks."""

    def __init__(self, m: int, k: int, budget=SPACE_BUDGET):
        if m ** k > budget:
            raise BudgetExceeded(f"assignment space {m}^{k} exceeds {budget}")
        self.m, self.k = m, k
        self.n = m ** k
        self.full = (1 << self.n) - 1
        self.points = [self.decode(i) for i in range(self.n)]
        self.slice0 = []
        for i in range(k):
            self.slice0.append(sum(1 << e for e, a in enumerate(self.points) if a[i] == 0))
        self.diag = {(i, j): sum(1 << e for e, a in enumerate(self.points) if a[i] == a[j])
                     for i in range(k) for j in range(k)}
        self._proj = {}

    def decode(self, idx: int) -> tuple:
        out = []
        for _ in range(self.k):
            idx, r = divmod(idx, self.m)
            out.append(r)
        return tuple(out)

    def encode(self, a: Sequence[int]) -> int:
        i = 0
        for x in reversed(a):
            i = i * self.m + x
        return i

    def cyl(self, a: int, i: int) -> int:
        s = self.m ** i
        z = self.slice0[i]
        p = 0
        for c in range(self.m):
            p |= (a >> (c * s)) & z
        out = 0
        for c in range(self.m):
            out |= p << (c * s)
        return out

    def proj_masks(self, idx: tuple) -> list[int]:
        """For each tuple index t over M^n: the assignments whose idx-projection is t."""
        got = self._proj.get(idx)
        if got is None:
            n = len(idx)
            got = [0] * (self.m ** n)
            for e, a in enumerate(self.points):
                t = 0
                for j in reversed(idx):
                    t = t * self.m + a[j]
                got[t] |= 1 << e
            self._proj[idx] = got
        return got

    def rel_bits(self, tuples, n) -> int:
        bits = 0
        for t in tuples:
            i = 0
            for x in reversed(t):
                i = i * self.m + x
            bits |= 1 << i
        return bits

    def atom_meaning(self, rel_mask: int, idx: tuple) -> int:
        pm = self.proj_masks(idx)
        out = 0
        t = 0
        while rel_mask:
            if rel_mask & 1:
                out |= pm[t]
            rel_mask >>= 1
            t += 1
        return out

    def apply(self, op: str, args):
        if op == "and":
            return args[0] & args[1]
        if op == "not":
            return self.full ^ args[0]
        if op == "bot":
            return 0
        if op[0] == "E":
            return self.cyl(args[0], int(op[1:]))
        if op.startswith("eq"):
            return self.diag[(int(op[2]), int(op[3]))]
        raise ValueError(op)


def compile_formula(phi: Formula, space: Space):
    """Turn a formula into a function env(atom -> bits) -> bits."""
    if isinstance(phi, Atom):
        name = phi.name
        return lambda env: env[name]
    op = phi.op
    if op == "and":
        a, b = (compile_formula(x, space) for x in phi.args)
        return lambda env: a(env) & b(env)
    if op == "not":
        a = compile_formula(phi.args[0], space)
        full = space.full
        return lambda env: full ^ a(env)
    if op == "bot":
        return lambda env: 0
    if op[0] == "E":
        a = compile_formula(phi.args[0], space)
        i = int(op[1:])
        cyl = space.cyl
        return lambda env: cyl(a(env), i)
    if op.startswith("eq"):
        d = space.diag[(int(op[2]), int(op[3]))]
        return lambda env: d
    raise ValueError(f"not a first-order connective: {op}")


def atomic_env(model: FOModel, atoms, space: Space) -> dict:
    env = {}
    masks = {}
    for p in atoms:
        r, idx = parse_atom(p)
        if r not in masks:
            masks[r] = space.rel_bits(model.relations[r], len(idx))
        env[p] = space.atom_meaning(masks[r], idx)
    return env


def fol_meaning(model: FOModel, phi: Formula, k: int) -> int:
    sp = Space(model.size, k)
    return compile_formula(phi, sp)(atomic_env(model, atoms_of(phi), sp))


def _check_atoms(t: SimilarityType, k: int, atoms):
    for p in atoms:
        r, idx = parse_atom(p)
        n = t.arity(r)
        if len(idx) != n:
            raise ArityVsVariables(f"{p}: {r} has arity {n}")
        if any(i >= k for i in idx):
            raise ArityVsVariables(f"{p}: only variables v0..v{k - 1} exist")


# ------------------------------------------------------- concept algebras

@dataclass(eq=False)
class ConceptAlgebra:
    algebra: FiniteAlgebra
    space: Space
    atom_element: dict  # atom -> element index

    def element(self, bits: int) -> int:
        return self.algebra.index(bits)


def concept_algebra(model: FOModel, t: SimilarityType, k: int, max_elements=CONCEPT_BUDGET,
                    space_budget=SPACE_BUDGET) -> ConceptAlgebra:
    model.check_type(t)
    sp = Space(model.size, k, space_budget)
    atoms = sorted(fol_atoms(t, k))
    env = atomic_env(model, atoms, sp)
    sig = fol_signature(k)
    cl = close([env[p] for p in atoms], [(o.name, o.arity) for o in sig.ops], sp.apply, max_elements)
    alg = _closure_algebra(sig, cl, list(cl.elements), f"Cs({model.name})")
    return ConceptAlgebra(alg, sp, {p: alg.index(env[p]) for p in atoms})


def build_presented_fol(models: Sequence[FOModel], t: SimilarityType, k: int, name="",
                        max_elements=CONCEPT_BUDGET, space_budget=SPACE_BUDGET) -> PresentedLogic:
    """FOL_t(V) with |V| = k over an explicit model list; validity = {full set}."""
    sig = fol_signature(k)
    atoms = sorted(fol_atoms(t, k))
    pres = []
    for i, M in enumerate(models):
        M = M.reduct(t) if set(M.relations) != set(t.names) else M
        ca = concept_algebra(M, t, k, max_elements, space_budget)
        full = ca.algebra.index(ca.space.full)
        pres.append(ModelPresentation(M.name or f"M{i}", ca.algebra, dict(ca.atom_element), {full},
                                      {"fo_model": M, "k": k, "space": ca.space, "type": t}))
    return PresentedLogic(atoms, sig, pres, name or f"FOL{k}({','.join(t.names)})")


# -------------------------------------------------------- bounded oracle

@dataclass
class Refuted:
    model: FOModel
    assignment: tuple  # values of v0..v{k-1}

    def __bool__(self):
        return False


@dataclass
class VerifiedUpTo:
    max_size: int

    def __bool__(self):
        return True


def _rel_order(t: SimilarityType, phi, psi):
    used = {parse_atom(p)[0] for p in atoms_of(phi) | atoms_of(psi)}
    return [(r, n) for r, n in t.relations if r in used]


def taut_equivalent_bounded(t: SimilarityType, k: int, phi: Formula, psi: Formula, max_size: int = 3,
                            budget: int = 10 ** 8):
    """Search all models of size <= max_size for one separating phi and psi.

    Models are visited by size, then by the relation bitsets of the symbols
    in type order (first symbol most significant), so the first refutation
    found is the least one; symbols not occurring in phi, psi are empty in it.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    atoms = sorted(atoms_of(phi) | atoms_of(psi))
    _check_atoms(t, k, atoms)
    rels = _rel_order(t, phi, psi)
    parsed = {p: parse_atom(p) for p in atoms}
    additive = _additive(phi) and _additive(psi)
    for m in range(1, max_size + 1):
        count = 1
        for _, n in rels:
            count *= 2 ** (m ** n)
        if additive:
            # both sides preserve unions of interpretations: the empty and the
            # one-tuple models decide every model of this size, and the least
            # refuter (in mask order) is always among them
            sp = Space(m, k)
            f, g = compile_formula(phi, sp), compile_formula(psi, sp)
            cands = [tuple(0 for _ in rels)]
            for j, (_, n) in enumerate(rels):
                for b in range(m ** n):
                    cands.append(tuple(1 << b if i == j else 0 for i in range(len(rels))))
            for masks in sorted(cands):
                env = {p: sp.atom_meaning(masks[[r for r, _ in rels].index(parsed[p][0])], parsed[p][1])
                       for p in atoms}
                a, b = f(env), g(env)
                if a != b:
                    diff = a ^ b
                    e = (diff & -diff).bit_length() - 1
                    model = FOModel(m, {r: _decode_rel(mk, m, n) for (r, n), mk in zip(rels, masks)} |
                                    {r: frozenset() for r, n in t.relations if r not in dict(rels)}, "refuter")
                    return Refuted(model, sp.decode(e))
            continue
        if count > budget:
            raise BudgetExceeded(f"{count} models of size {m} exceed budget {budget}")
        sp = Space(m, k)
        f, g = compile_formula(phi, sp), compile_formula(psi, sp)
        # atom meanings per relation interpretation, computed lazily
        per_rel = []
        for r, n in rels:
            mine = [p for p in atoms if parsed[p][0] == r]
            table = []
            for mask in range(2 ** (m ** n)):
                table.append({p: sp.atom_meaning(mask, parsed[p][1]) for p in mine})
            per_rel.append(table)
        for masks in itertools.product(*[range(len(tb)) for tb in per_rel]):
            env = {}
            for tb, mk in zip(per_rel, masks):
                env.update(tb[mk])
            a, b = f(env), g(env)
            if a != b:
                diff = a ^ b
                e = (diff & -diff).bit_length() - 1
                model = FOModel(m, {r: _decode_rel(mk, m, n) for (r, n), mk in zip(rels, masks)} |
                                {r: frozenset() for r, n in t.relations if r not in dict(rels)}, "refuter")
                return Refuted(model, sp.decode(e))
    return VerifiedUpTo(max_size)


def _additive(phi) -> bool:
    """Syntactically union-preserving in the relation interpretations:
    atoms, atom-free formulas, cylindrifications, and conjunctions with an
    atom-free side."""
    if isinstance(phi, Atom) or not atoms_of(phi):
        return True
    if phi.op.startswith("E") and len(phi.args) == 1:
        return _additive(phi.args[0])
    if phi.op == "and":
        a, b = phi.args
        return (not atoms_of(a) and _additive(b)) or (not atoms_of(b) and _additive(a))
    return False


def _decode_rel(mask, m, n):
    out = []
    t = 0
    while mask:
        if mask & 1:
            tup, x = [], t
            for _ in range(n):
                x, r = divmod(x, m)
                tup.append(r)
            out.append(tuple(tup))
        mask >>= 1
        t += 1
    return frozenset(out)


# ------------------------------------------------------------ rewriting

def _step(x, y, inner):
    return App(f"E{x}", (App("and", (App(f"eq{x}{y}"), inner)),))


def restricted_rewrite(phi: Formula, k: int) -> Formula:
    """Express r(v_i0..v_i{n-1}) with the single atom r(v0..v{n-1}), quantifiers and equalities.

    Uses ∃v_x(v_x = v_y ∧ r(τ)) ⟺ r(τ[x:=y]) for x ≠ y, searched backwards
    from the target tuple (breadth first, so the chain is as short as
    possible; ties go to the lowest fresh variable, lowest y, largest
    position set).
    """
    if not isinstance(phi, Atom):
        raise UnknownAtom("restricted_rewrite takes an atomic formula")
    r, sigma = parse_atom(phi.name)
    n = len(sigma)
    if any(i >= k for i in sigma) or n > k:
        raise NoSpareVariables(f"{phi.name} needs more than {k} variables")
    start = tuple(range(n))
    if sigma == start:
        return phi
    parent = {sigma: None}
    queue = deque([sigma])
    while queue:
        cur = queue.popleft()
        if cur == start:
            break
        present = set(cur)
        for x in range(k):
            if x in present:
                continue
            for y in sorted(present):
                pos = [i for i, v in enumerate(cur) if v == y]
                subsets = [c for s in range(len(pos), 0, -1) for c in itertools.combinations(pos, s)]
                for sub in subsets:
                    nxt = tuple(x if i in sub else v for i, v in enumerate(cur))
                    if nxt not in parent:
                        parent[nxt] = (cur, x, y)
                        queue.append(nxt)
    if start not in parent:
        raise NoSpareVariables(f"{phi.name} is not expressible by restricted atoms with {k} variables")
    # walk from the restricted tuple back to sigma, wrapping one step at a time
    f = restricted_atom(r, n)
    node = start
    while parent[node] is not None:
        prev, x, y = parent[node]
        f = _step(x, y, f)
        node = prev
    return f


def _conj(parts):
    f = parts[-1]
    for p in reversed(parts[:-1]):
        f = App("and", (p, f))
    return f


def r_star(phi: Formula, k: int) -> Formula:
    """The fresh-variable construction r*: needs n variables outside v0..v{n-1} and the indices."""
    r, sigma = parse_atom(phi.name)
    n = len(sigma)
    used = set(range(n)) | set(sigma)
    fresh = [v for v in range(k) if v not in used][:n]
    if len(fresh) < n:
        raise NoSpareVariables(f"{phi.name}: r* needs {n} fresh variables, only {len(fresh)} available for k={k}")
    inner = _conj([App(f"eq{i}{fresh[i]}") for i in range(n)] + [restricted_atom(r, n)])
    for i in reversed(range(n)):
        inner = App(f"E{i}", (inner,))
    outer = _conj([App(f"eq{sigma[i]}{fresh[i]}") for i in range(n)] + [inner])
    for j in reversed(fresh):
        outer = App(f"E{j}", (outer,))
    return outer


@dataclass
class DtPair:
    tag: str  # "S" or "E"
    relation: str
    lhs: Formula
    rhs: Formula


@dataclass
class DtResult:
    pairs: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (atom name, reason)


def generate_Dt(t: SimilarityType, k: int) -> DtResult:
    out = DtResult()
    for r, n in t.relations:
        if n > k:
            out.skipped.append((r, f"arity {n} exceeds {k} variables"))
            continue
        base = restricted_atom(r, n)
        for j in range(n, k):
            out.pairs.append(DtPair("S", r, base, App(f"E{j}", (base,))))
        for sigma in itertools.product(range(k), repeat=n):
            if sigma == tuple(range(n)):
                continue
            a = Atom(atom_name(r, sigma))
            try:
                out.pairs.append(DtPair("E", r, a, r_star(a, k)))
            except NoSpareVariables as e:
                out.skipped.append((a.name, str(e)))
    return out


# ---------------------------------------------------- element properties

def _space_of(m: ModelPresentation) -> Space:
    if not m.meta or "space" not in m.meta:
        raise InvariantViolation(f"model {m.label} is not a first-order presentation")
    return m.meta["space"]


def delta_set(m: ModelPresentation, a: int) -> set[int]:
    """Indices i with E_i(a) != a; ``a`` is a concept bitset."""
    sp = _space_of(m)
    return {i for i in range(sp.k) if sp.cyl(a, i) != a}


def is_regular(m: ModelPresentation, a: int) -> bool:
    sp = _space_of(m)
    d = delta_set(m, a)
    for e, pt in enumerate(sp.points):
        canon = sp.encode([x if i in d else 0 for i, x in enumerate(pt)])
        if ((a >> e) & 1) != ((a >> canon) & 1):
            return False
    return True


def converse_bits(sp: Space, a: int) -> int:
    """Swap the roles of v0 and v1."""
    out = 0
    for e, pt in enumerate(sp.points):
        if (a >> e) & 1:
            q = list(pt)
            q[0], q[1] = q[1], q[0]
            out |= 1 << sp.encode(q)
    return out


def converse_law_violations(m: ModelPresentation, assignment: dict | None = None) -> list[str]:
    """Binary symbols r where the value of r[1,0] is not the converse of r[0,1]."""
    sp = _space_of(m)
    t = m.meta["type"]
    assignment = assignment if assignment is not None else m.assignment
    bad = []
    if sp.k < 2:
        return bad
    for r, n in t.relations:
        if n != 2:
            continue
        a = m.algebra.labels[assignment[atom_name(r, (0, 1))]]
        b = m.algebra.labels[assignment[atom_name(r, (1, 0))]]
        if converse_bits(sp, a) != b:
            bad.append(r)
    return bad


def bits_from_pairs(sp: Space, pairs) -> int:
    """Concept from a list of (v0, ..., v{k-1}) value tuples."""
    out = 0
    for pt in pairs:
        out |= 1 << sp.encode(pt)
    return out


def boolean_atoms(A: FiniteAlgebra, elements=None) -> list[int]:
    """Minimal non-empty elements of a set algebra (labels are bitsets)."""
    elements = range(A.size) if elements is None else elements
    vals = [A.labels[e] for e in elements]
    nonzero = [v for v in vals if v]
    out = []
    for e, v in zip(elements, vals):
        if v and not any(w != v and (w & v) == w for w in nonzero):
            out.append(e)
    return out


def kernel_witness_model(t: SimilarityType, k: int, h: dict, target: FiniteAlgebra, max_size: int = 3):
    """Least model N (by size, then relation bitsets) with ker(mng_N) ⊆ ker(h).

    That holds iff {(mng_N(phi), h(phi))} is the graph of a function; the
    graph is closed up directly and abandoned at the first clash.  Returns
    (FOModel, {concept bitset: target element}) or None.
    """
    atoms = sorted(fol_atoms(t, k))
    sig = fol_signature(k)
    ops = [(o.name, o.arity) for o in sig.ops]
    for m in range(1, max_size + 1):
        sp = Space(m, k)
        ranges = [range(2 ** (m ** n)) for _, n in t.relations]
        perms = list(itertools.permutations(range(m)))[1:]
        arities = [n for _, n in t.relations]
        for masks in itertools.product(*ranges):
            # the least model of an isomorphism class is canonical, so skipping others keeps the answer
            if any(_permute_masks(masks, arities, m, pi) < masks for pi in perms):
                continue
            N = FOModel(m, {r: _decode_rel(mk, m, n) for (r, n), mk in zip(t.relations, masks)}, f"N{m}")
            env = atomic_env(N, atoms, sp)
            graph = _function_graph([(env[p], h[p]) for p in atoms], ops, sp.apply, target.apply)
            if graph is not None:
                return N, graph
    return None


def _function_graph(seeds, ops, apply_left, apply_right):
    """Close seed pairs under ops; None as soon as the left side stops determining the right."""
    f = {}
    elems = []

    def add(x, y):
        old = f.get(x)
        if old is None:
            f[x] = y
            elems.append((x, y))
            return True
        return old == y

    for name, n in ops:
        if n == 0 and not add(apply_left(name, ()), apply_right(name, ())):
            return None
    for x, y in seeds:
        if not add(x, y):
            return None
    done = 0
    while done < len(elems):
        hi = len(elems)
        for name, n in ops:
            if n == 0:
                continue
            for idx in _new_tuples(done, hi, n):
                args = [elems[i] for i in idx]
                if not add(apply_left(name, [a for a, _ in args]), apply_right(name, [b for _, b in args])):
                    return None
        done = hi
    return f


def _permute_masks(masks, arities, m, pi):
    out = []
    for mk, n in zip(masks, arities):
        r = 0
        for e in range(m ** n):
            if (mk >> e) & 1:
                x, img, w = e, 0, 1
                for _ in range(n):
                    x, c = divmod(x, m)
                    img += pi[c] * w
                    w *= m
                r |= 1 << img
        out.append(r)
    return tuple(out)
