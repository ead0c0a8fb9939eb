"""Presented logics: atoms, connectives and a finite list of models.

Every decision here is exact *for the presented logic*; model classes that
are proper classes in the mathematics are approximated by explicit lists.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import itertools
from typing import Iterable, Mapping, Sequence

from .algebra import (FiniteAlgebra, HomSearch, SubProduct, enumerate_homs, evaluate,
                      generate_in_product)
from .errors import BudgetExceeded, InvariantViolation, MeaningMismatch, NotSurjective, UnknownAtom, ValidityMismatch
from .signature import Signature
from .terms import App, Atom, Formula, atoms_of, check_formula, probe_corpus
from .verdict import Verdict

DEFAULT_BUDGET = 10 ** 6
LIND_BUDGET = 4096  # elements of a Lindenbaum algebra


@dataclass(eq=False)
class ModelPresentation:
    label: str
    algebra: FiniteAlgebra
    assignment: dict            # atom -> element index
    designated: frozenset       # the validity filter
    meta: dict = None           # e.g. the first-order model behind a concept algebra

    def __post_init__(self):
        self.designated = frozenset(self.designated)
        for p, v in self.assignment.items():
            if not (0 <= v < self.algebra.size):
                raise InvariantViolation(f"model {self.label}: {p} assigned outside the universe")
        if any(not (0 <= v < self.algebra.size) for v in self.designated):
            raise InvariantViolation(f"model {self.label}: designated set outside the universe")

    def values(self, atoms) -> tuple:
        return tuple(self.assignment[p] for p in atoms)


@dataclass(eq=False)
class PresentedLogic:
    atoms: tuple
    signature: Signature
    models: list
    name: str = ""
    _lind: object = field(default=None, repr=False)

    def __post_init__(self):
        self.atoms = tuple(sorted(set(self.atoms)))
        clash = set(self.atoms) & set(self.signature.names)
        if clash:
            raise InvariantViolation(f"atoms clash with connectives: {sorted(clash)}")
        if not self.models:
            raise InvariantViolation(f"logic {self.name}: empty model list")
        labels = set()
        for m in self.models:
            if m.label in labels:
                raise InvariantViolation(f"logic {self.name}: duplicate model label {m.label}")
            labels.add(m.label)
            if m.algebra.signature != self.signature:
                raise InvariantViolation(f"model {m.label}: algebra signature differs from the logic's")
            missing = set(self.atoms) - set(m.assignment)
            if missing:
                raise InvariantViolation(f"model {m.label}: assignment misses {sorted(missing)}")
            if set(m.assignment) != set(self.atoms):
                m.assignment = {p: m.assignment[p] for p in self.atoms}

    def model(self, label) -> ModelPresentation:
        for m in self.models:
            if m.label == label:
                return m
        raise KeyError(label)

    def targets(self) -> list[FiniteAlgebra]:
        """Distinct target algebras (by object), in model order."""
        seen, out = set(), []
        for m in self.models:
            if id(m.algebra) not in seen:
                seen.add(id(m.algebra))
                out.append(m.algebra)
        return out

    def check(self, phi: Formula):
        check_formula(phi, self.signature, set(self.atoms))


def all_assignment_models(atoms, algebra: FiniteAlgebra, designated, fixed: Mapping | None = None,
                          prefix="m") -> list[ModelPresentation]:
    """One model per assignment of the atoms into algebra (lexicographic)."""
    atoms = sorted(atoms)
    fixed = dict(fixed or {})
    free = [p for p in atoms if p not in fixed]
    out = []
    for vals in itertools.product(range(algebra.size), repeat=len(free)):
        a = dict(fixed)
        a.update(zip(free, vals))
        tag = ",".join(f"{p}={algebra.labels[a[p]]}" for p in atoms)
        out.append(ModelPresentation(f"{prefix}[{tag}]", algebra, a, designated))
    return out


# ------------------------------------------------------------- semantics

def meaning(m: ModelPresentation, phi: Formula) -> int:
    return evaluate(m.algebra, phi, m.assignment)


def is_valid(m: ModelPresentation, phi: Formula) -> bool:
    return meaning(m, phi) in m.designated


def taut_counterexample(L: PresentedLogic, phi: Formula, psi: Formula):
    """First listed model separating phi and psi, or None."""
    L.check(phi)
    L.check(psi)
    for m in L.models:
        if meaning(m, phi) != meaning(m, psi):
            return m
    return None


def taut_equivalent(L: PresentedLogic, phi: Formula, psi: Formula) -> bool:
    return taut_counterexample(L, phi, psi) is None


@dataclass(eq=False)
class LindenbaumAlgebra:
    algebra: FiniteAlgebra
    generator_image: dict     # atom -> element
    coordinates: list         # model labels, one per product coordinate
    construction: SubProduct = None

    def value(self, phi: Formula) -> int:
        return evaluate(self.algebra, phi, self.generator_image)

    def generators(self, atoms) -> list[int]:
        return [self.generator_image[p] for p in atoms]

    def term(self, i: int, atoms) -> Formula:
        """A representative formula for element i (from the closure derivation)."""
        deriv = self.construction.derivation
        memo = {}

        def build(j):
            if j in memo:
                return memo[j]
            d = deriv[j]
            if d[0] == "seed":
                f = Atom(atoms[d[1]])
            else:
                f = App(d[1], tuple(build(a) for a in d[2]))
            memo[j] = f
            return f
        return build(i)


def lindenbaum(L: PresentedLogic, max_elements: int | None = LIND_BUDGET) -> LindenbaumAlgebra:
    if L._lind is not None:
        return L._lind
    factors = [m.algebra for m in L.models]
    seeds = [tuple(m.assignment[p] for m in L.models) for p in L.atoms]
    sp = generate_in_product(factors, seeds, name=f"Lind({L.name})", max_elements=max_elements)
    index = {e: i for i, e in enumerate(sp.tuples)}
    gens = {p: index[s] for p, s in zip(L.atoms, seeds)}
    L._lind = LindenbaumAlgebra(sp.algebra, gens, [m.label for m in L.models], sp)
    return L._lind


def _assignments(atoms, algebra, budget):
    total = algebra.size ** len(atoms)
    if total > budget:
        raise BudgetExceeded(f"{total} assignments into {algebra.name} exceed budget {budget}")
    for vals in itertools.product(range(algebra.size), repeat=len(atoms)):
        yield dict(zip(atoms, vals))


def si_counterexample(L: PresentedLogic, phi: Formula, psi: Formula, budget=DEFAULT_BUDGET):
    """(algebra, assignment) on which phi and psi evaluate differently, or None."""
    L.check(phi)
    L.check(psi)
    atoms = sorted(atoms_of(phi) | atoms_of(psi))
    for A in L.targets():
        for env in _assignments(atoms, A, budget):
            if evaluate(A, phi, env) != evaluate(A, psi, env):
                return A, env
    return None


def si_equivalent(L: PresentedLogic, phi: Formula, psi: Formula, budget=DEFAULT_BUDGET) -> bool:
    return si_counterexample(L, phi, psi, budget) is None


def entails_counterexample(L: PresentedLogic, H: Sequence[tuple], goal: tuple):
    """(algebra, assignment) satisfying H but not goal, or None."""
    for s, t in list(H) + [goal]:
        L.check(s)
        L.check(t)
    atoms = sorted(set().union(*(atoms_of(s) | atoms_of(t) for s, t in list(H) + [goal])))
    for A in L.targets():
        for env in enumerate_homs(atoms, A, kernel_must_contain=H):
            if evaluate(A, goal[0], env) != evaluate(A, goal[1], env):
                return A, env
    return None


def entails(L: PresentedLogic, H: Sequence[tuple], goal: tuple) -> bool:
    return entails_counterexample(L, H, goal) is None


def _hom_pairs(lind: LindenbaumAlgebra, atoms, h: Mapping[str, int]):
    pairs = {}
    for p in atoms:
        if p not in h:
            raise UnknownAtom(f"assignment misses {p}")
        g = lind.generator_image[p]
        if pairs.setdefault(g, h[p]) != h[p]:
            return None
    return pairs


def kernel_contains_taut(L: PresentedLogic, h: Mapping[str, int], target: FiniteAlgebra) -> bool:
    """Does the tautological congruence of L lie in the kernel of h's extension?"""
    lind = lindenbaum(L)
    pairs = _hom_pairs(lind, L.atoms, h)
    if pairs is None:
        return False
    return HomSearch(lind.algebra, target).extend(pairs) is not None


def hom_assignments(L: PresentedLogic, target: FiniteAlgebra):
    """All g: P -> target passing kernel_contains_taut, lexicographic, as tuples over L.atoms."""
    lind = lindenbaum(L)
    return HomSearch(lind.algebra, target).enumerate(lind.generators(L.atoms))


def _labelled(A: FiniteAlgebra, atoms, vals):
    return {p: A.labels[v] for p, v in zip(atoms, vals)}


def is_substitutional(L: PresentedLogic) -> Verdict:
    for A in L.targets():
        listed = {m.values(L.atoms) for m in L.models if m.algebra is A}
        if len(listed) == A.size ** len(L.atoms):
            continue
        for vals in itertools.product(range(A.size), repeat=len(L.atoms)):
            if vals not in listed:
                return Verdict("substitutional", False, "Mng = Hom(F, Alg_m)",
                               {"algebra": A.name, "assignment": _labelled(A, L.atoms, vals)})
    return Verdict("substitutional", True, "Mng = Hom(F, Alg_m)")


def is_cond_substitutional(L: PresentedLogic) -> Verdict:
    for A in L.targets():
        listed = {m.values(L.atoms) for m in L.models if m.algebra is A}
        for vals in hom_assignments(L, A):
            if vals not in listed:
                return Verdict("conditionally-substitutional", False, "Mng = Hom(F, Alg_m, ~)",
                               {"algebra": A.name, "assignment": _labelled(A, L.atoms, vals)})
    return Verdict("conditionally-substitutional", True, "Mng = Hom(F, Alg_m, ~)")


# ------------------------------------------------------------- reducts

def meaning_graph(A: FiniteAlgebra, a_vals: Sequence[int], B: FiniteAlgebra, b_vals: Sequence[int]) -> SubProduct:
    """Pairs (mng_1(phi), mng_2(phi)) for all phi over the given atoms."""
    return generate_in_product([A, B], list(zip(a_vals, b_vals)))


def graph_term(sp: SubProduct, i: int, atoms) -> Formula:
    memo = {}

    def build(j):
        if j not in memo:
            d = sp.derivation[j]
            memo[j] = Atom(atoms[d[1]]) if d[0] == "seed" else App(d[1], tuple(build(a) for a in d[2]))
        return memo[j]
    return build(i)


def same_meaning(m1: ModelPresentation, m2: ModelPresentation, atoms):
    """None if the two meaning functions agree on all formulas over atoms, else a witness formula."""
    A, B = m1.algebra, m2.algebra
    if not atoms and not A.signature.constants():
        return None  # no formulas at all
    sp = meaning_graph(A, m1.values(atoms), B, m2.values(atoms))
    for i, (x, y) in enumerate(sp.tuples):
        if A.labels[x] != B.labels[y]:
            return graph_term(sp, i, atoms)
    return None


def check_reduct(LP: PresentedLogic, LQ: PresentedLogic, model_map: Mapping[str, str],
                 probes: Iterable[Formula] | None = None) -> Verdict:
    cond = f"reduct({LP.name}<={LQ.name})"
    method = "model map + meaning graphs"
    if not set(LP.atoms) <= set(LQ.atoms):
        return Verdict(cond, False, method, {"error": "NotReduct", "extra_atoms": sorted(set(LP.atoms) - set(LQ.atoms))})
    if LP.signature != LQ.signature:
        return Verdict(cond, False, method, {"error": "NotReduct", "reason": "connectives differ"})
    q_labels = [m.label for m in LQ.models]
    p_labels = {m.label for m in LP.models}
    unmapped = [l for l in q_labels if l not in model_map]
    bad = sorted({v for v in model_map.values() if v not in p_labels})
    if unmapped or bad:
        return Verdict(cond, False, method, {"error": "InvariantViolation", "unmapped": unmapped, "unknown": bad})
    missing = sorted(p_labels - set(model_map.values()))
    if missing:
        return Verdict(cond, False, method, {"error": "NotSurjective", "missing": missing})
    atoms = LP.atoms
    if not atoms and not LP.signature.constants():
        return Verdict(cond, True, method, detail={"note": "no formulas over the empty atom set"})
    for mq in LQ.models:
        mp = LP.model(model_map[mq.label])
        A, B = mq.algebra, mp.algebra
        sp = meaning_graph(A, mq.values(atoms), B, mp.values(atoms))
        for i, (x, y) in enumerate(sp.tuples):
            if A.labels[x] != B.labels[y]:
                return Verdict(cond, False, method, {"error": "MeaningMismatch", "model": mq.label,
                                                     "formula": graph_term(sp, i, atoms)})
            if (x in mq.designated) != (y in mp.designated):
                return Verdict(cond, False, method, {"error": "ValidityMismatch", "model": mq.label,
                                                     "formula": graph_term(sp, i, atoms)})
    # conservativity on probes: ~P = ~Q restricted to F^P
    if probes is None:
        probes = probe_corpus(LP.signature, atoms, exhaustive_limit=300, n_random=100) if (atoms or LP.signature.constants()) else []
    lp, lq = lindenbaum(LP), lindenbaum(LQ)
    seen = {}
    for phi in probes:
        key = lp.value(phi)
        other = seen.setdefault(key, phi)
        if lq.value(other) != lq.value(phi):
            return Verdict(cond, False, method, {"error": "MeaningMismatch", "pair": [other, phi]})
    inv = {}
    for phi in probes:
        other = inv.setdefault(lq.value(phi), phi)
        if lp.value(other) != lp.value(phi):
            return Verdict(cond, False, method, {"error": "MeaningMismatch", "pair": [other, phi]})
    return Verdict(cond, True, method)


def require_reduct(LP, LQ, model_map):
    v = check_reduct(LP, LQ, model_map)
    if not v.holds:
        err = v.witness.get("error")
        exc = {"NotSurjective": NotSurjective, "MeaningMismatch": MeaningMismatch,
               "ValidityMismatch": ValidityMismatch}.get(err, InvariantViolation)
        raise exc(f"{v.condition}: {v.witness}")
    return v


def restriction_map(LP: PresentedLogic, LQ: PresentedLogic) -> dict:
    """Map each LQ model to the first LP model with the same meaning on F^P (for reduct data)."""
    out = {}
    for mq in LQ.models:
        for mp in LP.models:
            if mp.algebra is mq.algebra and mp.values(LP.atoms) == mq.values(LP.atoms) and mq.designated == mp.designated:
                out[mq.label] = mp.label
                break
        else:
            for mp in LP.models:
                if same_meaning(mq, mp, LP.atoms) is None:
                    out[mq.label] = mp.label
                    break
            else:
                raise InvariantViolation(f"no {LP.name} model matches the restriction of {mq.label}")
    return out


def restrict_logic(LQ: PresentedLogic, atoms, name="") -> tuple[PresentedLogic, dict]:
    """The logic on a subset of atoms whose models are the (deduplicated) restrictions."""
    atoms = tuple(sorted(atoms))
    models, seen, mm = [], {}, {}
    for mq in LQ.models:
        key = (id(mq.algebra), mq.values(atoms), mq.designated)
        if key not in seen:
            lab = mq.label if not atoms else "|".join(f"{p}={mq.algebra.labels[mq.assignment[p]]}" for p in atoms) + f"@{mq.algebra.name}"
            while lab in seen.values():
                lab += "'"
            seen[key] = lab
            models.append(ModelPresentation(lab, mq.algebra, {p: mq.assignment[p] for p in atoms},
                                            mq.designated, mq.meta))
        mm[mq.label] = seen[key]
    return PresentedLogic(atoms, LQ.signature, models, name or f"{LQ.name}|{','.join(atoms)}"), mm
