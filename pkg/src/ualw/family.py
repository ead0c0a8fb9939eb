"""Logic families on finite instances: conditions (1)-(5), (4a), (4b), patchwork."""
from __future__ import annotations

from dataclasses import dataclass, field
import itertools
from typing import Iterable, Mapping, Sequence

from .algebra import (FiniteAlgebra, HomSearch, congruence_generated, find_isomorphism, flat_index,
                      generate_in_product, is_homomorphism)
from .errors import (BadWitnessChain, BudgetExceeded, IncompatibleParts, InvariantViolation,
                     NotCondSubstitutional)
from .logic import (DEFAULT_BUDGET, ModelPresentation, PresentedLogic, check_reduct, hom_assignments,
                    is_cond_substitutional, kernel_contains_taut, lindenbaum, same_meaning,
                    taut_equivalent)
from .terms import App, Atom, Formula, atoms_of
from .verdict import Verdict


@dataclass
class Renaming:
    source: str   # part label
    target: str   # part label
    mapping: dict  # atom of source part -> atom of target part


@dataclass(eq=False)
class FamilyInstance:
    union: PresentedLogic
    parts: dict          # label -> PresentedLogic
    model_maps: dict     # label -> {union model label: part model label}
    renamings: list = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        self.parts = dict(sorted(self.parts.items()))
        allp = set()
        for lab, L in self.parts.items():
            if not set(L.atoms) <= set(self.union.atoms):
                raise InvariantViolation(f"part {lab} has atoms outside the union")
            if lab not in self.model_maps:
                raise InvariantViolation(f"part {lab} has no model map")
            allp |= set(L.atoms)
        if allp != set(self.union.atoms):
            raise InvariantViolation("union atoms are not the union of the parts")

    def reduct_verdicts(self) -> list[Verdict]:
        return [check_reduct(L, self.union, self.model_maps[lab]) for lab, L in self.parts.items()]

    def validate(self):
        for v in self.reduct_verdicts():
            if not v.holds:
                raise InvariantViolation(f"{v.condition} fails: {v.witness}")
        return self

    def disjoint(self) -> bool:
        seen = set()
        for L in self.parts.values():
            if seen & set(L.atoms):
                return False
            seen |= set(L.atoms)
        return True

    def target(self, name) -> FiniteAlgebra:
        for A in self.union.targets():
            if A.name == name:
                return A
        raise KeyError(name)


def _labels(A, atoms, vals):
    return {p: A.labels[v] for p, v in zip(atoms, vals)}


def _listing(gen, budget, what):
    out = []
    for x in gen:
        out.append(x)
        if len(out) > budget:
            raise BudgetExceeded(f"more than {budget} homomorphisms while enumerating {what}")
    return out


# ------------------------------------------------------------ condition (4)

def check_4(inst: FamilyInstance, prefer: tuple | None = None, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Every h: P -> A (A a union model algebra) whose restrictions respect each
    part's tautological congruence must respect the union's one.

    ``prefer`` = (algebra name, {atom: label}) is tried first as a witness.
    """
    if not inst.disjoint():
        raise InvariantViolation("condition (4) is stated for disjoint parts")
    U = inst.union
    method = "hom enumeration: parts-respecting h vs union-respecting h"
    if prefer is not None:
        A = inst.target(prefer[0])
        h = {p: A.index(l) for p, l in prefer[1].items()}
        if all(kernel_contains_taut(L, h, A) for L in inst.parts.values()) and not kernel_contains_taut(U, h, A):
            return Verdict("(4)", False, method, {"algebra": A.name, "assignment": dict(prefer[1])},
                           detail={"witness_source": "supplied"})
    stats = {}
    for A in U.targets():
        part_lists = []
        for lab, L in inst.parts.items():
            part_lists.append((L.atoms, _listing(hom_assignments(L, A), budget, f"Hom(Lind({lab}), {A.name})")))
        union_set = set(_listing(hom_assignments(U, A), budget, f"Hom(Lind(union), {A.name})"))
        n_parts = 1
        for _, hs in part_lists:
            n_parts *= len(hs)
        stats[A.name] = {"parts_respecting": n_parts, "union_respecting": len(union_set)}
        if n_parts == len(union_set):
            continue  # union-respecting maps are always parts-respecting
        upos = {p: i for i, p in enumerate(U.atoms)}
        for combo in itertools.product(*[hs for _, hs in part_lists]):
            vals = [0] * len(U.atoms)
            for (atoms, _), img in zip(part_lists, combo):
                for p, v in zip(atoms, img):
                    vals[upos[p]] = v
            if tuple(vals) not in union_set:
                return Verdict("(4)", False, method, {"algebra": A.name, "assignment": _labels(A, U.atoms, vals)},
                               detail={"counts": stats})
    return Verdict("(4)", True, method, detail={"counts": stats})


def check_4_free_product(inst: FamilyInstance, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Condition (4) via: Lind(union) is an Alg_m-free product of the part Lindenbaum algebras."""
    if not inst.disjoint():
        raise InvariantViolation("condition (4) is stated for disjoint parts")
    U = inst.union
    lu = lindenbaum(U)
    method = "free product: common extension of part hom families"
    embeds = {}
    for lab, L in inst.parts.items():
        li = lindenbaum(L)
        pairs = {}
        for p in L.atoms:
            if pairs.setdefault(li.generator_image[p], lu.generator_image[p]) != lu.generator_image[p]:
                return Verdict("(4)", False, method, {"part": lab, "reason": "generators do not embed"})
        e = HomSearch(li.algebra, lu.algebra, injective=True).extend(pairs)
        if e is None or -1 in e:
            return Verdict("(4)", False, method, {"part": lab, "reason": "part Lindenbaum algebra does not embed"})
        embeds[lab] = e
    for A in U.targets():
        fams = []
        for lab, L in inst.parts.items():
            li = lindenbaum(L)
            fams.append((lab, L, _listing(HomSearch(li.algebra, A).enumerate(li.generators(L.atoms), full=True),
                                          budget, f"Hom(Lind({lab}), {A.name})")))
        search = HomSearch(lu.algebra, A)
        for combo in itertools.product(*[hs for _, _, hs in fams]):
            pairs = {}
            clash = False
            for (lab, L, _), (imgs, f) in zip(fams, combo):
                for p, v in zip(L.atoms, imgs):
                    if pairs.setdefault(lu.generator_image[p], v) != v:
                        clash = True
            ext = None if clash else search.extend(pairs)
            ok = ext is not None and all(ext[embeds[lab][x]] == f[x]
                                         for (lab, _, _), (_, f) in zip(fams, combo) for x in range(len(f)))
            if not ok:
                h = {}
                for (lab, L, _), (imgs, _) in zip(fams, combo):
                    h.update(_labels(A, L.atoms, imgs))
                return Verdict("(4)", False, method, {"algebra": A.name, "assignment": dict(sorted(h.items()))})
    return Verdict("(4)", True, method)


# ---------------------------------------------------------- condition (4b)

@dataclass(eq=False)
class HSPWitness:
    base: list            # algebras (must be union model algebras)
    factors: list         # indices into base forming the product
    subuniverse: list     # tuples over the product
    surjection: list      # image (in claimed) of each subuniverse tuple, same order
    claimed: FiniteAlgebra

    def verify(self, allowed: Sequence[FiniteAlgebra] = ()):
        if allowed and any(all(b is not a for a in allowed) for b in self.base):
            raise BadWitnessChain("base algebras must be model algebras of the union logic")
        fac = [self.base[i] for i in self.factors]
        sig = self.claimed.signature
        for f in fac:
            sig.require_same(f.signature, "in witness chain")
        sub = [tuple(t) for t in self.subuniverse]
        idx = {t: i for i, t in enumerate(sub)}
        if len(idx) != len(sub) or len(self.surjection) != len(sub):
            raise BadWitnessChain("subuniverse must be duplicate-free with one image per tuple")
        for t in sub:
            if len(t) != len(fac) or any(not (0 <= x < f.size) for x, f in zip(t, fac)):
                raise BadWitnessChain(f"tuple {t} is not in the product")
        if set(self.surjection) != set(range(self.claimed.size)):
            raise BadWitnessChain("surjection is not onto the claimed algebra")
        for o in sig.ops:
            for args in itertools.product(range(len(sub)), repeat=o.arity):
                r = tuple(f.apply(o.name, [sub[a][c] for a in args]) for c, f in enumerate(fac))
                if r not in idx:
                    raise BadWitnessChain(f"subuniverse not closed under {o.name}")
                if self.surjection[idx[r]] != self.claimed.apply(o.name, [self.surjection[a] for a in args]):
                    raise BadWitnessChain(f"surjection does not commute with {o.name}")
        return True


def free_algebra(U: PresentedLogic, budget: int = DEFAULT_BUDGET, max_elements: int | None = 10 ** 5):
    """Fr(Alg_m(U), P): subalgebra of the product over all (A, g: P -> A) generated by the atoms."""
    coords = []
    total = 0
    for A in U.targets():
        total += A.size ** len(U.atoms)
        if total > budget:
            raise BudgetExceeded(f"free algebra needs more than {budget} coordinates")
        for g in itertools.product(range(A.size), repeat=len(U.atoms)):
            coords.append((A, g))
    factors = [A for A, _ in coords]
    seeds = [tuple(g[i] for _, g in coords) for i in range(len(U.atoms))]
    sp = generate_in_product(factors, seeds, name=f"Fr({U.name})", max_elements=max_elements)
    index = {e: i for i, e in enumerate(sp.tuples)}
    mu = {p: index[s] for p, s in zip(U.atoms, seeds)}
    return sp, coords, mu


def _fr_term(sp, i, atoms):
    memo = {}

    def build(j):
        if j not in memo:
            d = sp.derivation[j]
            memo[j] = Atom(atoms[d[1]]) if d[0] == "seed" else App(d[1], tuple(build(a) for a in d[2]))
        return memo[j]
    return build(i)


def check_4b(inst: FamilyInstance, refute: tuple | None = None, budget: int = DEFAULT_BUDGET,
             exact: bool = True) -> Verdict:
    """Condition (4b): Cg(≈^P) = Cg(∪ ≈^{P_i}) on Fr(Alg_m(union), P).

    ``refute`` = (HSPWitness, {atom: claimed element}) is checked first;
    a valid refutation ends the check.
    """
    U = inst.union
    if refute is not None:
        w, h = refute
        w.verify(U.targets())
        A = w.claimed
        parts_ok = all(kernel_contains_taut(L, h, A) for L in inst.parts.values())
        union_ok = kernel_contains_taut(U, h, A)
        if parts_ok and not union_ok:
            return Verdict("(4b)", False, "refute: HSP witness + parts-respecting h",
                           {"algebra": A.name, "assignment": {p: A.labels[v] for p, v in sorted(h.items())}})
        if not exact:
            raise BadWitnessChain("supplied assignment does not separate the parts from the union")
    sp, coords, mu = free_algebra(U, budget)
    Fr = sp.algebra
    # ≈^P: kernel of the maps Fr -> A given by the union's models (one coordinate each)
    cpos = {(id(A), g): c for c, (A, g) in enumerate(coords)}
    mcols = [cpos[(id(m.algebra), m.values(U.atoms))] for m in U.models]
    key = {}
    big_pairs = []
    for x, tup in enumerate(sp.tuples):
        k = tuple(tup[c] for c in mcols)
        r = key.setdefault(k, x)
        if r != x:
            big_pairs.append((r, x))
    small_pairs = []
    for lab, L in inst.parts.items():
        li = lindenbaum(L)
        gp = generate_in_product([Fr, li.algebra], [(mu[p], li.generator_image[p]) for p in L.atoms])
        by = {}
        for x, y in gp.tuples:
            r = by.setdefault(y, x)
            if r != x:
                small_pairs.append((r, x))
    big = congruence_generated(Fr, big_pairs)
    small = congruence_generated(Fr, small_pairs)
    method = "exact: Cg on Fr(Alg_m, P)"
    detail = {"free_algebra_size": Fr.size, "coordinates": len(coords),
              "classes_union": big.num_classes, "classes_parts": small.num_classes}
    if big == small:
        return Verdict("(4b)", True, method, detail=detail)
    for a, b in big_pairs:
        if not small.related(a, b):
            return Verdict("(4b)", False, method,
                           {"pair": [_fr_term(sp, a, U.atoms), _fr_term(sp, b, U.atoms)],
                            "reason": "identified by the union, not by the congruence generated by the parts"},
                           detail=detail)
    a, b = next((a, b) for a, b in small_pairs if not big.related(a, b))
    return Verdict("(4b)", False, method, {"pair": [_fr_term(sp, a, U.atoms), _fr_term(sp, b, U.atoms)],
                                           "reason": "identified by a part but not by the union"}, detail=detail)


# ---------------------------------------------------------- condition (4a)

def check_4a(inst: FamilyInstance, probes: Iterable[tuple]) -> Verdict:
    U = inst.union
    for phi, psi in probes:
        at = atoms_of(phi) | atoms_of(psi)
        in_union = taut_equivalent(U, phi, psi)
        homes = [lab for lab, L in inst.parts.items() if at <= set(L.atoms)]
        in_part = any(taut_equivalent(inst.parts[lab], phi, psi) for lab in homes)
        if in_union and not in_part:
            reason = "union-equivalent but mixes parts" if not homes else "union-equivalent, not part-equivalent"
            return Verdict("(4a)", False, "probes", {"pair": [phi, psi], "reason": reason}, scope="probes")
        if in_part and not in_union:
            return Verdict("(4a)", False, "probes", {"pair": [phi, psi], "reason": "part-equivalent, not union-equivalent"},
                           scope="probes")
    return Verdict("(4a)", True, "probes", scope="probes")


# ---------------------------------------------------------- patchwork

def _compatible(inst, chosen):
    labs = list(inst.parts)
    for i, j in itertools.combinations(labs, 2):
        shared = sorted(set(inst.parts[i].atoms) & set(inst.parts[j].atoms))
        w = same_meaning(chosen[i], chosen[j], shared)
        if w is not None:
            return (i, j, w)
    return None


def patchwork_check(inst: FamilyInstance, part_models: Mapping[str, str]) -> Verdict:
    chosen = {lab: inst.parts[lab].model(part_models[lab]) for lab in inst.parts}
    clash = _compatible(inst, chosen)
    if clash is not None:
        raise IncompatibleParts(f"parts {clash[0]} and {clash[1]} disagree on {clash[2]}")
    for M in inst.union.models:
        if all(same_meaning(M, chosen[lab], inst.parts[lab].atoms) is None for lab in inst.parts):
            return Verdict("patchwork", True, "search over union models", detail={"union_model": M.label})
    return Verdict("patchwork", False, "search over union models", {"part_models": dict(part_models)})


def patchwork_all(inst: FamilyInstance, limit: int = 10 ** 5) -> Verdict:
    """Patchwork on every compatible tuple of part models."""
    labs = list(inst.parts)
    tried = 0
    for combo in itertools.product(*[inst.parts[l].models for l in labs]):
        tried += 1
        if tried > limit:
            raise BudgetExceeded(f"more than {limit} part-model tuples")
        pm = {l: m.label for l, m in zip(labs, combo)}
        try:
            v = patchwork_check(inst, pm)
        except IncompatibleParts:
            continue
        if not v.holds:
            return v
    return Verdict("patchwork", True, "all compatible part-model tuples", detail={"tuples": tried})


# ---------------------------------------------------------- renaming

def meaning_iso_check(b: Mapping[str, str], LP: PresentedLogic, LQ: PresentedLogic) -> Verdict:
    cond = f"meaning-iso({LP.name}->{LQ.name})"
    if sorted(b) != list(LP.atoms) or sorted(b.values()) != list(LQ.atoms):
        return Verdict(cond, False, "bijection check", {"stage": "bijection", "mapping": dict(b)})
    lp, lq = lindenbaum(LP), lindenbaum(LQ)
    anchor = {}
    for p in LP.atoms:
        x, y = lp.generator_image[p], lq.generator_image[b[p]]
        if anchor.setdefault(x, y) != y:
            return Verdict(cond, False, "anchored Lindenbaum isomorphism", {"stage": "lindenbaum", "mapping": dict(b)})
    if len(set(anchor.values())) != len(anchor):
        return Verdict(cond, False, "anchored Lindenbaum isomorphism", {"stage": "lindenbaum", "mapping": dict(b)})
    iso = find_isomorphism(lp.algebra, lq.algebra, anchor)
    if iso is None:
        return Verdict(cond, False, "anchored Lindenbaum isomorphism", {"stage": "lindenbaum", "mapping": dict(b)})
    mp = {(id(m.algebra), m.values(LP.atoms)) for m in LP.models}
    mq = {(id(m.algebra), tuple(m.assignment[b[p]] for p in LP.atoms)) for m in LQ.models}
    if mp != mq:
        diff = sorted(mp ^ mq, key=repr)[0]
        return Verdict(cond, False, "Mng^P = {g∘b}", {"stage": "meaning", "mapping": dict(b),
                                                       "unmatched_values": list(diff[1])})
    return Verdict(cond, True, "anchored Lindenbaum isomorphism + Mng^P = {g∘b}")


def check_family(inst: FamilyInstance) -> list[Verdict]:
    out = []
    out.append(Verdict("(1)", True, "structural: every atom set carries one presented logic", scope="instance-level")
               if inst.parts else Verdict("(1)", False, "structural", {"reason": "no parts"}, scope="instance-level"))
    sigs = {L.signature for L in inst.parts.values()} | {inst.union.signature}
    out.append(Verdict("(2)", True, "structural: shared connectives") if len(sigs) == 1
               else Verdict("(2)", False, "structural", {"reason": "connectives differ"}))
    reds = inst.reduct_verdicts()
    bad = [v for v in reds if not v.holds]
    out.append(Verdict("(3)", not bad, "check_reduct per part", None if not bad else bad[0].to_dict()))
    out.append(check_4(inst) if inst.disjoint() else
               Verdict("(4)", False, "disjointness", {"reason": "parts overlap"}))
    five = []
    for r in inst.renamings:
        v = meaning_iso_check(r.mapping, inst.parts[r.source], inst.parts[r.target])
        five.append(v)
    badr = [v for v in five if not v.holds]
    out.append(Verdict("(5)", not badr, f"meaning-iso on {len(five)} supplied renamings",
                       None if not badr else badr[0].to_dict(), scope="instance-level"))
    return out


def family_from_logic(L: PresentedLogic, I: Sequence, name: str = "") -> FamilyInstance:
    """Disjoint copies P x I; union models are I-tuples of L-models with a common target."""
    v = is_cond_substitutional(L)
    if not v.holds:
        raise NotCondSubstitutional(f"{L.name}: {v.witness}")
    I = [str(i) for i in I]
    ren = lambda p, i: f"{p}@{i}"
    parts, maps = {}, {}
    for i in I:
        models = [ModelPresentation(f"{m.label}@{i}", m.algebra, {ren(p, i): v for p, v in m.assignment.items()},
                                    m.designated, m.meta) for m in L.models]
        parts[i] = PresentedLogic([ren(p, i) for p in L.atoms], L.signature, models, f"{L.name}@{i}")
        maps[i] = {}
    groups = {}
    for m in L.models:
        groups.setdefault((id(m.algebra), m.designated), []).append(m)
    umodels = []
    for grp in groups.values():
        for combo in itertools.product(grp, repeat=len(I)):
            lab = "(" + ",".join(m.label for m in combo) + ")"
            a = {ren(p, i): m.assignment[p] for i, m in zip(I, combo) for p in L.atoms}
            umodels.append(ModelPresentation(lab, combo[0].algebra, a, combo[0].designated))
            for i, m in zip(I, combo):
                maps[i][lab] = f"{m.label}@{i}"
    union = PresentedLogic([ren(p, i) for i in I for p in L.atoms], L.signature, umodels,
                           f"{L.name}^({','.join(I)})")
    rens = [Renaming(i, j, {ren(p, i): ren(p, j) for p in L.atoms}) for i in I for j in I if i != j]
    return FamilyInstance(union, parts, maps, rens, name or f"copies({L.name})")


def replay_check4(inst: FamilyInstance, v: Verdict) -> bool:
    """Re-verify a failing (4) witness with the low-level kernels."""
    A = inst.target(v.witness["algebra"])
    h = {p: A.index(l) for p, l in v.witness["assignment"].items()}
    return all(kernel_contains_taut(L, h, A) for L in inst.parts.values()) and not kernel_contains_taut(inst.union, h, A)
