"""Workbench files (UTF-8 JSON, ``"version": 1``) and the check runner.

A file names algebras, presented logics, first-order models and logics,
family instances and HSP witness chains, then lists checks.  Element names
resolve to indices in declaration order; see docs/FORMAT.md.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
import itertools
import json
import random
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from . import errors as E
from .algebra import FiniteAlgebra, HomSearch, evaluate, find_isomorphism, subalgebra_generated
from .family import (FamilyInstance, HSPWitness, Renaming, check_4, check_4_free_product, check_4a, check_4b,
                     check_family, family_from_logic, meaning_iso_check, patchwork_all, patchwork_check,
                     replay_check4)
from .fol import (FOModel, SimilarityType, bits_from_pairs, boolean_atoms, build_presented_fol,
                  converse_law_violations, fol_atoms, fol_meaning, generate_Dt, is_regular, kernel_witness_model,
                  restricted_rewrite, taut_equivalent_bounded, Refuted)
from .logic import (DEFAULT_BUDGET, ModelPresentation, PresentedLogic, all_assignment_models, check_reduct,
                    entails_counterexample, is_cond_substitutional, is_substitutional, kernel_contains_taut,
                    lindenbaum, meaning, restrict_logic, restriction_map, si_counterexample, taut_counterexample)
from .signature import Signature
from .terms import PROBE_SEED, Atom, format_formula, parse_formula
from .verdict import Verdict, jsonable


def schema(name="workbench") -> dict:
    return json.loads(resources.files("ualw").joinpath(f"schemas/{name}.schema.json").read_text("utf-8"))


@dataclass
class CheckSpec:
    id: str
    kind: str
    args: dict
    expect: Any = None
    expect_witness: Any = None
    expect_detail: dict | None = None


@dataclass
class Options:
    max_size: int | None = None   # bounded-oracle override
    budget: int = DEFAULT_BUDGET


@dataclass
class FolInfo:
    type: SimilarityType
    k: int


@dataclass(eq=False)
class Workbench:
    algebras: dict = field(default_factory=dict)
    logics: dict = field(default_factory=dict)
    fo_models: dict = field(default_factory=dict)
    fol: dict = field(default_factory=dict)         # logic name -> FolInfo
    families: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    digest: str = ""
    source: str = ""
    description: str = ""
    _validated: set = field(default_factory=set, repr=False)

    # -- references
    def logic(self, name) -> PresentedLogic:
        try:
            return self.logics[name]
        except KeyError:
            raise E.InputError(f"unknown logic {name!r}") from None

    def family(self, name) -> FamilyInstance:
        try:
            return self.families[name]
        except KeyError:
            raise E.InputError(f"unknown family {name!r}") from None

    def fol_info(self, name) -> FolInfo:
        if name not in self.fol:
            raise E.InputError(f"{name!r} is not a first-order logic")
        return self.fol[name]

    def algebra_ref(self, ref) -> tuple[FiniteAlgebra, ModelPresentation | None]:
        if isinstance(ref, str):
            if ref not in self.algebras:
                raise E.InputError(f"unknown algebra {ref!r}")
            return self.algebras[ref], None
        L = self.logic(ref["logic"])
        try:
            m = L.model(ref["model"])
        except KeyError:
            raise E.InputError(f"logic {ref['logic']!r} has no model {ref['model']!r}") from None
        return m.algebra, m

    def validated(self, name) -> FamilyInstance:
        inst = self.family(name)
        if name not in self._validated:
            inst.validate()
            self._validated.add(name)
        return inst


# ------------------------------------------------------------------ loading

def load(path) -> Workbench:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise E.InputError(f"cannot read {path}: {e.strerror}") from None
    return load_bytes(raw, source=str(path))


def load_bytes(raw: bytes, source: str = "") -> Workbench:
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise E.InputError(f"{source}: not UTF-8 JSON ({e})") from None
    return from_dict(data, digest=hashlib.sha256(raw).hexdigest(), source=source)


def validate_data(data) -> None:
    v = jsonschema.Draft202012Validator(schema())
    errs = sorted(v.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        where = "/".join(str(x) for x in e.absolute_path) or "<root>"
        raise E.InputError(f"schema violation at {where}: {e.message}")


def from_dict(data: dict, digest: str | None = None, source: str = "") -> Workbench:
    validate_data(data)
    if digest is None:
        digest = hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()
    wb = Workbench(digest=digest, source=source, description=data.get("description", ""))
    try:
        _build(wb, data)
    except E.InputError:
        raise
    except (E.WorkbenchError, ValueError, KeyError) as e:
        raise E.InputError(f"{type(e).__name__}: {e}") from None
    return wb


def _build(wb: Workbench, data: dict):
    for name, spec in data.get("algebras", {}).items():
        wb.algebras[name] = _algebra(name, spec)
    folblock = data.get("fol", {})
    for name, spec in folblock.get("models", {}).items():
        wb.fo_models[name] = FOModel(spec["size"], {r: [tuple(t) for t in ts] for r, ts in spec["relations"].items()}, name)
    for name, spec in folblock.get("logics", {}).items():
        t = SimilarityType(tuple((r, n) for r, n in spec["type"]))
        models = []
        for mn in spec["models"]:
            if mn not in wb.fo_models:
                raise E.InputError(f"fol logic {name}: unknown model {mn!r}")
            models.append(wb.fo_models[mn])
        if name in wb.logics:
            raise E.InputError(f"duplicate logic name {name!r}")
        wb.logics[name] = build_presented_fol(models, t, spec["variables"], name)
        wb.fol[name] = FolInfo(t, spec["variables"])
    pending = dict(data.get("logics", {}))
    # restrictions may refer to logics declared later; resolve to a fixpoint
    while pending:
        progress = False
        for name, spec in list(pending.items()):
            if name in wb.logics:
                raise E.InputError(f"duplicate logic name {name!r}")
            if "restrict" in spec:
                src = spec["restrict"]["logic"]
                if src not in wb.logics:
                    if src not in pending:
                        raise E.InputError(f"logic {name}: unknown logic {src!r}")
                    continue
                L, _ = restrict_logic(wb.logics[src], spec["restrict"]["atoms"], name)
                if src in wb.fol:
                    wb.fol[name] = wb.fol[src]
                wb.logics[name] = L
            else:
                wb.logics[name] = _logic(wb, name, spec)
            del pending[name]
            progress = True
        if not progress:
            raise E.InputError(f"circular restrictions among {sorted(pending)}")
    for name, spec in data.get("families", {}).items():
        wb.families[name] = _family(wb, name, spec)
    for name, spec in data.get("witnesses", {}).items():
        wb.witnesses[name] = _witness(wb, name, spec)
    ids = set()
    for c in data.get("checks", []):
        if c["id"] in ids:
            raise E.InputError(f"duplicate check id {c['id']!r}")
        ids.add(c["id"])
        args = {k: v for k, v in c.items() if k not in ("id", "kind", "expect", "expect_witness", "expect_detail", "note")}
        wb.checks.append(CheckSpec(c["id"], c["kind"], args, c.get("expect"), c.get("expect_witness"),
                                   c.get("expect_detail")))


def _algebra(name, spec) -> FiniteAlgebra:
    elems = spec["elements"]
    idx = {e: i for i, e in enumerate(elems)}
    sig = Signature.of(*[(op, o["arity"]) for op, o in spec["ops"].items()])

    def conv(t, depth):
        if depth == 0:
            if not isinstance(t, str) or t not in idx:
                raise E.InputError(f"algebra {name}: table entry {t!r} is not an element")
            return idx[t]
        if not isinstance(t, list) or len(t) != len(elems):
            raise E.InputError(f"algebra {name}: table rows must have {len(elems)} entries")
        return [conv(x, depth - 1) for x in t]

    nested = {op: conv(o["table"], o["arity"]) for op, o in spec["ops"].items()}
    return FiniteAlgebra.from_nested(sig, len(elems), nested, labels=elems, name=name)


def element(spec, A: FiniteAlgebra, model: ModelPresentation | None = None) -> int:
    """Resolve an element spec (label, {"tuples"}, {"bits"}, {"mng"}) in A."""
    if isinstance(spec, str):
        if not A.has_label(spec):
            raise E.InputError(f"{spec!r} is not an element of {A.name}")
        return A.index(spec)
    if "mng" in spec:
        if model is None or spec["mng"] not in model.assignment:
            raise E.InputError(f"{{'mng': {spec['mng']!r}}} needs a model with that atom")
        return model.assignment[spec["mng"]]
    if "bits" in spec:
        bits = spec["bits"]
    else:
        if model is None or not model.meta or "space" not in model.meta:
            raise E.InputError("'tuples' elements need a first-order model context")
        sp = model.meta["space"]
        for t in spec["tuples"]:
            if len(t) != sp.k or any(x >= sp.m for x in t):
                raise E.InputError(f"tuple {t} is not an assignment of {sp.k} variables into {sp.m} elements")
        bits = bits_from_pairs(sp, [tuple(t) for t in spec["tuples"]])
    if not A.has_label(bits):
        raise E.InputError(f"the set {spec} is not an element of {A.name}")
    return A.index(bits)


def _logic(wb, name, spec) -> PresentedLogic:
    atoms = spec["atoms"]
    models = []
    for i, m in enumerate(spec["models"]):
        if "all_assignments" in m:
            aa = m["all_assignments"]
            A, _ = wb.algebra_ref(aa["algebra"])
            fixed = {p: element(v, A) for p, v in aa.get("fixed", {}).items()}
            unknown = set(fixed) - set(atoms)
            if unknown:
                raise E.InputError(f"logic {name}: fixed atoms {sorted(unknown)} not declared")
            models += all_assignment_models(atoms, A, [element(d, A) for d in aa["designated"]], fixed,
                                            aa.get("prefix", A.name))
        else:
            A, _ = wb.algebra_ref(m["algebra"])
            extra = set(m["assignment"]) - set(atoms)
            if extra:
                raise E.InputError(f"logic {name}, model {m['label']}: undeclared atoms {sorted(extra)}")
            models.append(ModelPresentation(m["label"], A, {p: element(v, A) for p, v in m["assignment"].items()},
                                            [element(d, A) for d in m["designated"]]))
    sigs = {mm.algebra.signature for mm in models}
    if len(sigs) != 1:
        raise E.InputError(f"logic {name}: model algebras have different signatures")
    return PresentedLogic(atoms, models[0].algebra.signature, models, name)


def _family(wb, name, spec) -> FamilyInstance:
    if "from_logic" in spec:
        fl = spec["from_logic"]
        return family_from_logic(wb.logic(fl["logic"]), [str(i) for i in fl["index"]], name)
    U = wb.logic(spec["union"])
    parts, maps = {}, {}
    for lab, p in spec["parts"].items():
        L = wb.logic(p["logic"])
        parts[lab] = L
        mm = p.get("model_map", "auto")
        maps[lab] = restriction_map(L, U) if mm == "auto" else dict(mm)
    rens = [Renaming(r["source"], r["target"], dict(r["mapping"])) for r in spec.get("renamings", [])]
    for r in rens:
        if r.source not in parts or r.target not in parts:
            raise E.InputError(f"family {name}: renaming between unknown parts {r.source!r}, {r.target!r}")
    return FamilyInstance(U, parts, maps, rens, name)


def _witness(wb, name, spec) -> HSPWitness:
    base = [wb.algebra_ref(r) for r in spec["base"]]
    for f in spec["factors"]:
        if f >= len(base):
            raise E.InputError(f"witness {name}: factor index {f} out of range")
    fac = [base[f] for f in spec["factors"]]
    claimed, _ = wb.algebra_ref(spec["claimed"])
    sub = []
    for t in spec["subuniverse"]:
        if len(t) != len(fac):
            raise E.InputError(f"witness {name}: tuple {t} has the wrong length")
        sub.append(tuple(element(x, A, m) for x, (A, m) in zip(t, fac)))
    surj = [element(x, claimed) for x in spec["surjection"]]
    return HSPWitness([A for A, _ in base], list(spec["factors"]), sub, surj, claimed)


# ------------------------------------------------------------------ checks

def _formula(L: PresentedLogic, text: str):
    f = parse_formula(text, L.signature, L.atoms)
    L.check(f)
    return f


def _pair(L, pair):
    return _formula(L, pair[0]), _formula(L, pair[1])


def _assign(A, spec, model=None, atoms=None):
    h = {p: element(v, A, model) for p, v in spec.items()}
    if atoms is not None:
        missing = set(atoms) - set(h)
        if missing:
            raise E.InputError(f"assignment misses atoms {sorted(missing)}")
    return h


def _fo_dict(M: FOModel) -> dict:
    return {"size": M.size, "relations": {r: sorted(list(t) for t in ts) for r, ts in sorted(M.relations.items())}}


def _need(args, *keys):
    for k in keys:
        if k not in args:
            raise E.InputError(f"check needs argument {k!r}")


def _k_taut(wb, a, o):
    _need(a, "logic", "pair")
    L = wb.logic(a["logic"])
    phi, psi = _pair(L, a["pair"])
    m = taut_counterexample(L, phi, psi)
    cond = "taut-equivalent"
    if m is None:
        return Verdict(cond, True, "meaning equality in every listed model")
    return Verdict(cond, False, "meaning equality in every listed model",
                   {"model": m.label, "values": [m.algebra.labels[meaning(m, phi)], m.algebra.labels[meaning(m, psi)]]})


def _k_si(wb, a, o):
    _need(a, "logic", "pair")
    L = wb.logic(a["logic"])
    phi, psi = _pair(L, a["pair"])
    ce = si_counterexample(L, phi, psi, o.budget)
    if ce is None:
        return Verdict("si-equivalent", True, "all assignments into all model algebras")
    A, env = ce
    return Verdict("si-equivalent", False, "all assignments into all model algebras",
                   {"algebra": A.name, "assignment": {p: A.labels[v] for p, v in sorted(env.items())}})


def _k_entails(wb, a, o):
    _need(a, "logic", "goal")
    L = wb.logic(a["logic"])
    H = [_pair(L, h) for h in a.get("hypotheses", [])]
    ce = entails_counterexample(L, H, _pair(L, a["goal"]))
    if ce is None:
        return Verdict("entails", True, "quasi-equation over all model algebras")
    A, env = ce
    return Verdict("entails", False, "quasi-equation over all model algebras",
                   {"algebra": A.name, "assignment": {p: A.labels[v] for p, v in sorted(env.items())}})


def _k_lindenbaum(wb, a, o):
    _need(a, "logic")
    L = wb.logic(a["logic"])
    li = lindenbaum(L)
    return Verdict("lindenbaum", True, "subalgebra of the product of model algebras",
                   detail={"size": li.algebra.size, "coordinates": len(li.coordinates)})


def _k_subst(wb, a, o):
    _need(a, "logic")
    return is_substitutional(wb.logic(a["logic"]))


def _injective_extension(L, h, A):
    lind = lindenbaum(L)
    ext = HomSearch(lind.algebra, A).extend({lind.generator_image[p]: h[p] for p in L.atoms})
    return ext is not None and len(set(ext)) == len(ext)


def _k_condsubst(wb, a, o):
    _need(a, "logic")
    L = wb.logic(a["logic"])
    v = is_cond_substitutional(L)
    if not v.holds:
        A = next(T for T in L.targets() if T.name == v.witness["algebra"])
        h = {p: A.index(l) for p, l in v.witness["assignment"].items()}
        # a kernel equal to ~ means h factors through an embedding of the Lindenbaum algebra
        v.detail["kernel_equals_taut"] = _injective_extension(L, h, A)
    return v


def _k_automorphic(wb, a, o):
    """h = alpha o mng for an automorphism alpha fixed by an anchor: a conditional-substitution candidate."""
    _need(a, "logic", "model", "anchor")
    L = wb.logic(a["logic"])
    A, m = wb.algebra_ref({"logic": a["logic"], "model": a["model"]})
    anchor = {element(x, A, m): element(y, A, m) for x, y in a["anchor"]}
    alpha = find_isomorphism(A, A, anchor)
    cond = "automorphic meaning"
    if alpha is None:
        return Verdict(cond, False, "anchored automorphism search", {"reason": "no automorphism extends the anchor"})
    h = {p: alpha[v] for p, v in m.assignment.items()}
    listed = any(mm.algebra is A and mm.values(L.atoms) == tuple(h[p] for p in L.atoms) for mm in L.models)
    detail = {"respects_taut": kernel_contains_taut(L, h, A), "kernel_equals_taut": _injective_extension(L, h, A),
              "listed": listed}
    if L.name in wb.fol:
        detail["converse_law_violations"] = converse_law_violations(m, h)
    holds = detail["respects_taut"] and not listed
    w = None if holds else {"reason": "h is listed or does not respect the tautological congruence"}
    v = Verdict(cond, holds, "alpha o mng for an anchored automorphism alpha", w, detail=detail)
    v.detail["assignment"] = {p: A.labels[x] for p, x in sorted(h.items())}
    return v


def _k_reduct(wb, a, o):
    _need(a, "part", "union")
    LP, LQ = wb.logic(a["part"]), wb.logic(a["union"])
    mm = a.get("model_map", "auto")
    mm = restriction_map(LP, LQ) if mm == "auto" else mm
    return check_reduct(LP, LQ, mm)


def _k_kernel(wb, a, o):
    _need(a, "logic", "algebra", "assignment")
    L = wb.logic(a["logic"])
    A, m = wb.algebra_ref(a["algebra"])
    h = _assign(A, a["assignment"], m, L.atoms)
    ok = kernel_contains_taut(L, h, A)
    return Verdict(f"~({L.name}) in ker(h)", ok, "extension from the Lindenbaum algebra",
                   None if ok else {"algebra": A.name, "assignment": {p: A.labels[v] for p, v in sorted(h.items())}})


def _k_check4(wb, a, o):
    _need(a, "family")
    inst = wb.validated(a["family"])
    if a.get("method", "hom") == "free_product":
        v = check_4_free_product(inst, o.budget)
    else:
        prefer = None
        if "prefer" in a:
            A, m = wb.algebra_ref(a["prefer"]["algebra"])
            h = _assign(A, a["prefer"]["assignment"], m, inst.union.atoms)
            prefer = (A.name, {p: A.labels[x] for p, x in h.items()})
        v = check_4(inst, prefer, o.budget)
    if not v.holds and "assignment" in v.witness:
        v.detail["replayed"] = replay_check4(inst, v)
    return v


def _k_check4b(wb, a, o):
    _need(a, "family")
    inst = wb.validated(a["family"])
    refute = None
    if "refute" in a:
        w = a["refute"]["witness"]
        if w not in wb.witnesses:
            raise E.InputError(f"unknown witness {w!r}")
        W = wb.witnesses[w]
        refute = (W, _assign(W.claimed, a["refute"]["assignment"], None, inst.union.atoms))
    return check_4b(inst, refute, o.budget, exact=a.get("exact", True))


def _k_check4a(wb, a, o):
    _need(a, "family", "probes")
    inst = wb.validated(a["family"])
    return check_4a(inst, [_pair(inst.union, p) for p in a["probes"]])


def _k_patchwork(wb, a, o):
    _need(a, "family")
    inst = wb.validated(a["family"])
    if "part_models" in a:
        return patchwork_check(inst, a["part_models"])
    return patchwork_all(inst)


def _k_meaning_iso(wb, a, o):
    _need(a, "source", "target", "mapping")
    return meaning_iso_check(a["mapping"], wb.logic(a["source"]), wb.logic(a["target"]))


def _k_family(wb, a, o):
    _need(a, "family")
    return check_family(wb.family(a["family"]))


def _k_fol_bounded(wb, a, o):
    _need(a, "logic", "pair")
    L = wb.logic(a["logic"])
    info = wb.fol_info(a["logic"])
    phi, psi = _pair(L, a["pair"])
    n = o.max_size if o.max_size is not None else a.get("max_size", 3)
    r = taut_equivalent_bounded(info.type, info.k, phi, psi, n)
    if isinstance(r, Refuted):
        return Verdict("taut-equivalent (all models)", False, "bounded model enumeration",
                       {"model": _fo_dict(r.model), "assignment": list(r.assignment)}, scope="bounded")
    return Verdict("taut-equivalent (all models)", True, "bounded model enumeration", scope="bounded",
                   detail={"verified_up_to": r.max_size})


def _k_fol_regular(wb, a, o):
    _need(a, "logic")
    L = wb.logic(a["logic"])
    wb.fol_info(a["logic"])
    n = 0
    for m in L.models:
        for x in range(m.algebra.size):
            n += 1
            if not is_regular(m, m.algebra.labels[x]):
                return Verdict("all elements regular", False, "Delta-set check", {"model": m.label, "element": m.algebra.labels[x]})
    return Verdict("all elements regular", True, "Delta-set check", detail={"elements": n})


def _k_fol_converse(wb, a, o):
    _need(a, "logic")
    L = wb.logic(a["logic"])
    wb.fol_info(a["logic"])
    if "assignment" in a:
        _need(a, "model")
        A, m = wb.algebra_ref({"logic": a["logic"], "model": a["model"]})
        h = _assign(A, a["assignment"], m, L.atoms)
        bad = converse_law_violations(m, h)
        return Verdict("converse law", not bad, "r[1,0] is the converse of r[0,1]",
                       {"model": m.label, "relations": bad} if bad else None)
    for m in L.models:
        bad = converse_law_violations(m)
        if bad:
            return Verdict("converse law", False, "r[1,0] is the converse of r[0,1]", {"model": m.label, "relations": bad})
    return Verdict("converse law", True, "r[1,0] is the converse of r[0,1]")


def _k_fol_dt(wb, a, o):
    _need(a, "logic")
    L = wb.logic(a["logic"])
    info = wb.fol_info(a["logic"])
    dt = generate_Dt(info.type, info.k)
    for pr in dt.pairs:
        for m in L.models:
            M = m.meta["fo_model"]
            if fol_meaning(M, pr.lhs, info.k) != fol_meaning(M, pr.rhs, info.k):
                return Verdict("D(t) in kernels", False, "meaning equality per model",
                               {"model": m.label, "pair": [pr.lhs, pr.rhs], "tag": pr.tag})
    return Verdict("D(t) in kernels", True, "meaning equality per model",
                   detail={"S": sum(p.tag == "S" for p in dt.pairs), "E": sum(p.tag == "E" for p in dt.pairs),
                           "skipped": len(dt.skipped)})


def random_models(t: SimilarityType, size: int, count: int, seed=PROBE_SEED) -> list[FOModel]:
    rng = random.Random(seed)
    out = []
    for i in range(count):
        rels = {}
        for r, n in t.relations:
            rels[r] = [tup for tup in itertools.product(range(size), repeat=n) if rng.random() < 0.5]
        out.append(FOModel(size, rels, f"rand{i}"))
    return out


def _k_fol_rewrite(wb, a, o):
    _need(a, "logic", "atom")
    L = wb.logic(a["logic"])
    info = wb.fol_info(a["logic"])
    phi = Atom(a["atom"])
    L.check(phi)
    out = restricted_rewrite(phi, info.k)
    for m in L.models:
        if fol_meaning(m.meta["fo_model"], out, info.k) != fol_meaning(m.meta["fo_model"], phi, info.k):
            return Verdict("restricted rewrite", False, "exact meaning equality", {"model": m.label, "rewrite": out})
    extra = random_models(info.type, a.get("random_size", 3), a.get("random_models", 0))
    for M in extra:
        if fol_meaning(M, out, info.k) != fol_meaning(M, phi, info.k):
            return Verdict("restricted rewrite", False, "exact meaning equality", {"model": _fo_dict(M), "rewrite": out})
    n = o.max_size if o.max_size is not None else a.get("max_size", 3)
    r = taut_equivalent_bounded(info.type, info.k, phi, out, n)
    if isinstance(r, Refuted):
        return Verdict("restricted rewrite", False, "bounded model enumeration",
                       {"model": _fo_dict(r.model), "assignment": list(r.assignment), "rewrite": out}, scope="bounded")
    return Verdict("restricted rewrite", True, "exact on listed/random models + bounded enumeration", scope="bounded",
                   detail={"rewrite": format_formula(out), "verified_up_to": n,
                           "models_checked": len(L.models) + len(extra)})


def _k_subalgebra(wb, a, o):
    _need(a, "algebra", "seeds")
    A, m = wb.algebra_ref(a["algebra"])
    sub = subalgebra_generated(A, [element(x, A, m) for x in a["seeds"]])
    detail = {"size": sub.algebra.size}
    if all(isinstance(l, int) for l in sub.algebra.labels):
        detail["boolean_atoms"] = len(boolean_atoms(sub.algebra))
    return Verdict("subalgebra", True, "closure of the seeds", detail=detail)


def _side(wb, spec):
    A, m = wb.algebra_ref(spec["algebra"])
    if "generated_by" in spec:
        sub = subalgebra_generated(A, [element(x, A, m) for x in spec["generated_by"]])
        return sub.algebra, m, sub.position
    return A, m, (lambda x: x)


def _k_isomorphism(wb, a, o):
    _need(a, "left", "right")
    (A, ma, pa), (B, mb, pb) = _side(wb, a["left"]), _side(wb, a["right"])
    pA, pB = wb.algebra_ref(a["left"]["algebra"])[0], wb.algebra_ref(a["right"]["algebra"])[0]
    try:
        anchor = {pa(element(x, pA, ma)): pb(element(y, pB, mb)) for x, y in a.get("anchor", [])}
    except KeyError:
        raise E.InputError("an anchor element lies outside the generated subalgebra") from None
    iso = find_isomorphism(A, B, anchor)
    if iso is None:
        return Verdict("isomorphism", False, "anchored backtracking (exhaustive)",
                       {"reason": "no isomorphism extends the anchor", "sizes": [A.size, B.size]})
    return Verdict("isomorphism", True, "anchored backtracking (exhaustive)", detail={"size": A.size})


def _k_kernel_model(wb, a, o):
    _need(a, "logic", "relations", "algebra", "assignment")
    info = wb.fol_info(a["logic"])
    t = info.type.restrict(a["relations"])
    A, m = wb.algebra_ref(a["algebra"])
    h = _assign(A, a["assignment"], m)
    missing = set(fol_atoms(t, info.k)) - set(h)
    if missing:
        raise E.InputError(f"assignment misses atoms {sorted(missing)}")
    n = o.max_size if o.max_size is not None else a.get("max_size", 3)
    r = kernel_witness_model(t, info.k, {p: h[p] for p in fol_atoms(t, info.k)}, A, n)
    cond = f"some model N has ker(mng_N) in ker(h) on {','.join(t.names)}"
    if r is None:
        return Verdict(cond, False, "search over models by size", {"reason": f"no model of size <= {n}"}, scope="bounded")
    return Verdict(cond, True, "search over models by size", detail={"model": _fo_dict(r[0])})


def _k_fol_meaning(wb, a, o):
    _need(a, "logic", "model", "formula", "tuples")
    L = wb.logic(a["logic"])
    wb.fol_info(a["logic"])
    A, m = wb.algebra_ref({"logic": a["logic"], "model": a["model"]})
    phi = _formula(L, a["formula"])
    sp = m.meta["space"]
    got = A.labels[meaning(m, phi)]
    want = bits_from_pairs(sp, [tuple(x) for x in a["tuples"]])
    return Verdict(f"mng({a['formula']})", got == want, "concept evaluation",
                   None if got == want else {"model": m.label, "tuples": [list(sp.decode(e)) for e in range(sp.n) if got >> e & 1]})


def _k_equal_under(wb, a, o):
    _need(a, "logic", "algebra", "assignment", "pair")
    L = wb.logic(a["logic"])
    A, m = wb.algebra_ref(a["algebra"])
    phi, psi = _pair(L, a["pair"])
    h = _assign(A, a["assignment"], m)
    x, y = evaluate(A, phi, h), evaluate(A, psi, h)
    return Verdict("pair in ker(h)", x == y, "evaluation under h",
                   None if x == y else {"values": [A.labels[x], A.labels[y]]})


KINDS = {
    "taut_equivalent": _k_taut, "si_equivalent": _k_si, "entails": _k_entails, "lindenbaum": _k_lindenbaum,
    "substitutional": _k_subst, "cond_substitutional": _k_condsubst, "automorphic_meaning": _k_automorphic,
    "reduct": _k_reduct, "kernel_contains_taut": _k_kernel, "check_4": _k_check4, "check_4b": _k_check4b,
    "check_4a": _k_check4a, "patchwork": _k_patchwork, "meaning_iso": _k_meaning_iso, "family": _k_family,
    "fol_bounded": _k_fol_bounded, "fol_regular": _k_fol_regular, "fol_converse_law": _k_fol_converse,
    "fol_dt": _k_fol_dt, "fol_rewrite": _k_fol_rewrite, "subalgebra": _k_subalgebra,
    "isomorphism": _k_isomorphism, "kernel_witness_model": _k_kernel_model, "fol_meaning": _k_fol_meaning,
    "equal_under": _k_equal_under,
}


@dataclass
class CheckResult:
    spec: CheckSpec
    verdicts: list
    ok: bool
    mismatches: list = field(default_factory=list)
    seconds: float | None = None

    def records(self, timing=False) -> list[dict]:
        out = []
        for v in self.verdicts:
            d = {"check": self.spec.id, "kind": self.spec.kind}
            d.update(v.to_dict())
            d["expected"] = _expected_for(self.spec, v)
            d["ok"] = self.ok if len(self.verdicts) == 1 else not any(x[0] == v.condition for x in self.mismatches)
            if timing and self.seconds is not None:
                d["seconds"] = round(self.seconds, 6)
            out.append(d)
        return out


def _expected_for(spec, v):
    if isinstance(spec.expect, dict):
        return spec.expect.get(v.condition)
    return spec.expect


def subset_match(want, got) -> bool:
    """Does ``got`` contain ``want`` (dict keys recursively; other values exactly)?"""
    if isinstance(want, dict):
        return isinstance(got, dict) and all(k in got and subset_match(w, got[k]) for k, w in want.items())
    return want == got


def run_check(wb: Workbench, spec: CheckSpec, opts: Options | None = None) -> CheckResult:
    import time
    opts = opts or Options()
    t0 = time.perf_counter()
    try:
        res = KINDS[spec.kind](wb, spec.args, opts)
    except E.InputError:
        raise
    except E.FormulaSyntaxError as e:
        raise E.InputError(f"check {spec.id}: {e}") from None
    except E.UnknownSymbol as e:
        raise E.InputError(f"check {spec.id}: unknown symbol {e}") from None
    except E.WorkbenchError as e:
        res = Verdict(spec.kind, False, "error", {"error": type(e).__name__, "message": str(e)})
    verdicts = res if isinstance(res, list) else [res]
    secs = time.perf_counter() - t0
    mismatches = []
    for v in verdicts:
        exp = _expected_for(spec, v)
        if exp is None:
            if not isinstance(spec.expect, dict) and not v.holds:
                mismatches.append((v.condition, "refuted"))
            continue
        if (exp == "pass") != v.holds:
            mismatches.append((v.condition, f"expected {exp}"))
    if isinstance(spec.expect, dict):
        conds = {v.condition for v in verdicts}
        for c in spec.expect:
            if c not in conds:
                mismatches.append((c, "no such verdict"))
    if spec.expect_witness is not None:
        target = verdicts[0] if len(verdicts) == 1 else next((v for v in verdicts if not v.holds), verdicts[0])
        if not subset_match(spec.expect_witness, jsonable(target.witness)):
            mismatches.append((target.condition, "witness differs"))
    if spec.expect_detail is not None:
        if not subset_match(spec.expect_detail, jsonable(verdicts[0].detail)):
            mismatches.append((verdicts[0].condition, "detail differs"))
    return CheckResult(spec, verdicts, not mismatches, mismatches, secs)


def run_all(wb: Workbench, opts: Options | None = None) -> list[CheckResult]:
    return [run_check(wb, c, opts) for c in wb.checks]
