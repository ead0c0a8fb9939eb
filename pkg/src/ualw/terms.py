"""Formulas: the absolutely free term algebra over atoms and connectives.

Concrete grammar (canonical output is prefix form without whitespace)::

    formula := atom | opname | opname "(" [formula ("," formula)*] ")"
             | formula INFIX formula | "(" formula ")"
    atom    := ident ["[" digits ("," digits)* "]"]
    INFIX   := "&" (and) | "|" (or) | "->" (imp) | "<->" (iff)

Infix sugar is accepted only on input.  ``or``, ``imp``, ``iff`` (infix or
prefix) and ``top`` denote the connective of that name if the signature has
one; otherwise they abbreviate the usual and/not/bot definitions.
"""
from __future__ import annotations

from dataclasses import dataclass
import itertools
import random
import re
from typing import Iterable, Iterator, Mapping, Union

from .errors import ArityMismatch, FormulaSyntaxError, UnknownAtom, UnknownSymbol
from .signature import Signature

# "0xA1GEBRA" is not a hex literal; this is the nearest one (G->6, R->4).
PROBE_SEED = 0xA16EB4A

ATOM_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*(\[[0-9]+(,[0-9]+)*\])?")


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    op: str
    args: tuple = ()

    def __str__(self):
        return format_formula(self)


Formula = Union[Atom, App]


def format_formula(phi: Formula) -> str:
    if isinstance(phi, Atom):
        return phi.name
    if not phi.args:
        return phi.op
    return phi.op + "(" + ",".join(format_formula(a) for a in phi.args) + ")"


def atoms_of(phi: Formula) -> set[str]:
    out = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            out.add(f.name)
        else:
            stack.extend(f.args)
    return out


def ops_of(phi: Formula) -> set[str]:
    out = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, App):
            out.add(f.op)
            stack.extend(f.args)
    return out


def depth(phi: Formula) -> int:
    if isinstance(phi, Atom) or not phi.args:
        return 0
    return 1 + max(depth(a) for a in phi.args)


def size(phi: Formula) -> int:
    if isinstance(phi, Atom):
        return 1
    return 1 + sum(size(a) for a in phi.args)


def check_formula(phi: Formula, signature: Signature, atoms=None):
    """Raise if phi uses unknown connectives, wrong arities or foreign atoms."""
    if isinstance(phi, Atom):
        if atoms is not None and phi.name not in atoms:
            raise UnknownAtom(phi.name)
        return
    if phi.op not in signature:
        raise UnknownSymbol(phi.op)
    if signature.arity(phi.op) != len(phi.args):
        raise ArityMismatch(f"{phi.op} expects {signature.arity(phi.op)} arguments, got {len(phi.args)}")
    for a in phi.args:
        check_formula(a, signature, atoms)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(<->|->|&|\||\(|\)|,)|(" + ATOM_NAME.pattern + r"))")
_INFIX = {"<->": ("iff", 1), "->": ("imp", 2), "|": ("or", 3), "&": ("and", 4)}

# Boolean abbreviations, expanded when the name is not itself a connective
_ABBREV = {"or": 2, "imp": 2, "iff": 2, "top": 0}


def _neg(a):
    return App("not", (a,))


def expand_abbreviation(name: str, args: tuple, signature: Signature) -> Formula | None:
    """or/imp/iff/top in terms of and, not (and bot for top); None if unavailable."""
    if name not in _ABBREV or name in signature or len(args) != _ABBREV[name]:
        return None
    if "and" not in signature or "not" not in signature:
        return None
    if signature.arity("and") != 2 or signature.arity("not") != 1:
        return None
    if name == "top":
        return _neg(App("bot")) if "bot" in signature and signature.arity("bot") == 0 else None
    a, b = args
    if name == "or":
        return _neg(App("and", (_neg(a), _neg(b))))
    if name == "imp":
        return _neg(App("and", (a, _neg(b))))
    return App("and", (_neg(App("and", (a, _neg(b)))), _neg(App("and", (b, _neg(a))))))


def _tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character at {pos}: {text[pos:pos+10]!r}")
        out.append(m.group(1) or m.group(2))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text, signature, atoms):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = signature
        self.atoms = atoms

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect=None):
        t = self.peek()
        if t is None:
            raise FormulaSyntaxError("unexpected end of input")
        if expect is not None and t != expect:
            raise FormulaSyntaxError(f"expected {expect!r}, got {t!r}")
        self.i += 1
        return t

    def expr(self, min_prec=0):
        left = self.primary()
        while self.peek() in _INFIX:
            name, prec = _INFIX[self.peek()]
            if prec < min_prec:
                break
            tok = self.take()
            # '->' associates to the right, the rest to the left
            right = self.expr(prec if name == "imp" else prec + 1)
            left = self.build(name, (left, right), tok)
        return left

    def primary(self):
        t = self.take()
        if t == "(":
            f = self.expr()
            self.take(")")
            return f
        if t in _INFIX or t in (")", ","):
            raise FormulaSyntaxError(f"unexpected {t!r}")
        if self.peek() == "(":
            if t not in self.sig and t not in _ABBREV:
                if self.atoms is None or t in self.atoms:
                    raise FormulaSyntaxError(f"atom {t!r} cannot be applied")
                raise UnknownSymbol(t)
            self.take("(")
            args = []
            if self.peek() != ")":
                args.append(self.expr())
                while self.peek() == ",":
                    self.take(",")
                    args.append(self.expr())
            self.take(")")
            return self.build(t, tuple(args), t)
        if t in _ABBREV and t not in self.sig and (self.atoms is None or t not in self.atoms):
            return self.build(t, (), t)
        if t in self.sig:
            if self.sig.arity(t) != 0:
                raise ArityMismatch(f"{t} expects {self.sig.arity(t)} arguments, got 0")
            return App(t, ())
        if self.atoms is not None and t not in self.atoms:
            raise UnknownSymbol(t)
        return Atom(t)


    def build(self, name, args, tok):
        if name in self.sig:
            if len(args) != self.sig.arity(name):
                raise ArityMismatch(f"{name} expects {self.sig.arity(name)} arguments, got {len(args)}")
            return App(name, args)
        f = expand_abbreviation(name, args, self.sig)
        if f is None:
            raise UnknownSymbol(f"{tok!r} needs a connective {name!r} (or and/not to expand it)")
        return f


def parse_formula(text: str, signature: Signature, atoms: Iterable[str] | None = None) -> Formula:
    p = _Parser(text, signature, None if atoms is None else set(atoms))
    f = p.expr()
    if p.peek() is not None:
        raise FormulaSyntaxError(f"trailing input at token {p.peek()!r}")
    return f


# ---------------------------------------------------------- substitution

def apply_substitution(s: Mapping[str, Formula], phi: Formula) -> Formula:
    if isinstance(phi, Atom):
        try:
            return s[phi.name]
        except KeyError:
            raise UnknownAtom(phi.name) from None
    if not phi.args:
        return phi
    return App(phi.op, tuple(apply_substitution(s, a) for a in phi.args))


def compose(s: Mapping[str, Formula], t: Mapping[str, Formula]) -> dict[str, Formula]:
    """Atom-wise composite s∘t (apply t first)."""
    return {p: apply_substitution(s, f) for p, f in t.items()}


# --------------------------------------------------------- corpora

def enumerate_formulas(signature: Signature, atoms, max_depth: int, limit: int | None = None) -> Iterator[Formula]:
    """All formulas of depth <= max_depth, by depth, deterministic order."""
    atoms = sorted(atoms)
    level = [Atom(a) for a in atoms] + [App(o.name) for o in signature.constants()]
    by_depth = [level]
    count = 0
    for f in level:
        yield f
        count += 1
        if limit is not None and count >= limit:
            return
    upto = list(level)
    for d in range(1, max_depth + 1):
        prev = by_depth[-1]
        prev_set = set(prev)
        new = []
        for o in signature.ops:
            if o.arity == 0:
                continue
            for args in itertools.product(upto, repeat=o.arity):
                if not any(a in prev_set for a in args):
                    continue
                f = App(o.name, args)
                new.append(f)
                yield f
                count += 1
                if limit is not None and count >= limit:
                    return
        by_depth.append(new)
        upto.extend(new)


def random_formula(rng: random.Random, signature: Signature, atoms, max_depth: int) -> Formula:
    atoms = sorted(atoms)
    leaves = [Atom(a) for a in atoms] + [App(o.name) for o in signature.constants()]
    inner = [o for o in signature.ops if o.arity > 0]
    if not leaves:
        raise ValueError("no atoms and no constants: no formulas")
    if max_depth <= 0 or not inner or rng.random() < 0.25:
        return rng.choice(leaves)
    o = rng.choice(inner)
    return App(o.name, tuple(random_formula(rng, signature, atoms, max_depth - 1) for _ in range(o.arity)))


def probe_corpus(signature: Signature, atoms, *, exhaustive_depth=3, exhaustive_limit=2000,
                 n_random=1000, random_depth=6, seed=PROBE_SEED) -> list[Formula]:
    """Exhaustive small formulas (capped) followed by seeded random ones."""
    atoms = sorted(atoms)
    out = list(enumerate_formulas(signature, atoms[:3], exhaustive_depth, exhaustive_limit))
    rng = random.Random(seed)
    out.extend(random_formula(rng, signature, atoms, random_depth) for _ in range(n_random))
    return out
