from __future__ import annotations

from dataclasses import dataclass, field
import re

from .errors import SignatureMismatch, UnknownOp

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


@dataclass(frozen=True)
class OpSymbol:
    name: str
    arity: int

    def __post_init__(self):
        if not IDENT.fullmatch(self.name):
            raise ValueError(f"bad connective name {self.name!r}")
        if self.arity < 0:
            raise ValueError(f"negative arity for {self.name}")


@dataclass(frozen=True, eq=False)
class Signature:
    """Ordered list of connectives.  Equality ignores the order."""
    ops: tuple[OpSymbol, ...]
    _by_name: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        ops = tuple(o if isinstance(o, OpSymbol) else OpSymbol(*o) for o in self.ops)
        object.__setattr__(self, "ops", ops)
        by = {}
        for o in ops:
            if o.name in by:
                raise ValueError(f"duplicate connective {o.name}")
            by[o.name] = o
        object.__setattr__(self, "_by_name", by)

    @classmethod
    def of(cls, *pairs) -> "Signature":
        return cls(tuple(OpSymbol(n, a) for n, a in pairs))

    def __contains__(self, name):
        return name in self._by_name

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)

    def __eq__(self, other):
        return isinstance(other, Signature) and frozenset(self.ops) == frozenset(other.ops)

    def __hash__(self):
        return hash(frozenset(self.ops))

    def arity(self, name: str) -> int:
        try:
            return self._by_name[name].arity
        except KeyError:
            raise UnknownOp(name) from None

    @property
    def names(self):
        return [o.name for o in self.ops]

    def constants(self):
        return [o for o in self.ops if o.arity == 0]

    def require_same(self, other: "Signature", what=""):
        if self != other:
            raise SignatureMismatch(f"signature mismatch {what}: {self.names} vs {other.names}")
