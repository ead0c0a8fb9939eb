from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Verdict:
    condition: str
    holds: bool
    method: str
    witness: Any = None
    scope: str = "exact"  # exact | instance-level | bounded | probes
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.holds and self.witness is None:
            raise ValueError(f"failing verdict for {self.condition} needs a witness")

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        d = {"condition": self.condition, "holds": self.holds, "method": self.method,
             "scope": self.scope, "witness": jsonable(self.witness)}
        if self.detail:
            d["detail"] = jsonable(self.detail)
        return d

    def summary(self) -> str:
        s = f"{'PASS' if self.holds else 'FAIL'} {self.condition} [{self.method}; {self.scope}]"
        if not self.holds:
            s += f" witness={jsonable(self.witness)}"
        return s


def jsonable(x):
    """Convert witnesses into plain JSON data (tuples -> lists, formulas -> text)."""
    from .terms import Atom, App, format_formula
    if isinstance(x, (Atom, App)):
        return format_formula(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((jsonable(v) for v in x), key=repr)
    if isinstance(x, Verdict):
        return x.to_dict()
    return x
