"""Named, replayable scenarios.  Each is a checked-in workbench file whose
checks carry their expected verdicts; replaying reruns every check."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..errors import ScenarioMismatch, UnknownScenario
from .. import workbench

NAMES = (
    "cpl-family",
    "cpl-4a-fails",
    "dialectic",
    "mod5-not-condsub",
    "mod7-no-family",
    "semilattice-no-patchwork",
    "fol-reducts",
    "disjoint-union-family",
    "fol-substitution-counterexample",
    "restricted-rewrite-3var",
)


@dataclass
class ScenarioResult:
    name: str
    workbench: workbench.Workbench
    results: list

    @property
    def ok(self):
        return all(r.ok for r in self.results)

    def verdict(self, check_id, condition=None):
        """The verdict of check ``check_id`` (with the given condition, if several)."""
        for r in self.results:
            if r.spec.id == check_id:
                for v in r.verdicts:
                    if condition is None or v.condition == condition:
                        return v
        raise KeyError((check_id, condition))

    def mismatches(self):
        return [(r.spec.id, m) for r in self.results for m in r.mismatches]


def list_scenarios() -> list[str]:
    return list(NAMES)


def path(name: str):
    if name not in NAMES:
        raise UnknownScenario(name)
    return resources.files(__name__).joinpath(f"{name}.json")


def load(name: str) -> workbench.Workbench:
    p = path(name)
    return workbench.load_bytes(p.read_bytes(), source=f"scenario:{name}")


def run_scenario(name: str, opts: workbench.Options | None = None, strict: bool = True) -> ScenarioResult:
    """Replay a scenario; with ``strict`` any expectation mismatch raises ScenarioMismatch."""
    wb = load(name)
    res = ScenarioResult(name, wb, workbench.run_all(wb, opts))
    if strict and not res.ok:
        raise ScenarioMismatch(f"{name}: {res.mismatches()}")
    return res
