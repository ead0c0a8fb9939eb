import pytest

from ualw import scenarios
from ualw.errors import ScenarioMismatch, UnknownScenario


@pytest.mark.parametrize("name", scenarios.list_scenarios())
def test_scenario_replays(name):
    res = scenarios.run_scenario(name)
    assert res.ok and res.results


def test_registry():
    assert len(scenarios.list_scenarios()) == 10
    with pytest.raises(UnknownScenario):
        scenarios.run_scenario("no-such-scenario")


def test_deterministic_verdicts():
    a = scenarios.run_scenario("dialectic")
    b = scenarios.run_scenario("dialectic")
    assert [rec for r in a.results for rec in r.records()] == [rec for r in b.results for rec in r.records()]


def test_dialectic_headlines():
    res = scenarios.run_scenario("dialectic")
    assert res.verdict("cond4").holds
    assert not res.verdict("cond4b").holds
    assert res.verdict("condsubst-ND").holds
    v = res.verdict("subst-ND")
    assert not v.holds and v.witness["assignment"]["D"] == "T"


def test_mod5_headlines():
    res = scenarios.run_scenario("mod5-not-condsub")
    d = res.verdict("automorphism").detail
    assert d["kernel_equals_taut"] and not d["listed"] and d["converse_law_violations"] == ["R", "S"]


def test_cpl_family_headlines():
    res = scenarios.run_scenario("cpl-family")
    fam = [v for r in res.results if r.spec.kind == "family" for v in r.verdicts]
    assert [v.condition for v in fam] == ["(1)", "(2)", "(3)", "(4)", "(5)"]
    assert all(v.holds for v in fam)
    assert fam[4].scope == "instance-level"


def test_mismatch_raises(monkeypatch):
    real = scenarios.workbench.run_all

    def flipped(wb, opts=None):
        out = real(wb, opts)
        out[0].ok = False
        return out
    monkeypatch.setattr(scenarios.workbench, "run_all", flipped)
    with pytest.raises(ScenarioMismatch):
        scenarios.run_scenario("cpl-4a-fails")
    assert not scenarios.run_scenario("cpl-4a-fails", strict=False).ok
