import pytest

from scydomain import exceptions, ledger
from scydomain.report import build_report
from scydomain.scenario import (
    FaultKind,
    FaultModel,
    bundled_scenarios,
    load_bundled,
)
from scydomain.sim_net import (
    Simulation,
    agent_uuid,
    build_genesis,
    inject_fault,
    run_scenario,
)
from scydomain.types_ import Phase


def ghost_fault() -> FaultModel:
    return FaultModel(kind=FaultKind.DROP_TX, node="ghost", tx="rent")


class TestGenesis:
    def test_accounts_and_supply(self):
        script = load_bundled("happy_realtime")
        state, accounts = build_genesis(script)
        assert set(accounts) == {"v1", "v2", "v3", "v4", "m1", "m2", "m3"}
        assert state.ledger.total_supply == 7_000
        assert state.ledger.balance(accounts["v1"]) == 0
        assert state.ledger.balance(accounts["m1"]) == 1_000

    def test_agent_uuids_are_distinct(self):
        script = load_bundled("happy_realtime")
        uuids = {
            agent_uuid(script, node.name, agent.name)
            for node in script.nodes
            for agent in node.agents
        }
        assert len(uuids) == 3


class TestHappyRun:
    def test_clean(self, happy_run):
        assert happy_run.clean
        assert len(set(happy_run.digests.values())) == 1

    def test_tournament_pays_three_two_one(self, happy_run):
        state = happy_run.nodes["v1"].state
        resolved = [
            t for t in state.tournaments.values() if t.phase is Phase.RESOLVED
        ]
        assert len(resolved) == 1
        assert len(resolved[0].result) == 3
        balances = sorted(
            state.ledger.balance(happy_run.nodes[m].account)
            for m in ("m1", "m2", "m3")
        )
        assert balances == [900, 1_000, 1_100]
        assert ledger.is_conserved(state.ledger)

    def test_log_shape(self, happy_run):
        types = [r["type"] for r in happy_run.log.records]
        assert types[:2] == ["scenario", "genesis"]
        assert types[-1] == "end"
        assert "commit" in types
        assert "tournament" in types

    def test_deterministic(self, happy_run):
        again = run_scenario(load_bundled("happy_realtime"))
        assert again.log.to_bytes() == happy_run.log.to_bytes()


class TestFaults:
    def test_missed_and_late(self):
        result = run_scenario(load_bundled("missed_signal"))
        report = build_report(result.log.records)
        reasons = {(m["node"], m["reason"]) for m in report.disqualifications}
        assert ("m2", "missed_signal") in reasons
        assert ("m3", "missed_reveal") in reasons
        assert result.clean

    def test_unknown_fault_target(self):
        script = load_bundled("happy_realtime")
        script = script.model_copy(update={"faults": [ghost_fault()]})
        with pytest.raises(exceptions.UnknownTarget):
            run_scenario(script)

    def test_inject_unknown_target(self):
        sim = Simulation(load_bundled("happy_realtime"))
        with pytest.raises(exceptions.UnknownTarget):
            inject_fault(sim, ghost_fault())


def run_bundled(name: str):
    result = run_scenario(load_bundled(name))
    return result, build_report(result.log.records)


def disqualified(report) -> set[tuple[str, str]]:
    return {(m["node"], m["reason"]) for m in report.disqualifications}


def balance_of(result, name: str) -> int:
    node = result.nodes[name]
    return result.nodes["v1"].state.ledger.balance(node.account)


class TestBundledOutcomes:
    @pytest.mark.parametrize("name", bundled_scenarios())
    def test_runs_clean_and_agrees(self, name):
        result = run_scenario(load_bundled(name))
        assert result.clean
        assert len(set(result.digests.values())) == 1
        assert ledger.is_conserved(result.nodes["v1"].state.ledger)

    def test_worker_count_does_not_change_the_log(self):
        script = load_bundled("withhold_ranking")
        threaded = run_scenario(script, workers=2)
        assert threaded.log.to_bytes() == run_scenario(script).log.to_bytes()

    def test_agent_submission_failure(self):
        result, report = run_bundled("agent_submission_failure")
        assert balance_of(result, "m3") == 100
        assert balance_of(result, "m4") == 1_000
        assert balance_of(result, "m1") + balance_of(result, "m2") == 2_000
        (tournament,) = report.tournaments
        assert tournament.phase == "resolved"
        assert sorted(amount for _, amount in tournament.payments) == [
            160,
            240,
        ]

    def test_spam_is_rejected(self):
        result, report = run_bundled("spam")
        assert report.rejections
        assert not result.nodes["v1"].state.listings
        assert balance_of(result, "m1") + balance_of(result, "m2") == 2_000
        assert [t.phase for t in report.tournaments] == ["resolved"]

    def test_challenger_collapse_refunds(self):
        result, report = run_bundled("challenger_collapse")
        assert [t.phase for t in report.tournaments] == ["failed"]
        assert balance_of(result, "m1") == 1_000
        assert balance_of(result, "m2") == 1_000

    def test_signal_copying(self):
        _, report = run_bundled("signal_copying")
        assert ("m2", "author_mismatch") in disqualified(report)
        assert not any(node == "m1" for node, _ in disqualified(report))

    def test_bad_reveals(self):
        _, report = run_bundled("bad_reveals")
        reasons = disqualified(report)
        assert ("m2", "bad_commit") in reasons
        assert ("m3", "missed_reveal") in reasons
        assert report.rejections.get("KeyReused", 0) > 0

    def test_corrupt_dataset(self):
        _, report = run_bundled("corrupt_dataset")
        assert ("v2", "corrupt_dataset") in disqualified(report)

    def test_challenger_missed_reveal(self):
        _, report = run_bundled("challenger_missed_reveal")
        assert ("v1", "missed_reveal") in disqualified(report)
        assert [t.phase for t in report.tournaments] == ["resolved"]

    def test_happy_dataset_splits_pool(self):
        _, report = run_bundled("happy_dataset")
        (tournament,) = report.tournaments
        assert sorted(amount for _, amount in tournament.payments) == [
            100,
            100,
            160,
            240,
        ]

    def test_service_failure_is_logged(self):
        result, _ = run_bundled("service_failure")
        services = [r for r in result.log.records if r["type"] == "service"]
        assert {"provider": "m1", "served": False} in [
            {"provider": r["provider"], "served": r["served"]}
            for r in services
        ]

    @pytest.mark.parametrize("name", ["withhold_ranking", "leak_outputs"])
    def test_resolves_despite_fault(self, name):
        _, report = run_bundled(name)
        assert [t.phase for t in report.tournaments] == ["resolved"]
