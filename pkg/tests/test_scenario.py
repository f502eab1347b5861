from fractions import Fraction

import pytest

from scydomain import exceptions
from scydomain.scenario import (
    FaultKind,
    bundled_scenarios,
    load_bundled,
    load_scenario,
    parse_scenario,
    resolve_scenario,
)
from scydomain.types_ import Behavior, ProblemType, TxKind

TINY = """
name = "tiny"
seed = 1
start_time = 259_200_000
run_until = 259_470_000
block_interval = 1_000

[domain]
problem_type = "real_time"
tournament_start_frequency = 120_000
real_time_frequency = 10_000
time_tolerance = 4_000
proposer_deadline = 20_000

[[nodes]]
name = "v1"
balance = 1_000
stake = 1_000

[[nodes]]
name = "m1"
balance = 1_000

[[nodes.agents]]
name = "sharp"
behavior = "noisy_oracle"
p = "9/10"
"""


class TestParse:
    def test_minimal(self):
        script = parse_scenario(TINY)
        assert script.name == "tiny"
        assert script.nodes[1].agents[0].p == Fraction(9, 10)
        assert script.network.max_latency == 200
        assert script.domain_config().problem_type is ProblemType.REAL_TIME

    def test_domain_config_keeps_rationals(self):
        cfg = parse_scenario(TINY).domain_config()
        assert type(cfg.challenger_power_cap) is Fraction
        assert cfg.challenger_power_cap == Fraction(1, 10)
        cfg = load_bundled("happy_dataset").domain_config()
        assert type(cfg.min_agent_challenger_voting_power) is Fraction
        assert cfg.min_agent_challenger_voting_power == Fraction(1, 2)

    def test_float_is_rejected(self):
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(TINY.replace('p = "9/10"', "p = 0.9"))

    def test_unknown_field(self):
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(TINY.replace("seed = 1", "seed = 1\ncolour = 2"))

    def test_bad_toml(self):
        with pytest.raises(exceptions.ScenarioError) as info:
            parse_scenario("name = ", "broken.toml")
        assert info.value.source == "broken.toml"

    def test_invalid_domain(self):
        text = TINY.replace("real_time_frequency = 10_000", "")
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(text)

    def test_nobody_stakes(self):
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(TINY.replace("stake = 1_000", ""))

    def test_copycat_needs_known_target(self):
        text = TINY.replace(
            'behavior = "noisy_oracle"',
            'behavior = "copycat"\ntarget = "nobody"',
        )
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(text)

    def test_duplicate_nodes(self):
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(TINY.replace('name = "m1"', 'name = "v1"'))

    def test_fault_names_a_kind(self):
        text = TINY + '\n[[faults]]\nkind = "drop_tx"\nnode = "v1"\n'
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(text)
        fault = parse_scenario(text + 'tx = "rent"\n').faults[0]
        assert fault.kind is FaultKind.DROP_TX
        assert fault.tx_kind is TxKind.RENT

    def test_unknown_tx_kind(self):
        text = TINY + '\n[[faults]]\nkind = "drop_tx"\nnode = "v1"\n'
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(text + 'tx = "bribe"\n')

    def test_digest_follows_content(self):
        same = parse_scenario(TINY)
        assert same.digest() == parse_scenario(TINY).digest()
        other = parse_scenario(TINY.replace("seed = 1", "seed = 2"))
        assert other.digest() != same.digest()


class TestTiming:
    def test_latency_against_interval(self):
        text = TINY + "\n[network]\nmin_latency = 0\nmax_latency = 500\n"
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(text)

    def test_interval_must_divide_frequency(self):
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(
                TINY.replace("block_interval = 1_000", "block_interval = 700")
            )

    def test_interval_within_tolerance(self):
        text = TINY.replace("time_tolerance = 4_000", "time_tolerance = 1_000")
        with pytest.raises(exceptions.ScenarioError):
            parse_scenario(text)


class TestBundled:
    @pytest.mark.parametrize("name", bundled_scenarios())
    def test_every_bundled_scenario_loads(self, name):
        assert load_bundled(name).name == name

    def test_expected_scenarios_ship(self):
        assert {"happy_realtime", "happy_dataset", "spam"} <= set(
            bundled_scenarios()
        )

    def test_happy_realtime_agents(self):
        script = load_bundled("happy_realtime")
        agents = [a for n in script.nodes for a in n.agents]
        assert [a.behavior for a in agents] == [Behavior.NOISY_ORACLE] * 3
        assert [a.p for a in agents] == [
            Fraction(9, 10),
            Fraction(7, 10),
            Fraction(1, 2),
        ]

    def test_unknown_bundled(self):
        with pytest.raises(exceptions.ScenarioError):
            load_bundled("nope")

    def test_missing_file(self, tmp_path):
        with pytest.raises(exceptions.ScenarioError):
            load_scenario(tmp_path / "missing.toml")

    def test_resolve_path(self, tmp_path):
        path = tmp_path / "tiny.toml"
        path.write_text(TINY, encoding="utf-8")
        assert resolve_scenario(str(path)).name == "tiny"
        assert resolve_scenario("spam").name == "spam"
