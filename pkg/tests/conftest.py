from fractions import Fraction
from pathlib import Path

import pytest

from scydomain.config import DomainConfig, ValidatedConfig, validate_config
from scydomain.crypto import KeyPair, derive_bytes, keygen
from scydomain.scenario import load_bundled
from scydomain.sim_net import RunResult, run_scenario
from scydomain.types_ import ProblemType

START = 259_200_000


def make_keys(name: str) -> KeyPair:
    return keygen(derive_bytes(32, "test-key", name))


@pytest.fixture
def realtime_config() -> ValidatedConfig:
    return validate_config(
        DomainConfig(
            tournament_start_frequency=120_000,
            proposer_deadline=20_000,
            time_tolerance=4_000,
            problem_type=ProblemType.REAL_TIME,
            real_time_frequency=10_000,
            agent_submission_fee=200,
        )
    )


@pytest.fixture
def dataset_config() -> ValidatedConfig:
    return validate_config(
        DomainConfig(
            tournament_start_frequency=120_000,
            proposer_deadline=20_000,
            time_tolerance=4_000,
            problem_type=ProblemType.DATASET,
            dataset_submission_deadline=40_000,
            min_agent_challengers=2,
            min_agent_challenger_voting_power=Fraction(1, 2),
            challenger_power_cap=Fraction(1, 2),
            agent_submission_fee=200,
        )
    )


@pytest.fixture
def alice() -> KeyPair:
    return make_keys("alice")


@pytest.fixture
def bob() -> KeyPair:
    return make_keys("bob")


@pytest.fixture(scope="session")
def happy_run() -> RunResult:
    return run_scenario(load_bundled("happy_realtime"))


@pytest.fixture(scope="session")
def happy_log(happy_run, tmp_path_factory) -> Path:
    return happy_run.log.write(
        tmp_path_factory.mktemp("happy") / "events.jsonl"
    )
