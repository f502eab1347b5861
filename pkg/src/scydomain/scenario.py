"""Scenario scripts: TOML files describing a complete simulated run."""

import tomllib
from enum import StrEnum, auto
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Annotated, Any

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    ValidationError,
    model_validator,
)

from scydomain import exceptions
from scydomain.config import DomainConfig, ValidatedConfig, validate_config
from scydomain.crypto import canonical_digest
from scydomain.types_ import Behavior, PaymentScheme, ProblemType, TxKind

__all__ = [
    "ActionKind",
    "ActionModel",
    "AgentModel",
    "FaultKind",
    "FaultModel",
    "NodeModel",
    "ScenarioScript",
    "bundled_scenarios",
    "load_bundled",
    "load_scenario",
    "parse_scenario",
    "resolve_scenario",
]


def _rational(value: Any) -> Fraction:
    """Accept integers and ``"num/den"`` strings; floats are inexact."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or not isinstance(value, int | str):
        raise ValueError(f"expected an integer or 'num/den', got {value!r}")
    try:
        return Fraction(value)
    except ValueError as e:
        raise ValueError(f"not a rational: {value!r}") from e


Rational = Annotated[
    Fraction,
    BeforeValidator(_rational),
    PlainSerializer(str, return_type=str, when_used="json"),
]


class _Model(BaseModel):
    model_config = ConfigDict(
        extra="forbid", frozen=True, arbitrary_types_allowed=True
    )


class DomainModel(_Model):
    """The ``[domain]`` table; field names follow DomainConfig."""

    tournament_start_frequency: int
    proposer_deadline: int
    time_tolerance: int
    problem_type: ProblemType
    real_time_frequency: int | None = None
    dataset_submission_deadline: int | None = None
    min_agent_challengers: int | None = None
    min_agent_challenger_voting_power: Rational | None = None
    agent_submission_fee: int = 0
    data_publish_fee: int = 0
    price_publish_fee: int = 0
    rent_fee: int = 0
    challenger_power_cap: Rational = Fraction(1, 10)


class NetworkModel(_Model):
    """Gossip latency bounds and the share of gossip messages lost."""

    min_latency: int = Field(default=20, ge=0)
    max_latency: int = Field(default=200, ge=0)
    drop_rate: Rational = Fraction(0)

    @model_validator(mode="after")
    def _check(self) -> "NetworkModel":
        if self.min_latency > self.max_latency:
            raise ValueError("min_latency exceeds max_latency")
        if not 0 <= self.drop_rate < 1:
            raise ValueError("drop_rate must be in [0, 1)")
        return self


class DatasetModel(_Model):
    """Size and class balance of every challenger dataset."""

    size: int = Field(default=20, ge=1)
    balance: Rational = Fraction(1, 2)


class TruthModel(_Model):
    """Bias of the real-time truth stream."""

    bias: Rational = Fraction(1, 2)


class AgentModel(_Model):
    """A scripted agent run by a miner node."""

    name: str
    behavior: Behavior
    value: bool = True
    p: Rational = Fraction(1, 2)
    target: str | None = None
    # Ordinal of the tournament the agent enters, counted from the first
    # tournament starting after the run begins.
    tournament: int = Field(default=0, ge=0)


class NodeModel(_Model):
    """A node, its genesis tokens and the agents it runs."""

    name: str
    balance: int = Field(ge=0)
    stake: int = Field(default=0, ge=0)
    stake_since: int = 0
    honest: bool = True
    agents: list[AgentModel] = Field(default_factory=list)


class FaultKind(StrEnum):
    """Scripted deviations a node can be armed with."""

    DELAY_TX = auto()
    DROP_TX = auto()
    SPAM_TX = auto()
    CORRUPT_DATASET = auto()
    LEAK_OUTPUTS = auto()
    WITHHOLD_RANKING = auto()
    WITHHOLD_SERVICE = auto()


class FaultModel(_Model):
    """A fault injection. ``tx`` names a transaction kind by label."""

    kind: FaultKind
    node: str
    at: int | None = None
    tx: str | None = None
    by: int = Field(default=0, ge=0)
    count: int = Field(default=1, ge=1)
    to: str | None = None

    @model_validator(mode="after")
    def _check(self) -> "FaultModel":
        needs_tx = (FaultKind.DELAY_TX, FaultKind.DROP_TX, FaultKind.SPAM_TX)
        if self.kind in needs_tx:
            if self.tx is None:
                raise ValueError(f"{self.kind} faults need a 'tx' kind")
            try:
                TxKind.from_label(self.tx)
            except KeyError as e:
                raise ValueError(f"unknown transaction kind {self.tx!r}") from e
        if self.kind is FaultKind.LEAK_OUTPUTS and self.to is None:
            raise ValueError("leak_outputs faults need a 'to' node")
        return self

    @property
    def tx_kind(self) -> TxKind | None:
        """The transaction kind the fault applies to, if any."""
        return None if self.tx is None else TxKind.from_label(self.tx)


class ActionKind(StrEnum):
    """Marketplace transactions a scenario can script."""

    PUBLISH_AGENT_PRICE = auto()
    PUBLISH_DATA_PRICE = auto()
    RENT = auto()


class ActionModel(_Model):
    """A scripted marketplace transaction.

    ``item`` is an agent name for agent listings and rents of agents, or a
    data offering name otherwise.
    """

    at: int
    node: str
    kind: ActionKind
    item: str
    scheme: PaymentScheme = PaymentScheme.PER_USE
    price: int = Field(default=0, ge=0)
    quantity: int = 1
    params: str = ""


class ScenarioScript(_Model):
    """Everything a simulated run depends on."""

    name: str
    description: str = ""
    seed: int = 0
    start_time: int = Field(ge=0)
    run_until: int
    block_interval: int = Field(gt=0)
    workers: int = Field(default=0, ge=0)
    domain: DomainModel
    network: NetworkModel = NetworkModel()
    dataset: DatasetModel = DatasetModel()
    truth: TruthModel = TruthModel()
    nodes: list[NodeModel] = Field(min_length=1)
    faults: list[FaultModel] = Field(default_factory=list)
    actions: list[ActionModel] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> "ScenarioScript":
        names = [node.name for node in self.nodes]
        if len(set(names)) != len(names):
            raise ValueError("node names must be unique")
        agents = [a.name for node in self.nodes for a in node.agents]
        if len(set(agents)) != len(agents):
            raise ValueError("agent names must be unique")
        for node in self.nodes:
            for agent in node.agents:
                copycat = agent.behavior is Behavior.COPYCAT
                if copycat and agent.target not in agents:
                    raise ValueError(
                        f"copycat {agent.name} targets unknown agent "
                        f"{agent.target!r}"
                    )
        if not any(node.stake for node in self.nodes):
            raise ValueError("at least one node must stake")
        if self.run_until <= self.start_time:
            raise ValueError("run_until must be after start_time")
        return self

    def domain_config(self) -> ValidatedConfig:
        """The validated domain configuration.

        Raises:
            ConfigError: If the ``[domain]`` table violates an invariant.
        """
        return validate_config(DomainConfig(**dict(self.domain)))

    def digest(self) -> bytes:
        """Canonical digest identifying the script."""
        return canonical_digest(self.model_dump(mode="json"))


def _check_timing(script: ScenarioScript, cfg: ValidatedConfig) -> None:
    interval = script.block_interval
    latency = script.network.max_latency
    if 2 * latency >= interval:
        raise ValueError("twice max_latency must be below block_interval")
    if latency + interval > cfg.time_tolerance:
        raise ValueError(
            "max_latency plus block_interval must not exceed time_tolerance"
        )
    if cfg.tournament_start_frequency % interval:
        raise ValueError(
            "block_interval must divide tournament_start_frequency"
        )
    if cfg.problem_type is ProblemType.REAL_TIME:
        if cfg.real_time_frequency % interval:
            raise ValueError("block_interval must divide real_time_frequency")
    else:
        busy = (
            cfg.dataset_submission_deadline
            + cfg.time_tolerance
            + 3 * interval
        )
        if busy >= cfg.tournament_start_frequency:
            raise ValueError(
                "miners need time to answer between the dataset deadline "
                "and the tournament end"
            )


def parse_scenario(text: str, source: str | None = None) -> ScenarioScript:
    """Parse and validate a scenario from TOML text.

    Args:
        text (str): TOML document.
        source (str | None, optional): Where the text came from, for error
            messages. Defaults to None.

    Returns:
        ScenarioScript: The validated script.

    Raises:
        ScenarioError: If the text is not a valid scenario.
    """
    try:
        script = ScenarioScript.model_validate(tomllib.loads(text))
        _check_timing(script, script.domain_config())
    except tomllib.TOMLDecodeError as e:
        raise exceptions.ScenarioError(f"invalid TOML: {e}", source) from e
    except ValidationError as e:
        raise exceptions.ScenarioError(str(e), source) from e
    except (exceptions.ConfigError, ValueError) as e:
        raise exceptions.ScenarioError(str(e), source) from e
    return script


def load_scenario(path: str | Path) -> ScenarioScript:
    """Load a scenario file.

    Raises:
        ScenarioError: If the file is missing or malformed.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise exceptions.ScenarioError(
            f"cannot read scenario: {e.strerror}", str(path)
        ) from e
    return parse_scenario(text, str(path))


def bundled_scenarios() -> list[str]:
    """Names of the scenarios shipped with the package."""
    folder = resources.files("scydomain") / "scenarios"
    return sorted(
        entry.name.removesuffix(".toml")
        for entry in folder.iterdir()
        if entry.name.endswith(".toml")
    )


def load_bundled(name: str) -> ScenarioScript:
    """Load a bundled scenario by name.

    Raises:
        ScenarioError: If no bundled scenario has that name.
    """
    resource = resources.files("scydomain") / "scenarios" / f"{name}.toml"
    if not resource.is_file():
        raise exceptions.ScenarioError(
            f"no bundled scenario named '{name}' "
            f"(choose from {', '.join(bundled_scenarios())})"
        )
    return parse_scenario(resource.read_text(encoding="utf-8"), name)


def resolve_scenario(reference: str) -> ScenarioScript:
    """Load a bundled scenario name or a scenario file path."""
    if reference in bundled_scenarios():
        return load_bundled(reference)
    return load_scenario(reference)
