"""Domain parameters: tournament schedule, tolerances and fees."""

import dataclasses
from fractions import Fraction

from scydomain import exceptions
from scydomain.types_ import MAX_TOKEN_AMOUNT, ProblemType, Timestamp

__all__ = ["DomainConfig", "ValidatedConfig", "validate_config"]

_FEES = (
    "agent_submission_fee",
    "data_publish_fee",
    "price_publish_fee",
    "rent_fee",
)
_REAL_TIME_ONLY = ("real_time_frequency",)
_DATASET_ONLY = (
    "dataset_submission_deadline",
    "min_agent_challengers",
    "min_agent_challenger_voting_power",
)


@dataclasses.dataclass(frozen=True)
class DomainConfig:
    """The parameters a domain network is defined by.

    All durations are integer milliseconds. Fields that only apply to one
    problem type must be None for the other.
    """

    tournament_start_frequency: int
    proposer_deadline: int
    time_tolerance: int
    problem_type: ProblemType
    real_time_frequency: int | None = None
    dataset_submission_deadline: int | None = None
    min_agent_challengers: int | None = None
    min_agent_challenger_voting_power: Fraction | None = None
    agent_submission_fee: int = 0
    data_publish_fee: int = 0
    price_publish_fee: int = 0
    rent_fee: int = 0
    challenger_power_cap: Fraction = Fraction(1, 10)


@dataclasses.dataclass(frozen=True)
class ValidatedConfig(DomainConfig):
    """A DomainConfig whose invariants have been checked.

    Construction runs the checks, so holding one is proof of validity.
    Timing helpers live here because they are only meaningful for a
    valid schedule.
    """

    def __post_init__(self) -> None:
        """Check every invariant of the configuration.

        Raises:
            ConfigError: Naming the first violated field.
        """
        _check_positive_int(self, "tournament_start_frequency")
        _check_positive_int(self, "proposer_deadline")
        _check_int(self, "time_tolerance", minimum=0)
        for fee in _FEES:
            _check_int(self, fee, minimum=0, maximum=MAX_TOKEN_AMOUNT)
        if not isinstance(self.problem_type, ProblemType):
            raise exceptions.ConfigError(
                "problem_type", f"unknown problem type {self.problem_type!r}"
            )
        if not 0 < self.challenger_power_cap <= 1:
            raise exceptions.ConfigError(
                "challenger_power_cap", "must be in (0, 1]"
            )
        if self.proposer_deadline <= self.time_tolerance:
            raise exceptions.ConfigError(
                "proposer_deadline", "must exceed time_tolerance"
            )
        if self.problem_type is ProblemType.REAL_TIME:
            self._check_real_time()
        else:
            self._check_dataset()

    def _check_real_time(self) -> None:
        for name in _DATASET_ONLY:
            if getattr(self, name) is not None:
                raise exceptions.ConfigError(
                    name, "only allowed in dataset domains"
                )
        if self.real_time_frequency is None:
            raise exceptions.ConfigError(
                "real_time_frequency", "required in real-time domains"
            )
        _check_positive_int(self, "real_time_frequency")
        if self.tournament_start_frequency % self.real_time_frequency:
            raise exceptions.ConfigError(
                "real_time_frequency",
                "must divide tournament_start_frequency",
            )
        if 2 * self.time_tolerance >= self.real_time_frequency:
            raise exceptions.ConfigError(
                "time_tolerance",
                "twice the tolerance must be below real_time_frequency",
            )

    def _check_dataset(self) -> None:
        for name in _REAL_TIME_ONLY:
            if getattr(self, name) is not None:
                raise exceptions.ConfigError(
                    name, "only allowed in real-time domains"
                )
        for name in _DATASET_ONLY:
            if getattr(self, name) is None:
                raise exceptions.ConfigError(
                    name, "required in dataset domains"
                )
        _check_positive_int(self, "dataset_submission_deadline")
        _check_int(self, "min_agent_challengers", minimum=1)
        share = self.min_agent_challenger_voting_power
        if not isinstance(share, Fraction) or not 0 < share <= 1:
            raise exceptions.ConfigError(
                "min_agent_challenger_voting_power", "must be in (0, 1]"
            )
        deadline = self.dataset_submission_deadline
        if deadline >= self.tournament_start_frequency:
            raise exceptions.ConfigError(
                "dataset_submission_deadline",
                "must be before the tournament ends",
            )
        if deadline + self.time_tolerance >= self.tournament_start_frequency:
            raise exceptions.ConfigError(
                "dataset_submission_deadline",
                "deadline plus tolerance must be before the tournament ends",
            )

    def tournament_window(self, index: int) -> tuple[Timestamp, Timestamp]:
        """Start and end of a tournament, anchored at the UNIX epoch.

        Args:
            index (int): Tournament index, counted from the epoch.

        Returns:
            tuple[Timestamp, Timestamp]: ``(start, end)``; the end is the
                start of the next tournament.

        Raises:
            ValueError: If index is negative.
        """
        if index < 0:
            raise ValueError(f"Tournament index must be >= 0, got {index}")
        start = index * self.tournament_start_frequency
        return start, start + self.tournament_start_frequency

    def realtime_ticks(self, index: int) -> list[Timestamp]:
        """Every real-time tick inside a tournament, ascending.

        Raises:
            WrongDomainType: If the domain is a dataset domain.
        """
        if self.problem_type is not ProblemType.REAL_TIME:
            raise exceptions.WrongDomainType(
                "realtime_ticks", self.problem_type
            )
        start, end = self.tournament_window(index)
        return list(range(start, end, self.real_time_frequency))

    def within_tolerance(
        self, deadline: Timestamp, observed: Timestamp
    ) -> bool:
        """Whether an observed time is within tolerance of a deadline.

        Early and late arrivals are treated alike.
        """
        return abs(observed - deadline) <= self.time_tolerance

    def tournament_index_at(self, timestamp: Timestamp) -> int:
        """Index of the tournament running at a timestamp."""
        return timestamp // self.tournament_start_frequency

    def nearest_tick(self, timestamp: Timestamp) -> Timestamp:
        """Closest real-time tick, rounding halves up.

        Raises:
            WrongDomainType: If the domain is a dataset domain.
        """
        if self.problem_type is not ProblemType.REAL_TIME:
            raise exceptions.WrongDomainType("nearest_tick", self.problem_type)
        frequency = self.real_time_frequency
        return (timestamp + frequency // 2) // frequency * frequency

    @property
    def ticks_per_tournament(self) -> int:
        """Number of real-time ticks in every tournament."""
        if self.real_time_frequency is None:
            return 0
        return self.tournament_start_frequency // self.real_time_frequency


def validate_config(cfg: DomainConfig) -> ValidatedConfig:
    """Check a domain configuration.

    Validating an already validated config returns it unchanged.

    Args:
        cfg (DomainConfig): The configuration to check.

    Returns:
        ValidatedConfig: The same parameters, known to be valid.

    Raises:
        ConfigError: Naming the violated field.
    """
    if isinstance(cfg, ValidatedConfig):
        return cfg
    return ValidatedConfig(
        **{f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}
    )


def _check_int(
    cfg: DomainConfig,
    name: str,
    *,
    minimum: int,
    maximum: int | None = None,
) -> None:
    value = getattr(cfg, name)
    if not isinstance(value, int) or isinstance(value, bool):
        raise exceptions.ConfigError(name, f"must be an integer, got {value!r}")
    if value < minimum:
        raise exceptions.ConfigError(name, f"must be >= {minimum}")
    if maximum is not None and value > maximum:
        raise exceptions.ConfigError(name, f"must be <= {maximum}")


def _check_positive_int(cfg: DomainConfig, name: str) -> None:
    _check_int(cfg, name, minimum=1)
