from enum import IntEnum, StrEnum, auto
from typing import TypeAlias

__all__ = [
    "AccountId",
    "Behavior",
    "DisqualificationReason",
    "ListingKind",
    "PaymentScheme",
    "Phase",
    "ProblemType",
    "Timestamp",
    "TokenAmount",
    "TxKind",
    "DAY_MS",
    "MAX_TOKEN_AMOUNT",
]

AccountId: TypeAlias = bytes
Timestamp: TypeAlias = int
TokenAmount: TypeAlias = int

DAY_MS = 86_400_000
# Largest integer a canonical JSON number carries exactly.
MAX_TOKEN_AMOUNT = 2**53 - 1


class ProblemType(StrEnum):
    """Kind of machine-learning problem a domain verifies agents on."""

    REAL_TIME = auto()
    DATASET = auto()


class PaymentScheme(StrEnum):
    """How a listed agent or data offering is paid for."""

    PER_USE = auto()
    SUBSCRIPTION = auto()
    BUYOUT = auto()


class ListingKind(StrEnum):
    """What a price listing refers to."""

    AGENT = auto()
    DATA = auto()


class Phase(StrEnum):
    """Tournament lifecycle phase. Transitions only move forward."""

    PENDING = auto()
    ACTIVE = auto()
    AWAITING_REVEALS = auto()
    RESOLVED = auto()
    FAILED = auto()

    @property
    def rank(self) -> int:
        """Position of the phase in the lifecycle order."""
        return {
            Phase.PENDING: 0,
            Phase.ACTIVE: 1,
            Phase.AWAITING_REVEALS: 2,
            Phase.RESOLVED: 3,
            Phase.FAILED: 3,
        }[self]

    @property
    def closed(self) -> bool:
        """Whether the tournament has been resolved or failed."""
        return self in (Phase.RESOLVED, Phase.FAILED)


class DisqualificationReason(StrEnum):
    """Evidence that got a miner or challenger disqualified."""

    MISSED_SIGNAL = auto()
    MISSED_REVEAL = auto()
    MISSED_DATASET = auto()
    BAD_COMMIT = auto()
    AUTHOR_MISMATCH = auto()
    CORRUPT_DATASET = auto()


class Behavior(StrEnum):
    """Scripted agent policies of the toy prediction domain."""

    CONSTANT = auto()
    NOISY_ORACLE = auto()
    COPYCAT = auto()
    SILENT = auto()
    LATE_REVEALER = auto()
    KEY_REUSER = auto()
    BAD_COMMIT = auto()


class TxKind(IntEnum):
    """Wire tag of each transaction kind, in protocol order."""

    SUBMIT_AGENT = 0x01
    PUBLISH_DATASET = 0x02
    SUBMIT_SIGNAL = 0x03
    PUBLISH_DATASET_DECRYPTION_KEY = 0x04
    PUBLISH_SIGNAL_DECRYPTION_KEY = 0x05
    PUBLISH_TOURNAMENT_RANKING = 0x06
    TOURNAMENT_FAILURE = 0x07
    PUBLISH_AGENT_PRICE = 0x08
    PUBLISH_DATA_PRICE = 0x09
    RENT = 0x0A

    @property
    def label(self) -> str:
        """Snake-case name used in scenario files and logs."""
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "TxKind":
        """Look up a kind by its snake-case name.

        Raises:
            KeyError: If the label names no transaction kind.
        """
        return cls[label.upper()]
