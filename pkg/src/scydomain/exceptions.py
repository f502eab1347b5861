from typing import Any

__all__ = [
    "ScyDomainError",
    "ConfigError",
    "WrongDomainType",
    "LedgerError",
    "InsufficientAllocation",
    "InsufficientBalance",
    "NoStake",
    "TokenOverflow",
    "CryptoError",
    "DecryptFailed",
    "CommitMismatch",
    "CanonicalFormError",
    "WireFormatError",
    "ConsensusError",
    "NoEligibleProposer",
    "SelectionImpossible",
    "TransactionError",
    "BadSignature",
    "BadSequence",
    "UnknownSender",
    "DuplicateUuid",
    "NotAChallenger",
    "DeadlinePassed",
    "AlreadySubmitted",
    "UnknownAgent",
    "NotOwner",
    "NotParticipating",
    "OutsideTolerance",
    "DuplicateSignal",
    "AlreadyRevealed",
    "KeyReused",
    "UnknownSignal",
    "Disqualified",
    "NotBlockCreator",
    "TournamentNotEnded",
    "RankingMismatch",
    "AlreadyRanked",
    "TournamentFailed",
    "NotFailed",
    "AlreadyResolved",
    "AgentNotValidated",
    "UnknownListing",
    "QuantityInvalid",
    "WrongProblemType",
    "BlockRejected",
    "NotProposer",
    "TournamentError",
    "NoValidDatasets",
    "PhaseError",
    "ToyDomainError",
    "LengthMismatch",
    "EmptyTruth",
    "EmptyDataset",
    "ScenarioError",
    "UnknownTarget",
    "InvariantViolation",
    "UsageError",
    "ArgumentTypeError",
    "InvalidChoiceError",
    "MissingRequiredArgumentError",
    "TooFewArgumentsError",
    "UnknownArgumentError",
    "UnknownCommandError",
]


class ScyDomainError(Exception):
    """Base exception for all domain errors."""

    def __init__(self, msg: str):
        self.msg = msg
        super().__init__(msg)


class TransactionError(ScyDomainError):
    """Base exception for invalid transactions.

    Every subclass carries a ``code`` naming the validity rule it enforces.
    A transaction that raises one is rejected and leaves state untouched.
    """

    code = "InvalidTransaction"

    def __init__(self, detail: str = ""):
        self.detail = detail
        suffix = f": {detail}" if detail else ""
        super().__init__(f"{self.code}{suffix}")


class ConfigError(ScyDomainError):
    """Raised when a domain configuration violates an invariant."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"Invalid domain parameter '{field}': {reason}")


class WrongDomainType(ScyDomainError):
    """Raised when an operation is used with the wrong problem type."""

    def __init__(self, operation: str, problem_type: Any):
        self.operation = operation
        self.problem_type = problem_type
        super().__init__(
            f"'{operation}' is not defined for {problem_type} domains"
        )


class LedgerError(ScyDomainError):
    """Base exception for token ledger errors."""


class InsufficientAllocation(LedgerError):
    """Raised when a genesis stake exceeds its account's allocation."""

    def __init__(self, account: bytes, allocation: int, stake: int):
        self.account = account
        self.allocation = allocation
        self.stake = stake
        super().__init__(
            f"Stake of {stake} exceeds allocation of {allocation} "
            f"for account {account.hex()[:12]}"
        )


class InsufficientBalance(LedgerError, TransactionError):
    """Raised when an account cannot cover a debit."""

    code = "InsufficientBalance"

    def __init__(self, account: bytes, balance: int, required: int):
        self.account = account
        self.balance = balance
        self.required = required
        super().__init__(
            f"Account {account.hex()[:12]} holds {balance}, "
            f"needs {required}"
        )


class NoStake(LedgerError):
    """Raised when a stake operation targets an unstaked account."""

    def __init__(self, account: bytes):
        self.account = account
        super().__init__(f"Account {account.hex()[:12]} has no stake")


class TokenOverflow(LedgerError):
    """Raised when token arithmetic leaves the representable range."""

    def __init__(self, value: int):
        self.value = value
        super().__init__(f"Token amount {value} is out of range")


class CryptoError(ScyDomainError):
    """Base exception for signature, envelope and encoding errors."""


class DecryptFailed(CryptoError, TransactionError):
    """Raised when an envelope does not authenticate under a key."""

    code = "DecryptFailed"

    def __init__(self, reason: str = "authentication failed"):
        self.reason = reason
        super().__init__(f"Envelope could not be opened: {reason}")


class CommitMismatch(CryptoError):
    """Raised when an opened payload does not match its commit hash."""

    def __init__(self, expected: bytes, actual: bytes):
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"Payload digest {actual.hex()[:12]} does not match "
            f"commitment {expected.hex()[:12]}"
        )


class CanonicalFormError(CryptoError):
    """Raised when a value has no canonical serialization."""

    def __init__(self, value: Any):
        self.value = value
        super().__init__(
            f"Value of type {type(value).__name__} cannot be canonicalized"
        )


class WireFormatError(CryptoError):
    """Raised when a wire encoding cannot be decoded."""

    def __init__(self, what: str, reason: str):
        self.what = what
        self.reason = reason
        super().__init__(f"Malformed {what}: {reason}")


class ConsensusError(ScyDomainError):
    """Base exception for proposer and challenger selection errors."""


class NoEligibleProposer(ConsensusError):
    """Raised when no account holds consensus power."""

    def __init__(self):
        super().__init__("No account holds consensus power")


class SelectionImpossible(ConsensusError):
    """Raised when the challenger constraints cannot be satisfied."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Challenger selection impossible: {reason}")


class BadSignature(TransactionError):
    """The transaction signature does not verify."""

    code = "BadSignature"


class BadSequence(TransactionError):
    """The sequence number is not the sender's next one."""

    code = "BadSequence"


class UnknownSender(TransactionError):
    """The sender has no registered verification key."""

    code = "UnknownSender"


class DuplicateUuid(TransactionError):
    """The UUID is already assigned to an agent or data offering."""

    code = "DuplicateUuid"


class NotAChallenger(TransactionError):
    """The sender is not a selected challenger of the tournament."""

    code = "NotAChallenger"


class DeadlinePassed(TransactionError):
    """The dataset submission deadline has passed."""

    code = "DeadlinePassed"


class AlreadySubmitted(TransactionError):
    """The challenger already published a dataset this tournament."""

    code = "AlreadySubmitted"


class UnknownAgent(TransactionError):
    """The agent UUID is not registered."""

    code = "UnknownAgent"


class NotOwner(TransactionError):
    """The agent is registered to another account."""

    code = "NotOwner"


class NotParticipating(TransactionError):
    """The agent does not compete in the tournament being addressed."""

    code = "NotParticipating"


class OutsideTolerance(TransactionError):
    """A timed transaction arrived outside its tolerance window."""

    code = "OutsideTolerance"


class DuplicateSignal(TransactionError):
    """A signal was already submitted for this agent and tick."""

    code = "DuplicateSignal"


class AlreadyRevealed(TransactionError):
    """The challenger already revealed its dataset key."""

    code = "AlreadyRevealed"


class KeyReused(TransactionError):
    """The key already opened a different payload this tournament."""

    code = "KeyReused"


class UnknownSignal(TransactionError):
    """No committed signal exists for the revealed key to open."""

    code = "UnknownSignal"


class Disqualified(TransactionError):
    """The sender is disqualified from the tournament."""

    code = "Disqualified"


class NotBlockCreator(TransactionError):
    """Only the current block creator may send this transaction."""

    code = "NotBlockCreator"


class TournamentNotEnded(TransactionError):
    """No ended tournament has a closed reveal window."""

    code = "TournamentNotEnded"


class RankingMismatch(TransactionError):
    """The ranking differs from the locally computed one."""

    code = "RankingMismatch"


class AlreadyRanked(TransactionError):
    """Every ended tournament has already been ranked."""

    code = "AlreadyRanked"


class TournamentFailed(TransactionError):
    """A failed tournament cannot be ranked."""

    code = "TournamentFailed"


class NotFailed(TransactionError):
    """The tournament does not meet the failure condition."""

    code = "NotFailed"


class AlreadyResolved(TransactionError):
    """Every ended tournament has already been resolved."""

    code = "AlreadyResolved"


class AgentNotValidated(TransactionError):
    """The agent never appeared in a published ranking."""

    code = "AgentNotValidated"


class UnknownListing(TransactionError):
    """No price listing exists for the UUID."""

    code = "UnknownListing"


class QuantityInvalid(TransactionError):
    """The rent quantity is not allowed for the listing."""

    code = "QuantityInvalid"


class WrongProblemType(TransactionError):
    """The transaction does not exist in this domain's problem type."""

    code = "WrongProblemType"


class BlockRejected(ScyDomainError):
    """Raised when a block fails validation as a whole."""

    def __init__(self, height: int, reason: str):
        self.height = height
        self.reason = reason
        super().__init__(f"Block {height} rejected: {reason}")


class NotProposer(ScyDomainError):
    """Raised when a node builds a block it was not selected for."""

    def __init__(self, height: int, expected: bytes):
        self.height = height
        self.expected = expected
        super().__init__(
            f"Not the proposer of block {height} "
            f"(selected: {expected.hex()[:12]})"
        )


class TournamentError(ScyDomainError):
    """Base exception for tournament bookkeeping errors."""


class NoValidDatasets(TournamentError):
    """Raised when no challenger dataset is left to score against."""

    def __init__(self):
        super().__init__("No valid challenger datasets to score against")


class PhaseError(TournamentError):
    """Raised on an attempt to move a tournament phase backwards."""

    def __init__(self, index: int, current: Any, requested: Any):
        self.index = index
        self.current = current
        self.requested = requested
        super().__init__(
            f"Tournament {index} cannot move from {current} to {requested}"
        )


class ToyDomainError(ScyDomainError):
    """Base exception for the toy prediction domain."""


class LengthMismatch(ToyDomainError):
    """Raised when predictions and truth differ in length."""

    def __init__(self, predictions: int, truth: int):
        self.predictions = predictions
        self.truth = truth
        super().__init__(
            f"{predictions} predictions cannot be scored "
            f"against {truth} outcomes"
        )


class EmptyTruth(ToyDomainError):
    """Raised when a metric is asked of an empty truth list."""

    def __init__(self):
        super().__init__("Truth list is empty")


class EmptyDataset(ToyDomainError):
    """Raised when a dataset of no samples is requested."""

    def __init__(self, size: int):
        self.size = size
        super().__init__(f"Dataset size must be at least 1, got {size}")


class ScenarioError(ScyDomainError):
    """Raised when a scenario script is malformed."""

    def __init__(self, reason: str, source: str | None = None):
        self.reason = reason
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(f"{where}{reason}")


class UnknownTarget(ScyDomainError):
    """Raised when a fault names a node or account that does not exist."""

    def __init__(self, target: str):
        self.target = target
        super().__init__(f"Unknown fault target '{target}'")


class InvariantViolation(ScyDomainError):
    """Raised when a run breaks a protocol invariant."""

    def __init__(self, invariant: str, detail: str):
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"Invariant '{invariant}' violated: {detail}")


class UsageError(ScyDomainError):
    """Base exception for command-line usage errors."""


class ArgumentTypeError(UsageError):
    """Raised when an argument value can't be converted to expected type."""

    def __init__(self, value: Any, expected_type: type, msg: str | None = None):
        self.value = value
        self.expected_type = expected_type
        super().__init__(
            msg or f"Cannot convert '{value}' to {expected_type.__name__}"
        )


class InvalidChoiceError(UsageError):
    """Raised when an argument value is not among the allowed choices."""

    def __init__(self, arg_name: str, value: Any, choices: list[Any]):
        self.arg_name = arg_name
        self.value = value
        self.choices = choices
        choices_str = ", ".join(repr(c) for c in choices)
        super().__init__(
            f"Invalid choice: '{value}' for '{arg_name}'. "
            f"(choose from {choices_str})"
        )


class MissingRequiredArgumentError(UsageError):
    """Raised when a required argument is not provided."""

    def __init__(self, arg_name: str):
        self.arg_name = arg_name
        super().__init__(f"Required argument '{arg_name}' is missing")


class TooFewArgumentsError(UsageError):
    """Raised when too few values are provided for an argument."""

    def __init__(self, arg_name: str, min_expected: int, received: int):
        self.arg_name = arg_name
        self.min_expected = min_expected
        self.received = received
        super().__init__(
            f"Too few arguments for '{arg_name}': "
            f"expected at least {min_expected}, got {received}"
        )


class UnknownArgumentError(UsageError):
    """Raised when an unknown argument is encountered."""

    def __init__(self, arg_name: str):
        self.arg_name = arg_name
        super().__init__(f"Unknown argument '{arg_name}'")


class UnknownCommandError(UsageError):
    """Raised when the command word names no registered command."""

    def __init__(self, command: str, commands: list[str]):
        self.command = command
        self.commands = commands
        super().__init__(
            f"Unknown command '{command}' (choose from {', '.join(commands)})"
        )
