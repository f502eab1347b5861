"""Replicated application state and the passage of time."""

import copy
import dataclasses
import logging
from collections.abc import Mapping

from scydomain import ledger, tournament
from scydomain.config import ValidatedConfig
from scydomain.consensus import selection_seed
from scydomain.crypto import canonical_digest
from scydomain.ledger import LedgerState
from scydomain.tournament import AgentEntry, Mark, TournamentState
from scydomain.types_ import (
    AccountId,
    ListingKind,
    PaymentScheme,
    Phase,
    Timestamp,
    TokenAmount,
)

__all__ = [
    "AppState",
    "DataOffering",
    "Listing",
    "advance_clock",
    "genesis_state",
]

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class DataOffering:
    """Data a provider intends to sell."""

    owner: AccountId
    params: bytes


@dataclasses.dataclass
class Listing:
    """A price published for an agent or a data offering."""

    kind: ListingKind
    owner: AccountId
    scheme: PaymentScheme
    price: TokenAmount


@dataclasses.dataclass
class AppState:
    """Everything a block changes, identical on every honest node."""

    config: ValidatedConfig = dataclasses.field(
        metadata={"canonical": False}, repr=False
    )
    ledger: LedgerState
    verify_keys: dict[AccountId, bytes]
    sequences: dict[AccountId, int] = dataclasses.field(default_factory=dict)
    agents: dict[bytes, AgentEntry] = dataclasses.field(default_factory=dict)
    data_offerings: dict[bytes, DataOffering] = dataclasses.field(
        default_factory=dict
    )
    listings: dict[bytes, Listing] = dataclasses.field(default_factory=dict)
    # Agents that appeared in a published ranking, with their owner.
    validated_agents: dict[bytes, AccountId] = dataclasses.field(
        default_factory=dict
    )
    tournaments: dict[int, TournamentState] = dataclasses.field(
        default_factory=dict
    )
    height: int = 0
    tip: bytes = b""
    clock: Timestamp = 0

    def clone(self) -> "AppState":
        """Deep copy sharing only the immutable config."""
        return copy.deepcopy(self, {id(self.config): self.config})

    def digest(self) -> bytes:
        """Canonical digest of the replicated state."""
        return canonical_digest(self)

    def tournament(self, index: int) -> TournamentState:
        """The tournament at an index, created pending if unseen."""
        if index not in self.tournaments:
            self.tournaments[index] = TournamentState(index=index)
        return self.tournaments[index]

    def next_sequence(self, account: AccountId) -> int:
        """Sequence number the account's next transaction must carry."""
        return self.sequences.get(account, 0) + 1

    def resolution_target(self, now: Timestamp) -> TournamentState | None:
        """Oldest ended tournament whose reveal window has closed."""
        tolerance = self.config.time_tolerance
        for index in sorted(self.tournaments):
            t = self.tournaments[index]
            _, end = self.config.tournament_window(index)
            if t.phase is Phase.AWAITING_REVEALS and end + tolerance < now:
                return t
        return None

    def overdue(self, now: Timestamp) -> list[int]:
        """Ended tournaments still unresolved past the proposer deadline."""
        deadline = self.config.proposer_deadline
        return [
            index
            for index, t in sorted(self.tournaments.items())
            if t.phase is Phase.AWAITING_REVEALS
            and self.config.tournament_window(index)[1] + deadline < now
        ]


def genesis_state(
    cfg: ValidatedConfig,
    allocations: Mapping[AccountId, TokenAmount],
    stakes: Mapping[AccountId, tuple[TokenAmount, Timestamp]],
    verify_keys: Mapping[AccountId, bytes],
    start_time: Timestamp,
) -> AppState:
    """Initial state of a domain chain.

    Args:
        cfg (ValidatedConfig): Domain configuration.
        allocations (Mapping[AccountId, TokenAmount]): Initial tokens.
        stakes (Mapping[AccountId, tuple[TokenAmount, Timestamp]]): Genesis
            stakes and their coin-age start.
        verify_keys (Mapping[AccountId, bytes]): Registered verification
            key of every account.
        start_time (Timestamp): Clock of the genesis state.

    Returns:
        AppState: State at height 0 whose tip is its own digest.

    Raises:
        InsufficientAllocation: If a stake exceeds its allocation.
    """
    state = AppState(
        config=cfg,
        ledger=ledger.genesis(allocations, stakes),
        verify_keys=dict(verify_keys),
        clock=start_time,
    )
    state.tip = state.digest()
    return state


def advance_clock(
    state: AppState, now: Timestamp, blobs: Mapping[bytes, bytes]
) -> list[Mark]:
    """Apply every scheduled event in ``(state.clock, now]`` in place.

    Tournament boundaries come first: the ended tournament stops taking
    signals, reward pools rotate and the new tournament begins with a
    challenger selection seeded by the chain tip. Then every deadline in
    ``[state.clock, now)`` is swept for missing submissions and reveals.

    Args:
        state (AppState): State to advance; mutated.
        now (Timestamp): Timestamp of the block being applied.
        blobs (Mapping[bytes, bytes]): Content store for dataset checks.

    Returns:
        list[Mark]: Disqualifications raised by the sweeps.
    """
    cfg = state.config
    prev = state.clock
    first = cfg.tournament_index_at(prev) + 1
    for index in range(first, cfg.tournament_index_at(now) + 1):
        ended = state.tournaments.get(index - 1)
        if ended is not None and ended.phase is Phase.ACTIVE:
            tournament.end_tournament(ended)
        lock = index - 1 if ended is not None and ended.begun else None
        state.ledger = ledger.rotate_pools(state.ledger, lock)
        start, _ = cfg.tournament_window(index)
        seed = selection_seed(state.tip, state.height + 1, "challenger")
        tournament.begin_tournament(
            state.tournament(index),
            cfg,
            ledger.powers(state.ledger, start),
            seed,
        )
    marks: list[Mark] = []
    for index in sorted(state.tournaments):
        marks += tournament.sweep_deadlines(
            state.tournaments[index], cfg, prev, now, blobs
        )
    state.clock = now
    return marks
