"""The ten transaction kinds: wire form, validity rules and effects.

Every kind has a handler that checks the transaction against the state
without touching it and returns an Effect. Calling the effect commits the
change. A transaction that fails a check raises a TransactionError and
leaves the state exactly as it was.
"""

import dataclasses
import json
import logging
import struct
import typing
from collections.abc import Callable, Mapping
from fractions import Fraction
from typing import Any, ClassVar

from scydomain import exceptions, ledger, tournament
from scydomain.app_state import AppState, DataOffering, Listing
from scydomain.config import ValidatedConfig
from scydomain.crypto import (
    KEY_SIZE,
    KeyPair,
    SealedEnvelope,
    SignalPayload,
    canonical_bytes,
    digest,
    hex_bytes,
    open_envelope,
    verify,
)
from scydomain.toy_domain import TruthStream
from scydomain.tournament import AgentEntry, Mark, RankingEntry
from scydomain.types_ import (
    AccountId,
    DisqualificationReason,
    ListingKind,
    PaymentScheme,
    Phase,
    ProblemType,
    Timestamp,
    TokenAmount,
    TxKind,
)

__all__ = [
    "HANDLERS",
    "UUID_SIZE",
    "ApplyContext",
    "Effects",
    "PublishAgentPrice",
    "PublishDataPrice",
    "PublishDataset",
    "PublishDatasetDecryptionKey",
    "PublishSignalDecryptionKey",
    "PublishTournamentRanking",
    "Rent",
    "Resolution",
    "SubmitAgent",
    "SubmitSignal",
    "TournamentFailure",
    "Transaction",
    "TxBody",
    "apply_in_place",
    "apply_transaction",
    "check_transaction",
    "sign_transaction",
]

logger = logging.getLogger(__name__)

UUID_SIZE = 16
SIGNATURE_SIZE = 64
_LENGTH = struct.Struct(">I")


def _require_size(name: str, value: bytes, size: int) -> None:
    if not isinstance(value, bytes) or len(value) != size:
        raise exceptions.WireFormatError(name, f"must be {size} bytes")


def _require_amount(name: str, value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise exceptions.WireFormatError(name, "must be an unsigned integer")


@dataclasses.dataclass(frozen=True)
class SubmitAgent:
    """Register an agent for the next tournament."""

    kind: ClassVar[TxKind] = TxKind.SUBMIT_AGENT
    uuid: bytes

    def __post_init__(self) -> None:
        _require_size("uuid", self.uuid, UUID_SIZE)


@dataclasses.dataclass(frozen=True)
class PublishDataset:
    """A challenger's dataset inputs and sealed outputs, by reference."""

    kind: ClassVar[TxKind] = TxKind.PUBLISH_DATASET
    inputs_ref: bytes
    inputs_hash: bytes
    signals_ref: bytes
    signals_hash: bytes

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            _require_size(f.name, getattr(self, f.name), 32)


@dataclasses.dataclass(frozen=True)
class SubmitSignal:
    """A sealed agent signal; ``tick`` is None in dataset domains."""

    kind: ClassVar[TxKind] = TxKind.SUBMIT_SIGNAL
    agent_uuid: bytes
    envelope: SealedEnvelope
    tick: Timestamp | None = None

    def __post_init__(self) -> None:
        _require_size("agent_uuid", self.agent_uuid, UUID_SIZE)


@dataclasses.dataclass(frozen=True)
class PublishDatasetDecryptionKey:
    """A challenger's key to its sealed dataset outputs."""

    kind: ClassVar[TxKind] = TxKind.PUBLISH_DATASET_DECRYPTION_KEY
    key: bytes


@dataclasses.dataclass(frozen=True)
class PublishSignalDecryptionKey:
    """A miner's key to an earlier signal.

    In real-time domains ``tick`` is the tick of the reveal; the key opens
    the signal committed one real-time frequency earlier.
    """

    kind: ClassVar[TxKind] = TxKind.PUBLISH_SIGNAL_DECRYPTION_KEY
    agent_uuid: bytes
    key: bytes
    tick: Timestamp | None = None

    def __post_init__(self) -> None:
        _require_size("agent_uuid", self.agent_uuid, UUID_SIZE)


@dataclasses.dataclass(frozen=True)
class PublishTournamentRanking:
    """The block creator's ranking of the oldest resolvable tournament."""

    kind: ClassVar[TxKind] = TxKind.PUBLISH_TOURNAMENT_RANKING
    ranking: tuple[RankingEntry, ...]


@dataclasses.dataclass(frozen=True)
class TournamentFailure:
    """Declare the oldest resolvable tournament failed."""

    kind: ClassVar[TxKind] = TxKind.TOURNAMENT_FAILURE


@dataclasses.dataclass(frozen=True)
class PublishAgentPrice:
    """Offer a validated agent for rent."""

    kind: ClassVar[TxKind] = TxKind.PUBLISH_AGENT_PRICE
    agent_uuid: bytes
    scheme: PaymentScheme
    price: TokenAmount

    def __post_init__(self) -> None:
        _require_size("agent_uuid", self.agent_uuid, UUID_SIZE)
        _require_amount("price", self.price)


@dataclasses.dataclass(frozen=True)
class PublishDataPrice:
    """Offer data for sale under a fresh UUID."""

    kind: ClassVar[TxKind] = TxKind.PUBLISH_DATA_PRICE
    data_uuid: bytes
    data_params: bytes
    scheme: PaymentScheme
    price: TokenAmount

    def __post_init__(self) -> None:
        _require_size("data_uuid", self.data_uuid, UUID_SIZE)
        _require_amount("price", self.price)


@dataclasses.dataclass(frozen=True)
class Rent:
    """Pay for a listed agent or data offering."""

    kind: ClassVar[TxKind] = TxKind.RENT
    uuid: bytes
    quantity: int

    def __post_init__(self) -> None:
        _require_size("uuid", self.uuid, UUID_SIZE)
        _require_amount("quantity", self.quantity)


TxBody = (
    SubmitAgent
    | PublishDataset
    | SubmitSignal
    | PublishDatasetDecryptionKey
    | PublishSignalDecryptionKey
    | PublishTournamentRanking
    | TournamentFailure
    | PublishAgentPrice
    | PublishDataPrice
    | Rent
)

BODY_TYPES: dict[TxKind, type] = {
    body.kind: body for body in typing.get_args(TxBody)
}


def _decode_value(raw: Any, hint: Any) -> Any:
    if hint is bytes:
        return hex_bytes(raw)
    if hint is int:
        if not isinstance(raw, int) or isinstance(raw, bool):
            raise ValueError(f"expected an integer, got {raw!r}")
        return raw
    if hint == (Timestamp | None):
        return None if raw is None else _decode_value(raw, int)
    if hint is PaymentScheme:
        return PaymentScheme(raw)
    if hint is SealedEnvelope:
        return SealedEnvelope(
            nonce=hex_bytes(raw["nonce"]),
            ciphertext=hex_bytes(raw["ciphertext"]),
            commit_hash=hex_bytes(raw["commit_hash"]),
        )
    if hint == tuple[RankingEntry, ...]:
        return tuple(
            RankingEntry(
                uuid=hex_bytes(e["uuid"]),
                score=Fraction(*_decode_value(e["score"], list)),
            )
            for e in raw
        )
    if hint is list:
        if not isinstance(raw, list) or len(raw) != 2:
            raise ValueError(f"expected a [num, den] pair, got {raw!r}")
        return [_decode_value(x, int) for x in raw]
    raise ValueError(f"no decoder for {hint!r}")


def _decode_body(kind: TxKind, raw: Any) -> TxBody:
    body_type = BODY_TYPES[kind]
    hints = typing.get_type_hints(body_type)
    fields = [f.name for f in dataclasses.fields(body_type)]
    if not isinstance(raw, dict) or set(raw) != set(fields):
        raise ValueError(f"fields of {kind.label} must be {sorted(fields)}")
    return body_type(**{
        name: _decode_value(raw[name], hints[name]) for name in fields
    })


@dataclasses.dataclass(frozen=True)
class Transaction:
    """A signed, sequence-numbered transaction.

    Wire form: kind byte, length-prefixed canonical JSON of
    ``{sender, sequence, body}``, then the 64-byte Ed25519 signature over
    the kind byte and the canonical JSON.
    """

    sender: AccountId
    sequence: int
    body: TxBody
    signature: bytes = b""

    @property
    def kind(self) -> TxKind:
        """Kind tag of the body."""
        return self.body.kind

    def _content(self) -> bytes:
        return canonical_bytes({
            "sender": self.sender,
            "sequence": self.sequence,
            "body": self.body,
        })

    def signing_bytes(self) -> bytes:
        """Bytes the signature covers."""
        return bytes([self.kind]) + self._content()

    def to_wire(self) -> bytes:
        """Encode for gossip and blocks."""
        content = self._content()
        return (
            bytes([self.kind])
            + _LENGTH.pack(len(content))
            + content
            + self.signature
        )

    @property
    def digest(self) -> bytes:
        """Digest of the wire form."""
        return digest(self.to_wire())

    @classmethod
    def from_wire(cls, data: bytes) -> "Transaction":
        """Decode a wire-form transaction.

        Raises:
            WireFormatError: If the bytes are not a transaction.
        """
        header = 1 + _LENGTH.size
        if len(data) < header + SIGNATURE_SIZE:
            raise exceptions.WireFormatError("transaction", "truncated")
        try:
            kind = TxKind(data[0])
        except ValueError as e:
            raise exceptions.WireFormatError("transaction", str(e)) from e
        (length,) = _LENGTH.unpack_from(data, 1)
        if header + length + SIGNATURE_SIZE != len(data):
            raise exceptions.WireFormatError("transaction", "bad length")
        try:
            raw = json.loads(data[header : header + length])
            tx = cls(
                sender=hex_bytes(raw["sender"]),
                sequence=_decode_value(raw["sequence"], int),
                body=_decode_body(kind, raw["body"]),
                signature=data[header + length :],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise exceptions.WireFormatError("transaction", str(e)) from e
        return tx


def sign_transaction(keys: KeyPair, sequence: int, body: TxBody) -> Transaction:
    """Build and sign a transaction from a key pair."""
    unsigned = Transaction(sender=keys.account, sequence=sequence, body=body)
    return dataclasses.replace(
        unsigned, signature=keys.sign(unsigned.signing_bytes())
    )


@dataclasses.dataclass(frozen=True)
class ApplyContext:
    """What a transaction is checked against besides the state.

    ``now`` is the block timestamp, or the node clock at mempool
    admission. ``proposer`` is the block creator, None outside blocks.
    """

    now: Timestamp
    proposer: AccountId | None = None
    truth: TruthStream | None = None
    blobs: Mapping[bytes, bytes] = dataclasses.field(default_factory=dict)


@dataclasses.dataclass(frozen=True)
class Resolution:
    """How a tournament was closed and who was paid."""

    index: int
    phase: Phase
    ranking: tuple[RankingEntry, ...]
    payments: tuple[tuple[AccountId, TokenAmount], ...]


@dataclasses.dataclass
class Effects:
    """Side results of applying transactions, for logs and reports."""

    marks: list[Mark] = dataclasses.field(default_factory=list)
    resolutions: list[Resolution] = dataclasses.field(default_factory=list)


Effect = Callable[[Effects], None]
Handler = Callable[[AppState, Transaction, ApplyContext], Effect]


def _charge(
    state: AppState, account: AccountId, fee: TokenAmount, now: Timestamp
) -> tuple[ledger.LedgerState, int]:
    # A fee paid during tournament i funds tournament i + 1.
    charged = ledger.charge_fee(state.ledger, account, fee)
    return charged, state.config.tournament_index_at(now) + 1


def _commit_fee(
    state: AppState,
    charged: ledger.LedgerState,
    index: int,
    account: AccountId,
    fee: TokenAmount,
) -> None:
    state.ledger = charged
    if fee:
        state.tournament(index).fee_receipts.append((account, fee))


def _require_dataset(cfg: ValidatedConfig) -> None:
    if cfg.problem_type is not ProblemType.DATASET:
        raise exceptions.WrongProblemType("dataset domains only")


def apply_submit_agent(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """Register an agent for the next tournament and charge its fee.

    Raises:
        DuplicateUuid: If the UUID names an agent or a data offering.
        InsufficientBalance: If the sender cannot pay the fee.
    """
    body: SubmitAgent = tx.body
    if body.uuid in state.agents or body.uuid in state.data_offerings:
        raise exceptions.DuplicateUuid(body.uuid.hex())
    fee = state.config.agent_submission_fee
    charged, index = _charge(state, tx.sender, fee, ctx.now)

    def effect(out: Effects) -> None:
        _commit_fee(state, charged, index, tx.sender, fee)
        entry = AgentEntry(
            owner=tx.sender, registered_at=ctx.now, tournament=index
        )
        state.agents[body.uuid] = entry
        state.tournament(index).participants[body.uuid] = entry

    return effect


def apply_publish_dataset(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """Record a selected challenger's dataset.

    Raises:
        WrongProblemType: Outside dataset domains.
        NotAChallenger: If the sender is not a challenger of the running
            tournament.
        Disqualified: If the challenger is already disqualified.
        DeadlinePassed: After the submission deadline plus tolerance.
        AlreadySubmitted: If the challenger already published.
    """
    cfg = state.config
    _require_dataset(cfg)
    body: PublishDataset = tx.body
    index = cfg.tournament_index_at(ctx.now)
    t = state.tournaments.get(index)
    if t is None or t.phase is not Phase.ACTIVE or not t.is_challenger(
        tx.sender
    ):
        raise exceptions.NotAChallenger(f"tournament {index}")
    if tx.sender in t.disqualified_challengers:
        raise exceptions.Disqualified(f"tournament {index}")
    start, _ = cfg.tournament_window(index)
    deadline = start + cfg.dataset_submission_deadline
    if ctx.now > deadline + cfg.time_tolerance:
        raise exceptions.DeadlinePassed(f"deadline was {deadline}")
    if tx.sender in t.datasets:
        raise exceptions.AlreadySubmitted(f"tournament {index}")

    def effect(out: Effects) -> None:
        t.datasets[tx.sender] = tournament.DatasetRecord(
            inputs_ref=body.inputs_ref,
            inputs_hash=body.inputs_hash,
            signals_ref=body.signals_ref,
            signals_hash=body.signals_hash,
            submitted_at=ctx.now,
        )

    return effect


def _owned_agent(state: AppState, tx: Transaction, uuid: bytes) -> AgentEntry:
    agent = state.agents.get(uuid)
    if agent is None:
        raise exceptions.UnknownAgent(uuid.hex())
    if agent.owner != tx.sender:
        raise exceptions.NotOwner(uuid.hex())
    return agent


def _in_tournament(cfg: ValidatedConfig, index: int, tick: Timestamp) -> bool:
    start, end = cfg.tournament_window(index)
    return start <= tick < end and tick % cfg.real_time_frequency == 0


def apply_submit_signal(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """Store a sealed signal for an agent's tick or dataset tournament.

    Raises:
        UnknownAgent: If the agent is not registered.
        NotOwner: If the agent belongs to someone else.
        WrongProblemType: If ``tick`` does not match the domain type.
        NotParticipating: If the tick or tournament is not the agent's.
        OutsideTolerance: If a real-time signal misses its tick.
        DuplicateSignal: If the slot already holds a signal.
    """
    cfg = state.config
    body: SubmitSignal = tx.body
    agent = _owned_agent(state, tx, body.agent_uuid)
    t = state.tournament(agent.tournament)
    if cfg.problem_type is ProblemType.REAL_TIME:
        if body.tick is None:
            raise exceptions.WrongProblemType("real-time signals need a tick")
        if not _in_tournament(cfg, agent.tournament, body.tick):
            raise exceptions.NotParticipating(f"tick {body.tick}")
        if not cfg.within_tolerance(body.tick, ctx.now):
            raise exceptions.OutsideTolerance(f"tick {body.tick}")
    else:
        if body.tick is not None:
            raise exceptions.WrongProblemType("dataset signals have no tick")
        if t.phase is not Phase.ACTIVE:
            raise exceptions.NotParticipating(f"tournament {t.index}")
    slot = (body.agent_uuid, body.tick)
    if slot in t.signals:
        raise exceptions.DuplicateSignal(f"tick {body.tick}")

    def effect(out: Effects) -> None:
        t.signals[slot] = tournament.SignalRecord(
            envelope=body.envelope, owner=tx.sender, submitted_at=ctx.now
        )

    return effect


def apply_publish_dataset_decryption_key(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """Store a challenger's output key for the tournament ending now.

    Raises:
        WrongProblemType: Outside dataset domains.
        NotAChallenger: If the sender is not a challenger of the
            tournament whose end is nearest.
        Disqualified: If the challenger is already disqualified.
        OutsideTolerance: If the end is not within tolerance.
        AlreadyRevealed: If the key was already published.
        DecryptFailed: If the key is not 32 bytes long.
    """
    cfg = state.config
    _require_dataset(cfg)
    body: PublishDatasetDecryptionKey = tx.body
    frequency = cfg.tournament_start_frequency
    index = (ctx.now + frequency // 2) // frequency - 1
    t = state.tournaments.get(index)
    if t is None or not t.is_challenger(tx.sender):
        raise exceptions.NotAChallenger(f"tournament {index}")
    if tx.sender in t.disqualified_challengers:
        raise exceptions.Disqualified(f"tournament {index}")
    _, end = cfg.tournament_window(index)
    if not cfg.within_tolerance(end, ctx.now):
        raise exceptions.OutsideTolerance(f"tournament end {end}")
    record = t.datasets.get(tx.sender)
    if record is None:
        raise exceptions.UnknownSignal(f"no dataset in tournament {index}")
    if record.key is not None:
        raise exceptions.AlreadyRevealed(f"tournament {index}")
    if len(body.key) != KEY_SIZE:
        raise exceptions.DecryptFailed(f"key must be {KEY_SIZE} bytes")

    def effect(out: Effects) -> None:
        record.key = body.key

    return effect


def apply_publish_signal_decryption_key(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """Open a committed signal with its revealed key.

    A key that opens the envelope but contradicts its commitment, or a
    payload naming another author, is accepted and disqualifies the
    sender, so the evidence lands on chain.

    Raises:
        UnknownAgent: If the agent is not registered.
        NotOwner: If the agent belongs to someone else.
        Disqualified: If the owner is already disqualified.
        WrongProblemType: If ``tick`` does not match the domain type.
        NotParticipating: If the revealed tick is not the agent's.
        OutsideTolerance: If the reveal misses its tick or the end.
        UnknownSignal: If nothing was committed for the slot.
        AlreadyRevealed: If the slot was already opened.
        KeyReused: If the key opened a different envelope this tournament.
        DecryptFailed: If the key does not open the envelope.
    """
    cfg = state.config
    body: PublishSignalDecryptionKey = tx.body
    agent = _owned_agent(state, tx, body.agent_uuid)
    t = state.tournament(agent.tournament)
    if tx.sender in t.disqualified_miners:
        raise exceptions.Disqualified(f"tournament {t.index}")
    if cfg.problem_type is ProblemType.REAL_TIME:
        if body.tick is None:
            raise exceptions.WrongProblemType("real-time reveals need a tick")
        committed = body.tick - cfg.real_time_frequency
        if not _in_tournament(cfg, agent.tournament, committed):
            raise exceptions.NotParticipating(f"tick {committed}")
        if not cfg.within_tolerance(body.tick, ctx.now):
            raise exceptions.OutsideTolerance(f"tick {body.tick}")
    else:
        if body.tick is not None:
            raise exceptions.WrongProblemType("dataset reveals have no tick")
        committed = None
        _, end = cfg.tournament_window(agent.tournament)
        if not cfg.within_tolerance(end, ctx.now):
            raise exceptions.OutsideTolerance(f"tournament end {end}")
    record = t.signals.get((body.agent_uuid, committed))
    if record is None:
        raise exceptions.UnknownSignal(f"tick {committed}")
    if record.key is not None:
        raise exceptions.AlreadyRevealed(f"tick {committed}")
    envelope_id = digest(record.envelope.to_wire())
    prior = t.used_keys.get(body.key)
    if prior is not None and prior != envelope_id:
        raise exceptions.KeyReused(f"tournament {t.index}")
    reason = None
    signal = None
    try:
        payload = SignalPayload.from_bytes(
            open_envelope(record.envelope, body.key)
        )
        if payload.author_key != state.verify_keys.get(tx.sender):
            reason = DisqualificationReason.AUTHOR_MISMATCH
        else:
            signal = payload.signal
    except exceptions.CommitMismatch:
        reason = DisqualificationReason.BAD_COMMIT
    except exceptions.WireFormatError:
        reason = DisqualificationReason.AUTHOR_MISMATCH

    def effect(out: Effects) -> None:
        record.key = body.key
        record.signal = signal
        t.used_keys[body.key] = envelope_id
        if reason is not None:
            mark = t.disqualify(tx.sender, reason)
            if mark is not None:
                out.marks.append(mark)

    return effect


def _target(
    state: AppState, ctx: ApplyContext, settled: type[Exception]
) -> tournament.TournamentState:
    target = state.resolution_target(ctx.now)
    if target is not None:
        return target
    if any(t.begun and not t.phase.closed for t in state.tournaments.values()):
        raise exceptions.TournamentNotEnded()
    if any(t.phase.closed for t in state.tournaments.values()):
        raise settled()
    raise exceptions.TournamentNotEnded()


def _require_creator(tx: Transaction, ctx: ApplyContext) -> None:
    if ctx.proposer is None or tx.sender != ctx.proposer:
        raise exceptions.NotBlockCreator()


def apply_publish_tournament_ranking(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """Close the oldest resolvable tournament with a ranking and pay it.

    Raises:
        NotBlockCreator: If the sender is not the block's proposer.
        TournamentNotEnded: If no ended tournament's reveals are final.
        AlreadyRanked: If every ended tournament is already resolved.
        TournamentFailed: If the tournament meets the failure condition.
        RankingMismatch: If the ranking differs from the local one.
    """
    _require_creator(tx, ctx)
    body: PublishTournamentRanking = tx.body
    t = _target(state, ctx, exceptions.AlreadyRanked)
    if tournament.check_failure(t):
        raise exceptions.TournamentFailed(f"tournament {t.index}")
    local = tournament.compute_local_ranking(t, state.config, ctx.truth)
    if canonical_bytes(local) != canonical_bytes(body.ranking):
        raise exceptions.RankingMismatch(f"tournament {t.index}")

    def effect(out: Effects) -> None:
        state.ledger, payments = tournament.resolve_with_ranking(
            state.ledger, t, local, state.config
        )
        for entry in local:
            state.validated_agents[entry.uuid] = t.participants[
                entry.uuid
            ].owner
        out.resolutions.append(
            Resolution(t.index, t.phase, local, tuple(payments))
        )

    return effect


def apply_tournament_failure(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """Declare the oldest resolvable tournament failed and refund its fees.

    Raises:
        NotBlockCreator: If the sender is not the block's proposer.
        TournamentNotEnded: If no ended tournament's reveals are final.
        AlreadyResolved: If every ended tournament is already resolved.
        NotFailed: If the tournament does not meet the failure condition.
    """
    _require_creator(tx, ctx)
    t = _target(state, ctx, exceptions.AlreadyResolved)
    if not tournament.check_failure(t):
        raise exceptions.NotFailed(f"tournament {t.index}")

    def effect(out: Effects) -> None:
        state.ledger, refunds = tournament.resolve_with_failure(
            state.ledger, t
        )
        out.resolutions.append(Resolution(t.index, t.phase, (), tuple(refunds)))

    return effect


def _listing_effect(
    state: AppState,
    tx: Transaction,
    ctx: ApplyContext,
    fee: TokenAmount,
    commit: Callable[[], None],
) -> Effect:
    charged, index = _charge(state, tx.sender, fee, ctx.now)

    def effect(out: Effects) -> None:
        _commit_fee(state, charged, index, tx.sender, fee)
        commit()

    return effect


def apply_publish_agent_price(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """List a validated agent for rent.

    Raises:
        AgentNotValidated: If the sender's agent was never ranked.
        InsufficientBalance: If the sender cannot pay the fee.
    """
    body: PublishAgentPrice = tx.body
    if state.validated_agents.get(body.agent_uuid) != tx.sender:
        raise exceptions.AgentNotValidated(body.agent_uuid.hex())

    def commit() -> None:
        state.listings[body.agent_uuid] = Listing(
            kind=ListingKind.AGENT,
            owner=tx.sender,
            scheme=body.scheme,
            price=body.price,
        )

    return _listing_effect(
        state, tx, ctx, state.config.price_publish_fee, commit
    )


def apply_publish_data_price(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """Publish a data offering under a fresh UUID.

    Raises:
        DuplicateUuid: If the UUID names an agent or a data offering.
        InsufficientBalance: If the sender cannot pay the fee.
    """
    body: PublishDataPrice = tx.body
    if body.data_uuid in state.agents or body.data_uuid in state.data_offerings:
        raise exceptions.DuplicateUuid(body.data_uuid.hex())

    def commit() -> None:
        state.data_offerings[body.data_uuid] = DataOffering(
            owner=tx.sender, params=body.data_params
        )
        state.listings[body.data_uuid] = Listing(
            kind=ListingKind.DATA,
            owner=tx.sender,
            scheme=body.scheme,
            price=body.price,
        )

    return _listing_effect(
        state, tx, ctx, state.config.data_publish_fee, commit
    )


def apply_rent(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> Effect:
    """Pay a listing's owner and the rent fee.

    Raises:
        UnknownListing: If nothing is listed under the UUID.
        QuantityInvalid: If the quantity is zero, or not one for a buyout.
        InsufficientBalance: If the sender cannot pay price and fee.
    """
    body: Rent = tx.body
    listing = state.listings.get(body.uuid)
    if listing is None:
        raise exceptions.UnknownListing(body.uuid.hex())
    if body.quantity < 1:
        raise exceptions.QuantityInvalid("quantity must be at least 1")
    if listing.scheme is PaymentScheme.BUYOUT and body.quantity != 1:
        raise exceptions.QuantityInvalid("a buyout has quantity 1")
    cost = body.quantity * listing.price
    fee = state.config.rent_fee
    held = state.ledger.balance(tx.sender)
    if held < cost + fee:
        raise exceptions.InsufficientBalance(tx.sender, held, cost + fee)
    paid = ledger.transfer(state.ledger, tx.sender, listing.owner, cost)
    charged = ledger.charge_fee(paid, tx.sender, fee)
    index = state.config.tournament_index_at(ctx.now) + 1

    def effect(out: Effects) -> None:
        _commit_fee(state, charged, index, tx.sender, fee)

    return effect


HANDLERS: dict[TxKind, Handler] = {
    TxKind.SUBMIT_AGENT: apply_submit_agent,
    TxKind.PUBLISH_DATASET: apply_publish_dataset,
    TxKind.SUBMIT_SIGNAL: apply_submit_signal,
    TxKind.PUBLISH_DATASET_DECRYPTION_KEY: (
        apply_publish_dataset_decryption_key
    ),
    TxKind.PUBLISH_SIGNAL_DECRYPTION_KEY: apply_publish_signal_decryption_key,
    TxKind.PUBLISH_TOURNAMENT_RANKING: apply_publish_tournament_ranking,
    TxKind.TOURNAMENT_FAILURE: apply_tournament_failure,
    TxKind.PUBLISH_AGENT_PRICE: apply_publish_agent_price,
    TxKind.PUBLISH_DATA_PRICE: apply_publish_data_price,
    TxKind.RENT: apply_rent,
}


def check_transaction(
    state: AppState,
    tx: Transaction,
    ctx: ApplyContext,
    *,
    expected_sequence: int | None = None,
) -> Effect:
    """Validate a transaction and return the effect that would apply it.

    Args:
        state (AppState): State to check against; not modified.
        tx (Transaction): The transaction.
        ctx (ApplyContext): Time, proposer, truth and blob store.
        expected_sequence (int | None, optional): Sequence to require
            instead of the sender's next one, for transactions queued
            behind pooled ones. Defaults to None.

    Returns:
        Effect: Commits the transaction when called.

    Raises:
        TransactionError: The first validity rule the transaction breaks.
    """
    verify_key = state.verify_keys.get(tx.sender)
    if verify_key is None:
        raise exceptions.UnknownSender(tx.sender.hex()[:12])
    if not verify(tx.signature, tx.signing_bytes(), verify_key):
        raise exceptions.BadSignature()
    expected = expected_sequence or state.next_sequence(tx.sender)
    if tx.sequence != expected:
        raise exceptions.BadSequence(f"expected {expected}, got {tx.sequence}")
    effect = HANDLERS[tx.kind](state, tx, ctx)

    def sequenced(out: Effects) -> None:
        state.sequences[tx.sender] = tx.sequence
        effect(out)

    return sequenced


def apply_in_place(
    state: AppState, tx: Transaction, ctx: ApplyContext, out: Effects
) -> None:
    """Validate and apply a transaction, mutating the state.

    Raises:
        TransactionError: If the transaction is invalid; the state is
            untouched.
    """
    check_transaction(state, tx, ctx)(out)
    logger.debug(
        "Applied %s from %s seq %d",
        tx.kind.label,
        tx.sender.hex()[:12],
        tx.sequence,
    )


def apply_transaction(
    state: AppState, tx: Transaction, ctx: ApplyContext
) -> tuple[AppState, Effects]:
    """Apply a transaction to a copy of the state.

    Returns:
        tuple[AppState, Effects]: The new state and what the transaction
            caused.

    Raises:
        TransactionError: If the transaction is invalid.
    """
    new_state = state.clone()
    out = Effects()
    apply_in_place(new_state, tx, ctx, out)
    return new_state, out
