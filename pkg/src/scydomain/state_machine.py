"""A node's replicated application: mempool, blocks and role duties."""

import dataclasses
import functools
import json
import logging
import struct
from collections.abc import Iterable, Mapping, MutableMapping
from fractions import Fraction
from typing import Any

from scydomain import exceptions, toy_domain, tournament
from scydomain.app_state import AppState, advance_clock
from scydomain.consensus import select_proposer, selection_seed
from scydomain.crypto import (
    KeyPair,
    SealedEnvelope,
    SignalPayload,
    canonical_bytes,
    derive_bytes,
    digest,
    hex_bytes,
    seal,
    verify,
)
from scydomain.ledger import powers, reset_coin_age
from scydomain.toy_domain import ScriptedAgent, TruthStream
from scydomain.tournament import Mark
from scydomain.transactions import (
    ApplyContext,
    Effects,
    PublishDataset,
    PublishDatasetDecryptionKey,
    PublishSignalDecryptionKey,
    PublishTournamentRanking,
    SubmitAgent,
    SubmitSignal,
    TournamentFailure,
    Transaction,
    TxBody,
    apply_in_place,
    check_transaction,
    sign_transaction,
)
from scydomain.types_ import (
    AccountId,
    Behavior,
    DisqualificationReason,
    Phase,
    ProblemType,
    Timestamp,
    TxKind,
)

__all__ = [
    "AgentRole",
    "Block",
    "Node",
    "Rejection",
    "Vote",
    "act",
    "apply_block",
    "block_due",
    "cast_vote",
    "ingest_tx",
    "mark_misbehavior",
    "node_obligations",
    "propose_block",
    "proposer_at",
    "replay",
    "stale_own",
    "submit_own",
    "transition",
    "validate_block",
    "verify_vote",
]

logger = logging.getLogger(__name__)

_LENGTH = struct.Struct(">I")

DutyKey = tuple[Any, ...]


@dataclasses.dataclass(frozen=True)
class Block:
    """An ordered batch of transactions signed by its proposer."""

    height: int
    prev: bytes
    proposer: AccountId
    timestamp: Timestamp
    round: int
    txs: tuple[Transaction, ...]
    signature: bytes = b""

    def _content(self) -> bytes:
        return canonical_bytes({
            "height": self.height,
            "prev": self.prev,
            "proposer": self.proposer,
            "timestamp": self.timestamp,
            "round": self.round,
            "txs": [tx.to_wire() for tx in self.txs],
        })

    @property
    def digest(self) -> bytes:
        """Digest of everything but the signature."""
        return digest(self._content())

    def to_wire(self) -> bytes:
        """Length-prefixed canonical content followed by the signature."""
        content = self._content()
        return _LENGTH.pack(len(content)) + content + self.signature

    @classmethod
    def from_wire(cls, data: bytes) -> "Block":
        """Decode a wire-form block.

        Raises:
            WireFormatError: If the bytes are not a block.
        """
        if len(data) < _LENGTH.size:
            raise exceptions.WireFormatError("block", "truncated")
        (length,) = _LENGTH.unpack_from(data, 0)
        end = _LENGTH.size + length
        if end > len(data):
            raise exceptions.WireFormatError("block", "truncated")
        try:
            raw = json.loads(data[_LENGTH.size : end])
            return cls(
                height=raw["height"],
                prev=hex_bytes(raw["prev"]),
                proposer=hex_bytes(raw["proposer"]),
                timestamp=raw["timestamp"],
                round=raw["round"],
                txs=tuple(
                    Transaction.from_wire(hex_bytes(tx)) for tx in raw["txs"]
                ),
                signature=data[end:],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise exceptions.WireFormatError("block", str(e)) from e


@dataclasses.dataclass(frozen=True)
class Vote:
    """A node's signature over a block digest it validated."""

    block_digest: bytes
    voter: AccountId
    signature: bytes


@dataclasses.dataclass(frozen=True)
class Rejection:
    """A transaction a node refused, and why."""

    tx: Transaction
    code: str
    detail: str


@dataclasses.dataclass(frozen=True)
class AgentRole:
    """An agent a miner node runs and submits.

    Attributes:
        name (str): Scenario name of the agent.
        uuid (bytes): On-chain identity.
        policy (ScriptedAgent): How the agent answers.
        seed (bytes): Private seed of the agent's predictions.
        submit_at (Timestamp): When the miner submits it.
    """

    name: str
    uuid: bytes
    policy: ScriptedAgent
    seed: bytes
    submit_at: Timestamp


@dataclasses.dataclass
class Node:
    """One node of a domain network.

    The node's ``state`` only ever changes by applying committed blocks.
    Everything else it holds is local: its pool of pending transactions,
    the duties it has already acted on and the faults it was told to
    commit.
    """

    name: str
    keys: KeyPair
    seed: bytes
    state: AppState
    truth: TruthStream
    blobs: MutableMapping[bytes, bytes]
    block_interval: int
    agents: tuple[AgentRole, ...] = ()
    directory: Mapping[str, bytes] = dataclasses.field(default_factory=dict)
    dataset_size: int = 20
    dataset_balance: Fraction = Fraction(1, 2)
    honest: bool = True
    chain: list[Block] = dataclasses.field(default_factory=list)
    mempool: dict[bytes, Transaction] = dataclasses.field(default_factory=dict)
    included: set[bytes] = dataclasses.field(default_factory=set)
    local_disqualified: dict[
        tuple[int, AccountId, bool], DisqualificationReason
    ] = dataclasses.field(default_factory=dict)
    # Faults armed on this node.
    drop: set[TxKind] = dataclasses.field(default_factory=set)
    delay: dict[TxKind, int] = dataclasses.field(default_factory=dict)
    corrupt_dataset: bool = False
    withhold_ranking: bool = False
    leak_to: set[str] = dataclasses.field(default_factory=set)
    leaked: dict[tuple[int, AccountId], tuple[bool, ...]] = dataclasses.field(
        default_factory=dict
    )
    created: dict[DutyKey, bytes] = dataclasses.field(default_factory=dict)
    own: dict[bytes, tuple[DutyKey | None, Timestamp]] = dataclasses.field(
        default_factory=dict
    )
    datasets: dict[int, toy_domain.ToyDataset] = dataclasses.field(
        default_factory=dict
    )
    published_blobs: list[tuple[bytes, bytes]] = dataclasses.field(
        default_factory=list
    )
    validated: dict[bytes, tuple[AppState, Effects]] = dataclasses.field(
        default_factory=dict, repr=False
    )

    @property
    def account(self) -> AccountId:
        """Account id of the node's key pair."""
        return self.keys.account

    def pooled_from(self, sender: AccountId) -> list[Transaction]:
        """Pooled transactions of one sender in sequence order."""
        return sorted(
            (tx for tx in self.mempool.values() if tx.sender == sender),
            key=lambda tx: tx.sequence,
        )

    def context(
        self, now: Timestamp, proposer: AccountId | None = None
    ) -> ApplyContext:
        """Context for checking transactions at a given time."""
        return ApplyContext(
            now=now, proposer=proposer, truth=self.truth, blobs=self.blobs
        )


def proposer_at(state: AppState, now: Timestamp, round: int = 0) -> AccountId:
    """The proposer of the next block at a timestamp and round.

    Raises:
        NoEligibleProposer: If no account holds power.
    """
    seed = selection_seed(state.tip, state.height + 1, "proposer", round)
    return select_proposer(powers(state.ledger, now), seed)


def ingest_tx(node: Node, tx: Transaction, now: Timestamp) -> Rejection | None:
    """Admit a transaction to the mempool if it is currently valid.

    A transaction already pooled or already on chain is ignored. Pooled
    transactions of one sender must carry consecutive sequence numbers.

    Args:
        node (Node): The receiving node; its mempool is updated.
        tx (Transaction): The transaction.
        now (Timestamp): The node's clock.

    Returns:
        Rejection | None: Why the transaction was dropped, or None if it
            was admitted or already known.
    """
    tx_digest = tx.digest
    if tx_digest in node.mempool or tx_digest in node.included:
        return None
    expected = node.state.next_sequence(tx.sender) + len(
        node.pooled_from(tx.sender)
    )
    try:
        check_transaction(
            node.state, tx, node.context(now), expected_sequence=expected
        )
    except exceptions.TransactionError as e:
        logger.debug(
            "%s dropped %s from %s: %s",
            node.name,
            tx.kind.label,
            tx.sender.hex()[:12],
            e,
        )
        return Rejection(tx=tx, code=e.code, detail=e.detail)
    node.mempool[tx_digest] = tx
    return None


def _ranked_order(mempool: Mapping[bytes, Transaction]) -> list[Transaction]:
    return sorted(mempool.values(), key=lambda tx: (tx.sender, tx.sequence))


def propose_block(node: Node, now: Timestamp, round: int = 0) -> Block:
    """Build and sign the next block from the node's mempool.

    Pooled transactions are tried in (sender, sequence) order and the
    invalid ones skipped. Every tournament whose reveals are final is then
    resolved, oldest first, with a ranking or a failure declaration. A
    node armed to withhold rankings leaves them out.

    Args:
        node (Node): The proposing node.
        now (Timestamp): Block timestamp.
        round (int, optional): Retry round at this height. Defaults to 0.

    Returns:
        Block: The signed block.

    Raises:
        NotProposer: If the node is not selected for this height and round.
    """
    state = node.state
    expected = proposer_at(state, now, round)
    if expected != node.account:
        raise exceptions.NotProposer(state.height + 1, expected)
    trial = state.clone()
    out = Effects()
    advance_clock(trial, now, node.blobs)
    ctx = node.context(now, proposer=node.account)
    txs = []
    for tx in _ranked_order(node.mempool):
        try:
            apply_in_place(trial, tx, ctx, out)
        except exceptions.TransactionError as e:
            logger.debug("%s skipped pooled %s: %s", node.name, tx.kind, e)
            continue
        txs.append(tx)
    while not node.withhold_ranking and (
        target := trial.resolution_target(now)
    ):
        body: TxBody
        if tournament.check_failure(target):
            body = TournamentFailure()
        else:
            body = PublishTournamentRanking(
                tournament.compute_local_ranking(
                    target, trial.config, node.truth
                )
            )
        tx = sign_transaction(
            node.keys, trial.next_sequence(node.account), body
        )
        apply_in_place(trial, tx, ctx, out)
        txs.append(tx)
    unsigned = Block(
        height=state.height + 1,
        prev=state.tip,
        proposer=node.account,
        timestamp=now,
        round=round,
        txs=tuple(txs),
    )
    block = dataclasses.replace(
        unsigned, signature=node.keys.sign(unsigned.digest)
    )
    logger.debug(
        "%s proposed block %d (%d txs)", node.name, block.height, len(txs)
    )
    return block


def transition(
    state: AppState,
    block: Block,
    truth: TruthStream | None,
    blobs: Mapping[bytes, bytes],
) -> tuple[AppState, Effects]:
    """Apply a block to a copy of a state, all or nothing.

    The clock advances to the block timestamp first, then every
    transaction applies in order with the proposer as block creator. A
    block that leaves a tournament unresolved past the proposer deadline
    is rejected. The proposer's coin age restarts at the block timestamp.

    Args:
        state (AppState): State at the block's parent.
        block (Block): The block.
        truth (TruthStream | None): Real-time truth for ranking checks.
        blobs (Mapping[bytes, bytes]): Content store for dataset checks.

    Returns:
        tuple[AppState, Effects]: The new state and everything the block
            caused.

    Raises:
        BlockRejected: If any check fails; ``state`` is untouched.
    """
    if block.height != state.height + 1:
        raise exceptions.BlockRejected(block.height, "wrong height")
    if block.prev != state.tip:
        raise exceptions.BlockRejected(block.height, "wrong parent")
    if block.timestamp <= state.clock:
        raise exceptions.BlockRejected(block.height, "timestamp not after tip")
    try:
        expected = proposer_at(state, block.timestamp, block.round)
    except exceptions.NoEligibleProposer as e:
        raise exceptions.BlockRejected(block.height, str(e)) from e
    if block.proposer != expected:
        raise exceptions.BlockRejected(block.height, "wrong proposer")
    if not verify(
        block.signature, block.digest, state.verify_keys[block.proposer]
    ):
        raise exceptions.BlockRejected(block.height, "bad block signature")
    new = state.clone()
    out = Effects()
    out.marks += advance_clock(new, block.timestamp, blobs)
    ctx = ApplyContext(
        now=block.timestamp, proposer=block.proposer, truth=truth, blobs=blobs
    )
    for i, tx in enumerate(block.txs):
        try:
            apply_in_place(new, tx, ctx, out)
        except exceptions.TransactionError as e:
            raise exceptions.BlockRejected(
                block.height, f"transaction {i} invalid: {e}"
            ) from e
    overdue = new.overdue(block.timestamp)
    if overdue:
        raise exceptions.BlockRejected(
            block.height, f"tournament {overdue[0]} resolution missing"
        )
    new.ledger = reset_coin_age(new.ledger, block.proposer, block.timestamp)
    new.height = block.height
    new.tip = block.digest
    return new, out


def validate_block(node: Node, block: Block) -> tuple[AppState, Effects]:
    """Validate a block against the node's state, caching the result.

    Raises:
        BlockRejected: If the block is invalid.
    """
    cached = node.validated.get(block.digest)
    if cached is not None and block.prev == node.state.tip:
        return cached
    result = transition(node.state, block, node.truth, node.blobs)
    node.validated[block.digest] = result
    return result


def cast_vote(node: Node, block: Block) -> Vote:
    """Validate a block and sign a vote for it.

    Raises:
        BlockRejected: If the block is invalid; no vote is cast.
    """
    validate_block(node, block)
    return Vote(
        block_digest=block.digest,
        voter=node.account,
        signature=node.keys.sign(block.digest),
    )


def verify_vote(state: AppState, vote: Vote) -> bool:
    """Whether a vote carries a valid signature of a registered account."""
    verify_key = state.verify_keys.get(vote.voter)
    return verify_key is not None and verify(
        vote.signature, vote.block_digest, verify_key
    )


def mark_misbehavior(node: Node, mark: Mark) -> None:
    """Record a disqualification in the node's own bookkeeping."""
    key = (mark.index, mark.account, mark.challenger)
    if key in node.local_disqualified:
        return
    node.local_disqualified[key] = mark.reason
    logger.info(
        "%s marked %s in tournament %d: %s",
        node.name,
        mark.account.hex()[:12],
        mark.index,
        mark.reason,
    )


def _prune(node: Node, now: Timestamp) -> None:
    kept: dict[bytes, Transaction] = {}
    by_sender: dict[AccountId, list[Transaction]] = {}
    for tx in _ranked_order(node.mempool):
        if tx.digest not in node.included:
            by_sender.setdefault(tx.sender, []).append(tx)
    ctx = node.context(now)
    for sender, txs in by_sender.items():
        expected = node.state.next_sequence(sender)
        for tx in txs:
            try:
                check_transaction(
                    node.state, tx, ctx, expected_sequence=expected
                )
            except exceptions.TransactionError:
                continue
            kept[tx.digest] = tx
            expected += 1
    for tx_digest in set(node.mempool) - set(kept):
        key, _ = node.own.pop(tx_digest, (None, 0))
        if key is not None and tx_digest not in node.included:
            # Let the duty be acted on again with a fresh sequence number.
            node.created.pop(key, None)
    node.mempool = kept


def apply_block(node: Node, block: Block) -> Effects:
    """Commit a block to the node's chain.

    Raises:
        BlockRejected: If the block is invalid; the node is unchanged.
    """
    new, out = validate_block(node, block)
    node.state = new
    node.chain.append(block)
    node.validated.clear()
    node.included.update(tx.digest for tx in block.txs)
    for mark in out.marks:
        mark_misbehavior(node, mark)
    _prune(node, block.timestamp)
    logger.debug(
        "%s applied block %d at %d", node.name, block.height, block.timestamp
    )
    return out


def replay(
    genesis: AppState,
    chain: Iterable[Block],
    truth: TruthStream | None,
    blobs: Mapping[bytes, bytes],
) -> AppState:
    """Rebuild a state by applying a chain to its genesis state.

    Raises:
        BlockRejected: If a block of the chain does not apply.
    """
    state = genesis
    for block in chain:
        state, _ = transition(state, block, truth, blobs)
    return state


def block_due(node: Node, now: Timestamp) -> bool:
    """Whether a proposer at ``now`` has reason to build a block."""
    state = node.state
    cfg = state.config
    return (
        bool(node.mempool)
        or cfg.tournament_index_at(now) != cfg.tournament_index_at(state.clock)
        or state.resolution_target(now) is not None
    )


@dataclasses.dataclass(frozen=True)
class _Duty:
    key: DutyKey
    kind: TxKind
    due: Timestamp
    build: Any


def _signal_key(node: Node, agent: AgentRole, tick: Timestamp | None) -> bytes:
    if agent.policy.behavior is Behavior.KEY_REUSER:
        return derive_bytes(32, node.seed, "signal-key", agent.uuid)
    return derive_bytes(32, node.seed, "signal-key", agent.uuid, tick)


def _sealed_signal(
    node: Node, agent: AgentRole, tick: Timestamp | None, signal: bytes
) -> SealedEnvelope:
    payload = SignalPayload(
        signal=signal, author_key=node.keys.verify_key
    ).to_bytes()
    commit_hash = None
    if agent.policy.behavior is Behavior.BAD_COMMIT:
        commit_hash = digest(b"not-the-payload" + payload)
    return seal(
        payload,
        _signal_key(node, agent, tick),
        derive_bytes(12, node.seed, "nonce", agent.uuid, tick),
        commit_hash=commit_hash,
    )


def _delays(agent: AgentRole, tolerance: int) -> tuple[int, int]:
    """Offsets of an agent's signal and reveal from their deadlines."""
    behavior = agent.policy.behavior
    if behavior is Behavior.COPYCAT:
        return tolerance // 2, tolerance // 2
    if behavior is Behavior.LATE_REVEALER:
        return 0, 2 * tolerance
    return 0, 0


def _copied_record(
    node: Node,
    agent: AgentRole,
    t: tournament.TournamentState,
    tick: Timestamp | None,
) -> tournament.SignalRecord | None:
    target = node.directory.get(agent.policy.target or "")
    if target is None:
        return None
    return t.signals.get((target, tick))


def _copy_signal(
    agent: AgentRole,
    source: tournament.SignalRecord,
    tick: Timestamp | None,
) -> SubmitSignal:
    envelope = SealedEnvelope.from_wire(source.envelope.to_wire())
    return SubmitSignal(agent.uuid, envelope, tick)


def _tick_signal(node: Node, agent: AgentRole, tick: Timestamp) -> SubmitSignal:
    signal = toy_domain.agent_respond(
        agent.policy, tick, agent.seed, truth=node.truth
    )
    return SubmitSignal(
        agent.uuid, _sealed_signal(node, agent, tick, signal), tick
    )


def _realtime_duties(
    node: Node, agent: AgentRole, t: tournament.TournamentState, now: Timestamp
) -> list[_Duty]:
    cfg = node.state.config
    frequency = cfg.real_time_frequency
    signal_offset, reveal_offset = _delays(agent, cfg.time_tolerance)
    horizon = frequency + 3 * cfg.time_tolerance + max(
        node.delay.values(), default=0
    )
    copycat = agent.policy.behavior is Behavior.COPYCAT
    duties = []
    for tick in cfg.realtime_ticks(t.index):
        if tick > now:
            break
        if tick + horizon < now:
            continue
        record = t.signals.get((agent.uuid, tick))
        if record is None and agent.policy.behavior is not Behavior.SILENT:
            build = None
            if copycat:
                source = _copied_record(node, agent, t, tick)
                if source is not None:
                    build = functools.partial(
                        _copy_signal, agent, source, tick
                    )
            else:
                build = functools.partial(_tick_signal, node, agent, tick)
            if build is not None:
                duties.append(
                    _Duty(
                        ("signal", agent.uuid, tick),
                        TxKind.SUBMIT_SIGNAL,
                        tick + signal_offset,
                        build,
                    )
                )
        if (
            record is not None
            and record.owner == node.account
            and record.key is None
        ):
            key = _signal_key(node, agent, tick)
            if copycat:
                source = _copied_record(node, agent, t, tick)
                key = source.key if source is not None else None
            if key is not None:
                duties.append(
                    _Duty(
                        ("reveal", agent.uuid, tick),
                        TxKind.PUBLISH_SIGNAL_DECRYPTION_KEY,
                        tick + frequency + reveal_offset,
                        lambda key=key, tick=tick: PublishSignalDecryptionKey(
                            agent.uuid, key, tick + frequency
                        ),
                    )
                )
    return duties


def _dataset_predictions(
    node: Node, agent: AgentRole, t: tournament.TournamentState
) -> bytes | None:
    predictions = {}
    for challenger, record in sorted(t.datasets.items()):
        if challenger in t.disqualified_challengers:
            continue
        inputs = node.blobs.get(record.inputs_ref)
        if inputs is None:
            continue
        leaked = node.leaked.get((t.index, challenger))
        if leaked is not None:
            predictions[challenger] = list(leaked)
            continue
        answer = toy_domain.agent_respond(
            agent.policy,
            toy_domain.decode_inputs(inputs),
            agent.seed + challenger,
        )
        if answer is None:
            return None
        predictions[challenger] = toy_domain.decode_predictions(answer)
    return toy_domain.encode_dataset_signal(predictions)


def _dataset_signal(
    node: Node, agent: AgentRole, t: tournament.TournamentState
) -> SubmitSignal | None:
    signal = _dataset_predictions(node, agent, t)
    if signal is None:
        return None
    return SubmitSignal(agent.uuid, _sealed_signal(node, agent, None, signal))


def _dataset_miner_duties(
    node: Node, agent: AgentRole, t: tournament.TournamentState
) -> list[_Duty]:
    cfg = node.state.config
    start, end = cfg.tournament_window(t.index)
    signal_offset, reveal_offset = _delays(agent, cfg.time_tolerance)
    duties = []
    record = t.signals.get((agent.uuid, None))
    after_datasets = (
        start
        + cfg.dataset_submission_deadline
        + cfg.time_tolerance
        + node.block_interval
    )
    behavior = agent.policy.behavior
    if (
        record is None
        and t.phase is Phase.ACTIVE
        and behavior is not Behavior.SILENT
    ):
        build = None
        if behavior is Behavior.COPYCAT:
            source = _copied_record(node, agent, t, None)
            if source is not None:
                build = functools.partial(_copy_signal, agent, source, None)
        else:
            build = functools.partial(_dataset_signal, node, agent, t)
        if build is not None:
            duties.append(
                _Duty(
                    ("signal", agent.uuid, None),
                    TxKind.SUBMIT_SIGNAL,
                    after_datasets + signal_offset,
                    build,
                )
            )
    if record is not None and record.owner == node.account and not record.key:
        key = _signal_key(node, agent, None)
        if behavior is Behavior.COPYCAT:
            source = _copied_record(node, agent, t, None)
            key = source.key if source is not None else None
        if key is not None:
            duties.append(
                _Duty(
                    ("reveal", agent.uuid, None),
                    TxKind.PUBLISH_SIGNAL_DECRYPTION_KEY,
                    end + reveal_offset,
                    lambda: PublishSignalDecryptionKey(agent.uuid, key),
                )
            )
    return duties


def _dataset_body(node: Node, index: int) -> PublishDataset:
    dataset = toy_domain.generate_dataset(
        derive_bytes(32, node.seed, "dataset", index),
        node.dataset_size,
        node.dataset_balance,
    )
    node.datasets[index] = dataset
    inputs = toy_domain.encode_inputs(dataset.inputs)
    outputs = toy_domain.encode_predictions(dataset.outputs)
    envelope = seal(
        outputs,
        derive_bytes(32, node.seed, "dataset-key", index),
        derive_bytes(12, node.seed, "dataset-nonce", index),
    ).to_wire()
    signals_hash = digest(outputs)
    if node.corrupt_dataset:
        signals_hash = digest(b"corrupt" + outputs)
    for blob in (inputs, envelope):
        ref = digest(blob)
        node.blobs[ref] = blob
        node.published_blobs.append((ref, blob))
    return PublishDataset(
        inputs_ref=digest(inputs),
        inputs_hash=digest(inputs),
        signals_ref=digest(envelope),
        signals_hash=signals_hash,
    )


def _challenger_duties(
    node: Node, t: tournament.TournamentState
) -> list[_Duty]:
    cfg = node.state.config
    start, end = cfg.tournament_window(t.index)
    if not t.is_challenger(node.account):
        return []
    if node.account in t.disqualified_challengers:
        return []
    record = t.datasets.get(node.account)
    if record is None and t.phase is Phase.ACTIVE:
        return [
            _Duty(
                ("dataset", t.index),
                TxKind.PUBLISH_DATASET,
                start,
                lambda: _dataset_body(node, t.index),
            )
        ]
    if record is not None and record.key is None:
        key = derive_bytes(32, node.seed, "dataset-key", t.index)
        return [
            _Duty(
                ("dataset-key", t.index),
                TxKind.PUBLISH_DATASET_DECRYPTION_KEY,
                end,
                lambda: PublishDatasetDecryptionKey(key),
            )
        ]
    return []


def _duties(node: Node, now: Timestamp) -> list[_Duty]:
    state = node.state
    cfg = state.config
    duties: list[_Duty] = []
    for agent in node.agents:
        entry = state.agents.get(agent.uuid)
        if entry is None:
            duties.append(
                _Duty(
                    ("agent", agent.uuid),
                    TxKind.SUBMIT_AGENT,
                    agent.submit_at,
                    lambda agent=agent: SubmitAgent(agent.uuid),
                )
            )
            continue
        t = state.tournaments.get(entry.tournament)
        if t is None or not t.begun or t.phase.closed:
            continue
        if cfg.problem_type is ProblemType.REAL_TIME:
            duties += _realtime_duties(node, agent, t, now)
        else:
            duties += _dataset_miner_duties(node, agent, t)
    if cfg.problem_type is ProblemType.DATASET:
        for index in sorted(state.tournaments):
            t = state.tournaments[index]
            if t.phase in (Phase.ACTIVE, Phase.AWAITING_REVEALS):
                duties += _challenger_duties(node, t)
    return duties


def _pending(node: Node, now: Timestamp) -> list[_Duty]:
    return [
        duty
        for duty in _duties(node, now)
        if duty.key not in node.created
        and now >= duty.due + node.delay.get(duty.kind, 0)
    ]


def node_obligations(node: Node, now: Timestamp) -> list[Transaction]:
    """Transactions the node's roles require at ``now``.

    Sequence numbers continue after the node's pooled transactions. The
    node is not changed, except that challengers put freshly generated
    datasets into the blob store.
    """
    sequence = node.state.next_sequence(node.account) + len(
        node.pooled_from(node.account)
    )
    txs = []
    for duty in _pending(node, now):
        body = duty.build()
        if body is None:
            continue
        txs.append(sign_transaction(node.keys, sequence, body))
        sequence += 1
    return txs


def submit_own(
    node: Node, body: TxBody, now: Timestamp, key: DutyKey | None = None
) -> Transaction | Rejection:
    """Sign a transaction of the node's own and admit it to its mempool.

    Returns:
        Transaction | Rejection: The admitted transaction, or why the
            node's own check refused it. A refused transaction uses up no
            sequence number.
    """
    sequence = node.state.next_sequence(node.account) + len(
        node.pooled_from(node.account)
    )
    tx = sign_transaction(node.keys, sequence, body)
    rejection = ingest_tx(node, tx, now)
    if rejection is not None:
        return rejection
    node.own[tx.digest] = (key, now)
    return tx


def act(
    node: Node, now: Timestamp
) -> tuple[list[Transaction], list[Rejection]]:
    """Carry out every duty due at ``now``.

    Each duty is acted on once. Dropped duties are never created, delayed
    ones only once their delay has passed.

    Returns:
        tuple[list[Transaction], list[Rejection]]: Transactions to gossip
            and the node's own transactions its checks refused.
    """
    sent: list[Transaction] = []
    refused: list[Rejection] = []
    for duty in _pending(node, now):
        node.created[duty.key] = b""
        if duty.kind in node.drop:
            logger.info("%s dropped its %s", node.name, duty.kind.label)
            continue
        body = duty.build()
        if body is None:
            continue
        result = submit_own(node, body, now, duty.key)
        if isinstance(result, Rejection):
            logger.warning(
                "%s could not send %s: %s",
                node.name,
                duty.kind.label,
                result.code,
            )
            refused.append(result)
            continue
        node.created[duty.key] = result.digest
        sent.append(result)
    return sent, refused


def stale_own(node: Node, now: Timestamp, age: int) -> list[Transaction]:
    """Own pooled transactions still waiting after ``age`` milliseconds."""
    return [
        node.mempool[d]
        for d, (_, created) in sorted(node.own.items())
        if d in node.mempool and created + age <= now
    ]
