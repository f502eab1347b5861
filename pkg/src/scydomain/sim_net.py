"""Deterministic discrete-event simulation of a domain network.

Time is virtual. Events run in ``(time, seq)`` order, and every random
choice (latency, message loss) is drawn from digest streams seeded by the
scenario, so a script always produces the same event log.

Each block slot the selected proposer builds a block and gossips it.
Nodes validate and vote, and a node commits a block once it holds votes
from more than two thirds of the power. A proposal that fails to commit
moves the next slot at that height to a new round and a new proposer.
"""

import concurrent.futures
import dataclasses
import heapq
import logging
from collections.abc import Mapping
from enum import StrEnum, auto
from typing import Any

from scydomain import exceptions, ledger
from scydomain.app_state import AppState, genesis_state
from scydomain.config import ValidatedConfig
from scydomain.consensus import block_accepted
from scydomain.crypto import (
    DigestStream,
    SealedEnvelope,
    canonical_digest,
    derive_bytes,
    keygen,
)
from scydomain.eventlog import EventLog
from scydomain.scenario import (
    ActionKind,
    ActionModel,
    FaultKind,
    FaultModel,
    ScenarioScript,
)
from scydomain.state_machine import (
    AgentRole,
    Block,
    Node,
    Rejection,
    Vote,
    act,
    apply_block,
    block_due,
    cast_vote,
    ingest_tx,
    propose_block,
    proposer_at,
    stale_own,
    submit_own,
    validate_block,
    verify_vote,
)
from scydomain.toy_domain import ScriptedAgent, TruthStream
from scydomain.transactions import (
    Effects,
    PublishAgentPrice,
    PublishDataPrice,
    PublishDatasetDecryptionKey,
    Rent,
    SubmitSignal,
    Transaction,
    TxBody,
    sign_transaction,
)
from scydomain.types_ import (
    AccountId,
    PaymentScheme,
    Timestamp,
    TxKind,
)

__all__ = [
    "EventKind",
    "RunResult",
    "SimEvent",
    "Simulation",
    "agent_uuid",
    "build_genesis",
    "data_uuid",
    "inject_fault",
    "run_scenario",
    "truth_stream",
]

logger = logging.getLogger(__name__)


class EventKind(StrEnum):
    """What a simulation event does when it fires."""

    SLOT = auto()
    DELIVER_TX = auto()
    DELIVER_PROPOSAL = auto()
    DELIVER_VOTE = auto()
    INJECT = auto()
    ACTION = auto()


@dataclasses.dataclass(frozen=True, order=True)
class SimEvent:
    """A scheduled event; ordering is by time, then scheduling order."""

    time: Timestamp
    seq: int
    kind: EventKind = dataclasses.field(compare=False)
    target: str = dataclasses.field(compare=False, default="")
    payload: Any = dataclasses.field(compare=False, default=None)


@dataclasses.dataclass
class RunResult:
    """Outcome of a simulated run."""

    script: ScenarioScript
    digests: dict[str, bytes]
    log: EventLog
    nodes: dict[str, Node]
    violations: list[exceptions.InvariantViolation]

    @property
    def clean(self) -> bool:
        """Whether the run broke no invariant."""
        return not self.violations


def _node_seed(script: ScenarioScript, name: str) -> bytes:
    return derive_bytes(32, "node-seed", script.seed, name)


def _key_seed(script: ScenarioScript, name: str) -> bytes:
    return canonical_digest({"scenario_seed": script.seed, "node": name})


def agent_uuid(script: ScenarioScript, node: str, agent: str) -> bytes:
    """On-chain UUID of a scenario agent."""
    return derive_bytes(16, "agent", script.seed, node, agent)


def data_uuid(script: ScenarioScript, item: str) -> bytes:
    """On-chain UUID of a scenario data offering."""
    return derive_bytes(16, "data", script.seed, item)


def truth_stream(script: ScenarioScript) -> TruthStream:
    """The real-time truth every node of a run observes."""
    return TruthStream(
        derive_bytes(32, "truth", script.seed), script.truth.bias
    )


def build_genesis(
    script: ScenarioScript,
) -> tuple[AppState, dict[str, AccountId]]:
    """Genesis state of a scenario and the account of every node.

    Raises:
        ScenarioError: If a node stakes more than it holds.
    """
    cfg = script.domain_config()
    accounts = {}
    verify_keys = {}
    allocations = {}
    stakes = {}
    for member in script.nodes:
        keys = keygen(_key_seed(script, member.name))
        accounts[member.name] = keys.account
        verify_keys[keys.account] = keys.verify_key
        allocations[keys.account] = member.balance
        if member.stake:
            stakes[keys.account] = (member.stake, member.stake_since)
    try:
        state = genesis_state(
            cfg, allocations, stakes, verify_keys, script.start_time
        )
    except exceptions.LedgerError as e:
        raise exceptions.ScenarioError(str(e), script.name) from e
    return state, accounts


def _submit_time(
    script: ScenarioScript, cfg: ValidatedConfig, ordinal: int
) -> Timestamp:
    if ordinal == 0:
        return script.start_time + script.block_interval
    first = cfg.tournament_index_at(script.start_time) + 1
    start, _ = cfg.tournament_window(first + ordinal - 1)
    return start + script.block_interval


def _roles(
    script: ScenarioScript, cfg: ValidatedConfig
) -> tuple[dict[str, tuple[AgentRole, ...]], dict[str, bytes]]:
    """Agents each node runs, and the UUID of every agent by name."""
    roles: dict[str, tuple[AgentRole, ...]] = {}
    directory: dict[str, bytes] = {}
    for member in script.nodes:
        agents = []
        for a in member.agents:
            uuid = agent_uuid(script, member.name, a.name)
            directory[a.name] = uuid
            agents.append(
                AgentRole(
                    name=a.name,
                    uuid=uuid,
                    policy=ScriptedAgent(
                        behavior=a.behavior,
                        value=a.value,
                        p=a.p,
                        target=a.target,
                    ),
                    seed=derive_bytes(32, "agent-seed", script.seed, a.name),
                    submit_at=_submit_time(script, cfg, a.tournament),
                )
            )
        roles[member.name] = tuple(agents)
    return roles, directory


def _spam_body(kind: TxKind, i: int, seed: bytes) -> TxBody:
    junk = derive_bytes(16, "spam", seed, i)
    if kind is TxKind.RENT:
        return Rent(uuid=junk, quantity=1)
    if kind is TxKind.SUBMIT_SIGNAL:
        envelope = SealedEnvelope(
            nonce=junk[:12], ciphertext=junk, commit_hash=junk + junk
        )
        return SubmitSignal(agent_uuid=junk, envelope=envelope)
    if kind is TxKind.PUBLISH_AGENT_PRICE:
        return PublishAgentPrice(
            agent_uuid=junk, scheme=PaymentScheme.PER_USE, price=1
        )
    if kind is TxKind.PUBLISH_DATASET_DECRYPTION_KEY:
        return PublishDatasetDecryptionKey(key=junk + junk)
    raise exceptions.ScenarioError(f"cannot spam {kind.label} transactions")


class Simulation:
    """A running simulation of one scenario."""

    def __init__(
        self, script: ScenarioScript, *, workers: int | None = None
    ) -> None:
        """Build the network of a scenario at its start time.

        Args:
            script (ScenarioScript): The scenario.
            workers (int | None, optional): Threads used to validate
                proposals; overrides the script's ``workers``. Zero
                validates on the event loop. Defaults to None.

        Raises:
            ScenarioError: If the genesis allocations are inconsistent.
        """
        self.script = script
        self.cfg = script.domain_config()
        self.workers = script.workers if workers is None else workers
        self.log = EventLog()
        self.blobs: dict[bytes, bytes] = {}
        self.truth = truth_stream(script)
        self.genesis, self.accounts = build_genesis(script)
        roles, self.directory = _roles(script, self.cfg)
        self.names = {a: n for n, a in self.accounts.items()}
        self.honest = {n.name for n in script.nodes if n.honest}
        self.nodes: dict[str, Node] = {}
        for member in script.nodes:
            self.nodes[member.name] = Node(
                name=member.name,
                keys=keygen(_key_seed(script, member.name)),
                seed=_node_seed(script, member.name),
                state=self.genesis.clone(),
                truth=self.truth,
                blobs=self.blobs,
                block_interval=script.block_interval,
                agents=roles[member.name],
                directory=self.directory,
                dataset_size=script.dataset.size,
                dataset_balance=script.dataset.balance,
                honest=member.honest,
            )
        self.violations: list[exceptions.InvariantViolation] = []
        self.withholding: set[str] = set()
        self._queue: list[SimEvent] = []
        self._seq = 0
        self._latency = DigestStream(derive_bytes(32, "latency", script.seed))
        self._loss = DigestStream(derive_bytes(32, "loss", script.seed))
        self._last_delivery: dict[tuple[str, str], Timestamp] = {}
        self._proposals: dict[str, dict[bytes, Block]] = {
            n: {} for n in self.nodes
        }
        self._votes: dict[str, dict[bytes, dict[AccountId, bytes]]] = {
            n: {} for n in self.nodes
        }
        self._rounds = {n: 0 for n in self.nodes}
        self._pending = {n: False for n in self.nodes}
        self._applied: dict[int, dict[str, bytes]] = {}
        self._committed: set[int] = set()
        self._leaked: set[tuple[str, int]] = set()
        self.log.append(
            "scenario",
            script.start_time,
            name=script.name,
            digest=script.digest(),
            script=script.model_dump(mode="json"),
        )
        self.log.append(
            "genesis",
            script.start_time,
            accounts=self.accounts,
            state=self.genesis.digest(),
            total_supply=self.genesis.ledger.total_supply,
        )

    def schedule(
        self,
        time: Timestamp,
        kind: EventKind,
        target: str = "",
        payload: Any = None,
    ) -> None:
        """Queue an event."""
        heapq.heappush(
            self._queue, SimEvent(time, self._seq, kind, target, payload)
        )
        self._seq += 1

    def _send(
        self,
        now: Timestamp,
        source: str,
        kind: EventKind,
        payload: Any,
        *,
        lossy: bool = False,
    ) -> None:
        network = self.script.network
        for target in self.nodes:
            if target == source:
                self.schedule(now, kind, target, payload)
                continue
            if lossy and self._loss.chance(network.drop_rate):
                continue
            spread = network.max_latency - network.min_latency + 1
            arrival = now + network.min_latency + self._latency.below(spread)
            # Links are FIFO: nothing overtakes an earlier message.
            arrival = max(arrival, self._last_delivery.get((source, target), 0))
            self._last_delivery[(source, target)] = arrival
            self.schedule(arrival, kind, target, payload)

    def _violate(self, now: Timestamp, invariant: str, detail: str) -> None:
        violation = exceptions.InvariantViolation(invariant, detail)
        logger.error("%s", violation)
        self.violations.append(violation)
        self.log.append("violation", now, invariant=invariant, detail=detail)

    def _log_rejection(
        self, now: Timestamp, node: str, rejection: Rejection
    ) -> None:
        self.log.append(
            "reject",
            now,
            node=node,
            sender=rejection.tx.sender,
            tx=rejection.tx.kind.label,
            sequence=rejection.tx.sequence,
            code=rejection.code,
        )

    def _gossip(self, now: Timestamp, node: Node, tx: Transaction) -> None:
        self.log.append(
            "tx", now, node=node.name, kind=tx.kind.label, wire=tx.to_wire()
        )
        self._send(now, node.name, EventKind.DELIVER_TX, tx, lossy=True)

    def _publish_blobs(self, now: Timestamp, node: Node) -> None:
        for ref, blob in node.published_blobs:
            self.log.append("blob", now, node=node.name, ref=ref, data=blob)
        node.published_blobs.clear()

    def _leak(self, now: Timestamp, node: Node) -> None:
        for index, dataset in sorted(node.datasets.items()):
            if (node.name, index) in self._leaked:
                continue
            self._leaked.add((node.name, index))
            for target in sorted(node.leak_to):
                self.nodes[target].leaked[(index, node.account)] = (
                    dataset.outputs
                )
                self.log.append(
                    "fault",
                    now,
                    kind=FaultKind.LEAK_OUTPUTS,
                    node=node.name,
                    to=target,
                    tournament=index,
                )

    def _slot(self, now: Timestamp) -> None:
        for name, node in self.nodes.items():
            if self._pending[name]:
                self._rounds[name] += 1
                self._pending[name] = False
            try:
                proposer = proposer_at(node.state, now, self._rounds[name])
            except exceptions.NoEligibleProposer:
                continue
            if proposer == node.account and block_due(node, now):
                block = propose_block(node, now, self._rounds[name])
                self.log.append(
                    "propose",
                    now,
                    node=name,
                    height=block.height,
                    round=block.round,
                    digest=block.digest,
                    block=block.to_wire(),
                )
                self._send(now, name, EventKind.DELIVER_PROPOSAL, block)
                if self.workers:
                    self._prevalidate(block)
        for name, node in self.nodes.items():
            sent, refused = act(node, now)
            self._publish_blobs(now, node)
            self._leak(now, node)
            for rejection in refused:
                self._log_rejection(now, name, rejection)
            for tx in sent:
                self._gossip(now, node, tx)
            for tx in stale_own(node, now, 2 * self.script.block_interval):
                self._send(now, name, EventKind.DELIVER_TX, tx, lossy=True)
        following = now + self.script.block_interval
        if following <= self.script.run_until:
            self.schedule(following, EventKind.SLOT)

    def _prevalidate(self, block: Block) -> None:
        ready = [
            node
            for node in self.nodes.values()
            if node.state.tip == block.prev
        ]

        def check(node: Node) -> None:
            try:
                validate_block(node, block)
            except exceptions.BlockRejected:
                pass

        with concurrent.futures.ThreadPoolExecutor(self.workers) as pool:
            list(pool.map(check, ready))

    def _deliver_proposal(
        self, now: Timestamp, node: Node, block: Block
    ) -> None:
        if block.height != node.state.height + 1:
            return
        self._pending[node.name] = True
        self._proposals[node.name][block.digest] = block
        try:
            vote = cast_vote(node, block)
        except exceptions.BlockRejected as e:
            logger.warning(
                "%s refused block %d: %s", node.name, block.height, e
            )
            self.log.append(
                "refuse",
                now,
                node=node.name,
                height=block.height,
                digest=block.digest,
                reason=e.reason,
            )
        else:
            self._send(now, node.name, EventKind.DELIVER_VOTE, vote)
        self._try_commit(now, node, block.digest)

    def _deliver_vote(self, now: Timestamp, node: Node, vote: Vote) -> None:
        if not verify_vote(node.state, vote):
            return
        self._votes[node.name].setdefault(vote.block_digest, {})[
            vote.voter
        ] = vote.signature
        self._try_commit(now, node, vote.block_digest)

    def _try_commit(
        self, now: Timestamp, node: Node, block_digest: bytes
    ) -> None:
        block = self._proposals[node.name].get(block_digest)
        if block is None or block.prev != node.state.tip:
            return
        votes = self._votes[node.name].get(block_digest, {})
        power = ledger.powers(node.state.ledger, block.timestamp)
        if not block_accepted(votes, power, block_digest):
            return
        try:
            effects = apply_block(node, block)
        except exceptions.BlockRejected as e:
            if node.name in self.honest:
                self._violate(
                    now,
                    "replication",
                    f"{node.name} cannot apply a committed block: {e.reason}",
                )
            return
        self._proposals[node.name].clear()
        self._votes[node.name].clear()
        self._rounds[node.name] = 0
        self._pending[node.name] = False
        state_digest = node.state.digest()
        self.log.append(
            "apply",
            now,
            node=node.name,
            height=block.height,
            digest=block_digest,
            state=state_digest,
        )
        if block.height not in self._committed:
            self._committed.add(block.height)
            self._record_commit(now, node, block, effects)
        self._check_conservation(now, node)
        self._check_agreement(now, node, block.height, state_digest)

    def _record_commit(
        self, now: Timestamp, node: Node, block: Block, effects: Effects
    ) -> None:
        logger.info(
            "Block %d committed at %d with %d transactions",
            block.height,
            block.timestamp,
            len(block.txs),
        )
        self.log.append(
            "commit",
            now,
            height=block.height,
            digest=block.digest,
            timestamp=block.timestamp,
            proposer=block.proposer,
            txs=len(block.txs),
        )
        for mark in effects.marks:
            self.log.append(
                "mark",
                now,
                tournament=mark.index,
                account=mark.account,
                reason=mark.reason,
                challenger=mark.challenger,
            )
        for resolution in effects.resolutions:
            self.log.append(
                "tournament",
                now,
                index=resolution.index,
                phase=resolution.phase,
                ranking=list(resolution.ranking),
                payments=[list(p) for p in resolution.payments],
            )
        for tx in block.txs:
            if tx.kind is TxKind.RENT:
                self._serve(now, node, tx)

    def _serve(self, now: Timestamp, node: Node, tx: Transaction) -> None:
        listing = node.state.listings.get(tx.body.uuid)
        if listing is None:
            return
        provider = self.names.get(listing.owner, "")
        self.log.append(
            "service",
            now,
            provider=provider,
            renter=self.names.get(tx.sender, ""),
            item=tx.body.uuid,
            served=provider not in self.withholding,
        )

    def _check_conservation(self, now: Timestamp, node: Node) -> None:
        if not ledger.is_conserved(node.state.ledger):
            self._violate(
                now,
                "conservation",
                f"{node.name} holds {node.state.ledger.held()} of "
                f"{node.state.ledger.total_supply} tokens",
            )

    def _check_agreement(
        self, now: Timestamp, node: Node, height: int, state_digest: bytes
    ) -> None:
        if node.name not in self.honest:
            return
        seen = self._applied.setdefault(height, {})
        seen[node.name] = state_digest
        if len(set(seen.values())) > 1:
            self._violate(
                now,
                "replication",
                f"honest nodes disagree on the state at height {height}",
            )
        if set(seen) == self.honest:
            del self._applied[height]

    def inject(self, now: Timestamp, fault: FaultModel) -> None:
        """Arm or fire a fault on its node."""
        node = self.nodes[fault.node]
        kind = fault.kind
        self.log.append("fault", now, **fault.model_dump(mode="json"))
        logger.info("Fault %s on %s", kind, fault.node)
        if kind is FaultKind.DELAY_TX:
            node.delay[fault.tx_kind] = fault.by
        elif kind is FaultKind.DROP_TX:
            node.drop.add(fault.tx_kind)
        elif kind is FaultKind.CORRUPT_DATASET:
            node.corrupt_dataset = True
        elif kind is FaultKind.LEAK_OUTPUTS:
            node.leak_to.add(fault.to)
        elif kind is FaultKind.WITHHOLD_RANKING:
            node.withhold_ranking = True
        elif kind is FaultKind.WITHHOLD_SERVICE:
            self.withholding.add(fault.node)
        elif kind is FaultKind.SPAM_TX:
            sequence = node.state.next_sequence(node.account) + len(
                node.pooled_from(node.account)
            )
            for i in range(fault.count):
                body = _spam_body(fault.tx_kind, i, node.seed)
                tx = sign_transaction(node.keys, sequence, body)
                self.log.append(
                    "tx",
                    now,
                    node=node.name,
                    kind=tx.kind.label,
                    wire=tx.to_wire(),
                )
                self._send(now, node.name, EventKind.DELIVER_TX, tx)

    def _action_body(self, action: ActionModel) -> TxBody:
        if action.kind is ActionKind.PUBLISH_AGENT_PRICE:
            uuid = self.directory.get(action.item)
            if uuid is None:
                raise exceptions.UnknownTarget(action.item)
            return PublishAgentPrice(uuid, action.scheme, action.price)
        if action.kind is ActionKind.PUBLISH_DATA_PRICE:
            return PublishDataPrice(
                data_uuid(self.script, action.item),
                action.params.encode(),
                action.scheme,
                action.price,
            )
        uuid = self.directory.get(action.item) or data_uuid(
            self.script, action.item
        )
        return Rent(uuid, action.quantity)

    def _act_scripted(self, now: Timestamp, action: ActionModel) -> None:
        node = self.nodes[action.node]
        result = submit_own(node, self._action_body(action), now)
        if isinstance(result, Rejection):
            self._log_rejection(now, node.name, result)
        else:
            self._gossip(now, node, result)

    def _dispatch(self, event: SimEvent) -> None:
        now = event.time
        if event.kind is EventKind.SLOT:
            self._slot(now)
        elif event.kind is EventKind.INJECT:
            self.inject(now, event.payload)
        elif event.kind is EventKind.ACTION:
            self._act_scripted(now, event.payload)
        else:
            node = self.nodes[event.target]
            if event.kind is EventKind.DELIVER_TX:
                rejection = ingest_tx(node, event.payload, now)
                if rejection is not None:
                    self._log_rejection(now, node.name, rejection)
            elif event.kind is EventKind.DELIVER_PROPOSAL:
                self._deliver_proposal(now, node, event.payload)
            else:
                self._deliver_vote(now, node, event.payload)

    def _check_targets(self) -> None:
        for fault in self.script.faults:
            for name in (fault.node, fault.to):
                if name is not None and name not in self.nodes:
                    raise exceptions.UnknownTarget(name)
        for action in self.script.actions:
            if action.node not in self.nodes:
                raise exceptions.UnknownTarget(action.node)

    def run(self) -> RunResult:
        """Run the scenario to its end time.

        Raises:
            UnknownTarget: If a fault or action names a missing node.
        """
        self._check_targets()
        start = self.script.start_time
        interval = self.script.block_interval
        first_slot = -(-(start + 1) // interval) * interval
        for fault in self.script.faults:
            self.schedule(
                fault.at if fault.at is not None else start,
                EventKind.INJECT,
                payload=fault,
            )
        for action in self.script.actions:
            self.schedule(action.at, EventKind.ACTION, payload=action)
        self.schedule(first_slot, EventKind.SLOT)
        while self._queue and self._queue[0].time <= self.script.run_until:
            self._dispatch(heapq.heappop(self._queue))
        self._finish()
        return RunResult(
            script=self.script,
            digests={n: node.state.digest() for n, node in self.nodes.items()},
            log=self.log,
            nodes=self.nodes,
            violations=list(self.violations),
        )

    def _finish(self) -> None:
        end = self.script.run_until
        honest = [self.nodes[n] for n in self.nodes if n in self.honest]
        digests = {n.name: n.state.digest() for n in honest}
        if len(set(digests.values())) > 1:
            self._violate(end, "replication", "final honest states differ")
        reference = honest[0] if honest else next(iter(self.nodes.values()))
        state = reference.state
        overdue = [
            index
            for index, t in sorted(state.tournaments.items())
            if t.begun
            and not t.phase.closed
            and self.cfg.tournament_window(index)[1]
            + self.cfg.proposer_deadline
            < state.clock
        ]
        if overdue:
            self._violate(
                end, "completeness", f"tournaments {overdue} never resolved"
            )
        self.log.append(
            "end",
            end,
            height=state.height,
            digests={n.name: n.state.digest() for n in self.nodes.values()},
            ledger=_ledger_summary(state, self.names),
            tournaments={
                str(index): t.phase
                for index, t in sorted(state.tournaments.items())
                if t.begun
            },
        )


def _ledger_summary(
    state: AppState, names: Mapping[AccountId, str]
) -> dict[str, Any]:
    ledger_state = state.ledger
    return {
        "balances": {
            names.get(a, a.hex()): amount
            for a, amount in ledger_state.balances.items()
        },
        "stakes": {
            names.get(a, a.hex()): stake.amount
            for a, stake in ledger_state.stakes.items()
        },
        "current_reward_pool": ledger_state.current_reward_pool,
        "next_reward_pool": ledger_state.next_reward_pool,
        "locked_pools": {
            str(index): amount
            for index, amount in ledger_state.locked_pools.items()
        },
        "total_supply": ledger_state.total_supply,
        "conserved": ledger.is_conserved(ledger_state),
    }


def inject_fault(sim: Simulation, fault: FaultModel) -> Simulation:
    """Arm a fault on a simulation before or while it runs.

    Raises:
        UnknownTarget: If the fault names a node that does not exist.
    """
    for name in (fault.node, fault.to):
        if name is not None and name not in sim.nodes:
            raise exceptions.UnknownTarget(name)
    at = sim.script.start_time if fault.at is None else fault.at
    sim.schedule(at, EventKind.INJECT, payload=fault)
    return sim


def run_scenario(
    script: ScenarioScript, *, workers: int | None = None, strict: bool = True
) -> RunResult:
    """Simulate a scenario from genesis to its end time.

    Args:
        script (ScenarioScript): The scenario.
        workers (int | None, optional): Validation threads; overrides the
            script. Defaults to None.
        strict (bool, optional): Raise on the first broken invariant
            instead of reporting it. Defaults to True.

    Returns:
        RunResult: Final state digests, the event log and the nodes.

    Raises:
        InvariantViolation: If ``strict`` and an invariant broke.
        UnknownTarget: If a fault or action names a missing node.
    """
    result = Simulation(script, workers=workers).run()
    if strict and result.violations:
        raise result.violations[0]
    return result


