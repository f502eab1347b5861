import dataclasses

import pytest
from conftest import START, make_keys

from scydomain import exceptions
from scydomain.app_state import genesis_state
from scydomain.crypto import KeyPair
from scydomain.state_machine import (
    AgentRole,
    Block,
    Node,
    Rejection,
    act,
    apply_block,
    block_due,
    cast_vote,
    ingest_tx,
    mark_misbehavior,
    node_obligations,
    propose_block,
    proposer_at,
    replay,
    stale_own,
    transition,
    verify_vote,
)
from scydomain.tournament import Mark
from scydomain.toy_domain import ScriptedAgent, TruthStream
from scydomain.transactions import Rent, SubmitAgent, sign_transaction
from scydomain.types_ import Behavior, DisqualificationReason, TxKind

UUID = b"\x0a" * 16
TRUTH = TruthStream(b"truth")


@pytest.fixture
def validator() -> KeyPair:
    return make_keys("validator")


@pytest.fixture
def miner() -> KeyPair:
    return make_keys("miner")


@pytest.fixture
def genesis(realtime_config, validator, miner):
    return genesis_state(
        realtime_config,
        {validator.account: 1_000, miner.account: 1_000},
        {validator.account: (1_000, 0)},
        {k.account: k.verify_key for k in (validator, miner)},
        START,
    )


def make_node(name: str, keys: KeyPair, genesis, **kwargs) -> Node:
    return Node(
        name=name,
        keys=keys,
        seed=name.encode(),
        state=genesis.clone(),
        truth=TRUTH,
        blobs={},
        block_interval=1_000,
        **kwargs,
    )


@pytest.fixture
def v_node(validator, genesis) -> Node:
    return make_node("v", validator, genesis)


@pytest.fixture
def m_node(miner, genesis) -> Node:
    agent = AgentRole(
        name="sharp",
        uuid=UUID,
        policy=ScriptedAgent(Behavior.CONSTANT),
        seed=b"sharp",
        submit_at=START,
    )
    return make_node("m", miner, genesis, agents=(agent,))


class TestPropose:
    def test_sole_staker_proposes(self, genesis, validator):
        assert proposer_at(genesis, START + 1_000) == validator.account

    def test_empty_block(self, v_node, genesis):
        block = propose_block(v_node, START + 1_000)
        assert block.height == 1
        assert block.prev == genesis.tip
        assert block.txs == ()

    def test_unselected_node(self, m_node):
        with pytest.raises(exceptions.NotProposer):
            propose_block(m_node, START + 1_000)

    def test_block_wire_form(self, v_node, miner):
        v_node.mempool[b"x"] = sign_transaction(
            miner, 1, SubmitAgent(uuid=UUID)
        )
        block = propose_block(v_node, START + 1_000)
        assert len(block.txs) == 1
        assert Block.from_wire(block.to_wire()) == block

    def test_truncated_block(self, v_node):
        wire = propose_block(v_node, START + 1_000).to_wire()
        with pytest.raises(exceptions.WireFormatError):
            Block.from_wire(wire[:10])


class TestTransition:
    def test_applies_and_advances_tip(self, v_node, genesis, validator):
        block = propose_block(v_node, START + 1_000)
        state, _ = transition(genesis, block, TRUTH, {})
        assert state.height == 1
        assert state.tip == block.digest
        assert state.clock == START + 1_000
        assert state.ledger.stakes[validator.account].since == START + 1_000
        assert genesis.height == 0

    @pytest.mark.parametrize(
        ("change", "reason"),
        [
            ({"height": 2}, "wrong height"),
            ({"prev": b"\x00" * 32}, "wrong parent"),
            ({"timestamp": START}, "timestamp not after tip"),
            ({"signature": b"\x00" * 64}, "bad block signature"),
        ],
    )
    def test_rejections(self, v_node, genesis, change, reason):
        block = propose_block(v_node, START + 1_000)
        with pytest.raises(exceptions.BlockRejected) as info:
            transition(genesis, dataclasses.replace(block, **change), TRUTH, {})
        assert info.value.reason == reason

    def test_wrong_proposer(self, v_node, genesis, miner):
        block = propose_block(v_node, START + 1_000)
        forged = dataclasses.replace(block, proposer=miner.account)
        with pytest.raises(exceptions.BlockRejected) as info:
            transition(genesis, forged, TRUTH, {})
        assert info.value.reason == "wrong proposer"

    def test_invalid_transaction_rejects_whole_block(
        self, v_node, genesis, validator, miner
    ):
        v_node.mempool[b"x"] = sign_transaction(
            miner, 1, SubmitAgent(uuid=UUID)
        )
        block = propose_block(v_node, START + 1_000)
        bad = sign_transaction(miner, 5, Rent(uuid=UUID, quantity=1))
        unsigned = dataclasses.replace(block, txs=(*block.txs, bad))
        forged = dataclasses.replace(
            unsigned, signature=validator.sign(unsigned.digest)
        )
        with pytest.raises(exceptions.BlockRejected):
            transition(genesis, forged, TRUTH, {})

    def test_replay_reaches_the_same_state(self, v_node, genesis):
        for t in (1_000, 2_000, 3_000):
            apply_block(v_node, propose_block(v_node, START + t))
        rebuilt = replay(genesis, v_node.chain, TRUTH, {})
        assert rebuilt.digest() == v_node.state.digest()


class TestVotes:
    def test_vote_verifies(self, v_node, genesis):
        vote = cast_vote(v_node, propose_block(v_node, START + 1_000))
        assert verify_vote(genesis, vote)

    def test_forged_vote(self, v_node, genesis, miner):
        vote = cast_vote(v_node, propose_block(v_node, START + 1_000))
        assert not verify_vote(
            genesis, dataclasses.replace(vote, voter=miner.account)
        )

    def test_no_vote_for_invalid_block(self, v_node):
        block = propose_block(v_node, START + 1_000)
        with pytest.raises(exceptions.BlockRejected):
            cast_vote(v_node, dataclasses.replace(block, height=5))


class TestMempool:
    def test_duty_flows_into_a_block(self, v_node, m_node):
        sent, refused = act(m_node, START)
        assert refused == []
        assert [tx.kind for tx in sent] == [TxKind.SUBMIT_AGENT]
        assert ingest_tx(v_node, sent[0], START) is None
        assert block_due(v_node, START + 1_000)
        block = propose_block(v_node, START + 1_000)
        apply_block(v_node, block)
        apply_block(m_node, block)
        assert UUID in m_node.state.agents
        assert m_node.mempool == {}
        assert act(m_node, START + 1_000) == ([], [])

    def test_duty_is_acted_on_once(self, m_node):
        act(m_node, START)
        assert act(m_node, START + 500) == ([], [])

    def test_known_transaction_ignored(self, v_node, miner):
        tx = sign_transaction(miner, 1, SubmitAgent(uuid=UUID))
        assert ingest_tx(v_node, tx, START) is None
        assert ingest_tx(v_node, tx, START) is None
        assert len(v_node.mempool) == 1

    def test_out_of_order_sequence(self, v_node, miner):
        tx = sign_transaction(miner, 2, SubmitAgent(uuid=UUID))
        rejection = ingest_tx(v_node, tx, START)
        assert isinstance(rejection, Rejection)
        assert rejection.code == "BadSequence"
        assert v_node.mempool == {}

    def test_dropped_duty(self, m_node):
        m_node.drop.add(TxKind.SUBMIT_AGENT)
        assert act(m_node, START) == ([], [])
        assert m_node.mempool == {}

    def test_delayed_duty(self, m_node):
        m_node.delay[TxKind.SUBMIT_AGENT] = 5_000
        assert act(m_node, START) == ([], [])
        sent, _ = act(m_node, START + 5_000)
        assert len(sent) == 1

    def test_stale_own(self, m_node):
        act(m_node, START)
        assert stale_own(m_node, START + 1_000, 2_000) == []
        assert len(stale_own(m_node, START + 2_000, 2_000)) == 1

    def test_nothing_due(self, v_node):
        assert not block_due(v_node, START + 1_000)


class TestObligations:
    def test_due_duty_is_signed(self, m_node, miner):
        (tx,) = node_obligations(m_node, START)
        assert tx.kind is TxKind.SUBMIT_AGENT
        assert tx.sender == miner.account
        assert tx.sequence == 1
        assert m_node.mempool == {}

    def test_listing_does_not_act(self, m_node):
        node_obligations(m_node, START)
        assert len(node_obligations(m_node, START)) == 1

    def test_sequence_follows_the_mempool(self, m_node):
        act(m_node, START)
        m_node.created.clear()
        (tx,) = node_obligations(m_node, START)
        assert tx.sequence == 2

    def test_not_yet_due(self, m_node):
        assert node_obligations(m_node, START - 1) == []


class TestMarks:
    def test_first_mark_wins(self, v_node, miner):
        reason = DisqualificationReason.MISSED_SIGNAL
        missed = Mark(1, miner.account, reason, challenger=False)
        mark_misbehavior(v_node, missed)
        bad_commit = DisqualificationReason.BAD_COMMIT
        mark_misbehavior(v_node, dataclasses.replace(missed, reason=bad_commit))
        assert v_node.local_disqualified == {
            (1, miner.account, False): reason
        }
