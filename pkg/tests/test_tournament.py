from fractions import Fraction

import pytest

from scydomain import exceptions, ledger
from scydomain.consensus import ChallengerSet
from scydomain.crypto import seal
from scydomain.toy_domain import TruthStream, encode_predictions
from scydomain.tournament import (
    AgentEntry,
    RankingEntry,
    SignalRecord,
    TournamentState,
    begin_tournament,
    check_failure,
    compute_local_ranking,
    distribute_reward,
    resolve_with_failure,
    resolve_with_ranking,
    score_dataset,
    score_realtime,
    sweep_deadlines,
)
from scydomain.types_ import DisqualificationReason, Phase

PAYER = b"p" * 32
M1, M2, M3 = b"1" * 32, b"2" * 32, b"3" * 32
C1, C2 = b"x" * 32, b"y" * 32
U1, U2, U3 = b"\x01" * 16, b"\x02" * 16, b"\x03" * 16


def funded(pool: int, index: int = 1) -> ledger.LedgerState:
    state = ledger.genesis({PAYER: 1_000, M1: 0, M2: 0, M3: 0}, {})
    state = ledger.charge_fee(state, PAYER, pool)
    return ledger.rotate_pools(ledger.rotate_pools(state, None), index)


def entered(*owners: bytes, index: int = 1) -> TournamentState:
    tournament = TournamentState(index=index)
    for i, owner in enumerate(owners):
        tournament.participants[bytes([i + 1]) * 16] = AgentEntry(
            owner=owner, registered_at=i, tournament=index
        )
    return tournament


def ranked(*uuids: bytes) -> tuple[RankingEntry, ...]:
    return tuple(RankingEntry(uuid=u, score=Fraction(0)) for u in uuids)


class TestScoring:
    def test_realtime_missing_signal_is_a_miss(self):
        signals = {0: b"\x01", 10_000: b"\x00"}
        actuals = {0: True, 10_000: True, 20_000: False}
        assert score_realtime(signals, actuals) == Fraction(1, 3)

    def test_realtime_malformed_signal_is_a_miss(self):
        assert score_realtime({0: b"\x01\x01"}, {0: True}) == 0

    def test_dataset_mean_over_challengers(self):
        truths = {C1: (True, False), C2: (True, True)}
        assert score_dataset({C1: [True, False]}, truths) == Fraction(1, 2)

    def test_dataset_wrong_length_scores_zero(self):
        assert score_dataset({C1: [True]}, {C1: (True, True)}) == 0

    def test_dataset_without_truth(self):
        with pytest.raises(exceptions.NoValidDatasets):
            score_dataset({}, {})


class TestRanking:
    def test_realtime_order(self, realtime_config):
        truth = TruthStream(b"truth")
        tournament = entered(M1, M2, M3)
        envelope = seal(b"x", bytes(32), bytes(12))
        for tick in realtime_config.realtime_ticks(1):
            tournament.signals[(U3, tick)] = SignalRecord(
                envelope=envelope,
                owner=M3,
                submitted_at=tick,
                key=bytes(32),
                signal=encode_predictions([truth.outcome(tick)]),
            )
        tournament.disqualify(M2, DisqualificationReason.MISSED_SIGNAL)
        ranking = compute_local_ranking(tournament, realtime_config, truth)
        assert [e.uuid for e in ranking] == [U3, U1]
        assert ranking[0].score == 1
        assert ranking[1].score == 0

    def test_ties_break_by_registration(self, realtime_config):
        tournament = entered(M1, M2)
        ranking = compute_local_ranking(
            tournament, realtime_config, TruthStream(b"truth")
        )
        assert [e.uuid for e in ranking] == [U1, U2]

    def test_realtime_needs_truth(self, realtime_config):
        with pytest.raises(ValueError):
            compute_local_ranking(entered(M1), realtime_config, None)


class TestDistributeReward:
    def test_three_two_one(self, realtime_config):
        tournament = entered(M1, M2, M3)
        state, payments = distribute_reward(
            funded(600), tournament, ranked(U1, U2, U3), realtime_config
        )
        assert payments == [(M1, 300), (M2, 200), (M3, 100)]
        assert state.locked_pools == {}
        assert ledger.is_conserved(state)

    def test_two_agents(self, realtime_config):
        tournament = entered(M1, M2)
        _, payments = distribute_reward(
            funded(600), tournament, ranked(U2, U1), realtime_config
        )
        assert payments == [(M2, 360), (M1, 240)]

    def test_nobody_ranked_carries_pool(self, realtime_config):
        state, payments = distribute_reward(
            funded(600), entered(), (), realtime_config
        )
        assert payments == []
        assert state.next_reward_pool == 600

    def test_dataset_challengers_take_a_third(self, dataset_config):
        tournament = entered(M1, M2, M3)
        tournament.challengers = ChallengerSet(
            members=(C1, C2), powers={C1: 50, C2: 50}
        )
        state, payments = distribute_reward(
            funded(600), tournament, ranked(U1, U2, U3), dataset_config
        )
        assert payments == [
            (C1, 100),
            (C2, 100),
            (M1, 200),
            (M2, 133),
            (M3, 66),
        ]
        assert state.next_reward_pool == 1
        assert ledger.is_conserved(state)

    def test_disqualified_challenger_unpaid(self, dataset_config):
        tournament = entered(M1)
        tournament.challengers = ChallengerSet(
            members=(C1, C2), powers={C1: 30, C2: 70}
        )
        tournament.disqualify(
            C1, DisqualificationReason.MISSED_DATASET, challenger=True
        )
        _, payments = distribute_reward(
            funded(600), tournament, ranked(U1), dataset_config
        )
        assert payments == [(C2, 200), (M1, 400)]

    def test_resolve_records_result(self, realtime_config):
        tournament = entered(M1)
        _, payments = resolve_with_ranking(
            funded(90), tournament, ranked(U1), realtime_config
        )
        assert payments == [(M1, 90)]
        assert tournament.phase is Phase.RESOLVED
        assert tournament.result == ranked(U1)


class TestFailure:
    def test_half_the_power_lost_fails(self):
        tournament = entered(M1)
        tournament.challengers = ChallengerSet(
            members=(C1, C2), powers={C1: 50, C2: 50}
        )
        tournament.disqualify(
            C1, DisqualificationReason.MISSED_REVEAL, challenger=True
        )
        assert check_failure(tournament)

    def test_minority_lost_survives(self):
        tournament = entered(M1)
        tournament.challengers = ChallengerSet(
            members=(C1, C2), powers={C1: 40, C2: 60}
        )
        tournament.disqualify(
            C1, DisqualificationReason.MISSED_REVEAL, challenger=True
        )
        assert not check_failure(tournament)

    def test_miner_marks_never_fail(self):
        tournament = entered(M1)
        tournament.disqualify(M1, DisqualificationReason.MISSED_SIGNAL)
        assert not check_failure(tournament)

    def test_impossible_selection_fails(self, dataset_config):
        tournament = entered(M1)
        begin_tournament(tournament, dataset_config, {M1: 10}, b"seed")
        assert tournament.selection_failed
        assert check_failure(tournament)

    def test_refund(self):
        tournament = entered(M1, M2)
        tournament.fee_receipts = [(M1, 200), (M2, 200)]
        state, receipts = resolve_with_failure(funded(600), tournament)
        assert receipts == [(M1, 200), (M2, 200)]
        assert (state.balance(M1), state.balance(M2)) == (200, 200)
        assert state.next_reward_pool == 200
        assert tournament.phase is Phase.FAILED


class TestPhases:
    def test_phase_only_moves_forward(self):
        tournament = TournamentState(index=1, phase=Phase.RESOLVED)
        with pytest.raises(exceptions.PhaseError):
            tournament.advance(Phase.ACTIVE)

    def test_resolved_cannot_fail(self):
        tournament = TournamentState(index=1, phase=Phase.RESOLVED)
        with pytest.raises(exceptions.PhaseError):
            tournament.advance(Phase.FAILED)

    def test_first_reason_sticks(self):
        tournament = entered(M1)
        first = tournament.disqualify(M1, DisqualificationReason.BAD_COMMIT)
        again = tournament.disqualify(M1, DisqualificationReason.MISSED_REVEAL)
        assert first is not None
        assert again is None
        assert tournament.disqualified_miners == {
            M1: DisqualificationReason.BAD_COMMIT
        }


class TestSweep:
    def test_missed_signal_marks_once(self, realtime_config):
        tournament = entered(M1)
        begin_tournament(tournament, realtime_config, {}, b"seed")
        marks = sweep_deadlines(
            tournament, realtime_config, 120_000, 124_001, {}
        )
        assert [(m.account, m.reason) for m in marks] == [
            (M1, DisqualificationReason.MISSED_SIGNAL)
        ]
        later = sweep_deadlines(
            tournament, realtime_config, 124_001, 134_001, {}
        )
        assert later == []

    def test_pending_tournament_is_not_swept(self, realtime_config):
        marks = sweep_deadlines(
            entered(M1), realtime_config, 120_000, 124_001, {}
        )
        assert marks == []

    def test_missed_dataset(self, dataset_config):
        tournament = entered(M1)
        tournament.advance(Phase.ACTIVE)
        tournament.challengers = ChallengerSet(
            members=(C1,), powers={C1: 10}
        )
        marks = sweep_deadlines(
            tournament, dataset_config, 120_000, 165_000, {}
        )
        assert [(m.account, m.challenger) for m in marks] == [(C1, True)]
