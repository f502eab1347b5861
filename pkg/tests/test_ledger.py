import pytest
from hypothesis import given
from hypothesis import strategies as st

from scydomain import exceptions, ledger
from scydomain.types_ import DAY_MS, MAX_TOKEN_AMOUNT

A, B, C = b"a" * 32, b"b" * 32, b"c" * 32


@pytest.fixture
def state() -> ledger.LedgerState:
    return ledger.genesis({A: 1_000, B: 500, C: 0}, {A: (400, 0)})


class TestGenesis:
    def test_stake_moves_out_of_balance(self, state):
        assert state.balance(A) == 600
        assert state.stakes[A].amount == 400
        assert state.total_supply == 1_500
        assert ledger.is_conserved(state)

    def test_stake_above_allocation(self):
        with pytest.raises(exceptions.InsufficientAllocation):
            ledger.genesis({A: 10}, {A: (11, 0)})

    def test_overflowing_allocation(self):
        with pytest.raises(exceptions.TokenOverflow):
            ledger.genesis({A: MAX_TOKEN_AMOUNT, B: 1}, {})

    def test_unknown_account_has_no_balance(self, state):
        assert state.balance(b"z" * 32) == 0


class TestConsensusPower:
    def test_power_grows_with_whole_days(self, state):
        assert ledger.consensus_power(state, A, 3 * DAY_MS + 5) == 1_200

    def test_fresh_stake_has_minimum_factor(self, state):
        assert ledger.consensus_power(state, A, DAY_MS // 2) == 400

    def test_no_stake_no_power(self, state):
        assert ledger.consensus_power(state, B, DAY_MS) == 0

    def test_powers_cover_stakers_only(self, state):
        assert ledger.powers(state, 2 * DAY_MS) == {A: 800}

    def test_reset_coin_age(self, state):
        reset = ledger.reset_coin_age(state, A, 5 * DAY_MS)
        assert reset.stakes[A].since == 5 * DAY_MS
        assert ledger.consensus_power(reset, A, 5 * DAY_MS) == 400

    def test_reset_without_stake(self, state):
        with pytest.raises(exceptions.NoStake):
            ledger.reset_coin_age(state, B, 0)


class TestFeesAndPools:
    def test_fee_goes_to_next_pool(self, state):
        charged = ledger.charge_fee(state, B, 200)
        assert charged.balance(B) == 300
        assert charged.next_reward_pool == 200
        assert ledger.is_conserved(charged)

    def test_fee_above_balance(self, state):
        with pytest.raises(exceptions.InsufficientBalance):
            ledger.charge_fee(state, C, 1)

    def test_zero_fee_is_free(self, state):
        assert ledger.charge_fee(state, C, 0) is state

    def test_rotation_locks_the_ended_pool(self, state):
        first = ledger.rotate_pools(ledger.charge_fee(state, B, 200), None)
        assert first.current_reward_pool == 200
        second = ledger.rotate_pools(ledger.charge_fee(first, B, 50), 7)
        assert second.locked_pools == {7: 200}
        assert second.current_reward_pool == 50
        assert second.next_reward_pool == 0
        assert ledger.is_conserved(second)

    def test_pay_out_and_carry_forward(self, state):
        locked = ledger.rotate_pools(
            ledger.rotate_pools(ledger.charge_fee(state, A, 600), None), 1
        )
        paid = ledger.pay_out(locked, 1, [(A, 300), (C, 200)])
        assert paid.locked_pools == {1: 100}
        rest = ledger.carry_forward(paid, 1)
        assert rest.locked_pools == {}
        assert rest.next_reward_pool == 100
        assert ledger.is_conserved(rest)

    def test_pay_out_beyond_pool(self, state):
        locked = ledger.rotate_pools(
            ledger.rotate_pools(ledger.charge_fee(state, B, 10), None), 1
        )
        with pytest.raises(exceptions.TokenOverflow):
            ledger.pay_out(locked, 1, [(A, 11)])

    def test_refund_returns_fees(self, state):
        charged = ledger.charge_fee(state, B, 300)
        locked = ledger.rotate_pools(ledger.rotate_pools(charged, None), 4)
        refunded = ledger.refund(locked, 4, [(B, 300)])
        assert refunded.balance(B) == 500
        assert refunded.locked_pools == {}

    def test_transfer(self, state):
        moved = ledger.transfer(state, B, C, 125)
        assert (moved.balance(B), moved.balance(C)) == (375, 125)
        with pytest.raises(exceptions.InsufficientBalance):
            ledger.transfer(state, C, B, 1)


operations = st.lists(
    st.tuples(
        st.sampled_from(["fee", "transfer", "rotate", "payout", "carry"]),
        st.sampled_from([A, B, C]),
        st.sampled_from([A, B, C]),
        st.integers(min_value=0, max_value=400),
    ),
    max_size=30,
)


class TestConservation:
    @given(operations)
    def test_every_operation_conserves_supply(self, ops):
        state = ledger.genesis({A: 1_000, B: 500, C: 0}, {A: (400, 0)})
        index = 0
        for op, source, destination, amount in ops:
            try:
                if op == "fee":
                    state = ledger.charge_fee(state, source, amount)
                elif op == "transfer":
                    state = ledger.transfer(state, source, destination, amount)
                elif op == "rotate":
                    index += 1
                    state = ledger.rotate_pools(state, index)
                elif op == "payout":
                    state = ledger.pay_out(state, index, [(source, amount)])
                else:
                    state = ledger.carry_forward(state, index)
            except exceptions.LedgerError:
                continue
            assert ledger.is_conserved(state)
