"""Fixed-supply token ledger with coin-age stakes and reward pools.

Every operation returns a new LedgerState; a state is never mutated after
construction. The conservation rule

    sum(balances) + sum(stakes) + current + next + sum(locked) == total

holds for every state these functions produce.
"""

import dataclasses
from collections.abc import Iterable, Mapping

from scydomain import exceptions
from scydomain.types_ import (
    DAY_MS,
    MAX_TOKEN_AMOUNT,
    AccountId,
    Timestamp,
    TokenAmount,
)

__all__ = [
    "LedgerState",
    "StakeRecord",
    "carry_forward",
    "charge_fee",
    "consensus_power",
    "genesis",
    "is_conserved",
    "pay_out",
    "powers",
    "refund",
    "reset_coin_age",
    "rotate_pools",
    "transfer",
]


@dataclasses.dataclass(frozen=True)
class StakeRecord:
    """Staked tokens and the start of their coin age."""

    amount: TokenAmount
    since: Timestamp


@dataclasses.dataclass(frozen=True)
class LedgerState:
    """Balances, stakes and the reward pools of a domain token."""

    balances: Mapping[AccountId, TokenAmount]
    stakes: Mapping[AccountId, StakeRecord]
    current_reward_pool: TokenAmount
    next_reward_pool: TokenAmount
    total_supply: TokenAmount
    # Pools of ended tournaments awaiting a ranking or failure.
    locked_pools: Mapping[int, TokenAmount] = dataclasses.field(
        default_factory=dict
    )

    def balance(self, account: AccountId) -> TokenAmount:
        """Spendable balance of an account, zero if unknown."""
        return self.balances.get(account, 0)

    def held(self) -> TokenAmount:
        """Sum of every token the ledger accounts for."""
        return (
            sum(self.balances.values())
            + sum(s.amount for s in self.stakes.values())
            + self.current_reward_pool
            + self.next_reward_pool
            + sum(self.locked_pools.values())
        )


def _checked(value: int) -> TokenAmount:
    if not 0 <= value <= MAX_TOKEN_AMOUNT:
        raise exceptions.TokenOverflow(value)
    return value


def _debit(
    balances: dict[AccountId, TokenAmount],
    account: AccountId,
    amount: TokenAmount,
) -> None:
    held = balances.get(account, 0)
    if held < amount:
        raise exceptions.InsufficientBalance(account, held, amount)
    balances[account] = held - amount


def _credit(
    balances: dict[AccountId, TokenAmount],
    account: AccountId,
    amount: TokenAmount,
) -> None:
    balances[account] = _checked(balances.get(account, 0) + amount)


def genesis(
    allocations: Mapping[AccountId, TokenAmount],
    stakes: Mapping[AccountId, tuple[TokenAmount, Timestamp]],
) -> LedgerState:
    """Build the initial ledger from allocations and stakes.

    Args:
        allocations (Mapping[AccountId, TokenAmount]): Tokens each account
            starts with, stake included.
        stakes (Mapping[AccountId, tuple[TokenAmount, Timestamp]]): Amount
            staked per account and the start of its coin age.

    Returns:
        LedgerState: Supply equal to the allocations, empty pools.

    Raises:
        InsufficientAllocation: If a stake exceeds its account's allocation.
        TokenOverflow: If an allocation or the supply is out of range.
    """
    balances = {a: _checked(amount) for a, amount in allocations.items()}
    total = _checked(sum(balances.values()))
    records: dict[AccountId, StakeRecord] = {}
    for account, (amount, since) in stakes.items():
        allocation = balances.get(account, 0)
        if amount > allocation:
            raise exceptions.InsufficientAllocation(account, allocation, amount)
        if amount <= 0:
            continue
        balances[account] = allocation - amount
        records[account] = StakeRecord(amount=amount, since=since)
    return LedgerState(
        balances=balances,
        stakes=records,
        current_reward_pool=0,
        next_reward_pool=0,
        total_supply=total,
    )


def consensus_power(
    ledger: LedgerState, account: AccountId, now: Timestamp
) -> int:
    """Coin-age consensus power of an account.

    Power is the staked amount times the whole days since staking, with a
    minimum factor of one so fresh stakers stay selectable.
    """
    stake = ledger.stakes.get(account)
    if stake is None:
        return 0
    days = max(1, (now - stake.since) // DAY_MS)
    return stake.amount * days


def powers(ledger: LedgerState, now: Timestamp) -> dict[AccountId, int]:
    """Consensus power of every staked account at a timestamp."""
    return {
        account: consensus_power(ledger, account, now)
        for account in ledger.stakes
    }


def reset_coin_age(
    ledger: LedgerState, account: AccountId, now: Timestamp
) -> LedgerState:
    """Restart an account's coin age, as after winning a block.

    Raises:
        NoStake: If the account has no stake.
    """
    stake = ledger.stakes.get(account)
    if stake is None:
        raise exceptions.NoStake(account)
    if stake.since == now:
        return ledger
    stakes = dict(ledger.stakes)
    stakes[account] = StakeRecord(amount=stake.amount, since=now)
    return dataclasses.replace(ledger, stakes=stakes)


def charge_fee(
    ledger: LedgerState, account: AccountId, amount: TokenAmount
) -> LedgerState:
    """Move a fee from an account into the next reward pool.

    Raises:
        InsufficientBalance: If the account cannot pay.
    """
    if amount == 0:
        return ledger
    balances = dict(ledger.balances)
    _debit(balances, account, amount)
    return dataclasses.replace(
        ledger,
        balances=balances,
        next_reward_pool=_checked(ledger.next_reward_pool + amount),
    )


def rotate_pools(ledger: LedgerState, lock_index: int | None) -> LedgerState:
    """Roll the pools over at a tournament start.

    The current pool belongs to the tournament that just ended. It is
    locked under that tournament's index until a ranking or failure spends
    it. Fees that accrued since become the new current pool.

    Args:
        ledger (LedgerState): The ledger before the start.
        lock_index (int | None): Index of the ended tournament, or None if
            no tournament was running, in which case the current pool is
            kept for the new one.

    Returns:
        LedgerState: The rotated ledger.
    """
    locked = dict(ledger.locked_pools)
    current = ledger.current_reward_pool
    if lock_index is not None:
        locked[lock_index] = _checked(locked.get(lock_index, 0) + current)
        current = 0
    return dataclasses.replace(
        ledger,
        current_reward_pool=_checked(current + ledger.next_reward_pool),
        next_reward_pool=0,
        locked_pools=locked,
    )


def transfer(
    ledger: LedgerState,
    source: AccountId,
    destination: AccountId,
    amount: TokenAmount,
) -> LedgerState:
    """Pay tokens from one account to another.

    Raises:
        InsufficientBalance: If the source cannot pay.
    """
    balances = dict(ledger.balances)
    _debit(balances, source, amount)
    _credit(balances, destination, amount)
    return dataclasses.replace(ledger, balances=balances)


def pay_out(
    ledger: LedgerState,
    index: int,
    payments: Iterable[tuple[AccountId, TokenAmount]],
) -> LedgerState:
    """Pay reward shares out of a locked tournament pool.

    Raises:
        TokenOverflow: If the payments exceed the locked pool.
    """
    balances = dict(ledger.balances)
    locked = dict(ledger.locked_pools)
    for account, amount in payments:
        available = locked.get(index, 0)
        if amount > available:
            raise exceptions.TokenOverflow(available - amount)
        locked[index] = available - amount
        _credit(balances, account, amount)
    return dataclasses.replace(ledger, balances=balances, locked_pools=locked)


def carry_forward(ledger: LedgerState, index: int) -> LedgerState:
    """Release whatever is left of a locked pool into the next pool."""
    if index not in ledger.locked_pools:
        return ledger
    locked = dict(ledger.locked_pools)
    rest = locked.pop(index)
    return dataclasses.replace(
        ledger,
        next_reward_pool=_checked(ledger.next_reward_pool + rest),
        locked_pools=locked,
    )


def refund(
    ledger: LedgerState,
    index: int,
    receipts: Iterable[tuple[AccountId, TokenAmount]],
) -> LedgerState:
    """Return fees to their payers and carry the rest of the pool forward.

    Raises:
        TokenOverflow: If the receipts exceed the locked pool.
    """
    return carry_forward(pay_out(ledger, index, receipts), index)


def is_conserved(ledger: LedgerState) -> bool:
    """Whether every token of the supply is accounted for."""
    return ledger.held() == ledger.total_supply
