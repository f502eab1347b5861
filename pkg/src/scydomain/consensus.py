"""Coin-age weighted proposer and challenger selection."""

import dataclasses
import logging
from collections.abc import Iterable, Mapping
from fractions import Fraction

from scydomain import exceptions
from scydomain.config import ValidatedConfig
from scydomain.crypto import DigestStream, canonical_digest
from scydomain.types_ import AccountId

__all__ = [
    "ChallengerSet",
    "block_accepted",
    "select_challengers",
    "select_proposer",
    "selection_seed",
]

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class ChallengerSet:
    """Challengers of one tournament and their power at selection time."""

    members: tuple[AccountId, ...]
    powers: Mapping[AccountId, int]

    @property
    def total_power(self) -> int:
        """Combined selection-time power of every member."""
        return sum(self.powers[m] for m in self.members)


def selection_seed(
    prev_digest: bytes, height: int, purpose: str, round: int = 0
) -> bytes:
    """Seed shared by every node with the same chain prefix.

    Args:
        prev_digest (bytes): Digest of the latest block.
        height (int): Height the selection is for.
        purpose (str): ``"proposer"`` or ``"challenger"``.
        round (int, optional): Retry counter after a failed proposal.
            Defaults to 0.

    Returns:
        bytes: A 32-byte seed.
    """
    return canonical_digest({
        "prev": prev_digest,
        "height": height,
        "purpose": purpose,
        "round": round,
    })


def _draw(stream: DigestStream, weights: list[tuple[AccountId, int]]) -> int:
    total = sum(w for _, w in weights)
    point = stream.below(total)
    for i, (_, weight) in enumerate(weights):
        if point < weight:
            return i
        point -= weight
    raise AssertionError("draw fell outside the weight range")


def select_proposer(powers: Mapping[AccountId, int], seed: bytes) -> AccountId:
    """Pick a block proposer with probability proportional to power.

    Args:
        powers (Mapping[AccountId, int]): Consensus power per account.
        seed (bytes): Selection seed for this height and round.

    Returns:
        AccountId: The selected proposer.

    Raises:
        NoEligibleProposer: If no account holds power.
    """
    weights = sorted((a, p) for a, p in powers.items() if p > 0)
    if not weights:
        raise exceptions.NoEligibleProposer()
    return weights[_draw(DigestStream(seed), weights)][0]


def _satisfied(
    chosen: list[tuple[AccountId, int]],
    cfg: ValidatedConfig,
    network_power: int,
) -> bool:
    if len(chosen) < cfg.min_agent_challengers:
        return False
    total = sum(p for _, p in chosen)
    share = cfg.min_agent_challenger_voting_power
    if total * share.denominator < share.numerator * network_power:
        return False
    cap = Fraction(cfg.challenger_power_cap)
    heaviest = max(p for _, p in chosen)
    return heaviest * cap.denominator <= cap.numerator * total


def select_challengers(
    powers: Mapping[AccountId, int],
    seed: bytes,
    cfg: ValidatedConfig,
    participating_miners: Iterable[AccountId],
) -> ChallengerSet:
    """Select the challengers of a dataset tournament.

    Accounts are drawn by weight without replacement, skipping miners
    that compete in the tournament, until the set is large enough, holds
    enough of the network's power and no member exceeds the power cap.

    Args:
        powers (Mapping[AccountId, int]): Consensus power per account.
        seed (bytes): Challenger selection seed.
        cfg (ValidatedConfig): Dataset domain configuration.
        participating_miners (Iterable[AccountId]): Owners of agents in
            the tournament.

    Returns:
        ChallengerSet: Members in draw order with their powers.

    Raises:
        WrongDomainType: If the domain is a real-time domain.
        SelectionImpossible: If the eligible accounts run out first.
    """
    if cfg.min_agent_challengers is None:
        raise exceptions.WrongDomainType(
            "select_challengers", cfg.problem_type
        )
    miners = set(participating_miners)
    network_power = sum(powers.values())
    pool = sorted(
        (a, p) for a, p in powers.items() if p > 0 and a not in miners
    )
    stream = DigestStream(seed)
    chosen: list[tuple[AccountId, int]] = []
    while not _satisfied(chosen, cfg, network_power):
        if not pool:
            reason = (
                f"{len(chosen)} eligible accounts cannot meet the "
                f"challenger constraints"
            )
            logger.warning("Challenger selection failed: %s", reason)
            raise exceptions.SelectionImpossible(reason)
        chosen.append(pool.pop(_draw(stream, pool)))
    return ChallengerSet(
        members=tuple(a for a, _ in chosen), powers=dict(chosen)
    )


def block_accepted(
    votes: Mapping[AccountId, bytes],
    powers: Mapping[AccountId, int],
    block_digest: bytes,
) -> bool:
    """Whether verified votes carry more than two thirds of the power.

    Exactly two thirds is not enough.

    Args:
        votes (Mapping[AccountId, bytes]): Voter to signature over
            ``block_digest``, already verified by the caller.
        powers (Mapping[AccountId, int]): Consensus power per account.
        block_digest (bytes): Digest of the block voted on.

    Returns:
        bool: True when the block may be committed.
    """
    total = sum(powers.values())
    voted = sum(powers.get(voter, 0) for voter in votes)
    accepted = total > 0 and voted * 3 > total * 2
    logger.debug(
        "Block %s: %d of %d power voted, accepted=%s",
        block_digest.hex()[:12],
        voted,
        total,
        accepted,
    )
    return accepted
