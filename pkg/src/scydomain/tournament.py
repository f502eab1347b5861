"""Tournament bookkeeping, ranking and reward distribution."""

import dataclasses
import logging
from collections.abc import Mapping, Sequence
from fractions import Fraction

from scydomain import exceptions, ledger, toy_domain
from scydomain.config import ValidatedConfig
from scydomain.consensus import ChallengerSet, select_challengers
from scydomain.crypto import SealedEnvelope, digest, open_envelope
from scydomain.ledger import LedgerState
from scydomain.toy_domain import TruthStream
from scydomain.types_ import (
    AccountId,
    DisqualificationReason,
    Phase,
    ProblemType,
    Timestamp,
    TokenAmount,
)

__all__ = [
    "REWARD_WEIGHTS",
    "AgentEntry",
    "DatasetRecord",
    "Mark",
    "Ranking",
    "RankingEntry",
    "SignalRecord",
    "TournamentState",
    "begin_tournament",
    "check_failure",
    "compute_local_ranking",
    "distribute_reward",
    "end_tournament",
    "resolve_with_failure",
    "resolve_with_ranking",
    "score_dataset",
    "score_realtime",
    "sweep_deadlines",
]

logger = logging.getLogger(__name__)

REWARD_WEIGHTS = (3, 2, 1)

Payments = list[tuple[AccountId, TokenAmount]]


@dataclasses.dataclass(frozen=True)
class RankingEntry:
    """An agent and its exact score."""

    uuid: bytes
    score: Fraction


Ranking = tuple[RankingEntry, ...]


@dataclasses.dataclass(frozen=True)
class Mark:
    """A disqualification raised by tournament evidence."""

    index: int
    account: AccountId
    reason: DisqualificationReason
    challenger: bool


@dataclasses.dataclass
class AgentEntry:
    """A registered agent."""

    owner: AccountId
    registered_at: Timestamp
    tournament: int


@dataclasses.dataclass
class SignalRecord:
    """A committed signal and, once revealed, its key and contents."""

    envelope: SealedEnvelope
    owner: AccountId
    submitted_at: Timestamp
    key: bytes | None = None
    signal: bytes | None = None


@dataclasses.dataclass
class DatasetRecord:
    """A challenger's published dataset and its verified outputs."""

    inputs_ref: bytes
    inputs_hash: bytes
    signals_ref: bytes
    signals_hash: bytes
    submitted_at: Timestamp
    key: bytes | None = None
    truth: tuple[bool, ...] | None = None


@dataclasses.dataclass
class TournamentState:
    """Everything the chain knows about one tournament."""

    index: int
    phase: Phase = Phase.PENDING
    participants: dict[bytes, AgentEntry] = dataclasses.field(
        default_factory=dict
    )
    challengers: ChallengerSet | None = None
    selection_failed: bool = False
    signals: dict[tuple[bytes, Timestamp | None], SignalRecord] = (
        dataclasses.field(default_factory=dict)
    )
    datasets: dict[AccountId, DatasetRecord] = dataclasses.field(
        default_factory=dict
    )
    # Revealed key -> digest of the envelope it opened.
    used_keys: dict[bytes, bytes] = dataclasses.field(default_factory=dict)
    disqualified_miners: dict[AccountId, DisqualificationReason] = (
        dataclasses.field(default_factory=dict)
    )
    disqualified_challengers: dict[AccountId, DisqualificationReason] = (
        dataclasses.field(default_factory=dict)
    )
    fee_receipts: list[tuple[AccountId, TokenAmount]] = dataclasses.field(
        default_factory=list
    )
    result: Ranking | None = None

    def advance(self, phase: Phase) -> None:
        """Move the phase forward.

        Raises:
            PhaseError: If the move would go backwards or stay put.
        """
        if phase.rank <= self.phase.rank:
            raise exceptions.PhaseError(self.index, self.phase, phase)
        self.phase = phase

    @property
    def begun(self) -> bool:
        """Whether the tournament's start has passed."""
        return self.phase is not Phase.PENDING

    def is_challenger(self, account: AccountId) -> bool:
        """Whether the account was selected as a challenger."""
        return (
            self.challengers is not None
            and account in self.challengers.powers
        )

    def owners(self) -> set[AccountId]:
        """Accounts with an agent in this tournament."""
        return {entry.owner for entry in self.participants.values()}

    def disqualify(
        self,
        account: AccountId,
        reason: DisqualificationReason,
        *,
        challenger: bool = False,
    ) -> Mark | None:
        """Record a disqualification; the first reason sticks.

        Returns:
            Mark | None: The new mark, or None if already disqualified.
        """
        table = (
            self.disqualified_challengers
            if challenger
            else self.disqualified_miners
        )
        if account in table:
            return None
        table[account] = reason
        logger.warning(
            "Tournament %d: %s %s disqualified (%s)",
            self.index,
            "challenger" if challenger else "miner",
            account.hex()[:12],
            reason,
        )
        return Mark(self.index, account, reason, challenger)


def score_realtime(
    signals: Mapping[Timestamp, bytes], actuals: Mapping[Timestamp, bool]
) -> Fraction:
    """Share of ticks an agent predicted correctly.

    A missing or malformed signal counts as a miss.

    Raises:
        EmptyTruth: If there are no ticks.
    """
    ticks = sorted(actuals)
    truth = [actuals[tick] for tick in ticks]
    predictions = []
    for tick, outcome in zip(ticks, truth, strict=True):
        predicted = _single_prediction(signals.get(tick))
        predictions.append(not outcome if predicted is None else predicted)
    return toy_domain.accuracy(predictions, truth)


def _single_prediction(signal: bytes | None) -> bool | None:
    if signal is None or len(signal) != 1:
        return None
    try:
        return toy_domain.decode_predictions(signal)[0]
    except exceptions.WireFormatError:
        return None


def score_dataset(
    agent_outputs: Mapping[AccountId, Sequence[bool]],
    truths: Mapping[AccountId, Sequence[bool]],
) -> Fraction:
    """Mean accuracy over every valid challenger dataset.

    Outputs that are missing or of the wrong length score zero on that
    dataset.

    Raises:
        NoValidDatasets: If there is no dataset to score against.
    """
    if not truths:
        raise exceptions.NoValidDatasets()
    total = Fraction(0)
    for challenger, truth in truths.items():
        outputs = agent_outputs.get(challenger)
        if outputs is not None and len(outputs) == len(truth):
            total += toy_domain.accuracy(outputs, truth)
    return total / len(truths)


def compute_local_ranking(
    tournament: TournamentState,
    cfg: ValidatedConfig,
    truth: TruthStream | None,
) -> Ranking:
    """Rank the non-disqualified agents of an ended tournament.

    Ordered by score descending, then registration time, then UUID bytes.

    Args:
        tournament (TournamentState): Tournament past its reveal window.
        cfg (ValidatedConfig): Domain configuration.
        truth (TruthStream | None): Real-time truth; unused for datasets.

    Returns:
        Ranking: The ranking every honest node computes.

    Raises:
        NoValidDatasets: If a dataset tournament has no usable dataset.
    """
    scored = []
    actuals: dict[Timestamp, bool] = {}
    truths: dict[AccountId, tuple[bool, ...]] = {}
    if cfg.problem_type is ProblemType.REAL_TIME:
        if truth is None:
            raise ValueError("Real-time ranking needs a truth stream")
        actuals = truth.outcomes(cfg.realtime_ticks(tournament.index))
    else:
        truths = {
            c: record.truth
            for c, record in tournament.datasets.items()
            if c not in tournament.disqualified_challengers
            and record.truth is not None
        }
    for uuid, entry in tournament.participants.items():
        if entry.owner in tournament.disqualified_miners:
            continue
        if cfg.problem_type is ProblemType.REAL_TIME:
            signals = {
                tick: record.signal
                for (agent, tick), record in tournament.signals.items()
                if agent == uuid and record.signal is not None
            }
            score = score_realtime(signals, actuals)
        else:
            record = tournament.signals.get((uuid, None))
            outputs: Mapping[AccountId, Sequence[bool]] = {}
            if record is not None and record.signal is not None:
                try:
                    outputs = toy_domain.decode_dataset_signal(record.signal)
                except exceptions.WireFormatError:
                    outputs = {}
            score = score_dataset(outputs, truths)
        scored.append((-score, entry.registered_at, uuid))
    scored.sort()
    return tuple(RankingEntry(uuid=u, score=-s) for s, _, u in scored)


def _weighted_split(
    amount: TokenAmount, recipients: Sequence[tuple[AccountId, int]]
) -> Payments:
    weight = sum(w for _, w in recipients)
    if weight == 0:
        return []
    return [(account, amount * w // weight) for account, w in recipients]


def distribute_reward(
    ledger_state: LedgerState,
    tournament: TournamentState,
    ranking: Ranking,
    cfg: ValidatedConfig,
) -> tuple[LedgerState, Payments]:
    """Pay a successful tournament's locked pool.

    In dataset domains a third of the pool goes to the surviving
    challengers by selection-time power. The rest is split 3:2:1 over the
    owners of the top three agents (3:2 or everything with fewer agents).
    Rounding remainders, and the whole pool when no agent is ranked, go to
    the next tournament.

    Returns:
        tuple[LedgerState, Payments]: The ledger after payment and every
            payment made.
    """
    index = tournament.index
    pool = ledger_state.locked_pools.get(index, 0)
    payments: Payments = []
    if ranking:
        miner_pool = pool
        if cfg.problem_type is ProblemType.DATASET and tournament.challengers:
            challenger_pool = pool // 3
            miner_pool = pool - challenger_pool
            survivors = [
                (c, tournament.challengers.powers[c])
                for c in tournament.challengers.members
                if c not in tournament.disqualified_challengers
            ]
            payments += _weighted_split(challenger_pool, survivors)
        top = ranking[: len(REWARD_WEIGHTS)]
        payments += _weighted_split(
            miner_pool,
            [
                (tournament.participants[e.uuid].owner, w)
                for e, w in zip(top, REWARD_WEIGHTS, strict=False)
            ],
        )
    ledger_state = ledger.pay_out(ledger_state, index, payments)
    return ledger.carry_forward(ledger_state, index), payments


def check_failure(tournament: TournamentState) -> bool:
    """Whether a dataset tournament failed.

    It fails when challenger selection was impossible or when disqualified
    challengers hold at least half of the selection-time challenger power.
    Miner disqualifications never fail a tournament.
    """
    if tournament.selection_failed:
        return True
    if tournament.challengers is None:
        return False
    lost = sum(
        tournament.challengers.powers[c]
        for c in tournament.disqualified_challengers
    )
    return lost * 2 >= tournament.challengers.total_power


def begin_tournament(
    tournament: TournamentState,
    cfg: ValidatedConfig,
    powers: Mapping[AccountId, int],
    seed: bytes,
) -> None:
    """Start a tournament and, in dataset domains, select its challengers."""
    tournament.advance(Phase.ACTIVE)
    if cfg.problem_type is ProblemType.DATASET:
        try:
            tournament.challengers = select_challengers(
                powers, seed, cfg, tournament.owners()
            )
        except exceptions.SelectionImpossible:
            tournament.selection_failed = True
    logger.info(
        "Tournament %d started with %d agents",
        tournament.index,
        len(tournament.participants),
    )


def end_tournament(tournament: TournamentState) -> None:
    """Close submissions; reveals are still accepted within tolerance."""
    tournament.advance(Phase.AWAITING_REVEALS)


def _sweep_realtime(
    tournament: TournamentState,
    cfg: ValidatedConfig,
    prev: Timestamp,
    now: Timestamp,
) -> list[Mark | None]:
    marks: list[Mark | None] = []
    tolerance = cfg.time_tolerance
    agents = sorted(tournament.participants.items())
    for tick in cfg.realtime_ticks(tournament.index):
        signal_due = prev <= tick + tolerance < now
        reveal_due = prev <= tick + cfg.real_time_frequency + tolerance < now
        if not (signal_due or reveal_due):
            continue
        for uuid, entry in agents:
            record = tournament.signals.get((uuid, tick))
            if signal_due and record is None:
                marks.append(
                    tournament.disqualify(
                        entry.owner, DisqualificationReason.MISSED_SIGNAL
                    )
                )
            if reveal_due and record is not None and record.key is None:
                marks.append(
                    tournament.disqualify(
                        entry.owner, DisqualificationReason.MISSED_REVEAL
                    )
                )
    return marks


def _evaluate_dataset(
    record: DatasetRecord, blobs: Mapping[bytes, bytes]
) -> tuple[bool, ...] | None:
    inputs = blobs.get(record.inputs_ref)
    sealed = blobs.get(record.signals_ref)
    if inputs is None or sealed is None or record.key is None:
        return None
    if digest(inputs) != record.inputs_hash:
        return None
    try:
        envelope = SealedEnvelope.from_wire(sealed)
        payload = open_envelope(envelope, record.key)
        if digest(payload) != record.signals_hash:
            return None
        outputs = toy_domain.decode_predictions(payload)
        if len(outputs) != len(toy_domain.decode_inputs(inputs)):
            return None
    except exceptions.CryptoError:
        return None
    return tuple(outputs)


def _sweep_dataset(
    tournament: TournamentState,
    cfg: ValidatedConfig,
    prev: Timestamp,
    now: Timestamp,
    blobs: Mapping[bytes, bytes],
) -> list[Mark | None]:
    marks: list[Mark | None] = []
    start, end = cfg.tournament_window(tournament.index)
    tolerance = cfg.time_tolerance
    members = tournament.challengers.members if tournament.challengers else ()
    if prev <= start + cfg.dataset_submission_deadline + tolerance < now:
        for c in members:
            if c not in tournament.datasets:
                marks.append(
                    tournament.disqualify(
                        c,
                        DisqualificationReason.MISSED_DATASET,
                        challenger=True,
                    )
                )
    if not prev <= end + tolerance < now:
        return marks
    for c in members:
        record = tournament.datasets.get(c)
        if record is None or c in tournament.disqualified_challengers:
            continue
        if record.key is None:
            reason = DisqualificationReason.MISSED_REVEAL
        else:
            record.truth = _evaluate_dataset(record, blobs)
            if record.truth is not None:
                continue
            reason = DisqualificationReason.CORRUPT_DATASET
        marks.append(tournament.disqualify(c, reason, challenger=True))
    for uuid, entry in sorted(tournament.participants.items()):
        record = tournament.signals.get((uuid, None))
        if record is None:
            reason = DisqualificationReason.MISSED_SIGNAL
        elif record.key is None:
            reason = DisqualificationReason.MISSED_REVEAL
        else:
            continue
        marks.append(tournament.disqualify(entry.owner, reason))
    return marks


def sweep_deadlines(
    tournament: TournamentState,
    cfg: ValidatedConfig,
    prev: Timestamp,
    now: Timestamp,
    blobs: Mapping[bytes, bytes],
) -> list[Mark]:
    """Disqualify parties whose deadlines in ``[prev, now)`` went unmet.

    Real-time miners must commit a signal by each tick plus tolerance and
    reveal it by the next tick plus tolerance. Dataset challengers must
    publish by the submission deadline plus tolerance. Once the reveal
    window after the end closes, dataset keys and miner reveals are
    checked and every dataset is opened and verified against its hashes.

    Returns:
        list[Mark]: New disqualifications, in a deterministic order.
    """
    if tournament.phase not in (Phase.ACTIVE, Phase.AWAITING_REVEALS):
        return []
    if cfg.problem_type is ProblemType.REAL_TIME:
        marks = _sweep_realtime(tournament, cfg, prev, now)
    else:
        marks = _sweep_dataset(tournament, cfg, prev, now, blobs)
    return [m for m in marks if m is not None]


def resolve_with_ranking(
    ledger_state: LedgerState,
    tournament: TournamentState,
    ranking: Ranking,
    cfg: ValidatedConfig,
) -> tuple[LedgerState, Payments]:
    """Record a published ranking and pay its rewards."""
    ledger_state, payments = distribute_reward(
        ledger_state, tournament, ranking, cfg
    )
    tournament.result = ranking
    tournament.advance(Phase.RESOLVED)
    logger.info(
        "Tournament %d resolved: %d ranked, %d paid",
        tournament.index,
        len(ranking),
        sum(amount for _, amount in payments),
    )
    return ledger_state, payments


def resolve_with_failure(
    ledger_state: LedgerState, tournament: TournamentState
) -> tuple[LedgerState, Payments]:
    """Refund every fee that funded a failed tournament."""
    receipts = list(tournament.fee_receipts)
    ledger_state = ledger.refund(ledger_state, tournament.index, receipts)
    tournament.advance(Phase.FAILED)
    logger.info(
        "Tournament %d failed: %d fees refunded",
        tournament.index,
        len(receipts),
    )
    return ledger_state, receipts
