"""A scripted prediction domain: truth, datasets, agents and metrics.

Outcomes are booleans. A real-time truth stream answers "did it rise at
this tick", and dataset samples are four-integer feature vectors whose
label is the parity of their sum, so any agent can be graded exactly.
"""

import dataclasses
import json
from collections.abc import Mapping, Sequence
from fractions import Fraction

from scydomain import exceptions
from scydomain.crypto import (
    DigestStream,
    canonical_bytes,
    canonical_digest,
    hex_bytes,
)
from scydomain.types_ import AccountId, Behavior, Timestamp

__all__ = [
    "FEATURE_COUNT",
    "FEATURE_RANGE",
    "ScriptedAgent",
    "ToyDataset",
    "TruthStream",
    "accuracy",
    "agent_respond",
    "baseline",
    "decode_dataset_signal",
    "decode_inputs",
    "decode_predictions",
    "encode_dataset_signal",
    "encode_inputs",
    "encode_predictions",
    "generate_dataset",
    "label",
]

FEATURE_COUNT = 4
FEATURE_RANGE = 1000

Features = tuple[int, ...]


class TruthStream:
    """Deterministic boolean outcome per real-time tick."""

    def __init__(self, seed: bytes, bias: Fraction = Fraction(1, 2)) -> None:
        """Initialize the stream.

        Args:
            seed (bytes): Seed material shared by every node.
            bias (Fraction, optional): Probability of a true outcome.
                Defaults to 1/2.
        """
        if not 0 <= bias <= 1:
            raise ValueError(f"Bias must be in [0, 1], got {bias}")
        self.seed = seed
        self.bias = bias

    def outcome(self, tick: Timestamp) -> bool:
        """The outcome observed at a tick."""
        digest = canonical_digest({"truth": self.seed, "tick": tick})
        return DigestStream(digest).chance(self.bias)

    def outcomes(self, ticks: Sequence[Timestamp]) -> dict[Timestamp, bool]:
        """Outcomes for several ticks at once."""
        return {tick: self.outcome(tick) for tick in ticks}


def label(features: Sequence[int]) -> bool:
    """Hidden label of a feature vector: true when its sum is odd."""
    return sum(features) % 2 == 1


@dataclasses.dataclass(frozen=True)
class ToyDataset:
    """Feature vectors and their correct boolean outputs."""

    inputs: tuple[Features, ...]
    outputs: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.inputs) != len(self.outputs):
            raise exceptions.LengthMismatch(len(self.outputs), len(self.inputs))

    @property
    def size(self) -> int:
        """Number of samples."""
        return len(self.inputs)


def generate_dataset(
    seed: bytes, size: int, balance: Fraction = Fraction(1, 2)
) -> ToyDataset:
    """Generate a validation dataset with an exact class balance.

    Exactly ``round(balance * size)`` outputs are true (halves round up);
    their positions are shuffled by the seed. Each feature vector is drawn
    at random and then nudged so its parity matches its output.

    Args:
        seed (bytes): Seed material.
        size (int): Number of samples.
        balance (Fraction, optional): Share of true outputs.
            Defaults to 1/2.

    Returns:
        ToyDataset: The same dataset for the same arguments.

    Raises:
        EmptyDataset: If size is below one.
        ValueError: If balance is outside [0, 1].
    """
    if size < 1:
        raise exceptions.EmptyDataset(size)
    if not 0 <= balance <= 1:
        raise ValueError(f"Balance must be in [0, 1], got {balance}")
    positives = int(balance * size + Fraction(1, 2))
    stream = DigestStream(canonical_digest({"dataset": seed, "size": size}))
    outputs = [True] * positives + [False] * (size - positives)
    stream.shuffle(outputs)
    inputs = []
    for output in outputs:
        features = [stream.below(FEATURE_RANGE) for _ in range(FEATURE_COUNT)]
        if label(features) != output:
            features[-1] = (features[-1] + 1) % FEATURE_RANGE
        inputs.append(tuple(features))
    return ToyDataset(inputs=tuple(inputs), outputs=tuple(outputs))


def accuracy(predictions: Sequence[bool], truth: Sequence[bool]) -> Fraction:
    """Share of predictions that match the truth, as an exact rational.

    Raises:
        LengthMismatch: If the lists differ in length.
        EmptyTruth: If both lists are empty.
    """
    if len(predictions) != len(truth):
        raise exceptions.LengthMismatch(len(predictions), len(truth))
    if not truth:
        raise exceptions.EmptyTruth()
    hits = sum(1 for p, t in zip(predictions, truth, strict=True) if p == t)
    return Fraction(hits, len(truth))


def baseline(truth: Sequence[bool]) -> Fraction:
    """Best accuracy a constant prediction achieves on the truth.

    Raises:
        EmptyTruth: If the truth list is empty.
    """
    if not truth:
        raise exceptions.EmptyTruth()
    positives = sum(1 for t in truth if t)
    return Fraction(max(positives, len(truth) - positives), len(truth))


@dataclasses.dataclass(frozen=True)
class ScriptedAgent:
    """Policy of a scripted agent.

    ``value`` is the answer of a constant agent, ``p`` the hit rate of a
    noisy oracle (misbehaving behaviors predict with it too) and ``target``
    the agent a copycat copies.
    """

    behavior: Behavior
    value: bool = True
    p: Fraction = Fraction(1, 2)
    target: str | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.p <= 1:
            raise ValueError(f"Hit rate must be in [0, 1], got {self.p}")
        if self.behavior is Behavior.COPYCAT and self.target is None:
            raise ValueError("A copycat agent needs a target")


def _noisy(
    agent: ScriptedAgent, seed: bytes, key: object, answer: bool
) -> bool:
    if agent.behavior is Behavior.CONSTANT:
        return agent.value
    stream = DigestStream(canonical_digest({"agent": seed, "query": key}))
    return answer if stream.chance(agent.p) else not answer


def agent_respond(
    agent: ScriptedAgent,
    query: Timestamp | Sequence[Features],
    seed: bytes,
    *,
    truth: TruthStream | None = None,
    copied: bytes | None = None,
) -> bytes | None:
    """The signal an agent emits for a tick or a dataset.

    Args:
        agent (ScriptedAgent): The agent's policy.
        query (Timestamp | Sequence[Features]): A real-time tick or the
            inputs of a dataset.
        seed (bytes): The agent's private seed.
        truth (TruthStream | None, optional): Truth an oracle peeks at for
            ticks. Defaults to None.
        copied (bytes | None, optional): What a copycat saw its target
            publish. Defaults to None.

    Returns:
        bytes | None: Encoded predictions, a copycat's copied bytes, or
            None when the agent stays silent.
    """
    if agent.behavior is Behavior.SILENT:
        return None
    if agent.behavior is Behavior.COPYCAT:
        return copied
    if isinstance(query, int):
        if truth is None:
            raise ValueError("A truth stream is needed to answer a tick")
        answer = _noisy(agent, seed, query, truth.outcome(query))
        return encode_predictions([answer])
    return encode_predictions([
        _noisy(agent, seed, [i, list(features)], label(features))
        for i, features in enumerate(query)
    ])


def encode_predictions(predictions: Sequence[bool]) -> bytes:
    """One byte per prediction, 0x01 for true."""
    return bytes(1 if p else 0 for p in predictions)


def decode_predictions(data: bytes) -> list[bool]:
    """Inverse of ``encode_predictions``.

    Raises:
        WireFormatError: If a byte is neither 0x00 nor 0x01.
    """
    if any(b > 1 for b in data):
        raise exceptions.WireFormatError("predictions", "bytes must be 0 or 1")
    return [b == 1 for b in data]


def encode_inputs(inputs: Sequence[Features]) -> bytes:
    """Canonical bytes of dataset inputs, as stored in the blob store."""
    return canonical_bytes([list(f) for f in inputs])


def decode_inputs(data: bytes) -> list[Features]:
    """Inverse of ``encode_inputs``.

    Raises:
        WireFormatError: If the bytes are not a list of feature vectors.
    """
    try:
        raw = json.loads(data)
    except ValueError as e:
        raise exceptions.WireFormatError("dataset inputs", str(e)) from e
    if not isinstance(raw, list) or not all(
        isinstance(f, list) and all(isinstance(x, int) for x in f) for f in raw
    ):
        raise exceptions.WireFormatError("dataset inputs", "not feature lists")
    return [tuple(f) for f in raw]


def encode_dataset_signal(
    predictions: Mapping[AccountId, Sequence[bool]],
) -> bytes:
    """A dataset-domain signal: predictions for each challenger's dataset."""
    return canonical_bytes({
        challenger: encode_predictions(p)
        for challenger, p in predictions.items()
    })


def decode_dataset_signal(data: bytes) -> dict[AccountId, list[bool]]:
    """Inverse of ``encode_dataset_signal``.

    Raises:
        WireFormatError: If the bytes are not a dataset signal.
    """
    try:
        pairs = json.loads(data)
        return {
            hex_bytes(k): decode_predictions(hex_bytes(v))
            for k, v in pairs
        }
    except (ValueError, TypeError) as e:
        raise exceptions.WireFormatError("dataset signal", str(e)) from e
