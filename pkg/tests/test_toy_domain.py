from fractions import Fraction

import pytest

from scydomain import exceptions
from scydomain.toy_domain import (
    ScriptedAgent,
    TruthStream,
    accuracy,
    agent_respond,
    baseline,
    decode_dataset_signal,
    decode_inputs,
    decode_predictions,
    encode_dataset_signal,
    encode_inputs,
    generate_dataset,
    label,
)
from scydomain.types_ import Behavior


class TestMetrics:
    def test_baseline_of_majority(self):
        truth = [True] * 7 + [False] * 3
        assert baseline(truth) == Fraction(7, 10)

    def test_baseline_of_minority_positive(self):
        assert baseline([True] + [False] * 3) == Fraction(3, 4)

    def test_accuracy_is_exact(self):
        truth = [True] * 50
        predictions = [True] * 39 + [False] * 11
        assert accuracy(predictions, truth) == Fraction(39, 50)

    def test_accuracy_length_mismatch(self):
        with pytest.raises(exceptions.LengthMismatch):
            accuracy([True], [True, False])

    def test_accuracy_of_nothing(self):
        with pytest.raises(exceptions.EmptyTruth):
            accuracy([], [])

    def test_baseline_of_nothing(self):
        with pytest.raises(exceptions.EmptyTruth):
            baseline([])


class TestDataset:
    def test_labels_match_outputs(self):
        data = generate_dataset(b"seed", 40)
        pairs = zip(data.inputs, data.outputs, strict=True)
        assert all(label(f) == o for f, o in pairs)

    def test_exact_balance(self):
        data = generate_dataset(b"seed", 20, Fraction(3, 10))
        assert sum(data.outputs) == 6

    def test_deterministic(self):
        assert generate_dataset(b"seed", 10) == generate_dataset(b"seed", 10)
        assert generate_dataset(b"seed", 10) != generate_dataset(b"other", 10)

    def test_empty(self):
        with pytest.raises(exceptions.EmptyDataset):
            generate_dataset(b"seed", 0)

    def test_inputs_wire_form(self):
        data = generate_dataset(b"seed", 5)
        assert tuple(decode_inputs(encode_inputs(data.inputs))) == data.inputs

    def test_garbage_inputs(self):
        with pytest.raises(exceptions.WireFormatError):
            decode_inputs(b'{"x": 1}')


class TestAgents:
    def test_constant_agent(self):
        agent = ScriptedAgent(Behavior.CONSTANT, value=False)
        truth = TruthStream(b"truth")
        assert agent_respond(agent, 10_000, b"a", truth=truth) == b"\x00"

    def test_silent_agent(self):
        agent = ScriptedAgent(Behavior.SILENT)
        assert agent_respond(agent, 10_000, b"a") is None

    def test_copycat_returns_what_it_saw(self):
        agent = ScriptedAgent(Behavior.COPYCAT, target="sharp")
        assert agent_respond(agent, 10_000, b"a", copied=b"\x01") == b"\x01"

    def test_copycat_needs_target(self):
        with pytest.raises(ValueError):
            ScriptedAgent(Behavior.COPYCAT)

    def test_hit_rate_range(self):
        with pytest.raises(ValueError):
            ScriptedAgent(Behavior.NOISY_ORACLE, p=Fraction(3, 2))

    def test_tick_needs_truth(self):
        agent = ScriptedAgent(Behavior.NOISY_ORACLE)
        with pytest.raises(ValueError):
            agent_respond(agent, 10_000, b"a")

    def test_noisy_oracles_rank_by_hit_rate(self):
        truth = TruthStream(b"truth")
        ticks = [i * 10_000 for i in range(240)]
        outcomes = [truth.outcome(t) for t in ticks]
        scores = []
        for p in (Fraction(9, 10), Fraction(7, 10), Fraction(1, 2)):
            agent = ScriptedAgent(Behavior.NOISY_ORACLE, p=p)
            predictions = [
                decode_predictions(
                    agent_respond(agent, t, str(p).encode(), truth=truth)
                )[0]
                for t in ticks
            ]
            scores.append(accuracy(predictions, outcomes))
        assert scores[0] > scores[1] > scores[2]

    def test_dataset_answer_has_one_prediction_per_sample(self):
        data = generate_dataset(b"seed", 12)
        agent = ScriptedAgent(Behavior.NOISY_ORACLE, p=Fraction(1))
        signal = agent_respond(agent, data.inputs, b"a")
        assert decode_predictions(signal) == list(data.outputs)


class TestSignals:
    def test_bad_prediction_byte(self):
        with pytest.raises(exceptions.WireFormatError):
            decode_predictions(b"\x02")

    def test_dataset_signal(self):
        challenger = b"c" * 32
        signal = encode_dataset_signal({challenger: [True, False]})
        assert decode_dataset_signal(signal) == {challenger: [True, False]}

    def test_garbage_dataset_signal(self):
        with pytest.raises(exceptions.WireFormatError):
            decode_dataset_signal(b"[1]")
