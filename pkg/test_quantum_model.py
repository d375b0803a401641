import math
from fractions import Fraction

import numpy as np
import pytest

from app.core.core_types import SettingPair
from app.core.errors import InvalidOutcomeError, InvalidRunParameterError, InvalidSettingError, MerminError
from app.services.quantum_model_service import (
    OUTCOMES,
    JointOutcome,
    joint_probability,
    quantum_model_service,
    run_quantum_experiment,
    sample_trial,
)
from app.services.rng_service import rng_service


def test_exact_probabilities_at_case_a_and_b():
    assert joint_probability(JointOutcome.RR, 0) == Fraction(1, 2)
    assert joint_probability(JointOutcome.GG, 0) == Fraction(1, 2)
    assert joint_probability(JointOutcome.RG, 0) == 0
    assert joint_probability(JointOutcome.RR, 120) == Fraction(1, 8)
    assert joint_probability(JointOutcome.GG, 120) == Fraction(1, 8)
    assert joint_probability(JointOutcome.RG, 120) == Fraction(3, 8)
    assert joint_probability(JointOutcome.GR, 120) == Fraction(3, 8)


def test_angles_fold():
    assert joint_probability(JointOutcome.RR, -120) == Fraction(1, 8)
    assert joint_probability(JointOutcome.RR, 240) == Fraction(1, 8)


@pytest.mark.parametrize("theta", [0, 60, 90, 120, 180])
def test_probabilities_sum_to_one(theta):
    probs = quantum_model_service.exact_probabilities(theta)
    assert sum(probs.values()) == 1
    assert all(isinstance(p, Fraction) for p in probs.values())


def test_untabulated_angle_uses_floats():
    p = joint_probability(JointOutcome.RR, 45)
    assert p == pytest.approx(math.cos(math.radians(22.5)) ** 2 / 2)


def test_color_correlation():
    assert quantum_model_service.color_correlation(0) == 1
    assert quantum_model_service.color_correlation(90) == 0
    assert quantum_model_service.color_correlation(120) == Fraction(-1, 2)
    assert quantum_model_service.color_correlation(180) == -1


def test_case_a_samples_always_match():
    rng = rng_service.generator(11)
    pair = SettingPair.from_label("22")
    for _ in range(200):
        assert sample_trial(pair, rng).is_same
    idx = quantum_model_service.sample_trials(pair, 10_000, rng)
    assert set(np.unique(idx)) <= {OUTCOMES.index(JointOutcome.RR), OUTCOMES.index(JointOutcome.GG)}


def test_sampler_is_deterministic_for_a_seed():
    pair = SettingPair.from_label("13")
    a = quantum_model_service.sample_trials(pair, 1000, rng_service.generator(5))
    b = quantum_model_service.sample_trials(pair, 1000, rng_service.generator(5))
    assert np.array_equal(a, b)


def test_facts_one_and_two_over_nine_million_trials():
    report = run_quantum_experiment(9_000_000, seed=2024)
    assert report.n_trials == 9_000_000
    assert report.exact_same_fraction(case_b=False) == 1
    assert report.case_a_same_fraction == 1.0
    assert abs(report.case_b_same_fraction - 0.25) <= 0.001
    for label in ("11", "22", "33"):
        t = report.tally(label)
        assert t.rg == 0 and t.gr == 0
        assert abs(t.rr / t.n - 0.5) < 0.005
    for label in ("12", "13", "21", "23", "31", "32"):
        assert abs(report.pair_frequency(label) - 1 / 9) < 0.002


def test_fixed_pair_policy():
    report = run_quantum_experiment(100_000, policy="fixed:23", seed=3)
    assert report.policy == "fixed:23"
    assert report.tally("23").n == 100_000
    assert sum(report.tally(label).n for label in ("11", "12", "13")) == 0
    assert abs(report.same_fraction("23") - 0.25) < 0.006


def test_thread_count_does_not_change_results():
    one = run_quantum_experiment(60_000, seed=9, chunk_size=10_000, threads=1)
    many = run_quantum_experiment(60_000, seed=9, chunk_size=10_000, threads=4)
    assert one.pairs == many.pairs


def test_rejects_bad_inputs():
    with pytest.raises(InvalidRunParameterError):
        run_quantum_experiment(0, seed=1)
    with pytest.raises(InvalidRunParameterError):
        run_quantum_experiment(10, seed=-1)
    with pytest.raises(InvalidSettingError):
        run_quantum_experiment(10, policy="fixed:45", seed=1)
    with pytest.raises(InvalidOutcomeError):
        JointOutcome.parse("RB")
    assert issubclass(InvalidOutcomeError, MerminError)


def test_trial_records_follow_the_sampler():
    pair = SettingPair.from_label("13")
    records = quantum_model_service.trial_records(pair, 500, rng_service.generator(11))
    indices = quantum_model_service.sample_trials(pair, 500, rng_service.generator(11))
    assert [r.trial_index for r in records] == list(range(500))
    assert len({r.trial_index for r in records}) == 500
    assert [r.outcome for r in records] == [OUTCOMES[i] for i in indices]
    assert all(r.pair == pair for r in records)
    assert records[0].to_dict()["pair"] == "13"


def test_trial_records_at_case_a_always_match():
    records = quantum_model_service.trial_records(SettingPair(2, 2), 200, rng_service.generator(3))
    assert all(r.outcome.is_same for r in records)
    with pytest.raises(InvalidRunParameterError):
        quantum_model_service.trial_records(SettingPair(2, 2), 0, rng_service.generator(3))
