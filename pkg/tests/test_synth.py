from collections import Counter

import numpy as np
import pytest

from hasqoe import (
    GeneratorConfig,
    QualityWalk,
    StallDurations,
    UsageError,
    bin_interruption,
    bin_quality,
    classify_switch,
    extract_features,
    generate_labeled_dataset,
    generate_session,
    generate_sessions,
    interruption_degradation,
    paper_weights,
    perceptual_quality,
    predict,
)


def test_generation_is_deterministic() -> None:
    config = GeneratorConfig(rng_seed=77)
    assert generate_sessions(config, 25) == generate_sessions(config, 25)
    assert generate_session(config) == generate_session(config)
    other = GeneratorConfig(rng_seed=78)
    assert generate_sessions(other, 25) != generate_sessions(config, 25)


def test_prefix_stability_of_substreams() -> None:
    # session k does not depend on how many sessions follow it
    config = GeneratorConfig(rng_seed=5)
    assert generate_sessions(config, 30)[:10] == generate_sessions(config, 10)


def test_generated_sessions_are_valid() -> None:
    for trace in generate_sessions(GeneratorConfig(rng_seed=13), 400):
        assert len(trace.segments) >= 1
        assert all(1.0 <= q <= 5.0 for q in trace.segments)
        for event in trace.interruptions:
            assert 1 <= event.after_segment <= len(trace.segments)
            assert event.duration_s > 0.0
        assert trace.tag in ("single-factor", "multi-factor")


def test_tagging_matches_content() -> None:
    for trace in generate_sessions(GeneratorConfig(rng_seed=19), 300):
        varies = any(
            classify_switch(a, b).amplitude_bin != 0
            for a, b in zip(trace.segments, trace.segments[1:])
        )
        expected = "multi-factor" if varies and trace.interruptions else "single-factor"
        assert trace.tag == expected


def test_no_stalls_when_probability_zero() -> None:
    config = GeneratorConfig(stall_prob_per_boundary=0.0, rng_seed=3)
    assert all(not s.interruptions for s in generate_sessions(config, 100))


def test_stay_probability_one_gives_constant_quality() -> None:
    walk = QualityWalk(p_down=0.0, p_stay=1.0, p_up=0.0, jitter=0.0)
    config = GeneratorConfig(n_segments=20, quality_walk=walk, rng_seed=21)
    for trace in generate_sessions(config, 50):
        assert len(set(trace.segments)) == 1


def test_jitter_stays_inside_the_level_bin() -> None:
    config = GeneratorConfig(rng_seed=23)
    for trace in generate_sessions(config, 200):
        for q in trace.segments:
            assert 1.0 <= q <= 5.0


def test_default_config_covers_every_bin() -> None:
    sessions = generate_sessions(GeneratorConfig(rng_seed=0), 1000)
    quality = Counter()
    down = Counter()
    stalls = Counter()
    for trace in sessions:
        for q in trace.segments:
            quality[bin_quality(q)] += 1
        for a, b in zip(trace.segments, trace.segments[1:]):
            event = classify_switch(a, b)
            if event.amplitude_bin < 0:
                down[(event.starting_quality_bin, event.amplitude_bin)] += 1
        for event in trace.interruptions:
            stalls[bin_interruption(event.duration_s)] += 1
    assert len(quality) == 5
    assert len(down) == 10
    assert len(stalls) == 6


def test_labeled_dataset_labels_match_model_when_noiseless() -> None:
    weights = paper_weights()
    dataset = generate_labeled_dataset(GeneratorConfig(rng_seed=29), 150, weights)
    for session in dataset.sessions:
        assert session.ground_truth_mos == pytest.approx(
            predict(session, weights), abs=1e-12
        )


def test_skip_clamped_keeps_only_linear_sessions() -> None:
    weights = paper_weights()
    dataset = generate_labeled_dataset(
        GeneratorConfig(rng_seed=31), 150, weights, skip_clamped=True
    )
    for session in dataset.sessions:
        fv = extract_features(session)
        raw = perceptual_quality(fv, weights) - interruption_degradation(fv, weights)
        assert raw >= 1.0


def test_noise_is_seeded_and_bounded() -> None:
    weights = paper_weights()
    config = GeneratorConfig(rng_seed=37)
    a = generate_labeled_dataset(config, 60, weights, noise_std=0.3)
    b = generate_labeled_dataset(config, 60, weights, noise_std=0.3)
    assert a == b
    assert all(1.0 <= s.ground_truth_mos <= 5.0 for s in a.sessions)
    clean = generate_labeled_dataset(config, 60, weights)
    assert any(
        x.ground_truth_mos != y.ground_truth_mos
        for x, y in zip(a.sessions, clean.sessions)
    )


def test_generator_usage_errors() -> None:
    with pytest.raises(UsageError):
        generate_sessions(GeneratorConfig(), 0)
    with pytest.raises(UsageError):
        generate_labeled_dataset(GeneratorConfig(), 0, paper_weights())
    with pytest.raises(UsageError):
        generate_labeled_dataset(GeneratorConfig(), 10, paper_weights(), noise_std=-1.0)
    with pytest.raises(UsageError):
        GeneratorConfig(n_segments=0)
    with pytest.raises(UsageError):
        GeneratorConfig(n_segments=(5, 2))
    with pytest.raises(UsageError):
        GeneratorConfig(stall_prob_per_boundary=1.5)
    with pytest.raises(UsageError):
        QualityWalk(p_down=0.5, p_stay=0.5, p_up=0.5)
    with pytest.raises(UsageError):
        QualityWalk(jitter=0.6)
    with pytest.raises(UsageError):
        StallDurations("weibull")


def test_impossible_skip_clamped_config_fails_cleanly() -> None:
    # every session of this config clamps: two segments, huge stall
    config = GeneratorConfig(
        n_segments=2,
        stall_prob_per_boundary=1.0,
        stall_durations=StallDurations("constant", {"value": 60.0}),
        rng_seed=1,
    )
    with pytest.raises(UsageError, match="clamp"):
        generate_labeled_dataset(config, 10, paper_weights(), skip_clamped=True)


def test_stall_duration_distributions() -> None:
    rng = np.random.default_rng(11)
    constant = StallDurations("constant", {"value": 2.5})
    assert constant.sample(rng) == 2.5
    uniform = StallDurations("uniform", {"low": 0.5, "high": 1.5})
    draws = [uniform.sample(rng) for _ in range(200)]
    assert all(0.5 < d <= 1.5 for d in draws)
    mixture = StallDurations("bin_mixture", {"bin_probs": [0, 0, 0, 0, 0, 1.0]})
    assert all(3.0 < mixture.sample(rng) <= 6.0 for _ in range(50))


def test_config_round_trip_through_dict() -> None:
    config = GeneratorConfig(
        n_segments=(5, 15),
        quality_walk=QualityWalk(jitter=0.1),
        stall_prob_per_boundary=0.2,
        stall_durations=StallDurations("uniform", {"low": 0.5, "high": 2.0}),
        rng_seed=123,
    )
    assert GeneratorConfig.from_dict(config.to_dict()) == config
    with pytest.raises(UsageError):
        GeneratorConfig.from_dict({"segments": 4})
