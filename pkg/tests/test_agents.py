"""Tests for training loops, annealing, schedules, and the exhaustive oracle."""

from __future__ import annotations

import csv
import itertools
import math

import numpy as np
import pytest

from conftest import make_instance, tiny_fixed_instance
from ringplace import (
    Mlp,
    OracleScaleError,
    Rect,
    SaConfig,
    TrainConfig,
    acceptance_probability,
    brute_force_oracle,
    count_overlaps,
    epsilon_schedule,
    find_zero_overlap_assignment,
    generate_synthetic,
    mean_pairwise_slot_distance,
    predict_placement,
    run_sa,
    save_curve,
    state_dim,
    tewl,
    train_a2c,
    train_dqn,
    wire_contribution,
)
from ringplace.board import Placement

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _score_net(rows: list[list[float]]) -> Mlp:
    """Network whose one-hot input selects a fixed score row."""
    w = np.array(rows, dtype=np.float64)
    return Mlp(
        layer_dims=(w.shape[0], w.shape[1]),
        weights=[w],
        biases=[np.zeros(w.shape[1])],
    )


def _two_passive_instance():
    """Three slots where each passive has a distinct nearest slot."""
    return make_instance(
        footprint=Rect(origin=(10.0, 0.0), width=10.0, height=10.0),
        pins=[("PA", (10.0, 0.0), "NA"), ("PB", (20.0, 10.0), "NB")],
        passives=[("C1", (2.0, 2.0), "NA"), ("C2", (2.0, 2.0), "NB")],
        slots=[(5.0, 0.0), (25.0, 10.0), (15.0, 30.0)],
    )


def _tiny_train_config(**overrides) -> TrainConfig:
    defaults = dict(max_episodes=40, hidden_dims=(16, 16), epsilon_horizon=60, seed=3)
    defaults.update(overrides)
    return TrainConfig(**defaults)


# ---------------------------------------------------------------------------
# Tests: schedules
# ---------------------------------------------------------------------------


class TestEpsilonSchedule:
    def test_boundary_values(self) -> None:
        config = TrainConfig(epsilon_start=0.9, epsilon_end=0.1, epsilon_horizon=100)
        assert epsilon_schedule(0, config) == pytest.approx(0.9)
        assert epsilon_schedule(50, config) == pytest.approx(0.5)
        assert epsilon_schedule(100, config) == pytest.approx(0.1)

    def test_flat_after_horizon(self) -> None:
        config = TrainConfig(epsilon_horizon=100)
        assert epsilon_schedule(100000, config) == pytest.approx(0.1)

    def test_negative_iteration_clamps_to_start(self) -> None:
        config = TrainConfig()
        assert epsilon_schedule(-5, config) == pytest.approx(0.9)

    def test_monotone_non_increasing(self) -> None:
        config = TrainConfig(epsilon_horizon=37)
        values = [epsilon_schedule(t, config) for t in range(80)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert all(0.1 <= v <= 0.9 for v in values)


class TestAcceptanceProbability:
    def test_non_worsening_always_accepts(self) -> None:
        assert acceptance_probability(0.0, 5.0) == 1.0
        assert acceptance_probability(-3.0, 5.0) == 1.0

    def test_delta_equal_to_temperature(self) -> None:
        assert acceptance_probability(2.5, 2.5) == pytest.approx(math.exp(-1.0))

    def test_monotone_in_delta(self) -> None:
        probs = [acceptance_probability(d, 1.0) for d in (0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(probs, probs[1:]))

    def test_cold_system_freezes(self) -> None:
        assert acceptance_probability(1.0, 1e-12) == 0.0


class TestMeanPairwiseSlotDistance:
    def test_matches_direct_average(self) -> None:
        instance = tiny_fixed_instance()
        anchors = [s.anchor for s in instance.slots]
        expected = np.mean(
            [
                math.hypot(a[0] - b[0], a[1] - b[1])
                for a, b in itertools.combinations(anchors, 2)
            ]
        )
        assert mean_pairwise_slot_distance(instance) == pytest.approx(expected)

    def test_single_slot_falls_back(self) -> None:
        instance = make_instance(
            pins=[("P1", (40.0, 41.0), "N1")],
            passives=[("C1", (1.0, 1.0), "N1")],
            slots=[(0.0, 0.0)],
        )
        assert mean_pairwise_slot_distance(instance) == 1.0


# ---------------------------------------------------------------------------
# Tests: greedy readout
# ---------------------------------------------------------------------------


class TestPredictPlacement:
    def test_distinct_maxima(self) -> None:
        instance = _two_passive_instance()
        net = _score_net([[0.0, 5.0, 1.0], [0.0, 1.0, 5.0]])
        placement = predict_placement(instance, net, "passive")
        assert placement.assignment == {0: 1, 1: 2}

    def test_conflict_takes_best_remaining(self) -> None:
        instance = _two_passive_instance()
        net = _score_net([[0.0, 5.0, 1.0], [1.0, 5.0, 0.0]])
        placement = predict_placement(instance, net, "passive")
        assert placement.assignment == {0: 1, 1: 0}

    def test_uniform_scores_fill_in_order(self) -> None:
        instance = _two_passive_instance()
        net = _score_net([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        placement = predict_placement(instance, net, "passive")
        assert placement.assignment == {0: 0, 1: 1}

    def test_always_injective_and_complete(self) -> None:
        instance = tiny_fixed_instance()
        rng = np.random.default_rng(0)
        for _ in range(25):
            net = Mlp.init((3, 8, 5), rng)
            placement = predict_placement(instance, net, "passive")
            assert placement.complete
            assert placement.is_injective()


# ---------------------------------------------------------------------------
# Tests: exhaustive oracle
# ---------------------------------------------------------------------------


class TestBruteForceOracle:
    def test_single_passive_scans_all_slots(self) -> None:
        instance = tiny_fixed_instance()
        sub = make_instance(
            name="sub",
            footprint=instance.main_footprint,
            pins=[(p.id, p.pos, p.net) for p in instance.pins],
            passives=[("C1", (2.0, 2.0), "NA")],
            slots=[s.anchor for s in instance.slots],
        )
        assign, value = brute_force_oracle(sub)
        direct = [wire_contribution(sub, 0, a) for a in range(sub.num_actions)]
        assert value == min(direct)
        assert assign == (int(np.argmin(direct)),)

    def test_tiny_instance_optimum(self) -> None:
        assign, value = brute_force_oracle(tiny_fixed_instance())
        assert assign == (1, 3, 4)
        assert value == 53.0

    def test_ties_resolve_lexicographically(self) -> None:
        instance = make_instance(
            pins=[("P1", (40.0, 41.0), "N1")],
            passives=[("C1", (1.0, 1.0), "NC"), ("C2", (1.0, 1.0), "NC")],
            slots=[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)],
            excluded=["NC"],
        )
        assign, value = brute_force_oracle(instance)
        assert assign == (0, 1)  # every assignment scores zero
        assert value == 0.0

    def test_reward_objective_on_tiny_instance(self) -> None:
        from ringplace import RewardConfig

        assign, value = brute_force_oracle(
            tiny_fixed_instance(),
            objective="reward",
            config=RewardConfig(alpha=0.6, k=1),
        )
        assert assign == (1, 3, 4)
        assert value == pytest.approx(3.0)

    def test_oversized_instance_rejected(self) -> None:
        instance = make_instance(
            pins=[("P1", (40.0, 41.0), "N1")],
            passives=[(f"C{i}", (1.0, 1.0), "N1") for i in range(8)],
            slots=[(5.0 * i, 0.0) for i in range(30)],
        )
        with pytest.raises(OracleScaleError, match="limit"):
            brute_force_oracle(instance)

    def test_unknown_objective(self) -> None:
        with pytest.raises(ValueError, match="objective"):
            brute_force_oracle(tiny_fixed_instance(), objective="hpwl")


class TestFindZeroOverlap:
    def test_ring_instance_has_witness(self) -> None:
        instance = generate_synthetic("g", 4, 2, 8, seed=3)
        witness = find_zero_overlap_assignment(instance)
        assert witness is not None
        placement = Placement.from_mapping(instance, dict(enumerate(witness)))
        assert count_overlaps(instance, placement) == 0

    def test_overcrowded_instance_has_none(self) -> None:
        instance = make_instance(
            pins=[("P1", (40.0, 41.0), "N1")],
            passives=[("C1", (2.0, 2.0), "N1"), ("C2", (2.0, 2.0), "N1")],
            slots=[(0.0, 0.0), (1.0, 0.0)],
        )
        assert find_zero_overlap_assignment(instance) is None


# ---------------------------------------------------------------------------
# Tests: simulated annealing
# ---------------------------------------------------------------------------


class TestRunSa:
    def test_reaches_exhaustive_optimum(self) -> None:
        instance = tiny_fixed_instance()
        _, best = brute_force_oracle(instance)
        result = run_sa(instance, SaConfig(seed=0))
        assert result.metrics.tewl == best

    def test_best_trace_is_monotone(self) -> None:
        instance = tiny_fixed_instance()
        result = run_sa(instance, SaConfig(iterations=2000, seed=1))
        traces = [p.greedy_tewl for p in result.curve]
        assert all(a >= b for a, b in zip(traces, traces[1:]))

    def test_current_never_beats_best(self) -> None:
        instance = tiny_fixed_instance()
        result = run_sa(instance, SaConfig(iterations=2000, seed=2))
        for point in result.curve:
            assert point.episode_reward >= point.greedy_tewl

    def test_deterministic_per_seed(self) -> None:
        instance = tiny_fixed_instance()
        a = run_sa(instance, SaConfig(iterations=3000, seed=7))
        b = run_sa(instance, SaConfig(iterations=3000, seed=7))
        assert a.placement.assignment == b.placement.assignment
        assert a.curve == b.curve

    def test_default_temperature_is_mean_slot_distance(self) -> None:
        instance = tiny_fixed_instance()
        explicit = SaConfig(
            initial_temperature=mean_pairwise_slot_distance(instance),
            iterations=2000,
            seed=5,
        )
        assert run_sa(instance, SaConfig(iterations=2000, seed=5)).curve == run_sa(
            instance, explicit
        ).curve

    def test_classical_acceptance_still_valid(self) -> None:
        instance = tiny_fixed_instance()
        result = run_sa(
            instance, SaConfig(iterations=2000, seed=0, classical_acceptance=True)
        )
        assert result.placement.complete
        assert result.placement.is_injective()
        assert result.metrics.tewl == tewl(instance, result.placement)

    def test_result_metrics_match_best_trace(self) -> None:
        instance = tiny_fixed_instance()
        result = run_sa(instance, SaConfig(iterations=2000, seed=9))
        assert result.curve[-1].greedy_tewl == result.metrics.tewl

    def test_swap_only_when_slots_equal_passives(self) -> None:
        instance = make_instance(
            pins=[("P1", (40.0, 41.0), "N1"), ("P2", (40.0, 45.0), "N2")],
            passives=[("C1", (1.0, 1.0), "N1"), ("C2", (1.0, 1.0), "N2")],
            slots=[(0.0, 0.0), (10.0, 0.0)],
        )
        result = run_sa(instance, SaConfig(iterations=500, seed=0))
        _, best = brute_force_oracle(instance)
        assert result.metrics.tewl == best

    def test_single_cell_breaks_immediately(self) -> None:
        instance = make_instance(
            pins=[("P1", (40.0, 41.0), "N1")],
            passives=[("C1", (1.0, 1.0), "N1")],
            slots=[(0.0, 0.0)],
        )
        result = run_sa(instance, SaConfig(iterations=100, seed=0))
        assert result.placement.assignment == {0: 0}
        assert len(result.curve) == 1

    def test_zero_iterations_keeps_initial(self) -> None:
        instance = tiny_fixed_instance()
        result = run_sa(instance, SaConfig(iterations=0, seed=4))
        assert result.placement.complete
        assert result.metrics.tewl == result.curve[0].greedy_tewl

    def test_free_slot_bookkeeping_stays_injective(self) -> None:
        instance = make_instance(
            pins=[("P1", (40.0, 41.0), "N1"), ("P2", (40.0, 45.0), "N2")],
            passives=[("C1", (1.0, 1.0), "N1"), ("C2", (1.0, 1.0), "N2")],
            slots=[(4.0 * i, 0.0) for i in range(8)],
        )
        for seed in range(5):
            result = run_sa(instance, SaConfig(iterations=2000, seed=seed))
            assert result.placement.is_injective()
            assert result.metrics.tewl == tewl(instance, result.placement)


# ---------------------------------------------------------------------------
# Tests: value learning
# ---------------------------------------------------------------------------


class TestTrainDqn:
    def test_result_shape(self) -> None:
        instance = tiny_fixed_instance()
        config = _tiny_train_config()
        result = train_dqn(instance, config)
        assert result.placement.complete
        assert result.placement.is_injective()
        assert result.metrics.tewl == tewl(instance, result.placement)
        assert len(result.curve) == config.max_episodes
        assert result.curve[-1].iteration == config.max_episodes * 3
        assert result.mode == "passive"

    def test_network_width_follows_mode(self) -> None:
        instance = tiny_fixed_instance()
        passive = train_dqn(instance, _tiny_train_config(max_episodes=2))
        combined = train_dqn(
            instance, _tiny_train_config(max_episodes=2, mode="passive+net")
        )
        assert passive.policy_net.layer_dims[0] == state_dim(instance, "passive")
        assert combined.policy_net.layer_dims[0] == state_dim(instance, "passive+net")
        assert combined.policy_net.layer_dims[-1] == instance.num_actions

    def test_deterministic_per_seed(self) -> None:
        instance = tiny_fixed_instance()
        a = train_dqn(instance, _tiny_train_config())
        b = train_dqn(instance, _tiny_train_config())
        assert a.placement.assignment == b.placement.assignment
        assert a.curve == b.curve

    def test_epsilon_column_tracks_schedule(self) -> None:
        instance = tiny_fixed_instance()
        config = _tiny_train_config()
        result = train_dqn(instance, config)
        eps = [p.epsilon for p in result.curve]
        assert all(0.1 <= v <= 0.9 for v in eps)
        assert all(a >= b for a, b in zip(eps, eps[1:]))

    def test_learns_proximity_assignment(self) -> None:
        instance = _two_passive_instance()
        config = TrainConfig(
            alpha=0.0,
            k=1,
            max_episodes=300,
            hidden_dims=(16, 16),
            epsilon_horizon=300,
            seed=0,
        )
        result = train_dqn(instance, config)
        assert result.placement.assignment == {0: 0, 1: 1}


class TestTrainA2c:
    def test_result_shape(self) -> None:
        instance = tiny_fixed_instance()
        config = _tiny_train_config()
        result = train_a2c(instance, config)
        assert result.placement.complete
        assert result.placement.is_injective()
        assert len(result.curve) == config.max_episodes
        assert all(p.epsilon == 0.0 for p in result.curve)

    def test_deterministic_per_seed(self) -> None:
        instance = tiny_fixed_instance()
        a = train_a2c(instance, _tiny_train_config())
        b = train_a2c(instance, _tiny_train_config())
        assert a.placement.assignment == b.placement.assignment
        assert a.curve == b.curve

    def test_learns_proximity_assignment(self) -> None:
        instance = _two_passive_instance()
        config = TrainConfig(
            alpha=0.0,
            k=1,
            max_episodes=400,
            hidden_dims=(16, 16),
            seed=0,
        )
        result = train_a2c(instance, config)
        assert result.placement.assignment == {0: 0, 1: 1}

    def test_fresh_actor_is_near_uniform(self) -> None:
        from ringplace import encode_state, forward, softmax

        instance = tiny_fixed_instance()
        rng = np.random.default_rng(0)
        actor = Mlp.init((3, 128, 64, 64, 5), rng)
        probs = softmax(forward(actor, encode_state(instance, 0, "passive").bits))
        entropy = -float(np.sum(probs * np.log(probs)))
        assert entropy > 0.97 * math.log(5.0)


# ---------------------------------------------------------------------------
# Tests: configuration validation and curve files
# ---------------------------------------------------------------------------


class TestConfigs:
    def test_train_config_validation(self) -> None:
        with pytest.raises(ValueError, match="mode"):
            TrainConfig(mode="onehot")
        with pytest.raises(ValueError, match="gamma"):
            TrainConfig(gamma=-0.5)
        with pytest.raises(ValueError, match="epsilon"):
            TrainConfig(epsilon_start=0.1, epsilon_end=0.9)
        with pytest.raises(ValueError, match="minibatch"):
            TrainConfig(minibatch=0)
        with pytest.raises(ValueError, match="episodes"):
            TrainConfig(max_episodes=0)

    def test_reward_config_carries_alpha_and_k(self) -> None:
        config = TrainConfig(alpha=0.25, k=3)
        reward = config.reward_config()
        assert reward.alpha == 0.25
        assert reward.k == 3

    def test_sa_config_validation(self) -> None:
        with pytest.raises(ValueError, match="temperature"):
            SaConfig(initial_temperature=0.0)
        with pytest.raises(ValueError, match="cooling"):
            SaConfig(cooling_rate=1.0)
        with pytest.raises(ValueError, match="iterations"):
            SaConfig(iterations=-1)


class TestSaveCurve:
    def test_round_trip(self, tmp_path) -> None:
        instance = tiny_fixed_instance()
        result = run_sa(instance, SaConfig(iterations=1000, seed=0))
        path = tmp_path / "curve.csv"
        save_curve(result.curve, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iteration", "epsilon", "loss", "episode_reward", "greedy_tewl"]
        assert len(rows) == len(result.curve) + 1
        for row, point in zip(rows[1:], result.curve):
            assert int(row[0]) == point.iteration
            assert float(row[4]) == point.greedy_tewl
