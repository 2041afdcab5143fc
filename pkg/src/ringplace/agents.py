"""Training and inference: value learning, actor-critic, annealing, oracle.

All methods solve the same episodic task: visit passives in index order and
commit each to a slot. The learned methods train online on a sliding window
of the most recent transitions (there is no replay buffer) and read out
greedy placements with occupied slots masked, which keeps every emitted
layout injective. Annealing walks injective assignments directly. The
brute-force oracle enumerates them all and anchors the tests.
"""

from __future__ import annotations

import csv
import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .board import PASSIVE_MODE, ENCODING_MODES, PcbInstance, Placement, state_dim
from .metrics import MetricsReport, evaluate_placement, tewl, wire_contribution
from .nn import (
    AdamState,
    HIDDEN_DIMS_DEFAULT,
    Mlp,
    Transition,
    ac_loss,
    adam_step,
    dqn_loss,
    forward,
    softmax,
)
from .reward import PlacementEnv, RewardConfig, RewardTable, build_gamma


class OracleScaleError(ValueError):
    """Raised when exhaustive enumeration would exceed the budget."""


class TrainingDivergedError(RuntimeError):
    """Raised when a training loss stops being finite.

    Carries the learning curve recorded so far, so callers can keep the
    partial trace for diagnosis.
    """

    def __init__(self, message: str, curve: "list[CurvePoint] | None" = None) -> None:
        super().__init__(message)
        self.curve: list[CurvePoint] = list(curve or [])


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by the two learned methods."""

    mode: str = PASSIVE_MODE
    gamma: float = 0.96
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.99
    minibatch: int = 24
    epsilon_start: float = 0.9
    epsilon_end: float = 0.1
    epsilon_horizon: int = 20000
    target_update_period: int = 800
    alpha: float = 0.6
    k: int | None = None
    seed: int = 0
    max_episodes: int = 2000
    hidden_dims: tuple[int, ...] = HIDDEN_DIMS_DEFAULT

    def __post_init__(self) -> None:
        if self.mode not in ENCODING_MODES:
            raise ValueError(f"unknown encoding mode {self.mode!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise ValueError(
                "need 0 <= epsilon_end <= epsilon_start <= 1, got "
                f"{self.epsilon_end}..{self.epsilon_start}"
            )
        if self.epsilon_horizon < 1:
            raise ValueError("epsilon_horizon must be positive")
        if self.minibatch < 1:
            raise ValueError("minibatch must be positive")
        if self.target_update_period < 1:
            raise ValueError("target_update_period must be positive")
        if self.max_episodes < 1:
            raise ValueError("max_episodes must be positive")

    def reward_config(self) -> RewardConfig:
        return RewardConfig(alpha=self.alpha, k=self.k)


@dataclass(frozen=True)
class SaConfig:
    """Annealing schedule; a None temperature scales to the instance."""

    initial_temperature: float | None = None
    cooling_rate: float = 0.9995
    iterations: int = 50000
    seed: int = 0
    classical_acceptance: bool = False

    def __post_init__(self) -> None:
        if self.initial_temperature is not None and self.initial_temperature <= 0:
            raise ValueError("initial temperature must be positive")
        if not 0.0 < self.cooling_rate < 1.0:
            raise ValueError("cooling rate must be in (0, 1)")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")


@dataclass(frozen=True)
class CurvePoint:
    """One learning-curve sample, recorded at episode end.

    For annealing, episode_reward carries the currently accepted wirelength
    and greedy_tewl the best seen so far.
    """

    iteration: int
    epsilon: float
    loss: float
    episode_reward: float
    greedy_tewl: float


@dataclass
class TrainResult:
    placement: Placement
    metrics: MetricsReport
    curve: list[CurvePoint] = field(default_factory=list)
    policy_net: Mlp | None = None
    mode: str = PASSIVE_MODE


def save_curve(curve: Iterable[CurvePoint], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["iteration", "epsilon", "loss", "episode_reward", "greedy_tewl"]
        )
        for point in curve:
            writer.writerow(
                [
                    point.iteration,
                    point.epsilon,
                    point.loss,
                    point.episode_reward,
                    point.greedy_tewl,
                ]
            )


def epsilon_schedule(iteration: int, config: TrainConfig) -> float:
    """Exploration rate: linear decay, then flat at exactly epsilon_end."""
    frac = min(max(iteration, 0) / config.epsilon_horizon, 1.0)
    if frac >= 1.0:
        return config.epsilon_end
    return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac


def predict_placement(instance: PcbInstance, net: Mlp, mode: str) -> Placement:
    """Greedy readout: per passive, the best-scoring unoccupied slot.

    Works for value networks and actors alike since softmax preserves the
    argmax. Masking already-chosen slots makes the result injective and,
    with at least as many slots as passives, complete. Ties resolve to the
    lower slot index.
    """
    from .board import encode_state

    occupied: list[int] = []
    assignment: dict[int, int] = {}
    for s in range(instance.num_passives):
        scores = forward(net, encode_state(instance, s, mode).bits).copy()
        if occupied:
            scores[occupied] = -np.inf
        action = int(np.argmax(scores))
        assignment[s] = action
        occupied.append(action)
    return Placement.from_mapping(instance, assignment)


def _greedy_tewl(instance: PcbInstance, net: Mlp, mode: str) -> float:
    return tewl(instance, predict_placement(instance, net, mode))


def _check_finite(
    loss: float, iteration: int, eps: float, curve: list[CurvePoint]
) -> None:
    if not math.isfinite(loss):
        raise TrainingDivergedError(
            f"training diverged at iteration {iteration}: "
            f"loss={loss}, epsilon={eps:.4f}",
            curve=curve,
        )


def train_dqn(instance: PcbInstance, config: TrainConfig) -> TrainResult:
    """Online value learning with a hard-updated target network.

    Per step: epsilon-greedy action (no masking during training; the
    clearance reward carries the penalty), immediate reward, one update on
    the window of the most recent transitions. The target network is copied
    from the predictor every target_update_period iterations.
    """
    rng = np.random.default_rng(config.seed)
    reward_config = config.reward_config()
    table = build_gamma(instance, reward_config)
    dims = (
        state_dim(instance, config.mode),
        *config.hidden_dims,
        instance.num_actions,
    )
    qp = Mlp.init(dims, rng)
    qt = qp.clone()
    adam = AdamState.for_net(qp, lr=config.lr, beta1=config.beta1, beta2=config.beta2)
    window: deque[Transition] = deque(maxlen=config.minibatch)

    curve: list[CurvePoint] = []
    iteration = 0
    eps = config.epsilon_start
    loss = 0.0
    for _ in range(config.max_episodes):
        env = PlacementEnv(instance, table, reward_config, mode=config.mode)
        token = env.current_token()
        episode_reward = 0.0
        while not env.done:
            eps = epsilon_schedule(iteration, config)
            if rng.random() < eps:
                action = int(rng.integers(0, instance.num_actions))
            else:
                action = int(np.argmax(forward(qp, token.bits)))
            next_token, reward = env.step(action)
            episode_reward += reward
            window.append(Transition(token, action, reward, next_token))
            loss, grads = dqn_loss(qp, qt, list(window), config.gamma)
            _check_finite(loss, iteration, eps, curve)
            adam_step(qp, adam, grads)
            iteration += 1
            if iteration % config.target_update_period == 0:
                qt.copy_from(qp)
            token = next_token
        curve.append(
            CurvePoint(
                iteration=iteration,
                epsilon=eps,
                loss=loss,
                episode_reward=episode_reward,
                greedy_tewl=_greedy_tewl(instance, qp, config.mode),
            )
        )

    placement = predict_placement(instance, qp, config.mode)
    return TrainResult(
        placement=placement,
        metrics=evaluate_placement(instance, placement),
        curve=curve,
        policy_net=qp,
        mode=config.mode,
    )


def train_a2c(instance: PcbInstance, config: TrainConfig) -> TrainResult:
    """Actor-critic: actions sampled from the softmax policy while a value
    critic learns alongside; inference reads the actor greedily."""
    rng = np.random.default_rng(config.seed)
    reward_config = config.reward_config()
    table = build_gamma(instance, reward_config)
    dims = (
        state_dim(instance, config.mode),
        *config.hidden_dims,
        instance.num_actions,
    )
    actor = Mlp.init(dims, rng)
    qp = Mlp.init(dims, rng)
    qt = qp.clone()
    adam_actor = AdamState.for_net(
        actor, lr=config.lr, beta1=config.beta1, beta2=config.beta2
    )
    adam_critic = AdamState.for_net(
        qp, lr=config.lr, beta1=config.beta1, beta2=config.beta2
    )
    window: deque[Transition] = deque(maxlen=config.minibatch)

    curve: list[CurvePoint] = []
    iteration = 0
    loss = 0.0
    for _ in range(config.max_episodes):
        env = PlacementEnv(instance, table, reward_config, mode=config.mode)
        token = env.current_token()
        episode_reward = 0.0
        while not env.done:
            probs = softmax(forward(actor, token.bits))
            action = int(rng.choice(instance.num_actions, p=probs))
            next_token, reward = env.step(action)
            episode_reward += reward
            window.append(Transition(token, action, reward, next_token))
            loss, actor_grads, critic_grads = ac_loss(
                actor, qp, qt, list(window), config.gamma
            )
            _check_finite(loss, iteration, 0.0, curve)
            adam_step(actor, adam_actor, actor_grads)
            adam_step(qp, adam_critic, critic_grads)
            iteration += 1
            if iteration % config.target_update_period == 0:
                qt.copy_from(qp)
            token = next_token
        curve.append(
            CurvePoint(
                iteration=iteration,
                epsilon=0.0,
                loss=loss,
                episode_reward=episode_reward,
                greedy_tewl=_greedy_tewl(instance, actor, config.mode),
            )
        )

    placement = predict_placement(instance, actor, config.mode)
    return TrainResult(
        placement=placement,
        metrics=evaluate_placement(instance, placement),
        curve=curve,
        policy_net=actor,
        mode=config.mode,
    )


def acceptance_probability(delta: float, temperature: float) -> float:
    """Annealing acceptance: 1 for non-worsening moves, exp(-delta/T) else."""
    if delta <= 0.0:
        return 1.0
    return math.exp(-delta / temperature)


def mean_pairwise_slot_distance(instance: PcbInstance) -> float:
    """Average anchor-to-anchor distance; the default starting temperature."""
    anchors = [s.anchor for s in instance.slots]
    if len(anchors) < 2:
        return 1.0
    total = 0.0
    count = 0
    for i in range(len(anchors)):
        for j in range(i + 1, len(anchors)):
            total += math.hypot(
                anchors[i][0] - anchors[j][0], anchors[i][1] - anchors[j][1]
            )
            count += 1
    return total / count


def run_sa(instance: PcbInstance, config: SaConfig) -> TrainResult:
    """Anneal over injective assignments, tracking the best wirelength seen.

    Moves alternate (by coin flip) between relocating one passive to a
    random free slot and swapping two passives. A worse candidate is
    accepted with probability exp(-delta / T); delta is measured against
    the best wirelength so far, or against the current one when classical
    acceptance is selected. T shrinks by the cooling rate every iteration.
    """
    if instance.num_actions < instance.num_passives:
        raise ValueError("need at least as many slots as passives")
    rnd = random.Random(config.seed)
    m = instance.num_passives
    n = instance.num_actions
    contrib = [
        [wire_contribution(instance, s, a) for a in range(n)] for s in range(m)
    ]

    def total_of(assign: list[int]) -> float:
        # Same accumulation order as the metrics module, bit for bit.
        total = 0.0
        for s in range(m):
            total += contrib[s][assign[s]]
        return total

    assignment = rnd.sample(range(n), m)
    free = [a for a in range(n) if a not in set(assignment)]
    current = total_of(assignment)
    best = list(assignment)
    best_tewl = current

    temperature = (
        config.initial_temperature
        if config.initial_temperature is not None
        else mean_pairwise_slot_distance(instance)
    )
    can_move = n > m
    can_swap = m > 1
    record_every = max(1, config.iterations // 200)

    curve: list[CurvePoint] = [
        CurvePoint(0, 0.0, 0.0, current, best_tewl)
    ]
    for it in range(config.iterations):
        if not (can_move or can_swap):
            break
        do_move = can_move and (not can_swap or rnd.random() < 0.5)
        candidate = list(assignment)
        if do_move:
            s = rnd.randrange(m)
            free_pos = rnd.randrange(len(free))
            candidate[s] = free[free_pos]
        else:
            s1 = rnd.randrange(m)
            s2 = (s1 + 1 + rnd.randrange(m - 1)) % m
            candidate[s1], candidate[s2] = candidate[s2], candidate[s1]

        new_tewl = total_of(candidate)
        reference = current if config.classical_acceptance else best_tewl
        delta = new_tewl - reference
        if delta <= 0.0 or rnd.random() < acceptance_probability(delta, temperature):
            if do_move:
                free[free_pos] = assignment[s]
            assignment = candidate
            current = new_tewl
            if new_tewl < best_tewl:
                best = list(candidate)
                best_tewl = new_tewl
        temperature *= config.cooling_rate
        if (it + 1) % record_every == 0:
            curve.append(CurvePoint(it + 1, 0.0, 0.0, current, best_tewl))

    placement = Placement.from_mapping(
        instance, {s: best[s] for s in range(m)}
    )
    return TrainResult(
        placement=placement,
        metrics=evaluate_placement(instance, placement),
        curve=curve,
        policy_net=None,
        mode=PASSIVE_MODE,
    )


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------

ORACLE_LIMIT = 10_000_000

OBJECTIVE_TEWL = "tewl"
OBJECTIVE_REWARD = "reward"


def _enumeration_size(n: int, m: int) -> int:
    size = 1
    for i in range(m):
        size *= n - i
    return size


def brute_force_oracle(
    instance: PcbInstance,
    objective: str = OBJECTIVE_TEWL,
    config: RewardConfig | None = None,
    limit: int = ORACLE_LIMIT,
) -> tuple[tuple[int, ...], float]:
    """Globally optimal injective assignment by exhaustive enumeration.

    Minimizes wirelength or maximizes the summed episode reward. Strict
    improvement keeps the first optimum found, so ties resolve to the
    lexicographically smallest assignment. Instances whose enumeration
    exceeds the limit raise :class:`OracleScaleError`.
    """
    m = instance.num_passives
    n = instance.num_actions
    size = _enumeration_size(n, m)
    if size > limit:
        raise OracleScaleError(
            f"{size} injective assignments exceed the enumeration limit {limit}"
        )
    if objective not in (OBJECTIVE_TEWL, OBJECTIVE_REWARD):
        raise ValueError(f"unknown objective {objective!r}")

    if objective == OBJECTIVE_TEWL:
        contrib = [
            [wire_contribution(instance, s, a) for a in range(n)] for s in range(m)
        ]
        best_assign: tuple[int, ...] | None = None
        best_value = 0.0
        for perm in itertools.permutations(range(n), m):
            total = 0.0
            for s in range(m):
                total += contrib[s][perm[s]]
            if best_assign is None or total < best_value:
                best_assign = perm
                best_value = total
        assert best_assign is not None
        return best_assign, best_value

    reward_config = config or RewardConfig()
    table = build_gamma(instance, reward_config)
    best_assign = None
    best_value = 0.0
    for perm in itertools.permutations(range(n), m):
        env = PlacementEnv(instance, table, reward_config)
        value = 0.0
        for action in perm:
            _, reward = env.step(action)
            value += reward
        if best_assign is None or value > best_value:
            best_assign = perm
            best_value = value
    assert best_assign is not None
    return best_assign, best_value


def find_zero_overlap_assignment(
    instance: PcbInstance, limit: int = ORACLE_LIMIT
) -> tuple[int, ...] | None:
    """First injective assignment with no overlapping rectangles, if any."""
    from .metrics import count_overlaps

    m = instance.num_passives
    n = instance.num_actions
    if _enumeration_size(n, m) > limit:
        raise OracleScaleError("instance too large for feasibility enumeration")
    for perm in itertools.permutations(range(n), m):
        placement = Placement.from_mapping(
            instance, {s: perm[s] for s in range(m)}
        )
        if count_overlaps(instance, placement) == 0:
            return perm
    return None
