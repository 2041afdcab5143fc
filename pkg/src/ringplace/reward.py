"""Reward model and episodic placement environment.

Placement quality is rewarded through two binary indicators blended by a
weight alpha: one for keeping a margin to every already-placed passive, one
for choosing a slot near the passive's net pins. Net proximity is relaxed
from "the single closest slot" to membership in the Top-K closest slots,
recorded in a dense table so agents can look rewards up cheaply.

An episode visits passives in fixed index order; each step commits one slot
choice and immediately yields the total reward for that placement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .board import PASSIVE_MODE, PcbInstance, StateToken, encode_state, slot_anchor

OVERLAP_MARGIN_MAX = "max"


class EnvProtocolError(RuntimeError):
    """Raised when the environment is stepped after the episode ended."""


@dataclass(frozen=True)
class RewardConfig:
    """Knobs of the reward model.

    ``k`` of None derives the Top-K size from the instance as
    ceil(num_actions / num_nets). The overlap margin rule names how the
    scalar clearance of a passive comes out of its two dimensions; only
    "max" (circumscribing) is supported.
    """

    alpha: float = 0.6
    k: int | None = None
    overlap_margin_rule: str = OVERLAP_MARGIN_MAX

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.k is not None and self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.overlap_margin_rule != OVERLAP_MARGIN_MAX:
            raise ValueError(
                f"unknown overlap margin rule {self.overlap_margin_rule!r}"
            )


def effective_k(instance: PcbInstance, config: RewardConfig) -> int:
    if config.k is not None:
        return min(config.k, instance.num_actions)
    if instance.num_nets == 0:
        return instance.num_actions
    return min(
        math.ceil(instance.num_actions / instance.num_nets), instance.num_actions
    )


def overlap_margin(instance: PcbInstance, passive_index: int) -> float:
    """Scalar clearance d(s): the larger of the passive's two dimensions."""
    dims = instance.passives[passive_index].dims
    return max(dims[0], dims[1])


@dataclass(frozen=True)
class RewardTable:
    """Dense proximity rewards plus the per-passive Top-K slot sets."""

    gamma: np.ndarray
    topk_sets: tuple[tuple[int, ...], ...]
    k: int

    def __post_init__(self) -> None:
        self.gamma.setflags(write=False)


@dataclass
class EpisodeTrace:
    """Choices made this episode: one slot per visited passive."""

    sqp: np.ndarray
    chosen: dict[int, int] = field(default_factory=dict)
    rewards: dict[int, float] = field(default_factory=dict)

    @classmethod
    def empty(cls, instance: PcbInstance) -> "EpisodeTrace":
        return cls(sqp=np.zeros((instance.num_passives, instance.num_actions)))

    def record(self, state: int, action: int) -> None:
        self.sqp[state, :] = 0.0
        self.sqp[state, action] = 1.0
        self.chosen[state] = action


def net_centroid(instance: PcbInstance, passive_index: int) -> np.ndarray | None:
    """Mean position of the pins on the passive's net.

    Returns None for excluded or pin-less nets; callers treat that as an
    empty Top-K set.
    """
    net = instance.passives[passive_index].net
    if net in instance.excluded_nets:
        return None
    pins = instance.pins_on_net(net)
    if not pins:
        return None
    return np.mean([p.pos for p in pins], axis=0)


def build_gamma(instance: PcbInstance, config: RewardConfig) -> RewardTable:
    """Rank slots by distance to each passive's net centroid, reward Top-K.

    Ties in distance resolve to the lower slot index. Passives without a
    centroid get an all-zero row.
    """
    k = effective_k(instance, config)
    anchors = np.array([s.anchor for s in instance.slots])
    gamma = np.zeros((instance.num_passives, instance.num_actions))
    topk_sets: list[tuple[int, ...]] = []
    for s in range(instance.num_passives):
        centroid = net_centroid(instance, s)
        if centroid is None:
            topk_sets.append(())
            continue
        dists = np.hypot(anchors[:, 0] - centroid[0], anchors[:, 1] - centroid[1])
        order = np.argsort(dists, kind="stable")
        top = tuple(int(a) for a in order[:k])
        topk_sets.append(top)
        gamma[s, list(top)] = 1.0
    return RewardTable(gamma=gamma, topk_sets=tuple(topk_sets), k=k)


def save_gamma(table: RewardTable, path: str | Path) -> None:
    """Write the reward table as a text matrix, one passive per row."""
    np.savetxt(path, table.gamma, fmt="%g")


def reward_nonoverlap(
    instance: PcbInstance,
    trace: EpisodeTrace,
    state: int,
    config: RewardConfig,
) -> float:
    """1.0 iff every other placed anchor is farther than the clearance d(s)."""
    action = trace.chosen[state]
    ax, ay = slot_anchor(instance, action)
    margin = overlap_margin(instance, state)
    for other, other_action in trace.chosen.items():
        if other == state:
            continue
        bx, by = slot_anchor(instance, other_action)
        if math.hypot(ax - bx, ay - by) <= margin:
            return 0.0
    return 1.0


def reward_proximity(table: RewardTable, trace: EpisodeTrace, state: int) -> float:
    """1.0 iff the chosen slot carries a positive proximity reward."""
    return 1.0 if table.gamma[state, trace.chosen[state]] > 0.0 else 0.0


def total_reward(
    instance: PcbInstance,
    table: RewardTable,
    trace: EpisodeTrace,
    state: int,
    config: RewardConfig,
) -> float:
    a = config.alpha
    return a * reward_nonoverlap(instance, trace, state, config) + (
        1.0 - a
    ) * reward_proximity(table, trace, state)


class PlacementEnv:
    """One placement episode: passives visited in index order 0..M-1.

    ``step`` commits a slot for the current passive, returns the next state
    token (None once all passives are placed) and the immediate reward for
    the placement just made.
    """

    def __init__(
        self,
        instance: PcbInstance,
        table: RewardTable,
        config: RewardConfig,
        mode: str = PASSIVE_MODE,
    ) -> None:
        self.instance = instance
        self.table = table
        self.config = config
        self.mode = mode
        self.trace = EpisodeTrace.empty(instance)
        self._cursor = 0

    @property
    def done(self) -> bool:
        return self._cursor >= self.instance.num_passives

    def current_state(self) -> int:
        if self.done:
            raise EnvProtocolError("episode already terminal")
        return self._cursor

    def current_token(self) -> StateToken:
        return encode_state(self.instance, self.current_state(), self.mode)

    def step(self, action: int) -> tuple[StateToken | None, float]:
        state = self.current_state()
        if not 0 <= action < self.instance.num_actions:
            raise IndexError(
                f"action {action} out of range [0, {self.instance.num_actions})"
            )
        self.trace.record(state, action)
        reward = total_reward(self.instance, self.table, self.trace, state, self.config)
        self.trace.rewards[state] = reward
        self._cursor += 1
        if self.done:
            return None, reward
        return encode_state(self.instance, self._cursor, self.mode), reward


def env_reset(
    instance: PcbInstance,
    table: RewardTable,
    config: RewardConfig,
    seed: int | None = None,
    mode: str = PASSIVE_MODE,
) -> PlacementEnv:
    """Start a fresh episode. The visiting order is fixed, so the seed only
    exists for interface symmetry with stochastic callers."""
    del seed
    return PlacementEnv(instance, table, config, mode=mode)


def env_step(env: PlacementEnv, action: int) -> tuple[StateToken | None, float]:
    return env.step(action)
