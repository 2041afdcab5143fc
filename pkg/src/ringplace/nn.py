"""Dense feed-forward networks with hand-written reverse-mode gradients.

Everything here is plain numpy: rectified-linear hidden layers, identity
output, Adam updates with bias correction, and the two training losses (a
squared temporal-difference error against a frozen target network, and an
actor loss that weights log-policy by the critic's value). A central
finite-difference checker validates every analytic gradient.

Checkpoints are flat binary: a little-endian uint32 header holding the
layer dimensions, then per layer the row-major float64 weight matrix
followed by the float64 bias vector.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .board import StateToken

HIDDEN_DIMS_DEFAULT = (128, 64, 64)


class NonFiniteGradientError(FloatingPointError):
    """Raised when an optimizer update would consume NaN or Inf gradients."""


class CheckpointFormatError(ValueError):
    """Raised when a checkpoint file does not match the binary layout."""


@dataclass
class Mlp:
    """Weights as (fan_in, fan_out) matrices so forward is x @ W + b."""

    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def init(cls, layer_dims: Sequence[int], rng: np.random.Generator) -> "Mlp":
        """Symmetric uniform init with limit sqrt(6 / (fan_in + fan_out))."""
        dims = tuple(int(d) for d in layer_dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ValueError(f"invalid layer dims {dims}")
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(layer_dims=dims, weights=weights, biases=biases)

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def clone(self) -> "Mlp":
        return Mlp(
            layer_dims=self.layer_dims,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def copy_from(self, other: "Mlp") -> None:
        if other.layer_dims != self.layer_dims:
            raise ValueError("layer shape mismatch")
        for w, ow in zip(self.weights, other.weights):
            w[...] = ow
        for b, ob in zip(self.biases, other.biases):
            b[...] = ob


@dataclass
class Gradients:
    """Parameter-shaped gradient stack matching an Mlp."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def zeros_like(cls, net: Mlp) -> "Gradients":
        return cls(
            weights=[np.zeros_like(w) for w in net.weights],
            biases=[np.zeros_like(b) for b in net.biases],
        )


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Evaluate the network; accepts a single vector or a batch of rows."""
    squeeze = x.ndim == 1
    a = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if a.shape[1] != net.layer_dims[0]:
        raise ValueError(
            f"input width {a.shape[1]} does not match layer dims {net.layer_dims}"
        )
    for i in range(net.num_layers):
        a = a @ net.weights[i] + net.biases[i]
        if i < net.num_layers - 1:
            a = np.maximum(a, 0.0)
    return a[0] if squeeze else a


def _forward_trace(net: Mlp, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Batch forward keeping post-activation values for the backward pass."""
    acts = [np.asarray(x, dtype=np.float64)]
    a = acts[0]
    for i in range(net.num_layers):
        a = a @ net.weights[i] + net.biases[i]
        if i < net.num_layers - 1:
            a = np.maximum(a, 0.0)
        acts.append(a)
    return acts, acts[-1]


def _backward(net: Mlp, acts: list[np.ndarray], d_out: np.ndarray) -> Gradients:
    """Reverse-mode pass from an output gradient of shape (batch, out_dim)."""
    grads = Gradients.zeros_like(net)
    delta = d_out
    for i in range(net.num_layers - 1, -1, -1):
        grads.weights[i][...] = acts[i].T @ delta
        grads.biases[i][...] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ net.weights[i].T) * (acts[i] > 0.0)
    return grads


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.99
    epsilon_hat: float = 1e-8
    step: int = 0
    m: Gradients | None = None
    v: Gradients | None = None

    @classmethod
    def for_net(cls, net: Mlp, lr: float = 1e-3, beta1: float = 0.9,
                beta2: float = 0.99) -> "AdamState":
        return cls(
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            m=Gradients.zeros_like(net),
            v=Gradients.zeros_like(net),
        )


def adam_step(net: Mlp, adam: AdamState, grads: Gradients) -> None:
    """One bias-corrected Adam update, in place. Rejects non-finite input."""
    assert adam.m is not None and adam.v is not None
    for g in grads.weights + grads.biases:
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError("gradient contains NaN or Inf")
    adam.step += 1
    c1 = 1.0 - adam.beta1**adam.step
    c2 = 1.0 - adam.beta2**adam.step
    params = net.weights + net.biases
    moments1 = adam.m.weights + adam.m.biases
    moments2 = adam.v.weights + adam.v.biases
    gradient = grads.weights + grads.biases
    for p, m, v, g in zip(params, moments1, moments2, gradient):
        m[...] = adam.beta1 * m + (1.0 - adam.beta1) * g
        v[...] = adam.beta2 * v + (1.0 - adam.beta2) * g * g
        p -= adam.lr * (m / c1) / (np.sqrt(v / c2) + adam.epsilon_hat)


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Transition:
    """One step of experience; next_state None marks episode end."""

    state: StateToken
    action: int
    reward: float
    next_state: StateToken | None


def _batch_arrays(batch: Sequence[Transition]) -> tuple[np.ndarray, np.ndarray]:
    states = np.stack([t.state.bits for t in batch])
    actions = np.array([t.action for t in batch], dtype=np.intp)
    return states, actions


def _td_targets(qt: Mlp, batch: Sequence[Transition], gamma: float) -> np.ndarray:
    """Bootstrapped targets; terminal transitions keep the bare reward."""
    targets = np.array([t.reward for t in batch], dtype=np.float64)
    live = [i for i, t in enumerate(batch) if t.next_state is not None]
    if live:
        next_states = np.stack([batch[i].next_state.bits for i in live])
        targets[live] += gamma * forward(qt, next_states).max(axis=1)
    return targets


def dqn_loss(
    qp: Mlp, qt: Mlp, batch: Sequence[Transition], gamma: float
) -> tuple[float, Gradients]:
    """Mean squared TD error and its gradient for the predictor network.

    The target network is held constant: no gradient flows through it.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    states, actions = _batch_arrays(batch)
    acts, out = _forward_trace(qp, states)
    rows = np.arange(len(batch))
    residual = out[rows, actions] - _td_targets(qt, batch, gamma)
    loss = float(np.mean(residual**2))
    d_out = np.zeros_like(out)
    d_out[rows, actions] = 2.0 * residual / len(batch)
    return loss, _backward(qp, acts, d_out)


def ac_loss(
    actor: Mlp, qp: Mlp, qt: Mlp, batch: Sequence[Transition], gamma: float
) -> tuple[float, Gradients, Gradients]:
    """Actor-critic loss: -log pi(a|s) * Q_p(s,a) averaged, plus the TD loss.

    Q_p(s,a) enters the policy term as a constant weight, so the actor term
    produces no gradient for the critic; the critic gradient is exactly the
    TD loss gradient.
    """
    critic_loss, qp_grads = dqn_loss(qp, qt, batch, gamma)
    states, actions = _batch_arrays(batch)
    rows = np.arange(len(batch))
    q_values = forward(qp, states)[rows, actions]
    acts, logits = _forward_trace(actor, states)
    log_pi = log_softmax(logits)
    policy_loss = float(np.mean(-log_pi[rows, actions] * q_values))
    probs = softmax(logits)
    d_logits = probs * (q_values / len(batch))[:, None]
    d_logits[rows, actions] -= q_values / len(batch)
    actor_grads = _backward(actor, acts, d_logits)
    return policy_loss + critic_loss, actor_grads, qp_grads


# ---------------------------------------------------------------------------
# Finite-difference verification
# ---------------------------------------------------------------------------


def grad_check(
    net: Mlp,
    loss_fn: Callable[[Mlp], tuple[float, Gradients]],
    perturbation: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    The relative error divides by max(1, |analytic|, |numeric|) so that
    near-zero gradients do not inflate round-off noise.
    """
    _, analytic = loss_fn(net)
    worst = 0.0
    params = net.weights + net.biases
    grads = analytic.weights + analytic.biases
    for p, g in zip(params, grads):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.size):
            saved = flat_p[i]
            flat_p[i] = saved + perturbation
            hi, _ = loss_fn(net)
            flat_p[i] = saved - perturbation
            lo, _ = loss_fn(net)
            flat_p[i] = saved
            numeric = (hi - lo) / (2.0 * perturbation)
            err = abs(flat_g[i] - numeric) / max(1.0, abs(flat_g[i]), abs(numeric))
            worst = max(worst, err)
    return worst


def _random_transitions(
    rng: np.random.Generator, state_dim: int, num_actions: int, count: int
) -> list[Transition]:
    batch = []
    for i in range(count):
        bits = np.zeros(state_dim)
        bits[int(rng.integers(0, state_dim))] = 1.0
        nxt = None
        if i % 3 != 2:
            nxt_bits = np.zeros(state_dim)
            nxt_bits[int(rng.integers(0, state_dim))] = 1.0
            nxt = StateToken(bits=nxt_bits, mode="passive")
        batch.append(
            Transition(
                state=StateToken(bits=bits, mode="passive"),
                action=int(rng.integers(0, num_actions)),
                reward=float(rng.uniform(0.0, 1.0)),
                next_state=nxt,
            )
        )
    return batch


def gradient_check_report(seed: int = 0, corrupt: bool = False) -> dict[str, float]:
    """Finite-difference audit of both losses on small random networks.

    ``corrupt`` biases one analytic gradient entry per loss, serving as a
    negative control: the report must then exceed any sane threshold.
    """
    rng = np.random.default_rng(seed)
    dims = (8, 8, 8, 8, 6)
    qp = Mlp.init(dims, rng)
    qt = Mlp.init(dims, rng)
    actor = Mlp.init(dims, rng)
    batch = _random_transitions(rng, dims[0], dims[-1], 5)

    def maybe_corrupt(grads: Gradients) -> Gradients:
        if corrupt:
            grads.weights[0][0, 0] += 0.05
        return grads

    def dqn_fn(net: Mlp) -> tuple[float, Gradients]:
        loss, grads = dqn_loss(net, qt, batch, gamma=0.96)
        return loss, maybe_corrupt(grads)

    # For the combined loss only the actor path is finite-difference
    # checkable: perturbing the critic also moves the detached policy
    # weights, a path the analytic gradient excludes on purpose. The critic
    # gradient is identical to the plain TD gradient checked above.
    def ac_fn(net: Mlp) -> tuple[float, Gradients]:
        loss, actor_grads, _ = ac_loss(net, qp, qt, batch, gamma=0.96)
        return loss, maybe_corrupt(actor_grads)

    return {
        "dqn": grad_check(qp, dqn_fn),
        "ac": grad_check(actor, ac_fn),
    }


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(net: Mlp, path: str | Path) -> None:
    parts = [struct.pack("<I", len(net.layer_dims))]
    parts.append(struct.pack(f"<{len(net.layer_dims)}I", *net.layer_dims))
    for w, b in zip(net.weights, net.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_checkpoint(path: str | Path) -> Mlp:
    blob = Path(path).read_bytes()
    if len(blob) < 4:
        raise CheckpointFormatError(f"{path}: truncated header")
    (count,) = struct.unpack_from("<I", blob, 0)
    offset = 4
    if count < 2 or len(blob) < offset + 4 * count:
        raise CheckpointFormatError(f"{path}: invalid layer header")
    dims = struct.unpack_from(f"<{count}I", blob, offset)
    offset += 4 * count
    expected = sum(
        8 * (fi * fo + fo) for fi, fo in zip(dims[:-1], dims[1:])
    )
    if len(blob) != offset + expected:
        raise CheckpointFormatError(
            f"{path}: payload size {len(blob) - offset} does not match "
            f"layer dims {dims}"
        )
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        w = np.frombuffer(blob, dtype="<f8", count=fan_in * fan_out, offset=offset)
        offset += 8 * fan_in * fan_out
        b = np.frombuffer(blob, dtype="<f8", count=fan_out, offset=offset)
        offset += 8 * fan_out
        weights.append(w.reshape(fan_in, fan_out).astype(np.float64))
        biases.append(b.astype(np.float64))
    return Mlp(layer_dims=tuple(int(d) for d in dims), weights=weights, biases=biases)
