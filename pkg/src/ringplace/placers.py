"""Estimator-style front end: fit a placer on an instance, predict a layout.

Thin adapters over the training procedures so placement runs fit the usual
fit/predict/score shape: constructor arguments mirror the config fields,
``fit`` trains on one instance, ``predict`` emits a placement, ``score``
returns negative wirelength (higher is better). All estimators expose
``get_params``/``set_params`` for sweeps.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .agents import (
    SaConfig,
    TrainConfig,
    predict_placement,
    run_sa,
    train_a2c,
    train_dqn,
)
from .board import PASSIVE_MODE, PcbInstance, Placement
from .metrics import tewl
from .nn import HIDDEN_DIMS_DEFAULT


def _check_instance(instance) -> PcbInstance:
    if not isinstance(instance, PcbInstance):
        raise TypeError(
            f"expected a PcbInstance, got {type(instance).__name__}; "
            "load one with board.load_instance or build it via generate"
        )
    return instance


class _NetworkPlacer(BaseEstimator):
    """Shared plumbing for the two learned placers."""

    def _train(self, instance: PcbInstance, config: TrainConfig):
        raise NotImplementedError

    def _train_config(self) -> TrainConfig:
        raise NotImplementedError

    def fit(self, instance: PcbInstance, y=None) -> "_NetworkPlacer":
        instance = _check_instance(instance)
        result = self._train(instance, self._train_config())
        self.instance_ = instance
        self.result_ = result
        self.placement_ = result.placement
        self.metrics_ = result.metrics
        self.policy_net_ = result.policy_net
        self.mode_ = result.mode
        return self

    def predict(self, instance: PcbInstance | None = None) -> Placement:
        check_is_fitted(self, "placement_")
        if instance is None or instance is self.instance_:
            return self.placement_
        return predict_placement(_check_instance(instance), self.policy_net_, self.mode_)

    def score(self, instance: PcbInstance | None = None, y=None) -> float:
        check_is_fitted(self, "placement_")
        target = self.instance_ if instance is None else _check_instance(instance)
        return -tewl(target, self.predict(instance))


class DqnPlacer(_NetworkPlacer):
    """Value-learning placer; net-aware tokens when mode is passive+net."""

    def __init__(
        self,
        mode: str = PASSIVE_MODE,
        gamma: float = 0.96,
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.99,
        minibatch: int = 24,
        epsilon_start: float = 0.9,
        epsilon_end: float = 0.1,
        epsilon_horizon: int = 20000,
        target_update_period: int = 800,
        alpha: float = 0.6,
        k: int | None = None,
        seed: int = 0,
        max_episodes: int = 2000,
        hidden_dims: tuple[int, ...] = HIDDEN_DIMS_DEFAULT,
    ) -> None:
        self.mode = mode
        self.gamma = gamma
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.minibatch = minibatch
        self.epsilon_start = epsilon_start
        self.epsilon_end = epsilon_end
        self.epsilon_horizon = epsilon_horizon
        self.target_update_period = target_update_period
        self.alpha = alpha
        self.k = k
        self.seed = seed
        self.max_episodes = max_episodes
        self.hidden_dims = hidden_dims

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            mode=self.mode,
            gamma=self.gamma,
            lr=self.lr,
            beta1=self.beta1,
            beta2=self.beta2,
            minibatch=self.minibatch,
            epsilon_start=self.epsilon_start,
            epsilon_end=self.epsilon_end,
            epsilon_horizon=self.epsilon_horizon,
            target_update_period=self.target_update_period,
            alpha=self.alpha,
            k=self.k,
            seed=self.seed,
            max_episodes=self.max_episodes,
            hidden_dims=tuple(self.hidden_dims),
        )

    def _train(self, instance, config):
        return train_dqn(instance, config)


class A2cPlacer(DqnPlacer):
    """Policy-sampling placer with a value critic trained alongside."""

    def _train(self, instance, config):
        return train_a2c(instance, config)


class SaPlacer(BaseEstimator):
    """Annealing placer; fit explores one instance, predict returns the best."""

    def __init__(
        self,
        initial_temperature: float | None = None,
        cooling_rate: float = 0.9995,
        iterations: int = 50000,
        seed: int = 0,
        classical_acceptance: bool = False,
    ) -> None:
        self.initial_temperature = initial_temperature
        self.cooling_rate = cooling_rate
        self.iterations = iterations
        self.seed = seed
        self.classical_acceptance = classical_acceptance

    def fit(self, instance: PcbInstance, y=None) -> "SaPlacer":
        instance = _check_instance(instance)
        result = run_sa(
            instance,
            SaConfig(
                initial_temperature=self.initial_temperature,
                cooling_rate=self.cooling_rate,
                iterations=self.iterations,
                seed=self.seed,
                classical_acceptance=self.classical_acceptance,
            ),
        )
        self.instance_ = instance
        self.result_ = result
        self.placement_ = result.placement
        self.metrics_ = result.metrics
        return self

    def predict(self, instance: PcbInstance | None = None) -> Placement:
        check_is_fitted(self, "placement_")
        if instance is not None and instance is not self.instance_:
            raise ValueError(
                "annealing learns no transferable policy; fit the new instance"
            )
        return self.placement_

    def score(self, instance: PcbInstance | None = None, y=None) -> float:
        check_is_fitted(self, "placement_")
        return -tewl(self.instance_, self.placement_)
