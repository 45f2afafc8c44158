from .bandit import BanditState, BanditStrategy, EpsilonSchedule, initial_grid
from .base import Strategy
from .model_free import ModelFreeStrategy, OpponentModel
from .static import AdaptiveThreshold, FixedThreshold, NashStrategy, UniformReference, uniform_reference_threshold

REGISTRY = {
    "fixed": FixedThreshold,
    "adaptive": AdaptiveThreshold,
    "nash": NashStrategy,
    "uniform": UniformReference,
    "model_free": ModelFreeStrategy,
    "bandit": BanditStrategy,
}


def make_strategy(kind: str, **params) -> Strategy:
    try:
        cls = REGISTRY[kind]
    except KeyError:
        raise ValueError(f"unknown strategy kind {kind!r}; known: {sorted(REGISTRY)}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind!r}: {exc}") from None


__all__ = [
    "AdaptiveThreshold",
    "BanditState",
    "BanditStrategy",
    "EpsilonSchedule",
    "FixedThreshold",
    "ModelFreeStrategy",
    "NashStrategy",
    "OpponentModel",
    "REGISTRY",
    "Strategy",
    "UniformReference",
    "initial_grid",
    "make_strategy",
    "uniform_reference_threshold",
]
