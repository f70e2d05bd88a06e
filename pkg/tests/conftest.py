import numpy as np
import pytest

from beliefbound import (
    PomdpModel,
    RewardSpec,
    UncertaintyKind,
    compute_certificate,
    tracking_model_small,
)


def random_dense_model(seed, num_states=3, num_actions=2, num_observations=3,
                       kind=UncertaintyKind.NONE, discount=0.9,
                       weight_scale=0.5) -> PomdpModel:
    """Random model with strictly positive tensors (no zero-likelihood branches)."""
    rng = np.random.default_rng(seed)
    T = rng.uniform(0.05, 1.0, size=(num_actions, num_states, num_states))
    T /= T.sum(axis=1, keepdims=True)
    O = rng.uniform(0.05, 1.0, size=(num_actions, num_observations, num_states))
    O /= O.sum(axis=1, keepdims=True)
    R = rng.normal(size=(num_actions, num_states))
    w = (rng.uniform(0.1, 1.0, size=num_actions) * weight_scale
         if kind is not UncertaintyKind.NONE else np.zeros(num_actions))
    return PomdpModel(transitions=T, observations=O, discount=discount,
                      reward=RewardSpec(state_reward=R, weights=w, kind=kind))


def interior_belief(rng, num_states, floor=0.05) -> np.ndarray:
    """Random belief bounded away from the simplex boundary."""
    b = rng.exponential(size=num_states)
    b /= b.sum()
    b = floor + (1.0 - num_states * floor) * b
    return b / b.sum()


@pytest.fixture(scope="session")
def small_model():
    return tracking_model_small()


@pytest.fixture(scope="session")
def small_cert(small_model):
    return compute_certificate(small_model)
