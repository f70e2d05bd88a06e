"""Uncertainty functions, their gradients, and the belief-dependent reward.

The expected reward of action ``a`` in belief ``b`` is

    rho(b, a) = state_reward[a] @ b - weights[a] * f(b)

where ``f`` is a nonnegative concave uncertainty function (zero, Shannon
entropy, or Renyi quadratic entropy, all in nats).  Shannon gradients are
only defined on the inner simplex ``{b : b(i) >= epsilon}``.
"""

from __future__ import annotations

import numpy as np

from .filter import observation_likelihood, predict, update
from .model import PomdpModel, UncertaintyKind


class BeliefOutsideEpsilonSimplexError(ValueError):
    """Shannon gradient requested at a belief with an entry below epsilon."""


def uncertainty(kind: UncertaintyKind, b: np.ndarray) -> float:
    """Evaluate the uncertainty function; 0 log 0 is taken as 0."""
    b = np.asarray(b, dtype=float)
    if kind is UncertaintyKind.NONE:
        return 0.0
    if kind is UncertaintyKind.SHANNON:
        pos = b[b > 0.0]
        return float(-(pos * np.log(pos)).sum())
    if kind is UncertaintyKind.RENYI_QUADRATIC:
        return float(-np.log((b * b).sum()))
    raise ValueError(f"unknown uncertainty kind {kind}")


def uncertainty_gradient(kind: UncertaintyKind, b: np.ndarray,
                         epsilon: float = 0.01) -> np.ndarray:
    """Gradient of the uncertainty function with respect to the belief."""
    b = np.asarray(b, dtype=float)
    if kind is UncertaintyKind.NONE:
        return np.zeros_like(b)
    if kind is UncertaintyKind.SHANNON:
        if (b < epsilon).any():
            raise BeliefOutsideEpsilonSimplexError(
                f"min belief entry {b.min()} below epsilon {epsilon}"
            )
        return -(1.0 + np.log(b))
    if kind is UncertaintyKind.RENYI_QUADRATIC:
        return -2.0 * b / (b * b).sum()
    raise ValueError(f"unknown uncertainty kind {kind}")


def expected_reward(model: PomdpModel, b: np.ndarray, a: int) -> float:
    """rho(b, a): linear measurement reward minus weighted uncertainty."""
    if not 0 <= a < model.num_actions:
        raise IndexError(f"action {a} out of range")
    rew = model.reward
    return float(rew.state_reward[a] @ b - rew.weights[a] * uncertainty(rew.kind, b))


def reward_gradient(model: PomdpModel, b: np.ndarray, a: int) -> np.ndarray:
    """d rho(b, a) / d b; inherits the Shannon epsilon-simplex restriction."""
    if not 0 <= a < model.num_actions:
        raise IndexError(f"action {a} out of range")
    rew = model.reward
    grad_f = uncertainty_gradient(rew.kind, b, rew.epsilon)
    return rew.state_reward[a] - rew.weights[a] * grad_f


def information_gain(model: PomdpModel, b: np.ndarray, a: int,
                     kind: UncertaintyKind | None = None) -> float:
    """Expected reduction of the uncertainty function after acting and observing.

    Returns f(b^a) - sum_z eta(z) f(tau(b, a, z)), skipping zero-likelihood
    observations.  Provided for tests and diagnostics, not as a planning
    objective.
    """
    if kind is None:
        kind = model.reward.kind
    ba = predict(model, b, a)
    eta = observation_likelihood(model, b, a)
    gain = uncertainty(kind, ba)
    for z in np.flatnonzero(eta > 0.0):
        gain -= eta[z] * uncertainty(kind, update(model, b, a, int(z)))
    return float(gain)
