"""Belief dynamics and stochastic-order utilities.

Beliefs are plain 1-d numpy arrays on the probability simplex.  All
operations here are pure; samplers are deterministic for a fixed seed.
"""

from __future__ import annotations

import numpy as np

from .model import PomdpModel

BELIEF_TOL = 1e-9
ORDER_TOL = 1e-12
ZERO_LIKELIHOOD = 1e-300


class ZeroLikelihoodError(ValueError):
    """Observation has (numerically) zero probability under this belief."""


def as_belief(values, tol: float = BELIEF_TOL) -> np.ndarray:
    """Validate and return a belief vector (nonnegative, sums to 1)."""
    b = np.asarray(values, dtype=float)
    if b.ndim != 1:
        raise ValueError("belief must be a 1-d vector")
    if not np.isfinite(b).all():
        raise ValueError(f"belief has non-finite entries: {b}")
    if (b < -tol).any():
        raise ValueError(f"belief has negative entries: {b}")
    if abs(b.sum() - 1.0) > tol:
        raise ValueError(f"belief sums to {b.sum()}, not 1")
    return b


def predict(model: PomdpModel, b: np.ndarray, a: int) -> np.ndarray:
    """Push the belief through the transition model: b^a(s') = sum_s T(s',s,a) b(s)."""
    if not 0 <= a < model.num_actions:
        raise IndexError(f"action {a} out of range")
    return model.transitions[a] @ b


def observation_likelihood(model: PomdpModel, b: np.ndarray, a: int) -> np.ndarray:
    """Distribution over next observations after acting: eta(z | b, a)."""
    return model.observations[a] @ predict(model, b, a)


def update(model: PomdpModel, b: np.ndarray, a: int, z: int) -> np.ndarray:
    """Bayes update tau(b, a, z); raises ZeroLikelihoodError for impossible z."""
    if not 0 <= z < model.num_observations:
        raise IndexError(f"observation {z} out of range")
    ba = predict(model, b, a)
    joint = model.observations[a][z] * ba
    eta = joint.sum()
    if eta <= ZERO_LIKELIHOOD:
        raise ZeroLikelihoodError(f"observation {z} has likelihood {eta} under action {a}")
    return joint / eta


def mlr_geq(b1: np.ndarray, b2: np.ndarray, tol: float = ORDER_TOL) -> bool:
    """True iff b1 dominates b2 in the monotone likelihood ratio order.

    Uses the division-free cross-product form b1(i) b2(j) <= b2(i) b1(j)
    for all i < j, so zero entries need no special casing.
    """
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1.shape != b2.shape:
        raise ValueError("belief length mismatch")
    X = np.outer(b1, b2)
    diff = X - X.T                    # diff[i, j] = b1(i) b2(j) - b2(i) b1(j)
    iu = np.triu_indices(len(b1), k=1)
    return bool((diff[iu] <= tol).all())


def fosd_geq(b1: np.ndarray, b2: np.ndarray, tol: float = ORDER_TOL) -> bool:
    """True iff every upper-tail sum of b1 dominates that of b2 (first-order dominance)."""
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1.shape != b2.shape:
        raise ValueError("belief length mismatch")
    t1 = np.cumsum(b1[::-1])[::-1]
    t2 = np.cumsum(b2[::-1])[::-1]
    return bool((t1 >= t2 - tol).all())


def sample_belief(num_states: int, seed) -> np.ndarray:
    """Uniform sample from the simplex (normalized unit-rate exponentials)."""
    if num_states < 2:
        raise ValueError("need at least 2 states")
    rng = np.random.default_rng(seed)
    b = rng.exponential(size=num_states)
    return b / b.sum()


def sample_mlr_pair(num_states: int, seed, max_log_ratio: float = 1.0):
    """Sample ``(b1, b2)`` with ``b1 >= b2`` in the MLR order.

    b2 is uniform on the simplex and b1 is proportional to b2 times an
    increasing positive likelihood vector, which guarantees the order by
    construction.  ``max_log_ratio`` caps the per-step log-increment of the
    likelihood vector.
    """
    rng = np.random.default_rng(seed)
    b2 = rng.exponential(size=num_states)
    b2 /= b2.sum()
    ell = np.exp(np.cumsum(rng.uniform(0.0, max_log_ratio, size=num_states)))
    b1 = b2 * ell
    b1 /= b1.sum()
    return b1, b2


def sample_reachable(model: PomdpModel, b0: np.ndarray, depth: int, seed) -> np.ndarray:
    """Apply ``depth`` random (action, observation) filter steps from b0.

    Actions are uniform; observations are drawn from their likelihood, so
    the result is a belief genuinely reachable from b0.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    rng = np.random.default_rng(seed)
    b = np.asarray(b0, dtype=float)
    for _ in range(depth):
        a = int(rng.integers(model.num_actions))
        eta = observation_likelihood(model, b, a)
        z = int(rng.choice(model.num_observations, p=eta / eta.sum()))
        b = update(model, b, a, z)
    return b
