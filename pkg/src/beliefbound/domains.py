"""Target-tracking POMDP family generators.

States are ordered from innocuous (0) to dangerous (S-1); actions are
ordered from highest tracking priority (0) to lowest (A-1).  Lower priority
makes drift toward high states more likely.  Observations identify the true
state with probability ``q`` and err to a neighboring state otherwise.
"""

from __future__ import annotations

import numpy as np

from .model import PomdpModel, RewardSpec, UncertaintyKind


def default_sequences(num_states: int, num_actions: int):
    """Increasing sequences used by the transition construction.

    ``x_i = i`` (1-based) over states and ``y_j = j - S*A - 1`` over the
    S*A column slots, so the y values run from -S*A up to -1.
    """
    x = np.arange(1, num_states + 1, dtype=float)
    y = np.arange(1, num_states * num_actions + 1, dtype=float) - num_states * num_actions - 1
    return x, y


def tracking_transitions(num_states: int, num_actions: int,
                         x_seq=None, y_seq=None) -> np.ndarray:
    """Column-stochastic transitions from the exponential kernel exp(x_i y_j).

    The full S x (S*A) matrix is column-normalized (with a per-column shift
    before exponentiation to avoid overflow) and sliced into per-action
    blocks of S consecutive columns.  Each block is totally positive of
    order 2 because the kernel is and column scaling preserves minor signs.
    """
    if x_seq is None or y_seq is None:
        x_seq, y_seq = default_sequences(num_states, num_actions)
    x = np.asarray(x_seq, dtype=float)
    y = np.asarray(y_seq, dtype=float)
    if len(x) != num_states or len(y) != num_states * num_actions:
        raise ValueError("need len(x_seq) == S and len(y_seq) == S*A")
    if (np.diff(x) <= 0).any() or (np.diff(y) <= 0).any():
        raise ValueError("x_seq and y_seq must be strictly increasing")
    E = np.outer(x, y)
    E -= E.max(axis=0, keepdims=True)
    M = np.exp(E)
    M /= M.sum(axis=0, keepdims=True)
    S = num_states
    return np.stack([M[:, a * S:(a + 1) * S] for a in range(num_actions)])


def tracking_observations(num_states: int, num_actions: int, q: float) -> np.ndarray:
    """Noisy state-identifying observations, identical across actions.

    Column j puts mass q on observation j; interior columns split the
    remaining 1-q between the two neighbors, edge columns give it all to
    their single neighbor.  Z equals S.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("observation accuracy q must lie strictly inside (0, 1)")
    S = num_states
    O = np.zeros((S, S))
    for j in range(S):
        O[j, j] = q
        if j == 0:
            O[1, j] = 1.0 - q
        elif j == S - 1:
            O[S - 2, j] = 1.0 - q
        else:
            O[j - 1, j] = (1.0 - q) / 2.0
            O[j + 1, j] = (1.0 - q) / 2.0
    return np.stack([O] * num_actions)


def tracking_model_small() -> PomdpModel:
    """The 3-state, 3-action instance with an entropy penalty on the belief.

    Uses the default sequences, q = 0.7, discount 0.99, Renyi quadratic
    uncertainty with weights (1.1, 1.6, 1.0), and a fixed 3x3 measurement
    reward table.
    """
    S = A = 3
    transitions = tracking_transitions(S, A)
    observations = tracking_observations(S, A, q=0.7)
    # state-indexed rows below; RewardSpec stores the [action][state] transpose
    reward_by_state = np.array([
        [2.0, 2.5, 1.0],
        [1.1, 1.2, 0.5],
        [0.3, 2.0, 0.2],
    ])
    reward = RewardSpec(
        state_reward=reward_by_state.T,
        weights=np.array([1.1, 1.6, 1.0]),
        kind=UncertaintyKind.RENYI_QUADRATIC,
    )
    return PomdpModel(transitions=transitions, observations=observations,
                      discount=0.99, reward=reward)


def tracking_model_costed(num_states: int, num_actions: int, q: float = 0.8,
                          cost_per_effort: float | None = None,
                          poor_penalty: float = 1.0,
                          danger_penalty: float = 0.1,
                          reward_rate: float | None = None,
                          poor_fraction: float = 1.0 / 5.0,
                          danger_fraction: float = 9.0 / 10.0,
                          discount: float = 0.99) -> PomdpModel:
    """Tracking instance with a purely state-dependent costed reward.

    The reward charges ``cost_per_effort`` per unit of tracking effort
    (action 0 spends A units, action A-1 spends one) and adds a tracking
    term: a penalty ``-poor_penalty / s`` on the poor-tracking region
    (1-based states s <= poor_fraction * S), a penalty
    ``-danger_penalty / (S - s + 1)`` on the dangerous region
    (s >= danger_fraction * S), and ``reward_rate * s`` in between.
    Defaults: cost_per_effort = 1/(2A), reward_rate = 2/S.
    """
    S, A = num_states, num_actions
    c_a = 1.0 / (2 * A) if cost_per_effort is None else cost_per_effort
    k_r = 2.0 / S if reward_rate is None else reward_rate
    poor = [s for s in range(1, S + 1) if s <= poor_fraction * S]
    danger = [s for s in range(1, S + 1) if s >= danger_fraction * S]
    if len(poor) + len(danger) >= S:
        raise ValueError(
            "poor and dangerous regions cover every state; no middle region remains"
        )
    tracking_term = np.empty(S)
    for s in range(1, S + 1):
        if s in poor:
            tracking_term[s - 1] = -poor_penalty / s
        elif s in danger:
            tracking_term[s - 1] = -danger_penalty / (S - s + 1)
        else:
            tracking_term[s - 1] = k_r * s
    state_reward = np.array([-c_a * (A - a) + tracking_term for a in range(A)])
    reward = RewardSpec(state_reward=state_reward, weights=np.zeros(A),
                        kind=UncertaintyKind.NONE)
    return PomdpModel(transitions=tracking_transitions(S, A),
                      observations=tracking_observations(S, A, q=q),
                      discount=discount, reward=reward)
