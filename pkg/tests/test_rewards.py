import math

import numpy as np
import pytest

from beliefbound import (
    BeliefOutsideEpsilonSimplexError,
    PomdpModel,
    RewardSpec,
    UncertaintyKind,
    expected_reward,
    information_gain,
    predict,
    reward_gradient,
    uncertainty,
    uncertainty_gradient,
)
from conftest import interior_belief, random_dense_model

NONE, SHANNON, RENYI = (UncertaintyKind.NONE, UncertaintyKind.SHANNON,
                        UncertaintyKind.RENYI_QUADRATIC)


# --- uncertainty values -------------------------------------------------------

def test_uniform_belief_maximizes_both_entropies():
    b = np.ones(3) / 3
    assert uncertainty(SHANNON, b) == pytest.approx(math.log(3), rel=1e-12)
    assert uncertainty(RENYI, b) == pytest.approx(math.log(3), rel=1e-12)


def test_vertex_belief_has_zero_uncertainty():
    b = np.array([0.0, 1.0, 0.0])
    assert uncertainty(SHANNON, b) == 0.0
    assert uncertainty(RENYI, b) == 0.0
    assert uncertainty(NONE, b) == 0.0


def test_renyi_two_point_symmetric():
    assert uncertainty(RENYI, np.array([0.5, 0.5])) == pytest.approx(math.log(2), rel=1e-12)


def test_uncertainty_nonnegative_everywhere():
    rng = np.random.default_rng(5)
    for _ in range(500):
        b = rng.exponential(size=rng.integers(2, 7))
        b /= b.sum()
        assert uncertainty(SHANNON, b) >= 0.0
        assert uncertainty(RENYI, b) >= 0.0


# --- gradients -----------------------------------------------------------------

def test_renyi_gradient_at_uniform_is_constant_minus_two():
    for S in (2, 3, 5):
        grad = uncertainty_gradient(RENYI, np.ones(S) / S)
        np.testing.assert_allclose(grad, -2.0 * np.ones(S), rtol=1e-12)


def test_shannon_gradient_closed_form():
    grad = uncertainty_gradient(SHANNON, np.array([0.5, 0.5]), epsilon=0.01)
    np.testing.assert_allclose(grad, [-(1 + math.log(0.5))] * 2, rtol=1e-12)


def test_none_gradient_is_zero():
    np.testing.assert_array_equal(uncertainty_gradient(NONE, np.ones(4) / 4), np.zeros(4))


def test_shannon_gradient_outside_epsilon_simplex_raises():
    with pytest.raises(BeliefOutsideEpsilonSimplexError):
        uncertainty_gradient(SHANNON, np.array([0.005, 0.995]), epsilon=0.01)


def _fd_gradient(func, b, step=1e-6):
    grad = np.zeros_like(b)
    for i in range(len(b)):
        hi, lo = b.copy(), b.copy()
        hi[i] += step
        lo[i] -= step
        grad[i] = (func(hi) - func(lo)) / (2 * step)
    return grad


@pytest.mark.parametrize("kind", [SHANNON, RENYI])
def test_gradient_matches_finite_differences(kind):
    rng = np.random.default_rng(11)
    for _ in range(1000):
        model = random_dense_model(int(rng.integers(1 << 30)), num_states=4,
                                   num_actions=2, kind=kind)
        b = interior_belief(rng, 4)
        a = int(rng.integers(2))
        analytic = reward_gradient(model, b, a)
        fd = _fd_gradient(lambda x: expected_reward(model, x, a), b)
        scale = max(1.0, np.abs(analytic).max())
        assert np.abs(analytic - fd).max() / scale < 1e-5


# --- expected reward -------------------------------------------------------------

def test_expected_reward_at_vertex_is_state_reward():
    model = random_dense_model(2, kind=NONE)
    for s in range(model.num_states):
        b = np.eye(model.num_states)[s]
        for a in range(model.num_actions):
            assert expected_reward(model, b, a) == pytest.approx(
                model.reward.state_reward[a, s], rel=1e-12)


def test_zero_weights_degenerate_to_linear_reward():
    model = random_dense_model(4, kind=RENYI, weight_scale=0.0)
    rng = np.random.default_rng(0)
    b = rng.exponential(size=model.num_states)
    b /= b.sum()
    for a in range(model.num_actions):
        assert expected_reward(model, b, a) == pytest.approx(
            float(model.reward.state_reward[a] @ b), rel=1e-12)


def test_expected_reward_small_tracking_model(small_model):
    # direct evaluation: mean state reward of action 0 minus 1.1 * log 3
    expected = (2.0 + 1.1 + 0.3) / 3.0 - 1.1 * math.log(3)
    got = expected_reward(small_model, np.ones(3) / 3, 0)
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(-0.0752, abs=2e-4)


def test_reward_gradient_examples(small_model):
    model_none = random_dense_model(6, kind=NONE)
    b = np.array([0.4, 0.3, 0.3])
    np.testing.assert_allclose(reward_gradient(model_none, b, 1),
                               model_none.reward.state_reward[1], rtol=1e-12)
    grad = reward_gradient(small_model, np.ones(3) / 3, 2)
    np.testing.assert_allclose(
        grad, small_model.reward.state_reward[2] + 2.0 * small_model.reward.weights[2],
        rtol=1e-12)
    shannon = PomdpModel(
        transitions=np.stack([np.eye(2)]), observations=np.full((1, 2, 2), 0.5),
        discount=0.9,
        reward=RewardSpec(state_reward=np.zeros((1, 2)), weights=np.ones(1), kind=SHANNON))
    np.testing.assert_allclose(reward_gradient(shannon, np.array([0.5, 0.5]), 0),
                               [1 + math.log(0.5)] * 2, rtol=1e-12)


# --- information gain -------------------------------------------------------------

def test_information_gain_zero_for_uninformative_sensor():
    model = random_dense_model(9, kind=RENYI)
    Z = model.num_observations
    flat = PomdpModel(transitions=model.transitions,
                      observations=np.full_like(model.observations, 1.0 / Z),
                      discount=model.discount, reward=model.reward)
    b = np.array([0.2, 0.5, 0.3])
    for a in range(flat.num_actions):
        assert information_gain(flat, b, a) == pytest.approx(0.0, abs=1e-12)


def test_information_gain_perfect_sensor_equals_predicted_uncertainty():
    rng = np.random.default_rng(13)
    T = rng.uniform(0.05, 1.0, size=(2, 3, 3))
    T /= T.sum(axis=1, keepdims=True)
    O = np.stack([np.eye(3)] * 2)
    model = PomdpModel(transitions=T, observations=O, discount=0.9,
                       reward=RewardSpec(state_reward=np.zeros((2, 3)),
                                         weights=np.ones(2), kind=SHANNON))
    b = np.array([0.3, 0.4, 0.3])
    for a in range(2):
        assert information_gain(model, b, a) == pytest.approx(
            uncertainty(SHANNON, predict(model, b, a)), rel=1e-12)


def test_information_gain_matches_enumeration(small_model):
    b = np.ones(3) / 3
    a = 1
    # oracle: explicit enumeration over observations with independent Bayes
    T, O = small_model.transitions[a], small_model.observations[a]
    ba = T @ b
    expected = -math.log(float(ba @ ba))
    for z in range(3):
        joint = O[z] * ba
        eta = joint.sum()
        if eta > 0:
            post = joint / eta
            expected -= eta * (-math.log(float(post @ post)))
    assert information_gain(small_model, b, a) == pytest.approx(expected, rel=1e-12)


def test_information_gain_and_posterior_uncertainty_can_disagree():
    # Why the reward penalizes posterior uncertainty instead of maximizing
    # information gain: an action that diffuses the belief before sensing can
    # have the larger gain (more entropy to remove) while still ending in a
    # *more* uncertain posterior.  Ranking by gain prefers the risky action,
    # ranking by expected posterior uncertainty prefers the safe one.
    from beliefbound import observation_likelihood, update

    T = np.array([[[0.95, 0.05], [0.05, 0.95]],   # safe: nearly keeps the state
                  [[0.6, 0.4], [0.4, 0.6]]])      # risky: strong mixing
    O = np.stack([np.array([[0.8, 0.2], [0.2, 0.8]])] * 2)
    model = PomdpModel(transitions=T, observations=O, discount=0.9,
                       reward=RewardSpec(state_reward=np.zeros((2, 2)),
                                         weights=np.ones(2), kind=SHANNON))
    b = np.array([0.9, 0.1])
    safe, risky = 0, 1

    def posterior_uncertainty(a):
        eta = observation_likelihood(model, b, a)
        return sum(eta[z] * uncertainty(SHANNON, update(model, b, a, z))
                   for z in range(2))

    assert information_gain(model, b, risky) > information_gain(model, b, safe)
    assert posterior_uncertainty(risky) > posterior_uncertainty(safe)


def test_information_gain_nonnegative_for_concave_kinds():
    rng = np.random.default_rng(21)
    for trial in range(10_000):
        kind = SHANNON if trial % 2 else RENYI
        model = random_dense_model(trial, num_states=3, num_actions=2,
                                   num_observations=3, kind=kind)
        b = rng.exponential(size=3)
        b /= b.sum()
        a = int(rng.integers(2))
        assert information_gain(model, b, a, kind) >= -1e-9


def test_uncertainty_shape_along_segments():
    # Shannon entropy is concave; the quadratic entropy is only quasi-concave
    # (its superlevel sets are balls intersected with the simplex), so the
    # midpoint is tested against the average for the former and against the
    # worse endpoint for the latter.
    rng = np.random.default_rng(31)
    for _ in range(500):
        S = int(rng.integers(2, 7))
        b1 = rng.exponential(size=S)
        b1 /= b1.sum()
        b2 = rng.exponential(size=S)
        b2 /= b2.sum()
        mid = 0.5 * (b1 + b2)
        avg_shannon = 0.5 * (uncertainty(SHANNON, b1) + uncertainty(SHANNON, b2))
        assert uncertainty(SHANNON, mid) >= avg_shannon - 1e-9
        floor_renyi = min(uncertainty(RENYI, b1), uncertainty(RENYI, b2))
        assert uncertainty(RENYI, mid) >= floor_renyi - 1e-9
