import itertools

import numpy as np
import pytest

from beliefbound import (
    PomdpModel,
    RewardSpec,
    check_a1,
    check_a2_relaxed,
    check_a2_sampled,
    check_a3,
    check_all,
    is_tp2,
    tracking_model_small,
    tracking_transitions,
    validate_filter_monotonicity,
)
from conftest import random_dense_model


def reversed_actions(model: PomdpModel) -> PomdpModel:
    return PomdpModel(transitions=model.transitions[::-1].copy(),
                      observations=model.observations[::-1].copy(),
                      discount=model.discount, reward=model.reward)


def single_action_identity(S=3):
    return PomdpModel(transitions=np.stack([np.eye(S)]),
                      observations=np.stack([np.eye(S)]), discount=0.9,
                      reward=RewardSpec(state_reward=np.zeros((1, S)), weights=np.zeros(1)))


def clone_transitions_everywhere(model: PomdpModel) -> PomdpModel:
    """All actions share the first action's transition and observation matrices."""
    A = model.num_actions
    return PomdpModel(transitions=np.stack([model.transitions[0]] * A),
                      observations=np.stack([model.observations[0]] * A),
                      discount=model.discount, reward=model.reward)


# --- is_tp2 -------------------------------------------------------------------

def test_tp2_identity():
    ok, witness = is_tp2(np.eye(4))
    assert ok and witness is None


def test_tp2_antidiagonal_fails_with_minor_minus_one():
    ok, witness = is_tp2(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not ok
    assert witness[1] == pytest.approx(-1.0)


def test_tp2_rejects_negative_entries():
    with pytest.raises(ValueError):
        is_tp2(np.array([[1.0, -0.1], [0.0, 1.0]]))


def test_tp2_tracking_transitions():
    T = tracking_transitions(5, 3)
    for a in range(3):
        ok, _ = is_tp2(T[a])
        assert ok


def bruteforce_tp2(M, tol=1e-12):
    n, m = M.shape
    for (i1, i2) in itertools.combinations(range(n), 2):
        for (j1, j2) in itertools.combinations(range(m), 2):
            if M[i1, j1] * M[i2, j2] - M[i1, j2] * M[i2, j1] < -tol:
                return False
    return True


def test_tp2_agrees_with_bruteforce_minor_enumeration():
    rng = np.random.default_rng(17)
    agree_false = 0
    for _ in range(200):
        M = rng.random((5, 5))
        M[rng.random((5, 5)) < 0.3] = 0.0             # zeros exercise the edge cases
        expected = bruteforce_tp2(M)
        assert is_tp2(M)[0] == expected
        agree_false += not expected
    assert agree_false > 50                            # the sample actually hits both verdicts


# --- assumption checks -----------------------------------------------------------

def test_a1_small_tracking_model_passes(small_model):
    assert check_a1(small_model).a1_pass


def test_a1_antidiagonal_transition_fails_with_action_index():
    model = random_dense_model(0, num_states=2, num_actions=2, num_observations=2)
    T = np.array(model.transitions)
    T[1] = np.array([[0.0, 1.0], [1.0, 0.0]])
    bad = PomdpModel(transitions=T, observations=model.observations,
                     discount=model.discount, reward=model.reward)
    report = check_a1(bad)
    assert not report.a1_pass
    assert any(tag == "A1:T" and idx[0] == 1 for tag, idx, _ in report.counterexamples)


def test_a1_single_action_identity_passes():
    assert check_a1(single_action_identity()).a1_pass


def test_a2_relaxed_identity_transitions_vanish():
    # identity transitions and a shared observation matrix: the two products
    # in every cross-action entry coincide, so each matrix cancels exactly
    model = clone_transitions_everywhere(random_dense_model(5, num_states=3, num_actions=3))
    ident = PomdpModel(transitions=np.stack([np.eye(3)] * 3),
                       observations=model.observations,
                       discount=model.discount, reward=model.reward)
    report = check_a2_relaxed(ident)
    assert report.a2_relaxed_pass and report.counterexamples == []


def test_a2_relaxed_single_action_vacuous():
    assert check_a2_relaxed(single_action_identity()).a2_relaxed_pass


def test_a2_relaxed_small_tracking_model_passes(small_model):
    assert check_a2_relaxed(small_model).a2_relaxed_pass


def test_a2_relaxed_reversed_actions_fail(small_model):
    assert not check_a2_relaxed(reversed_actions(small_model)).a2_relaxed_pass


def test_a2_sampled_zero_matrices_pass():
    model = clone_transitions_everywhere(random_dense_model(6, num_states=3, num_actions=3))
    ident = PomdpModel(transitions=np.stack([np.eye(3)] * 3),
                       observations=model.observations,
                       discount=model.discount, reward=model.reward)
    assert check_a2_sampled(ident).a2_sampled_pass


def test_a2_sampled_catches_reversed_tracking(small_model):
    # the reversed model's cross-action matrices have negative basis/midpoint
    # quadratic forms, so the probe set certifies non-copositivity
    assert not check_a2_sampled(reversed_actions(small_model)).a2_sampled_pass


def test_a2_sampled_negative_diagonal_caught_by_basis_vector():
    # identity then anti-diagonal transitions put a negative entry on the
    # diagonal of a cross-action matrix, so a standard basis probe witnesses it
    T = np.stack([np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]])])
    O = np.full((2, 2, 2), 0.5)
    model = PomdpModel(transitions=T, observations=O, discount=0.9,
                       reward=RewardSpec(state_reward=np.zeros((2, 2)),
                                         weights=np.zeros(2)))
    report = check_a2_sampled(model, n_samples=0)
    assert not report.a2_sampled_pass
    assert any(tag == "A2:sampled" for tag, _, _ in report.counterexamples)


def test_a2_relaxed_implies_sampled():
    models = [tracking_model_small()]
    models += [random_dense_model(s, num_states=3, num_actions=3) for s in range(5)]
    for model in models:
        if check_a2_relaxed(model).a2_relaxed_pass:
            assert check_a2_sampled(model).a2_sampled_pass


def _a2_relaxed_oracle(model, tol=1e-12):
    """Dumb-loop evaluation of the entrywise cross-action condition."""
    T, O = model.transitions, model.observations
    S, A, Z = model.num_states, model.num_actions, model.num_observations
    for a in range(A - 1):
        for j in range(S - 1):
            for z in range(Z):
                for m in range(S):
                    for n in range(S):
                        d_mn = (O[a][z, j] * O[a + 1][z, j + 1] * T[a][j, m] * T[a + 1][j + 1, n]
                                - O[a][z, j + 1] * O[a + 1][z, j] * T[a][j + 1, m] * T[a + 1][j, n])
                        d_nm = (O[a][z, j] * O[a + 1][z, j + 1] * T[a][j, n] * T[a + 1][j + 1, m]
                                - O[a][z, j + 1] * O[a + 1][z, j] * T[a][j + 1, n] * T[a + 1][j, m])
                        if d_mn + d_nm < -tol:
                            return False
    return True


def _a3_oracle(model, tol=1e-12):
    """Dumb-loop evaluation of the cumulative observation-prior dominance."""
    T, O = model.transitions, model.observations
    S, A, Z = model.num_states, model.num_actions, model.num_observations
    for a in range(A - 1):
        for i in range(S):
            for zbar in range(Z):
                total = 0.0
                for z in range(zbar + 1):
                    for j in range(S):
                        total += T[a][j, i] * O[a][z, j] - T[a + 1][j, i] * O[a + 1][z, j]
                if total < -tol:
                    return False
    return True


def test_a2_relaxed_agrees_with_loop_oracle(small_model):
    models = [small_model, reversed_actions(small_model),
              tracking_model_small()]
    models += [random_dense_model(s, num_states=3, num_actions=3) for s in range(8)]
    verdicts = set()
    for model in models:
        got = check_a2_relaxed(model).a2_relaxed_pass
        assert got == _a2_relaxed_oracle(model)
        verdicts.add(got)
    assert verdicts == {True, False}                   # the sample hits both outcomes


def test_a3_agrees_with_loop_oracle(small_model):
    models = [small_model, reversed_actions(small_model)]
    models += [random_dense_model(s + 70, num_states=4, num_actions=3,
                                  num_observations=4) for s in range(8)]
    verdicts = set()
    for model in models:
        got = check_a3(model).a3_pass
        assert got == _a3_oracle(model)
        verdicts.add(got)
    assert verdicts == {True, False}


def test_a3_identical_actions_pass():
    model = clone_transitions_everywhere(random_dense_model(8, num_actions=3))
    assert check_a3(model).a3_pass


def test_a3_small_tracking_model_passes(small_model):
    assert check_a3(small_model).a3_pass


def test_a3_reversed_actions_fail(small_model):
    report = check_a3(reversed_actions(small_model))
    assert not report.a3_pass
    assert any(tag == "A3" for tag, _, _ in report.counterexamples)


def test_check_all_small_tracking_model(small_model):
    report = check_all(small_model)
    assert report.a1_pass and report.a2_relaxed_pass
    assert report.a2_sampled_pass and report.a3_pass
    assert report.counterexamples == []


# --- filter monotonicity validation ------------------------------------------------

def test_filter_monotonicity_small_tracking_model_clean(small_model):
    report = validate_filter_monotonicity(small_model, n_samples=500, seed=0)
    assert report.likelihood_violations == 0
    assert report.posterior_violations == 0
    assert report.passed


def test_filter_monotonicity_identical_actions_clean():
    model = clone_transitions_everywhere(random_dense_model(9, num_actions=3))
    assert validate_filter_monotonicity(model, n_samples=100, seed=1).passed


def test_filter_monotonicity_unstructured_model_reports_not_raises():
    violations = 0
    for seed in range(5):
        model = random_dense_model(seed, num_states=4, num_actions=3, num_observations=4)
        report = validate_filter_monotonicity(model, n_samples=50, seed=seed)
        violations += report.likelihood_violations + report.posterior_violations
    assert violations > 0
