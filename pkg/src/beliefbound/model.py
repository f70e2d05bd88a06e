"""POMDP data model, validation and file serialization.

Conventions used throughout the package:

* ``transitions`` has shape ``(A, S, S)``; slice ``transitions[a]`` is the
  matrix mapping a belief forward in time, with previous states column-wise
  and next states row-wise, so every column sums to one.
* ``observations`` has shape ``(A, Z, S)``; slice ``observations[a]`` has
  observation rows and (next-)state columns, again with stochastic columns.
* All indices (states, actions, observations) are 0-based.

The model file format is JSON with keys ``num_states``, ``num_actions``,
``num_observations``, ``discount``, ``transitions`` (A x S x S nested lists),
``observations`` (A x Z x S) and ``reward`` with ``state_reward`` (A x S),
``weights`` (A), ``uncertainty`` ("none" | "shannon" | "renyi_quadratic")
and ``epsilon``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

STOCHASTIC_TOL = 1e-9
DEFAULT_EPSILON = 0.01


class ModelFormatError(ValueError):
    """Model file could not be parsed against the schema."""


class DimensionMismatchError(ModelFormatError):
    """A tensor in the model file has the wrong rank or shape."""


class ModelValidationError(ValueError):
    """A structurally well-formed model violates a stochasticity invariant."""


class UncertaintyKind(Enum):
    NONE = "none"
    SHANNON = "shannon"
    RENYI_QUADRATIC = "renyi_quadratic"


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RewardSpec:
    """Belief-dependent reward parameters.

    The expected reward of action ``a`` in belief ``b`` is
    ``state_reward[a] @ b - weights[a] * f(b)`` where ``f`` is the
    uncertainty function selected by ``kind``.  ``epsilon`` defines the
    inner simplex on which Shannon gradients are well defined.
    """

    state_reward: np.ndarray          # (A, S)
    weights: np.ndarray               # (A,)
    kind: UncertaintyKind = UncertaintyKind.NONE
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "state_reward", _frozen(self.state_reward))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.state_reward.ndim != 2:
            raise DimensionMismatchError("state_reward must be a 2-d (A, S) matrix")
        if self.weights.ndim != 1 or len(self.weights) != self.state_reward.shape[0]:
            raise DimensionMismatchError("weights must be a length-A vector")
        if (self.weights < 0).any():
            raise ModelValidationError("uncertainty weights must be nonnegative")
        if not (0.0 < self.epsilon < 1.0):
            raise ModelValidationError("epsilon must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class PomdpModel:
    """Immutable finite POMDP: tensors are read-only after construction."""

    transitions: np.ndarray           # (A, S, S), [action][next][prev]
    observations: np.ndarray          # (A, Z, S), [action][obs][next]
    discount: float
    reward: RewardSpec

    def __post_init__(self):
        object.__setattr__(self, "transitions", _frozen(self.transitions))
        object.__setattr__(self, "observations", _frozen(self.observations))
        T, O = self.transitions, self.observations
        if T.ndim != 3 or T.shape[1] != T.shape[2]:
            raise DimensionMismatchError(f"transitions must have shape (A, S, S), got {T.shape}")
        if O.ndim != 3 or O.shape[0] != T.shape[0] or O.shape[2] != T.shape[1]:
            raise DimensionMismatchError(f"observations must have shape (A, Z, S), got {O.shape}")
        if self.num_states < 2:
            raise DimensionMismatchError("need at least 2 states")
        if self.reward.state_reward.shape != (self.num_actions, self.num_states):
            raise DimensionMismatchError("state_reward shape must be (A, S)")
        if not (0.0 <= self.discount <= 1.0):
            raise ModelValidationError("discount must lie in [0, 1]")
        # discount == 1 is tolerated here; only finite-horizon operations accept it.

    @property
    def num_states(self) -> int:
        return self.transitions.shape[1]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_observations(self) -> int:
        return self.observations.shape[1]


@dataclass
class ValidationReport:
    """Outcome of :func:`validate`; ``passed`` iff ``violations`` is empty.

    Each violation is ``(field_path, index_tuple, measured_value, tolerance)``.
    """

    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def _check_stochastic(name: str, tensor: np.ndarray, report: ValidationReport,
                      tol: float = STOCHASTIC_TOL) -> None:
    for a in range(tensor.shape[0]):
        M = tensor[a]
        neg = np.argwhere(M < -tol)
        for idx in neg:
            report.violations.append((name, (a, int(idx[0]), int(idx[1])), float(M[tuple(idx)]), tol))
        sums = M.sum(axis=0)
        for j in np.flatnonzero(np.abs(sums - 1.0) > tol):
            report.violations.append((f"{name}.column_sum", (a, int(j)), float(sums[j]), tol))


def validate(model: PomdpModel) -> ValidationReport:
    """Report every stochasticity and nonnegativity violation without mutating."""
    report = ValidationReport()
    _check_stochastic("transitions", model.transitions, report)
    _check_stochastic("observations", model.observations, report)
    return report


def _renormalize_columns(tensor: np.ndarray, name: str) -> np.ndarray:
    """Clamp round-off negatives and renormalize near-stochastic columns exactly."""
    out = np.array(tensor, dtype=float)
    if not np.isfinite(out).all():
        raise ModelValidationError(f"{name} has non-finite entries")
    if (out < -STOCHASTIC_TOL).any():
        idx = tuple(int(i) for i in np.argwhere(out < -STOCHASTIC_TOL)[0])
        raise ModelValidationError(f"{name} has negative entry {out[idx]} at {idx}")
    out = np.clip(out, 0.0, None)
    sums = out.sum(axis=1, keepdims=True)     # column sums, shape (A, 1, ncols)
    if (np.abs(sums - 1.0) > STOCHASTIC_TOL).any():
        a, _, j = np.unravel_index(int(np.abs(sums - 1.0).argmax()), sums.shape)
        raise ModelValidationError(
            f"{name} column (action {a}, column {j}) sums to {float(sums[a, 0, j])}, not 1"
        )
    return out / sums


def save_model(model: PomdpModel, path) -> None:
    doc = {
        "num_states": model.num_states,
        "num_actions": model.num_actions,
        "num_observations": model.num_observations,
        "discount": model.discount,
        "transitions": model.transitions.tolist(),
        "observations": model.observations.tolist(),
        "reward": {
            "state_reward": model.reward.state_reward.tolist(),
            "weights": model.reward.weights.tolist(),
            "uncertainty": model.reward.kind.value,
            "epsilon": model.reward.epsilon,
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> PomdpModel:
    """Load, renormalize within tolerance, and reject invalid models."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON: {exc}") from exc

    try:
        S = int(doc["num_states"])
        A = int(doc["num_actions"])
        Z = int(doc["num_observations"])
        discount = float(doc["discount"])
        transitions = np.array(doc["transitions"], dtype=float)
        observations = np.array(doc["observations"], dtype=float)
        rew = doc["reward"]
        state_reward = np.array(rew["state_reward"], dtype=float)
        weights = np.array(rew["weights"], dtype=float)
        kind = UncertaintyKind(rew["uncertainty"])
        epsilon = float(rew.get("epsilon", DEFAULT_EPSILON))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: does not match the model schema: {exc}") from exc

    if transitions.shape != (A, S, S):
        raise DimensionMismatchError(
            f"{path}: transitions shape {transitions.shape}, expected {(A, S, S)}"
        )
    if observations.shape != (A, Z, S):
        raise DimensionMismatchError(
            f"{path}: observations shape {observations.shape}, expected {(A, Z, S)}"
        )
    if state_reward.shape != (A, S):
        raise DimensionMismatchError(
            f"{path}: state_reward shape {state_reward.shape}, expected {(A, S)}"
        )

    transitions = _renormalize_columns(transitions, "transitions")
    observations = _renormalize_columns(observations, "observations")
    model = PomdpModel(
        transitions=transitions,
        observations=observations,
        discount=discount,
        reward=RewardSpec(state_reward=state_reward, weights=weights, kind=kind, epsilon=epsilon),
    )
    report = validate(model)
    if not report.passed:
        raise ModelValidationError(f"{path}: invalid model: {report.violations[:5]}")
    return model
