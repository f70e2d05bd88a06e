"""Reward transforms that sandwich the optimal policy between myopic policies.

A transform vector ``v`` shifts the reward by the belief-linear term
``[(I - gamma T_a') v]' b`` without changing the optimal stationary policy
(the value function shifts by ``v' b``).  If ``v`` can be chosen so that the
transformed reward is monotone in the likelihood-ratio order over the whole
simplex -- increasing for the lower transform ``g``, decreasing for the
upper transform ``h`` -- then the greedy policies of the transformed rewards
bound the optimal policy from below and above.

Monotonicity is certified through a linear feasibility system on the
consecutive differences of ``phi_a = r_a + (I - gamma T_a') v``: writing
beliefs in cumulative-tail coordinates ``delta`` (``b = K delta`` with K the
upper-bidiagonal difference matrix), likelihood-ratio dominance implies
componentwise dominance of ``delta``, so nonnegative partial derivatives in
``delta`` give monotonicity.  The first coordinate is identically 1, leaving
``(S-1) * A`` constraint rows.  The uncertainty term contributes a
belief-dependent right-hand side which is replaced by a belief-independent
bound: 0 for linear rewards, ``-w_a log(eps)`` on the inner simplex for
Shannon entropy, and for Renyi quadratic entropy either ``2 w_a`` (tight
mode; not a strict supremum of the belief term, so certified transforms
should be monotonicity-checked by sampling) or ``2 w_a S`` (conservative
mode; a provable supremum).

The orientation of the differences is anchored so that a linear reward
increasing in the state index is feasible at ``v = 0``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .model import PomdpModel, UncertaintyKind
from .rewards import expected_reward, reward_gradient, uncertainty

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
DEFAULT_GMAX = 1e6

INCREASING = "increasing"
DECREASING = "decreasing"

MODE_TIGHT = "tight"
MODE_CONSERVATIVE = "conservative"
MODE_AT_BELIEF = "at-belief"


class MissingCertificateError(ValueError):
    """The transform vector needed for this direction is absent."""


class NumericFailureError(RuntimeError):
    """The LP solver failed for reasons other than plain infeasibility."""


def k_matrix(num_states: int) -> np.ndarray:
    """Upper-bidiagonal matrix K mapping cumulative-tail coordinates to beliefs.

    K has ones on the diagonal and -1 on the superdiagonal, so
    ``K @ U == I`` for the upper-triangular all-ones matrix U, i.e.
    ``b = K delta`` when ``delta`` holds the upper-tail sums of ``b``.
    """
    if num_states < 2:
        raise ValueError("need at least 2 states")
    K = np.eye(num_states)
    K[np.arange(num_states - 1), np.arange(1, num_states)] = -1.0
    return K


@dataclass
class LinearSystem:
    """Constraint system ``coeff @ v >= rhs`` on a transform vector."""

    coeff: np.ndarray                 # (n_rows, S)
    rhs: np.ndarray                   # (n_rows,)


@dataclass
class FeasibilityResult:
    """Max-slack LP outcome; feasible iff the best slack clears -1e-9."""

    feasible: bool
    solution: np.ndarray | None
    min_slack: float


def _direction_sign(direction: str) -> float:
    if direction == INCREASING:
        return 1.0
    if direction == DECREASING:
        return -1.0
    raise ValueError(f"direction must be '{INCREASING}' or '{DECREASING}'")


def _transform_operators(model: PomdpModel) -> list[np.ndarray]:
    """The per-action operators M_a = I - gamma * T_a' applied to transform vectors."""
    if model.discount >= 1.0:
        raise ValueError("policy-bound transforms need a discount below 1 "
                         "(the undiscounted case is finite-horizon only)")
    S = model.num_states
    return [np.eye(S) - model.discount * model.transitions[a].T
            for a in range(model.num_actions)]


def assemble_constraints_at(model: PomdpModel, b0: np.ndarray,
                            direction: str) -> LinearSystem:
    """Constraint rows for monotonicity of the transformed reward at one belief.

    Row for (action a, state pair i, i+1):
    ``sign * (M_a[i+1] - M_a[i]) @ v >= -sign * (grad_i+1 - grad_i)``
    with ``grad`` the reward gradient at b0 and sign +1 for increasing,
    -1 for decreasing.
    """
    sign = _direction_sign(direction)
    S, A = model.num_states, model.num_actions
    ops = _transform_operators(model)
    rows, rhs = [], []
    for a in range(A):
        grad = reward_gradient(model, b0, a)
        M = ops[a]
        for i in range(S - 1):
            rows.append(sign * (M[i + 1] - M[i]))
            rhs.append(-sign * (grad[i + 1] - grad[i]))
    return LinearSystem(coeff=np.array(rows), rhs=np.array(rhs))


def _global_bound(model: PomdpModel, a: int, mode: str) -> float:
    """Belief-independent bound on the uncertainty term of one constraint row."""
    rew = model.reward
    w = float(rew.weights[a])
    if rew.kind is UncertaintyKind.NONE:
        return 0.0
    if rew.kind is UncertaintyKind.SHANNON:
        # -w log(eps) is already the supremum over the inner simplex, so both
        # modes coincide here.
        return -w * np.log(rew.epsilon)
    if rew.kind is UncertaintyKind.RENYI_QUADRATIC:
        if mode == MODE_CONSERVATIVE:
            return 2.0 * w * model.num_states
        return 2.0 * w
    raise ValueError(f"unknown uncertainty kind {rew.kind}")


def assemble_constraints_global(model: PomdpModel, direction: str,
                                mode: str = MODE_TIGHT) -> LinearSystem:
    """Constraint rows enforcing monotonicity over the whole simplex.

    Row for (action a, state pair i, i+1):
    ``sign * (M_a[i+1] - M_a[i]) @ v >= bound_a - sign * (r_a[i+1] - r_a[i])``
    where ``bound_a`` is the belief-independent bound of the uncertainty
    term for the selected mode.
    """
    if mode not in (MODE_TIGHT, MODE_CONSERVATIVE):
        raise ValueError(f"mode must be '{MODE_TIGHT}' or '{MODE_CONSERVATIVE}'")
    sign = _direction_sign(direction)
    S, A = model.num_states, model.num_actions
    ops = _transform_operators(model)
    R = model.reward.state_reward
    rows, rhs = [], []
    for a in range(A):
        bound = _global_bound(model, a, mode)
        M = ops[a]
        for i in range(S - 1):
            rows.append(sign * (M[i + 1] - M[i]))
            rhs.append(bound - sign * (R[a, i + 1] - R[a, i]))
    return LinearSystem(coeff=np.array(rows), rhs=np.array(rhs))


def solve_feasibility(system: LinearSystem, gmax: float = DEFAULT_GMAX) -> FeasibilityResult:
    """Maximize the minimum slack of ``coeff @ v >= rhs`` over the box |v| <= gmax.

    Solves ``max t  s.t.  coeff @ v - t >= rhs``; the system is feasible iff
    the optimum clears -1e-9.  Deterministic (HiGHS).
    """
    coeff, rhs = system.coeff, system.rhs
    if not (np.isfinite(coeff).all() and np.isfinite(rhs).all()):
        raise NumericFailureError("constraint system contains non-finite entries")
    n = coeff.shape[1]
    c = np.zeros(n + 1)
    c[-1] = -1.0                      # maximize t
    A_ub = np.hstack([-coeff, np.ones((len(rhs), 1))])
    res = linprog(c, A_ub=A_ub, b_ub=-rhs,
                  bounds=[(-gmax, gmax)] * n + [(None, None)], method="highs")
    if res.status != 0:
        raise NumericFailureError(f"LP solver status {res.status}: {res.message}")
    t = float(res.x[-1])
    feasible = t >= -FEASIBILITY_TOL
    return FeasibilityResult(feasible=feasible,
                             solution=res.x[:n].copy() if feasible else None,
                             min_slack=t)


def minimize_transform_norm(system: LinearSystem, slack: float = 0.0,
                            gmax: float = DEFAULT_GMAX) -> np.ndarray | None:
    """Smallest-1-norm vector satisfying ``coeff @ v >= rhs + slack``.

    The max-slack solution of :func:`solve_feasibility` tends to run to the
    box bounds, which makes the induced greedy policies uninformative; the
    minimum-norm point keeps the transform as gentle as feasibility allows.
    Returns None when infeasible.
    """
    coeff, rhs = system.coeff, system.rhs
    n = coeff.shape[1]
    c = np.ones(2 * n)                # v = v_pos - v_neg, minimize sum of parts
    A_ub = np.hstack([-coeff, coeff])
    res = linprog(c, A_ub=A_ub, b_ub=-(rhs + slack),
                  bounds=[(0.0, gmax)] * (2 * n), method="highs")
    if res.status == 2:
        return None
    if res.status != 0:
        raise NumericFailureError(f"LP solver status {res.status}: {res.message}")
    return res.x[:n] - res.x[n:]


@dataclass
class BoundCertificate:
    """Transform vectors for the lower (g) and upper (h) myopic policies.

    Either vector is None when its feasibility system had no solution.
    ``min_slack_g`` / ``min_slack_h`` record the best achievable slack of
    the respective systems (the feasibility margin, not the slack of the
    stored minimum-norm vectors).
    """

    mode: str
    g: np.ndarray | None
    h: np.ndarray | None
    min_slack_g: float | None = None
    min_slack_h: float | None = None
    epsilon: float = 0.01

    @classmethod
    def trivial(cls) -> "BoundCertificate":
        """Certificate with no transform vectors; the action interval is full."""
        return cls(mode=MODE_TIGHT, g=None, h=None)


def compute_certificate(model: PomdpModel, mode: str = MODE_TIGHT,
                        belief: np.ndarray | None = None,
                        gmax: float = DEFAULT_GMAX) -> BoundCertificate:
    """Solve both feasibility systems and keep minimum-norm transform vectors.

    ``mode`` selects the belief-independent right-hand sides ("tight" or
    "conservative"); passing ``belief`` instead certifies monotonicity at
    that single belief only ("at-belief" mode).
    """
    vectors: dict[str, np.ndarray | None] = {}
    slacks: dict[str, float] = {}
    for direction in (INCREASING, DECREASING):
        if belief is not None:
            system = assemble_constraints_at(model, belief, direction)
        else:
            system = assemble_constraints_global(model, direction, mode)
        result = solve_feasibility(system, gmax=gmax)
        slacks[direction] = result.min_slack
        if result.feasible:
            tightened = minimize_transform_norm(
                system, slack=min(result.min_slack, 0.0), gmax=gmax)
            vectors[direction] = tightened if tightened is not None else result.solution
        else:
            vectors[direction] = None
    return BoundCertificate(
        mode=MODE_AT_BELIEF if belief is not None else mode,
        g=vectors[INCREASING],
        h=vectors[DECREASING],
        min_slack_g=slacks[INCREASING],
        min_slack_h=slacks[DECREASING],
        epsilon=model.reward.epsilon,
    )


def transformed_reward(model: PomdpModel, cert: BoundCertificate,
                       b: np.ndarray, a: int, direction: str) -> float:
    """rho(b, a) plus the belief-linear transform term for one direction."""
    if direction == INCREASING:
        v = cert.g
    elif direction == DECREASING:
        v = cert.h
    else:
        raise ValueError(f"direction must be '{INCREASING}' or '{DECREASING}'")
    if v is None:
        raise MissingCertificateError(f"no transform vector for direction '{direction}'")
    M = np.eye(model.num_states) - model.discount * model.transitions[a].T
    return expected_reward(model, b, a) + float((M @ v) @ b)


def _transformed_rewards_all(model: PomdpModel, v: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Transformed reward of every action at one belief (vectorized helper)."""
    rew = model.reward
    base = rew.state_reward @ b - rew.weights * uncertainty(rew.kind, b)
    shift = np.array([(v - model.discount * (model.transitions[a].T @ v)) @ b
                      for a in range(model.num_actions)])
    return base + shift


def myopic_lower(model: PomdpModel, cert: BoundCertificate, b: np.ndarray) -> int:
    """Smallest action maximizing the increasing-transformed reward."""
    if cert.g is None:
        raise MissingCertificateError("lower policy needs the g vector")
    return int(np.argmax(_transformed_rewards_all(model, cert.g, b)))


def myopic_upper(model: PomdpModel, cert: BoundCertificate, b: np.ndarray) -> int:
    """Largest action maximizing the decreasing-transformed reward."""
    if cert.h is None:
        raise MissingCertificateError("upper policy needs the h vector")
    vals = _transformed_rewards_all(model, cert.h, b)
    return int(len(vals) - 1 - np.argmax(vals[::-1]))


def action_interval(model: PomdpModel, cert: BoundCertificate,
                    b: np.ndarray) -> tuple[int, int]:
    """Inclusive action range to consider at ``b``; degrades to (0, A-1).

    With both transforms present the interval is (lower policy, upper
    policy); a missing side falls back to the corresponding extreme.  If
    numerics invert the endpoints the interval widens to contain both and a
    diagnostic is logged.
    """
    lo = myopic_lower(model, cert, b) if cert.g is not None else 0
    hi = myopic_upper(model, cert, b) if cert.h is not None else model.num_actions - 1
    if lo > hi:
        logger.warning("action interval inverted at belief %s: (%d, %d); widening", b, lo, hi)
        lo, hi = hi, lo
    return lo, hi


def save_certificate(cert: BoundCertificate, path) -> None:
    doc = {
        "mode": cert.mode,
        "g": None if cert.g is None else list(map(float, cert.g)),
        "h": None if cert.h is None else list(map(float, cert.h)),
        "min_slack_g": cert.min_slack_g,
        "min_slack_h": cert.min_slack_h,
        "epsilon": cert.epsilon,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_certificate(path) -> BoundCertificate:
    with open(path) as fh:
        doc = json.load(fh)
    return BoundCertificate(
        mode=doc["mode"],
        g=None if doc["g"] is None else np.array(doc["g"], dtype=float),
        h=None if doc["h"] is None else np.array(doc["h"], dtype=float),
        min_slack_g=doc.get("min_slack_g"),
        min_slack_h=doc.get("min_slack_h"),
        epsilon=float(doc.get("epsilon", 0.01)),
    )
