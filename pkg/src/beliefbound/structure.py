"""Structural checks that license myopic policy bounds.

Three conditions are checked on a model, each over all action pairs
(a, a+1):

* total positivity of order 2 (TP2) of every transition and observation
  matrix,
* copositivity of the symmetrized cross-action matrices built from
  products of transition and observation entries (exact entrywise
  sufficient check plus a sampled quadratic-form surrogate), and
* first-order dominance of the prior next-observation distributions
  across consecutive actions.

In the cross-action formulas the transition factors are indexed
(from-state, to-state), i.e. the transpose of the stored [next][prev]
matrices; this orientation is pinned by the tracking domain family, which
must pass with the natural action order and fail with the order reversed.
Empirical validation of the induced filter monotonicity (likelihood
dominance and posterior MLR dominance across actions) is also provided.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .filter import fosd_geq, mlr_geq, observation_likelihood, sample_belief, update
from .model import PomdpModel

MINOR_TOL = 1e-12
QUADFORM_TOL = 1e-9
MAX_COUNTEREXAMPLES = 10


@dataclass
class StructureReport:
    """Aggregated pass flags; a flag is False iff a counterexample with its tag exists.

    Counterexamples are ``(tag, index_tuple, violating_value)``.
    """

    a1_pass: bool = True
    a2_relaxed_pass: bool = True
    a2_sampled_pass: bool = True
    a3_pass: bool = True
    counterexamples: list = field(default_factory=list)

    def merge(self, other: "StructureReport") -> "StructureReport":
        self.a1_pass &= other.a1_pass
        self.a2_relaxed_pass &= other.a2_relaxed_pass
        self.a2_sampled_pass &= other.a2_sampled_pass
        self.a3_pass &= other.a3_pass
        self.counterexamples.extend(other.counterexamples)
        return self


def is_tp2(M: np.ndarray, tol: float = MINOR_TOL):
    """Check that every 2x2 minor of a nonnegative matrix is >= -tol.

    Returns ``(flag, witness)`` where ``witness`` is the first violating
    minor as ``((i1, i2, j1, j2), value)``, or None.
    """
    M = np.asarray(M, dtype=float)
    if (M < 0).any():
        raise ValueError("is_tp2 requires a nonnegative matrix")
    n, m = M.shape
    for i1 in range(n - 1):
        for i2 in range(i1 + 1, n):
            P = np.outer(M[i1], M[i2])
            minors = P - P.T          # minors[j1, j2] = M[i1,j1] M[i2,j2] - M[i1,j2] M[i2,j1]
            j1s, j2s = np.triu_indices(m, k=1)
            vals = minors[j1s, j2s]
            bad = np.flatnonzero(vals < -tol)
            if bad.size:
                k = int(bad[0])
                return False, ((i1, i2, int(j1s[k]), int(j2s[k])), float(vals[k]))
    return True, None


def check_a1(model: PomdpModel) -> StructureReport:
    """TP2 check of every transition and observation matrix."""
    report = StructureReport()
    for a in range(model.num_actions):
        for name, M in (("T", model.transitions[a]), ("O", model.observations[a])):
            ok, witness = is_tp2(M)
            if not ok:
                report.a1_pass = False
                report.counterexamples.append((f"A1:{name}", (a,) + witness[0], witness[1]))
                if len(report.counterexamples) >= MAX_COUNTEREXAMPLES:
                    return report
    return report


def _cross_action_matrix(model: PomdpModel, j: int, a: int, z: int) -> np.ndarray:
    """Symmetrized cross-action matrix for state pair (j, j+1), actions (a, a+1), observation z.

    Transition factors use the (from, to) orientation: entry (m, n) couples
    transitioning from m under action a with transitioning from n under a+1.
    """
    T, O = model.transitions, model.observations
    d = (O[a][z, j] * O[a + 1][z, j + 1] * np.outer(T[a][j, :], T[a + 1][j + 1, :])
         - O[a][z, j + 1] * O[a + 1][z, j] * np.outer(T[a][j + 1, :], T[a + 1][j, :]))
    return d + d.T


def check_a2_relaxed(model: PomdpModel) -> StructureReport:
    """Entrywise-nonnegativity check of the cross-action matrices.

    A pass is sufficient for copositivity; vacuous for single-action models.
    """
    report = StructureReport()
    S, A, Z = model.num_states, model.num_actions, model.num_observations
    for a in range(A - 1):
        for j in range(S - 1):
            for z in range(Z):
                D = _cross_action_matrix(model, j, a, z)
                bad = np.argwhere(D < -MINOR_TOL)
                for m, n in bad[:MAX_COUNTEREXAMPLES]:
                    report.a2_relaxed_pass = False
                    report.counterexamples.append(
                        ("A2'", (j, a, z, int(m), int(n)), float(D[m, n]))
                    )
                if len(report.counterexamples) >= MAX_COUNTEREXAMPLES:
                    return report
    return report


def check_a2_sampled(model: PomdpModel, n_samples: int = 100, seed=0) -> StructureReport:
    """Sampled copositivity surrogate: x' D x >= -tol for nonnegative probe vectors.

    Probes are the standard basis, all pairwise basis midpoints, and
    ``n_samples`` random nonnegative unit vectors.  A failure certifies
    non-copositivity; a pass is only evidence.
    """
    report = StructureReport()
    S, A, Z = model.num_states, model.num_actions, model.num_observations
    rng = np.random.default_rng(seed)
    probes = [np.eye(S)[i] for i in range(S)]
    for i in range(S):
        for j in range(i + 1, S):
            v = (np.eye(S)[i] + np.eye(S)[j]) / 2.0
            probes.append(v / np.linalg.norm(v))
    probes.extend(rng.random(S) for _ in range(n_samples))
    X = np.array([p / np.linalg.norm(p) for p in probes])
    for a in range(A - 1):
        for j in range(S - 1):
            for z in range(Z):
                D = _cross_action_matrix(model, j, a, z)
                vals = np.einsum("ki,ij,kj->k", X, D, X)
                bad = np.flatnonzero(vals < -QUADFORM_TOL)
                if bad.size:
                    k = int(bad[0])
                    report.a2_sampled_pass = False
                    report.counterexamples.append(("A2:sampled", (j, a, z, k), float(vals[k])))
                    if len(report.counterexamples) >= MAX_COUNTEREXAMPLES:
                        return report
    return report


def check_a3(model: PomdpModel) -> StructureReport:
    """Observation-prior dominance across consecutive actions.

    For every starting state i and cutoff observation, the cumulative
    probability of low observations under action a must dominate that under
    action a+1 (equivalently a+1's observation prior first-order dominates
    a's).  The transition factor is indexed (from-state, to-state).
    """
    report = StructureReport()
    A = model.num_actions
    priors = []
    for a in range(A):
        # priors[a][i, z] = P(z | start in i, act a), summing over next states
        priors.append(model.transitions[a].T @ model.observations[a].T)
    for a in range(A - 1):
        gap = np.cumsum(priors[a] - priors[a + 1], axis=1)
        bad = np.argwhere(gap < -MINOR_TOL)
        for i, zbar in bad[:MAX_COUNTEREXAMPLES]:
            report.a3_pass = False
            report.counterexamples.append(("A3", (int(i), int(zbar), a), float(gap[i, zbar])))
        if len(report.counterexamples) >= MAX_COUNTEREXAMPLES:
            return report
    return report


def check_all(model: PomdpModel, n_samples: int = 100, seed=0) -> StructureReport:
    """Run every structural check and merge the reports."""
    report = check_a1(model)
    report.merge(check_a2_relaxed(model))
    report.merge(check_a2_sampled(model, n_samples=n_samples, seed=seed))
    report.merge(check_a3(model))
    return report


@dataclass
class FilterMonotonicityReport:
    """Counts of sampled violations of the filter-monotonicity conclusions."""

    n_samples: int
    likelihood_violations: int        # eta(.|b, a') fails to dominate eta(.|b, a) (FOSD)
    posterior_violations: int         # tau(b, a', z) fails to dominate tau(b, a, z) (MLR)

    @property
    def passed(self) -> bool:
        return self.likelihood_violations == 0 and self.posterior_violations == 0


def validate_filter_monotonicity(model: PomdpModel, n_samples: int = 500, seed=0) -> FilterMonotonicityReport:
    """Empirically validate filter monotonicity across action pairs.

    On sampled beliefs and all pairs a' > a, checks that the observation
    likelihood under a' first-order dominates that under a, and that each
    posterior under a' MLR-dominates the posterior under a (for observations
    with positive likelihood under both).  Violations are counted, never
    raised.
    """
    rng = np.random.default_rng(seed)
    A, Z = model.num_actions, model.num_observations
    l1 = l2 = 0
    for _ in range(n_samples):
        b = sample_belief(model.num_states, rng)
        etas = [observation_likelihood(model, b, a) for a in range(A)]
        for a in range(A):
            for a2 in range(a + 1, A):
                if not fosd_geq(etas[a2], etas[a], tol=QUADFORM_TOL):
                    l1 += 1
                for z in range(Z):
                    if etas[a][z] <= 0.0 or etas[a2][z] <= 0.0:
                        continue
                    if not mlr_geq(update(model, b, a2, z), update(model, b, a, z),
                                   tol=QUADFORM_TOL):
                        l2 += 1
    return FilterMonotonicityReport(n_samples=n_samples, likelihood_violations=l1, posterior_violations=l2)
