"""Finite-horizon expectimax and action-interval branch-and-bound search.

Both planners run the same exact recursion over the reachable-belief tree:

    Q(b, a) = rho(b, a) + gamma * sum_z eta(z | b, a) * V(tau(b, a, z))

with V the max over actions and the base case (one decision left) returning
``max_a rho(b, a)``.  The branch-and-bound variant only differs in that, at
every node with more than one decision left, expansion is restricted to the
actions inside the myopic policy interval of the node belief.  With a
trivial certificate both planners execute identical arithmetic and return
bitwise-equal results.

Node accounting: ``expanded`` counts every belief visited (root included);
observation branches with zero likelihood are never generated and never
counted.  ``pruned`` counts, in closed form, the beliefs of every skipped
subtree at full (A * Z)-ary size, so that for models without zero-likelihood
branches ``expanded + pruned`` equals the full tree size
``sum_{i=0}^{d-1} (A Z)^i``.  Reported pruned fractions use the prunable
node count (the full tree minus its root) as denominator.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .filter import sample_belief, sample_reachable
from .mlr import BoundCertificate, action_interval
from .model import PomdpModel
from .rewards import uncertainty


@dataclass
class SearchResult:
    """Root outcome of one tree search.

    ``root_values`` has one entry per action, NaN where the action was not
    considered at the root; ``value`` is the max over considered actions and
    ``best_action`` the smallest maximizer.
    """

    best_action: int
    value: float
    root_values: np.ndarray
    expanded: int
    pruned: int


def full_tree_size(model: PomdpModel, depth: int) -> int:
    """Belief count of an unpruned search tree: sum_{i=0}^{d-1} (A Z)^i."""
    branch = model.num_actions * model.num_observations
    return sum(branch ** i for i in range(depth))


def prunable_tree_size(model: PomdpModel, depth: int) -> int:
    """Non-root belief count of the unpruned tree (the root is never prunable)."""
    return full_tree_size(model, depth) - 1


class _Searcher:
    """Shared recursion; ``band`` restricts expandable actions per belief."""

    def __init__(self, model: PomdpModel, band=None, terminal: np.ndarray | None = None):
        self.model = model
        self.T = model.transitions
        self.O = model.observations
        self.R = model.reward.state_reward
        self.w = model.reward.weights
        self.kind = model.reward.kind
        self.gamma = model.discount
        self.band = band
        self.terminal = None if terminal is None else np.asarray(terminal, dtype=float)
        self.expanded = 0
        self.pruned = 0
        self._branch = model.num_actions * model.num_observations
        self._subtree: dict[int, int] = {}

    def _skipped_size(self, depth: int) -> int:
        """Beliefs under one skipped action at a node with ``depth`` decisions left:
        Z children, each the root of a full (depth-1)-decision tree."""
        if depth not in self._subtree:
            self._subtree[depth] = (self.model.num_observations
                                    * sum(self._branch ** i for i in range(depth - 1)))
        return self._subtree[depth]

    def _rho_all(self, b: np.ndarray) -> np.ndarray:
        return self.R @ b - self.w * uncertainty(self.kind, b)

    def search(self, b: np.ndarray, depth: int, root: bool = False):
        """Return the node value; at the root, also per-action values."""
        self.expanded += 1
        A = self.model.num_actions
        rho = self._rho_all(b)
        if depth == 1:
            values = rho.copy()
            if self.terminal is not None:
                for a in range(A):
                    values[a] += self.gamma * float(self.terminal @ (self.T[a] @ b))
            if root:
                return float(values.max()), values
            return float(values.max())
        lo, hi = (0, A - 1) if self.band is None else self.band(b)
        values = np.full(A, np.nan)
        for a in range(A):
            if a < lo or a > hi:
                self.pruned += self._skipped_size(depth)
                continue
            ba = self.T[a] @ b
            eta = self.O[a] @ ba
            future = 0.0
            for z in range(self.model.num_observations):
                if eta[z] <= 0.0:
                    continue
                tb = self.O[a][z] * ba / eta[z]
                future += eta[z] * self.search(tb, depth - 1)
            values[a] = rho[a] + self.gamma * future
        if root:
            return float(np.nanmax(values)), values
        return float(np.nanmax(values))


def _run(model: PomdpModel, b: np.ndarray, depth: int, band, terminal) -> SearchResult:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    searcher = _Searcher(model, band=band, terminal=terminal)
    value, root_values = searcher.search(np.asarray(b, dtype=float), depth, root=True)
    best = int(np.nanargmax(root_values))
    return SearchResult(best_action=best, value=value, root_values=root_values,
                        expanded=searcher.expanded, pruned=searcher.pruned)


def expectimax(model: PomdpModel, b: np.ndarray, depth: int,
               terminal: np.ndarray | None = None) -> SearchResult:
    """Exhaustive finite-horizon search; optional linear terminal value at the leaves."""
    return _run(model, b, depth, band=None, terminal=terminal)


def branch_and_bound(model: PomdpModel, cert: BoundCertificate,
                     b: np.ndarray, depth: int) -> SearchResult:
    """Expectimax restricted, at every interior node, to the myopic policy interval."""
    if cert.g is None and cert.h is None:
        band = None                   # trivial certificate: identical to expectimax
    else:
        def band(belief):
            return action_interval(model, cert, belief)
    return _run(model, b, depth, band=band, terminal=None)


@dataclass
class PruningRow:
    depth: int
    n_samples: int
    mean_pruned_frac: float
    min_pruned_frac: float
    max_pruned_frac: float
    mean_ms: float


@dataclass
class PruningStats:
    rows: list[PruningRow]


def pruning_experiment(model: PomdpModel, cert: BoundCertificate,
                       depths: list[int], n_samples: int, seed=0) -> PruningStats:
    """Mean/min/max pruned fraction per depth over uniformly sampled root beliefs."""
    rng = np.random.default_rng(seed)
    beliefs = [sample_belief(model.num_states, rng) for _ in range(n_samples)]
    rows = []
    for depth in depths:
        denom = prunable_tree_size(model, depth)
        fracs = np.zeros(n_samples)
        elapsed = np.zeros(n_samples)
        for i, b in enumerate(beliefs):
            t0 = time.perf_counter()
            result = branch_and_bound(model, cert, b, depth)
            elapsed[i] = (time.perf_counter() - t0) * 1e3
            fracs[i] = result.pruned / denom if denom > 0 else 0.0
        rows.append(PruningRow(depth=depth, n_samples=n_samples,
                               mean_pruned_frac=float(fracs.mean()),
                               min_pruned_frac=float(fracs.min()),
                               max_pruned_frac=float(fracs.max()),
                               mean_ms=float(elapsed.mean())))
    return PruningStats(rows=rows)


@dataclass
class GapStats:
    """Average interval width and distance of the upper policy to a deep search."""

    n_samples: int
    mean_interval_width: float
    reference_depth: int | None
    mean_upper_minus_reference: float | None


def bound_gap_experiment(model: PomdpModel, cert: BoundCertificate,
                         n_samples: int, seed=0,
                         reference_depth: int | None = None,
                         reachable_depth: int = 4) -> GapStats:
    """Average policy-interval width over sampled reachable beliefs.

    When ``reference_depth`` is given, also reports the mean difference
    between the upper myopic policy and the action of an exhaustive search
    at that depth.
    """
    rng = np.random.default_rng(seed)
    widths = np.zeros(n_samples)
    gaps = np.zeros(n_samples)
    uniform = np.full(model.num_states, 1.0 / model.num_states)
    for i in range(n_samples):
        depth = int(rng.integers(0, reachable_depth + 1))
        b = sample_reachable(model, uniform, depth, rng)
        lo, hi = action_interval(model, cert, b)
        widths[i] = hi - lo
        if reference_depth is not None:
            gaps[i] = hi - expectimax(model, b, reference_depth).best_action
    return GapStats(
        n_samples=n_samples,
        mean_interval_width=float(widths.mean()),
        reference_depth=reference_depth,
        mean_upper_minus_reference=float(gaps.mean()) if reference_depth is not None else None,
    )
