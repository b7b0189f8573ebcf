"""Independent agent-side solver used to cross-check contracts end to end.

Given a contract, the agent faces a standard flexible-learning problem:
pick any Bayes-plausible distribution of posteriors to maximize expected
payment net of the information cost.  This module solves that problem from
scratch on a dense belief grid: evaluate the net payoff of the best report
at every grid belief, then find the best mean-preserving mixture of grid
beliefs by LP.  No pseudo-inverse, no first-order condition: agreement with
the synthesis machinery is therefore a genuine two-route check.

The grid always includes the prior and, when supplied, the target's
posteriors, so a prescribed target is exactly representable and any
reported optimality gap measures incentives, not discretization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contracts import Contract
from .costs import PosteriorCost
from .errors import DimensionMismatchError, InputError
from .experiments import Belief, Experiment, PosteriorDistribution
from .numerics import LpProblem, LpStatus, solve_lp

DEFAULT_RESOLUTION = {2: 2001, 3: 201}
MIN_RESOLUTION = 101
SUPPORT_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Belief-grid request: points per axis plus extra beliefs to include."""

    resolution: int | None = None
    augment: tuple = ()

    def points_per_axis(self, n_states: int) -> int:
        resolution = self.resolution
        if resolution is None:
            try:
                resolution = DEFAULT_RESOLUTION[n_states]
            except KeyError:
                raise InputError(f"no grid default for {n_states} states") from None
        if resolution < MIN_RESOLUTION:
            raise InputError(f"grid resolution must be at least {MIN_RESOLUTION} points per axis")
        return int(resolution)

    def to_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "augment": [np.asarray(b.probs if isinstance(b, Belief) else b).tolist()
                        for b in self.augment],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridSpec":
        return cls(resolution=data.get("resolution"),
                   augment=tuple(data.get("augment", ())))


def simplex_grid(n_states: int, points_per_axis: int) -> np.ndarray:
    """Uniform grid on the belief simplex, vertices included."""
    steps = points_per_axis - 1
    if n_states == 2:
        t = np.linspace(0.0, 1.0, points_per_axis)
        return np.column_stack([1.0 - t, t])
    if n_states == 3:
        rows = []
        for i in range(steps + 1):
            j = np.arange(steps - i + 1)
            block = np.column_stack([np.full(j.size, i), j, steps - i - j])
            rows.append(block)
        return np.vstack(rows) / steps
    raise InputError("the best-response solver supports 2 or 3 states only")


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Grid optimum of the agent's problem and, if a target was supplied,
    how far that target falls short of it."""

    optimal_value: float
    support_beliefs: tuple[Belief, ...]
    support_weights: np.ndarray
    target_value: float | None
    gap: float | None
    grid: GridSpec
    n_grid_points: int

    def to_dict(self) -> dict:
        return {
            "optimal_value": self.optimal_value,
            "support": [b.probs.tolist() for b in self.support_beliefs],
            "weights": self.support_weights.tolist(),
            "target_value": self.target_value,
            "gap": self.gap,
            "n_grid_points": self.n_grid_points,
            "grid": self.grid.to_dict(),
        }


def _net_values(points: np.ndarray, utilities: np.ndarray, cost: PosteriorCost) -> np.ndarray:
    payoff = points @ utilities
    return payoff.max(axis=1) - cost.value_many(points)


def agent_best_response(e_p: Experiment, t: Contract, cost: PosteriorCost,
                        prior: Belief, grid: GridSpec | None = None,
                        target: PosteriorDistribution | None = None) -> OracleResult:
    """Solve the agent's learning problem on a belief grid.

    Builds the net value of the best report at every grid belief and
    maximizes its expectation over grid distributions averaging back to the
    prior (an LP).  Returns the achieving support.
    """
    n = e_p.n_states
    if prior.n_states != n:
        raise DimensionMismatchError("prior does not match the experiment")
    if t.payments.shape[0] != e_p.n_realizations:
        raise DimensionMismatchError("contract rows do not match the experiment realizations")
    grid = grid or GridSpec()
    points = [simplex_grid(n, grid.points_per_axis(n)), prior.probs[None, :]]
    if target is not None:
        points.append(target.posterior_matrix().T)
    for extra in grid.augment:
        probs = extra.probs if isinstance(extra, Belief) else np.asarray(extra, dtype=float)
        points.append(probs[None, :])
    points = np.vstack(points)

    utilities = e_p.kernel @ t.payments
    values = _net_values(points, utilities, cost)
    finite = np.isfinite(values)
    if not finite.any():
        raise InputError("the cost is infinite on the entire grid")
    points, values = points[finite], values[finite]

    a_eq = np.vstack([points.T, np.ones(points.shape[0])])
    b_eq = np.concatenate([prior.probs, [1.0]])
    sol = solve_lp(LpProblem(c=-values, a_eq=a_eq, b_eq=b_eq, bounds=(0, None)))
    if sol.status is not LpStatus.OPTIMAL:
        raise InputError(f"best-response LP did not resolve: {sol.message}")
    weights = sol.x
    optimal = float(values @ weights)

    keep = weights > SUPPORT_TOL
    support = tuple(Belief(p) for p in points[keep])
    support_weights = weights[keep] / weights[keep].sum()

    target_value = gap = None
    if target is not None:
        interim = target.posterior_matrix().T @ utilities      # K x K
        target_value = float(
            target.weights @ (np.einsum("kk->k", interim) - cost.value_many(target.posterior_matrix().T))
        )
        gap = optimal - target_value
    return OracleResult(
        optimal_value=optimal, support_beliefs=support,
        support_weights=support_weights, target_value=target_value, gap=gap,
        grid=grid, n_grid_points=points.shape[0],
    )


def verify_contract(e_p: Experiment, target: PosteriorDistribution,
                    cost: PosteriorCost, t: Contract, tol: float = 1e-5,
                    grid: GridSpec | None = None) -> bool:
    """True iff the prescribed target comes within ``tol`` of the agent's
    grid optimum under the contract (honest reports at its own posteriors)."""
    result = agent_best_response(e_p, t, cost, prior=cost.prior, grid=grid, target=target)
    return bool(result.gap <= tol)
