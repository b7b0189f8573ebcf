"""Deciding whether a target posterior distribution can be incentivized.

A target is implementable under a contractible experiment iff its
information cost is finite and the column-wise differences of its
marginal-cost matrix lie in the column space of the experiment's kernel
(equivalently, the kernel lets the principal create the marginal
state-dependent utilities the agent's first-order condition needs).

Targets with boundary posteriors are handled by a complementary-slackness
variant: the first-order condition may hold as an inequality on states a
posterior rules out, so nonnegative multipliers supported on those zero
coordinates are subtracted from the marginal-cost columns before the
column-space test.  Feasibility of that system is decided as an LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .costs import MarginalCostMatrix, PosteriorCost, marginal_cost_matrix, total_cost
from .errors import BoundaryMarginalCostError, DimensionMismatchError, InputError
from .experiments import (
    INTERIOR_THRESHOLD,
    Experiment,
    PosteriorDistribution,
    has_full_row_rank,
    is_bayes_plausible,
)
from .numerics import RESIDUAL_TOL, LpProblem, LpStatus, matrix_rank, pseudo_inverse, solve_lp
from .orders import OrderVerdict, colspace_compare

# Absolute floor so that vanishing column differences never trip the
# relative residual test on rounding dust.
_RESIDUAL_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class ImplementabilityReport:
    """Verdict plus machine-checkable certificates.

    ``residuals[k]`` is the projection residual of the k-th column
    difference (against the last column) outside Col(kernel); empty when the
    full-row-rank fast path fired.  ``lambda_certificate`` reconstructs the
    agent's per-state payoff multiplier for the canonical contract;
    ``eta`` carries the boundary multipliers in corner mode (zero rows on
    interior coordinates by construction).
    """

    implementable: bool
    mode: str                      # "interior" or "corner"
    residuals: np.ndarray
    diff_norms: np.ndarray
    lambda_certificate: np.ndarray | None
    eta: np.ndarray | None
    tolerance: float
    full_row_rank: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "implementable": self.implementable,
            "mode": self.mode,
            "residuals": np.asarray(self.residuals).tolist(),
            "diff_norms": np.asarray(self.diff_norms).tolist(),
            "lambda": None if self.lambda_certificate is None else self.lambda_certificate.tolist(),
            "eta": None if self.eta is None else self.eta.tolist(),
            "tolerance": self.tolerance,
            "full_row_rank": self.full_row_rank,
            "reason": self.reason,
        }


def _no(reason: str, mode: str, tol: float, full_rank: bool = False) -> ImplementabilityReport:
    return ImplementabilityReport(
        implementable=False, mode=mode, residuals=np.array([]), diff_norms=np.array([]),
        lambda_certificate=None, eta=None, tolerance=tol, full_row_rank=full_rank,
        reason=reason,
    )


def _check_spaces(e_p: Experiment, target: PosteriorDistribution,
                  cost: PosteriorCost) -> None:
    if e_p.n_states != target.n_states:
        raise DimensionMismatchError("experiment and target live on different state spaces")
    if not is_bayes_plausible(target, cost.prior):
        raise InputError("target must average back to the cost's prior (Bayes plausibility)")


def _has_boundary_posterior(target: PosteriorDistribution) -> bool:
    return any(not b.is_interior() for b in target.beliefs)


def _lambda_from(nabla: np.ndarray, projector: np.ndarray) -> np.ndarray:
    # Multiplier of the canonical member of the contract family (free term
    # zero): minus the out-of-column-space component, averaged over columns.
    residual_part = nabla - projector @ nabla
    return -residual_part.mean(axis=1)


def check_implementable(e_p: Experiment, target: PosteriorDistribution,
                        cost: PosteriorCost, residual_tol: float = RESIDUAL_TOL,
                        rank_tol: float | None = None,
                        lp_tol: float | None = None) -> ImplementabilityReport:
    """Decide implementability of ``target`` under ``e_p`` for ``cost``.

    Interior targets use the column-space test on marginal-cost differences
    (with a full-row-rank fast path); targets with boundary posteriors are
    dispatched to :func:`check_implementable_corner` when the cost's slope
    stays bounded, and rejected outright when it does not (a posterior that
    rules out a state can then never be optimal).
    """
    _check_spaces(e_p, target, cost)
    if math.isinf(total_cost(cost, target)):
        return _no("target has infinite information cost", "interior", residual_tol)
    if _has_boundary_posterior(target):
        if cost.infinite_boundary_slope:
            return _no(
                "target includes a boundary posterior but the cost's slope is "
                "unbounded at the boundary, so such learning is never optimal",
                "interior", residual_tol,
            )
        return check_implementable_corner(e_p, target, cost, residual_tol, rank_tol, lp_tol)

    nabla = marginal_cost_matrix(cost, target).matrix
    if has_full_row_rank(e_p, rank_tol):
        return ImplementabilityReport(
            implementable=True, mode="interior", residuals=np.array([]),
            diff_norms=np.array([]), lambda_certificate=np.zeros(e_p.n_states),
            eta=None, tolerance=residual_tol, full_row_rank=True,
            reason="full row rank: any finite-cost target is implementable",
        )

    pinv = pseudo_inverse(e_p.kernel, rank_tol)
    projector = pinv.projector
    diffs = nabla[:, :-1] - nabla[:, -1:]
    residuals = np.linalg.norm(diffs - projector @ diffs, axis=0)
    norms = np.linalg.norm(diffs, axis=0)
    ok = bool(np.all(residuals <= residual_tol * norms + _RESIDUAL_FLOOR))
    return ImplementabilityReport(
        implementable=ok, mode="interior", residuals=residuals, diff_norms=norms,
        lambda_certificate=_lambda_from(nabla, projector) if ok else None,
        eta=None, tolerance=residual_tol, full_row_rank=False,
        reason="" if ok else "a marginal-cost difference leaves the kernel's column space",
    )


def check_implementable_corner(e_p: Experiment, target: PosteriorDistribution,
                               cost: PosteriorCost, residual_tol: float = RESIDUAL_TOL,
                               rank_tol: float | None = None,
                               lp_tol: float | None = None) -> ImplementabilityReport:
    """Implementability allowing boundary posteriors (bounded-slope costs).

    Looks for multipliers ``eta >= 0``, supported only on the states each
    posterior rules out, such that the columns of ``nabla - eta`` pass the
    pairwise column-space test.  Decided as an LP minimizing the l1 norm of
    the projection residuals; the optimal ``eta`` is returned as the
    certificate.  On interior targets every multiplier is pinned to zero and
    the verdict coincides with :func:`check_implementable`.
    """
    _check_spaces(e_p, target, cost)
    if math.isinf(total_cost(cost, target)):
        return _no("target has infinite information cost", "corner", residual_tol)

    nabla_obj = marginal_cost_matrix(cost, target)   # raises if slope unbounded at boundary
    nabla = nabla_obj.matrix
    if not np.all(np.isfinite(nabla)):
        raise BoundaryMarginalCostError(
            "marginal-cost matrix has non-finite entries; the boundary test "
            "needs finite gradients at every target posterior"
        )
    n, k = nabla.shape

    if has_full_row_rank(e_p, rank_tol):
        return ImplementabilityReport(
            implementable=True, mode="corner", residuals=np.array([]),
            diff_norms=np.array([]), lambda_certificate=np.zeros(n),
            eta=np.zeros((n, k)), tolerance=residual_tol, full_row_rank=True,
            reason="full row rank: any finite-cost target is implementable",
        )

    posterior_matrix = target.posterior_matrix()
    free = posterior_matrix < INTERIOR_THRESHOLD        # eta may be positive only here
    if not free.any():
        # Interior target: complementary slackness pins every multiplier to
        # zero and the verdict is the interior one.
        base = check_implementable(e_p, target, cost, residual_tol, rank_tol)
        return replace(base, mode="corner",
                       eta=np.zeros((n, k)) if base.implementable else None)

    pinv = pseudo_inverse(e_p.kernel, rank_tol)
    projector = pinv.projector
    complement = np.eye(n) - projector
    free_idx = [(i, j) for j in range(k) for i in range(n) if free[i, j]]
    n_eta = len(free_idx)
    diffs = nabla[:, :-1] - nabla[:, -1:]
    rhs = (complement @ diffs).flatten(order="F")       # stacked per column block
    n_rows = rhs.size

    # Residual rows: rhs - C @ eta_block, where the eta of column j enters
    # block j with +complement and the last column's eta enters every block
    # with -complement (the multipliers are subtracted from nabla).
    coef = np.zeros((n_rows, n_eta))
    for var, (i, j) in enumerate(free_idx):
        col = complement[:, i]
        if j < k - 1:
            coef[j * n:(j + 1) * n, var] = col
        else:
            for block in range(k - 1):
                coef[block * n:(block + 1) * n, var] = -col

    # min sum(t) s.t. -t <= rhs - coef @ eta <= t, eta >= 0, t >= 0.
    n_vars = n_eta + n_rows
    c_obj = np.concatenate([np.zeros(n_eta), np.ones(n_rows)])
    a_ub = np.block([
        [coef, -np.eye(n_rows)],
        [-coef, -np.eye(n_rows)],
    ])
    b_ub = np.concatenate([rhs, -rhs])
    lp = LpProblem(c=c_obj, a_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * n_vars)
    sol = solve_lp(lp) if lp_tol is None else solve_lp(lp, feasibility_tol=lp_tol)
    if sol.status is not LpStatus.OPTIMAL:
        raise InputError(f"boundary-multiplier LP did not resolve: {sol.message}")

    norms = np.linalg.norm(diffs, axis=0)
    scale = max(1.0, float(norms.max(initial=0.0)))
    ok = sol.objective <= residual_tol * scale * max(1, n_rows)
    eta = np.zeros((n, k))
    for var, (i, j) in enumerate(free_idx):
        eta[i, j] = sol.x[var]
    adjusted = nabla - eta
    adj_diffs = adjusted[:, :-1] - adjusted[:, -1:]
    residuals = np.linalg.norm(complement @ adj_diffs, axis=0)
    return ImplementabilityReport(
        implementable=ok, mode="corner", residuals=residuals, diff_norms=norms,
        lambda_certificate=_lambda_from(adjusted, projector) if ok else None,
        eta=eta if ok else None, tolerance=residual_tol, full_row_rank=False,
        reason="" if ok else "no boundary multipliers can pull the marginal-cost "
                             "differences into the kernel's column space",
    )


def check_unique_implementable(e_p: Experiment, target: PosteriorDistribution,
                               cost: PosteriorCost, residual_tol: float = RESIDUAL_TOL,
                               rank_tol: float | None = None) -> bool:
    """True iff exactly one optimal learning choice can be induced.

    Requires implementability, strict convexity of the posterior price, and
    linearly independent target posteriors (so only one weighting of them
    averages back to the prior).
    """
    report = check_implementable(e_p, target, cost, residual_tol, rank_tol)
    if not report.implementable:
        return False
    if not cost.strictly_convex:
        return False
    posterior_matrix = target.posterior_matrix()
    return matrix_rank(posterior_matrix, rank_tol) == target.size


def check_no_dominance(nabla, identical_tol: float = 1e-12) -> bool:
    """True iff no marginal-cost column is weakly dominated by a convex
    combination of the columns not identical to it.

    Collections of gradients of a convex price always pass; the test guards
    user-supplied matrices meant to act as marginal-cost matrices.
    """
    matrix = nabla.matrix if isinstance(nabla, MarginalCostMatrix) else np.asarray(nabla, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise InputError("no-dominance test needs finite entries")
    n, k = matrix.shape
    for col in range(k):
        others = [
            j for j in range(k)
            if j != col and not np.allclose(matrix[:, j], matrix[:, col], atol=identical_tol, rtol=0.0)
        ]
        if not others:
            continue
        block = matrix[:, others]
        problem = LpProblem(
            c=np.zeros(len(others)),
            a_ub=-block, b_ub=-matrix[:, col],
            a_eq=np.ones((1, len(others))), b_eq=np.array([1.0]),
            bounds=(0, None),
        )
        sol = solve_lp(problem)
        if sol.status is LpStatus.OPTIMAL:
            return False
        if sol.status is not LpStatus.INFEASIBLE:
            raise InputError(f"dominance LP did not resolve: {sol.message}")
    return True


def compare_implementable_sets(e_p: Experiment, e_p2: Experiment,
                               rank_tol: float | None = None) -> OrderVerdict:
    """Which experiment can implement a larger set of targets, for every
    admissible cost and prior: decided by column-space containment."""
    verdict = colspace_compare(e_p, e_p2, rank_tol)
    return replace(verdict, order="implementable_sets")
