"""Shared generators and independent oracles for the test suite.

The oracles here deliberately avoid the library's own kernels: rank is
recomputed by exact fraction Gaussian elimination, LPs by brute-force vertex
enumeration, so agreement is a genuine two-route check.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np

from infocontracts import Belief, Experiment, PosteriorDistribution, entropy_cost


def exact_rank(matrix) -> int:
    """Row-reduction rank over the rationals (exact for integer input)."""
    rows = [[Fraction(x) for x in row] for row in np.asarray(matrix).tolist()]
    rank = 0
    n_rows = len(rows)
    n_cols = len(rows[0])
    for col in range(n_cols):
        pivot = next((i for i in range(rank, n_rows) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank][col]
        rows[rank] = [x / lead for x in rows[rank]]
        for i in range(n_rows):
            if i != rank and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank


def brute_force_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, box=2.0, tol=1e-9):
    """Vertex-enumeration LP oracle for box-bounded problems.

    Every variable is constrained to [-box, box], so the feasible set is a
    polytope and any optimum sits at a vertex: a point where n linearly
    independent constraints (inequality rows, equality rows, or box faces)
    are active.  Returns (status, optimal value).
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    if a_ub is not None:
        for row, b in zip(np.asarray(a_ub, dtype=float), np.asarray(b_ub, dtype=float)):
            rows.append((row, b, "ub"))
    for i in range(n):
        face = np.zeros(n)
        face[i] = 1.0
        rows.append((face, box, "ub"))
        rows.append((-face, box, "ub"))
    eq_rows = []
    if a_eq is not None:
        for row, b in zip(np.asarray(a_eq, dtype=float), np.asarray(b_eq, dtype=float)):
            eq_rows.append((row, b))

    best = None
    n_free = n - len(eq_rows)
    for active in combinations(range(len(rows)), max(n_free, 0)):
        a_mat = [rows[i][0] for i in active] + [r for r, _ in eq_rows]
        b_vec = [rows[i][1] for i in active] + [b for _, b in eq_rows]
        a_mat = np.array(a_mat)
        if a_mat.shape[0] != n or np.linalg.matrix_rank(a_mat) < n:
            continue
        try:
            x = np.linalg.solve(a_mat, np.array(b_vec))
        except np.linalg.LinAlgError:
            continue
        feasible = True
        if a_ub is not None:
            feasible &= bool(np.all(np.asarray(a_ub) @ x <= np.asarray(b_ub) + tol))
        for row, b in eq_rows:
            feasible &= abs(row @ x - b) <= tol
        feasible &= bool(np.all(np.abs(x) <= box + tol))
        if feasible:
            value = float(c @ x)
            if best is None or value < best:
                best = value
    return ("optimal", best) if best is not None else ("infeasible", None)


def random_stochastic(rng, n, m) -> np.ndarray:
    return rng.dirichlet(np.ones(m), size=n)


def random_binary_experiment(rng, min_det: float = 0.05) -> Experiment:
    while True:
        kernel = random_stochastic(rng, 2, 2)
        if abs(np.linalg.det(kernel)) >= min_det:
            return Experiment(kernel)


def random_interior_prior(rng, n, low: float = 0.1) -> Belief:
    while True:
        probs = rng.dirichlet(np.ones(n))
        if probs.min() >= low:
            return Belief(probs)


def random_binary_target(rng, prior: Belief, margin: float = 0.03) -> PosteriorDistribution:
    """Two posteriors straddling a binary prior, weighted Bayes-plausibly."""
    p = prior.probs[1]
    lo = rng.uniform(0.02, p - margin)
    hi = rng.uniform(p + margin, 0.98)
    w_hi = (p - lo) / (hi - lo)
    return PosteriorDistribution([[1 - lo, lo], [1 - hi, hi]], [1 - w_hi, w_hi])


def tilted_implementable_target(rng, kernel, tilt: float = 0.6):
    """Target + entropy cost implementable under ``kernel`` by construction.

    The log-ratio of the two posteriors is placed inside Col(kernel) (which
    always contains the ones vector), which is exactly what the entropy
    cost's implementability condition asks for.
    """
    n = kernel.shape[0]
    direction = kernel @ rng.normal(size=kernel.shape[1])
    direction *= tilt / max(1.0, np.abs(direction).max())
    base = rng.dirichlet(np.ones(n) * 5.0)
    tilted = base * np.exp(direction)
    tilted /= tilted.sum()
    weight = rng.uniform(0.25, 0.75)
    prior = Belief(weight * tilted + (1 - weight) * base)
    target = PosteriorDistribution([tilted, base], [weight, 1 - weight])
    return target, entropy_cost(prior)


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return -float(terms.sum())


def corner_instance(rng):
    """Rank-2 kernel on 3 states, one boundary posterior with a single
    ruled-out state, quadratic cost at a random interior prior.  Returns
    None when the draw fails to produce an interior second posterior."""
    from infocontracts import pseudo_inverse, quadratic_cost

    while True:
        kernel = random_stochastic(rng, 3, 2)
        if pseudo_inverse(kernel).rank == 2:
            break
    zero_state = int(rng.integers(3))
    x1 = np.zeros(3)
    others = [i for i in range(3) if i != zero_state]
    split = rng.uniform(0.15, 0.85)
    x1[others[0]], x1[others[1]] = split, 1.0 - split
    weight = rng.uniform(0.1, 0.4)
    prior = rng.dirichlet(np.ones(3) * 6.0 + 2.0)
    x2 = (prior - weight * x1) / (1.0 - weight)
    if x2.min() < 0.02:
        return None
    target = PosteriorDistribution([x1, x2], [weight, 1.0 - weight])
    cost = quadratic_cost(Belief(prior), scale=rng.uniform(0.5, 2.0))
    return Experiment(kernel), target, cost, zero_state


def grid_search_corner_verdict(e, target, cost, zero_state, n_grid=2001):
    """Brute-force oracle for the boundary-multiplier system: scan the
    multiplier on a grid and test the projection residual directly.
    Returns (verdict, best residual, decision threshold)."""
    from infocontracts import marginal_cost_matrix, pseudo_inverse

    nabla = marginal_cost_matrix(cost, target).matrix
    d = nabla[:, 0] - nabla[:, 1]
    pinv = pseudo_inverse(e.kernel)
    complement = np.eye(3) - pinv.projector
    direction = complement[:, zero_state]
    unconstrained = (complement @ d) @ direction / max(direction @ direction, 1e-30)
    span = 3.0 * abs(unconstrained) + 1.0
    grid = np.linspace(0.0, span, n_grid)
    residuals = np.linalg.norm(
        (complement @ d)[None, :] - grid[:, None] * direction[None, :], axis=1)
    best = float(residuals.min())
    spacing = span / (n_grid - 1)
    threshold = 2.0 * spacing + 1e-9
    return best <= threshold, best, threshold
