"""Power-simplex utilities: Euclidean projection, uniform sampling,
lattice enumeration, and the projected-gradient loop shared by the
solvers.  The feasible set everywhere is {p >= 0, sum(p) <= budget}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tolerances import PGD_TOL_REL

__all__ = [
    "project_onto_budget_simplex",
    "sample_budget_simplex",
    "budget_simplex_lattice",
    "lattice_size",
    "PgdResult",
    "projected_gradient",
]


def project_onto_budget_simplex(point, budget: float) -> np.ndarray:
    """Euclidean projection onto {p >= 0, sum(p) <= budget}.

    Clips negatives first; only when the clipped point still violates the
    budget is the sort-based threshold projection onto the face
    {p >= 0, sum(p) = budget} applied.
    """
    vec = np.asarray(point, dtype=np.float64)
    clipped = np.maximum(vec, 0.0)
    if clipped.sum() <= budget:
        return clipped
    srt = np.sort(vec)[::-1]
    excess = np.cumsum(srt) - budget
    counts = np.arange(1, vec.size + 1)
    rho = np.nonzero(srt - excess / counts > 0.0)[0][-1]
    tau = excess[rho] / (rho + 1.0)
    return np.maximum(vec - tau, 0.0)


def sample_budget_simplex(rng: np.random.Generator, k: int, budget: float, count: int) -> np.ndarray:
    """Uniform draws from the solid simplex via exponential spacings.

    k+1 iid exponentials normalized by their total give a Dirichlet(1,..,1)
    point on the k+1 simplex; dropping the last coordinate yields a point
    uniform over {p >= 0, sum(p) <= 1}, scaled by the budget.
    """
    gaps = rng.exponential(size=(count, k + 1))
    return budget * gaps[:, :k] / gaps.sum(axis=1, keepdims=True)


def budget_simplex_lattice(k: int, resolution: int) -> np.ndarray:
    """All integer vectors i >= 0 with sum(i) <= resolution, shape (M, k)."""
    if k < 1 or resolution < 0:
        raise ValueError(f"bad lattice request k={k} resolution={resolution}")
    if k == 1:
        return np.arange(resolution + 1, dtype=np.int64)[:, None]
    blocks = []
    for lead in range(resolution + 1):
        tail = budget_simplex_lattice(k - 1, resolution - lead)
        blocks.append(np.column_stack([np.full(tail.shape[0], lead, dtype=np.int64), tail]))
    return np.vstack(blocks)


def lattice_size(k: int, resolution: int) -> int:
    """Number of lattice points, C(resolution + k, k)."""
    return math.comb(resolution + k, k)


@dataclass(frozen=True)
class PgdResult:
    point: np.ndarray
    value: float
    gradient: np.ndarray
    iterations: int
    pg_norm: float
    converged: bool


def projected_gradient(
    value_and_grad,
    start,
    budget: float,
    max_iters: int = 5000,
    tol_rel: float = PGD_TOL_REL,
    armijo_slope: float = 1e-4,
    shrink: float = 0.5,
    initial_step: float = 1.0,
    step_growth: float = 2.0,
    step_cap: float = 1e6,
) -> PgdResult:
    """Projected gradient descent with Armijo backtracking.

    Accepts a candidate when f(cand) <= f(p) + slope * <grad, cand - p>.
    The accepted step is carried over and grown by `step_growth` before
    the next backtracking pass; convergence is declared when the unit
    projected-gradient norm drops below tol_rel * (1 + |f|).  A stall of
    the backtracking below 1e-18 exits with converged determined by the
    projected-gradient test alone.
    """
    point = project_onto_budget_simplex(np.asarray(start, dtype=np.float64), budget)
    value, grad = value_and_grad(point)
    value = float(value)
    step = initial_step
    iters = 0
    converged = False
    pg_norm = math.inf
    while True:
        pg_norm = float(np.linalg.norm(point - project_onto_budget_simplex(point - grad, budget)))
        if pg_norm <= tol_rel * (1.0 + abs(value)):
            converged = True
            break
        if iters >= max_iters:
            break
        iters += 1
        trial = initial_step if iters == 1 else min(step * step_growth, step_cap)
        stalled = False
        while True:
            cand = project_onto_budget_simplex(point - trial * grad, budget)
            cand_val, cand_grad = value_and_grad(cand)
            cand_val = float(cand_val)
            if cand_val <= value + armijo_slope * float(grad @ (cand - point)):
                break
            trial *= shrink
            if trial < 1e-18:
                stalled = True
                break
        if stalled:
            break
        point, value, grad, step = cand, cand_val, cand_grad, trial
    return PgdResult(point, value, grad, iters, pg_norm, converged)
