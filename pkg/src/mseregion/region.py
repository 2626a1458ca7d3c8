"""Region membership, segment witnesses, sampling, and user embedding.

A target MSE tuple t is counted as achievable when some feasible power
allocation p satisfies eps_k(p) <= t_k for every user, i.e. membership is
tested against the dominated (coordinatewise-relaxed) region.  The inner
problem min_p max_k (eps_k(p) - t_k) is nonsmooth, so the solver anneals
a log-sum-exp smoothing through a fixed temperature schedule, polishes
with exact-max subgradient steps, and finishes with a sequential
quadratic refinement of the equivalent epigraph program
min {s : eps(p) - t <= s, p feasible}, keeping the best true margin seen
at any stage.

`segment_test` applies the membership test along the chord between two
achievable tuples; an interior point that fails membership is a direct
numerical witness that the region is not convex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize as _sqp_minimize

from .model import (
    ChannelSet,
    MseTuple,
    SystemConfig,
    _channel_matrix,
    mse_jacobian,
    mse_tuples,
)
from .simplex import (
    budget_simplex_lattice,
    lattice_size,
    project_onto_budget_simplex,
    projected_gradient,
    sample_budget_simplex,
)
from .tolerances import TOL_MEMBER

__all__ = [
    "MembershipOptions",
    "MembershipVerdict",
    "SegmentPoint",
    "SegmentReport",
    "RegionSampleSet",
    "GRID_LIMIT",
    "dominated_membership",
    "segment_test",
    "sample_region",
    "embed_inactive_users",
]

# hard cap on grid-mode sample counts; beyond this, use random mode
GRID_LIMIT = 10_000_000

# coarse seeding lattices stay below this many points
_COARSE_LIMIT = 100_000


@dataclass(frozen=True)
class MembershipOptions:
    """Multistart and annealing schedule for the membership solver.

    The temperature ladder and the exact-max polish are part of the
    published output contract: changing them changes witness powers, so
    they stay pinned here rather than being derived from the instance.
    """

    starts: int = 4
    seed: int = 0
    coarse_resolution: int = 12
    coarse_starts: int = 3
    temperatures: tuple = (1e-1, 1e-2, 1e-3)
    stage_max_iters: int = 300
    polish_max_iters: int = 400
    sqp_max_iters: int = 200
    tol_member: float = TOL_MEMBER


@dataclass(frozen=True)
class MembershipVerdict:
    target: np.ndarray
    margin: float
    witness_powers: np.ndarray
    dominated: bool


@dataclass(frozen=True)
class SegmentPoint:
    t: float
    target: np.ndarray
    margin: float
    dominated: bool
    witness_powers: np.ndarray


@dataclass(frozen=True)
class SegmentReport:
    endpoint_a: MembershipVerdict
    endpoint_b: MembershipVerdict
    points: list
    nonconvex_witness: bool


@dataclass(frozen=True)
class RegionSampleSet:
    powers: np.ndarray
    mses: np.ndarray
    resolution: int
    mode: str
    seed: Optional[int]


def _epigraph_refine(mat: np.ndarray, config: SystemConfig, target: np.ndarray,
                     start: np.ndarray, opts: MembershipOptions) -> np.ndarray:
    """SQP step on min {s : eps(p) - t <= s} over the power simplex.

    Resolves the tie valleys where first-order steps on the smoothed or
    exact max crawl; the returned point is re-projected so the caller can
    evaluate the true margin at a feasible allocation.
    """
    k = mat.shape[1]
    grad_s = np.zeros(k + 1)
    grad_s[k] = 1.0

    def cons_val(x):
        eps, _ = mse_jacobian(mat, np.maximum(x[:k], 0.0), config)
        return x[k] - (eps - target)

    def cons_jac(x):
        _, jac = mse_jacobian(mat, np.maximum(x[:k], 0.0), config)
        out = np.zeros((k, k + 1))
        out[:, :k] = -jac
        out[:, k] = 1.0
        return out

    eps0, _ = mse_jacobian(mat, start, config)
    x0 = np.append(start, float((eps0 - target).max()))
    result = _sqp_minimize(
        lambda x: x[k], x0, jac=lambda x: grad_s, method="SLSQP",
        bounds=[(0.0, None)] * k + [(None, None)],
        constraints=[
            {"type": "ineq", "fun": cons_val, "jac": cons_jac},
            {"type": "ineq",
             "fun": lambda x: config.power_budget - x[:k].sum(),
             "jac": lambda x: np.append(-np.ones(k), 0.0)},
        ],
        options={"maxiter": opts.sqp_max_iters, "ftol": 1e-12},
    )
    return project_onto_budget_simplex(result.x[:k], config.power_budget)


def _coarse_seeds(mat: np.ndarray, config: SystemConfig, target: np.ndarray,
                  opts: MembershipOptions):
    """Best lattice points by true margin, as PGD seeds."""
    k = mat.shape[1]
    res = opts.coarse_resolution
    while res > 1 and lattice_size(k, res) > _COARSE_LIMIT:
        res -= 1
    grid = budget_simplex_lattice(k, res) * (config.power_budget / res)
    margins = (mse_tuples(mat, grid, config) - target).max(axis=1)
    order = np.argsort(margins, kind="stable")[: opts.coarse_starts]
    return [grid[i] for i in order]


def dominated_membership(channels, config: SystemConfig, target,
                         options: Optional[MembershipOptions] = None) -> MembershipVerdict:
    """Decide whether some feasible allocation meets the target componentwise.

    Reports the smallest max_k (eps_k - t_k) found and the allocation
    attaining it; the verdict is dominated when that margin is at most
    tol_member.
    """
    opts = options or MembershipOptions()
    mat = _channel_matrix(channels)
    k = mat.shape[1]
    tgt = MseTuple(target).values
    if tgt.size != k:
        raise ValueError(f"target has {tgt.size} entries for {k} users")

    def true_margin(p):
        eps, _ = mse_jacobian(mat, p, config)
        return float((eps - tgt).max())

    def lse_stage(temp):
        def value_and_grad(p):
            eps, jac = mse_jacobian(mat, p, config)
            z = (eps - tgt) / temp
            top = float(z.max())
            wgt = np.exp(z - top)
            total = wgt.sum()
            return temp * (top + math.log(total)), jac.T @ (wgt / total)
        return value_and_grad

    def max_stage(p):
        eps, jac = mse_jacobian(mat, p, config)
        idx = int(np.argmax(eps - tgt))
        return float(eps[idx] - tgt[idx]), jac[idx]

    rng = np.random.default_rng(opts.seed)
    seeds = _coarse_seeds(mat, config, tgt, opts)
    seeds.extend(sample_budget_simplex(rng, k, config.power_budget, opts.starts))

    best_margin = math.inf
    best_point = np.zeros(k)

    def consider(p):
        nonlocal best_margin, best_point
        margin = true_margin(p)
        if margin < best_margin:
            best_margin = margin
            best_point = p
        return margin

    for seed in seeds:
        consider(seed)
        point = seed
        for temp in opts.temperatures:
            run = projected_gradient(lse_stage(temp), point, config.power_budget,
                                     max_iters=opts.stage_max_iters)
            point = run.point
            consider(point)

    run = projected_gradient(max_stage, best_point, config.power_budget,
                             max_iters=opts.polish_max_iters)
    consider(run.point)
    consider(_epigraph_refine(mat, config, tgt, best_point, opts))

    return MembershipVerdict(
        target=tgt,
        margin=best_margin,
        witness_powers=best_point,
        dominated=bool(best_margin <= opts.tol_member),
    )


def segment_test(channels, config: SystemConfig, a, b, steps: int = 9,
                 options: Optional[MembershipOptions] = None) -> SegmentReport:
    """Membership along the chord between two achievable tuples.

    Both endpoints must pass the membership test themselves; interior
    points sit at t = i / (steps + 1).  Any interior failure makes the
    report a nonconvexity witness.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    vec_a = MseTuple(a).values
    vec_b = MseTuple(b).values
    if vec_a.size != vec_b.size:
        raise ValueError(f"endpoint sizes differ: {vec_a.size} vs {vec_b.size}")
    end_a = dominated_membership(channels, config, vec_a, options)
    if not end_a.dominated:
        raise ValueError(f"endpoint a is not achievable (margin {end_a.margin:.3e})")
    end_b = dominated_membership(channels, config, vec_b, options)
    if not end_b.dominated:
        raise ValueError(f"endpoint b is not achievable (margin {end_b.margin:.3e})")

    points = []
    for i in range(1, steps + 1):
        t = i / (steps + 1)
        target = (1.0 - t) * vec_a + t * vec_b
        verdict = dominated_membership(channels, config, target, options)
        points.append(SegmentPoint(
            t=t, target=target, margin=verdict.margin,
            dominated=verdict.dominated, witness_powers=verdict.witness_powers,
        ))
    return SegmentReport(
        endpoint_a=end_a,
        endpoint_b=end_b,
        points=points,
        nonconvex_witness=any(not pt.dominated for pt in points),
    )


def sample_region(channels, config: SystemConfig, resolution: int,
                  mode: str = "grid", seed: Optional[int] = None) -> RegionSampleSet:
    """Sample achievable MSE tuples over the power simplex.

    Grid mode enumerates the lattice {p : p = (P/resolution) m, m integer,
    sum(m) <= resolution}; random mode draws `resolution` allocations
    uniformly from the solid simplex.
    """
    mat = _channel_matrix(channels)
    k = mat.shape[1]
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    if mode == "grid":
        count = lattice_size(k, resolution)
        if count > GRID_LIMIT:
            raise ValueError(
                f"grid of {count} points for {k} users exceeds the "
                f"{GRID_LIMIT} cap; rerun in random mode with an "
                f"explicit sample count"
            )
        powers = budget_simplex_lattice(k, resolution) * (config.power_budget / resolution)
    elif mode == "random":
        rng = np.random.default_rng(0 if seed is None else seed)
        powers = sample_budget_simplex(rng, k, config.power_budget, resolution)
    else:
        raise ValueError(f"unknown sampling mode: {mode!r}")
    return RegionSampleSet(
        powers=powers,
        mses=mse_tuples(mat, powers, config),
        resolution=resolution,
        mode=mode,
        seed=seed,
    )


def embed_inactive_users(channels, extra: int) -> ChannelSet:
    """Append users that replicate the last column of the channel set.

    Silent users cost no power and have unit MSE, so any membership or
    segment outcome for the original users carries over verbatim once
    targets are padded with ones and allocations with zeros.
    """
    if extra < 0:
        raise ValueError(f"extra must be >= 0, got {extra}")
    mat = _channel_matrix(channels)
    if extra == 0:
        return channels if isinstance(channels, ChannelSet) else ChannelSet(mat)
    tail = np.repeat(mat[:, -1:], extra, axis=1)
    return ChannelSet(np.hstack([mat, tail]))
