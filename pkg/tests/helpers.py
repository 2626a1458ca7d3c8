"""Shared builders and independent oracles for the test suite."""

import numpy as np
from scipy.optimize import minimize as sp_minimize

from mseregion import ChannelSet, SystemConfig, mse_jacobian, mse_tuples
from mseregion.simplex import budget_simplex_lattice


def random_channels(rng, n_antennas: int, n_users: int) -> ChannelSet:
    mat = rng.standard_normal((n_antennas, n_users)) \
        + 1j * rng.standard_normal((n_antennas, n_users))
    return ChannelSet(mat)


def random_config(rng, sigma2=(0.1, 10.0), power=(1.0, 100.0)) -> SystemConfig:
    return SystemConfig(noise_variance=float(rng.uniform(*sigma2)),
                        power_budget=float(rng.uniform(*power)))


def random_powers(rng, n_users: int, budget: float) -> np.ndarray:
    raw = rng.exponential(size=n_users + 1)
    return budget * raw[:-1] / raw.sum()


def dense_mse(mat, powers, sigma2: float) -> np.ndarray:
    """MSEs through an explicit matrix inverse; shares no code with the library path."""
    mat = np.asarray(mat, dtype=complex)
    powers = np.asarray(powers, dtype=float)
    cov = sigma2 * np.eye(mat.shape[0], dtype=complex)
    for k in range(mat.shape[1]):
        col = mat[:, k]
        cov = cov + powers[k] * np.outer(col, col.conj())
    inv = np.linalg.inv(cov)
    return np.array([
        1.0 - powers[k] * float((mat[:, k].conj() @ inv @ mat[:, k]).real)
        for k in range(mat.shape[1])
    ])


def minimax_margin_oracle(channels, config: SystemConfig, targets, resolution: int = 200):
    """Brute-force margin reference: lattice scan plus SLSQP epigraph refine.

    Returns (refined, raw) margin lists.  The raw value is the pure grid
    minimum of max_k(eps_k - t_k); the refined value polishes the grid
    argmin with an independently formulated constrained program.
    """
    mat = np.asarray(channels, dtype=complex) if not isinstance(channels, ChannelSet) \
        else channels.entries
    k = mat.shape[1]
    grid = budget_simplex_lattice(k, resolution) * (config.power_budget / resolution)
    raw = [np.inf] * len(targets)
    seeds = [None] * len(targets)
    for lo in range(0, grid.shape[0], 200000):
        eps = mse_tuples(mat, grid[lo:lo + 200000], config)
        for j, tgt in enumerate(targets):
            margins = (eps - np.asarray(tgt)).max(axis=1)
            i = int(np.argmin(margins))
            if margins[i] < raw[j]:
                raw[j] = float(margins[i])
                seeds[j] = grid[lo + i].copy()

    top_grad = np.zeros(k + 1)
    top_grad[k] = 1.0
    refined = []
    for tgt, p0 in zip(targets, seeds):
        tgt = np.asarray(tgt, dtype=float)

        def cons_val(x, tgt=tgt):
            eps, _ = mse_jacobian(mat, np.maximum(x[:k], 0.0), config)
            return x[k] - (eps - tgt)

        def cons_jac(x, tgt=tgt):
            _, jac = mse_jacobian(mat, np.maximum(x[:k], 0.0), config)
            out = np.zeros((k, k + 1))
            out[:, :k] = -jac
            out[:, k] = 1.0
            return out

        eps0, _ = mse_jacobian(mat, p0, config)
        x0 = np.append(p0, float((eps0 - tgt).max()))
        result = sp_minimize(
            lambda x: x[k], x0, jac=lambda x: top_grad, method="SLSQP",
            bounds=[(0.0, None)] * k + [(None, None)],
            constraints=[
                {"type": "ineq", "fun": cons_val, "jac": cons_jac},
                {"type": "ineq",
                 "fun": lambda x: config.power_budget - x[:k].sum(),
                 "jac": lambda x: np.append(-np.ones(k), 0.0)},
            ],
            options={"maxiter": 300, "ftol": 1e-14},
        )
        point = np.maximum(result.x[:k], 0.0)
        if point.sum() > config.power_budget:
            point = point * (config.power_budget / point.sum())
        eps, _ = mse_jacobian(mat, point, config)
        refined.append(min(raw[len(refined)], float((eps - tgt).max())))
    return refined, raw
