"""Uplink system model: channels, powers, covariance and exact MSE formulas.

K single-antenna users transmit to an N-antenna receiver.  For transmit
powers p_k and noise variance sigma^2 the receive covariance is

    X = sigma^2 I + sum_k p_k h_k h_k^H,

and the MMSE receiver of user k attains

    eps_k = 1 - p_k h_k^H X^{-1} h_k,   eps_k in (0, 1].

Everything downstream (boundary calculus, stationarity conditions, region
sampling) reduces to the Gram matrices A[i, j] = h_i^H X^{-1} h_j and
B[i, j] = h_i^H X^{-2} h_j.  Both are computed through a Cholesky factor
of X, so X^{-1} is applied once per right-hand side and never formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tolerances import TOL_FEAS_REL

__all__ = [
    "ChannelSet",
    "SystemConfig",
    "PowerAllocation",
    "MseTuple",
    "receive_covariance",
    "resolvent_grams",
    "mse_tuple",
    "mse_tuples",
    "mse_jacobian",
    "weighted_sum_mse",
    "weighted_mse_gradient",
    "sinr_from_mse",
    "rate_from_mse",
    "ensure_feasible",
]


@dataclass(frozen=True)
class ChannelSet:
    """Complex N x K channel matrix; column k is the channel of user k."""

    entries: np.ndarray

    def __post_init__(self):
        mat = np.array(self.entries, dtype=np.complex128)
        if mat.ndim != 2:
            raise ValueError(f"channel matrix must be 2-D, got shape {mat.shape}")
        if mat.shape[0] < 1 or mat.shape[1] < 1:
            raise ValueError(f"channel matrix needs at least one antenna and one user, got {mat.shape}")
        if not np.isfinite(mat).all():
            raise ValueError("channel matrix contains non-finite entries")
        norms = np.linalg.norm(mat, axis=0)
        if np.any(norms == 0.0):
            dead = int(np.flatnonzero(norms == 0.0)[0])
            raise ValueError(f"user {dead} has an all-zero channel (its MSE would be constant 1)")
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def n_antennas(self) -> int:
        return self.entries.shape[0]

    @property
    def n_users(self) -> int:
        return self.entries.shape[1]

    def user_channel(self, k: int) -> np.ndarray:
        return self.entries[:, k]


@dataclass(frozen=True)
class SystemConfig:
    """Noise variance sigma^2 and total transmit power budget."""

    noise_variance: float
    power_budget: float

    def __post_init__(self):
        nv = float(self.noise_variance)
        pb = float(self.power_budget)
        if not (math.isfinite(nv) and nv > 0.0):
            raise ValueError(f"noise variance must be finite and > 0, got {nv}")
        if not (math.isfinite(pb) and pb > 0.0):
            raise ValueError(f"power budget must be finite and > 0, got {pb}")
        object.__setattr__(self, "noise_variance", nv)
        object.__setattr__(self, "power_budget", pb)

    @property
    def snr(self) -> float:
        """Transmit SNR gamma = P / sigma^2."""
        return self.power_budget / self.noise_variance

    @property
    def feasibility_tol(self) -> float:
        return TOL_FEAS_REL * self.power_budget


@dataclass(frozen=True)
class PowerAllocation:
    """Nonnegative per-user transmit powers."""

    powers: np.ndarray

    def __post_init__(self):
        vec = np.array(self.powers, dtype=np.float64).reshape(-1)
        if vec.size < 1:
            raise ValueError("power allocation is empty")
        if not np.isfinite(vec).all():
            raise ValueError("power allocation contains non-finite entries")
        if (vec < 0.0).any():
            raise ValueError(f"negative transmit power: {vec.min()}")
        vec.setflags(write=False)
        object.__setattr__(self, "powers", vec)

    def total(self) -> float:
        return float(self.powers.sum())

    def __len__(self) -> int:
        return self.powers.size

    def __array__(self, dtype=None):
        return np.asarray(self.powers, dtype=dtype)


@dataclass(frozen=True)
class MseTuple:
    """Per-user MSE values, each in (0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        vec = np.array(self.values, dtype=np.float64).reshape(-1)
        if vec.size < 1:
            raise ValueError("MSE tuple is empty")
        if not np.isfinite(vec).all():
            raise ValueError("MSE tuple contains non-finite entries")
        if (vec <= 0.0).any() or (vec > 1.0).any():
            raise ValueError(f"MSE values must lie in (0, 1], got {vec}")
        vec.setflags(write=False)
        object.__setattr__(self, "values", vec)

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, k):
        return self.values[k]

    def __array__(self, dtype=None):
        return np.asarray(self.values, dtype=dtype)


def _channel_matrix(channels) -> np.ndarray:
    if isinstance(channels, ChannelSet):
        return channels.entries
    return ChannelSet(channels).entries


def _power_vector(powers, n_users: int) -> np.ndarray:
    vec = powers.powers if isinstance(powers, PowerAllocation) else PowerAllocation(powers).powers
    if vec.size != n_users:
        raise ValueError(f"power allocation has {vec.size} entries for {n_users} users")
    return vec


def ensure_feasible(powers, config: SystemConfig) -> np.ndarray:
    """Validate sum(p) <= budget within the feasibility slack; return the vector."""
    vec = powers.powers if isinstance(powers, PowerAllocation) else PowerAllocation(powers).powers
    total = float(vec.sum())
    if total > config.power_budget + config.feasibility_tol:
        raise ValueError(
            f"total power {total} exceeds budget {config.power_budget} "
            f"(+{config.feasibility_tol} slack)"
        )
    return vec


def receive_covariance(channels, powers, config: SystemConfig) -> np.ndarray:
    """X = sigma^2 I + sum_k p_k h_k h_k^H, Hermitian positive definite."""
    mat = _channel_matrix(channels)
    p = _power_vector(powers, mat.shape[1])
    cov = (mat * p) @ mat.conj().T
    cov += config.noise_variance * np.eye(mat.shape[0])
    return 0.5 * (cov + cov.conj().T)


def resolvent_grams(channels, powers, config: SystemConfig, second_order: bool = False):
    """Gram matrices of the channels under X^{-1} (and optionally X^{-2}).

    `powers` is one length-K vector or an (S, K) batch.  Returns A with
    A[..., i, j] = h_i^H X^{-1} h_j; with second_order also
    B[..., i, j] = h_i^H X^{-2} h_j.  Computed as Gram products of
    L^{-1} H and X^{-1} H where X = L L^H, which keeps both matrices
    Hermitian positive semidefinite up to rounding.
    """
    mat = _channel_matrix(channels)
    n, k = mat.shape
    pw = np.asarray(powers, dtype=np.float64)
    single = pw.ndim == 1
    pw = np.atleast_2d(pw)
    if pw.ndim != 2 or pw.shape[1] != k:
        raise ValueError(f"power batch shape {pw.shape} does not match {k} users")
    if not np.isfinite(pw).all() or (pw < 0.0).any():
        raise ValueError("powers must be finite and nonnegative")

    cov = np.einsum("sk,ik,jk->sij", pw, mat, mat.conj())
    cov += config.noise_variance * np.eye(n)
    cov = 0.5 * (cov + np.conj(np.swapaxes(cov, -1, -2)))
    low = np.linalg.cholesky(cov)
    rhs = np.broadcast_to(mat, (pw.shape[0], n, k))
    half = np.linalg.solve(low, rhs)                       # L^{-1} H
    gram_a = np.einsum("sni,snj->sij", half.conj(), half)
    if not second_order:
        return gram_a[0] if single else gram_a
    full = np.linalg.solve(np.conj(np.swapaxes(low, -1, -2)), half)  # X^{-1} H
    gram_b = np.einsum("sni,snj->sij", full.conj(), full)
    if single:
        return gram_a[0], gram_b[0]
    return gram_a, gram_b


def mse_tuple(channels, powers, config: SystemConfig) -> MseTuple:
    """MMSE values eps_k = 1 - p_k h_k^H X^{-1} h_k."""
    mat = _channel_matrix(channels)
    p = _power_vector(powers, mat.shape[1])
    gram = resolvent_grams(mat, p, config)
    quad = np.diagonal(gram).real
    return MseTuple(1.0 - p * quad)


def mse_tuples(channels, powers, config: SystemConfig, chunk: int = 131072) -> np.ndarray:
    """MSE rows for an (S, K) batch of power vectors, evaluated in chunks."""
    mat = _channel_matrix(channels)
    n, k = mat.shape
    pw = np.asarray(powers, dtype=np.float64)
    if pw.ndim != 2 or pw.shape[1] != k:
        raise ValueError(f"power batch shape {pw.shape} does not match {k} users")
    if not np.isfinite(pw).all() or (pw < 0.0).any():
        raise ValueError("powers must be finite and nonnegative")
    out = np.empty_like(pw)
    noise_eye = config.noise_variance * np.eye(n)
    for lo in range(0, pw.shape[0], chunk):
        blk = pw[lo:lo + chunk]
        cov = np.einsum("sk,ik,jk->sij", blk, mat, mat.conj()) + noise_eye
        sol = np.linalg.solve(cov, np.broadcast_to(mat, (blk.shape[0], n, k)))
        quad = np.einsum("nk,snk->sk", mat.conj(), sol).real
        out[lo:lo + chunk] = 1.0 - blk * quad
    return out


def mse_jacobian(channels, powers, config: SystemConfig):
    """Return (eps, J) with J[l, k] = d eps_l / d p_k.

    J[l, k] = -delta_{lk} a_kk + p_l |a_{lk}|^2 from the X^{-1} Gram matrix.
    """
    mat = _channel_matrix(channels)
    p = _power_vector(powers, mat.shape[1])
    gram = resolvent_grams(mat, p, config)
    diag = np.diagonal(gram).real
    eps = 1.0 - p * diag
    jac = p[:, None] * (gram.real ** 2 + gram.imag ** 2)
    jac[np.diag_indices_from(jac)] -= diag
    return eps, jac


def weighted_sum_mse(channels, powers, config: SystemConfig, weights) -> float:
    """f(p) = sum_k w_k eps_k(p)."""
    mat = _channel_matrix(channels)
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.size != mat.shape[1]:
        raise ValueError(f"{w.size} weights for {mat.shape[1]} users")
    vals = mse_tuple(mat, powers, config).values
    return float(w @ vals)


def weighted_mse_gradient(channels, powers, config: SystemConfig, weights) -> np.ndarray:
    """Gradient of the weighted sum MSE in the powers.

    d f / d p_k = -w_k a_kk + sum_l w_l p_l |a_{lk}|^2, equal to
    -h_k^H X^{-1} (w_k X - S) X^{-1} h_k with S = sum_l w_l p_l h_l h_l^H.
    """
    mat = _channel_matrix(channels)
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.size != mat.shape[1]:
        raise ValueError(f"{w.size} weights for {mat.shape[1]} users")
    _, jac = mse_jacobian(mat, powers, config)
    return jac.T @ w


def sinr_from_mse(eps: float) -> float:
    """SINR = 1/eps - 1 for eps in (0, 1]."""
    val = float(eps)
    if not 0.0 < val <= 1.0:
        raise ValueError(f"MSE must lie in (0, 1], got {val}")
    return 1.0 / val - 1.0


def rate_from_mse(eps: float) -> float:
    """Achievable rate -log2(eps) for eps in (0, 1]."""
    val = float(eps)
    if not 0.0 < val <= 1.0:
        raise ValueError(f"MSE must lie in (0, 1], got {val}")
    return -math.log2(val)
