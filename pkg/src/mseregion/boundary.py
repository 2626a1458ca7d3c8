"""Two-user boundary calculus.

With p1 = p and p2 = P - p the full budget stays active and the MSE pair
(eps1, eps2) traces the lower-left boundary eps2 = g(eps1) of the
two-user region as p sweeps [0, P].  This module evaluates the exact
first and second derivatives of both MSEs in p, the convexity
discriminant

    D(p) = eps2'' eps1' - eps1'' eps2',

its three-term decomposition (each term nonpositive, which certifies
g'' >= 0 and hence a convex region), the closed-form coupling ratios
whose Cauchy-Schwarz bounds drive that sign argument, and the affine
special case that arises for colinear channels h2 = alpha h1.

Substitutions used throughout, with X(p) the receive covariance:

    a_ij = h_i^H X^{-1} h_j      b_ij = h_i^H X^{-2} h_j
    eps1'  = -sigma^2 b11 - P |a12|^2
    eps2'  = +sigma^2 b22 + P |a12|^2
    eps1'' = 2 sigma^2 (a11 b11 - Re{a12 b21}) + 2 P |a12|^2 (a11 - a22)
    eps2'' = 2 sigma^2 (a22 b22 - Re{a12 b21}) + 2 P |a12|^2 (a22 - a11)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ChannelSet, SystemConfig, mse_tuple, resolvent_grams
from .tolerances import CAUCHY_SCHWARZ_ATOL, COLINEARITY_RTOL, DISCRIMINANT_RTOL

__all__ = [
    "BoundaryClass",
    "CouplingBundle",
    "BoundarySample",
    "ConvexityReport",
    "mse_pair_at_power",
    "coupling_bundle",
    "mse_first_derivatives",
    "mse_second_derivatives",
    "convexity_discriminant",
    "g_derivatives",
    "closed_form_ratios",
    "colinearity_classify",
    "affine_boundary",
    "boundary_sweep",
    "convexity_certificate",
]


class BoundaryClass(enum.Enum):
    STRICTLY_CONVEX = "StrictlyConvex"
    AFFINE = "Affine"


@dataclass(frozen=True)
class CouplingBundle:
    """Quadratic forms and closed-form auxiliaries at one power split p.

    a11, a22, a12 are entries of the X^{-1} Gram matrix, b11, b22, b12 of
    the X^{-2} Gram matrix.  d = |h1|^2 |h2|^2 - |h1^H h2|^2 is the Gram
    determinant of the raw channels; c1, c2, d1, d2 are the nonnegative
    polynomial pieces of the two closed-form product ratios
    Re{a12 b21} / (a11 b22) and Re{a12 b21} / (a22 b11).
    """

    a11: float
    a22: float
    a12: complex
    b11: float
    b22: float
    b12: complex
    d: float
    c1: float
    c2: float
    d1: float
    d2: float


@dataclass(frozen=True)
class BoundarySample:
    """One sweep point; derivative fields are None at the endpoints."""

    p: float
    eps1: float
    eps2: float
    deps1: Optional[float]
    deps2: Optional[float]
    ddeps1: Optional[float]
    ddeps2: Optional[float]
    discriminant: Optional[float]
    g_prime: Optional[float]
    g_double_prime: Optional[float]


@dataclass(frozen=True)
class ConvexityReport:
    certified: bool
    classification: BoundaryClass
    worst_discriminant: float
    worst_p: float
    grid: int
    cauchy_schwarz_ok: bool
    summands_ok: bool
    monotonicity_ok: bool

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "classification": self.classification.value,
            "worst_discriminant": self.worst_discriminant,
            "worst_p": self.worst_p,
            "grid": self.grid,
            "cauchy_schwarz_ok": self.cauchy_schwarz_ok,
            "summands_ok": self.summands_ok,
            "monotonicity_ok": self.monotonicity_ok,
        }


def _pair(h1, h2) -> np.ndarray:
    v1 = np.asarray(h1, dtype=np.complex128).reshape(-1)
    v2 = np.asarray(h2, dtype=np.complex128).reshape(-1)
    if v1.size != v2.size:
        raise ValueError(f"channel length mismatch: {v1.size} vs {v2.size}")
    # ChannelSet validation covers finiteness and zero columns
    return ChannelSet(np.column_stack([v1, v2])).entries


class _SweepData:
    """Vectorized boundary quantities over a grid of power splits."""

    __slots__ = (
        "ps", "a11", "a22", "a12", "b11", "b22", "b12", "eps1", "eps2",
        "deps1", "deps2", "ddeps1", "ddeps2", "disc", "summands", "scale",
        "re_ab", "absa12sq", "absb12sq",
    )

    def __init__(self, pair: np.ndarray, config: SystemConfig, ps: np.ndarray):
        budget = config.power_budget
        sig2 = config.noise_variance
        powers = np.column_stack([ps, budget - ps])
        gram_a, gram_b = resolvent_grams(pair, powers, config, second_order=True)
        self.ps = ps
        self.a11 = gram_a[:, 0, 0].real
        self.a22 = gram_a[:, 1, 1].real
        self.a12 = gram_a[:, 0, 1]
        self.b11 = gram_b[:, 0, 0].real
        self.b22 = gram_b[:, 1, 1].real
        self.b12 = gram_b[:, 0, 1]
        self.absa12sq = self.a12.real ** 2 + self.a12.imag ** 2
        self.absb12sq = self.b12.real ** 2 + self.b12.imag ** 2
        self.re_ab = (self.a12 * np.conj(self.b12)).real    # Re{a12 b21}
        self.eps1 = 1.0 - ps * self.a11
        self.eps2 = 1.0 - (budget - ps) * self.a22
        self.deps1 = -sig2 * self.b11 - budget * self.absa12sq
        self.deps2 = sig2 * self.b22 + budget * self.absa12sq
        self.ddeps1 = 2.0 * sig2 * (self.a11 * self.b11 - self.re_ab) \
            + 2.0 * budget * self.absa12sq * (self.a11 - self.a22)
        self.ddeps2 = 2.0 * sig2 * (self.a22 * self.b22 - self.re_ab) \
            + 2.0 * budget * self.absa12sq * (self.a22 - self.a11)
        self.disc = self.ddeps2 * self.deps1 - self.ddeps1 * self.deps2
        self.scale = np.abs(self.ddeps2 * self.deps1) + np.abs(self.ddeps1 * self.deps2)
        s_cross = 2.0 * sig2 * budget * self.absa12sq \
            * (2.0 * self.re_ab - self.a22 * self.b11 - self.a11 * self.b22)
        s_first = 2.0 * sig2 ** 2 * self.b11 * (self.re_ab - self.a11 * self.b22)
        s_second = 2.0 * sig2 ** 2 * self.b22 * (self.re_ab - self.a22 * self.b11)
        self.summands = np.column_stack([s_cross, s_first, s_second])


def _gram_determinant(pair: np.ndarray):
    n1 = float(np.linalg.norm(pair[:, 0]) ** 2)
    n2 = float(np.linalg.norm(pair[:, 1]) ** 2)
    inner = complex(np.vdot(pair[:, 0], pair[:, 1]))
    det = n1 * n2 - (inner.real ** 2 + inner.imag ** 2)
    return n1, n2, inner, det


def mse_pair_at_power(h1, h2, config: SystemConfig, p: float):
    """(eps1, eps2) at powers (p, P - p); requires 0 <= p <= P."""
    pair = _pair(h1, h2)
    split = float(p)
    if not 0.0 <= split <= config.power_budget:
        raise ValueError(f"power split {split} outside [0, {config.power_budget}]")
    vals = mse_tuple(pair, [split, config.power_budget - split], config).values
    return float(vals[0]), float(vals[1])


def coupling_bundle(h1, h2, config: SystemConfig, p: float) -> CouplingBundle:
    """Evaluate all coupling quantities at power split p; validates the
    Cauchy-Schwarz invariants of both Gram matrices on the way out."""
    pair = _pair(h1, h2)
    split = float(p)
    budget = config.power_budget
    if not 0.0 <= split <= budget:
        raise ValueError(f"power split {split} outside [0, {budget}]")
    data = _SweepData(pair, config, np.array([split]))
    a11 = float(data.a11[0])
    a22 = float(data.a22[0])
    a12 = complex(data.a12[0])
    b11 = float(data.b11[0])
    b22 = float(data.b22[0])
    b12 = complex(data.b12[0])
    if min(a11, a22, b11, b22) <= 0.0:
        raise ArithmeticError("diagonal quadratic forms must be positive")
    if abs(a12) ** 2 > a11 * a22 + CAUCHY_SCHWARZ_ATOL:
        raise ArithmeticError("Cauchy-Schwarz violated for the X^{-1} Gram matrix")
    if abs(b12) ** 2 > b11 * b22 + CAUCHY_SCHWARZ_ATOL:
        raise ArithmeticError("Cauchy-Schwarz violated for the X^{-2} Gram matrix")

    n1, n2, inner, det_raw = _gram_determinant(pair)
    det = det_raw
    if det < 0.0:
        if det >= -COLINEARITY_RTOL * max(1.0, n1 * n2):
            det = 0.0
        else:
            raise ArithmeticError(f"Gram determinant {det_raw} significantly negative")
    sig2 = config.noise_variance
    rem = budget - split
    abs_inner_sq = inner.real ** 2 + inner.imag ** 2
    c1 = sig2 * abs_inner_sq * split * det * rem
    c2 = (sig2 * n1 + det * rem) * det * split * (2.0 * sig2 + split * n1) \
        + sig2 ** 2 * n2 * det * rem
    d2 = (sig2 * n2 + det * split) * det * rem * (2.0 * sig2 + rem * n2) \
        + sig2 ** 2 * n1 * det * split
    return CouplingBundle(a11=a11, a22=a22, a12=a12, b11=b11, b22=b22, b12=b12,
                          d=det, c1=c1, c2=c2, d1=c1, d2=d2)


def mse_first_derivatives(bundle: CouplingBundle, config: SystemConfig):
    """(d eps1 / dp, d eps2 / dp); always of opposite, fixed sign."""
    budget = config.power_budget
    sig2 = config.noise_variance
    cross = abs(bundle.a12) ** 2
    return (-sig2 * bundle.b11 - budget * cross,
            sig2 * bundle.b22 + budget * cross)


def mse_second_derivatives(bundle: CouplingBundle, config: SystemConfig):
    """(d^2 eps1 / dp^2, d^2 eps2 / dp^2)."""
    budget = config.power_budget
    sig2 = config.noise_variance
    cross = abs(bundle.a12) ** 2
    re_ab = (bundle.a12 * np.conj(bundle.b12)).real
    dd1 = 2.0 * sig2 * (bundle.a11 * bundle.b11 - re_ab) \
        + 2.0 * budget * cross * (bundle.a11 - bundle.a22)
    dd2 = 2.0 * sig2 * (bundle.a22 * bundle.b22 - re_ab) \
        + 2.0 * budget * cross * (bundle.a22 - bundle.a11)
    return float(dd1), float(dd2)


def convexity_discriminant(bundle: CouplingBundle, config: SystemConfig):
    """D = eps2'' eps1' - eps1'' eps2' and its three nonpositive summands.

    Returns (value, summands) where value is the direct product difference
    and summands the decomposition; their sum reproduces value to 1e-10
    relative to the derivative scale.
    """
    budget = config.power_budget
    sig2 = config.noise_variance
    d1, d2 = mse_first_derivatives(bundle, config)
    dd1, dd2 = mse_second_derivatives(bundle, config)
    value = dd2 * d1 - dd1 * d2
    cross = abs(bundle.a12) ** 2
    re_ab = (bundle.a12 * np.conj(bundle.b12)).real
    summands = np.array([
        2.0 * sig2 * budget * cross * (2.0 * re_ab - bundle.a22 * bundle.b11 - bundle.a11 * bundle.b22),
        2.0 * sig2 ** 2 * bundle.b11 * (re_ab - bundle.a11 * bundle.b22),
        2.0 * sig2 ** 2 * bundle.b22 * (re_ab - bundle.a22 * bundle.b11),
    ])
    return float(value), summands


def g_derivatives(h1, h2, config: SystemConfig, p: float):
    """(g', g'') of the boundary eps2 = g(eps1) at an interior split.

    g' = eps2'/eps1' < 0 and g'' = D / eps1'^3 >= 0; endpoints are
    rejected because the parameterization derivative vanishes there in
    the chain rule denominators only up to one-sided limits.
    """
    split = float(p)
    if not 0.0 < split < config.power_budget:
        raise ValueError(f"g derivatives need an interior split, got p={split}")
    bundle = coupling_bundle(h1, h2, config, split)
    d1, d2 = mse_first_derivatives(bundle, config)
    value, _ = convexity_discriminant(bundle, config)
    return d2 / d1, value / d1 ** 3


def closed_form_ratios(h1, h2, config: SystemConfig, p: float):
    """Closed forms of a12/a11 and b21/b22 plus their real product.

    ratio_a = sigma^2 h1^H h2 / (sigma^2 |h1|^2 + d (P - p))
    ratio_b = h2^H h1 (sigma^4 - p (P - p) d)
              / (sigma^4 |h2|^2 + d p (2 sigma^2 + p |h1|^2))

    Both are cross-checked against the directly computed Gram ratios to
    1e-9 relative; the product is real with Re <= 1 + 1e-10.
    """
    pair = _pair(h1, h2)
    split = float(p)
    budget = config.power_budget
    if not 0.0 <= split <= budget:
        raise ValueError(f"power split {split} outside [0, {budget}]")
    sig2 = config.noise_variance
    rem = budget - split
    n1, n2, inner, det_raw = _gram_determinant(pair)
    det = max(det_raw, 0.0)
    ratio_a = sig2 * inner / (sig2 * n1 + det * rem)
    ratio_b = np.conj(inner) * (sig2 ** 2 - split * rem * det) \
        / (sig2 ** 2 * n2 + det * split * (2.0 * sig2 + split * n1))

    bundle = coupling_bundle(h1, h2, config, split)
    direct_a = bundle.a12 / bundle.a11
    direct_b = np.conj(bundle.b12) / bundle.b22
    for closed, direct, tag in ((ratio_a, direct_a, "a12/a11"), (ratio_b, direct_b, "b21/b22")):
        gap = abs(closed - direct)
        if gap > 1e-9 * max(abs(closed), abs(direct)) + 1e-14:
            raise ArithmeticError(f"closed form for {tag} deviates by {gap}")
    product = ratio_a * ratio_b
    if abs(product.imag) > 1e-10:
        raise ArithmeticError(f"ratio product has imaginary part {product.imag}")
    product_check = float(product.real)
    if product_check > 1.0 + 1e-10:
        raise ArithmeticError(f"ratio product {product_check} exceeds 1")
    return complex(ratio_a), complex(ratio_b), product_check


def colinearity_classify(h1, h2) -> BoundaryClass:
    """Affine iff the raw channel Gram determinant vanishes relative to
    |h1|^2 |h2|^2 (threshold 1e-12), else strictly convex."""
    pair = _pair(h1, h2)
    n1, n2, _, det = _gram_determinant(pair)
    if det <= COLINEARITY_RTOL * n1 * n2:
        return BoundaryClass.AFFINE
    return BoundaryClass.STRICTLY_CONVEX


def affine_boundary(h1, alpha, config: SystemConfig):
    """(slope, intercept, eps_min1) of the boundary line for h2 = alpha h1.

    g(eps1) = slope * eps1 + intercept over [eps_min1, 1], with
    g(1) = eps_min2 and g(eps_min1) = 1.
    """
    vec = np.asarray(h1, dtype=np.complex128).reshape(-1)
    scalar = complex(alpha)
    if scalar == 0:
        raise ValueError("colinearity factor alpha must be nonzero")
    n1 = float(np.linalg.norm(vec) ** 2)
    if n1 == 0.0:
        raise ValueError("h1 must be nonzero")
    gamma = config.snr
    mag = abs(scalar) ** 2
    den = 1.0 + mag * gamma * n1
    slope = -(mag + mag * gamma * n1) / den
    intercept = 1.0 + mag / den
    eps_min1 = 1.0 / (1.0 + gamma * n1)
    return slope, intercept, eps_min1


def boundary_sweep(h1, h2, config: SystemConfig, samples: int = 101):
    """Uniform sweep of the power split over [0, P].

    Derivative-based fields are populated on the open interval only; the
    two endpoint samples carry just the MSE pair.
    """
    count = int(samples)
    if count < 3:
        raise ValueError(f"sweep needs at least 3 samples, got {count}")
    pair = _pair(h1, h2)
    ps = np.linspace(0.0, config.power_budget, count)
    data = _SweepData(pair, config, ps)
    g_prime = np.divide(data.deps2, data.deps1)
    g_dprime = np.divide(data.disc, data.deps1 ** 3)
    out = []
    last = count - 1
    for i in range(count):
        interior = 0 < i < last
        out.append(BoundarySample(
            p=float(ps[i]),
            eps1=float(data.eps1[i]),
            eps2=float(data.eps2[i]),
            deps1=float(data.deps1[i]) if interior else None,
            deps2=float(data.deps2[i]) if interior else None,
            ddeps1=float(data.ddeps1[i]) if interior else None,
            ddeps2=float(data.ddeps2[i]) if interior else None,
            discriminant=float(data.disc[i]) if interior else None,
            g_prime=float(g_prime[i]) if interior else None,
            g_double_prime=float(g_dprime[i]) if interior else None,
        ))
    return out


def convexity_certificate(h1, h2, config: SystemConfig, grid: int = 101) -> ConvexityReport:
    """Certify convex boundary curvature over an interior power grid.

    certified = discriminant <= 1e-9 * scale at every interior grid point
    and both Gram Cauchy-Schwarz chains hold.  Violations are reported in
    the flags rather than raised.
    """
    count = int(grid)
    if count < 11:
        raise ValueError(f"certification grid must have at least 11 points, got {count}")
    pair = _pair(h1, h2)
    ps = np.linspace(0.0, config.power_budget, count)[1:-1]
    data = _SweepData(pair, config, ps)

    slack = DISCRIMINANT_RTOL * data.scale
    disc_ok = bool((data.disc <= slack).all())
    summands_ok = bool((data.summands <= slack[:, None]).all())
    mono_ok = bool((data.deps1 < 0.0).all() and (data.deps2 > 0.0).all())

    prod_aa = data.a11 * data.a22
    prod_bb = data.b11 * data.b22
    cs_gram = bool((data.absa12sq <= prod_aa + CAUCHY_SCHWARZ_ATOL).all()
                   and (data.absb12sq <= prod_bb + CAUCHY_SCHWARZ_ATOL).all())
    # 4 Re^2{a21 b12} <= 4 |a21 b12|^2 <= 4 a11 a22 b11 b22 <= (a22 b11 + a11 b22)^2
    link0 = 4.0 * data.re_ab ** 2
    link1 = 4.0 * data.absa12sq * data.absb12sq
    link2 = 4.0 * prod_aa * prod_bb
    link3 = (data.a22 * data.b11 + data.a11 * data.b22) ** 2
    chain_ok = bool(
        (link0 <= link1 * (1.0 + 1e-12) + CAUCHY_SCHWARZ_ATOL).all()
        and (link1 <= link2 * (1.0 + 1e-12) + CAUCHY_SCHWARZ_ATOL).all()
        and (link2 <= link3 * (1.0 + 1e-12) + CAUCHY_SCHWARZ_ATOL).all()
    )
    cs_ok = cs_gram and chain_ok

    worst = int(np.argmax(data.disc))
    return ConvexityReport(
        certified=disc_ok and cs_ok,
        classification=colinearity_classify(h1, h2),
        worst_discriminant=float(data.disc[worst]),
        worst_p=float(ps[worst]),
        grid=count,
        cauchy_schwarz_ok=cs_ok,
        summands_ok=summands_ok,
        monotonicity_ok=mono_ok,
    )
