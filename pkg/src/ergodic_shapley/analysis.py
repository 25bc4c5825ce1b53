"""Closed-form variance analysis of paired (antithetic) Shapley sampling.

Everything here is deterministic so it can serve as an oracle for the
stochastic estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .exceptions import InputError


def _check_rho(rho: float) -> None:
    if not -1.0 <= rho <= 1.0:
        raise InputError(f"correlation must lie in [-1, 1], got {rho}")


def paired_variance(sigma: float, rho: float, m2: int) -> float:
    """Variance of the mean of m2 i.i.d. pairs with per-coordinate std sigma and
    within-pair correlation rho: sigma^2 (1 + rho) / (2 m2)."""
    if sigma < 0:
        raise InputError(f"sigma must be nonnegative, got {sigma}")
    _check_rho(rho)
    if m2 < 1:
        raise InputError(f"need at least one pair, got m2={m2}")
    return sigma * sigma * (1.0 + rho) / (2.0 * m2)


def improvement_ratio(m: int, m2: int, rho: float) -> float:
    """sigma_E / sigma_S = sqrt(m (1 + rho) / (2 m2)); below 1 the pairs win."""
    if m < 1 or m2 < 1:
        raise InputError(f"m and m2 must be positive, got m={m}, m2={m2}")
    _check_rho(rho)
    return math.sqrt(m * (1.0 + rho) / (2.0 * m2))


def m1_upper_bound(m: int, n: int, rho: float) -> float:
    """Largest learning size that still beats simple sampling: -6 rho m / n^2.

    Nonpositive values mean no learning size can pay for itself.
    """
    if n < 1:
        raise InputError(f"player count must be positive, got {n}")
    return -6.0 * rho * m / (n * n)


@dataclass(frozen=True)
class VariancePrediction:
    sigma: float
    rho: float
    m: int
    m1: int
    m2: int
    predicted_sigma_E: float
    predicted_ratio: float


def pair_count(m: int, m1: int, n: int) -> int:
    """Pairs left after learning: (m - m1 n^2 / 6) / 2 rounded half-up, exactly."""
    return (6 * int(m) - int(m1) * n * n + 6) // 12


def predict(sigma: float, rho: float, m: int, m1: int, n: int) -> VariancePrediction:
    """Predicted std of the paired estimator for budget m split at learning size m1."""
    m2 = pair_count(m, m1, n)
    if m2 < 1:
        raise InputError(f"budget m={m} leaves no pairs with m1={m1}")
    sigma_E = math.sqrt(paired_variance(sigma, rho, m2))
    return VariancePrediction(sigma, rho, int(m), int(m1), m2, sigma_E, improvement_ratio(m, m2, rho))


def ratio_curve(ms, n: int, m1: int, rho: float) -> np.ndarray:
    """sigma_E / sigma_S as a function of the budget (continuous m2); NaN where
    learning exhausts the budget."""
    _check_rho(rho)
    ms = np.asarray(ms, dtype=np.float64)
    m2 = (ms - m1 * n * n / 6.0) / 2.0
    out = np.full(ms.shape, np.nan)
    ok = m2 > 0
    out[ok] = np.sqrt(ms[ok] * (1.0 + rho) / (2.0 * m2[ok]))
    return out


@dataclass(frozen=True)
class Crossover:
    beats_simple_low: Optional[float]
    beats_simple_high: Optional[float]
    high_overtakes_low: Optional[float]


def _beats_simple(n: int, m1: int, rho: float) -> Optional[float]:
    return n * n * m1 / (-6.0 * rho) if rho < 0 else None


def crossover_points(n: int, m1_low: int, rho_low: float, m1_high: int, rho_high: float) -> Crossover:
    """Budgets where each learning size starts to beat simple sampling, and where
    the larger learning size overtakes the smaller one.

    The last threshold solves m2(low) / m2(high) = (1 + rho_low) / (1 + rho_high).
    """
    _check_rho(rho_low)
    _check_rho(rho_high)
    if m1_high <= m1_low:
        raise InputError("m1_high must exceed m1_low")
    a = m1_low * n * n / 6.0
    b = m1_high * n * n / 6.0
    overtake = None
    if 1.0 + rho_high > 0:
        q = (1.0 + rho_low) / (1.0 + rho_high)
        if q > 1.0:
            m = (a - q * b) / (1.0 - q)
            overtake = m if m > b else None
    else:
        overtake = b
    return Crossover(_beats_simple(n, m1_low, rho_low), _beats_simple(n, m1_high, rho_high), overtake)


@dataclass(frozen=True)
class BinaryJoint:
    """Joint law of two identically distributed 0/1 variables: P(X=1)=p, P(X=Y=1)=a."""

    p: float
    a: float

    def __post_init__(self):
        eps = 1e-15
        if not (-eps <= self.a <= self.p + eps and self.p <= 1 + eps):
            raise InputError(f"need 0 <= a <= p <= 1, got p={self.p}, a={self.a}")
        if 1 - 2 * self.p + self.a < -eps:
            raise InputError(f"cell P(X=Y=0) = 1 - 2p + a is negative for p={self.p}, a={self.a}")

    def table(self) -> np.ndarray:
        """Rows Y=1, Y=0; columns X=1, X=0."""
        p, a = self.p, self.a
        return np.array([[a, p - a], [p - a, 1 - 2 * p + a]])


def _check_p(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise InputError(f"degenerate binary distribution with p={p}")


def binary_rho(joint: BinaryJoint) -> float:
    _check_p(joint.p)
    p, a = joint.p, joint.a
    # (a - p^2) / (p - p^2) written as 1 - P(X=1, Y=0) / (p (1 - p))
    return 1.0 - (p - a) / (p * (1.0 - p))


def binary_rho_min(p: float) -> float:
    """Most negative correlation available to two Bernoulli(p) variables."""
    _check_p(p)
    return -p / (1.0 - p) if p <= 0.5 else -(1.0 - p) / p


def binary_rho_min_joint(p: float) -> BinaryJoint:
    _check_p(p)
    return BinaryJoint(p, 0.0 if p <= 0.5 else 2.0 * p - 1.0)


@dataclass(frozen=True)
class JointTable:
    """Discrete joint law; ``probs[r, c]`` is P(Y = values[r], X = values[c])."""

    values: tuple[float, ...]
    probs: tuple[tuple[Fraction, ...], ...]

    def array(self) -> np.ndarray:
        return np.array([[float(c) for c in row] for row in self.probs])

    def marginal_x(self) -> np.ndarray:
        return self.array().sum(axis=0)

    def marginal_y(self) -> np.ndarray:
        return self.array().sum(axis=1)

    def cell(self, y: float, x: float) -> float:
        return float(self.probs[self.values.index(y)][self.values.index(x)])

    def correlation(self) -> float:
        v = np.asarray(self.values, dtype=np.float64)
        p = self.array()
        px, py = p.sum(axis=0), p.sum(axis=1)
        mx, my = px @ v, py @ v
        cov = v @ p @ v - mx * my
        return float(cov / math.sqrt((px @ v**2 - mx**2) * (py @ v**2 - my**2)))


def mst_reference_joint(n: int = 100) -> JointTable:
    """Joint law of a player's marginal contribution in the mst game for an
    order and its mirror image (hub weight n + 1)."""
    hub = n + 1
    third, last = Fraction(1, 3), Fraction(1, n)
    # value order: alone (hub), extends a run (1), merges two runs (2 - hub)
    values = (float(hub), 1.0, float(2 - hub))
    probs = (
        (Fraction(0), last, third - last),
        (last, third, Fraction(0)),
        (third - last, Fraction(0), Fraction(0)),
    )
    return JointTable(values, probs)
