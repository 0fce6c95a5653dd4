"""Spread measures of a distribution: variance, Shannon and Renyi entropies, Robertson bound."""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Real

import numpy as np

from ..quantum import QubitState, pauli_axis_operator


class NonNumericOutcomeError(TypeError):
    """Variance requested for outcomes that have no numeric value."""


@dataclass(frozen=True)
class DiscreteDistribution:
    """Outcomes as ``(label, value, probability)`` triples; ``value`` may be ``None``."""

    outcomes: tuple

    def __post_init__(self):
        outs = tuple(tuple(o) for o in self.outcomes)
        if not outs:
            raise ValueError("distribution needs at least one outcome")
        p = np.array([o[2] for o in outs], dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "outcomes", outs)

    @classmethod
    def from_probabilities(cls, probs, values=None) -> "DiscreteDistribution":
        probs = list(probs)
        values = list(values) if values is not None else [None] * len(probs)
        return cls(tuple((i, v, p) for i, (v, p) in enumerate(zip(values, probs))))

    @classmethod
    def uniform(cls, values) -> "DiscreteDistribution":
        values = list(values)
        return cls.from_probabilities([1.0 / len(values)] * len(values), values)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([o[2] for o in self.outcomes], dtype=float)

    @property
    def values(self) -> list:
        return [o[1] for o in self.outcomes]


def _probs(dist) -> np.ndarray:
    if isinstance(dist, DiscreteDistribution):
        return dist.probabilities
    p = np.asarray(dist, dtype=float).ravel()
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("probabilities must be non-negative and sum to 1")
    return p


def variance(dist: DiscreteDistribution) -> float:
    """``sum_i p_i (x_i - mean)^2``; categorical outcomes raise :class:`NonNumericOutcomeError`."""
    vals = dist.values
    if any(v is None or isinstance(v, bool) or not isinstance(v, Real) for v in vals):
        raise NonNumericOutcomeError("outcomes without numeric values cannot be quantified with variance")
    x = np.array(vals, dtype=float)
    p = dist.probabilities
    mean = np.dot(p, x)
    return float(np.dot(p, (x - mean) ** 2))


def shannon_entropy(dist) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``.

    Accepts a :class:`DiscreteDistribution` or any array of probabilities.
    """
    p = _probs(dist)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def renyi_entropy(dist, alpha: float) -> float:
    """Order-``alpha`` Renyi entropy in bits, ``alpha/(1-alpha) log2 ||p||_alpha``.

    ``alpha == 1`` returns the Shannon entropy and ``alpha = inf`` the min-entropy.
    """
    if not alpha > 0:
        raise ValueError("Renyi order must be positive")
    p = _probs(dist)
    p = p[p > 0]
    if alpha == 1:
        return shannon_entropy(p)
    if np.isinf(alpha):
        return float(-np.log2(p.max()))
    # log2 ||p||_alpha = log2(sum p^alpha) / alpha, so H = log2(sum p^alpha) / (1 - alpha)
    return float(np.log2(np.sum(p**alpha)) / (1 - alpha))


def robertson_bound(a_axis: float, b_axis: float, state: QubitState) -> float:
    """``|Tr(rho [A, B])| / 2`` for two X-Z axis observables."""
    a = pauli_axis_operator(a_axis).matrix
    b = pauli_axis_operator(b_axis).matrix
    return 0.5 * abs(np.trace(state.matrix @ (a @ b - b @ a)))


def uncertainty_product(a_axis: float, b_axis: float, state: QubitState) -> float:
    """``Delta A * Delta B`` for the left side of the Robertson relation."""
    def spread(theta):
        op = pauli_axis_operator(theta).matrix
        m = state.expect(op)
        return np.sqrt(max(0.0, 1.0 - m * m))  # <A^2> = 1 for Pauli-axis operators

    return float(spread(a_axis) * spread(b_axis))


def entropy_stderr(p, n: int) -> float:
    """Delta-method standard error (bits) of the plug-in entropy from ``n`` samples."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    lp = np.log2(p)
    h = -np.sum(p * lp)
    return float(np.sqrt(max(np.sum(p * lp * lp) - h * h, 0.0) / n))
