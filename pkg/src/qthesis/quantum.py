"""Single-qubit primitives: states, Pauli-axis observables, Y rotations, projective readout.

Conventions used throughout the package:

* ``|0>`` is the +1 eigenstate of sigma_z (Bloch z = +1).
* A measurement axis is an angle ``theta`` in the X-Z plane measured from +Z;
  its observable is ``cos(theta) sigma_z + sin(theta) sigma_x``.
* ``rotate_y(theta)`` applies ``exp(-i theta sigma_y / 2)`` so the Bloch vector
  (x, z) = (0, 1) goes to (sin theta, cos theta).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class InvalidStateError(ValueError):
    """Raised when a matrix is not a valid density matrix."""


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True, eq=False)
class QubitState:
    """Immutable 2x2 density matrix.

    Construction validates trace, hermiticity and positivity at ``ATOL``;
    the stored matrix is symmetrized first to absorb round-off from long
    trajectories.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise InvalidStateError("density matrix must be a finite 2x2 array")
        if np.max(np.abs(m - m.conj().T)) > 1e-9:
            raise InvalidStateError("density matrix is not Hermitian")
        m = _symmetrize(m)
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise InvalidStateError(f"trace {np.trace(m).real!r} != 1")
        if np.linalg.eigvalsh(m)[0] < -1e-9:
            raise InvalidStateError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_bloch(cls, x: float, y: float = 0.0, z: float = 0.0) -> "QubitState":
        if x * x + y * y + z * z > 1.0 + 1e-9:
            raise InvalidStateError("Bloch vector longer than 1")
        return cls((IDENTITY + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z) / 2)

    @classmethod
    def ground(cls) -> "QubitState":
        return cls.from_bloch(0.0, 0.0, 1.0)

    @classmethod
    def excited(cls) -> "QubitState":
        return cls.from_bloch(0.0, 0.0, -1.0)

    @classmethod
    def mixed(cls) -> "QubitState":
        return cls(IDENTITY / 2)

    @classmethod
    def on_axis(cls, theta: float, outcome: int = 1) -> "QubitState":
        """Eigenstate of the ``theta`` axis observable with eigenvalue ``outcome``."""
        return cls.from_bloch(outcome * np.sin(theta), 0.0, outcome * np.cos(theta))

    @property
    def bloch(self) -> np.ndarray:
        m = self.matrix
        return np.array([2 * m[0, 1].real, -2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def expect(self, op: np.ndarray) -> float:
        return float(np.trace(self.matrix @ op).real)

    def allclose(self, other: "QubitState", atol: float = ATOL) -> bool:
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= atol)

    def __repr__(self):
        x, y, z = self.bloch
        return f"QubitState(bloch=({x:.6g}, {y:.6g}, {z:.6g}))"


@dataclass(frozen=True)
class MeasurementAxis:
    """Measurement direction in the X-Z plane, stored in [0, 2pi)."""

    theta: float

    def __post_init__(self):
        if not np.isfinite(self.theta):
            raise ValueError("axis angle must be finite")
        object.__setattr__(self, "theta", float(np.mod(self.theta, 2 * np.pi)))

    @property
    def operator(self) -> np.ndarray:
        return pauli_axis_operator(self.theta).matrix

    def projector(self, outcome: int) -> "Projector":
        return Projector.for_axis(self.theta, outcome)


@dataclass(frozen=True, eq=False)
class Projector:
    matrix: np.ndarray
    label: int

    @classmethod
    def for_axis(cls, theta: float, outcome: int) -> "Projector":
        if outcome not in (1, -1):
            raise ValueError("outcome must be +1 or -1")
        op = np.cos(theta) * SIGMA_Z + np.sin(theta) * SIGMA_X
        return cls((IDENTITY + outcome * op) / 2, outcome)

    @property
    def ket(self) -> np.ndarray:
        """Unit eigenvector spanning the projector, phase fixed so the first nonzero entry is real >= 0."""
        w, v = np.linalg.eigh(self.matrix)
        vec = v[:, np.argmax(w)]
        k = 0 if abs(vec[0]) > 1e-12 else 1
        return vec * np.exp(-1j * np.angle(vec[k]))


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray
    projectors: tuple  # (Projector for +1, Projector for -1)

    @property
    def eigenvalues(self) -> tuple:
        return (1, -1)


def pauli_axis_operator(theta: float) -> HermitianOperator:
    """``cos(theta) sigma_z + sin(theta) sigma_x`` with its spectral projectors."""
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    op = np.cos(theta) * SIGMA_Z + np.sin(theta) * SIGMA_X
    return HermitianOperator(op, (Projector.for_axis(theta, 1), Projector.for_axis(theta, -1)))


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotate_y(state: QubitState, theta: float) -> QubitState:
    r = ry(theta)
    return QubitState(r @ state.matrix @ r.conj().T)


def outcome_probabilities(state: QubitState, axis: MeasurementAxis | float) -> dict:
    theta = axis.theta if isinstance(axis, MeasurementAxis) else axis
    a = float(np.cos(theta) * state.bloch[2] + np.sin(theta) * state.bloch[0])
    p_plus = min(max(0.5 * (1 + a), 0.0), 1.0)
    return {1: p_plus, -1: 1.0 - p_plus}


def projective_measure(state: QubitState, axis: MeasurementAxis | float, rng: np.random.Generator):
    """Sample a +-1 outcome along ``axis``; returns ``(outcome, post_state, probability)``.

    The outcome is drawn by inverse CDF on a single uniform, so one call
    consumes exactly one variate from ``rng``.
    """
    theta = axis.theta if isinstance(axis, MeasurementAxis) else float(axis)
    probs = outcome_probabilities(state, theta)
    u = rng.random()
    outcome = 1 if u < probs[1] else -1
    if probs[outcome] <= 0.0:  # u landed exactly on an edge of a zero-width branch
        outcome = -outcome
    proj = Projector.for_axis(theta, outcome).matrix
    post = proj @ state.matrix @ proj
    post = post / np.trace(post).real
    return outcome, QubitState(post), probs[outcome]


def purity_and_convert(state: QubitState | np.ndarray):
    """Return ``(bloch, purity)``; raw arrays are validated as density matrices first."""
    if not isinstance(state, QubitState):
        state = QubitState(state)
    return state.bloch, state.purity
