"""Quantum trajectories in the X-Z plane: replay, reversal and the arrow-of-time statistic Q.

A trajectory is an initial Bloch vector ``(x, z)`` plus an ordered list of
events. Its forward probability density is the product of the record
densities (and projection probabilities) evaluated on the Bayesian-propagated
state. The backward density is the forward density of the reversed
trajectory: Bloch vector negated, events in reverse order, record values
kept, rotation angles negated.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..weak import MeasurementStrength, as_strength, log_record_density, update_bloch

REPLAY_TOL = 1e-10


class ReplayError(ValueError):
    """Stored final state does not follow from replaying the events."""


@dataclass(frozen=True)
class Prepare:
    x: float
    z: float


@dataclass(frozen=True)
class Rotate:
    theta: float


@dataclass(frozen=True)
class Weak:
    j: float
    s: float
    axis: float = 0.0
    eta: float = 1.0


@dataclass(frozen=True)
class Project:
    axis: float
    outcome: int


def rotate_xz(x, z, theta):
    """Y rotation of Bloch coordinates: ``(0, 1) -> (sin theta, cos theta)``."""
    c, s = np.cos(theta), np.sin(theta)
    return x * c + z * s, z * c - x * s


def _apply(event, x, z):
    """Apply one event; returns ``(x, z, log_factor)`` where ``log_factor`` is its log probability weight."""
    if isinstance(event, Prepare):
        return event.x, event.z, 0.0
    if isinstance(event, Rotate):
        x2, z2 = rotate_xz(x, z, event.theta)
        return x2, z2, 0.0
    if isinstance(event, Weak):
        st = MeasurementStrength(event.s, event.eta)
        a = np.cos(event.axis) * z + np.sin(event.axis) * x
        b = update_bloch(np.array([x, 0.0, z]), event.j, st, event.axis)
        return float(b[0]), float(b[2]), float(log_record_density(event.j, a, st))
    if isinstance(event, Project):
        a = np.cos(event.axis) * z + np.sin(event.axis) * x
        p = 0.5 * (1 + event.outcome * a)
        o = event.outcome
        return o * np.sin(event.axis), o * np.cos(event.axis), float(np.log(p)) if p > 0 else -np.inf
    raise TypeError(f"unknown event {event!r}")


def replay(initial, events):
    """Propagate ``initial = (x, z)`` through ``events``; returns ``((x, z), log_probability)``."""
    x, z = map(float, initial)
    logp = 0.0
    for ev in events:
        x, z, lf = _apply(ev, x, z)
        logp += lf
    return (x, z), logp


@dataclass(frozen=True)
class Trajectory:
    initial: tuple
    events: tuple = ()
    final: tuple = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(float(v) for v in self.initial))
        object.__setattr__(self, "events", tuple(self.events))
        fin, _ = replay(self.initial, self.events)
        if self.final is None:
            object.__setattr__(self, "final", fin)
        else:
            object.__setattr__(self, "final", tuple(float(v) for v in self.final))
            if max(abs(fin[0] - self.final[0]), abs(fin[1] - self.final[1])) > REPLAY_TOL:
                raise ReplayError(f"replay gives {fin}, stored final is {self.final}")

    @classmethod
    def single_weak(cls, x0: float, z0: float, j: float, s: float, axis: float = 0.0) -> "Trajectory":
        return cls((x0, z0), (Weak(j, s, axis),))


def _reverse_event(ev):
    if isinstance(ev, Rotate):
        return Rotate(-ev.theta)
    if isinstance(ev, Project):
        return Project(ev.axis, -ev.outcome)
    if isinstance(ev, Prepare):
        return Prepare(-ev.x, -ev.z)
    return ev


def reverse_trajectory(traj: Trajectory) -> Trajectory:
    """Time-reversed trajectory: starts from the negated final state and runs the events backwards.

    Weak and rotation events are exactly undone, so ``reverse(reverse(t)) == t``
    for trajectories built from them. Projections are not invertible: the
    reversed projection lands on the negated eigenstate, not on the negated
    initial state.
    """
    return Trajectory((-traj.final[0], -traj.final[1]), tuple(_reverse_event(e) for e in reversed(traj.events)))


def forward_backward_probability(traj: Trajectory):
    """``(P_F, P_B)`` densities; ``P_B`` is ``P_F`` of the reversed trajectory."""
    lf, lb = log_forward_backward(traj)
    return float(np.exp(lf)), float(np.exp(lb))


def log_forward_backward(traj: Trajectory):
    _, lf = replay(traj.initial, traj.events)
    rev = reverse_trajectory(traj)
    _, lb = replay(rev.initial, rev.events)
    return lf, lb


def log_ratio_q(traj: Trajectory) -> float:
    """``Q = ln(P_F / P_B)``; ``+inf`` marks an absolutely irreversible record (``P_B = 0``)."""
    lf, lb = log_forward_backward(traj)
    if lb == -np.inf:
        return float("inf")
    return float(lf - lb)


def single_step_q(z0, j, s):
    """Vectorized Q for one z-axis weak record from prior ``z0`` (any purity).

    ``Q = ln p(j | z0) - ln p(j | -z1)`` with ``z1 = tanh(s j + arctanh z0)``.
    Writing ``z = tanh u`` turns both factors into ``logaddexp`` of the
    rapidity, which stays exact when ``z1`` rounds to a pole; poles of the
    prior itself are handled directly.
    """
    st = as_strength(s)
    z0 = np.asarray(z0, dtype=float)
    j = np.asarray(j, dtype=float)
    se = st.record_strength
    sj = se * j
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.arctanh(z0)

        def logp(v):
            # ln[(1 + tanh v) e^{sj} + (1 - tanh v) e^{-sj}] up to a common constant
            return np.logaddexp(v + sj, -v - sj) - np.logaddexp(v, -v)

        q = logp(u) - logp(-(u + sj))
        pole = np.isinf(u) & np.ones_like(q, dtype=bool)
        if np.any(pole):
            # |z0| = 1 is a fixed point of the update: Q = ln p(j|z0) - ln p(j|-z0) = 2 se j z0
            q = np.where(pole, 2 * sj * np.sign(z0), q)
    return q[()] if q.ndim == 0 else q
