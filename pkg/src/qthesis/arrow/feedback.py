"""Feedback ensembles: causally and anticausally ordered corrective rotations.

Both protocols start from a prepared state (``|+x>`` by default), draw a
rotation angle uniformly from ``[-max_angle, max_angle]`` and keep only
trials whose angle lies within ``window`` of the ideal correction
``atan2(Z_j, X_j)`` of the state updated with the record ``j``.

* ``cof``: weak record first, rotation afterwards.
* ``acof``: rotation first, then the weak record that prescribes it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import DEFAULT_CHUNK, chunked_ensemble
from ..weak import as_strength, sample_records, update_bloch
from .trajectory import rotate_xz

PROTOCOLS = ("cof", "acof", "none")


class NoAcceptedTrialsError(RuntimeError):
    """Post-selection rejected every trial."""


@dataclass(frozen=True, eq=False)
class FeedbackEnsemble:
    protocol: str
    q: np.ndarray            # Q of every trial, accepted or not
    j: np.ndarray
    theta_app: np.ndarray
    accepted: np.ndarray

    @property
    def accepted_q(self) -> np.ndarray:
        return self.q[self.accepted]

    @property
    def acceptance(self) -> float:
        return float(np.mean(self.accepted))


def _logp(z, j, se):
    """``ln p(j | z)`` for a z-axis record, dropping the common Gaussian factor."""
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log1p(z) + se * j, np.log1p(-z) - se * j)


def _feedback_chunk(n, rng, protocol, s, window, max_angle, x0, z0):
    st = as_strength(s)
    se = st.record_strength
    u_theta = rng.random(n)
    theta = max_angle * (2 * u_theta - 1)
    b0 = np.array([x0, 0.0, z0])
    if protocol in ("cof", "none"):
        j = sample_records(np.full(n, z0), st, rng)
        post = update_bloch(b0[None, :], j, st, 0.0)
        ideal = np.arctan2(post[:, 2], post[:, 0])
        # rotations are deterministic and undone in the reversed trajectory, so
        # Q reduces to the record factor evaluated before and after the update
        q = _logp(z0, j, se) - _logp(-post[:, 2], j, se)
        if protocol == "none":
            return j, np.zeros(n), q, np.ones(n, dtype=bool)
    else:
        xr, zr = rotate_xz(x0, z0, theta)
        j = sample_records(zr, st, rng)
        pre = np.stack([xr, np.zeros(n), zr], axis=1)
        post = update_bloch(pre, j, st, 0.0)
        # the correction the record would have prescribed for the unrotated state
        pres = update_bloch(b0[None, :], j, st, 0.0)
        ideal = np.arctan2(pres[:, 2], pres[:, 0])
        q = _logp(zr, j, se) - _logp(-post[:, 2], j, se)
    accepted = np.abs(theta - ideal) <= window
    return j, theta, q, accepted


def run_feedback_ensemble(protocol: str, n: int, s, window: float = np.pi / 20, rng_seed: int = 0,
                          max_angle: float = np.pi / 4, initial=(1.0, 0.0), jobs: int = 1,
                          chunk: int = DEFAULT_CHUNK, stream: int = 1, min_shots: int = 10_000) -> FeedbackEnsemble:
    """Simulate ``n`` trials of a feedback protocol and return Q for each.

    Randomness comes from ``make_rng(rng_seed, stream, chunk_index)`` so the
    result is independent of ``jobs``. ``protocol="none"`` runs the weak
    record alone with no rotation and no post-selection.
    """
    protocol = protocol.lower()
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}")
    if n < min_shots:
        raise ValueError(f"need at least {min_shots} trials")
    x0, z0 = map(float, initial)
    parts = chunked_ensemble(_feedback_chunk, n, rng_seed, stream, jobs, chunk,
                             args=(protocol, as_strength(s), window, max_angle, x0, z0))
    j, th, q, acc = (np.concatenate([p[k] for p in parts]) for k in range(4))
    if not acc.any():
        raise NoAcceptedTrialsError(f"{protocol}: no trial passed post-selection")
    return FeedbackEnsemble(protocol, q, j, th, acc)
