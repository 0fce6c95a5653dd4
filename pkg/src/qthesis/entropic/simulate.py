"""Monte-Carlo and exact evaluation of the entropies entering the weak-measurement EUR.

``H_I`` is the entropy of a projective readout along ``theta_i`` of the state
prepared at ``theta_rho``. ``H_AF`` is the entropy of the joint distribution
of the digitized weak record (along ``theta_a``) and the subsequent
projective readout along ``theta_f``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from ..quantum import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, Projector, ry
from ..weak import MeasurementStrength, ReadoutModel, as_strength, sample_records, update_bloch
from .measures import entropy_stderr, shannon_entropy


@dataclass(frozen=True)
class NoiseModel:
    """Imperfections applied in the simulated experiment.

    ``readout_fidelity`` is the probability a projective readout reports the
    true outcome; ``eta`` is the weak-record efficiency; ``t1_decay`` is the
    relaxation probability between the weak record and the final readout;
    ``dephasing`` is the extra coherence loss ``1 - exp(-gamma_phi t)`` over
    the same interval.
    """

    readout_fidelity: float = 1.0
    eta: float = 1.0
    t1_decay: float = 0.0
    dephasing: float = 0.0

    @classmethod
    def from_dict(cls, d: dict | None) -> "NoiseModel":
        d = dict(d or {})
        if "t1" in d:
            d["t1_decay"] = d.pop("t1")
        return cls(**d)


@dataclass(frozen=True)
class EurSample:
    H_I: float
    H_AF: float
    H_AF_normalized: float
    sigma_I: float
    sigma_AF: float
    n: int


def _bloch(theta: float) -> np.ndarray:
    return np.array([np.sin(theta), 0.0, np.cos(theta)])


def _flip(outcomes: np.ndarray, fidelity: float, rng: np.random.Generator) -> np.ndarray:
    if fidelity >= 1.0:
        return outcomes
    flip = rng.random(outcomes.shape) >= fidelity
    return np.where(flip, -outcomes, outcomes)


def _relax(bloch: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Amplitude damping toward +Z and dephasing, vectorized over Bloch rows."""
    if noise.t1_decay == 0 and noise.dephasing == 0:
        return bloch
    g = noise.t1_decay
    c = np.sqrt(1 - g) * (1 - noise.dephasing)
    out = bloch.copy()
    out[..., 0] *= c
    out[..., 1] *= c
    out[..., 2] = g + (1 - g) * bloch[..., 2]
    return out


def sample_eur_counts(theta_rho, theta_a, theta_f, s, shots, readout, noise, rng, theta_i=0.0):
    """Raw counts: ``(counts_I (2,), counts_AF (bins, 2))`` from ``shots`` trials of each experiment."""
    st = MeasurementStrength(as_strength(s).s, noise.eta)
    b0 = _bloch(theta_rho)
    p_i = 0.5 * (1 + np.dot(_bloch(theta_i), b0))
    oi = np.where(rng.random(shots) < p_i, 1, -1)
    oi = _flip(oi, noise.readout_fidelity, rng)
    counts_i = np.array([np.count_nonzero(oi == 1), np.count_nonzero(oi == -1)])

    a = np.dot(_bloch(theta_a), b0)
    j = sample_records(np.full(shots, a), st, rng)
    post = _relax(update_bloch(b0[None, :], j, st, theta_a), noise)
    comp = post @ _bloch(theta_f)
    of = np.where(rng.random(shots) < 0.5 * (1 + comp), 1, -1)
    of = _flip(of, noise.readout_fidelity, rng)
    idx = readout.digitize(j) * 2 + (of == -1)
    counts_af = np.bincount(idx, minlength=2 * readout.bins).reshape(readout.bins, 2)
    return counts_i, counts_af


def simulate_eur(theta_rho, theta_a, theta_f, s, shots, readout: ReadoutModel | None = None,
                 noise: NoiseModel | dict | None = None, rng: np.random.Generator | None = None,
                 theta_i: float = 0.0) -> EurSample:
    """Monte-Carlo estimate of ``H_I`` and ``H_AF`` with delta-method standard errors.

    ``H_AF_normalized`` subtracts the exact ``H_AF`` of the aligned reference
    configuration ``theta_a = theta_f = 0`` at the same ``theta_rho``.
    """
    if shots < 100_000:
        raise ValueError("simulate_eur needs at least 1e5 shots")
    st = as_strength(s)
    readout = readout or ReadoutModel(s=st.s)
    noise = noise if isinstance(noise, NoiseModel) else NoiseModel.from_dict(noise)
    rng = rng if rng is not None else np.random.default_rng(0)
    ci, caf = sample_eur_counts(theta_rho, theta_a, theta_f, st, shots, readout, noise, rng, theta_i)
    pi, paf = ci / shots, caf / shots
    h_af = shannon_entropy(paf)
    ref = exact_eur_entropies(theta_rho, 0.0, 0.0, st, readout, noise, theta_i)[1]
    return EurSample(shannon_entropy(pi), h_af, h_af - ref, entropy_stderr(pi, shots),
                     entropy_stderr(paf, shots), shots)


def binned_post_states(bloch, s, theta_a: float, readout: ReadoutModel) -> np.ndarray:
    """Unnormalized post-record density matrices integrated over each bin, shape ``(bins, 2, 2)``.

    Tail mass outside the bin range is folded into the edge bins, matching
    :meth:`ReadoutModel.digitize`.
    """
    st = as_strength(s)
    se = st.record_strength
    b = np.asarray(bloch, dtype=float)
    r = ry(theta_a)
    rho = 0.5 * (IDENTITY + b[0] * SIGMA_X + b[1] * SIGMA_Y + b[2] * SIGMA_Z)
    rho_a = r.conj().T @ rho @ r          # in the eigenbasis of A (A -> sigma_z)
    m_plus = readout.edge_masses(1.0, se)
    m_minus = readout.edge_masses(-1.0, se)
    m_zero = readout.edge_masses(0.0, se) * np.exp(-st.s / 2)
    out = np.empty((readout.bins, 2, 2), dtype=complex)
    out[:, 0, 0] = rho_a[0, 0] * m_plus
    out[:, 1, 1] = rho_a[1, 1] * m_minus
    out[:, 0, 1] = rho_a[0, 1] * m_zero
    out[:, 1, 0] = rho_a[1, 0] * m_zero
    return r @ out @ r.conj().T


def exact_eur_entropies(theta_rho, theta_a, theta_f, s, readout: ReadoutModel | None = None,
                        noise: NoiseModel | dict | None = None, theta_i: float = 0.0):
    """Exact ``(H_I, H_AF)`` of the binned experiment, computed from Gaussian bin masses."""
    st = as_strength(s)
    readout = readout or ReadoutModel(s=st.s)
    noise = noise if isinstance(noise, NoiseModel) else NoiseModel.from_dict(noise)
    st = MeasurementStrength(st.s, noise.eta)
    fid = noise.readout_fidelity
    b0 = _bloch(theta_rho)
    p_i = 0.5 * (1 + np.dot(_bloch(theta_i), b0))
    p_i = fid * p_i + (1 - fid) * (1 - p_i)
    h_i = shannon_entropy([p_i, 1 - p_i])
    post = binned_post_states(b0, st, theta_a, readout)
    w = np.trace(post, axis1=1, axis2=2).real
    bl = np.stack([2 * post[:, 0, 1].real, -2 * post[:, 0, 1].imag, (post[:, 0, 0] - post[:, 1, 1]).real], axis=1)
    bl = _relax(bl / np.where(w > 0, w, 1.0)[:, None], noise)
    pf = 0.5 * (1 + bl @ _bloch(theta_f))
    pf = fid * pf + (1 - fid) * (1 - pf)
    joint = np.stack([w * pf, w * (1 - pf)], axis=1)
    joint = np.clip(joint, 0.0, None)
    return h_i, shannon_entropy(joint / joint.sum())


def exact_projective_entropies(theta_rho: float, theta_f: float, theta_i: float = 0.0):
    """``(H(I), H(F))`` for projective readouts of the same state (Maassen-Uffink left side)."""
    b0 = _bloch(theta_rho)
    pi = 0.5 * (1 + np.dot(_bloch(theta_i), b0))
    pf = 0.5 * (1 + np.dot(_bloch(theta_f), b0))
    return shannon_entropy([pi, 1 - pi]), shannon_entropy([pf, 1 - pf])


__all__ = ["NoiseModel", "EurSample", "simulate_eur", "sample_eur_counts", "binned_post_states",
           "exact_eur_entropies", "exact_projective_entropies", "Projector"]
