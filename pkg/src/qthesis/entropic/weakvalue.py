"""Weak values: the analytic pre/post-selected expectation and a sampled estimator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..quantum import Projector, pauli_axis_operator
from ..rng import chunk_bounds, make_rng
from ..weak import as_strength, sample_records, update_bloch

SINGULAR_TOL = 1e-12


class SingularSelectionError(ValueError):
    """Pre- and post-selected states are orthogonal."""


class SamplingFailureError(RuntimeError):
    """No trial survived post-selection."""


@dataclass(frozen=True)
class WeakValue:
    value: complex
    anomalous: bool
    postselection_probability: float

    @property
    def real(self) -> float:
        return float(self.value.real)


def weak_value(i: int, f_axis: float, f: int, a_axis: float, i_axis: float = 0.0) -> WeakValue:
    """``<f|A|i> / <f|i>`` for eigenstates ``|i>`` of the ``i_axis`` and ``|f>`` of the ``f_axis``.

    The result is flagged anomalous when its real part lies outside ``[-1, 1]``,
    the spectrum of ``A``.
    """
    ket_i = Projector.for_axis(i_axis, i).ket
    ket_f = Projector.for_axis(f_axis, f).ket
    amp = np.vdot(ket_f, ket_i)
    if abs(amp) ** 2 < SINGULAR_TOL:
        raise SingularSelectionError("post-selection is orthogonal to the preparation")
    a = pauli_axis_operator(a_axis).matrix
    val = complex(np.vdot(ket_f, a @ ket_i) / amp)
    return WeakValue(val, bool(abs(val.real) > 1 + 1e-12), float(abs(amp) ** 2))


@dataclass(frozen=True)
class SampledWeakValue:
    value: float
    stderr: float
    n_accepted: int
    acceptance: float
    normalization: str
    unreliable: bool


def _weak_value_chunk(n, rng, i, f, a_axis, f_axis, i_axis, s):
    """One chunk: returns (sum j*1_f, sum (j*1_f)^2, accepted count, sum j over accepted, sum j^2 over accepted)."""
    b0 = np.array([i * np.sin(i_axis), 0.0, i * np.cos(i_axis)])
    a = np.cos(a_axis) * b0[2] + np.sin(a_axis) * b0[0]
    j = sample_records(np.full(n, a), s, rng)
    post = update_bloch(b0[None, :], j, s, a_axis)
    comp = np.cos(f_axis) * post[:, 2] + np.sin(f_axis) * post[:, 0]
    outcome = np.where(rng.random(n) < 0.5 * (1 + comp), 1, -1)
    acc = outcome == f
    ja = j[acc]
    return np.array([ja.sum(), (ja * ja).sum(), acc.sum()], dtype=float)


def _calibration_chunk(n, rng, i, f, f_axis, i_axis):
    p = 0.5 * (1 + i * np.cos(f_axis - i_axis))
    out = np.where(rng.random(n) < p, 1, -1)
    return float(np.count_nonzero(out == f))


def weak_value_sampled(i: int, f: int, a_axis: float, s, shots: int, rng: np.random.Generator | int,
                       f_axis: float, i_axis: float = 0.0, normalization: str = "calibrated",
                       chunk: int = 1_000_000) -> SampledWeakValue:
    """Estimate ``Re A_wv`` from a simulated weak-measurement experiment.

    Each trial prepares ``|i>``, records ``j`` weakly along ``a_axis`` and
    reads out ``f_axis``; trials with outcome ``f`` are accepted.
    ``sum_accepted j / shots`` estimates ``p(f|i) Re A_wv`` exactly at any
    strength, because record means for the two eigenvalues are +-1.

    ``normalization="calibrated"`` divides by ``p(f|i)`` measured in a
    separate run of ``shots`` trials without the weak measurement, which is
    unbiased for every ``s``. ``normalization="acceptance"`` divides by the
    fraction of accepted trials in the same run, i.e. it returns the
    conditional mean of ``j``; that only reaches the weak value as ``s -> 0``.
    """
    if shots < 10_000:
        raise ValueError("need at least 1e4 shots")
    if normalization not in ("calibrated", "acceptance"):
        raise ValueError("normalization must be 'calibrated' or 'acceptance'")
    st = as_strength(s)
    seed_rng = rng if isinstance(rng, np.random.Generator) else make_rng(int(rng))
    tot = np.zeros(3)
    n_cal = 0.0
    for a, b in chunk_bounds(shots, chunk):
        tot += _weak_value_chunk(b - a, seed_rng, i, f, a_axis, f_axis, i_axis, st)
    if normalization == "calibrated":
        for a, b in chunk_bounds(shots, chunk):
            n_cal += _calibration_chunk(b - a, seed_rng, i, f, f_axis, i_axis)
    s1, s2, n_acc = tot
    if n_acc == 0:
        raise SamplingFailureError("no trials survived post-selection")
    acceptance = n_acc / shots
    if normalization == "acceptance":
        mean = s1 / n_acc
        var = max(s2 / n_acc - mean**2, 0.0)
        value, stderr = mean, float(np.sqrt(var / n_acc))
    else:
        if n_cal == 0:
            raise SamplingFailureError("calibration run produced no post-selected trials")
        p_hat = n_cal / shots
        m = s1 / shots
        var_m = max(s2 / shots - m * m, 0.0) / shots
        var_p = p_hat * (1 - p_hat) / shots
        value = m / p_hat
        stderr = float(np.sqrt(var_m / p_hat**2 + m**2 * var_p / p_hat**4))
    unreliable = bool(n_acc < 1000 or not np.isfinite(stderr) or stderr > 0.25 * max(abs(value), 1.0))
    return SampledWeakValue(float(value), stderr, int(n_acc), float(acceptance), normalization, unreliable)


def conditional_record_mean(i: int, f: int, a_axis: float, f_axis: float, s, i_axis: float = 0.0) -> float:
    """Exact ``E[j | f]`` at strength ``s``, the large-shot limit of the acceptance-normalized estimator."""
    st = as_strength(s)
    ket_i = Projector.for_axis(i_axis, i).ket
    ket_f = Projector.for_axis(f_axis, f).ket
    al = np.vdot(ket_f, Projector.for_axis(a_axis, 1).matrix @ ket_i)
    be = np.vdot(ket_f, Projector.for_axis(a_axis, -1).matrix @ ket_i)
    # coherence between the two record branches decays with the full strength s
    den = abs(al) ** 2 + abs(be) ** 2 + 2 * np.exp(-st.s / 2) * (al * np.conj(be)).real
    return float((abs(al) ** 2 - abs(be) ** 2) / den)
