"""Entropic uncertainty bounds for qubit observables and the weak-measurement bound.

Measurement ``I`` is a projective readout along ``theta_i`` (Z by default),
``A`` is weakly measured along ``theta_a`` and ``F`` is a projective readout
along ``theta_f``. The record is digitized by a :class:`ReadoutModel`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..quantum import Projector, pauli_axis_operator
from ..weak import ReadoutModel, as_strength, kraus_operator
from .weakvalue import weak_value

PROB_FLOOR = 1e-12


class DegenerateConfigurationError(ValueError):
    """Every (i, f) pair has zero probability, so no bound can be formed."""


class TaylorValidityError(ValueError):
    """The first-order expansion of the Kraus operator is not valid on the record grid."""


def _eigvecs(theta: float):
    return [Projector.for_axis(theta, o).ket for o in (1, -1)]


def overlaps(a_axis: float, b_axis: float) -> np.ndarray:
    """``|<a_k|b_l>|`` for all eigenvector pairs, shape ``(2, 2)``."""
    va, vb = _eigvecs(a_axis), _eigvecs(b_axis)
    return np.array([[abs(np.vdot(x, y)) for y in vb] for x in va])


def trivial_bound(a_axis: float = 0.0, b_axis: float = 0.0) -> float:
    """Entropies are non-negative, so the sum is at least zero."""
    return 0.0


def deutsch_bound(a_axis: float, b_axis: float) -> float:
    """``min_{k,l} -2 log2[(1 + |<a_k|b_l>|) / 2]`` (set by the largest overlap)."""
    o = overlaps(a_axis, b_axis)
    return float(max(0.0, np.min(-2 * np.log2((1 + o) / 2))))


def maassen_uffink_bound(a_axis: float, b_axis: float) -> float:
    """``-log2 c`` with ``c`` the largest squared eigenvector overlap."""
    c = float(np.max(overlaps(a_axis, b_axis) ** 2))
    return float(max(0.0, -np.log2(min(c, 1.0))))


def povm_norm_bound(pi_i: np.ndarray, kraus: np.ndarray, pi_f: np.ndarray):
    """Operator norm and trace of ``Pi_i K^dag Pi_f K``.

    Returns ``(op_norm, trace_bound, trace)`` where ``op_norm`` is the largest
    singular value (the infinite-order Schatten norm), ``trace`` is
    ``Tr[Pi_i K^dag Pi_f K]`` and ``trace_bound = sqrt(trace)``. For rank-one
    projectors the sandwiched operator ``Pi_i K^dag Pi_f K Pi_i`` has norm
    equal to ``trace``, so the trace form is exact for projective pre- and
    post-selection.
    """
    pi_i, kraus, pi_f = (np.asarray(m, dtype=complex) for m in (pi_i, kraus, pi_f))
    for m in (pi_i, pi_f):
        if np.max(np.abs(m - m.conj().T)) > 1e-10 or np.linalg.eigvalsh(m)[0] < -1e-10:
            raise ValueError("projector inputs must be positive semidefinite")
    m = pi_i @ kraus.conj().T @ pi_f @ kraus
    op = float(np.linalg.svd(m, compute_uv=False)[0])
    tr = float(max(np.trace(m).real, 0.0))
    return op, float(np.sqrt(tr)), tr


def taylor_weights(j, s):
    """``(p_j, g_j)`` with ``sqrt(p_j) = (s/2pi)^(1/4) exp(-s (j^2 + 1) / 4)`` and ``g_j = s j / 2``.

    With these, ``K_j = sqrt(p_j) exp(g_j A)`` exactly.
    """
    st = as_strength(s)
    j = np.asarray(j, dtype=float)
    sp = (st.s / (2 * np.pi)) ** 0.25 * np.exp(-st.s * (j**2 + 1) / 4)
    p, g = sp**2, st.s * j / 2
    if p.ndim == 0:
        return float(p), float(g)
    return p, g


def conditional_probability(i: int, f_axis: float, f: int, i_axis: float = 0.0,
                            readout_fidelity: float = 1.0, t1_decay: float = 0.0) -> float:
    """``p(f|i) = |<f|i>|^2`` with optional readout and relaxation errors.

    ``t1_decay`` is the relaxation probability ``1 - exp(-t/T1)`` between
    preparation and readout; ``readout_fidelity`` is the probability that the
    readout reports the true outcome.
    """
    from ..quantum import QubitState, outcome_probabilities
    from ..weak import decay_channel

    rho = QubitState.on_axis(i_axis, i)
    if t1_decay > 0:
        rho = decay_channel(rho, -np.log1p(-t1_decay) if t1_decay < 1 else np.inf, 1.0)
    p = outcome_probabilities(rho, f_axis)[f]
    return float(readout_fidelity * p + (1 - readout_fidelity) * (1 - p))


@dataclass(frozen=True)
class EurBoundResult:
    """Minimized weak-measurement bound and where it was attained."""

    value: float
    argmin: tuple          # (i, j, f)
    terms: dict = field(repr=False)   # (i, k, f) -> bound term, for every admissible cell
    taylor_fallbacks: int = 0
    exact_value: float = float("nan")  # the same minimization with the exact trace


def eur_bound(theta_a: float, theta_f: float, s, readout: ReadoutModel | None = None,
              theta_i: float = 0.0, strict: bool = False) -> EurBoundResult:
    """Weak-measurement entropic bound minimized over ``i``, record bin and ``f``.

    Each admissible cell contributes
    ``-log2(p_j dj p_{f|i}) - (2/ln2) Re(g_j A_wv^{i,f})`` where ``dj`` is the
    bin width, so ``p_j dj`` is the probability of the bin. Cells where
    ``|2 Re(g_j A_wv)| >= 1`` leave the range of the first-order expansion;
    they use ``-log2(Tr[Pi_i K_j^dag Pi_f K_j] dj)`` instead (or raise when
    ``strict``). The number of such cells is reported.
    """
    st = as_strength(s)
    readout = readout or ReadoutModel(s=st.s)
    centers, dj = readout.centers, readout.width
    p_j, g_j = taylor_weights(centers, st)
    terms, fallbacks = {}, 0
    best, arg = np.inf, None
    best_exact = np.inf
    for i, f in itertools.product((1, -1), (1, -1)):
        pfi = conditional_probability(i, theta_f, f, i_axis=theta_i)
        if pfi <= PROB_FLOOR:
            continue
        awv = weak_value(i, theta_f, f, theta_a, i_axis=theta_i).value
        pi_i = Projector.for_axis(theta_i, i).matrix
        pi_f = Projector.for_axis(theta_f, f).matrix
        for k, j in enumerate(centers):
            prob = p_j[k] * dj * pfi
            if prob <= PROB_FLOOR:
                continue
            x = 2 * (g_j[k] * awv).real
            kr = kraus_operator(j, st, theta_a).matrix
            exact_tr = povm_norm_bound(pi_i, kr, pi_f)[2] * dj
            exact = -np.log2(exact_tr) if exact_tr > PROB_FLOOR else np.inf
            if abs(x) >= 1:
                if strict:
                    raise TaylorValidityError(f"|2 Re(g_j A_wv)| = {abs(x):.3g} at j = {j:.3g}")
                fallbacks += 1
                term = exact
            else:
                term = -np.log2(prob) - x / np.log(2)
            terms[(i, k, f)] = float(term)
            best_exact = min(best_exact, exact)
            if term < best:
                best, arg = term, (i, float(j), f)
    if arg is None:
        raise DegenerateConfigurationError("no (i, j, f) cell has nonzero probability")
    return EurBoundResult(float(best), arg, terms, fallbacks, float(best_exact))


@dataclass(frozen=True)
class BoundReport:
    theta_rho: float
    theta_a: float
    theta_f: float
    s: float
    H_I: float
    H_AF: float
    H_AF_norm: float
    bounds: dict
    argmin: tuple

    CSV_COLUMNS = ("theta_rho", "theta_a", "theta_f", "s", "H_I", "H_AF", "H_AF_norm", "bound_trivial",
                   "bound_deutsch", "bound_mu", "bound_eur", "argmin_i", "argmin_j", "argmin_f")

    def row(self) -> list:
        b = self.bounds
        return [self.theta_rho, self.theta_a, self.theta_f, self.s, self.H_I, self.H_AF, self.H_AF_norm,
                b["trivial"], b["deutsch"], b["mu"], b["weak_value_eur"], *self.argmin]


def bound_report(theta_rho: float, theta_a: float, theta_f: float, s, readout: ReadoutModel | None = None,
                 H_I: float = float("nan"), H_AF: float = float("nan"),
                 H_AF_norm: float = float("nan"), theta_i: float = 0.0) -> BoundReport:
    """Collect every bound for one configuration; entropies are filled in by the caller."""
    st = as_strength(s)
    eur = eur_bound(theta_a, theta_f, st, readout, theta_i=theta_i)
    bounds = {
        "trivial": trivial_bound(),
        "deutsch": deutsch_bound(theta_i, theta_f),
        "mu": maassen_uffink_bound(theta_i, theta_f),
        "tomamichel": eur.exact_value,
        "weak_value_eur": eur.value,
    }
    return BoundReport(theta_rho, theta_a, theta_f, st.s, H_I, H_AF, H_AF_norm, bounds, eur.argmin)


__all__ = [
    "trivial_bound", "deutsch_bound", "maassen_uffink_bound", "povm_norm_bound", "taylor_weights",
    "conditional_probability", "eur_bound", "EurBoundResult", "BoundReport", "bound_report",
    "DegenerateConfigurationError", "TaylorValidityError", "overlaps", "pauli_axis_operator",
]
